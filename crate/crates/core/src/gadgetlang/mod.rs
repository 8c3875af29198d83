//! A small language of NFA gadgets.
//!
//! Programs manipulate fixed-width unsigned variables. Each statement compiles to a gadget: a
//! set of control states and fresh letters acting on the states of the variables it touches.
//! A word avoids the accepting sink `q_acc` exactly when it spells a proper computation, so
//! the compiled NFA rejects a word only if the word describes a legal run of the program that
//! does not end in a final state.

pub mod ast;
pub mod compile;
pub mod expand;
pub mod parse;
pub mod sim;

pub use ast::{Cond, Program, Role, Stmt, VarDecl, VarId, MAX_WIDTH};
pub use compile::{check_parallel_body, compile, CompiledNfa, CompiledVar, Span};
pub use expand::{delay_length, delay_width, expand_macros, least_delay_covering};
pub use parse::parse_program;
pub use sim::{
    active_control, complete_configurations, complete_lengths, configuration_at, enumerate_computations,
    enumerate_computations_with, has_complete, initial_configuration, is_proper, longest_complete,
    longest_complete_bound, proper_layers, value_of, Computation, VarInit, DEFAULT_BOUND_BUDGET,
    DEFAULT_ENUM_BUDGET,
};

use crate::error::Result;

/// Expands macros and compiles.
pub fn compile_program(program: &Program) -> Result<CompiledNfa> {
    compile(&expand_macros(program)?)
}

/// Parses, expands and compiles program text at width `width`.
pub fn compile_text(text: &str, width: u32) -> Result<CompiledNfa> {
    compile_program(&parse_program(text, width)?)
}

//! Length universality for finite automata.
//!
//! Given an automaton `M` over `Σ`, the toolkit answers two questions:
//!
//! * *given length*: is every word of length `ℓ` accepted?
//! * *existential length*: is there some `ℓ ≥ 0` with `Σ^ℓ ⊆ L(M)`, and what is the least one?
//!
//! Around the solvers sit the generators for the witness families (prime cycles, the 3-SAT
//! encoding, the counter program with a doubly exponential universality length), a small
//! gadget programming language that compiles to NFAs, a formula language whose satisfaction
//! can be checked either arithmetically or by running the compiled verifying gadget, and the
//! Turing machine to formula reduction with its Chinese-remainder table encoding.

pub mod automata;
pub mod bitset;
pub mod boolmat;
pub mod error;
pub mod formulas;
pub mod gadgetlang;
pub mod reductions;
pub mod regex;
pub mod solvers;

#[cfg(test)]
mod testutil;

pub use automata::{Automaton, Kind, StateId, StateSet};
pub use boolmat::BoolMatrix;
pub use error::{Error, Result};
pub use solvers::UniversalityReport;

/// Default cap on the number of subset states produced by determinization.
pub const DEFAULT_DET_CAP: usize = 1_000_000;

/// Default cap on the number of reachable-state vectors remembered by the cycle detector.
pub const DEFAULT_HISTORY_CAP: usize = 1_000_000;

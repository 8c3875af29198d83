//! The counter program whose least universality length grows doubly exponentially in `m`.

use crate::error::{Error, Result};
use crate::gadgetlang::{compile_text, CompiledNfa};

/// Program text for width `m`: pick a target `Y`, then count `X` up to it over and over.
///
/// Every value of `Y` yields runs of period `(2m+3)(Y+1)` plus a tail, so a universal length
/// must be a common multiple of all these periods.
pub fn alg3_program(m: u32) -> String {
    format!(
        "var X, Y;\n\
         select Y;\n\
         X <- 0;\n\
         while true {{\n  \
           choose {{\n    eq X Y;\n    X <- 0;\n    final wait {w};\n  }} or {{\n    neq X Y;\n    inc X;\n  }}\n\
         }}\n",
        w = m + 1
    )
}

/// The compiled counter NFA for width `m`.
pub fn alg3_nfa(m: u32) -> Result<CompiledNfa> {
    if m == 0 {
        return Err(Error::input("width must be at least 1"));
    }
    compile_text(&alg3_program(m), m)
}

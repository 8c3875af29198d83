//! Macro expansion into basic gadgets and joining constructions.
//!
//! Every expansion declares its own fresh internal variables, named `_<macro><n>.<X>`.

use super::ast::{Cond, Program, Role, Stmt, VarId};
use super::compile::check_parallel_body;
use super::sim::{longest_complete_bound, DEFAULT_BOUND_BUDGET};
use crate::error::Result;

/// Number of bits needed for `d`, i.e. the least `m'` with `d ≤ 2^{m'} − 1`.
pub fn delay_width(d: u64) -> u32 {
    64 - d.leading_zeros()
}

/// Exact length of the unique complete computation of `delay d`.
pub fn delay_length(d: u64) -> u128 {
    let w = delay_width(d) as u128;
    let d = d as u128;
    2 + d * (1 + 2 * (w + 1)) + 1 + w
}

/// Least `D ≥ 1` whose delay is at least `bound` letters long.
pub fn least_delay_covering(bound: u128) -> u64 {
    let mut d = 1u64;
    while delay_length(d) < bound {
        d += 1;
    }
    d
}

struct Expander {
    program: Program,
    counter: usize,
}

impl Expander {
    fn fresh(&mut self, tag: &str, names: &[&str], width: u32) -> Result<Vec<VarId>> {
        self.counter += 1;
        let n = self.counter;
        names
            .iter()
            .map(|x| self.program.declare(&format!("_{tag}{n}.{x}"), width, Role::Internal))
            .collect()
    }

    fn expand_all(&mut self, body: &[Stmt]) -> Result<Vec<Stmt>> {
        body.iter().map(|s| self.expand(s)).collect()
    }

    fn expand_cond(&mut self, c: &Cond) -> Result<Cond> {
        Ok(match c {
            Cond::Prime(v) => Cond::Gadget {
                holds: vec![self.prime(*v)?],
                fails: vec![self.not_prime(*v)?],
            },
            Cond::NotPrime(v) => Cond::Gadget {
                holds: vec![self.not_prime(*v)?],
                fails: vec![self.prime(*v)?],
            },
            Cond::Gadget { holds, fails } => Cond::Gadget {
                holds: self.expand_all(holds)?,
                fails: self.expand_all(fails)?,
            },
            plain => plain.clone(),
        })
    }

    fn expand(&mut self, s: &Stmt) -> Result<Stmt> {
        Ok(match s {
            Stmt::Seq(b) => Stmt::Seq(self.expand_all(b)?),
            Stmt::Choose(branches) => Stmt::Choose(
                branches
                    .iter()
                    .map(|b| self.expand_all(b))
                    .collect::<Result<_>>()?,
            ),
            Stmt::If { cond, then, els } => Stmt::If {
                cond: self.expand_cond(cond)?,
                then: self.expand_all(then)?,
                els: els.as_ref().map(|e| self.expand_all(e)).transpose()?,
            },
            Stmt::While { cond, body } => Stmt::While {
                cond: self.expand_cond(cond)?,
                body: self.expand_all(body)?,
            },
            Stmt::WhileTrue(b) => Stmt::WhileTrue(self.expand_all(b)?),
            Stmt::Parallel { body, delay } => {
                let body = self.expand_all(body)?;
                check_parallel_body(&body)?;
                let delay = match delay {
                    Some(d) => *d,
                    None => {
                        let bound = longest_complete_bound(&self.program, &body, DEFAULT_BOUND_BUDGET)?;
                        least_delay_covering(bound as u128)
                    }
                };
                let timer = vec![self.delay(delay)?];
                Stmt::ParallelCore { body, timer, delay }
            }
            Stmt::Final(inner) => Stmt::Final(Box::new(self.expand(inner)?)),
            Stmt::Delay(d) => self.delay(*d)?,
            Stmt::Add { w, u, v } => self.add(*w, *u, *v)?,
            Stmt::Mul { w, u, v } => self.mul(*w, *u, *v)?,
            Stmt::Prime(p) => self.prime(*p)?,
            Stmt::NotPrime(p) => self.not_prime(*p)?,
            Stmt::NthPrime { p, u } => self.nth_prime(*p, *u)?,
            basic => basic.clone(),
        })
    }

    /// X ← 0; Y ← D; while X ≠ Y { X++ }, with X, Y of the least sufficient width.
    fn delay(&mut self, d: u64) -> Result<Stmt> {
        let v = self.fresh("delay", &["X", "Y"], delay_width(d))?;
        let (x, y) = (v[0], v[1]);
        Ok(Stmt::Seq(vec![
            Stmt::AssignConst(x, 0),
            Stmt::AssignConst(y, d),
            Stmt::While {
                cond: Cond::Neq(x, y),
                body: vec![Stmt::Inc(x)],
            },
        ]))
    }

    /// W ← U; X ← 0; while X ≠ V { X++; W++ }
    fn add(&mut self, w: VarId, u: VarId, v: VarId) -> Result<Stmt> {
        let x = self.fresh("add", &["X"], self.program.width)?[0];
        Ok(Stmt::Seq(vec![
            Stmt::AssignVar { dst: w, src: u },
            Stmt::AssignConst(x, 0),
            Stmt::While {
                cond: Cond::Neq(x, v),
                body: vec![Stmt::Inc(x), Stmt::Inc(w)],
            },
        ]))
    }

    /// W ← 0; X ← 0; while X ≠ V { X++; W' ← W + U; W ← W' }
    fn mul(&mut self, w: VarId, u: VarId, v: VarId) -> Result<Stmt> {
        let vars = self.fresh("mul", &["X", "W'"], self.program.width)?;
        let (x, w2) = (vars[0], vars[1]);
        let add = self.add(w2, w, u)?;
        Ok(Stmt::Seq(vec![
            Stmt::AssignConst(w, 0),
            Stmt::AssignConst(x, 0),
            Stmt::While {
                cond: Cond::Neq(x, v),
                body: vec![Stmt::Inc(x), add, Stmt::AssignVar { dst: w, src: w2 }],
            },
        ]))
    }

    /// A gadget with no complete computation: Z ← 0; O ← 1; Z = O.
    fn failing(&mut self, tag: &str) -> Result<Stmt> {
        let v = self.fresh(tag, &["Z", "O"], self.program.width)?;
        Ok(Stmt::Seq(vec![
            Stmt::AssignConst(v[0], 0),
            Stmt::AssignConst(v[1], 1),
            Stmt::Eq(v[0], v[1]),
        ]))
    }

    /// Trial division: for every 2 ≤ X < P, count P steps modulo X and require a non-zero
    /// remainder. P ∈ {0, 1} never reaches X = P, so the final increment overflows.
    fn prime(&mut self, p: VarId) -> Result<Stmt> {
        if self.program.width < 2 {
            // every value of a 1-bit variable is below 2
            return self.failing("prime");
        }
        let v = self.fresh("prime", &["X", "C", "R", "Z"], self.program.width)?;
        let (x, c, r, z) = (v[0], v[1], v[2], v[3]);
        Ok(Stmt::Seq(vec![
            Stmt::AssignConst(x, 2),
            Stmt::While {
                cond: Cond::Neq(x, p),
                body: vec![
                    Stmt::AssignConst(c, 0),
                    Stmt::AssignConst(r, 0),
                    Stmt::While {
                        cond: Cond::Neq(c, p),
                        body: vec![
                            Stmt::Inc(c),
                            Stmt::Inc(r),
                            Stmt::If {
                                cond: Cond::Eq(r, x),
                                then: vec![Stmt::AssignConst(r, 0)],
                                els: None,
                            },
                        ],
                    },
                    Stmt::AssignConst(z, 0),
                    Stmt::Neq(r, z),
                    Stmt::Inc(x),
                ],
            },
        ]))
    }

    /// P ∈ {0, 1}, or P = X·Y for selected X, Y ∉ {0, 1, P}.
    fn not_prime(&mut self, p: VarId) -> Result<Stmt> {
        let v = self.fresh("notprime", &["X", "Y", "Z", "K0", "K1"], self.program.width)?;
        let (x, y, z, k0, k1) = (v[0], v[1], v[2], v[3], v[4]);
        let mut factor = vec![Stmt::Select(x), Stmt::Select(y), Stmt::AssignConst(k0, 0), Stmt::AssignConst(k1, 1)];
        for f in [x, y] {
            factor.extend([Stmt::Neq(f, k0), Stmt::Neq(f, k1), Stmt::Neq(f, p)]);
        }
        factor.push(self.mul(z, x, y)?);
        factor.push(Stmt::Eq(z, p));
        Ok(Stmt::Choose(vec![
            vec![Stmt::AssignConst(k0, 0), Stmt::Eq(p, k0)],
            vec![Stmt::AssignConst(k1, 1), Stmt::Eq(p, k1)],
            factor,
        ]))
    }

    /// P ← 2; X ← 1; while X ≠ U { P++; if P is prime { X++ } }
    fn nth_prime(&mut self, p: VarId, u: VarId) -> Result<Stmt> {
        if self.program.width < 2 {
            return self.failing("nthprime");
        }
        let x = self.fresh("nthprime", &["X"], self.program.width)?[0];
        let holds = self.prime(p)?;
        let fails = self.not_prime(p)?;
        Ok(Stmt::Seq(vec![
            Stmt::AssignConst(p, 2),
            Stmt::AssignConst(x, 1),
            Stmt::While {
                cond: Cond::Neq(x, u),
                body: vec![
                    Stmt::Inc(p),
                    Stmt::If {
                        cond: Cond::Gadget {
                            holds: vec![holds],
                            fails: vec![fails],
                        },
                        then: vec![Stmt::Inc(x)],
                        els: None,
                    },
                ],
            },
        ]))
    }
}

/// Replaces every macro (`delay`, `add`, `mul`, `prime`, `notprime`, `nthprime`, and prime
/// conditions) by basic gadgets, declaring fresh internal variables as needed.
pub fn expand_macros(program: &Program) -> Result<Program> {
    let mut e = Expander {
        program: program.clone(),
        counter: 0,
    };
    let body = e.expand_all(&program.body)?;
    e.program.body = body;
    Ok(e.program)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gadgetlang::parse_program;

    #[test]
    fn delay_lengths() {
        assert_eq!(delay_width(1), 1);
        assert_eq!(delay_width(3), 2);
        assert_eq!(delay_width(4), 3);
        assert_eq!(delay_length(1), 9);
        // m' = 2: 2 + 3·7 + 1 + 2
        assert_eq!(delay_length(3), 26);
        assert_eq!(least_delay_covering(9), 1);
        assert_eq!(least_delay_covering(10), 2);
        assert_eq!(least_delay_covering(0), 1);
    }

    #[test]
    fn add_matches_listing() {
        let p = parse_program("var W, U, V; add W U V;", 2).unwrap();
        let e = expand_macros(&p).unwrap();
        let (w, u, v) = (0, 1, 2);
        let x = e.var("_add1.X").unwrap();
        assert_eq!(e.vars[x].role, Role::Internal);
        assert_eq!(
            e.body,
            vec![Stmt::Seq(vec![
                Stmt::AssignVar { dst: w, src: u },
                Stmt::AssignConst(x, 0),
                Stmt::While { cond: Cond::Neq(x, v), body: vec![Stmt::Inc(x), Stmt::Inc(w)] },
            ])]
        );
    }

    #[test]
    fn delay_uses_narrow_variables() {
        let p = parse_program("delay 1;", 4).unwrap();
        let e = expand_macros(&p).unwrap();
        let x = e.var("_delay1.X").unwrap();
        let y = e.var("_delay1.Y").unwrap();
        assert_eq!(e.vars[x].width, 1);
        assert_eq!(
            e.body,
            vec![Stmt::Seq(vec![
                Stmt::AssignConst(x, 0),
                Stmt::AssignConst(y, 1),
                Stmt::While { cond: Cond::Neq(x, y), body: vec![Stmt::Inc(x)] },
            ])]
        );
    }

    #[test]
    fn macro_free_program_unchanged() {
        let p = parse_program("var X, Y; select X; Y <- X; while neq X Y { inc Y; }", 2).unwrap();
        assert_eq!(expand_macros(&p).unwrap(), p);
    }

    #[test]
    fn prime_condition_becomes_gadget_pair() {
        let p = parse_program("var P; select P; if prime P { inc P; }", 3).unwrap();
        let e = expand_macros(&p).unwrap();
        let Stmt::If { cond: Cond::Gadget { holds, fails }, .. } = &e.body[1] else { panic!() };
        assert!(!holds.is_empty() && !fails.is_empty());
        assert!(e.body.iter().all(|s| !s.is_macro()));
    }
}

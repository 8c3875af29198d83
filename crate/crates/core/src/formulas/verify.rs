//! Gadget programs that check a formula body and count divisors of `ℓ'`.

use super::{Atom, Formula, Node};
use crate::error::{Error, Result};
use crate::gadgetlang::{
    delay_length, expand_macros, least_delay_covering, longest_complete_bound, Cond, Program,
    Stmt, VarId, DEFAULT_BOUND_BUDGET,
};

/// Name of the counter paired with formula variable `x`.
fn counter_name(x: &str) -> String {
    format!("{x}'")
}

/// Declares `X_i` and the counters `X'_i` as external variables, in that order.
fn declare_variables(f: &Formula, p: &mut Program) -> Result<(Vec<VarId>, Vec<VarId>)> {
    for v in &f.vars {
        if f.vars.contains(&counter_name(v)) {
            return Err(Error::input(format!(
                "variable `{}` clashes with the counter of `{v}`",
                counter_name(v)
            )));
        }
    }
    let xs = f.vars.iter().map(|v| p.external(v)).collect::<Result<Vec<_>>>()?;
    let cs = f
        .vars
        .iter()
        .map(|v| p.external(&counter_name(v)))
        .collect::<Result<Vec<_>>>()?;
    Ok((xs, cs))
}

struct Builder<'a> {
    p: &'a mut Program,
    xs: Vec<VarId>,
    cs: Vec<VarId>,
    fresh: usize,
}

impl Builder<'_> {
    fn scratch(&mut self) -> Result<VarId> {
        self.fresh += 1;
        let name = format!("_verify{}.C", self.fresh);
        self.p.internal(&name)
    }

    fn node(&mut self, n: &Node) -> Result<Vec<Stmt>> {
        Ok(match n {
            Node::And(ch) => {
                let mut out = Vec::new();
                for c in ch {
                    out.extend(self.node(c)?);
                }
                out
            }
            Node::Or(ch) if ch.len() == 1 => self.node(&ch[0])?,
            Node::Or(ch) => vec![Stmt::Choose(
                ch.iter().map(|c| self.node(c)).collect::<Result<Vec<_>>>()?,
            )],
            Node::Atom(a) => self.atom(a)?,
        })
    }

    fn atom(&mut self, a: &Atom) -> Result<Vec<Stmt>> {
        let xs = self.xs.clone();
        let x = |i: usize| xs[i];
        Ok(match *a {
            Atom::EqConst(i, c) => {
                let t = self.scratch()?;
                vec![Stmt::AssignConst(t, c), Stmt::Eq(x(i), t)]
            }
            Atom::SumEq(h, i, j) => {
                let t = self.scratch()?;
                vec![Stmt::Add { w: t, u: x(i), v: x(j) }, Stmt::Eq(x(h), t)]
            }
            Atom::ProdEq(h, i, j) => {
                let t = self.scratch()?;
                vec![Stmt::Mul { w: t, u: x(i), v: x(j) }, Stmt::Eq(x(h), t)]
            }
            Atom::IsPrime(i) => vec![Stmt::Prime(x(i))],
            Atom::NthPrime(p, u) => {
                let t = self.scratch()?;
                vec![Stmt::NthPrime { p: t, u: x(u) }, Stmt::Eq(x(p), t)]
            }
            Atom::Divides(i) | Atom::NotDivides(i) => {
                let t = self.scratch()?;
                let test = if matches!(a, Atom::Divides(_)) {
                    Stmt::Eq(self.cs[i], t)
                } else {
                    Stmt::Neq(self.cs[i], t)
                };
                vec![Stmt::AssignConst(t, 0), test]
            }
        })
    }
}

/// Statements checking `ψ` over the variables `xs` and counters `cs` of `p`.
///
/// When `X_i = x` and the counter holds `ℓ' mod x`, the statements have a complete
/// computation exactly when `ψ` holds at these values.
pub fn verify_body(f: &Formula, p: &mut Program, xs: &[VarId], cs: &[VarId]) -> Result<Vec<Stmt>> {
    let mut b = Builder {
        p,
        xs: xs.to_vec(),
        cs: cs.to_vec(),
        fresh: 0,
    };
    b.node(&f.body)
}

/// A standalone program that checks the body of `f`.
///
/// Variables `X_1..X_k` come first, then counters `X_1'..X_k'`, then scratch variables.
pub fn verify_to_program(f: &Formula) -> Result<Program> {
    f.validate()?;
    let mut p = Program::new(f.width)?;
    let (xs, cs) = declare_variables(f, &mut p)?;
    let body = verify_body(f, &mut p, &xs, &cs)?;
    p.body = vec![Stmt::Seq(body)];
    p.validate()?;
    Ok(p)
}

/// The divisibility program for a formula together with its timing constants.
#[derive(Debug, Clone)]
pub struct Divisibility {
    pub program: Program,
    /// Delay used by both branches of the loop.
    pub delay: u64,
    /// Longest complete computation of the checking statements.
    pub verify_bound: u64,
    /// Length of the prefix up to the first loop iteration.
    pub r1: u64,
    /// Length of one loop iteration.
    pub r2: u64,
}

/// Builds a program that is universal at length `r1 + r2·ℓ'` exactly when the formula
/// holds at `ℓ'`.
/// The waiting branch: as long as `delay D`, but built so that a run which
/// re-enters the delay loop when it should leave has died before the final
/// state. A bare `delay D` keeps such a run alive for exactly its last letter.
fn idle_branch(delay: u64) -> Vec<Stmt> {
    let total = delay_length(delay);
    let mut branch = if delay == 1 {
        vec![Stmt::Wait(total as u64)]
    } else {
        vec![
            Stmt::Delay(delay - 1),
            Stmt::Wait((total - delay_length(delay - 1)) as u64),
        ]
    };
    branch.push(Stmt::Final(Box::new(Stmt::Wait(1))));
    branch
}

pub fn divisibility_program(f: &Formula) -> Result<Divisibility> {
    let verify = verify_to_program(f)?;
    let expanded = expand_macros(&verify)?;
    let bound = longest_complete_bound(&expanded, &expanded.body, DEFAULT_BOUND_BUDGET)?;
    let delay = least_delay_covering(bound as u128);

    let mut p = Program::new(f.width)?;
    let (xs, cs) = declare_variables(f, &mut p)?;
    let check = verify_body(f, &mut p, &xs, &cs)?;
    let mut body: Vec<Stmt> = xs.iter().map(|&x| Stmt::Select(x)).collect();
    body.extend(cs.iter().map(|&c| Stmt::AssignConst(c, 0)));
    let mut iteration = vec![Stmt::Choose(vec![
        vec![Stmt::Parallel { body: check, delay: Some(delay) }],
        idle_branch(delay),
    ])];
    for (&x, &c) in xs.iter().zip(&cs) {
        iteration.push(Stmt::Inc(c));
        iteration.push(Stmt::If {
            cond: Cond::Eq(c, x),
            then: vec![Stmt::AssignConst(c, 0)],
            els: None,
        });
    }
    body.push(Stmt::WhileTrue(iteration));
    p.body = body;
    p.validate()?;

    let (k, m) = (f.vars.len() as u64, f.width as u64);
    let t = delay_length(delay) as u64;
    Ok(Divisibility {
        program: p,
        delay,
        verify_bound: bound,
        r1: 1 + (t + 1) + (2 * m + 3) * k,
        r2: k * m + k + 1 + t,
    })
}

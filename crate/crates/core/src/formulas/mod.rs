//! Existential formulas over bounded integers and the length `ℓ'`.
//!
//! A formula `∃ X_1..X_k ∈ {0..2^m−1}. ψ` has a body built from `and`, `or` and atoms:
//! constants, sums, products, primality, "is the n'th prime", and divisibility of `ℓ'`.

mod eval;
mod parse;
mod verify;

pub use eval::{eval_formula, eval_with};
pub use parse::{parse_formula, store_formula};
pub use verify::{divisibility_program, verify_body, verify_to_program, Divisibility};

use crate::error::{Error, Result};

pub type FVar = usize;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Atom {
    /// `X = c`
    EqConst(FVar, u64),
    /// `X_h = X_i + X_j`
    SumEq(FVar, FVar, FVar),
    /// `X_h = X_i · X_j`
    ProdEq(FVar, FVar, FVar),
    IsPrime(FVar),
    /// `X_i` is the `X_j`'th prime.
    NthPrime(FVar, FVar),
    Divides(FVar),
    NotDivides(FVar),
}

impl Atom {
    pub fn vars(&self) -> Vec<FVar> {
        match *self {
            Atom::EqConst(x, _) | Atom::IsPrime(x) | Atom::Divides(x) | Atom::NotDivides(x) => vec![x],
            Atom::SumEq(h, i, j) | Atom::ProdEq(h, i, j) => vec![h, i, j],
            Atom::NthPrime(p, n) => vec![p, n],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Node {
    And(Vec<Node>),
    Or(Vec<Node>),
    Atom(Atom),
}

impl Node {
    pub fn atoms(&self) -> Box<dyn Iterator<Item = &Atom> + '_> {
        match self {
            Node::Atom(a) => Box::new(std::iter::once(a)),
            Node::And(ch) | Node::Or(ch) => Box::new(ch.iter().flat_map(Node::atoms)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Formula {
    pub vars: Vec<String>,
    pub width: u32,
    pub body: Node,
}

impl Formula {
    pub fn new(vars: Vec<String>, width: u32, body: Node) -> Result<Formula> {
        let f = Formula { vars, width, body };
        f.validate()?;
        Ok(f)
    }

    pub fn max_value(&self) -> u64 {
        (1u64 << self.width) - 1
    }

    pub fn var(&self, name: &str) -> Option<FVar> {
        self.vars.iter().position(|v| v == name)
    }

    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || self.width > crate::gadgetlang::MAX_WIDTH {
            return Err(Error::input(format!("formula width {} out of range", self.width)));
        }
        for (i, v) in self.vars.iter().enumerate() {
            if self.vars[..i].contains(v) {
                return Err(Error::input(format!("variable `{v}` quantified twice")));
            }
        }
        fn check(n: &Node, f: &Formula) -> Result<()> {
            match n {
                Node::And(ch) | Node::Or(ch) => {
                    if ch.is_empty() {
                        return Err(Error::input("`and`/`or` needs at least one operand"));
                    }
                    ch.iter().try_for_each(|c| check(c, f))
                }
                Node::Atom(a) => {
                    if a.vars().iter().any(|&v| v >= f.vars.len()) {
                        return Err(Error::input("atom refers to an unknown variable"));
                    }
                    if let Atom::EqConst(_, c) = a {
                        if *c > f.max_value() {
                            return Err(Error::input(format!(
                                "constant {c} exceeds 2^{} − 1",
                                f.width
                            )));
                        }
                    }
                    Ok(())
                }
            }
        }
        check(&self.body, self)
    }
}

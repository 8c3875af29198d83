//! Evaluation of formulas at a given `ℓ'`.

use std::collections::HashMap;

use num_bigint::BigUint;
use num_traits::Zero;

use super::{Atom, Formula, Node};
use crate::error::{Error, Result};
use crate::reductions::{is_prime, nth_prime, MAX_PRIME_INDEX};

/// Most candidate values tried for the unknown factor of a product.
pub const MAX_FACTOR_CANDIDATES: u64 = 1 << 20;

struct Oracle<'a> {
    ell: &'a BigUint,
    ell_zero: bool,
    max: u64,
    nth: HashMap<u64, u64>,
    primes: HashMap<u64, bool>,
    divides: HashMap<u64, bool>,
}

impl<'a> Oracle<'a> {
    fn new(ell: &'a BigUint, width: u32) -> Self {
        Oracle {
            ell,
            ell_zero: ell.is_zero(),
            max: (1u64 << width) - 1,
            nth: HashMap::new(),
            primes: HashMap::new(),
            divides: HashMap::new(),
        }
    }

    /// `p(u)` when it is representable, `None` when it exceeds the width.
    fn nth(&mut self, u: u64) -> Result<Option<u64>> {
        if u == 0 || u > self.max {
            return Ok(None);
        }
        if let Some(&p) = self.nth.get(&u) {
            return Ok(Some(p).filter(|&p| p <= self.max));
        }
        if u > MAX_PRIME_INDEX {
            return Err(Error::resource("prime index", MAX_PRIME_INDEX));
        }
        let p = nth_prime(u)?;
        self.nth.insert(u, p);
        Ok(Some(p).filter(|&p| p <= self.max))
    }

    fn prime(&mut self, x: u64) -> bool {
        *self.primes.entry(x).or_insert_with(|| is_prime(x))
    }

    fn divides(&mut self, x: u64) -> bool {
        if x == 0 {
            return self.ell_zero;
        }
        let ell = self.ell;
        *self
            .divides
            .entry(x)
            .or_insert_with(|| (ell % x).is_zero())
    }
}

/// Truth of the body with every variable fixed.
pub fn eval_with(f: &Formula, values: &[u64], ell: &BigUint) -> Result<bool> {
    if values.len() != f.vars.len() {
        return Err(Error::input(format!(
            "expected {} values, got {}",
            f.vars.len(),
            values.len()
        )));
    }
    if let Some(v) = values.iter().find(|&&v| v > f.max_value()) {
        return Err(Error::input(format!("value {v} exceeds 2^{} − 1", f.width)));
    }
    let mut o = Oracle::new(ell, f.width);
    direct(&f.body, values, &mut o)
}

fn direct(n: &Node, v: &[u64], o: &mut Oracle) -> Result<bool> {
    Ok(match n {
        Node::And(ch) => {
            for c in ch {
                if !direct(c, v, o)? {
                    return Ok(false);
                }
            }
            true
        }
        Node::Or(ch) => {
            for c in ch {
                if direct(c, v, o)? {
                    return Ok(true);
                }
            }
            false
        }
        Node::Atom(a) => match *a {
            Atom::EqConst(x, c) => v[x] == c,
            Atom::SumEq(h, i, j) => v[h] as u128 == v[i] as u128 + v[j] as u128,
            Atom::ProdEq(h, i, j) => v[h] as u128 == v[i] as u128 * v[j] as u128,
            Atom::IsPrime(x) => o.prime(v[x]),
            Atom::NthPrime(p, u) => o.prime(v[p]) && o.nth(v[u])? == Some(v[p]),
            Atom::Divides(x) => o.divides(v[x]),
            Atom::NotDivides(x) => !o.divides(v[x]),
        },
    })
}

/// Static check that every variable is defined before it is used, in evaluation order.
fn check_definitional(f: &Formula) -> Result<()> {
    fn walk(n: &Node, f: &Formula, defined: &mut Vec<bool>) -> Result<()> {
        let undefined = |v: usize| Error::NonDefinitional {
            variable: f.vars[v].clone(),
        };
        match n {
            Node::And(ch) => ch.iter().try_for_each(|c| walk(c, f, defined)),
            Node::Or(ch) => {
                let before = defined.clone();
                let mut after: Option<Vec<bool>> = None;
                for c in ch {
                    let mut d = before.clone();
                    walk(c, f, &mut d)?;
                    after = Some(match after {
                        None => d,
                        Some(a) => a.iter().zip(&d).map(|(x, y)| *x && *y).collect(),
                    });
                }
                *defined = after.unwrap_or(before);
                Ok(())
            }
            Node::Atom(a) => {
                let need = |v: usize, d: &Vec<bool>| if d[v] { Ok(()) } else { Err(undefined(v)) };
                match *a {
                    Atom::EqConst(x, _) => defined[x] = true,
                    Atom::SumEq(h, i, j) => {
                        need(i, defined)?;
                        need(j, defined)?;
                        defined[h] = true;
                    }
                    Atom::ProdEq(h, i, j) => {
                        if !defined[i] && (i == j || !defined[j]) {
                            return Err(undefined(i));
                        }
                        defined[i] = true;
                        defined[j] = true;
                        defined[h] = true;
                    }
                    Atom::IsPrime(x) | Atom::Divides(x) | Atom::NotDivides(x) => need(x, defined)?,
                    Atom::NthPrime(p, u) => {
                        need(u, defined)?;
                        defined[p] = true;
                    }
                }
                Ok(())
            }
        }
    }
    walk(&f.body, f, &mut vec![false; f.vars.len()])
}

struct Search<'a> {
    oracle: Oracle<'a>,
    env: Vec<Option<u64>>,
    trail: Vec<usize>,
}

enum Step {
    Fail,
    Ok,
    /// The atom is satisfied by each of these assignments to `(var, value)` pairs.
    Branch(Vec<[(usize, u64); 2]>),
}

impl Search<'_> {
    fn set(&mut self, v: usize, x: u64) -> bool {
        match self.env[v] {
            Some(y) => y == x,
            None => {
                self.env[v] = Some(x);
                self.trail.push(v);
                true
            }
        }
    }

    fn undo(&mut self, mark: usize) {
        while self.trail.len() > mark {
            let v = self.trail.pop().unwrap();
            self.env[v] = None;
        }
    }

    fn val(&self, v: usize) -> u64 {
        self.env[v].expect("definitional check guarantees a value")
    }

    fn atom(&mut self, a: &Atom) -> Result<Step> {
        let max = self.oracle.max;
        let ok = |b: bool| if b { Step::Ok } else { Step::Fail };
        Ok(match *a {
            Atom::EqConst(x, c) => ok(self.set(x, c)),
            Atom::SumEq(h, i, j) => {
                let s = self.val(i) as u128 + self.val(j) as u128;
                ok(s <= max as u128 && self.set(h, s as u64))
            }
            Atom::ProdEq(h, i, j) => match (self.env[i], self.env[j]) {
                (Some(x), Some(y)) => {
                    let p = x as u128 * y as u128;
                    ok(p <= max as u128 && self.set(h, p as u64))
                }
                (Some(k), None) => self.factor(h, j, k)?,
                (None, Some(k)) => self.factor(h, i, k)?,
                (None, None) => unreachable!("definitional check rejects two unknown factors"),
            },
            Atom::IsPrime(x) => {
                let x = self.val(x);
                ok(self.oracle.prime(x))
            }
            Atom::NthPrime(p, u) => {
                let u = self.val(u);
                match self.oracle.nth(u)? {
                    Some(q) => ok(self.set(p, q)),
                    None => Step::Fail,
                }
            }
            Atom::Divides(x) => {
                let x = self.val(x);
                ok(self.oracle.divides(x))
            }
            Atom::NotDivides(x) => {
                let x = self.val(x);
                ok(!self.oracle.divides(x))
            }
        })
    }

    /// `h = u · k` with `u` unknown.
    fn factor(&mut self, h: usize, u: usize, k: u64) -> Result<Step> {
        let max = self.oracle.max;
        if let Some(hv) = self.env[h] {
            if k != 0 {
                return Ok(if hv % k == 0 && self.set(u, hv / k) {
                    Step::Ok
                } else {
                    Step::Fail
                });
            }
            if hv != 0 {
                return Ok(Step::Fail);
            }
        }
        let top = if k == 0 { max } else { max / k };
        if top >= MAX_FACTOR_CANDIDATES {
            return Err(Error::resource("candidate values for a product factor", MAX_FACTOR_CANDIDATES));
        }
        Ok(Step::Branch((0..=top).map(|x| [(u, x), (h, x * k)]).collect()))
    }

    /// True when the conjunction of `work` (last element first) is satisfiable.
    /// The environment is left as it was found.
    fn run(&mut self, mut work: Vec<&Node>) -> Result<bool> {
        let mark = self.trail.len();
        let result = loop {
            let Some(n) = work.pop() else { break Ok(true) };
            match n {
                Node::And(ch) => work.extend(ch.iter().rev()),
                Node::Or(ch) => {
                    let mut found = false;
                    for c in ch {
                        let mut w = work.clone();
                        w.push(c);
                        if self.run(w)? {
                            found = true;
                            break;
                        }
                    }
                    break Ok(found);
                }
                Node::Atom(a) => match self.atom(a)? {
                    Step::Ok => {}
                    Step::Fail => break Ok(false),
                    Step::Branch(options) => {
                        let mut found = false;
                        for opt in options {
                            let m = self.trail.len();
                            if opt.iter().all(|&(v, x)| self.set(v, x)) && self.run(work.clone())? {
                                found = true;
                            }
                            self.undo(m);
                            if found {
                                break;
                            }
                        }
                        break Ok(found);
                    }
                },
            }
        };
        self.undo(mark);
        result
    }
}

/// Decides whether some assignment satisfies the formula at `ℓ'`.
///
/// Values are found by search: every variable must be fixed by a defining atom before
/// any other atom reads it. A product with one unknown factor tries each factor that keeps
/// the product in range.
pub fn eval_formula(f: &Formula, ell: &BigUint) -> Result<bool> {
    f.validate()?;
    check_definitional(f)?;
    let mut s = Search {
        oracle: Oracle::new(ell, f.width),
        env: vec![None; f.vars.len()],
        trail: Vec::new(),
    };
    s.run(vec![&f.body])
}

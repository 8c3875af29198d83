//! 3-CNF formulas, DIMACS input, and the reduction to existential length universality of DFAs.

use num_bigint::BigUint;
use num_traits::ToPrimitive;

use super::primes::first_primes;
use crate::automata::{Automaton, Kind};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Literal {
    /// 1-based variable index.
    pub var: usize,
    pub positive: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cnf {
    pub vars: usize,
    pub clauses: Vec<[Literal; 3]>,
}

impl Cnf {
    pub fn new(vars: usize, clauses: Vec<[Literal; 3]>) -> Result<Cnf> {
        for (n, c) in clauses.iter().enumerate() {
            for l in c {
                if l.var == 0 || l.var > vars {
                    return Err(Error::input(format!("clause {}: variable {} out of range", n + 1, l.var)));
                }
            }
            if c[0].var == c[1].var || c[0].var == c[2].var || c[1].var == c[2].var {
                return Err(Error::input(format!("clause {} repeats a variable", n + 1)));
            }
        }
        Ok(Cnf { vars, clauses })
    }

    /// `assignment[i]` is the value of variable `i + 1`.
    pub fn satisfied_by(&self, assignment: &[bool]) -> bool {
        self.clauses
            .iter()
            .all(|c| c.iter().any(|l| assignment[l.var - 1] == l.positive))
    }

    pub fn to_dimacs(&self) -> String {
        let mut out = format!("p cnf {} {}\n", self.vars, self.clauses.len());
        for c in &self.clauses {
            for l in c {
                let v = l.var as i64;
                out.push_str(&format!("{} ", if l.positive { v } else { -v }));
            }
            out.push_str("0\n");
        }
        out
    }
}

/// Reads DIMACS CNF. Every clause must have exactly three literals over distinct variables.
pub fn parse_dimacs(text: &str) -> Result<Cnf> {
    let mut header: Option<(usize, usize)> = None;
    let mut clauses = Vec::new();
    let mut current: Vec<(Literal, usize)> = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let ln = ln + 1;
        let line = line.trim();
        if line.is_empty() || line.starts_with('c') || line.starts_with('%') {
            continue;
        }
        if line.starts_with('p') {
            let parts: Vec<&str> = line.split_whitespace().collect();
            if parts.len() != 4 || parts[1] != "cnf" {
                return Err(Error::parse(format!("line {ln}"), "expected `p cnf VARS CLAUSES`"));
            }
            let num = |s: &str| {
                s.parse::<usize>()
                    .map_err(|_| Error::parse(format!("line {ln}"), format!("bad number `{s}`")))
            };
            header = Some((num(parts[2])?, num(parts[3])?));
            continue;
        }
        if header.is_none() {
            return Err(Error::parse(format!("line {ln}"), "clause before the `p cnf` header"));
        }
        for tok in line.split_whitespace() {
            let v: i64 = tok
                .parse()
                .map_err(|_| Error::parse(format!("line {ln}"), format!("bad literal `{tok}`")))?;
            if v == 0 {
                if current.len() != 3 {
                    return Err(Error::parse(
                        format!("line {ln}"),
                        format!("clause has {} literals, expected 3", current.len()),
                    ));
                }
                clauses.push([current[0].0, current[1].0, current[2].0]);
                current.clear();
            } else {
                current.push((
                    Literal {
                        var: v.unsigned_abs() as usize,
                        positive: v > 0,
                    },
                    ln,
                ));
            }
        }
    }
    let Some((vars, count)) = header else {
        return Err(Error::parse("end of input", "missing `p cnf` header"));
    };
    if !current.is_empty() {
        return Err(Error::parse(format!("line {}", current[0].1), "clause not terminated by 0"));
    }
    if clauses.len() != count {
        return Err(Error::parse(
            "header",
            format!("header announces {count} clauses, found {}", clauses.len()),
        ));
    }
    Cnf::new(vars, clauses).map_err(|e| match e {
        Error::Input(m) => Error::parse("clauses", m),
        other => other,
    })
}

/// Initial state, letter `j` leading into a cycle of length `p(a)p(b)p(c)` for the variables of
/// clause `j`. A cycle state is accepting when the length it stands for encodes (through its
/// residues modulo the three primes, each 0 or 1) an assignment satisfying the clause.
pub fn sat_to_dfa(cnf: &Cnf) -> Result<Automaton> {
    let s = cnf.clauses.len();
    let primes = first_primes(cnf.vars);
    let alphabet: Vec<String> = (1..=s).map(|j| j.to_string()).collect();
    let mut transitions = Vec::new();
    let mut finals = Vec::new();
    let mut next = 1usize;
    for (j, clause) in cnf.clauses.iter().enumerate() {
        let ps: Vec<u64> = clause.iter().map(|l| primes[l.var - 1]).collect();
        let size = (ps[0] * ps[1] * ps[2]) as usize;
        transitions.push((0, j, next));
        for x in 0..size {
            for a in 0..s {
                transitions.push((next + x, a, next + (x + 1) % size));
            }
            // state x is reached after x + 1 letters
            let value = (x + 1) % size;
            let residues: Vec<u64> = ps.iter().map(|&p| value as u64 % p).collect();
            if residues.iter().all(|&r| r <= 1)
                && clause.iter().zip(&residues).any(|(l, &r)| (r == 1) == l.positive)
            {
                finals.push(next + x);
            }
        }
        next += size;
    }
    Automaton::from_parts(Kind::Dfa, alphabet, next, &[0], &finals, transitions)
}

/// Reads an assignment off `length`: variable `i` is true when `length ≡ 1 (mod p(i))` and
/// false when `length ≡ 0`. Variables occurring in no clause are false.
pub fn decode_sat_assignment(length: &BigUint, cnf: &Cnf) -> Result<Vec<bool>> {
    let primes = first_primes(cnf.vars);
    let mut occurs = vec![false; cnf.vars];
    for c in &cnf.clauses {
        for l in c {
            occurs[l.var - 1] = true;
        }
    }
    (0..cnf.vars)
        .map(|i| {
            if !occurs[i] {
                return Ok(false);
            }
            let r = (length % primes[i]).to_u64().expect("residue below a u64 prime");
            match r {
                0 => Ok(false),
                1 => Ok(true),
                _ => Err(Error::input(format!(
                    "not an assignment-encoding length: residue {r} modulo p({}) = {}",
                    i + 1,
                    primes[i]
                ))),
            }
        })
        .collect()
}

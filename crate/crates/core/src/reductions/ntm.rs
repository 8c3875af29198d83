//! From a nondeterministic Turing machine to a formula over `ℓ'`.
//!
//! A computation of `2^s` steps on `2^s` tape cells is a `2^s × 2^s` table. Cell `(r, c)`
//! holds a symbol and possibly the machine state, written as an index `f ∈ {1..z}` with
//! `z = 2s + 2`. The table is stored in `ℓ'` by residues: `ℓ' ≡ 0 (mod p((2^s r + c)z + i))`
//! marks cell `(r, c)` with index `i`, residue 1 leaves it unmarked.
//!
//! The formula holds at `ℓ'` exactly when the marks do *not* form an accepting computation.

use std::collections::{BTreeSet, HashMap};

use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::primes::nth_prime;
use crate::error::{Error, Result};
use crate::formulas::{Atom, Formula, Node};

/// Largest supported number of states; the formula width is `11s`.
pub const MAX_NTM_STATES: usize = 4;

/// Search nodes visited by [`simulate_ntm`] before giving up.
pub const DEFAULT_SIMULATION_BUDGET: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Move {
    L,
    R,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Transition {
    pub from: usize,
    pub read: u8,
    pub to: usize,
    pub write: u8,
    pub dir: Move,
}

/// A machine with states `0..s`, tape alphabet `{0, 1}`, start `q0` and accepting `qf`.
///
/// The head never leaves the tape: a left move on the first cell stays put and a right move
/// on the last cell is not available. The accepting state has no transitions and the
/// machine rests there once it arrives.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ntm {
    pub states: usize,
    pub q0: usize,
    pub qf: usize,
    pub delta: Vec<Transition>,
}

#[derive(Serialize, Deserialize)]
struct NtmDocument {
    states: usize,
    q0: usize,
    qf: usize,
    delta: Vec<(usize, u8, usize, u8, Move)>,
}

impl Ntm {
    pub fn new(states: usize, q0: usize, qf: usize, delta: Vec<Transition>) -> Result<Ntm> {
        if states == 0 || states > MAX_NTM_STATES {
            return Err(Error::input(format!(
                "number of states must be in 1..={MAX_NTM_STATES}, got {states}"
            )));
        }
        if q0 >= states || qf >= states {
            return Err(Error::input("start or accepting state out of range"));
        }
        for t in &delta {
            if t.from >= states || t.to >= states {
                return Err(Error::input(format!("transition {t:?} uses an unknown state")));
            }
            if t.read > 1 || t.write > 1 {
                return Err(Error::input(format!("transition {t:?} uses a symbol other than 0 or 1")));
            }
            if t.from == qf {
                return Err(Error::input("the accepting state may not have outgoing transitions"));
            }
        }
        Ok(Ntm { states, q0, qf, delta })
    }

    pub fn from_json(text: &str) -> Result<Ntm> {
        let doc: NtmDocument =
            serde_json::from_str(text).map_err(|e| Error::parse(format!("{}:{}", e.line(), e.column()), e.to_string()))?;
        let delta = doc
            .delta
            .into_iter()
            .map(|(from, read, to, write, dir)| Transition { from, read, to, write, dir })
            .collect();
        Ntm::new(doc.states, doc.q0, doc.qf, delta)
    }

    pub fn to_json(&self) -> String {
        let doc = NtmDocument {
            states: self.states,
            q0: self.q0,
            qf: self.qf,
            delta: self.delta.iter().map(|t| (t.from, t.read, t.to, t.write, t.dir)).collect(),
        };
        serde_json::to_string(&doc).expect("machine serializes")
    }

    /// Side length `2^s` of the computation table.
    pub fn side(&self) -> usize {
        1 << self.states
    }

    /// Number of cell indices, `2s + 2`.
    pub fn z(&self) -> usize {
        2 * self.states + 2
    }

    pub fn width(&self) -> u32 {
        11 * self.states as u32
    }

    /// Index of a cell: `f(nil, b) = b + 1`, `f(q_i, b) = 3 + 2i + b`.
    pub fn index(&self, cell: Cell) -> usize {
        match cell.state {
            None => cell.symbol as usize + 1,
            Some(q) => 3 + 2 * q + cell.symbol as usize,
        }
    }

    pub fn cell(&self, index: usize) -> Option<Cell> {
        match index {
            1 | 2 => Some(Cell::blank(index as u8 - 1)),
            i if i >= 3 && i <= self.z() => Some(Cell {
                state: Some((i - 3) / 2),
                symbol: ((i - 3) % 2) as u8,
            }),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Cell {
    pub state: Option<usize>,
    pub symbol: u8,
}

impl Cell {
    pub fn blank(symbol: u8) -> Cell {
        Cell { state: None, symbol }
    }

    pub fn head(state: usize, symbol: u8) -> Cell {
        Cell { state: Some(state), symbol }
    }
}

/// Rows of a computation, first row first.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComputationTable {
    pub rows: Vec<Vec<Cell>>,
}

/// Which table edge a `2 × 3` window touches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Edge {
    Left,
    Right,
    Interior,
}

/// Kinds of defect the formula detects.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Condition {
    /// Some cell carries two marks.
    DoubleMark,
    /// Some cell carries no mark.
    Unmarked,
    /// Cell `(0, 0)` is not `(q0, 0)`.
    Start,
    /// Some other cell of the first row is not `(nil, 0)`.
    Blank,
    /// Cell `(2^s − 1, 0)` is not `(qf, 0)`.
    Accept,
    /// Some `2 × 3` window is not a legal step.
    Window,
}

impl Condition {
    pub const ALL: [Condition; 6] = [
        Condition::DoubleMark,
        Condition::Unmarked,
        Condition::Start,
        Condition::Blank,
        Condition::Accept,
        Condition::Window,
    ];
}

/// Whether `bottom` can follow `top` inside a window touching `edge`.
pub fn legal_window(ntm: &Ntm, top: [Cell; 3], bottom: [Cell; 3], edge: Edge) -> bool {
    let head = |row: &[Cell; 3]| -> Option<Option<usize>> {
        let hs: Vec<usize> = (0..3).filter(|&i| row[i].state.is_some()).collect();
        match hs.len() {
            0 => Some(None),
            1 => Some(Some(hs[0])),
            _ => None,
        }
    };
    let (Some(ht), Some(hb)) = (head(&top), head(&bottom)) else {
        return false;
    };
    let symbols_match = |want: [u8; 3]| (0..3).all(|i| bottom[i].symbol == want[i]);
    let top_symbols = [top[0].symbol, top[1].symbol, top[2].symbol];
    match ht {
        None => {
            if !symbols_match(top_symbols) {
                return false;
            }
            match hb {
                None => true,
                // The head arrives from outside the window.
                Some(0) => {
                    let q = bottom[0].state.unwrap();
                    edge != Edge::Left && ntm.delta.iter().any(|t| t.dir == Move::R && t.to == q)
                }
                Some(2) => {
                    let q = bottom[2].state.unwrap();
                    edge != Edge::Right && ntm.delta.iter().any(|t| t.dir == Move::L && t.to == q)
                }
                Some(_) => false,
            }
        }
        Some(h) => {
            let q = top[h].state.unwrap();
            if q == ntm.qf {
                return top == bottom;
            }
            ntm.delta
                .iter()
                .filter(|t| t.from == q && t.read == top[h].symbol)
                .any(|t| {
                    let mut want = top_symbols;
                    want[h] = t.write;
                    if !symbols_match(want) {
                        return false;
                    }
                    let np = match t.dir {
                        Move::L if h == 0 && edge == Edge::Left => 0,
                        Move::L => h as isize - 1,
                        Move::R if h == 2 && edge == Edge::Right => return false,
                        Move::R => h as isize + 1,
                    };
                    if (0..3).contains(&np) {
                        hb == Some(np as usize) && bottom[np as usize].state == Some(t.to)
                    } else {
                        hb.is_none()
                    }
                })
        }
    }
}

/// Legal windows as index tuples `(top0, top1, top2, bottom0, bottom1, bottom2)`.
pub fn window_set(ntm: &Ntm, edge: Edge) -> BTreeSet<[u8; 6]> {
    all_tuples(ntm)
        .filter(|t| tuple_legal(ntm, t, edge))
        .collect()
}

fn all_tuples(ntm: &Ntm) -> impl Iterator<Item = [u8; 6]> {
    let z = ntm.z() as u64;
    (0..z.pow(6)).map(move |mut code| {
        let mut t = [0u8; 6];
        for x in t.iter_mut().rev() {
            *x = (code % z) as u8 + 1;
            code /= z;
        }
        t
    })
}

fn tuple_legal(ntm: &Ntm, t: &[u8; 6], edge: Edge) -> bool {
    let c = |i: usize| ntm.cell(t[i] as usize).unwrap();
    legal_window(ntm, [c(0), c(1), c(2)], [c(3), c(4), c(5)], edge)
}

/// Edge kinds that occur for the machine's table size, with their range of first columns.
fn window_columns(n: usize) -> Vec<Edge> {
    if n < 3 {
        return Vec::new();
    }
    let mut v = vec![Edge::Left, Edge::Right];
    if n >= 6 {
        v.push(Edge::Interior);
    }
    v
}

/// Variable registry shared by every part of the formula.
struct Vars {
    names: Vec<String>,
    index: HashMap<String, usize>,
}

impl Vars {
    fn v(&mut self, name: &str) -> usize {
        if let Some(&i) = self.index.get(name) {
            return i;
        }
        self.names.push(name.to_string());
        self.index.insert(name.to_string(), self.names.len() - 1);
        self.names.len() - 1
    }
}

struct Builder<'a> {
    ntm: &'a Ntm,
    vars: Vars,
    delta: u64,
}

fn atom(a: Atom) -> Node {
    Node::Atom(a)
}

impl Builder<'_> {
    fn konst(&mut self, name: &str, c: u64) -> Node {
        atom(Atom::EqConst(self.vars.v(name), c))
    }

    /// `x · Δ = x'`: forces `x < 2^s` and, when `x` is unknown, enumerates it.
    fn bounded(&mut self, x: &str) -> Node {
        let d = self.vars.v("Delta");
        let xp = self.vars.v(&format!("{x}'"));
        atom(Atom::ProdEq(xp, self.vars.v(x), d))
    }

    fn sum(&mut self, h: &str, i: &str, j: &str) -> Node {
        atom(Atom::SumEq(self.vars.v(h), self.vars.v(i), self.vars.v(j)))
    }

    fn prod(&mut self, h: &str, i: &str, j: &str) -> Node {
        atom(Atom::ProdEq(self.vars.v(h), self.vars.v(i), self.vars.v(j)))
    }

    /// `MS = (2^s r + c) z`.
    fn base(&mut self, r: &str, c: &str) -> Vec<Node> {
        let (n, z) = (self.ntm.side() as u64, self.ntm.z() as u64);
        vec![
            self.konst("NZ", n * z),
            self.konst("Z", z),
            self.prod("MR", "NZ", r),
            self.prod("MC", "Z", c),
            self.sum("MS", "MR", "MC"),
        ]
    }

    /// `P_tag = p(MS + k)` followed by a divisibility test on it.
    fn prime_test(&mut self, from: Option<&str>, k: u64, tag: &str, divides: bool) -> Vec<Node> {
        let kv = format!("K{tag}");
        let mv = format!("M{tag}");
        let pv = format!("P{tag}");
        let mut out = vec![self.konst(&kv, k)];
        let index = match from {
            Some(base) => {
                out.push(self.sum(&mv, base, &kv));
                mv
            }
            None => kv,
        };
        let p = self.vars.v(&pv);
        out.push(atom(Atom::NthPrime(p, self.vars.v(&index))));
        out.push(atom(if divides { Atom::Divides(p) } else { Atom::NotDivides(p) }));
        out
    }

    fn delta_def(&mut self) -> Node {
        let d = self.delta;
        self.konst("Delta", d)
    }

    fn any_cell(&mut self) -> Vec<Node> {
        let mut v = vec![self.delta_def(), self.bounded("r"), self.bounded("c")];
        v.extend(self.base("r", "c"));
        v
    }

    fn double_marks(&mut self) -> Vec<Node> {
        let z = self.ntm.z() as u64;
        let mut out = Vec::new();
        for i in 1..=z {
            for j in i + 1..=z {
                let mut v = self.any_cell();
                v.extend(self.prime_test(Some("MS"), i, "1", true));
                v.extend(self.prime_test(Some("MS"), j, "2", true));
                out.push(Node::And(v));
            }
        }
        out
    }

    fn unmarked(&mut self) -> Node {
        let z = self.ntm.z() as u64;
        let mut v = self.any_cell();
        for i in 1..=z {
            v.extend(self.prime_test(Some("MS"), i, &i.to_string(), false));
        }
        Node::And(v)
    }

    fn start(&mut self) -> Node {
        let k = self.ntm.index(Cell::head(self.ntm.q0, 0)) as u64;
        Node::And(self.prime_test(None, k, "", false))
    }

    fn blank(&mut self) -> Node {
        let z = self.ntm.z() as u64;
        let mut v = vec![
            self.delta_def(),
            self.bounded("c0"),
            self.konst("One", 1),
            self.sum("c", "c0", "One"),
            self.bounded("c"),
            self.konst("Z", z),
            self.prod("MC", "Z", "c"),
        ];
        let k = self.ntm.index(Cell::blank(0)) as u64;
        v.extend(self.prime_test(Some("MC"), k, "", false));
        Node::And(v)
    }

    fn accept(&mut self) -> Node {
        let (n, z) = (self.ntm.side() as u64, self.ntm.z() as u64);
        let k = n * (n - 1) * z + self.ntm.index(Cell::head(self.ntm.qf, 0)) as u64;
        Node::And(self.prime_test(None, k, "", false))
    }

    fn windows(&mut self, edge: Edge) -> Node {
        let n = self.ntm.side() as u64;
        let z = self.ntm.z() as u64;
        let mut v = vec![
            self.delta_def(),
            self.bounded("r0"),
            self.konst("One", 1),
            self.sum("R", "r0", "One"),
            self.bounded("R"),
        ];
        match edge {
            Edge::Left => v.push(self.konst("c0", 0)),
            Edge::Right => v.push(self.konst("c0", n - 3)),
            Edge::Interior => {
                v.push(self.bounded("c1"));
                v.push(self.sum("c0", "c1", "One"));
                v.push(self.konst("Three", 3));
                v.push(self.sum("C3", "c0", "Three"));
                v.push(self.bounded("C3"));
            }
        }
        v.extend(self.base("r0", "c0"));
        let illegal: Vec<[u8; 6]> = all_tuples(self.ntm)
            .filter(|t| !tuple_legal(self.ntm, t, edge))
            .collect();
        let offsets: Vec<u64> = (0..6u64).map(|d| (n * (d / 3) + d % 3) * z).collect();
        v.push(self.trie(&illegal, 0, &offsets));
        Node::And(v)
    }

    /// Disjunction over `tuples` (sorted), sharing common prefixes.
    fn trie(&mut self, tuples: &[[u8; 6]], depth: usize, offsets: &[u64]) -> Node {
        let mut branches = Vec::new();
        let mut i = 0;
        while i < tuples.len() {
            let x = tuples[i][depth];
            let mut j = i;
            while j < tuples.len() && tuples[j][depth] == x {
                j += 1;
            }
            let mut v = self.prime_test(Some("MS"), offsets[depth] + x as u64, &depth.to_string(), true);
            if depth < 5 {
                v.push(self.trie(&tuples[i..j], depth + 1, offsets));
            }
            branches.push(Node::And(v));
            i = j;
        }
        Node::Or(branches)
    }
}

fn parts(ntm: &Ntm) -> (Vec<String>, Vec<(Condition, Node)>) {
    let mut b = Builder {
        ntm,
        vars: Vars {
            names: Vec::new(),
            index: HashMap::new(),
        },
        delta: 1u64 << (10 * ntm.states),
    };
    let mut out: Vec<(Condition, Node)> = Vec::new();
    for d in b.double_marks() {
        out.push((Condition::DoubleMark, d));
    }
    out.push((Condition::Unmarked, b.unmarked()));
    out.push((Condition::Start, b.start()));
    out.push((Condition::Blank, b.blank()));
    out.push((Condition::Accept, b.accept()));
    for edge in window_columns(ntm.side()) {
        let w = b.windows(edge);
        if !matches!(&w, Node::And(v) if matches!(v.last(), Some(Node::Or(o)) if o.is_empty())) {
            out.push((Condition::Window, w));
        }
    }
    (b.vars.names, out)
}

/// The formula that holds at `ℓ'` exactly when `ℓ'` does not encode an accepting
/// computation table of the machine.
pub fn ntm_to_formula(ntm: &Ntm) -> Result<Formula> {
    let (vars, parts) = parts(ntm);
    Formula::new(vars, ntm.width(), Node::Or(parts.into_iter().map(|(_, n)| n).collect()))
}

/// The disjuncts of [`ntm_to_formula`] that detect one kind of defect, over the same variables.
pub fn condition_formula(ntm: &Ntm, condition: Condition) -> Result<Formula> {
    let (vars, parts) = parts(ntm);
    let nodes: Vec<Node> = parts
        .into_iter()
        .filter(|(c, _)| *c == condition)
        .map(|(_, n)| n)
        .collect();
    if nodes.is_empty() {
        // No window exists for this table size: a contradiction.
        let d = vars.iter().position(|v| v == "Delta").expect("every formula fixes Delta");
        let body = Node::And(vec![atom(Atom::EqConst(d, 0)), atom(Atom::EqConst(d, 1))]);
        return Formula::new(vars, ntm.width(), body);
    }
    Formula::new(vars, ntm.width(), Node::Or(nodes))
}

/// Prime carrying mark `i` of cell `(r, c)`.
pub fn cell_prime(ntm: &Ntm, r: usize, c: usize, i: usize) -> Result<u64> {
    let (n, z) = (ntm.side(), ntm.z());
    nth_prime(((n * r + c) * z + i) as u64)
}

/// Encodes an arbitrary marking: `marks[r][c]` lists the indices set on cell `(r, c)`.
pub fn crt_encode_marks(ntm: &Ntm, marks: &[Vec<Vec<usize>>]) -> Result<BigUint> {
    let (n, z) = (ntm.side(), ntm.z());
    if marks.len() != n || marks.iter().any(|row| row.len() != n) {
        return Err(Error::input(format!("marking must be {n} × {n}")));
    }
    let mut x = BigUint::zero();
    let mut modulus = BigUint::one();
    for (r, row) in marks.iter().enumerate() {
        for (c, cell) in row.iter().enumerate() {
            if let Some(&bad) = cell.iter().find(|&&i| i == 0 || i > z) {
                return Err(Error::input(format!("mark {bad} out of range 1..={z}")));
            }
            for i in 1..=z {
                let p = cell_prime(ntm, r, c, i)?;
                let want = u64::from(!cell.contains(&i));
                // x + modulus·t ≡ want (mod p)
                let have = (&x % p).iter_u64_digits().next().unwrap_or(0);
                let m = (&modulus % p).iter_u64_digits().next().unwrap_or(0);
                let diff = (want + p - have) % p;
                let t = mul_mod(diff, pow_mod(m, p - 2, p), p);
                x += &modulus * t;
                modulus *= p;
            }
        }
    }
    Ok(x)
}

fn mul_mod(a: u64, b: u64, p: u64) -> u64 {
    (a as u128 * b as u128 % p as u128) as u64
}

fn pow_mod(mut b: u64, mut e: u64, p: u64) -> u64 {
    let mut r = 1 % p;
    b %= p;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, b, p);
        }
        b = mul_mod(b, b, p);
        e >>= 1;
    }
    r
}

/// Encodes a table with exactly one mark per cell.
pub fn crt_encode_table(ntm: &Ntm, table: &ComputationTable) -> Result<BigUint> {
    let n = ntm.side();
    if table.rows.len() != n || table.rows.iter().any(|r| r.len() != n) {
        return Err(Error::input(format!("table must be {n} × {n}")));
    }
    let mut marks = Vec::with_capacity(n);
    for row in &table.rows {
        let mut out = Vec::with_capacity(n);
        for &cell in row {
            if cell.symbol > 1 || cell.state.is_some_and(|q| q >= ntm.states) {
                return Err(Error::input(format!("cell {cell:?} is not valid for the machine")));
            }
            out.push(vec![ntm.index(cell)]);
        }
        marks.push(out);
    }
    crt_encode_marks(ntm, &marks)
}

/// Reads back the marks stored in `ℓ'`.
pub fn decode_marks(ntm: &Ntm, ell: &BigUint) -> Result<Vec<Vec<Vec<usize>>>> {
    let (n, z) = (ntm.side(), ntm.z());
    let mut out = vec![vec![Vec::new(); n]; n];
    for (r, row) in out.iter_mut().enumerate() {
        for (c, cell) in row.iter_mut().enumerate() {
            for i in 1..=z {
                if (ell % cell_prime(ntm, r, c, i)?).is_zero() {
                    cell.push(i);
                }
            }
        }
    }
    Ok(out)
}

/// Searches for an accepting table: `2^s − 1` steps from the blank tape, ending in `qf`
/// with the head on the first cell, which holds 0.
pub fn simulate_ntm(ntm: &Ntm, budget: usize) -> Result<Option<ComputationTable>> {
    if ntm.states > 3 {
        return Err(Error::input("simulation supports at most 3 states"));
    }
    let n = ntm.side();
    let mut row = vec![Cell::blank(0); n];
    row[0] = Cell::head(ntm.q0, 0);
    let mut rows = vec![row];
    let mut visited = 0usize;
    if dfs(ntm, &mut rows, &mut visited, budget)? {
        Ok(Some(ComputationTable { rows }))
    } else {
        Ok(None)
    }
}

fn dfs(ntm: &Ntm, rows: &mut Vec<Vec<Cell>>, visited: &mut usize, budget: usize) -> Result<bool> {
    *visited += 1;
    if *visited > budget {
        return Err(Error::resource("simulation steps", budget as u64));
    }
    let n = ntm.side();
    let last = rows.last().unwrap().clone();
    if rows.len() == n {
        return Ok(last[0] == Cell::head(ntm.qf, 0));
    }
    for next in successors(ntm, &last) {
        rows.push(next);
        if dfs(ntm, rows, visited, budget)? {
            return Ok(true);
        }
        rows.pop();
    }
    Ok(false)
}

/// Rows that can follow `row` in one step.
pub fn successors(ntm: &Ntm, row: &[Cell]) -> Vec<Vec<Cell>> {
    let Some(h) = row.iter().position(|c| c.state.is_some()) else {
        return Vec::new();
    };
    let q = row[h].state.unwrap();
    if q == ntm.qf {
        return vec![row.to_vec()];
    }
    let mut out = Vec::new();
    for t in ntm.delta.iter().filter(|t| t.from == q && t.read == row[h].symbol) {
        let np = match t.dir {
            Move::L => h.saturating_sub(1),
            Move::R if h + 1 == row.len() => continue,
            Move::R => h + 1,
        };
        let mut next: Vec<Cell> = row.iter().map(|c| Cell::blank(c.symbol)).collect();
        next[h].symbol = t.write;
        next[np].state = Some(t.to);
        out.push(next);
    }
    out
}

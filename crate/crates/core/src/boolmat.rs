//! Square Boolean matrices over the one-letter reachability relation.

use num_bigint::BigUint;
use num_traits::Zero;

use crate::automata::Automaton;
use crate::bitset::BitSet;
use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BoolMatrix {
    n: usize,
    rows: Vec<BitSet>,
}

impl BoolMatrix {
    pub fn zeros(n: usize) -> Self {
        BoolMatrix {
            n,
            rows: vec![BitSet::new(n); n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = BoolMatrix::zeros(n);
        for i in 0..n {
            m.rows[i].insert(i);
        }
        m
    }

    pub fn from_rows(rows: Vec<BitSet>) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::input("every row must have width equal to the row count"));
        }
        Ok(BoolMatrix { n, rows })
    }

    /// `B[i][j] = 1` iff some symbol takes state `i` to state `j`.
    pub fn adjacency(a: &Automaton) -> Self {
        let mut m = BoolMatrix::zeros(a.state_count());
        for (q, _, p) in a.transitions() {
            m.rows[q].insert(p);
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.rows[i].contains(j)
    }

    pub fn set(&mut self, i: usize, j: usize, value: bool) {
        if value {
            self.rows[i].insert(j);
        } else {
            self.rows[i].remove(j);
        }
    }

    pub fn row(&self, i: usize) -> &BitSet {
        &self.rows[i]
    }

    /// Row vector times matrix: the union of the rows selected by `v`.
    pub fn vec_mul(&self, v: &BitSet) -> BitSet {
        let mut out = BitSet::new(self.n);
        for i in v.iter() {
            out.union_with(&self.rows[i]);
        }
        out
    }

    pub fn mul(&self, other: &BoolMatrix) -> Result<BoolMatrix> {
        if self.n != other.n {
            return Err(Error::input(format!(
                "dimension mismatch: {}x{} times {}x{}",
                self.n, self.n, other.n, other.n
            )));
        }
        Ok(BoolMatrix {
            n: self.n,
            rows: self.rows.iter().map(|r| other.vec_mul(r)).collect(),
        })
    }

    pub fn pow(&self, e: &BigUint) -> BoolMatrix {
        self.pow_counted(e).0
    }

    /// Binary-method power, also returning how many Boolean products were formed.
    pub fn pow_counted(&self, e: &BigUint) -> (BoolMatrix, u64) {
        let mut result = BoolMatrix::identity(self.n);
        if e.is_zero() {
            return (result, 0);
        }
        let mut products = 0;
        let mut base = self.clone();
        let bits = e.bits();
        let mut first = true;
        for i in 0..bits {
            if e.bit(i) {
                if first {
                    result = base.clone();
                    first = false;
                } else {
                    result = result.mul(&base).expect("same dimension");
                    products += 1;
                }
            }
            if i + 1 < bits {
                base = base.mul(&base).expect("same dimension");
                products += 1;
            }
        }
        (result, products)
    }
}

impl std::fmt::Debug for BoolMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "BoolMatrix {}x{}", self.n, self.n)?;
        for r in &self.rows {
            let line: String = (0..self.n).map(|j| if r.contains(j) { '1' } else { '0' }).collect();
            writeln!(f, "  {line}")?;
        }
        Ok(())
    }
}

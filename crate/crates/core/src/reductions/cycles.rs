//! Prime-cycle DFAs and the reduction to a binary alphabet.

use super::primes::first_primes;
use crate::automata::{numbered_alphabet, Automaton, Kind, StateId};
use crate::error::{Error, Result};

/// Bits needed to address `k` symbols, at least one.
pub fn code_bits(k: usize) -> u32 {
    (usize::BITS - (k.max(2) - 1).leading_zeros()).max(1)
}

/// Edges of a full binary tree with `bits` levels of branching, in heap order.
///
/// Yields `(node, bit, Ok(child))` for inner edges and `(node, bit, Err(code))` for the edges
/// leaving the deepest level, where `code` is the binary number spelled from the root.
fn tree_edges(bits: u32) -> impl Iterator<Item = (usize, usize, std::result::Result<usize, usize>)> {
    let size = (1usize << bits) - 1;
    let last_level = (1usize << (bits - 1)) - 1;
    (0..size).flat_map(move |j| {
        (0..2).map(move |x| {
            if j < last_level {
                (j, x, Ok(2 * j + 1 + x))
            } else {
                (j, x, Err(((j - last_level) << 1) | x))
            }
        })
    })
}

/// Initial state with letters `a_1..a_t` into cycles of lengths `p(1), ..., p(t)`; in each cycle
/// only the state just before the entry is accepting. With `binarize`, the initial state is
/// replaced by a binary tree and the alphabet becomes `{0, 1}`.
pub fn prime_cycle_dfa(t: usize, binarize: bool) -> Result<Automaton> {
    if t == 0 {
        return Err(Error::input("prime-cycle DFA needs t ≥ 1"));
    }
    let primes = first_primes(t);
    let (alphabet, k) = if binarize {
        (vec!["0".to_string(), "1".to_string()], 2)
    } else {
        (numbered_alphabet("a", t), t)
    };
    let bits = code_bits(t);
    let head = if binarize { (1usize << bits) - 1 } else { 1 };
    let mut entries = Vec::with_capacity(t);
    let mut next = head;
    let mut transitions = Vec::new();
    let mut finals = Vec::new();
    for &p in &primes {
        let p = p as usize;
        entries.push(next);
        for j in 0..p {
            for a in 0..k {
                transitions.push((next + j, a, next + (j + 1) % p));
            }
        }
        finals.push(next + p - 1);
        next += p;
    }
    if binarize {
        for (node, bit, to) in tree_edges(bits) {
            let target = match to {
                Ok(child) => child,
                Err(code) => entries[if code < t { code } else { 0 }],
            };
            transitions.push((node, bit, target));
        }
    } else {
        for (i, &e) in entries.iter().enumerate() {
            transitions.push((0, i, e));
        }
    }
    Automaton::from_parts(Kind::Dfa, alphabet, next, &[0], &finals, transitions)
}

/// Replaces every state by a full binary tree of height `⌈log₂ k⌉ − 1`. The code of symbol `i`
/// (zero-based, most significant bit first) acts on the roots as symbol `i` did; unused codes
/// act as symbol 0.
pub fn binarize(a: &Automaton) -> Result<Automaton> {
    let k = a.alphabet().len();
    if k < 2 {
        return Err(Error::input("binarization needs an alphabet of at least two symbols"));
    }
    let bits = code_bits(k);
    let size = (1usize << bits) - 1;
    let root = |q: StateId| q * size;
    let mut transitions = Vec::new();
    for q in 0..a.state_count() {
        for (node, bit, to) in tree_edges(bits) {
            match to {
                Ok(child) => transitions.push((root(q) + node, bit, root(q) + child)),
                Err(code) => {
                    let sym = if code < k { code } else { 0 };
                    for &p in a.successors(q, sym) {
                        transitions.push((root(q) + node, bit, root(p)));
                    }
                }
            }
        }
    }
    let initials: Vec<StateId> = a.initials().iter().map(|&q| root(q)).collect();
    let finals: Vec<StateId> = a.finals().iter().map(root).collect();
    Automaton::from_parts(
        a.kind(),
        vec!["0".into(), "1".into()],
        a.state_count() * size,
        &initials,
        &finals,
        transitions,
    )
}

use proptest::prelude::*;

use crate::automata::{numbered_alphabet, Automaton, Kind};

/// Arbitrary small NFA with 1..=max_states states and 1..=max_syms symbols.
pub fn arb_nfa(max_states: usize, max_syms: usize) -> impl Strategy<Value = Automaton> {
    (1..=max_states, 1..=max_syms).prop_flat_map(|(n, k)| {
        (
            proptest::collection::vec((0..n, 0..k, 0..n), 0..(3 * n * k)),
            proptest::collection::vec(0..n, 1..=2),
            proptest::collection::vec(any::<bool>(), n),
        )
            .prop_map(move |(trans, init, fin)| {
                let finals: Vec<usize> = (0..n).filter(|&q| fin[q]).collect();
                Automaton::from_parts(Kind::Nfa, numbered_alphabet("s", k), n, &init, &finals, trans)
                    .unwrap()
            })
    })
}

/// All words over `0..k` of length at most `max_len`, shortest first.
pub fn all_words(k: usize, max_len: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    let mut frontier = vec![vec![]];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for w in &frontier {
            for a in 0..k {
                let mut v: Vec<usize> = w.clone();
                v.push(a);
                next.push(v);
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

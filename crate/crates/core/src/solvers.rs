//! Given-length and existential length universality.
//!
//! Both deciders work on a complete DFA `D` for the input (completion for DFAs, subset
//! construction for NFAs) and its one-letter adjacency matrix `B`. Every word of length `ℓ`
//! is accepted iff the states reachable from the initial state in exactly `ℓ` steps are all
//! final, i.e. iff row `q0` of `B^ℓ` is supported inside the final set.

use std::collections::hash_map::DefaultHasher;
use std::collections::{HashMap, HashSet};
use std::hash::{Hash, Hasher};

use num_bigint::BigUint;
use num_traits::ToPrimitive;

use crate::automata::Automaton;
use crate::bitset::BitSet;
use crate::boolmat::BoolMatrix;
use crate::error::{Error, Result};
use crate::DEFAULT_HISTORY_CAP;

/// Default number of words the brute-force oracle may enumerate.
pub const DEFAULT_WORD_BUDGET: u64 = 10_000_000;

/// Above this many DFA states the matrix power is replaced by vector iteration.
const MATRIX_DIM_LIMIT: usize = 1024;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UniversalityReport {
    pub exists: bool,
    pub minimal_length: Option<BigUint>,
    /// Index of the first vector that recurs.
    pub preperiod: usize,
    /// Distance between the two occurrences of that vector.
    pub period: usize,
    /// Set when a universal length was found but the vector cycle did not close within
    /// the history cap, in which case `preperiod` and `period` are zero.
    pub cap_hit: Option<String>,
}

/// The reachable-state vectors `v_k = e_{q0} · B^k` of a complete DFA.
struct Walk {
    dfa: Automaton,
    matrix: BoolMatrix,
}

impl Walk {
    fn new(a: &Automaton, cap: usize) -> Result<Walk> {
        let dfa = a.to_complete_dfa(cap)?;
        let matrix = BoolMatrix::adjacency(&dfa);
        Ok(Walk { dfa, matrix })
    }

    fn start(&self) -> BitSet {
        self.dfa.initial_set()
    }

    fn step(&self, v: &BitSet) -> BitSet {
        self.matrix.vec_mul(v)
    }

    fn universal(&self, v: &BitSet) -> bool {
        v.is_subset(self.dfa.finals())
    }

    fn nth(&self, k: usize) -> BitSet {
        let mut v = self.start();
        for _ in 0..k {
            v = self.step(&v);
        }
        v
    }
}

fn fingerprint(v: &BitSet) -> u128 {
    let mut h1 = DefaultHasher::new();
    0u8.hash(&mut h1);
    v.hash(&mut h1);
    let mut h2 = DefaultHasher::new();
    1u8.hash(&mut h2);
    v.hash(&mut h2);
    ((h1.finish() as u128) << 64) | h2.finish() as u128
}

struct Cycle {
    preperiod: usize,
    period: usize,
    first_universal: Option<usize>,
}

enum Scan {
    Closed(Cycle),
    /// History cap reached; carries the first universal index if one was seen.
    Open(Option<usize>),
}

/// Runs the vector sequence until the first repeat or until `history_cap` vectors are seen.
fn scan(walk: &Walk, history_cap: usize) -> Scan {
    let mut seen: HashMap<u128, Vec<usize>> = HashMap::new();
    let mut first_universal = None;
    let mut v = walk.start();
    let mut k = 0usize;
    loop {
        let fp = fingerprint(&v);
        if let Some(candidates) = seen.get(&fp) {
            for &j in candidates {
                if walk.nth(j) == v {
                    return Scan::Closed(Cycle {
                        preperiod: j,
                        period: k - j,
                        first_universal,
                    });
                }
            }
        }
        if k >= history_cap {
            return Scan::Open(first_universal);
        }
        if first_universal.is_none() && walk.universal(&v) {
            first_universal = Some(k);
        }
        seen.entry(fp).or_default().push(k);
        v = walk.step(&v);
        k += 1;
    }
}

/// Whether every word of length `length` is accepted.
pub fn universal_at_length(a: &Automaton, length: &BigUint, cap: usize) -> Result<bool> {
    universal_at_length_with(a, length, cap, DEFAULT_HISTORY_CAP)
}

pub fn universal_at_length_with(
    a: &Automaton,
    length: &BigUint,
    cap: usize,
    history_cap: usize,
) -> Result<bool> {
    let walk = Walk::new(a, cap)?;
    let n = walk.dfa.state_count();
    let short = length.to_usize().filter(|&l| l <= 4 * n.max(1));
    if let Some(l) = short {
        return Ok(walk.universal(&walk.nth(l)));
    }
    if n <= MATRIX_DIM_LIMIT {
        let q0 = walk.dfa.initials()[0];
        let power = walk.matrix.pow(length);
        return Ok(walk.universal(power.row(q0)));
    }
    // Large machine, long length: fold the length into the vector cycle.
    match scan(&walk, history_cap) {
        Scan::Closed(c) => {
            let rho = BigUint::from(c.preperiod);
            let reduced = if *length < rho {
                length.clone()
            } else {
                &rho + (length - &rho) % BigUint::from(c.period)
            };
            let k = reduced.to_usize().expect("reduced index fits the history");
            Ok(walk.universal(&walk.nth(k)))
        }
        Scan::Open(_) => Err(Error::resource("vector history", history_cap as u64)),
    }
}

/// Least `ℓ ≥ 0` with `Σ^ℓ ⊆ L(a)`, together with the shape of the vector cycle.
pub fn minimal_universality_length(a: &Automaton, cap: usize) -> Result<UniversalityReport> {
    minimal_universality_length_with(a, cap, DEFAULT_HISTORY_CAP)
}

pub fn minimal_universality_length_with(
    a: &Automaton,
    cap: usize,
    history_cap: usize,
) -> Result<UniversalityReport> {
    let walk = Walk::new(a, cap)?;
    match scan(&walk, history_cap) {
        Scan::Closed(c) => Ok(UniversalityReport {
            exists: c.first_universal.is_some(),
            minimal_length: c.first_universal.map(BigUint::from),
            preperiod: c.preperiod,
            period: c.period,
            cap_hit: None,
        }),
        Scan::Open(Some(k)) => Ok(UniversalityReport {
            exists: true,
            minimal_length: Some(BigUint::from(k)),
            preperiod: 0,
            period: 0,
            cap_hit: Some(format!(
                "vector cycle not closed within {history_cap} vectors"
            )),
        }),
        Scan::Open(None) => Err(Error::resource("vector history", history_cap as u64)),
    }
}

/// Every `ℓ ≤ max_len` at which the automaton is length universal.
///
/// Walks the subsets reachable at each exact length instead of determinizing. A subset
/// holding an accepting state that loops to itself on every letter accepts every
/// continuation, so it is dropped; `cap` bounds the number of subsets kept per length.
pub fn universal_lengths_up_to(a: &Automaton, max_len: usize, cap: usize) -> Result<Vec<usize>> {
    let k = a.alphabet().len();
    let sinks: Vec<usize> = (0..a.state_count())
        .filter(|&q| a.is_final(q) && (0..k).all(|x| a.successors(q, x) == [q]))
        .collect();
    let alive = |s: &BitSet| !sinks.iter().any(|&q| s.contains(q));
    let mut layer: HashSet<BitSet> = HashSet::new();
    let start = a.initial_set();
    if alive(&start) {
        layer.insert(start);
    }
    let mut out = Vec::new();
    for l in 0..=max_len {
        // With no letters, only the empty word exists.
        if layer.iter().all(|s| s.iter().any(|q| a.is_final(q))) {
            out.push(l);
        }
        if l == max_len || k == 0 {
            if k == 0 {
                out.extend(l + 1..=max_len);
            }
            break;
        }
        let mut next = HashSet::new();
        for s in &layer {
            for x in 0..k {
                let t = a.step_index(s, x);
                if alive(&t) && next.insert(t) && next.len() > cap {
                    return Err(Error::resource("subsets reachable at one length", cap as u64));
                }
            }
        }
        layer = next;
    }
    Ok(out)
}

/// Oracle: checks every word of length `length` directly on the original automaton.
pub fn brute_force_universal(a: &Automaton, length: usize) -> Result<bool> {
    brute_force_universal_with(a, length, DEFAULT_WORD_BUDGET)
}

pub fn brute_force_universal_with(a: &Automaton, length: usize, budget: u64) -> Result<bool> {
    let k = a.alphabet().len() as u64;
    if length > 0 && k == 0 {
        return Ok(true);
    }
    let words = BigUint::from(k).pow(length as u32);
    if words > BigUint::from(budget) {
        return Err(Error::resource("brute-force word enumeration", budget));
    }
    fn all_accepted(a: &Automaton, set: &BitSet, remaining: usize) -> bool {
        if remaining == 0 {
            return set.intersects(a.finals());
        }
        (0..a.alphabet().len()).all(|s| all_accepted(a, &a.step_index(set, s), remaining - 1))
    }
    Ok(all_accepted(a, &a.initial_set(), length))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::{numbered_alphabet, Kind};
    use crate::reductions::prime_cycle_dfa;
    use crate::testutil::arb_nfa;
    use crate::DEFAULT_DET_CAP;
    use proptest::prelude::*;

    fn big(n: u64) -> BigUint {
        BigUint::from(n)
    }

    fn sigma_star() -> Automaton {
        Automaton::from_parts(
            Kind::Dfa,
            numbered_alphabet("a", 2),
            1,
            &[0],
            &[0],
            [(0, 0, 0), (0, 1, 0)],
        )
        .unwrap()
    }

    #[test]
    fn sigma_star_is_universal_everywhere() {
        let a = sigma_star();
        for l in [0u64, 1, 7, 1 << 50] {
            assert!(universal_at_length(&a, &big(l), DEFAULT_DET_CAP).unwrap());
        }
        let r = minimal_universality_length(&a, DEFAULT_DET_CAP).unwrap();
        assert_eq!(r.minimal_length, Some(big(0)));
    }

    #[test]
    fn no_final_states_never_universal() {
        let a = Automaton::from_parts(Kind::Dfa, numbered_alphabet("a", 1), 1, &[0], &[], [(0, 0, 0)])
            .unwrap();
        let r = minimal_universality_length(&a, DEFAULT_DET_CAP).unwrap();
        assert!(!r.exists);
        assert_eq!(r.minimal_length, None);
    }

    #[test]
    fn prime_cycle_t2_given_lengths() {
        let a = prime_cycle_dfa(2, false).unwrap();
        assert!(universal_at_length(&a, &big(6), DEFAULT_DET_CAP).unwrap());
        assert!(!universal_at_length(&a, &big(5), DEFAULT_DET_CAP).unwrap());
        assert!(brute_force_universal(&a, 6).unwrap());
        assert!(!brute_force_universal(&a, 5).unwrap());
    }

    #[test]
    fn prime_cycle_t3_minimal_length_is_lcm() {
        let a = prime_cycle_dfa(3, false).unwrap();
        let r = minimal_universality_length(&a, DEFAULT_DET_CAP).unwrap();
        // the least positive multiple of 2, 3 and 5 (ℓ = 0 fails: the initial state is not final)
        let oracle = (1u64..).find(|l| l % 2 == 0 && l % 3 == 0 && l % 5 == 0).unwrap();
        assert_eq!(r.minimal_length, Some(big(oracle)));
        for l in 0..oracle {
            assert!(!universal_at_length(&a, &big(l), DEFAULT_DET_CAP).unwrap());
        }
    }

    #[test]
    fn huge_length_uses_matrix_power() {
        let a = prime_cycle_dfa(3, false).unwrap();
        let l = big(30) * BigUint::from(10u8).pow(40);
        assert!(universal_at_length(&a, &l, DEFAULT_DET_CAP).unwrap());
        assert!(!universal_at_length(&a, &(l + 1u8), DEFAULT_DET_CAP).unwrap());
    }

    #[test]
    fn cycle_folding_agrees_with_direct_iteration() {
        let a = prime_cycle_dfa(3, false).unwrap();
        let walk = Walk::new(&a, DEFAULT_DET_CAP).unwrap();
        let Scan::Closed(c) = scan(&walk, 1000) else { panic!("cycle expected") };
        assert_eq!(walk.nth(c.preperiod), walk.nth(c.preperiod + c.period));
        for j in 0..c.preperiod + c.period {
            for i in 0..j {
                assert_ne!(walk.nth(i), walk.nth(j), "earlier repeat at {i},{j}");
            }
        }
    }

    #[test]
    fn history_cap_is_an_error_without_answer() {
        let a = prime_cycle_dfa(3, false).unwrap();
        match minimal_universality_length_with(&a, DEFAULT_DET_CAP, 5) {
            Err(e) => assert!(e.is_resource()),
            Ok(r) => panic!("expected error, got {r:?}"),
        }
    }

    #[test]
    fn brute_force_budget() {
        let a = prime_cycle_dfa(3, false).unwrap();
        assert!(brute_force_universal_with(&a, 10, 100).unwrap_err().is_resource());
    }

    #[test]
    fn zero_length_means_empty_word() {
        let a = prime_cycle_dfa(1, false).unwrap();
        assert_eq!(brute_force_universal(&a, 0).unwrap(), a.accepts::<&str>(&[]).unwrap());
        assert!(!universal_at_length(&a, &big(0), DEFAULT_DET_CAP).unwrap());
    }

    #[test]
    fn empty_alphabet_is_vacuously_universal_after_zero() {
        let a = Automaton::from_parts(Kind::Nfa, vec![], 1, &[0], &[], []).unwrap();
        assert!(!universal_at_length(&a, &big(0), DEFAULT_DET_CAP).unwrap());
        assert!(universal_at_length(&a, &big(3), DEFAULT_DET_CAP).unwrap());
        assert!(brute_force_universal(&a, 3).unwrap());
        assert_eq!(
            minimal_universality_length(&a, DEFAULT_DET_CAP).unwrap().minimal_length,
            Some(big(1))
        );
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn matrix_method_matches_brute_force(a in arb_nfa(6, 3), l in 0usize..=8) {
            prop_assert_eq!(
                universal_at_length(&a, &big(l as u64), DEFAULT_DET_CAP).unwrap(),
                brute_force_universal(&a, l).unwrap()
            );
        }

        #[test]
        fn report_is_exact_minimum(a in arb_nfa(5, 2)) {
            let r = minimal_universality_length(&a, DEFAULT_DET_CAP).unwrap();
            prop_assert_eq!(r.exists, r.minimal_length.is_some());
            let horizon = r.preperiod + r.period;
            let lengths = universal_lengths_up_to(&a, horizon + 20, DEFAULT_DET_CAP).unwrap();
            match &r.minimal_length {
                Some(m) => {
                    let first = lengths.first().map(|&l| big(l as u64));
                    prop_assert_eq!(first.as_ref(), Some(m))
                }
                None => prop_assert!(lengths.is_empty()),
            }
            let walk = Walk::new(&a, DEFAULT_DET_CAP).unwrap();
            prop_assert_eq!(walk.nth(r.preperiod), walk.nth(horizon));
        }

        #[test]
        fn long_lengths_agree_with_periodic_extension(a in arb_nfa(5, 2), l in 0u64..400) {
            let direct = universal_lengths_up_to(&a, 400, DEFAULT_DET_CAP).unwrap().contains(&(l as usize));
            let walk = Walk::new(&a, DEFAULT_DET_CAP).unwrap();
            let q0 = walk.dfa.initials()[0];
            let via_matrix = walk.universal(walk.matrix.pow(&big(l)).row(q0));
            prop_assert_eq!(direct, via_matrix);
        }
    }
}

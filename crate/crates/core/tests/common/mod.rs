#![allow(dead_code)]

use std::collections::BTreeSet;

use num_bigint::BigUint;
use num_integer::Integer;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use lenuniv::automata::numbered_alphabet;
use lenuniv::formulas::{divisibility_program, eval_formula, eval_with, parse_formula, verify_to_program, Formula};
use lenuniv::gadgetlang::{
    compile_program, compile_text, complete_configurations, complete_lengths, configuration_at, enumerate_computations,
    expand_macros, has_complete, initial_configuration, longest_complete_bound, proper_layers,
    value_of, active_control, CompiledNfa, VarInit, DEFAULT_BOUND_BUDGET,
};
use lenuniv::reductions::{
    alg3_nfa, binarize, condition_formula, crt_encode_marks, crt_encode_table, decode_marks,
    decode_sat_assignment, ntm_to_formula, prime_cycle_dfa, sat_to_dfa, simulate_ntm, Cell,
    ComputationTable, Cnf, Condition, Literal, Ntm, DEFAULT_SIMULATION_BUDGET,
};
use lenuniv::solvers::{minimal_universality_length, universal_at_length, universal_lengths_up_to};
use lenuniv::{Automaton, BoolMatrix, Kind, StateSet, DEFAULT_DET_CAP};

pub type Check = Result<(), String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn e<E: std::fmt::Display>(x: E) -> String {
    x.to_string()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

// ---------------------------------------------------------------------------------------
// Independent oracles

/// Trial division.
pub fn prime(n: u64) -> bool {
    n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| n % d != 0)
}

pub fn primes(count: usize) -> Vec<u64> {
    (2..).filter(|&n| prime(n)).take(count).collect()
}

/// Word acceptance by direct subset simulation.
pub fn accepts(a: &Automaton, word: &[usize]) -> bool {
    let mut cur: BTreeSet<usize> = a.initials().iter().copied().collect();
    for &x in word {
        cur = cur.iter().flat_map(|&q| a.successors(q, x).iter().copied()).collect();
    }
    cur.iter().any(|&q| a.is_final(q))
}

/// Every word of exactly `len` symbols over `k` letters.
pub fn words(k: usize, len: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|w| {
                (0..k).map(move |x| {
                    let mut v = w.clone();
                    v.push(x);
                    v
                })
            })
            .collect();
    }
    out
}

pub fn brute_universal(a: &Automaton, len: usize) -> bool {
    words(a.alphabet().len(), len).iter().all(|w| accepts(a, w))
}

pub fn random_automaton(r: &mut ChaCha8Rng, max_states: usize, min_syms: usize, max_syms: usize) -> Automaton {
    let n = r.gen_range(1..=max_states);
    let k = r.gen_range(min_syms..=max_syms);
    let mut t = Vec::new();
    for q in 0..n {
        for x in 0..k {
            for p in 0..n {
                if r.gen_bool(0.35) {
                    t.push((q, x, p));
                }
            }
        }
    }
    let initials: Vec<usize> = (0..n).filter(|_| r.gen_bool(0.4)).chain([0]).collect::<BTreeSet<_>>().into_iter().collect();
    let finals: Vec<usize> = (0..n).filter(|_| r.gen_bool(0.5)).collect();
    Automaton::from_parts(Kind::Nfa, numbered_alphabet("s", k), n, &initials, &finals, t).unwrap()
}

/// Length of the Delaying Gadget's computation, from its closed form.
pub fn delay_oracle(d: u64) -> usize {
    let mut w = 0u32;
    while (1u64 << w) - 1 < d {
        w += 1;
    }
    let (d, w) = (d as usize, w as usize);
    2 + d * (1 + 2 * (w + 1)) + 1 + w
}

// ---------------------------------------------------------------------------------------
// Criterion 1: the counter witness

pub fn alg3_expected(m: u32) -> BigUint {
    let l = (1..=(1u64 << m)).fold(1u64, |acc, x| acc.lcm(&x));
    BigUint::from(l * (2 * m as u64 + 3))
}

pub fn criterion_1() -> Check {
    for m in 1..=3u32 {
        let c = alg3_nfa(m).map_err(e)?;
        let n = c.automaton.state_count();
        ensure!(n == 11 * m as usize + 5, "m={m}: {n} states");
        ensure!(c.automaton.alphabet().len() == 15, "m={m}: alphabet {}", c.automaton.alphabet().len());
        let r = minimal_universality_length(&c.automaton, DEFAULT_DET_CAP).map_err(e)?;
        let want = alg3_expected(m);
        ensure!(r.minimal_length.as_ref() == Some(&want), "m={m}: got {:?}, want {want}", r.minimal_length);
    }
    Ok(())
}

// ---------------------------------------------------------------------------------------
// Criterion 2: basic gadget properties

fn gadget(text: &str, m: u32) -> Result<CompiledNfa, String> {
    compile_text(text, m).map_err(e)
}

fn no_proper_beyond(c: &CompiledNfa, from: &StateSet, k: usize, max: usize) -> Check {
    let layers = proper_layers(c, from, max).map_err(e)?;
    for (len, layer) in layers.iter().enumerate().skip(k) {
        ensure!(layer.is_empty(), "proper computation of length {len}");
    }
    Ok(())
}

pub fn criterion_2() -> Check {
    for m in 1..=2u32 {
        let max = 2 * m as usize + 4;
        let top = (1u64 << m) - 1;
        let mu = m as usize;

        let c = gadget("var V; select V;", m)?;
        let from = initial_configuration(&c, &[("V", VarInit::Invalid(vec![]))]).map_err(e)?;
        let comps = enumerate_computations(&c, &from, c.target, max).map_err(e)?;
        ensure!(comps.len() == 1 << m, "select m={m}: {} computations", comps.len());
        let mut values = BTreeSet::new();
        for comp in &comps {
            ensure!(comp.word.len() == mu, "select m={m}: length {}", comp.word.len());
            values.insert(value_of(&c, &comp.config, "V").map_err(e)?);
        }
        ensure!(values == (0..=top).map(Some).collect(), "select m={m}: values {values:?}");
        no_proper_beyond(&c, &from, mu + 1, max)?;

        for (text, len, holds) in [
            ("var U, V; eq U V;", mu, true),
            ("var U, V; neq U V;", mu + 1, false),
        ] {
            let c = gadget(text, m)?;
            for u in 0..=top {
                for v in 0..=top {
                    let from = initial_configuration(&c, &[("U", VarInit::Value(u)), ("V", VarInit::Value(v))]).map_err(e)?;
                    let comps = enumerate_computations(&c, &from, c.target, max).map_err(e)?;
                    ensure!(!comps.is_empty() == ((u == v) == holds), "{text} m={m} U={u} V={v}: {} computations", comps.len());
                    for comp in &comps {
                        ensure!(comp.word.len() == len, "{text} m={m}: length {}", comp.word.len());
                        ensure!(value_of(&c, &comp.config, "U").map_err(e)? == Some(u), "{text}: U changed");
                        ensure!(value_of(&c, &comp.config, "V").map_err(e)? == Some(v), "{text}: V changed");
                    }
                }
            }
        }

        let c = gadget("var V; inc V;", m)?;
        for v in 0..=top {
            let from = initial_configuration(&c, &[("V", VarInit::Value(v))]).map_err(e)?;
            let comps = enumerate_computations(&c, &from, c.target, max).map_err(e)?;
            if v < top {
                ensure!(!comps.is_empty(), "inc m={m} V={v}: no computation");
                for comp in &comps {
                    ensure!(comp.word.len() == mu + 1, "inc m={m}: length {}", comp.word.len());
                    ensure!(value_of(&c, &comp.config, "V").map_err(e)? == Some(v + 1), "inc m={m} V={v}: wrong value");
                }
            } else {
                ensure!(comps.is_empty(), "inc m={m}: overflow completes");
                no_proper_beyond(&c, &from, mu + 1, max)?;
            }
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------------------
// Criterion 3: delay and parallel timing

pub fn criterion_3() -> Check {
    for d in 1..=8u64 {
        let c = gadget(&format!("delay {d};"), 1)?;
        let from = initial_configuration(&c, &[]).map_err(e)?;
        let t = delay_oracle(d);
        // Words may differ in where the inequality test fires; length and end state may not.
        let ends = complete_configurations(&c, &from, c.target, t + 3).map_err(e)?;
        ensure!(ends.len() == 1, "delay {d}: {} distinct complete endings", ends.len());
        ensure!(ends[0].0 == t, "delay {d}: length {} instead of {t}", ends[0].0);
    }
    let body = "choose { wait 1; } or { wait 3; }";
    let c = gadget(&format!("var X; {body}"), 2)?;
    let from = initial_configuration(&c, &[]).map_err(e)?;
    let lengths = complete_lengths(&c, &from, c.target, 10).map_err(e)?;
    ensure!(lengths == [2, 4].into(), "choose lengths {lengths:?}");
    for (suffix, d) in [(" delay 1;", 1u64), (" delay 2;", 2), (" delay 3;", 3), ("", 1)] {
        let c = gadget(&format!("var X; parallel {{ {body} }}{suffix}"), 2)?;
        let from = initial_configuration(&c, &[]).map_err(e)?;
        let t = delay_oracle(d);
        let lengths = complete_lengths(&c, &from, c.target, t + 6).map_err(e)?;
        ensure!(lengths == [t + 1].into(), "parallel D={d}: lengths {lengths:?}, want {}", t + 1);
    }
    Ok(())
}

// ---------------------------------------------------------------------------------------
// Criterion 4: divisibility constants

pub const TRIVIAL_FORMULA: &str = "(exists (X) 2 (and (= X 3) (divides X)))";

pub fn criterion_4() -> Check {
    let f = parse_formula(TRIVIAL_FORMULA).map_err(e)?;
    let d = divisibility_program(&f).map_err(e)?;
    ensure!((d.r1, d.r2) == (18, 13), "constants ({}, {})", d.r1, d.r2);
    let (r1, r2) = (d.r1 as usize, d.r2 as usize);
    let c = compile_program(&d.program).map_err(e)?;
    let init = initial_configuration(&c, &[]).map_err(e)?;

    // Each pass through the loop head costs r1 letters after the select/reset prefix.
    let prefix = 3;
    let lengths = complete_lengths(&c, &init, c.target, prefix + 2 * r1).map_err(e)?;
    ensure!(lengths == [prefix, prefix + r1, prefix + 2 * r1].into(), "loop head lengths {lengths:?}");

    // The marked final state is first reached after r2 letters.
    let marked: Vec<usize> = c.finals.iter().map(|(q, _)| *q).filter(|&q| q != c.q_acc).collect();
    let layers = proper_layers(&c, &init, r2 + 1).map_err(e)?;
    let first = layers.iter().position(|l| l.iter().any(|cfg| marked.iter().any(|&q| cfg.contains(q))));
    ensure!(first == Some(r2), "first final state after {first:?} letters");

    let bound = 6 * r1 + r2;
    let found: BTreeSet<usize> = universal_lengths_up_to(&c.automaton, bound, DEFAULT_DET_CAP)
        .map_err(e)?
        .into_iter()
        .collect();
    // The formula holds at l' when 3 divides l'; the automaton is universal exactly where it fails.
    let want: BTreeSet<usize> = (0..=6).filter(|l| l % 3 != 0).map(|l| r1 * l + r2).collect();
    ensure!(found == want, "universal lengths {found:?}, want {want:?}");

    // Two more bodies whose truth in l' is easy to state by hand.
    let others: [(&str, fn(usize) -> bool); 2] = [
        ("(exists (X) 2 (and (= X 2) (notdivides X)))", |l| l % 2 == 1),
        ("(exists (X) 2 (and (prime X) (divides X)))", |l| l % 2 == 0 || l % 3 == 0),
    ];
    for (text, holds) in others {
        let d = divisibility_program(&parse_formula(text).map_err(e)?).map_err(e)?;
        let (r1, r2) = (d.r1 as usize, d.r2 as usize);
        let c = compile_program(&d.program).map_err(e)?;
        let found: BTreeSet<usize> = universal_lengths_up_to(&c.automaton, 6 * r1 + r2, DEFAULT_DET_CAP)
            .map_err(e)?
            .into_iter()
            .collect();
        let want: BTreeSet<usize> = (0..=6).filter(|&l| !holds(l)).map(|l| r1 * l + r2).collect();
        ensure!(found == want, "{text}: universal lengths {found:?}, want {want:?}");
    }
    Ok(())
}

// ---------------------------------------------------------------------------------------
// Criterion 5: DFA results

pub fn criterion_5() -> Check {
    for t in 1..=3usize {
        let a = prime_cycle_dfa(t, false).map_err(e)?;
        let ps = primes(t);
        let want = (1u64..).find(|l| ps.iter().all(|p| l % p == 0)).unwrap();
        let r = minimal_universality_length(&a, DEFAULT_DET_CAP).map_err(e)?;
        ensure!(r.minimal_length == Some(BigUint::from(want)), "prime cycle t={t}: {:?} vs {want}", r.minimal_length);
    }
    let mut r = rng(5);
    for i in 0..200 {
        let a = random_automaton(&mut r, 6, 1, 3);
        for len in 0..=8usize {
            let got = universal_at_length(&a, &BigUint::from(len), DEFAULT_DET_CAP).map_err(e)?;
            ensure!(got == brute_universal(&a, len), "automaton {i}, length {len}: solver says {got}");
        }
    }
    for i in 0..50 {
        let a = random_automaton(&mut r, 4, 2, 4);
        let k = a.alphabet().len();
        let bits = (usize::BITS - (k - 1).leading_zeros()) as u64;
        let b = binarize(&a).map_err(e)?;
        ensure!(b.alphabet().len() == 2, "binarized alphabet");
        let ra = minimal_universality_length(&a, DEFAULT_DET_CAP).map_err(e)?;
        let rb = minimal_universality_length(&b, DEFAULT_DET_CAP).map_err(e)?;
        ensure!(
            rb.minimal_length == ra.minimal_length.as_ref().map(|l| l * bits),
            "automaton {i} (k={k}): {:?} vs {:?}",
            ra.minimal_length,
            rb.minimal_length
        );
    }
    Ok(())
}

// ---------------------------------------------------------------------------------------
// Criterion 6: the SAT reduction

/// Every 3-CNF over variables 1..3 with at most four distinct clauses.
pub fn cnf_battery() -> Vec<Cnf> {
    let clauses: Vec<[Literal; 3]> = (0..8u32)
        .map(|signs| {
            [1, 2, 3].map(|v| Literal { var: v, positive: signs >> (v - 1) & 1 == 1 })
        })
        .collect();
    let mut out = Vec::new();
    for mask in 0u32..256 {
        if mask.count_ones() <= 4 {
            let cs = (0..8).filter(|i| mask >> i & 1 == 1).map(|i| clauses[i]).collect();
            out.push(Cnf::new(3, cs).unwrap());
        }
    }
    out
}

pub fn truth_table_sat(cnf: &Cnf) -> bool {
    (0..1u32 << cnf.vars).any(|bits| {
        let a: Vec<bool> = (0..cnf.vars).map(|i| bits >> i & 1 == 1).collect();
        cnf.clauses.iter().all(|c| c.iter().any(|l| a[l.var - 1] == l.positive))
    })
}

pub fn criterion_6() -> Check {
    let battery = cnf_battery();
    ensure!(battery.len() == 163, "battery has {} formulas", battery.len());
    for cnf in &battery {
        let a = sat_to_dfa(cnf).map_err(e)?;
        let r = minimal_universality_length(&a, DEFAULT_DET_CAP).map_err(e)?;
        let sat = truth_table_sat(cnf);
        ensure!(r.exists == sat, "{}: solver {} vs truth table {sat}", cnf.to_dimacs(), r.exists);
        if let Some(l) = &r.minimal_length {
            let assignment = decode_sat_assignment(l, cnf).map_err(e)?;
            ensure!(cnf.satisfied_by(&assignment), "{}: decoded {assignment:?} fails", cnf.to_dimacs());
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------------------
// Criterion 7: verifying gadget against evaluation

pub const VERIFY_BATTERY: [&str; 10] = [
    "(exists (X) 2 (and (= X 3) (divides X)))",
    "(exists (X) 2 (and (= X 2) (notdivides X)))",
    "(exists (X Y Z) 2 (and (= X 1) (= Y 2) (sum Z X Y) (divides Z)))",
    "(exists (X Y Z) 2 (and (= X 1) (= Y 3) (prod Z X Y) (notdivides Z)))",
    "(exists (X) 2 (and (= X 3) (prime X) (divides X)))",
    "(exists (U P) 2 (and (= U 1) (nthprime P U) (divides P)))",
    "(exists (X Y) 2 (or (and (= X 2) (divides X)) (and (= Y 3) (divides Y))))",
    "(exists (X) 2 (and (= X 0) (divides X)))",
    "(exists (X Y) 2 (and (= X 2) (= Y 3) (or (divides X) (notdivides Y))))",
    "(exists (U P) 2 (and (= U 2) (nthprime P U) (prime P) (notdivides P)))",
];

/// All assignments of `k` values below `2^m`.
fn assignments(k: usize, m: u32) -> Vec<Vec<u64>> {
    let n = 1u64 << m;
    (0..n.pow(k as u32))
        .map(|mut code| {
            (0..k)
                .map(|_| {
                    let x = code % n;
                    code /= n;
                    x
                })
                .collect()
        })
        .collect()
}

/// Whether the verifying gadget completes for every ℓ' up to `max_ell`, by assignment.
pub fn verify_gadget_agrees(f: &Formula, max_ell: u64) -> Check {
    let p = verify_to_program(f).map_err(e)?;
    let expanded = expand_macros(&p).map_err(e)?;
    let bound = longest_complete_bound(&expanded, &expanded.body, DEFAULT_BOUND_BUDGET).map_err(e)? as usize;
    let c = compile_program(&p).map_err(e)?;
    let counters: Vec<String> = f.vars.iter().map(|v| format!("{v}'")).collect();
    let limit = 1u64 << f.width;
    for ell in 0..=max_ell {
        let mut any = false;
        for xs in assignments(f.vars.len(), f.width) {
            // Counter values: ℓ' mod X, and ℓ' itself while it fits when X = 0.
            let cs: Option<Vec<u64>> = xs
                .iter()
                .map(|&x| if x == 0 { Some(ell).filter(|&l| l < limit) } else { Some(ell % x) })
                .collect();
            let Some(cs) = cs else { continue };
            let mut init: Vec<(&str, VarInit)> = Vec::new();
            for i in 0..xs.len() {
                init.push((&f.vars[i], VarInit::Value(xs[i])));
                init.push((&counters[i], VarInit::Value(cs[i])));
            }
            let from = configuration_at(&c, c.start, &init).map_err(e)?;
            let gadget = has_complete(&c, &from, c.target, bound).map_err(e)?;
            let direct = eval_with(f, &xs, &BigUint::from(ell)).map_err(e)?;
            ensure!(gadget == direct, "ℓ'={ell} values {xs:?}: gadget {gadget}, formula {direct}");
            any |= gadget;
        }
        let eval = eval_formula(f, &BigUint::from(ell)).map_err(e)?;
        ensure!(any == eval, "ℓ'={ell}: gadget {any}, eval_formula {eval}");
    }
    Ok(())
}

pub fn criterion_7() -> Check {
    let mut kinds = std::collections::HashSet::new();
    for text in VERIFY_BATTERY {
        let f = parse_formula(text).map_err(e)?;
        for a in f.body.atoms() {
            kinds.insert(std::mem::discriminant(a));
        }
        verify_gadget_agrees(&f, 12).map_err(|m| format!("{text}: {m}"))?;
    }
    ensure!(kinds.len() == 7, "battery covers {} atom kinds", kinds.len());
    Ok(())
}

// ---------------------------------------------------------------------------------------
// Criterion 8: machine tables

pub const MACHINE: &str = r#"{"states":2,"q0":0,"qf":1,"delta":[[0,0,1,0,"L"],[0,0,0,1,"R"]]}"#;

/// Rows that may follow `row`, computed from the transition list.
pub fn next_rows(ntm: &Ntm, row: &[Cell]) -> Vec<Vec<Cell>> {
    let heads: Vec<usize> = (0..row.len()).filter(|&i| row[i].state.is_some()).collect();
    if heads.len() != 1 {
        return Vec::new();
    }
    let h = heads[0];
    let q = row[h].state.unwrap();
    if q == ntm.qf {
        return vec![row.to_vec()];
    }
    let mut out = Vec::new();
    for t in &ntm.delta {
        if t.from != q || t.read != row[h].symbol {
            continue;
        }
        let target = match t.dir {
            lenuniv::reductions::Move::L => if h == 0 { 0 } else { h - 1 },
            lenuniv::reductions::Move::R => {
                if h + 1 == row.len() {
                    continue;
                }
                h + 1
            }
        };
        let mut next: Vec<Cell> = row.iter().map(|c| Cell { state: None, symbol: c.symbol }).collect();
        next[h].symbol = t.write;
        next[target].state = Some(t.to);
        out.push(next);
    }
    out
}

/// Conditions violated by a singly marked table, decided without any formula.
pub fn violated(ntm: &Ntm, t: &ComputationTable) -> BTreeSet<Condition> {
    let n = ntm.side();
    let mut out = BTreeSet::new();
    if t.rows[0][0] != Cell::head(ntm.q0, 0) {
        out.insert(Condition::Start);
    }
    if (1..n).any(|c| t.rows[0][c] != Cell::blank(0)) {
        out.insert(Condition::Blank);
    }
    if t.rows[n - 1][0] != Cell::head(ntm.qf, 0) {
        out.insert(Condition::Accept);
    }
    if (0..n - 1).any(|r| !next_rows(ntm, &t.rows[r]).contains(&t.rows[r + 1])) {
        out.insert(Condition::Window);
    }
    out
}

fn singly(ntm: &Ntm, t: &ComputationTable) -> Vec<Vec<Vec<usize>>> {
    t.rows.iter().map(|row| row.iter().map(|&c| vec![ntm.index(c)]).collect()).collect()
}

/// The six corrupted markings: one per condition, in order.
pub fn corruptions(ntm: &Ntm, good: &ComputationTable) -> Vec<(Condition, Vec<Vec<Vec<usize>>>)> {
    let mut out = Vec::new();
    let base = singly(ntm, good);

    let mut m = base.clone();
    m[0][0] = vec![ntm.index(Cell::head(ntm.q0, 0)), ntm.index(Cell::head(ntm.qf, 0))];
    out.push((Condition::DoubleMark, m));

    let mut m = base.clone();
    m[1][3].clear();
    out.push((Condition::Unmarked, m));

    let mut t = good.clone();
    t.rows[0][0] = Cell::head(ntm.qf, 0);
    out.push((Condition::Start, singly(ntm, &t)));

    let mut t = good.clone();
    for row in t.rows.iter_mut() {
        row[3].symbol = 1;
    }
    out.push((Condition::Blank, singly(ntm, &t)));

    // The other branch: write 1, step right, return left and accept on the 1.
    let mut t = good.clone();
    t.rows[1] = vec![Cell::blank(1), Cell::head(0, 0), Cell::blank(0), Cell::blank(0)];
    for r in 2..4 {
        t.rows[r] = vec![Cell::head(ntm.qf, 1), Cell::blank(0), Cell::blank(0), Cell::blank(0)];
    }
    out.push((Condition::Accept, singly(ntm, &t)));

    let mut t = good.clone();
    for r in 2..4 {
        t.rows[r][2].symbol ^= 1;
    }
    out.push((Condition::Window, singly(ntm, &t)));
    out
}

fn table_of(ntm: &Ntm, marks: &[Vec<Vec<usize>>]) -> Option<ComputationTable> {
    let rows = marks
        .iter()
        .map(|row| row.iter().map(|c| (c.len() == 1).then(|| ntm.cell(c[0])).flatten()).collect::<Option<Vec<_>>>())
        .collect::<Option<Vec<_>>>()?;
    Some(ComputationTable { rows })
}

pub fn criterion_8() -> Check {
    let ntm = Ntm::from_json(MACHINE).map_err(e)?;
    let good = simulate_ntm(&ntm, DEFAULT_SIMULATION_BUDGET)
        .map_err(e)?
        .ok_or("no accepting table found")?;
    ensure!(violated(&ntm, &good).is_empty(), "simulated table violates {:?}", violated(&ntm, &good));
    let phi = ntm_to_formula(&ntm).map_err(e)?;
    let ell = crt_encode_table(&ntm, &good).map_err(e)?;
    ensure!(!eval_formula(&phi, &ell).map_err(e)?, "formula holds on the accepting table");

    let parts: Vec<(Condition, Formula)> = Condition::ALL
        .iter()
        .map(|&c| condition_formula(&ntm, c).map(|f| (c, f)))
        .collect::<Result<_, _>>()
        .map_err(e)?;
    for (cond, marks) in corruptions(&ntm, &good) {
        if let Some(t) = table_of(&ntm, &marks) {
            let v = violated(&ntm, &t);
            ensure!(v == [cond].into(), "{cond:?} corruption violates {v:?}");
        }
        let ell = crt_encode_marks(&ntm, &marks).map_err(e)?;
        ensure!(decode_marks(&ntm, &ell).map_err(e)? == marks, "{cond:?}: encoding does not round trip");
        for (c, f) in &parts {
            let v = eval_formula(f, &ell).map_err(e)?;
            ensure!(v == (c == &cond), "{cond:?} corruption: condition {c:?} evaluates to {v}");
        }
        ensure!(eval_formula(&phi, &ell).map_err(e)?, "{cond:?} corruption: formula is false");
    }
    Ok(())
}

// ---------------------------------------------------------------------------------------
// Criterion 9: invariants under a fixed seed

pub fn random_matrix(r: &mut ChaCha8Rng, n: usize) -> BoolMatrix {
    let mut m = BoolMatrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            if r.gen_bool(0.3) {
                m.set(i, j, true);
            }
        }
    }
    m
}

pub fn criterion_9() -> Check {
    let mut r = rng(9);

    for _ in 0..200 {
        let n = r.gen_range(1..=8);
        let m = random_matrix(&mut r, n);
        let (a, b) = (r.gen_range(0u32..40), r.gen_range(0u32..40));
        let lhs = m.pow(&BigUint::from(a + b));
        let rhs = m.pow(&BigUint::from(a)).mul(&m.pow(&BigUint::from(b))).map_err(e)?;
        ensure!(lhs == rhs, "B^{a}·B^{b} differs from B^{}", a + b);
    }

    for i in 0..100 {
        let a = random_automaton(&mut r, 5, 1, 2);
        let d = a.determinize(DEFAULT_DET_CAP).map_err(e)?.dfa;
        for len in 0..=6 {
            for w in words(a.alphabet().len(), len) {
                ensure!(accepts(&a, &w) == accepts(&d, &w), "automaton {i}: word {w:?}");
            }
        }
    }

    let f = parse_formula(TRIVIAL_FORMULA).map_err(e)?;
    let programs = vec![
        alg3_nfa(1).map_err(e)?,
        alg3_nfa(2).map_err(e)?,
        compile_program(&divisibility_program(&f).map_err(e)?.program).map_err(e)?,
        compile_text("var X, Y; select X; add Y X X; if prime Y { inc Y; } else { Y <- 0; }", 3).map_err(e)?,
    ];
    for c in &programs {
        for x in 0..c.automaton.alphabet().len() {
            ensure!(c.automaton.successors(c.q_acc, x) == [c.q_acc], "q_acc leaves under {}", c.automaton.alphabet()[x]);
        }
    }
    for c in &programs[..2] {
        let init = initial_configuration(c, &[]).map_err(e)?;
        for (len, layer) in proper_layers(c, &init, 12).map_err(e)?.iter().enumerate() {
            for cfg in layer {
                ensure!(active_control(c, cfg).len() == 1, "{} control states after {len} letters", active_control(c, cfg).len());
            }
        }
    }

    let ntm = Ntm::from_json(MACHINE).map_err(e)?;
    let (n, z) = (ntm.side(), ntm.z());
    for _ in 0..20 {
        let marks: Vec<Vec<Vec<usize>>> = (0..n)
            .map(|_| (0..n).map(|_| (1..=z).filter(|_| r.gen_bool(0.3)).collect()).collect())
            .collect();
        let ell = crt_encode_marks(&ntm, &marks).map_err(e)?;
        ensure!(decode_marks(&ntm, &ell).map_err(e)? == marks, "marks do not round trip");
    }
    for t in 1..=4 {
        let a = prime_cycle_dfa(t, false).map_err(e)?;
        let want: u64 = primes(t).iter().product();
        let l = minimal_universality_length(&a, DEFAULT_DET_CAP).map_err(e)?.minimal_length;
        ensure!(l == Some(BigUint::from(want)), "prime cycle t={t}");
    }
    let cnf = cnf_battery().into_iter().find(|c| c.clauses.len() == 4 && truth_table_sat(c)).unwrap();
    let a = sat_to_dfa(&cnf).map_err(e)?;
    let l = minimal_universality_length(&a, DEFAULT_DET_CAP).map_err(e)?.minimal_length.unwrap();
    let decoded = decode_sat_assignment(&l, &cnf).map_err(e)?;
    let ps = primes(3);
    for (i, &v) in decoded.iter().enumerate() {
        ensure!(l.mod_floor(&BigUint::from(ps[i])) == BigUint::from(v as u8), "residue of variable {}", i + 1);
    }
    Ok(())
}

pub const CRITERIA: [(&str, fn() -> Check); 9] = [
    ("counter witness size and minimal length", criterion_1),
    ("basic gadget properties", criterion_2),
    ("delay and parallel timing", criterion_3),
    ("divisibility constants", criterion_4),
    ("prime cycles, matrix method, binarization", criterion_5),
    ("3-SAT reduction", criterion_6),
    ("verifying gadget equivalence", criterion_7),
    ("machine table oracle chain", criterion_8),
    ("invariants under a fixed seed", criterion_9),
];

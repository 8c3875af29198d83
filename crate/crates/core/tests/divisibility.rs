mod common;

use common::*;
use lenuniv::formulas::{divisibility_program, parse_formula};
use lenuniv::gadgetlang::{compile_program, initial_configuration, proper_layers};

#[test]
fn constants_and_universal_lengths() {
    criterion_4().unwrap();
}

#[test]
fn constants_follow_lengths() {
    for text in VERIFY_BATTERY {
        let f = parse_formula(text).unwrap();
        let d = divisibility_program(&f).unwrap();
        let (k, m) = (f.vars.len() as u64, f.width as u64);
        let t = delay_oracle(d.delay) as u64;
        assert!(t >= d.verify_bound as u64, "{text}: delay too short");
        assert_eq!(d.r1, 1 + (t + 1) + (2 * m + 3) * k, "{text}");
        assert_eq!(d.r2, k * m + k + 1 + t, "{text}");
    }
}

#[test]
fn final_state_reached_first_at_r2() {
    for text in &VERIFY_BATTERY[..3] {
        let d = divisibility_program(&parse_formula(text).unwrap()).unwrap();
        let c = compile_program(&d.program).unwrap();
        let init = initial_configuration(&c, &[]).unwrap();
        let marked: Vec<usize> = c.finals.iter().map(|(q, _)| *q).filter(|&q| q != c.q_acc).collect();
        let r2 = d.r2 as usize;
        let layers = proper_layers(&c, &init, r2).unwrap();
        let first = layers.iter().position(|l| l.iter().any(|cfg| marked.iter().any(|&q| cfg.contains(q))));
        assert_eq!(first, Some(r2), "{text}");
    }
}

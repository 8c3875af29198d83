mod common;

use common::*;
use lenuniv::gadgetlang::{compile_text, enumerate_computations, initial_configuration, value_of, VarInit};

#[test]
fn basic_properties() {
    criterion_2().unwrap();
}

#[test]
fn assignments_copy_and_set() {
    for m in 1..=3u32 {
        let top = (1u64 << m) - 1;
        let c = compile_text("var U, V; U <- V;", m).unwrap();
        for v in 0..=top {
            let from = initial_configuration(&c, &[("U", VarInit::Invalid(vec![])), ("V", VarInit::Value(v))]).unwrap();
            let comps = enumerate_computations(&c, &from, c.target, 4).unwrap();
            assert_eq!(comps.len(), 1);
            assert_eq!(comps[0].word.len(), 1);
            assert_eq!(value_of(&c, &comps[0].config, "U").unwrap(), Some(v));
            assert_eq!(value_of(&c, &comps[0].config, "V").unwrap(), Some(v));
        }
        for k in 0..=top {
            let c = compile_text(&format!("var U; U <- {k};"), m).unwrap();
            let from = initial_configuration(&c, &[("U", VarInit::Invalid(vec![]))]).unwrap();
            let comps = enumerate_computations(&c, &from, c.target, 4).unwrap();
            assert_eq!(comps.len(), 1);
            assert_eq!(value_of(&c, &comps[0].config, "U").unwrap(), Some(k));
        }
    }
}

#[test]
fn wait_has_one_computation() {
    for d in 1..=6u64 {
        let c = compile_text(&format!("var X; wait {d};"), 1).unwrap();
        let from = initial_configuration(&c, &[]).unwrap();
        let comps = enumerate_computations(&c, &from, c.target, d as usize + 3).unwrap();
        assert_eq!(comps.len(), 1);
        assert_eq!(comps[0].word.len(), d as usize);
    }
}

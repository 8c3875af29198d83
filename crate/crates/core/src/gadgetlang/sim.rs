//! Configurations of compiled programs and enumeration of their computations.

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};

use super::ast::{Program, Role, Stmt};
use super::compile::{compile, CompiledNfa, CompiledVar};
use crate::automata::{StateId, StateSet};
use crate::error::{Error, Result};

/// Default number of (word, configuration) nodes an enumeration may visit.
pub const DEFAULT_ENUM_BUDGET: u64 = 10_000_000;

/// Default number of distinct configurations explored when bounding computation lengths.
pub const DEFAULT_BOUND_BUDGET: usize = 2_000_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum VarInit {
    Value(u64),
    /// An arbitrary subset of the variable's states, given as offsets: `0..w` for `v_1..v_w`,
    /// `w..2w` for `v̄_1..v̄_w`.
    Invalid(Vec<usize>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Computation {
    pub word: Vec<usize>,
    pub config: StateSet,
}

fn lookup<'c>(c: &'c CompiledNfa, name: &str) -> Result<&'c CompiledVar> {
    c.var(name)
        .ok_or_else(|| Error::input(format!("unknown variable `{name}`")))
}

/// Writes `init` into the states of `v`, replacing whatever was there.
pub fn encode(config: &mut StateSet, v: &CompiledVar, init: &VarInit) -> Result<()> {
    for q in v.states() {
        config.remove(q);
    }
    let w = v.width as usize;
    match init {
        VarInit::Value(x) => {
            if *x >> v.width != 0 {
                return Err(Error::input(format!(
                    "value {x} does not fit variable `{}` of width {w}",
                    v.name
                )));
            }
            for i in 0..w {
                config.insert(if x >> i & 1 == 1 { v.pos[i] } else { v.neg[i] });
            }
        }
        VarInit::Invalid(offsets) => {
            for &o in offsets {
                if o >= 2 * w {
                    return Err(Error::input(format!("offset {o} outside variable `{}`", v.name)));
                }
                config.insert(if o < w { v.pos[o] } else { v.neg[o - w] });
            }
        }
    }
    Ok(())
}

/// A configuration with only `control` active among control states and the given variables
/// set; unmentioned variables are empty.
pub fn configuration_at(c: &CompiledNfa, control: StateId, assignments: &[(&str, VarInit)]) -> Result<StateSet> {
    let mut config = c.automaton.empty_set();
    config.insert(control);
    for (name, init) in assignments {
        encode(&mut config, lookup(c, name)?, init)?;
    }
    Ok(config)
}

/// The configuration with the program's start state active.
pub fn initial_configuration(c: &CompiledNfa, assignments: &[(&str, VarInit)]) -> Result<StateSet> {
    configuration_at(c, c.start, assignments)
}

/// The value held by `name`, or `None` when the variable is not valid.
pub fn value_of(c: &CompiledNfa, config: &StateSet, name: &str) -> Result<Option<u64>> {
    let v = lookup(c, name)?;
    let mut x = 0u64;
    for i in 0..v.width as usize {
        match (config.contains(v.pos[i]), config.contains(v.neg[i])) {
            (true, false) => x |= 1 << i,
            (false, true) => {}
            _ => return Ok(None),
        }
    }
    Ok(Some(x))
}

pub fn is_proper(c: &CompiledNfa, config: &StateSet) -> bool {
    !config.contains(c.q_acc)
}

pub fn active_control(c: &CompiledNfa, config: &StateSet) -> Vec<StateId> {
    config.iter().filter(|&q| c.is_control(q)).collect()
}

/// Every word of length at most `max_len` whose computation from `from` stays proper and ends
/// with `target` active, together with the configuration it ends in.
pub fn enumerate_computations(c: &CompiledNfa, from: &StateSet, target: StateId, max_len: usize) -> Result<Vec<Computation>> {
    enumerate_computations_with(c, from, target, max_len, DEFAULT_ENUM_BUDGET)
}

pub fn enumerate_computations_with(
    c: &CompiledNfa,
    from: &StateSet,
    target: StateId,
    max_len: usize,
    budget: u64,
) -> Result<Vec<Computation>> {
    let a = &c.automaton;
    let k = a.alphabet().len();
    let mut out = Vec::new();
    let mut visited = 0u64;
    let mut stack = vec![(Vec::new(), from.clone())];
    while let Some((word, config)) = stack.pop() {
        visited += 1;
        if visited > budget {
            return Err(Error::resource("computation enumeration", budget));
        }
        if !is_proper(c, &config) {
            continue;
        }
        if config.contains(target) {
            out.push(Computation {
                word: word.clone(),
                config: config.clone(),
            });
        }
        if word.len() == max_len {
            continue;
        }
        for sym in (0..k).rev() {
            let next = a.step_index(&config, sym);
            if is_proper(c, &next) {
                let mut w = word.clone();
                w.push(sym);
                stack.push((w, next));
            }
        }
    }
    out.sort_by(|x, y| x.word.len().cmp(&y.word.len()).then_with(|| x.word.cmp(&y.word)));
    Ok(out)
}

/// Distinct proper configurations reachable from `from` in exactly `k` letters, for each
/// `k ≤ max_len`.
pub fn proper_layers(c: &CompiledNfa, from: &StateSet, max_len: usize) -> Result<Vec<BTreeSet<StateSet>>> {
    let a = &c.automaton;
    let mut layers = Vec::with_capacity(max_len + 1);
    let mut layer: BTreeSet<StateSet> = BTreeSet::new();
    if is_proper(c, from) {
        layer.insert(from.clone());
    }
    let mut total = 0usize;
    for _ in 0..max_len {
        let mut next = BTreeSet::new();
        for config in &layer {
            for sym in 0..a.alphabet().len() {
                let n = a.step_index(config, sym);
                if is_proper(c, &n) {
                    next.insert(n);
                }
            }
        }
        total += next.len();
        if total > DEFAULT_BOUND_BUDGET {
            return Err(Error::resource("configuration layers", DEFAULT_BOUND_BUDGET as u64));
        }
        layers.push(std::mem::replace(&mut layer, next));
    }
    layers.push(layer);
    Ok(layers)
}

/// `(length, configuration)` for every complete computation of length at most `max_len`,
/// deduplicated by configuration within each length.
pub fn complete_configurations(
    c: &CompiledNfa,
    from: &StateSet,
    target: StateId,
    max_len: usize,
) -> Result<Vec<(usize, StateSet)>> {
    let layers = proper_layers(c, from, max_len)?;
    Ok(layers
        .into_iter()
        .enumerate()
        .flat_map(|(k, l)| l.into_iter().filter(|s| s.contains(target)).map(move |s| (k, s)))
        .collect())
}

pub fn complete_lengths(c: &CompiledNfa, from: &StateSet, target: StateId, max_len: usize) -> Result<BTreeSet<usize>> {
    Ok(complete_configurations(c, from, target, max_len)?
        .into_iter()
        .map(|(k, _)| k)
        .collect())
}

pub fn has_complete(c: &CompiledNfa, from: &StateSet, target: StateId, max_len: usize) -> Result<bool> {
    Ok(!complete_lengths(c, from, target, max_len)?.is_empty())
}

/// Length of the longest complete computation from any of `initials`, or `None` when there is
/// none. Fails when complete computations are unbounded.
pub fn longest_complete(c: &CompiledNfa, initials: &[StateSet], target: StateId, budget: usize) -> Result<Option<u64>> {
    let a = &c.automaton;
    let k = a.alphabet().len();
    let mut index: HashMap<StateSet, usize> = HashMap::new();
    let mut nodes: Vec<StateSet> = Vec::new();
    let mut succ: Vec<Vec<usize>> = Vec::new();
    let mut queue = VecDeque::new();
    for s in initials {
        if is_proper(c, s) && !index.contains_key(s) {
            index.insert(s.clone(), nodes.len());
            nodes.push(s.clone());
            succ.push(Vec::new());
            queue.push_back(nodes.len() - 1);
        }
    }
    while let Some(i) = queue.pop_front() {
        for sym in 0..k {
            let n = a.step_index(&nodes[i], sym);
            if !is_proper(c, &n) {
                continue;
            }
            let j = match index.get(&n) {
                Some(&j) => j,
                None => {
                    if nodes.len() >= budget {
                        return Err(Error::resource(
                            "configurations explored while bounding computation length; give an explicit delay",
                            budget as u64,
                        ));
                    }
                    index.insert(n.clone(), nodes.len());
                    nodes.push(n);
                    succ.push(Vec::new());
                    queue.push_back(nodes.len() - 1);
                    nodes.len() - 1
                }
            };
            if !succ[i].contains(&j) {
                succ[i].push(j);
            }
        }
    }

    // keep only configurations from which the target is reachable
    let mut pred: Vec<Vec<usize>> = vec![Vec::new(); nodes.len()];
    for (i, s) in succ.iter().enumerate() {
        for &j in s {
            pred[j].push(i);
        }
    }
    let mut live = vec![false; nodes.len()];
    let mut stack: Vec<usize> = (0..nodes.len()).filter(|&i| nodes[i].contains(target)).collect();
    for &i in &stack {
        live[i] = true;
    }
    while let Some(j) = stack.pop() {
        for &i in &pred[j] {
            if !live[i] {
                live[i] = true;
                stack.push(i);
            }
        }
    }

    // longest path over the live subgraph by topological order
    let mut indeg = vec![0usize; nodes.len()];
    for i in (0..nodes.len()).filter(|&i| live[i]) {
        for &j in succ[i].iter().filter(|&&j| live[j]) {
            indeg[j] += 1;
        }
    }
    let mut order = Vec::new();
    let mut ready: Vec<usize> = (0..nodes.len()).filter(|&i| live[i] && indeg[i] == 0).collect();
    while let Some(i) = ready.pop() {
        order.push(i);
        for &j in succ[i].iter().filter(|&&j| live[j]) {
            indeg[j] -= 1;
            if indeg[j] == 0 {
                ready.push(j);
            }
        }
    }
    let live_count = live.iter().filter(|&&b| b).count();
    if order.len() != live_count {
        return Err(Error::input("complete computations have unbounded length"));
    }
    // longest[i] = longest path from i to a target configuration
    let mut longest: Vec<Option<u64>> = vec![None; nodes.len()];
    for &i in order.iter().rev() {
        let mut best = if nodes[i].contains(target) { Some(0) } else { None };
        for &j in succ[i].iter().filter(|&&j| live[j]) {
            if let Some(l) = longest[j] {
                best = Some(best.map_or(l + 1, |b: u64| b.max(l + 1)));
            }
        }
        longest[i] = best;
    }
    let starts: HashSet<usize> = initials.iter().filter_map(|s| index.get(s).copied()).collect();
    Ok(starts.into_iter().filter_map(|i| longest[i]).max())
}

/// Longest complete computation of `body` run on its own, over every value of the external
/// variables it mentions; internal variables start empty. Zero when no complete computation
/// exists.
pub fn longest_complete_bound(program: &Program, body: &[Stmt], budget: usize) -> Result<u64> {
    let mut standalone = program.clone();
    standalone.body = body.to_vec();
    let c = compile(&standalone)?;
    let mut used = Vec::new();
    for s in body {
        s.collect_vars(&mut used);
    }
    used.retain(|&v| program.vars[v].role == Role::External);
    used.sort_unstable();
    let bits: u32 = used.iter().map(|&v| program.vars[v].width).sum();
    if bits > 24 {
        return Err(Error::resource(
            "external assignments enumerated while bounding computation length; give an explicit delay",
            1 << 24,
        ));
    }
    let mut initials = Vec::with_capacity(1 << bits);
    for code in 0u64..(1u64 << bits) {
        let mut config = c.automaton.empty_set();
        config.insert(c.start);
        let mut shift = 0;
        for &v in &used {
            let w = program.vars[v].width;
            let x = (code >> shift) & ((1 << w) - 1);
            shift += w;
            encode(&mut config, &c.variables[v], &VarInit::Value(x))?;
        }
        initials.push(config);
    }
    Ok(longest_complete(&c, &initials, c.target, budget)?.unwrap_or(0))
}

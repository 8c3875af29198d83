//! Compilation of macro-free programs into NFAs.
//!
//! State layout: `q_acc` is state 0, then the states of every declared variable
//! (`v_1..v_w` followed by `v̄_1..v̄_w`), then control states in allocation order.
//!
//! A letter lists images only for the states it acts on. Any other control state goes to
//! `q_acc`, any other variable state is fixed, and `q_acc` is absorbing.

use std::collections::BTreeMap;

use serde_json::{json, Value};

use super::ast::{Cond, Program, Role, Stmt, VarId};
use crate::automata::{Automaton, Kind, StateId};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompiledVar {
    pub name: String,
    pub width: u32,
    pub role: Role,
    /// `pos[i-1]` is `v_i`.
    pub pos: Vec<StateId>,
    /// `neg[i-1]` is `v̄_i`.
    pub neg: Vec<StateId>,
}

impl CompiledVar {
    pub fn states(&self) -> impl Iterator<Item = StateId> + '_ {
        self.pos.iter().chain(&self.neg).copied()
    }
}

/// Start and target control states of one compiled statement.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Span {
    pub label: String,
    pub depth: usize,
    pub start: StateId,
    pub target: StateId,
}

#[derive(Debug, Clone)]
pub struct CompiledNfa {
    pub automaton: Automaton,
    pub q_acc: StateId,
    pub start: StateId,
    /// Target of the whole program; the loop head when the program ends in `while true`.
    pub target: StateId,
    pub variables: Vec<CompiledVar>,
    pub statements: Vec<Span>,
    /// Final states other than `q_acc`, with the label of the statement that marked them.
    pub finals: Vec<(StateId, String)>,
    /// First control state; states below it are `q_acc` and variable states.
    pub first_control: StateId,
    pub program: Program,
}

impl CompiledNfa {
    pub fn var(&self, name: &str) -> Option<&CompiledVar> {
        self.variables.iter().find(|v| v.name == name)
    }

    pub fn is_control(&self, q: StateId) -> bool {
        q >= self.first_control
    }

    /// Everything except the automaton itself, as a JSON object.
    pub fn metadata_json(&self) -> Value {
        json!({
            "q_acc": self.q_acc,
            "start": self.start,
            "target": self.target,
            "variables": self.variables.iter().map(|v| json!({
                "name": v.name,
                "width": v.width,
                "role": match v.role { Role::External => "external", Role::Internal => "internal" },
                "pos": v.pos,
                "neg": v.neg,
            })).collect::<Vec<_>>(),
            "statements": self.statements.iter().map(|s| json!({
                "label": s.label,
                "depth": s.depth,
                "start": s.start,
                "target": s.target,
            })).collect::<Vec<_>>(),
            "finals": self.finals.iter().map(|(q, l)| json!({"state": q, "label": l})).collect::<Vec<_>>(),
        })
    }
}

#[derive(Debug, Clone)]
struct Letter {
    name: String,
    map: BTreeMap<StateId, Vec<StateId>>,
}

impl Letter {
    fn new(name: String) -> Self {
        Letter {
            name,
            map: BTreeMap::new(),
        }
    }

    fn set(&mut self, q: StateId, image: impl IntoIterator<Item = StateId>) {
        self.map.insert(q, image.into_iter().collect());
    }
}

/// Rejects bodies that the parallel construction cannot run alongside a timer.
pub fn check_parallel_body(body: &[Stmt]) -> Result<()> {
    if body.iter().any(Stmt::contains_while_true) {
        return Err(Error::input(
            "a parallel body must not contain `while true`: its computations are unbounded",
        ));
    }
    if body.first().is_some_and(Stmt::begins_with_loop) {
        return Err(Error::input(
            "a parallel body must not begin with a loop, since the loop head would be shared with the timer",
        ));
    }
    Ok(())
}

struct Compiler<'p> {
    program: &'p Program,
    vars: Vec<CompiledVar>,
    state_count: usize,
    next_gadget: usize,
    spans: Vec<Span>,
    finals: Vec<(StateId, String)>,
}

const Q_ACC: StateId = 0;

impl<'p> Compiler<'p> {
    fn new(program: &'p Program) -> Self {
        let mut next = 1;
        let mut vars = Vec::with_capacity(program.vars.len());
        for d in &program.vars {
            let w = d.width as usize;
            let pos: Vec<StateId> = (next..next + w).collect();
            let neg: Vec<StateId> = (next + w..next + 2 * w).collect();
            next += 2 * w;
            vars.push(CompiledVar {
                name: d.name.clone(),
                width: d.width,
                role: d.role,
                pos,
                neg,
            });
        }
        Compiler {
            program,
            vars,
            state_count: next,
            next_gadget: 0,
            spans: Vec::new(),
            finals: Vec::new(),
        }
    }

    fn alloc(&mut self) -> StateId {
        self.state_count += 1;
        self.state_count - 1
    }

    fn gadget_id(&mut self) -> usize {
        self.next_gadget += 1;
        self.next_gadget
    }

    fn letter(id: usize, local: &str) -> Letter {
        Letter::new(format!("g{id}.{local}"))
    }

    /// `p_0 = start, p_1, ..., p_n = target` with fresh intermediate states.
    fn chain(&mut self, start: StateId, target: StateId, n: usize) -> Vec<StateId> {
        let mut p = vec![start];
        for _ in 1..n {
            let q = self.alloc();
            p.push(q);
        }
        p.push(target);
        p
    }

    fn width(&self, v: VarId) -> usize {
        self.vars[v].width as usize
    }

    fn same_width(&self, a: VarId, b: VarId, what: &str) -> Result<usize> {
        if self.width(a) != self.width(b) {
            return Err(Error::input(format!(
                "{what} needs variables of equal width, `{}` and `{}` differ",
                self.vars[a].name, self.vars[b].name
            )));
        }
        Ok(self.width(a))
    }

    /// 1-based cyclic predecessor.
    fn prev(i: usize, w: usize) -> usize {
        if i == 1 {
            w
        } else {
            i - 1
        }
    }

    fn pos(&self, v: VarId, i: usize) -> StateId {
        self.vars[v].pos[i - 1]
    }

    fn neg(&self, v: VarId, i: usize) -> StateId {
        self.vars[v].neg[i - 1]
    }

    /// Every bit moves one position down, cyclically.
    fn rotate(&self, l: &mut Letter, v: VarId) {
        let w = self.width(v);
        for i in 1..=w {
            l.set(self.pos(v, i), [self.pos(v, Self::prev(i, w))]);
            l.set(self.neg(v, i), [self.neg(v, Self::prev(i, w))]);
        }
    }

    fn block(&mut self, body: &[Stmt], start: StateId, target: StateId, depth: usize, out: &mut Vec<Letter>) -> Result<()> {
        if body.is_empty() {
            if start != target {
                return Err(Error::input("empty block between distinct control states"));
            }
            return Ok(());
        }
        let mut cur = start;
        for (i, s) in body.iter().enumerate() {
            let next = if i + 1 == body.len() { target } else { self.alloc() };
            self.stmt(s, cur, next, depth, out)?;
            cur = next;
        }
        Ok(())
    }

    fn stmt(&mut self, s: &Stmt, start: StateId, target: StateId, depth: usize, out: &mut Vec<Letter>) -> Result<()> {
        if s.is_macro() || matches!(s, Stmt::Parallel { .. }) {
            return Err(Error::input(format!(
                "`{}` must be expanded before compilation",
                self.program.label(s)
            )));
        }
        self.spans.push(Span {
            label: self.program.label(s),
            depth,
            start,
            target,
        });
        match s {
            Stmt::Select(v) => self.select(*v, start, target, out),
            Stmt::AssignConst(v, c) => self.assign_const(*v, *c, start, target, out),
            Stmt::AssignVar { dst, src } => self.assign_var(*dst, *src, start, target, out)?,
            Stmt::Inc(v) => self.inc(*v, start, target, out),
            Stmt::Eq(a, b) => self.eq(*a, *b, start, target, out)?,
            Stmt::Neq(a, b) => self.neq(*a, *b, start, target, out)?,
            Stmt::Wait(d) => self.wait(*d, start, target, out),
            Stmt::Seq(body) => self.block(body, start, target, depth + 1, out)?,
            Stmt::Choose(branches) => self.choose(branches, start, target, depth, out)?,
            Stmt::If { cond, then, els } => {
                let (yes, no) = self.cond(cond)?;
                let mut b1 = yes;
                b1.extend(then.iter().cloned());
                let mut b2 = no;
                b2.extend(els.iter().flatten().cloned());
                self.choose(&[b1, b2], start, target, depth, out)?;
            }
            Stmt::While { cond, body } => {
                let (yes, no) = self.cond(cond)?;
                let id = self.gadget_id();
                let mut c1 = Self::letter(id, "c1");
                let mut c2 = Self::letter(id, "c2");
                let s1 = self.alloc();
                let s2 = self.alloc();
                c1.set(start, [s1]);
                c2.set(start, [s2]);
                out.push(c1);
                out.push(c2);
                let mut b1 = yes;
                b1.extend(body.iter().cloned());
                self.block(&b1, s1, start, depth + 1, out)?;
                self.block(&no, s2, target, depth + 1, out)?;
            }
            Stmt::WhileTrue(body) => {
                if start != target {
                    return Err(Error::input(
                        "`while true` is allowed only as the last top-level statement",
                    ));
                }
                self.block(body, start, start, depth + 1, out)?;
            }
            Stmt::ParallelCore { body, timer, .. } => self.parallel(body, timer, start, target, depth, out)?,
            Stmt::Final(inner) => {
                let label = self.program.label(inner);
                if !self.finals.iter().any(|(q, _)| *q == start) {
                    self.finals.push((start, label));
                }
                self.stmt(inner, start, target, depth + 1, out)?;
            }
            Stmt::Delay(_)
            | Stmt::Add { .. }
            | Stmt::Mul { .. }
            | Stmt::Prime(_)
            | Stmt::NotPrime(_)
            | Stmt::NthPrime { .. }
            | Stmt::Parallel { .. } => unreachable!("rejected above"),
        }
        Ok(())
    }

    /// The statement lists realizing a condition and its negation.
    fn cond(&self, c: &Cond) -> Result<(Vec<Stmt>, Vec<Stmt>)> {
        match c {
            Cond::Eq(a, b) => Ok((vec![Stmt::Eq(*a, *b)], vec![Stmt::Neq(*a, *b)])),
            Cond::Neq(a, b) => Ok((vec![Stmt::Neq(*a, *b)], vec![Stmt::Eq(*a, *b)])),
            Cond::Gadget { holds, fails } => Ok((holds.clone(), fails.clone())),
            Cond::Prime(_) | Cond::NotPrime(_) => {
                Err(Error::input("primality conditions must be expanded before compilation"))
            }
        }
    }

    fn choose(&mut self, branches: &[Vec<Stmt>], start: StateId, target: StateId, depth: usize, out: &mut Vec<Letter>) -> Result<()> {
        let id = self.gadget_id();
        let mut entries = Vec::with_capacity(branches.len());
        for (i, b) in branches.iter().enumerate() {
            let entry = if b.is_empty() { target } else { self.alloc() };
            let mut l = Self::letter(id, &format!("c{}", i + 1));
            l.set(start, [entry]);
            out.push(l);
            entries.push(entry);
        }
        for (b, entry) in branches.iter().zip(entries) {
            self.block(b, entry, target, depth + 1, out)?;
        }
        Ok(())
    }

    fn select(&mut self, v: VarId, start: StateId, target: StateId, out: &mut Vec<Letter>) {
        let w = self.width(v);
        let p = self.chain(start, target, w);
        let id = self.gadget_id();
        for (local, bit) in [("a1", self.pos(v, 1)), ("a2", self.neg(v, 1))] {
            let mut l = Self::letter(id, local);
            for i in 0..w {
                l.set(p[i], [p[i + 1], bit]);
            }
            for i in 1..w {
                l.set(self.pos(v, i), [self.pos(v, i + 1)]);
                l.set(self.neg(v, i), [self.neg(v, i + 1)]);
            }
            l.set(self.pos(v, w), []);
            l.set(self.neg(v, w), []);
            out.push(l);
        }
    }

    fn clear(&self, l: &mut Letter, v: VarId) {
        for q in self.vars[v].states().collect::<Vec<_>>() {
            l.set(q, []);
        }
    }

    fn assign_const(&mut self, v: VarId, c: u64, start: StateId, target: StateId, out: &mut Vec<Letter>) {
        let id = self.gadget_id();
        let mut l = Self::letter(id, "a");
        self.clear(&mut l, v);
        let mut image = vec![target];
        for i in 1..=self.width(v) {
            image.push(if c >> (i - 1) & 1 == 1 { self.pos(v, i) } else { self.neg(v, i) });
        }
        l.set(start, image);
        out.push(l);
    }

    fn assign_var(&mut self, dst: VarId, src: VarId, start: StateId, target: StateId, out: &mut Vec<Letter>) -> Result<()> {
        let w = self.same_width(dst, src, "assignment")?;
        let id = self.gadget_id();
        let mut l = Self::letter(id, "a");
        self.clear(&mut l, dst);
        for i in 1..=w {
            l.set(self.pos(src, i), [self.pos(dst, i), self.pos(src, i)]);
            l.set(self.neg(src, i), [self.neg(dst, i), self.neg(src, i)]);
        }
        l.set(start, [target]);
        out.push(l);
        Ok(())
    }

    fn eq(&mut self, a: VarId, b: VarId, start: StateId, target: StateId, out: &mut Vec<Letter>) -> Result<()> {
        let w = self.same_width(a, b, "equality")?;
        let p = self.chain(start, target, w);
        let id = self.gadget_id();
        for (local, one) in [("a1", true), ("a2", false)] {
            let mut l = Self::letter(id, local);
            for i in 0..w {
                l.set(p[i], [p[i + 1]]);
            }
            for v in [a, b] {
                self.rotate(&mut l, v);
                // the letter asserts the value of bit m
                let wrong = if one { self.neg(v, w) } else { self.pos(v, w) };
                l.set(wrong, [Q_ACC]);
            }
            out.push(l);
        }
        Ok(())
    }

    fn neq(&mut self, a: VarId, b: VarId, start: StateId, target: StateId, out: &mut Vec<Letter>) -> Result<()> {
        let w = self.same_width(a, b, "inequality")?;
        let p = self.chain(start, target, 2 * w);
        let id = self.gadget_id();

        let mut shift = Self::letter(id, "as");
        for i in 0..w {
            shift.set(p[i], [p[i + 1]]);
        }
        for i in 1..w {
            shift.set(p[w + i], [p[w + i + 1]]);
        }
        self.rotate(&mut shift, a);
        self.rotate(&mut shift, b);

        // a1 checks (a_m, b_m) = (1, 0), a2 checks (0, 1)
        for (local, first, second) in [("a1", a, b), ("a2", b, a)] {
            let mut l = Self::letter(id, local);
            for i in 1..=w {
                l.set(p[i], [p[w + i]]);
            }
            l.set(self.neg(first, w), [Q_ACC]);
            l.set(self.pos(second, w), [Q_ACC]);
            out.push(l);
        }
        out.push(shift);
        Ok(())
    }

    fn inc(&mut self, v: VarId, start: StateId, target: StateId, out: &mut Vec<Letter>) {
        let w = self.width(v);
        let p = self.chain(start, target, 2 * w);
        let id = self.gadget_id();

        // shift without carry
        let mut ac = Self::letter(id, "ac");
        ac.set(p[0], [p[1]]);
        for i in 1..w {
            ac.set(p[w + i], [p[w + i + 1]]);
        }
        self.rotate(&mut ac, v);

        // carry: bit m is 1, becomes 0, and shifting continues
        let mut aa = Self::letter(id, "aa");
        for i in 1..w {
            aa.set(p[i], [p[i + 1]]);
        }
        for i in 1..w {
            aa.set(self.pos(v, i), [self.pos(v, Self::prev(i, w))]);
            aa.set(self.neg(v, i), [self.neg(v, Self::prev(i, w))]);
        }
        aa.set(self.pos(v, w), [self.neg(v, Self::prev(w, w))]);
        aa.set(self.neg(v, w), [Q_ACC]);

        // absorb the carry: bit m is 0 and becomes 1
        let mut ap = Self::letter(id, "ap");
        for i in 1..=w {
            ap.set(p[i], [p[w + i]]);
        }
        ap.set(self.pos(v, w), [Q_ACC]);
        ap.set(self.neg(v, w), [self.pos(v, w)]);

        out.extend([ac, aa, ap]);
    }

    fn wait(&mut self, d: u64, start: StateId, target: StateId, out: &mut Vec<Letter>) {
        let p = self.chain(start, target, d as usize);
        let id = self.gadget_id();
        let mut l = Self::letter(id, "a");
        for i in 0..d as usize {
            l.set(p[i], [p[i + 1]]);
        }
        out.push(l);
    }

    fn parallel(
        &mut self,
        body: &[Stmt],
        timer: &[Stmt],
        start: StateId,
        target: StateId,
        depth: usize,
        out: &mut Vec<Letter>,
    ) -> Result<()> {
        check_parallel_body(body)?;
        let t1 = self.alloc();
        let t2 = self.alloc();
        let mut first = Vec::new();
        self.block(body, start, t1, depth + 1, &mut first)?;
        let mut second = Vec::new();
        self.block(timer, start, t2, depth + 1, &mut second)?;
        let id = self.gadget_id();

        for a in &first {
            for b in &second {
                let mut l = Letter::new(format!("g{id}.b[{},{}]", a.name, b.name));
                l.map = a.map.clone();
                for (q, img) in &b.map {
                    l.map.entry(*q).or_default().extend(img.iter().copied());
                }
                // the shared start belongs to both gadgets; a gadget not listing it sends it to q_acc
                if a.map.contains_key(&start) != b.map.contains_key(&start) {
                    l.map.entry(start).or_default().push(Q_ACC);
                }
                for img in l.map.values_mut() {
                    img.sort_unstable();
                    img.dedup();
                }
                out.push(l);
            }
        }
        for b in &second {
            let mut l = Letter::new(format!("g{id}.w[{}]", b.name));
            l.map = b.map.clone();
            l.set(t1, [t1]);
            if let Some(img) = l.map.get_mut(&start) {
                img.push(Q_ACC);
            }
            out.push(l);
        }
        let mut tau = Letter::new(format!("g{id}.t"));
        tau.set(t1, [target]);
        tau.set(t2, [target]);
        out.push(tau);
        Ok(())
    }
}

/// Compiles a macro-free program. The initial configuration of the automaton activates only
/// the start state, so every variable starts out empty.
pub fn compile(program: &Program) -> Result<CompiledNfa> {
    program.validate()?;
    let mut c = Compiler::new(program);
    let first_control = c.state_count;
    let start = c.alloc();
    let ends_in_loop = matches!(program.body.last(), Some(Stmt::WhileTrue(_)));
    let mut target = if program.body.is_empty() || ends_in_loop {
        start
    } else {
        c.alloc()
    };
    let mut letters = Vec::new();
    let mut cur = start;
    for (i, s) in program.body.iter().enumerate() {
        let next = match (i + 1 == program.body.len(), ends_in_loop) {
            (true, true) => cur,
            (true, false) => target,
            (false, _) => c.alloc(),
        };
        c.stmt(s, cur, next, 0, &mut letters)?;
        cur = next;
    }
    if ends_in_loop {
        target = cur;
    }

    let n = c.state_count;
    let alphabet: Vec<String> = letters.iter().map(|l| l.name.clone()).collect();
    let mut transitions = Vec::new();
    for (a, l) in letters.iter().enumerate() {
        for q in 0..n {
            if q == Q_ACC {
                transitions.push((q, a, Q_ACC));
            } else if let Some(img) = l.map.get(&q) {
                transitions.extend(img.iter().map(|&p| (q, a, p)));
            } else if q < first_control {
                transitions.push((q, a, q));
            } else {
                transitions.push((q, a, Q_ACC));
            }
        }
    }
    let mut finals = vec![Q_ACC];
    finals.extend(c.finals.iter().map(|(q, _)| *q));
    let automaton = Automaton::from_parts(Kind::Nfa, alphabet, n, &[start], &finals, transitions)?;
    Ok(CompiledNfa {
        automaton,
        q_acc: Q_ACC,
        start,
        target,
        variables: c.vars,
        statements: c.spans,
        finals: c.finals,
        first_control,
        program: program.clone(),
    })
}

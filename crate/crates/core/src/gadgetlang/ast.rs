use std::fmt::Write as _;

use crate::error::{Error, Result};

pub type VarId = usize;

/// Largest supported variable width; values are held in `u64`.
pub const MAX_WIDTH: u32 = 63;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Role {
    /// Declared by the program text or shared with an enclosing program.
    External,
    /// Introduced by a macro expansion or a builder; initialized before every use.
    Internal,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VarDecl {
    pub name: String,
    pub width: u32,
    pub role: Role,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Cond {
    Eq(VarId, VarId),
    Neq(VarId, VarId),
    Prime(VarId),
    NotPrime(VarId),
    /// An expanded condition: `holds` has a complete computation exactly when the
    /// condition is true, `fails` exactly when it is false.
    Gadget { holds: Vec<Stmt>, fails: Vec<Stmt> },
}

impl Cond {
    pub fn negate(&self) -> Cond {
        match self {
            Cond::Eq(a, b) => Cond::Neq(*a, *b),
            Cond::Neq(a, b) => Cond::Eq(*a, *b),
            Cond::Prime(v) => Cond::NotPrime(*v),
            Cond::NotPrime(v) => Cond::Prime(*v),
            Cond::Gadget { holds, fails } => Cond::Gadget {
                holds: fails.clone(),
                fails: holds.clone(),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Stmt {
    Select(VarId),
    AssignConst(VarId, u64),
    AssignVar { dst: VarId, src: VarId },
    Inc(VarId),
    Eq(VarId, VarId),
    Neq(VarId, VarId),
    Wait(u64),
    Delay(u64),
    Seq(Vec<Stmt>),
    Choose(Vec<Vec<Stmt>>),
    If { cond: Cond, then: Vec<Stmt>, els: Option<Vec<Stmt>> },
    While { cond: Cond, body: Vec<Stmt> },
    WhileTrue(Vec<Stmt>),
    Parallel { body: Vec<Stmt>, delay: Option<u64> },
    /// A parallel block after expansion: `timer` is the expanded `delay` of length `T(delay)`.
    ParallelCore { body: Vec<Stmt>, timer: Vec<Stmt>, delay: u64 },
    Final(Box<Stmt>),
    Add { w: VarId, u: VarId, v: VarId },
    Mul { w: VarId, u: VarId, v: VarId },
    Prime(VarId),
    NotPrime(VarId),
    NthPrime { p: VarId, u: VarId },
}

impl Stmt {
    pub fn is_macro(&self) -> bool {
        matches!(
            self,
            Stmt::Delay(_)
                | Stmt::Add { .. }
                | Stmt::Mul { .. }
                | Stmt::Prime(_)
                | Stmt::NotPrime(_)
                | Stmt::NthPrime { .. }
        )
    }

    /// True when the statement starts by returning to its own start state.
    pub fn begins_with_loop(&self) -> bool {
        match self {
            Stmt::While { .. } | Stmt::WhileTrue(_) => true,
            Stmt::Seq(body) => body.first().is_some_and(Stmt::begins_with_loop),
            Stmt::Final(inner) => inner.begins_with_loop(),
            _ => false,
        }
    }

    pub fn contains_while_true(&self) -> bool {
        let any = |v: &[Stmt]| v.iter().any(Stmt::contains_while_true);
        match self {
            Stmt::WhileTrue(_) => true,
            Stmt::Seq(b)
            | Stmt::While { body: b, .. }
            | Stmt::Parallel { body: b, .. }
            | Stmt::ParallelCore { body: b, .. } => any(b),
            Stmt::Choose(branches) => branches.iter().any(|b| any(b)),
            Stmt::If { then, els, .. } => any(then) || els.as_deref().is_some_and(any),
            Stmt::Final(inner) => inner.contains_while_true(),
            _ => false,
        }
    }

    /// Variables mentioned anywhere in the statement.
    pub fn collect_vars(&self, out: &mut Vec<VarId>) {
        let mut push = |v: VarId| {
            if !out.contains(&v) {
                out.push(v)
            }
        };
        match self {
            Stmt::Select(v) | Stmt::AssignConst(v, _) | Stmt::Inc(v) | Stmt::Prime(v) | Stmt::NotPrime(v) => {
                push(*v)
            }
            Stmt::AssignVar { dst, src } => {
                push(*dst);
                push(*src);
            }
            Stmt::Eq(a, b) | Stmt::Neq(a, b) | Stmt::NthPrime { p: a, u: b } => {
                push(*a);
                push(*b);
            }
            Stmt::Add { w, u, v } | Stmt::Mul { w, u, v } => {
                push(*w);
                push(*u);
                push(*v);
            }
            Stmt::Wait(_) | Stmt::Delay(_) => {}
            Stmt::Seq(b) | Stmt::WhileTrue(b) | Stmt::Parallel { body: b, .. } => {
                b.iter().for_each(|s| s.collect_vars(out))
            }
            Stmt::ParallelCore { body, timer, .. } => {
                body.iter().chain(timer).for_each(|s| s.collect_vars(out))
            }
            Stmt::Choose(branches) => branches.iter().flatten().for_each(|s| s.collect_vars(out)),
            Stmt::If { cond, then, els } => {
                cond.collect_vars(out);
                then.iter().chain(els.iter().flatten()).for_each(|s| s.collect_vars(out));
            }
            Stmt::While { cond, body } => {
                cond.collect_vars(out);
                body.iter().for_each(|s| s.collect_vars(out));
            }
            Stmt::Final(inner) => inner.collect_vars(out),
        }
    }
}

impl Cond {
    fn collect_vars(&self, out: &mut Vec<VarId>) {
        match self {
            Cond::Eq(a, b) | Cond::Neq(a, b) => {
                for v in [*a, *b] {
                    if !out.contains(&v) {
                        out.push(v);
                    }
                }
            }
            Cond::Prime(v) | Cond::NotPrime(v) => {
                if !out.contains(v) {
                    out.push(*v);
                }
            }
            Cond::Gadget { holds, fails } => holds.iter().chain(fails).for_each(|s| s.collect_vars(out)),
        }
    }
}

/// A gadget program: declarations, a statement list, and the global width `m`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Program {
    pub width: u32,
    pub vars: Vec<VarDecl>,
    pub body: Vec<Stmt>,
}

impl Program {
    pub fn new(width: u32) -> Result<Program> {
        if width == 0 || width > MAX_WIDTH {
            return Err(Error::input(format!("width must be in 1..={MAX_WIDTH}, got {width}")));
        }
        Ok(Program {
            width,
            vars: Vec::new(),
            body: Vec::new(),
        })
    }

    pub fn var(&self, name: &str) -> Option<VarId> {
        self.vars.iter().position(|v| v.name == name)
    }

    pub fn declare(&mut self, name: &str, width: u32, role: Role) -> Result<VarId> {
        if self.var(name).is_some() {
            return Err(Error::input(format!("variable `{name}` declared twice")));
        }
        if width == 0 || width > MAX_WIDTH {
            return Err(Error::input(format!("variable `{name}` has unsupported width {width}")));
        }
        self.vars.push(VarDecl {
            name: name.to_string(),
            width,
            role,
        });
        Ok(self.vars.len() - 1)
    }

    /// Declares an external variable of the program width.
    pub fn external(&mut self, name: &str) -> Result<VarId> {
        self.declare(name, self.width, Role::External)
    }

    /// Declares an internal variable of the program width.
    pub fn internal(&mut self, name: &str) -> Result<VarId> {
        self.declare(name, self.width, Role::Internal)
    }

    pub fn name(&self, v: VarId) -> &str {
        &self.vars[v].name
    }

    pub fn max_value(&self, v: VarId) -> u64 {
        (1u64 << self.vars[v].width) - 1
    }

    /// Checks the structural rules that do not depend on parsing.
    pub fn validate(&self) -> Result<()> {
        for (i, s) in self.body.iter().enumerate() {
            let last = i + 1 == self.body.len();
            let top_level_loop = last && matches!(s, Stmt::WhileTrue(_));
            if let Stmt::WhileTrue(body) = s {
                if !top_level_loop {
                    return Err(Error::input("`while true` is allowed only as the last top-level statement"));
                }
                for b in body {
                    self.validate_stmt(b)?;
                }
            } else {
                self.validate_stmt(s)?;
            }
        }
        Ok(())
    }

    fn validate_stmt(&self, s: &Stmt) -> Result<()> {
        let distinct = |a: VarId, b: VarId, what: &str| {
            if a == b {
                Err(Error::input(format!("{what} needs two distinct variables, got `{}` twice", self.name(a))))
            } else {
                Ok(())
            }
        };
        match s {
            Stmt::AssignConst(v, c) => {
                if *c > self.max_value(*v) {
                    return Err(Error::input(format!(
                        "constant {c} does not fit variable `{}` of width {}",
                        self.name(*v),
                        self.vars[*v].width
                    )));
                }
            }
            Stmt::AssignVar { dst, src } => {
                distinct(*dst, *src, "assignment")?;
                if self.vars[*dst].width != self.vars[*src].width {
                    return Err(Error::input("assignment between variables of different widths"));
                }
            }
            Stmt::Eq(a, b) => distinct(*a, *b, "eq")?,
            Stmt::Neq(a, b) => distinct(*a, *b, "neq")?,
            Stmt::Wait(0) => return Err(Error::input("wait needs a positive duration")),
            Stmt::Delay(0) => return Err(Error::input("delay needs a positive duration")),
            Stmt::Add { w, u, v } | Stmt::Mul { w, u, v } => {
                if w == u || w == v {
                    return Err(Error::input(format!(
                        "the result variable `{}` must differ from both operands",
                        self.name(*w)
                    )));
                }
            }
            Stmt::NthPrime { p, u } => distinct(*p, *u, "nthprime")?,
            Stmt::WhileTrue(_) => {
                return Err(Error::input("`while true` is allowed only as the last top-level statement"))
            }
            Stmt::Parallel { delay: Some(0), .. } => {
                return Err(Error::input("parallel delay must be positive"))
            }
            _ => {}
        }
        match s {
            Stmt::Seq(b) | Stmt::While { body: b, .. } => self.validate_all(b)?,
            Stmt::Parallel { body, .. } | Stmt::ParallelCore { body, .. } => {
                if body.is_empty() {
                    return Err(Error::input("parallel needs a non-empty body"));
                }
                self.validate_all(body)?;
            }
            Stmt::Choose(branches) => {
                if branches.len() < 2 {
                    return Err(Error::input("choose needs at least two branches"));
                }
                for b in branches {
                    self.validate_all(b)?;
                }
            }
            Stmt::If { then, els, .. } => {
                self.validate_all(then)?;
                if let Some(e) = els {
                    self.validate_all(e)?;
                }
            }
            Stmt::Final(inner) => self.validate_stmt(inner)?,
            _ => {}
        }
        match s {
            Stmt::If { cond, .. } | Stmt::While { cond, .. } => match cond {
                Cond::Eq(a, b) | Cond::Neq(a, b) => distinct(*a, *b, "condition")?,
                Cond::Gadget { holds, fails } => {
                    self.validate_all(holds)?;
                    self.validate_all(fails)?;
                }
                _ => {}
            },
            _ => {}
        }
        Ok(())
    }

    fn validate_all(&self, body: &[Stmt]) -> Result<()> {
        body.iter().try_for_each(|s| self.validate_stmt(s))
    }

    /// One-line summary of a statement (block bodies elided).
    pub fn label(&self, s: &Stmt) -> String {
        let n = |v: &VarId| self.name(*v).to_string();
        match s {
            Stmt::Select(v) => format!("select {}", n(v)),
            Stmt::AssignConst(v, c) => format!("{} <- {c}", n(v)),
            Stmt::AssignVar { dst, src } => format!("{} <- {}", n(dst), n(src)),
            Stmt::Inc(v) => format!("inc {}", n(v)),
            Stmt::Eq(a, b) => format!("eq {} {}", n(a), n(b)),
            Stmt::Neq(a, b) => format!("neq {} {}", n(a), n(b)),
            Stmt::Wait(d) => format!("wait {d}"),
            Stmt::Delay(d) => format!("delay {d}"),
            Stmt::Seq(_) => "sequence".into(),
            Stmt::Choose(b) => format!("choose ({} branches)", b.len()),
            Stmt::If { cond, .. } => format!("if {}", self.cond_text(cond)),
            Stmt::While { cond, .. } => format!("while {}", self.cond_text(cond)),
            Stmt::WhileTrue(_) => "while true".into(),
            Stmt::Parallel { delay: Some(d), .. } => format!("parallel delay {d}"),
            Stmt::Parallel { delay: None, .. } => "parallel".into(),
            Stmt::ParallelCore { delay, .. } => format!("parallel delay {delay}"),
            Stmt::Final(inner) => format!("final {}", self.label(inner)),
            Stmt::Add { w, u, v } => format!("add {} {} {}", n(w), n(u), n(v)),
            Stmt::Mul { w, u, v } => format!("mul {} {} {}", n(w), n(u), n(v)),
            Stmt::Prime(v) => format!("prime {}", n(v)),
            Stmt::NotPrime(v) => format!("notprime {}", n(v)),
            Stmt::NthPrime { p, u } => format!("nthprime {} {}", n(p), n(u)),
        }
    }

    fn cond_text(&self, c: &Cond) -> String {
        match c {
            Cond::Eq(a, b) => format!("eq {} {}", self.name(*a), self.name(*b)),
            Cond::Neq(a, b) => format!("neq {} {}", self.name(*a), self.name(*b)),
            Cond::Prime(v) => format!("prime {}", self.name(*v)),
            Cond::NotPrime(v) => format!("notprime {}", self.name(*v)),
            Cond::Gadget { .. } => "<expanded condition>".into(),
        }
    }

    /// Renders the program in the surface syntax accepted by [`super::parse_program`].
    ///
    /// Programs containing expanded conditions or variables of a non-default width have no
    /// surface form; those parts are rendered as comments.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        if !self.vars.is_empty() {
            let names: Vec<&str> = self.vars.iter().map(|v| v.name.as_str()).collect();
            let _ = writeln!(out, "var {};", names.join(", "));
        }
        for s in &self.body {
            self.write_stmt(&mut out, s, 0);
        }
        out
    }

    fn write_block(&self, out: &mut String, body: &[Stmt], indent: usize) {
        out.push_str("{\n");
        for s in body {
            self.write_stmt(out, s, indent + 1);
        }
        out.push_str(&"  ".repeat(indent));
        out.push('}');
    }

    fn write_stmt(&self, out: &mut String, s: &Stmt, indent: usize) {
        let pad = "  ".repeat(indent);
        out.push_str(&pad);
        self.write_inline(out, s, indent);
        out.push('\n');
    }

    fn write_inline(&self, out: &mut String, s: &Stmt, indent: usize) {
        match s {
            Stmt::Seq(body) => {
                // a bare sequence has no keyword; splice it in place
                for (i, b) in body.iter().enumerate() {
                    if i > 0 {
                        out.push('\n');
                        out.push_str(&"  ".repeat(indent));
                    }
                    self.write_inline(out, b, indent);
                }
            }
            Stmt::Choose(branches) => {
                out.push_str("choose ");
                for (i, b) in branches.iter().enumerate() {
                    if i > 0 {
                        out.push_str(" or ");
                    }
                    self.write_block(out, b, indent);
                }
            }
            Stmt::If { cond, then, els } => {
                let _ = write!(out, "if {} ", self.cond_text(cond));
                self.write_block(out, then, indent);
                if let Some(e) = els {
                    out.push_str(" else ");
                    self.write_block(out, e, indent);
                }
            }
            Stmt::While { cond, body } => {
                let _ = write!(out, "while {} ", self.cond_text(cond));
                self.write_block(out, body, indent);
            }
            Stmt::WhileTrue(body) => {
                out.push_str("while true ");
                self.write_block(out, body, indent);
            }
            Stmt::Parallel { body, delay } => {
                out.push_str("parallel ");
                self.write_block(out, body, indent);
                if let Some(d) = delay {
                    let _ = write!(out, " delay {d}");
                }
                out.push(';');
            }
            Stmt::ParallelCore { body, delay, .. } => {
                out.push_str("parallel ");
                self.write_block(out, body, indent);
                let _ = write!(out, " delay {delay};");
            }
            Stmt::Final(inner) => {
                out.push_str("final ");
                self.write_inline(out, inner, indent);
            }
            other => {
                out.push_str(&self.label(other));
                out.push(';');
            }
        }
    }
}

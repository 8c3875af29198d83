//! Surface syntax of gadget programs.
//!
//! ```text
//! program := decls stmt*
//! decls   := ("var" NAME ("," NAME)* ";")*
//! stmt    := "select" V ";" | V "<-" NAT ";" | V "<-" V ";" | "inc" V ";"
//!          | "eq" V V ";" | "neq" V V ";" | "wait" NAT ";" | "delay" NAT ";"
//!          | "final" stmt | "choose" block ("or" block)+
//!          | "if" cond block ("else" block)? | "while" cond block | "while" "true" block
//!          | "parallel" block ("delay" NAT)? ";"?
//!          | "add" V V V ";" | "mul" V V V ";" | "prime" V ";" | "notprime" V ";"
//!          | "nthprime" V V ";"
//! cond    := "eq" V V | "neq" V V | "prime" V | "notprime" V
//! block   := "{" stmt* "}"
//! ```
//!
//! `#` starts a comment running to the end of the line.

use super::ast::{Cond, Program, Role, Stmt, VarId};
use crate::error::{Error, Result};

const KEYWORDS: &[&str] = &[
    "var", "select", "inc", "eq", "neq", "wait", "delay", "final", "choose", "or", "if", "else",
    "while", "true", "parallel", "add", "mul", "prime", "notprime", "nthprime",
];

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Name(String),
    Nat(u64),
    Arrow,
    Semi,
    Comma,
    LBrace,
    RBrace,
    Eof,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

fn is_name_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '\'' || c == '.'
}

fn lex(text: &str) -> Result<Vec<Token>> {
    let mut out = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let (mut i, mut line, mut col) = (0, 1, 1);
    while i < chars.len() {
        let c = chars[i];
        let (tl, tc) = (line, col);
        let mut advance = |i: &mut usize, n: usize| {
            for _ in 0..n {
                if chars[*i] == '\n' {
                    line += 1;
                    col = 1;
                } else {
                    col += 1;
                }
                *i += 1;
            }
        };
        if c.is_whitespace() {
            advance(&mut i, 1);
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                advance(&mut i, 1);
            }
            continue;
        }
        let tok = match c {
            ';' => Tok::Semi,
            ',' => Tok::Comma,
            '{' => Tok::LBrace,
            '}' => Tok::RBrace,
            '<' if chars.get(i + 1) == Some(&'-') => {
                advance(&mut i, 2);
                out.push(Token { tok: Tok::Arrow, line: tl, col: tc });
                continue;
            }
            d if d.is_ascii_digit() => {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    advance(&mut i, 1);
                }
                let s: String = chars[start..i].iter().collect();
                let n = s.parse::<u64>().map_err(|_| {
                    Error::parse(format!("line {tl} column {tc}"), format!("number `{s}` is too large"))
                })?;
                out.push(Token { tok: Tok::Nat(n), line: tl, col: tc });
                continue;
            }
            a if a.is_ascii_alphabetic() || a == '_' => {
                let start = i;
                while i < chars.len() && is_name_char(chars[i]) {
                    advance(&mut i, 1);
                }
                let s: String = chars[start..i].iter().collect();
                out.push(Token { tok: Tok::Name(s), line: tl, col: tc });
                continue;
            }
            other => {
                return Err(Error::parse(
                    format!("line {tl} column {tc}"),
                    format!("unexpected character `{other}`"),
                ))
            }
        };
        advance(&mut i, 1);
        out.push(Token { tok, line: tl, col: tc });
    }
    out.push(Token { tok: Tok::Eof, line, col });
    Ok(out)
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    program: Program,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek2(&self) -> &Tok {
        &self.toks[(self.pos + 1).min(self.toks.len() - 1)].tok
    }

    fn here(&self) -> String {
        let t = &self.toks[self.pos];
        format!("line {} column {}", t.line, t.col)
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::parse(self.here(), msg))
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Name(n) if n == kw)
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<()> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else {
            self.err(format!("expected {what}, found {:?}", self.peek()))
        }
    }

    fn nat(&mut self) -> Result<u64> {
        match self.peek().clone() {
            Tok::Nat(n) => {
                self.bump();
                Ok(n)
            }
            other => self.err(format!("expected a number, found {other:?}")),
        }
    }

    fn var(&mut self) -> Result<VarId> {
        match self.peek().clone() {
            Tok::Name(n) if !KEYWORDS.contains(&n.as_str()) => match self.program.var(&n) {
                Some(v) => {
                    self.bump();
                    Ok(v)
                }
                None => self.err(format!("undeclared variable `{n}`")),
            },
            other => self.err(format!("expected a variable, found {other:?}")),
        }
    }

    fn decls(&mut self) -> Result<()> {
        while self.is_kw("var") {
            self.bump();
            loop {
                let at = self.here();
                match self.bump() {
                    Tok::Name(n) if !KEYWORDS.contains(&n.as_str()) => {
                        self.program
                            .declare(&n, self.program.width, Role::External)
                            .map_err(|e| Error::parse(at.clone(), e.to_string()))?;
                    }
                    other => return Err(Error::parse(at, format!("expected a variable name, found {other:?}"))),
                }
                if *self.peek() == Tok::Comma {
                    self.bump();
                } else {
                    break;
                }
            }
            self.expect(Tok::Semi, "`;`")?;
        }
        Ok(())
    }

    fn block(&mut self) -> Result<Vec<Stmt>> {
        self.expect(Tok::LBrace, "`{`")?;
        let mut out = Vec::new();
        while *self.peek() != Tok::RBrace {
            if *self.peek() == Tok::Eof {
                return self.err("unclosed block");
            }
            out.push(self.stmt()?);
        }
        self.bump();
        Ok(out)
    }

    fn cond(&mut self) -> Result<Cond> {
        let Tok::Name(kw) = self.peek().clone() else {
            return self.err("expected a condition");
        };
        self.bump();
        Ok(match kw.as_str() {
            "eq" => Cond::Eq(self.var()?, self.var()?),
            "neq" => Cond::Neq(self.var()?, self.var()?),
            "prime" => Cond::Prime(self.var()?),
            "notprime" => Cond::NotPrime(self.var()?),
            _ => return self.err(format!("`{kw}` is not a condition")),
        })
    }

    fn semi(&mut self, s: Stmt) -> Result<Stmt> {
        self.expect(Tok::Semi, "`;`")?;
        Ok(s)
    }

    fn stmt(&mut self) -> Result<Stmt> {
        let at = self.here();
        let Tok::Name(head) = self.peek().clone() else {
            return self.err(format!("expected a statement, found {:?}", self.peek()));
        };
        if !KEYWORDS.contains(&head.as_str()) {
            let dst = self.var()?;
            self.expect(Tok::Arrow, "`<-`")?;
            let s = match self.peek().clone() {
                Tok::Nat(c) => {
                    self.bump();
                    Stmt::AssignConst(dst, c)
                }
                _ => Stmt::AssignVar { dst, src: self.var()? },
            };
            let s = self.semi(s)?;
            return self.checked(s, &at);
        }
        self.bump();
        let s = match head.as_str() {
            "select" => {
                let v = self.var()?;
                self.semi(Stmt::Select(v))?
            }
            "inc" => {
                let v = self.var()?;
                self.semi(Stmt::Inc(v))?
            }
            "eq" => {
                let (a, b) = (self.var()?, self.var()?);
                self.semi(Stmt::Eq(a, b))?
            }
            "neq" => {
                let (a, b) = (self.var()?, self.var()?);
                self.semi(Stmt::Neq(a, b))?
            }
            "wait" => {
                let d = self.nat()?;
                self.semi(Stmt::Wait(d))?
            }
            "delay" => {
                let d = self.nat()?;
                self.semi(Stmt::Delay(d))?
            }
            "final" => Stmt::Final(Box::new(self.stmt()?)),
            "choose" => {
                let mut branches = vec![self.block()?];
                while self.is_kw("or") {
                    self.bump();
                    branches.push(self.block()?);
                }
                if branches.len() < 2 {
                    return Err(Error::parse(at, "choose needs at least one `or` branch"));
                }
                Stmt::Choose(branches)
            }
            "if" => {
                let cond = self.cond()?;
                let then = self.block()?;
                let els = if self.is_kw("else") {
                    self.bump();
                    Some(self.block()?)
                } else {
                    None
                };
                Stmt::If { cond, then, els }
            }
            "while" => {
                if self.is_kw("true") {
                    self.bump();
                    Stmt::WhileTrue(self.block()?)
                } else {
                    let cond = self.cond()?;
                    Stmt::While { cond, body: self.block()? }
                }
            }
            "parallel" => {
                let body = self.block()?;
                let delay = if self.is_kw("delay") && matches!(self.peek2(), Tok::Nat(_)) {
                    self.bump();
                    Some(self.nat()?)
                } else {
                    None
                };
                if *self.peek() == Tok::Semi {
                    self.bump();
                }
                Stmt::Parallel { body, delay }
            }
            "add" | "mul" => {
                let (w, u, v) = (self.var()?, self.var()?, self.var()?);
                let s = if head == "add" { Stmt::Add { w, u, v } } else { Stmt::Mul { w, u, v } };
                self.semi(s)?
            }
            "prime" => {
                let v = self.var()?;
                self.semi(Stmt::Prime(v))?
            }
            "notprime" => {
                let v = self.var()?;
                self.semi(Stmt::NotPrime(v))?
            }
            "nthprime" => {
                let (p, u) = (self.var()?, self.var()?);
                self.semi(Stmt::NthPrime { p, u })?
            }
            other => return Err(Error::parse(at, format!("`{other}` cannot start a statement"))),
        };
        self.checked(s, &at)
    }

    /// Applies the local well-formedness rules, attributing failures to `at`.
    fn checked(&self, s: Stmt, at: &str) -> Result<Stmt> {
        let wt = matches!(s, Stmt::WhileTrue(_));
        let probe = if wt { Stmt::Seq(vec![]) } else { s.clone() };
        let mut shallow = self.program.clone();
        shallow.body = vec![probe];
        shallow.validate().map_err(|e| match e {
            Error::Input(m) => Error::parse(at.to_string(), m),
            other => other,
        })?;
        Ok(s)
    }
}

/// Parses program text at width `width`, resolving variables and checking constants.
pub fn parse_program(text: &str, width: u32) -> Result<Program> {
    let program = Program::new(width)?;
    let mut p = Parser {
        toks: lex(text)?,
        pos: 0,
        program,
    };
    p.decls()?;
    let mut body = Vec::new();
    let mut positions = Vec::new();
    while *p.peek() != Tok::Eof {
        positions.push(p.here());
        body.push(p.stmt()?);
    }
    for (i, s) in body.iter().enumerate() {
        if i + 1 != body.len() && matches!(s, Stmt::WhileTrue(_)) {
            return Err(Error::parse(
                positions[i].clone(),
                "`while true` is allowed only as the last top-level statement",
            ));
        }
    }
    p.program.body = body;
    p.program.validate().map_err(|e| match e {
        Error::Input(m) => Error::parse("program", m),
        other => other,
    })?;
    Ok(p.program)
}

//! S-expression syntax: `(exists (X1 .. Xk) M BODY)`.

use std::fmt::Write as _;

use super::{Atom, Formula, Node};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Open,
    Close,
    Word(String),
}

fn tokenize(text: &str) -> Result<Vec<(Tok, usize, usize)>> {
    let mut out = Vec::new();
    let mut chars = text.chars().peekable();
    let (mut line, mut col) = (1usize, 1usize);
    while let Some(&ch) = chars.peek() {
        let (l, c) = (line, col);
        let mut bump = |ch: char| {
            if ch == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
        };
        match ch {
            ';' => {
                while let Some(&ch) = chars.peek() {
                    if ch == '\n' {
                        break;
                    }
                    bump(ch);
                    chars.next();
                }
            }
            '(' | ')' => {
                bump(ch);
                chars.next();
                out.push((if ch == '(' { Tok::Open } else { Tok::Close }, l, c));
            }
            ch if ch.is_whitespace() => {
                bump(ch);
                chars.next();
            }
            _ => {
                let mut w = String::new();
                while let Some(&ch) = chars.peek() {
                    if ch.is_whitespace() || ch == '(' || ch == ')' || ch == ';' {
                        break;
                    }
                    bump(ch);
                    w.push(ch);
                    chars.next();
                }
                out.push((Tok::Word(w), l, c));
            }
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize, usize)>,
    pos: usize,
    vars: Vec<String>,
    end: (usize, usize),
}

impl Parser {
    fn here(&self) -> String {
        match self.toks.get(self.pos) {
            Some((_, l, c)) => format!("{l}:{c}"),
            None => format!("{}:{}", self.end.0, self.end.1),
        }
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::parse(self.here(), msg))
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<()> {
        match self.toks.get(self.pos) {
            Some((t, _, _)) if *t == want => {
                self.pos += 1;
                Ok(())
            }
            _ => self.err(format!("expected {what}")),
        }
    }

    fn word(&mut self, what: &str) -> Result<String> {
        match self.toks.get(self.pos) {
            Some((Tok::Word(w), _, _)) => {
                let w = w.clone();
                self.pos += 1;
                Ok(w)
            }
            _ => self.err(format!("expected {what}")),
        }
    }

    fn number(&mut self, what: &str) -> Result<u64> {
        let at = self.pos;
        let w = self.word(what)?;
        w.parse().or_else(|_| {
            self.pos = at;
            self.err(format!("expected {what}, found `{w}`"))
        })
    }

    fn var(&mut self) -> Result<usize> {
        let at = self.pos;
        let w = self.word("a variable")?;
        match self.vars.iter().position(|v| *v == w) {
            Some(i) => Ok(i),
            None => {
                self.pos = at;
                self.err(format!("variable `{w}` is not quantified"))
            }
        }
    }

    fn formula(&mut self) -> Result<Formula> {
        self.expect(Tok::Open, "`(`")?;
        let kw = self.word("`exists`")?;
        if kw != "exists" {
            self.pos -= 1;
            return self.err("expected `exists`");
        }
        self.expect(Tok::Open, "a variable list")?;
        loop {
            match self.toks.get(self.pos) {
                Some((Tok::Close, _, _)) => {
                    self.pos += 1;
                    break;
                }
                Some((Tok::Word(w), _, _)) => {
                    if w.parse::<u64>().is_ok() {
                        return self.err("variable names may not be numbers");
                    }
                    if self.vars.contains(w) {
                        return self.err(format!("variable `{w}` quantified twice"));
                    }
                    self.vars.push(w.clone());
                    self.pos += 1;
                }
                _ => return self.err("expected a variable name or `)`"),
            }
        }
        let at = self.here();
        let width = self.number("the width")?;
        if width == 0 || width > crate::gadgetlang::MAX_WIDTH as u64 {
            return Err(Error::parse(at, format!("width {width} out of range")));
        }
        let body = self.node(width as u32)?;
        self.expect(Tok::Close, "`)`")?;
        if self.pos < self.toks.len() {
            return self.err("trailing input");
        }
        Formula::new(std::mem::take(&mut self.vars), width as u32, body)
    }

    fn node(&mut self, width: u32) -> Result<Node> {
        self.expect(Tok::Open, "`(`")?;
        let at = self.pos;
        let head = self.word("a connective or atom")?;
        let node = match head.as_str() {
            "and" | "or" => {
                let mut ch = Vec::new();
                while let Some((Tok::Open, _, _)) = self.toks.get(self.pos) {
                    ch.push(self.node(width)?);
                }
                if ch.is_empty() {
                    return self.err(format!("`{head}` needs at least one operand"));
                }
                if head == "and" {
                    Node::And(ch)
                } else {
                    Node::Or(ch)
                }
            }
            "=" => {
                let x = self.var()?;
                let here = self.here();
                let c = self.number("a constant")?;
                if width < 64 && c >> width != 0 {
                    return Err(Error::parse(here, format!("constant {c} exceeds 2^{width} − 1")));
                }
                Node::Atom(Atom::EqConst(x, c))
            }
            "sum" => Node::Atom(Atom::SumEq(self.var()?, self.var()?, self.var()?)),
            "prod" => Node::Atom(Atom::ProdEq(self.var()?, self.var()?, self.var()?)),
            "prime" => Node::Atom(Atom::IsPrime(self.var()?)),
            "nthprime" => Node::Atom(Atom::NthPrime(self.var()?, self.var()?)),
            "divides" => Node::Atom(Atom::Divides(self.var()?)),
            "notdivides" => Node::Atom(Atom::NotDivides(self.var()?)),
            _ => {
                self.pos = at;
                return self.err(format!("unknown form `{head}`"));
            }
        };
        self.expect(Tok::Close, "`)`")?;
        Ok(node)
    }
}

pub fn parse_formula(text: &str) -> Result<Formula> {
    let toks = tokenize(text)?;
    let lines = text.split('\n').count();
    let last = text.rsplit('\n').next().unwrap_or("").chars().count() + 1;
    let mut p = Parser {
        toks,
        pos: 0,
        vars: Vec::new(),
        end: (lines, last),
    };
    p.formula()
}

/// Canonical single-line text; `parse_formula(store_formula(f)) == f`.
pub fn store_formula(f: &Formula) -> String {
    let mut s = String::from("(exists (");
    s.push_str(&f.vars.join(" "));
    let _ = write!(s, ") {} ", f.width);
    write_node(&mut s, &f.body, &f.vars);
    s.push(')');
    s
}

fn write_node(s: &mut String, n: &Node, vars: &[String]) {
    let v = |i: usize| vars[i].as_str();
    match n {
        Node::And(ch) | Node::Or(ch) => {
            s.push_str(if matches!(n, Node::And(_)) { "(and" } else { "(or" });
            for c in ch {
                s.push(' ');
                write_node(s, c, vars);
            }
            s.push(')');
        }
        Node::Atom(a) => {
            let _ = match *a {
                Atom::EqConst(x, c) => write!(s, "(= {} {c})", v(x)),
                Atom::SumEq(h, i, j) => write!(s, "(sum {} {} {})", v(h), v(i), v(j)),
                Atom::ProdEq(h, i, j) => write!(s, "(prod {} {} {})", v(h), v(i), v(j)),
                Atom::IsPrime(x) => write!(s, "(prime {})", v(x)),
                Atom::NthPrime(p, n) => write!(s, "(nthprime {} {})", v(p), v(n)),
                Atom::Divides(x) => write!(s, "(divides {})", v(x)),
                Atom::NotDivides(x) => write!(s, "(notdivides {})", v(x)),
            };
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let text = "(exists (X Y P) 5 (or (and (= X 3) (divides X)) (and (sum Y X X) (nthprime P Y) (notdivides P)) (and (prod Y X X) (prime Y))))";
        let f = parse_formula(text).unwrap();
        assert_eq!(store_formula(&f), text);
        assert_eq!(parse_formula(&store_formula(&f)).unwrap(), f);
    }

    #[test]
    fn comments_and_layout() {
        let f = parse_formula("; leading\n(exists (X)\n  2 ; width\n  (= X 1))\n").unwrap();
        assert_eq!(f.width, 2);
        assert_eq!(f.body, Node::Atom(Atom::EqConst(0, 1)));
    }

    #[test]
    fn errors_carry_positions() {
        let cases = [
            ("(exists (X) 2 (= Y 1))", "1:18"),
            ("(exists (X) 2 (= X 4))", "1:20"),
            ("(exists (X) 2 (frob X))", "1:16"),
            ("(exists (X X) 2 (= X 1))", "1:12"),
            ("(exists (X) 2 (and))", "1:19"),
            ("(exists (X) 2\n(= X 1)", "2:8"),
            ("(exists (X) 0 (= X 0))", "1:13"),
        ];
        for (text, loc) in cases {
            match parse_formula(text) {
                Err(Error::Parse { location, .. }) => assert_eq!(location, loc, "{text}"),
                other => panic!("{text}: {other:?}"),
            }
        }
    }
}

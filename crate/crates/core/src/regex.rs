//! Regular expressions over single characters, converted to ε-free NFAs.
//!
//! Syntax: literals, `|`, juxtaposition, postfix `*`, `+`, `?`, and parentheses. A backslash
//! makes the next character literal. An empty operand such as `(a|)` denotes the empty word.
//! The position automaton has one state per literal plus a start state.

use std::collections::BTreeSet;

use crate::automata::{Automaton, Kind};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Regex {
    Empty,
    Char(char),
    Concat(Box<Regex>, Box<Regex>),
    Alt(Box<Regex>, Box<Regex>),
    Star(Box<Regex>),
    Plus(Box<Regex>),
    Optional(Box<Regex>),
}

struct Parser {
    chars: Vec<char>,
    pos: usize,
}

impl Parser {
    fn err<T>(&self, msg: &str) -> Result<T> {
        Err(Error::parse(format!("column {}", self.pos + 1), msg))
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn alt(&mut self) -> Result<Regex> {
        let mut r = self.concat()?;
        while self.peek() == Some('|') {
            self.pos += 1;
            let rhs = self.concat()?;
            r = Regex::Alt(Box::new(r), Box::new(rhs));
        }
        Ok(r)
    }

    fn concat(&mut self) -> Result<Regex> {
        let mut r: Option<Regex> = None;
        while let Some(c) = self.peek() {
            if c == '|' || c == ')' {
                break;
            }
            let item = self.postfix()?;
            r = Some(match r {
                None => item,
                Some(l) => Regex::Concat(Box::new(l), Box::new(item)),
            });
        }
        Ok(r.unwrap_or(Regex::Empty))
    }

    fn postfix(&mut self) -> Result<Regex> {
        let mut r = self.atom()?;
        while let Some(c) = self.peek() {
            r = match c {
                '*' => Regex::Star(Box::new(r)),
                '+' => Regex::Plus(Box::new(r)),
                '?' => Regex::Optional(Box::new(r)),
                _ => break,
            };
            self.pos += 1;
        }
        Ok(r)
    }

    fn atom(&mut self) -> Result<Regex> {
        let c = self.peek().expect("caller checked");
        self.pos += 1;
        match c {
            '(' => {
                let r = self.alt()?;
                if self.peek() != Some(')') {
                    return self.err("expected `)`");
                }
                self.pos += 1;
                Ok(r)
            }
            '*' | '+' | '?' => {
                self.pos -= 1;
                self.err("operator without operand")
            }
            '\\' => match self.peek() {
                Some(e) => {
                    self.pos += 1;
                    Ok(Regex::Char(e))
                }
                None => self.err("dangling escape"),
            },
            c => Ok(Regex::Char(c)),
        }
    }
}

pub fn parse_regex(text: &str) -> Result<Regex> {
    let mut p = Parser {
        chars: text.chars().collect(),
        pos: 0,
    };
    let r = p.alt()?;
    if p.pos < p.chars.len() {
        return p.err("unmatched `)`");
    }
    Ok(r)
}

/// Glushkov sets of a subexpression; positions are numbered from 1.
struct Info {
    nullable: bool,
    first: BTreeSet<usize>,
    last: BTreeSet<usize>,
}

struct Positions {
    symbols: Vec<char>,
    follow: Vec<BTreeSet<usize>>,
}

impl Positions {
    fn visit(&mut self, r: &Regex) -> Info {
        match r {
            Regex::Empty => Info {
                nullable: true,
                first: BTreeSet::new(),
                last: BTreeSet::new(),
            },
            Regex::Char(c) => {
                self.symbols.push(*c);
                self.follow.push(BTreeSet::new());
                let p = self.symbols.len();
                Info {
                    nullable: false,
                    first: [p].into(),
                    last: [p].into(),
                }
            }
            Regex::Concat(a, b) => {
                let a = self.visit(a);
                let b = self.visit(b);
                for &p in &a.last {
                    self.follow[p - 1].extend(&b.first);
                }
                Info {
                    nullable: a.nullable && b.nullable,
                    first: if a.nullable { &a.first | &b.first } else { a.first },
                    last: if b.nullable { &a.last | &b.last } else { b.last },
                }
            }
            Regex::Alt(a, b) => {
                let a = self.visit(a);
                let b = self.visit(b);
                Info {
                    nullable: a.nullable || b.nullable,
                    first: &a.first | &b.first,
                    last: &a.last | &b.last,
                }
            }
            Regex::Star(a) | Regex::Plus(a) => {
                let i = self.visit(a);
                for &p in &i.last {
                    self.follow[p - 1].extend(&i.first);
                }
                Info {
                    nullable: i.nullable || matches!(r, Regex::Star(_)),
                    ..i
                }
            }
            Regex::Optional(a) => Info {
                nullable: true,
                ..self.visit(a)
            },
        }
    }
}

/// NFA for the expression over the characters it mentions plus `extra`.
pub fn regex_to_nfa_over(text: &str, extra: &[String]) -> Result<Automaton> {
    let r = parse_regex(text)?;
    let mut pos = Positions {
        symbols: Vec::new(),
        follow: Vec::new(),
    };
    let info = pos.visit(&r);
    let mut alphabet: BTreeSet<String> = pos.symbols.iter().map(|c| c.to_string()).collect();
    alphabet.extend(extra.iter().cloned());
    let alphabet: Vec<String> = alphabet.into_iter().collect();
    let index = |c: char| alphabet.iter().position(|s| *s == c.to_string()).unwrap();

    let mut b = Automaton::builder(Kind::Nfa, alphabet.clone());
    b.add_states(pos.symbols.len() + 1);
    b.initial(0);
    if info.nullable {
        b.accepting(0);
    }
    for &p in &info.last {
        b.accepting(p);
    }
    for &p in &info.first {
        b.transition(0, index(pos.symbols[p - 1]), p);
    }
    for (i, f) in pos.follow.iter().enumerate() {
        for &q in f {
            b.transition(i + 1, index(pos.symbols[q - 1]), q);
        }
    }
    b.build()
}

/// NFA for the expression over exactly the characters it mentions.
pub fn regex_to_nfa(text: &str) -> Result<Automaton> {
    regex_to_nfa_over(text, &[])
}

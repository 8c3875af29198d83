//! Finite automata over a named alphabet.
//!
//! States are dense indices `0..n`. Symbols are strings kept in an ordered list, and every
//! internal table is indexed by symbol position so iteration order (and therefore every
//! serialized output) is reproducible.

use std::collections::{HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::bitset::BitSet;
use crate::error::{Error, Result};

pub type StateId = usize;

/// A configuration: the set of simultaneously active states.
pub type StateSet = BitSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Kind {
    Dfa,
    Nfa,
}

impl Kind {
    pub fn as_str(self) -> &'static str {
        match self {
            Kind::Dfa => "dfa",
            Kind::Nfa => "nfa",
        }
    }
}

/// An NFA or DFA. Immutable once built.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Automaton {
    kind: Kind,
    alphabet: Vec<String>,
    symbol_index: HashMap<String, usize>,
    initials: Vec<StateId>,
    finals: BitSet,
    // delta[state][symbol] = sorted successor list
    delta: Vec<Vec<Vec<StateId>>>,
}

/// Incremental construction with validation deferred to [`AutomatonBuilder::build`].
#[derive(Debug, Clone)]
pub struct AutomatonBuilder {
    kind: Kind,
    alphabet: Vec<String>,
    state_count: usize,
    initials: Vec<StateId>,
    finals: Vec<StateId>,
    transitions: Vec<(StateId, usize, StateId)>,
}

impl AutomatonBuilder {
    pub fn add_state(&mut self) -> StateId {
        self.state_count += 1;
        self.state_count - 1
    }

    pub fn add_states(&mut self, n: usize) -> std::ops::Range<StateId> {
        let start = self.state_count;
        self.state_count += n;
        start..self.state_count
    }

    pub fn state_count(&self) -> usize {
        self.state_count
    }

    pub fn initial(&mut self, q: StateId) -> &mut Self {
        self.initials.push(q);
        self
    }

    pub fn accepting(&mut self, q: StateId) -> &mut Self {
        self.finals.push(q);
        self
    }

    /// `symbol` is an index into the alphabet.
    pub fn transition(&mut self, from: StateId, symbol: usize, to: StateId) -> &mut Self {
        self.transitions.push((from, symbol, to));
        self
    }

    pub fn build(&self) -> Result<Automaton> {
        Automaton::from_parts(
            self.kind,
            self.alphabet.clone(),
            self.state_count,
            &self.initials,
            &self.finals,
            self.transitions.iter().copied(),
        )
    }
}

impl Automaton {
    pub fn builder(kind: Kind, alphabet: Vec<String>) -> AutomatonBuilder {
        AutomatonBuilder {
            kind,
            alphabet,
            state_count: 0,
            initials: Vec::new(),
            finals: Vec::new(),
            transitions: Vec::new(),
        }
    }

    /// Validates and assembles an automaton. Transition symbols are alphabet indices.
    pub fn from_parts(
        kind: Kind,
        alphabet: Vec<String>,
        state_count: usize,
        initials: &[StateId],
        finals: &[StateId],
        transitions: impl IntoIterator<Item = (StateId, usize, StateId)>,
    ) -> Result<Automaton> {
        let mut symbol_index = HashMap::with_capacity(alphabet.len());
        for (i, sym) in alphabet.iter().enumerate() {
            if symbol_index.insert(sym.clone(), i).is_some() {
                return Err(Error::parse(
                    format!("alphabet[{i}]"),
                    format!("duplicate symbol `{sym}`"),
                ));
            }
        }
        let check_state = |q: StateId, location: &str| {
            if q >= state_count {
                Err(Error::parse(
                    location.to_string(),
                    format!("state index {q} is not below the state count {state_count}"),
                ))
            } else {
                Ok(())
            }
        };
        let mut init: Vec<StateId> = initials.to_vec();
        for (i, &q) in init.iter().enumerate() {
            check_state(q, &format!("initials[{i}]"))?;
        }
        init.sort_unstable();
        init.dedup();
        let mut fin = BitSet::new(state_count);
        for (i, &q) in finals.iter().enumerate() {
            check_state(q, &format!("finals[{i}]"))?;
            fin.insert(q);
        }
        let mut delta = vec![vec![Vec::new(); alphabet.len()]; state_count];
        for (i, (from, sym, to)) in transitions.into_iter().enumerate() {
            check_state(from, &format!("transitions[{i}]"))?;
            check_state(to, &format!("transitions[{i}]"))?;
            if sym >= alphabet.len() {
                return Err(Error::parse(
                    format!("transitions[{i}]"),
                    format!("symbol index {sym} outside the alphabet"),
                ));
            }
            delta[from][sym].push(to);
        }
        for row in &mut delta {
            for succ in row.iter_mut() {
                succ.sort_unstable();
                succ.dedup();
            }
        }
        if kind == Kind::Dfa {
            if init.len() != 1 {
                return Err(Error::parse(
                    "initials",
                    format!("a DFA needs exactly one initial state, found {}", init.len()),
                ));
            }
            for (q, row) in delta.iter().enumerate() {
                for (a, succ) in row.iter().enumerate() {
                    if succ.len() > 1 {
                        return Err(Error::parse(
                            "transitions",
                            format!(
                                "DFA has {} successors for state {q} on `{}`",
                                succ.len(),
                                alphabet[a]
                            ),
                        ));
                    }
                }
            }
        }
        Ok(Automaton {
            kind,
            alphabet,
            symbol_index,
            initials: init,
            finals: fin,
            delta,
        })
    }

    pub fn kind(&self) -> Kind {
        self.kind
    }

    pub fn alphabet(&self) -> &[String] {
        &self.alphabet
    }

    pub fn state_count(&self) -> usize {
        self.delta.len()
    }

    pub fn initials(&self) -> &[StateId] {
        &self.initials
    }

    pub fn finals(&self) -> &StateSet {
        &self.finals
    }

    pub fn is_final(&self, q: StateId) -> bool {
        self.finals.contains(q)
    }

    pub fn symbol(&self, name: &str) -> Result<usize> {
        self.symbol_index
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownSymbol(name.to_string()))
    }

    /// Successors of a single state on a symbol index.
    pub fn successors(&self, q: StateId, symbol: usize) -> &[StateId] {
        &self.delta[q][symbol]
    }

    pub fn transitions(&self) -> impl Iterator<Item = (StateId, usize, StateId)> + '_ {
        self.delta.iter().enumerate().flat_map(|(q, row)| {
            row.iter()
                .enumerate()
                .flat_map(move |(a, succ)| succ.iter().map(move |&p| (q, a, p)))
        })
    }

    pub fn transition_count(&self) -> usize {
        self.delta.iter().flatten().map(Vec::len).sum()
    }

    pub fn empty_set(&self) -> StateSet {
        BitSet::new(self.state_count())
    }

    pub fn initial_set(&self) -> StateSet {
        BitSet::from_indices(self.state_count(), self.initials.iter().copied())
    }

    pub fn step_set(&self, set: &StateSet, symbol: &str) -> Result<StateSet> {
        Ok(self.step_index(set, self.symbol(symbol)?))
    }

    /// Image of `set` under the symbol with the given index.
    pub fn step_index(&self, set: &StateSet, symbol: usize) -> StateSet {
        let mut out = self.empty_set();
        for q in set.iter() {
            for &p in &self.delta[q][symbol] {
                out.insert(p);
            }
        }
        out
    }

    pub fn accepts<S: AsRef<str>>(&self, word: &[S]) -> Result<bool> {
        let indices = word
            .iter()
            .map(|s| self.symbol(s.as_ref()))
            .collect::<Result<Vec<_>>>()?;
        Ok(self.accepts_indices(&indices))
    }

    pub fn accepts_indices(&self, word: &[usize]) -> bool {
        let mut set = self.initial_set();
        for &a in word {
            set = self.step_index(&set, a);
        }
        set.intersects(&self.finals)
    }

    pub fn is_complete(&self) -> bool {
        self.delta.iter().flatten().all(|succ| succ.len() == 1)
    }

    /// Completes a DFA by routing every missing transition into one fresh non-final sink.
    pub fn complete(&self) -> Result<Automaton> {
        if self.kind != Kind::Dfa {
            return Err(Error::input("only a DFA can be completed"));
        }
        if self.is_complete() {
            return Ok(self.clone());
        }
        let sink = self.state_count();
        let mut delta = self.delta.clone();
        delta.push(vec![Vec::new(); self.alphabet.len()]);
        for row in &mut delta {
            for succ in row.iter_mut() {
                if succ.is_empty() {
                    succ.push(sink);
                }
            }
        }
        let mut finals = BitSet::new(sink + 1);
        for q in self.finals.iter() {
            finals.insert(q);
        }
        Ok(Automaton {
            kind: Kind::Dfa,
            alphabet: self.alphabet.clone(),
            symbol_index: self.symbol_index.clone(),
            initials: self.initials.clone(),
            finals,
            delta,
        })
    }

    /// Subset construction restricted to reachable subsets.
    ///
    /// The result is a complete DFA whose state `i` stands for `subsets[i]`; state 0 is the
    /// initial subset. The empty subset, when reachable, is an ordinary non-final sink.
    pub fn determinize(&self, cap: usize) -> Result<Determinization> {
        if cap == 0 {
            return Err(Error::input("determinization cap must be at least 1"));
        }
        let k = self.alphabet.len();
        let mut index: HashMap<StateSet, usize> = HashMap::new();
        let mut subsets = Vec::new();
        let mut queue = VecDeque::new();
        let start = self.initial_set();
        index.insert(start.clone(), 0);
        subsets.push(start);
        queue.push_back(0usize);
        let mut transitions = Vec::new();
        while let Some(i) = queue.pop_front() {
            for a in 0..k {
                let next = self.step_index(&subsets[i], a);
                let j = match index.get(&next) {
                    Some(&j) => j,
                    None => {
                        if subsets.len() >= cap {
                            return Err(Error::resource("determinization subset count", cap as u64));
                        }
                        let j = subsets.len();
                        index.insert(next.clone(), j);
                        subsets.push(next);
                        queue.push_back(j);
                        j
                    }
                };
                transitions.push((i, a, j));
            }
        }
        let finals: Vec<StateId> = subsets
            .iter()
            .enumerate()
            .filter(|(_, s)| s.intersects(&self.finals))
            .map(|(i, _)| i)
            .collect();
        let dfa = Automaton::from_parts(
            Kind::Dfa,
            self.alphabet.clone(),
            subsets.len(),
            &[0],
            &finals,
            transitions,
        )?;
        Ok(Determinization { dfa, subsets })
    }

    /// A complete DFA for the same language: completion for DFAs, subset construction otherwise.
    pub fn to_complete_dfa(&self, cap: usize) -> Result<Automaton> {
        match self.kind {
            Kind::Dfa => self.complete(),
            Kind::Nfa => Ok(self.determinize(cap)?.dfa),
        }
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string(&self.to_document()).expect("automaton serializes");
        text.push('\n');
        text
    }

    pub fn to_document(&self) -> AutomatonDocument {
        AutomatonDocument {
            kind: self.kind.as_str().to_string(),
            alphabet: self.alphabet.clone(),
            states: self.state_count(),
            initials: self.initials.clone(),
            finals: self.finals.iter().collect(),
            transitions: self
                .transitions()
                .map(|(q, a, p)| (q, self.alphabet[a].clone(), p))
                .collect(),
        }
    }

    /// Parses the JSON interchange format. Unknown top-level keys are ignored so documents
    /// carrying extra metadata (compiler output, generator constants) still load.
    pub fn from_json(text: &str) -> Result<Automaton> {
        let doc: AutomatonDocument = serde_json::from_str(text).map_err(|e| {
            Error::parse(format!("line {} column {}", e.line(), e.column()), e.to_string())
        })?;
        Automaton::from_document(&doc)
    }

    pub fn from_document(doc: &AutomatonDocument) -> Result<Automaton> {
        let kind = match doc.kind.as_str() {
            "dfa" => Kind::Dfa,
            "nfa" => Kind::Nfa,
            other => {
                return Err(Error::parse("kind", format!("expected \"dfa\" or \"nfa\", found {other:?}")))
            }
        };
        let mut lookup = HashMap::new();
        for (i, sym) in doc.alphabet.iter().enumerate() {
            if lookup.insert(sym.as_str(), i).is_some() {
                return Err(Error::parse(format!("alphabet[{i}]"), format!("duplicate symbol `{sym}`")));
            }
        }
        let mut transitions = Vec::with_capacity(doc.transitions.len());
        for (i, (from, sym, to)) in doc.transitions.iter().enumerate() {
            let a = *lookup.get(sym.as_str()).ok_or_else(|| {
                Error::parse(format!("transitions[{i}]"), format!("symbol `{sym}` is not in the alphabet"))
            })?;
            transitions.push((*from, a, *to));
        }
        Automaton::from_parts(
            kind,
            doc.alphabet.clone(),
            doc.states,
            &doc.initials,
            &doc.finals,
            transitions,
        )
    }
}

/// Serialized form: `{ "kind", "alphabet", "states", "initials", "finals", "transitions" }`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AutomatonDocument {
    pub kind: String,
    pub alphabet: Vec<String>,
    pub states: usize,
    pub initials: Vec<StateId>,
    pub finals: Vec<StateId>,
    pub transitions: Vec<(StateId, String, StateId)>,
}

#[derive(Debug, Clone)]
pub struct Determinization {
    pub dfa: Automaton,
    /// `subsets[i]` is the set of original states represented by DFA state `i`.
    pub subsets: Vec<StateSet>,
}

/// Convenience for alphabets written as `a1, a2, ...`.
pub fn numbered_alphabet(prefix: &str, n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("{prefix}{i}")).collect()
}

//! Deterministic symbolic automata over the rationals whose guards are
//! interval partitions, with execution, products, emptiness and a
//! simulated teacher.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt::Write as _;
use std::rc::Rc;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::pwf::{simplest_rational_in, Interval, Piece, Piecewise};
use crate::rational::Rational;
use crate::sb::depth;
use crate::teacher::{Counted, EqAnswer, EquivalenceOracle, MembershipOracle};

/// A finite sequence of finite rationals.
pub type Word = Vec<Rational>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SfaError {
    #[error("automaton has no states")]
    NoStates,
    #[error("duplicate state name {0:?}")]
    DuplicateState(String),
    #[error("unknown state {0:?}")]
    UnknownState(String),
    #[error("state {0:?} has no guards")]
    MissingGuards(String),
    #[error("state index {0} out of range")]
    StateOutOfRange(usize),
    #[error("expected {expected} guard partitions, got {got}")]
    GuardCount { expected: usize, got: usize },
}

/// How a product combines acceptance of its two components.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Combine {
    /// Exactly one component accepts.
    Difference,
    Intersection,
    Union,
}

impl Combine {
    fn apply(self, a: bool, b: bool) -> bool {
        match self {
            Combine::Difference => a != b,
            Combine::Intersection => a && b,
            Combine::Union => a || b,
        }
    }
}

/// A deterministic, total automaton: every state's outgoing guards form an
/// interval partition of Q labelled by successor indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymbolicAutomaton {
    names: Vec<String>,
    initial: usize,
    finals: Vec<bool>,
    guards: Vec<Piecewise<usize>>,
}

impl SymbolicAutomaton {
    pub fn new(names: Vec<String>, initial: usize, finals: Vec<bool>, guards: Vec<Piecewise<usize>>) -> Result<Self, SfaError> {
        let n = names.len();
        if n == 0 {
            return Err(SfaError::NoStates);
        }
        let mut seen = std::collections::HashSet::new();
        for name in &names {
            if !seen.insert(name.as_str()) {
                return Err(SfaError::DuplicateState(name.clone()));
            }
        }
        if initial >= n {
            return Err(SfaError::StateOutOfRange(initial));
        }
        for got in [finals.len(), guards.len()] {
            if got != n {
                return Err(SfaError::GuardCount { expected: n, got });
            }
        }
        for g in &guards {
            if let Some(p) = g.pieces().iter().find(|p| p.label >= n) {
                return Err(SfaError::StateOutOfRange(p.label));
            }
        }
        Ok(SymbolicAutomaton {
            names,
            initial,
            finals,
            guards,
        })
    }

    /// Default names `s0`, `s1`, ...
    pub fn with_default_names(initial: usize, finals: Vec<bool>, guards: Vec<Piecewise<usize>>) -> Result<Self, SfaError> {
        let names = (0..guards.len()).map(|i| format!("s{i}")).collect();
        Self::new(names, initial, finals, guards)
    }

    /// One state looping on everything, accepting or not.
    pub fn constant(accept: bool) -> Self {
        Self::with_default_names(0, vec![accept], vec![Piecewise::constant(0)]).expect("one valid state")
    }

    pub fn reject_all() -> Self {
        Self::constant(false)
    }

    pub fn accept_all() -> Self {
        Self::constant(true)
    }

    pub fn num_states(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn is_final(&self, s: usize) -> bool {
        self.finals[s]
    }

    pub fn guard(&self, s: usize) -> &Piecewise<usize> {
        &self.guards[s]
    }

    pub fn step(&self, s: usize, q: &Rational) -> usize {
        *self.guards[s].evaluate(q)
    }

    /// Size: states plus the sizes of all guard partitions.
    pub fn size(&self) -> u64 {
        self.num_states() as u64 + self.guards.iter().map(Piecewise::size).sum::<u64>()
    }

    /// State reached after reading `w`.
    pub fn state_after(&self, w: &[Rational]) -> usize {
        w.iter().fold(self.initial, |s, q| self.step(s, q))
    }

    /// Whether `w` is accepted, and the visited states starting with the
    /// initial one.
    pub fn run(&self, w: &[Rational]) -> (bool, Vec<usize>) {
        let mut trace = Vec::with_capacity(w.len() + 1);
        let mut s = self.initial;
        trace.push(s);
        for q in w {
            s = self.step(s, q);
            trace.push(s);
        }
        (self.finals[s], trace)
    }

    pub fn accepts(&self, w: &[Rational]) -> bool {
        self.finals[self.state_after(w)]
    }

    /// The reachable part of the pair automaton, guards refined pairwise.
    pub fn product(&self, other: &SymbolicAutomaton, combine: Combine) -> SymbolicAutomaton {
        let mut index: HashMap<(usize, usize), usize> = HashMap::new();
        let mut pairs = vec![(self.initial, other.initial)];
        index.insert(pairs[0], 0);
        let mut guards = Vec::new();
        let mut i = 0;
        while i < pairs.len() {
            let (s, t) = pairs[i];
            let mut pieces = Vec::new();
            for cell in self.guards[s].refinement(&other.guards[t]) {
                let next = (*cell.left, *cell.right);
                let j = *index.entry(next).or_insert_with(|| {
                    pairs.push(next);
                    pairs.len() - 1
                });
                pieces.push(Piece {
                    interval: cell.interval,
                    label: j,
                });
            }
            guards.push(Piecewise::from_pieces_unchecked(pieces).canonicalize());
            i += 1;
        }
        let names = pairs
            .iter()
            .map(|&(s, t)| format!("({},{})", self.names[s], other.names[t]))
            .collect();
        let finals = pairs
            .iter()
            .map(|&(s, t)| combine.apply(self.finals[s], other.finals[t]))
            .collect();
        SymbolicAutomaton::new(names, 0, finals, guards).expect("pair states are distinct and in range")
    }

    /// A shortest accepted word, or `None` when the language is empty.
    /// Each letter is the simplest rational of a guard piece; among pieces
    /// leading to the same state the shallowest tree node wins.
    pub fn find_accepted_word(&self) -> Option<Word> {
        let n = self.num_states();
        let mut via: Vec<Option<(usize, Rational)>> = vec![None; n];
        let mut seen = vec![false; n];
        seen[self.initial] = true;
        let mut queue = VecDeque::from([self.initial]);
        while let Some(s) = queue.pop_front() {
            if self.finals[s] {
                let mut word = Vec::new();
                let mut cur = s;
                while let Some((prev, q)) = &via[cur] {
                    word.push(q.clone());
                    cur = *prev;
                }
                word.reverse();
                return Some(word);
            }
            let mut best: BTreeMap<usize, (num_bigint::BigUint, Rational)> = BTreeMap::new();
            for p in self.guards[s].pieces() {
                if seen[p.label] {
                    continue;
                }
                let q = simplest_rational_in(&p.interval);
                let d = depth(&q).expect("simplest rationals are finite");
                match best.get(&p.label) {
                    Some((bd, _)) if bd <= &d => {}
                    _ => {
                        best.insert(p.label, (d, q));
                    }
                }
            }
            for (t, (_, q)) in best {
                seen[t] = true;
                via[t] = Some((s, q));
                queue.push_back(t);
            }
        }
        None
    }

    pub fn is_empty(&self) -> bool {
        self.find_accepted_word().is_none()
    }

    /// Language equality through emptiness of the difference product.
    pub fn equivalent(&self, other: &SymbolicAutomaton) -> bool {
        self.product(other, Combine::Difference).is_empty()
    }

    /// Graphviz text; each edge carries its guard as a disjunction of
    /// inequality conjuncts.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph sfa {\n  rankdir=LR;\n  __start [shape=point];\n");
        for (i, name) in self.names.iter().enumerate() {
            let shape = if self.finals[i] { "doublecircle" } else { "circle" };
            writeln!(out, "  {} [shape={shape}];", dot_id(name)).unwrap();
        }
        writeln!(out, "  __start -> {};", dot_id(&self.names[self.initial])).unwrap();
        for (s, g) in self.guards.iter().enumerate() {
            let mut by_target: BTreeMap<usize, Vec<&Interval>> = BTreeMap::new();
            for p in g.pieces() {
                by_target.entry(p.label).or_default().push(&p.interval);
            }
            for (t, intervals) in by_target {
                writeln!(
                    out,
                    "  {} -> {} [label={}];",
                    dot_id(&self.names[s]),
                    dot_id(&self.names[t]),
                    dot_id(&guard_formula(&intervals))
                )
                .unwrap();
            }
        }
        out.push_str("}\n");
        out
    }
}

fn dot_id(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// An interval as an inequality over `x`, e.g. `13/2 < x <= 23/3`.
pub fn interval_formula(i: &Interval) -> String {
    let lo_fin = i.lo().is_finite();
    let hi_fin = i.hi().is_finite();
    if i.is_singleton() {
        return format!("x = {}", i.lo());
    }
    let lo_op = if i.lo_closed() { "<=" } else { "<" };
    let hi_op = if i.hi_closed() { "<=" } else { "<" };
    match (lo_fin, hi_fin) {
        (false, false) => "true".to_string(),
        (true, false) => format!("{} {lo_op} x", i.lo()),
        (false, true) => format!("x {hi_op} {}", i.hi()),
        (true, true) => format!("{} {lo_op} x {hi_op} {}", i.lo(), i.hi()),
    }
}

/// A disjunction of interval formulas.
pub fn guard_formula(intervals: &[&Interval]) -> String {
    intervals
        .iter()
        .map(|i| interval_formula(i))
        .collect::<Vec<_>>()
        .join(" | ")
}

/// One representative per cell of the common refinement of every guard of
/// the given automata: each finite endpoint, and the simplest rational of
/// each open gap between consecutive endpoints.
pub fn minterm_alphabet(automata: &[&SymbolicAutomaton]) -> Vec<Rational> {
    let mut points: Vec<Rational> = automata
        .iter()
        .flat_map(|a| a.guards.iter())
        .flat_map(|g| g.pieces().iter())
        .flat_map(|p| [p.interval.lo().clone(), p.interval.hi().clone()])
        .filter(Rational::is_finite)
        .collect();
    points.sort();
    points.dedup();
    let mut fences = vec![Rational::neg_infinity()];
    fences.extend(points.iter().cloned());
    fences.push(Rational::infinity());
    let mut out = points;
    for w in fences.windows(2) {
        let gap = Interval::open(w[0].clone(), w[1].clone()).expect("fences are strictly increasing");
        out.push(simplest_rational_in(&gap));
    }
    out.sort();
    out
}

#[derive(Serialize, Deserialize)]
struct SfaJson {
    states: Vec<String>,
    initial: String,
    finals: Vec<String>,
    guards: BTreeMap<String, Piecewise<String>>,
}

impl Serialize for SymbolicAutomaton {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let json = SfaJson {
            states: self.names.clone(),
            initial: self.names[self.initial].clone(),
            finals: (0..self.num_states())
                .filter(|&i| self.finals[i])
                .map(|i| self.names[i].clone())
                .collect(),
            guards: self
                .guards
                .iter()
                .enumerate()
                .map(|(i, g)| (self.names[i].clone(), g.map_labels(|&t| self.names[t].clone())))
                .collect(),
        };
        json.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for SymbolicAutomaton {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let raw = SfaJson::deserialize(deserializer)?;
        from_json(raw).map_err(D::Error::custom)
    }
}

fn from_json(mut raw: SfaJson) -> Result<SymbolicAutomaton, SfaError> {
    let index: HashMap<String, usize> = raw
        .states
        .iter()
        .enumerate()
        .map(|(i, s)| (s.clone(), i))
        .collect();
    if index.len() != raw.states.len() {
        let mut seen = std::collections::HashSet::new();
        let dup = raw.states.iter().find(|s| !seen.insert(*s)).expect("a duplicate exists");
        return Err(SfaError::DuplicateState(dup.clone()));
    }
    let lookup = |s: &String| index.get(s).copied().ok_or_else(|| SfaError::UnknownState(s.clone()));
    let initial = lookup(&raw.initial)?;
    let mut finals = vec![false; raw.states.len()];
    for f in &raw.finals {
        finals[lookup(f)?] = true;
    }
    if let Some(extra) = raw.guards.keys().find(|k| !index.contains_key(*k)) {
        return Err(SfaError::UnknownState(extra.clone()));
    }
    let mut guards = Vec::with_capacity(raw.states.len());
    for s in &raw.states {
        let g = raw.guards.remove(s).ok_or_else(|| SfaError::MissingGuards(s.clone()))?;
        let mut bad = None;
        let g = g.map_labels(|t| match index.get(t) {
            Some(&i) => i,
            None => {
                bad.get_or_insert_with(|| t.clone());
                0
            }
        });
        if let Some(t) = bad {
            return Err(SfaError::UnknownState(t));
        }
        guards.push(g);
    }
    SymbolicAutomaton::new(raw.states, initial, finals, guards)
}

/// Word-level membership half of the simulated automaton teacher.
#[derive(Debug, Clone)]
pub struct WordMembership {
    target: Rc<SymbolicAutomaton>,
}

impl MembershipOracle<[Rational], bool> for WordMembership {
    fn query(&mut self, w: &[Rational]) -> bool {
        self.target.accepts(w)
    }
}

/// Automaton-level equivalence half: a shortest word in the symmetric
/// difference.
#[derive(Debug, Clone)]
pub struct SfaEquivalence {
    target: Rc<SymbolicAutomaton>,
}

impl EquivalenceOracle<SymbolicAutomaton, Word> for SfaEquivalence {
    fn check(&mut self, hypothesis: &SymbolicAutomaton) -> EqAnswer<Word> {
        match self.target.product(hypothesis, Combine::Difference).find_accepted_word() {
            None => EqAnswer::Equal,
            Some(w) => EqAnswer::Counterexample(w),
        }
    }
}

pub type SfaTeacher = (Counted<WordMembership>, Counted<SfaEquivalence>);

/// Counting oracles for a hidden automaton.
pub fn make_sfa_teacher(target: &SymbolicAutomaton) -> SfaTeacher {
    let target = Rc::new(target.clone());
    (
        Counted::new(WordMembership { target: target.clone() }),
        Counted::new(SfaEquivalence { target }),
    )
}

/// The uppercase-then-lowercase pattern `[A-Z][a-z]` searched anywhere in
/// a text, made deterministic and total: `s1` means "just read an
/// uppercase letter", `s2` is the accepting sink.
pub fn letter_pair_automaton() -> SymbolicAutomaton {
    let upper = (Rational::from(65), Rational::from(90));
    let lower = (Rational::from(97), Rational::from(122));
    let range = |labels: Vec<usize>, cuts: &[(Rational, bool)]| {
        crate::pwf::from_cuts(labels, cuts).expect("increasing cut points")
    };
    let s0 = range(vec![0, 1, 0], &[(upper.0.clone(), false), (upper.1.clone(), true)]);
    let s1 = range(
        vec![0, 1, 0, 2, 0],
        &[
            (upper.0.clone(), false),
            (upper.1.clone(), true),
            (lower.0.clone(), false),
            (lower.1.clone(), true),
        ],
    );
    SymbolicAutomaton::with_default_names(0, vec![false, false, true], vec![s0, s1, Piecewise::constant(2)])
        .expect("three valid states")
}

/// A reading in `(13/2, 23/3]` followed later by a reading above 13, made
/// deterministic and total.
pub fn temperature_automaton() -> SymbolicAutomaton {
    let r = |s: &str| s.parse::<Rational>().expect("literal");
    let s0 = crate::pwf::from_cuts(vec![0, 1, 0], &[(r("13/2"), true), (r("23/3"), true)]).expect("increasing");
    let s1 = crate::pwf::from_cuts(vec![1, 2], &[(r("13"), true)]).expect("one cut");
    SymbolicAutomaton::with_default_names(0, vec![false, false, true], vec![s0, s1, Piecewise::constant(2)])
        .expect("three valid states")
}

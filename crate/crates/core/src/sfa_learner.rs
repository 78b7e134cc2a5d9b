//! Learning symbolic automata by lifting the piecewise-function learner
//! into an observation table.
//!
//! Rows of the table are indexed by access words, one per state, and
//! columns by distinguishing suffixes. The transition guard of each state
//! is learned by its own [`PiecewiseLearner`] whose labels are rows: the
//! label of `q` at state `u` is the row of `u q`. Guard learners get no
//! equivalence queries of their own; a counterexample to the whole
//! automaton is split by binary search over its prefixes into either a new
//! suffix or a new counterexample rational for one guard.

use std::collections::HashMap;

use serde::Serialize;
use thiserror::Error;

use crate::learner::{LearnError, PiecewiseLearner};
use crate::rational::Rational;
use crate::sfa::{SymbolicAutomaton, Word};
use crate::teacher::{Counted, EqAnswer, EquivalenceOracle, MembershipOracle};

/// Membership answers of one word under every suffix, in column order.
pub type Row = Vec<bool>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SfaLearnError {
    #[error("{0:?} is not a counterexample to the current hypothesis")]
    NotACounterexample(Word),
    #[error("guard of state {state}: {source}")]
    Guard { state: usize, source: LearnError },
}

/// Cached word membership answers and the suffix columns.
struct Cells<M> {
    mq: M,
    answers: HashMap<Word, bool>,
    suffixes: Vec<Word>,
    queries: u64,
}

impl<M: MembershipOracle<[Rational], bool>> Cells<M> {
    fn member(&mut self, w: &[Rational]) -> bool {
        if let Some(&b) = self.answers.get(w) {
            return b;
        }
        let b = self.mq.query(w);
        self.queries += 1;
        self.answers.insert(w.to_vec(), b);
        b
    }

    fn row(&mut self, prefix: &[Rational]) -> Row {
        let mut w = prefix.to_vec();
        let n = w.len();
        (0..self.suffixes.len())
            .map(|j| {
                w.truncate(n);
                w.extend(self.suffixes[j].iter().cloned());
                self.member(&w)
            })
            .collect()
    }
}

/// Rational-level oracle for one state's guard: the row reached by
/// appending `q` to the state's access word.
struct RowOracle<'a, M> {
    cells: &'a mut Cells<M>,
    access: &'a [Rational],
}

impl<M: MembershipOracle<[Rational], bool>> MembershipOracle<Rational, Row> for RowOracle<'_, M> {
    fn query(&mut self, q: &Rational) -> Row {
        let mut w = self.access.to_vec();
        w.push(q.clone());
        self.cells.row(&w)
    }
}

/// What one counterexample changed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CounterexampleOutcome {
    /// Position of the letter where the hypothesis first goes wrong.
    pub split: usize,
    /// State whose guard reads that letter.
    pub state: usize,
    pub letter: Rational,
    /// Word queries spent locating the split.
    pub split_queries: u64,
    /// The suffix added as a new column, if any.
    pub new_suffix: Option<Word>,
    /// Whether the letter was handed to the state's guard learner.
    pub evidence: bool,
}

/// The table of access words, suffixes and per-state guard learners.
pub struct ObservationTable<M> {
    cells: Cells<M>,
    access: Vec<Word>,
    rows: Vec<Row>,
    index: HashMap<Row, usize>,
    guards: Vec<PiecewiseLearner<Row>>,
}

impl<M: MembershipOracle<[Rational], bool>> ObservationTable<M> {
    /// Starts from the empty access word and the empty suffix, closed.
    pub fn new(mq: M) -> Result<Self, SfaLearnError> {
        let mut cells = Cells {
            mq,
            answers: HashMap::new(),
            suffixes: vec![Vec::new()],
            queries: 0,
        };
        let row = cells.row(&[]);
        let mut table = ObservationTable {
            cells,
            access: vec![Vec::new()],
            rows: vec![row.clone()],
            index: HashMap::from([(row, 0)]),
            guards: Vec::new(),
        };
        table.close();
        Ok(table)
    }

    pub fn word_queries(&self) -> u64 {
        self.cells.queries
    }

    pub fn access_words(&self) -> &[Word] {
        &self.access
    }

    pub fn suffixes(&self) -> &[Word] {
        &self.cells.suffixes
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    pub fn guard_learner(&self, state: usize) -> &PiecewiseLearner<Row> {
        &self.guards[state]
    }

    /// Rationals seen as one-step extensions of a state, with their rows.
    pub fn evidence(&self, state: usize) -> impl Iterator<Item = (&Rational, &Row)> {
        self.guards[state].store().iter()
    }

    /// Every evidence row is the row of some access word.
    pub fn is_closed(&self) -> bool {
        (0..self.guards.len()).all(|s| self.evidence(s).all(|(_, r)| self.index.contains_key(r)))
            && self.guards.len() == self.access.len()
    }

    /// Distinct access words have distinct rows.
    pub fn is_reduced(&self) -> bool {
        self.index.len() == self.rows.len()
    }

    /// Every access word minus its last letter is an access word.
    pub fn is_prefix_closed(&self) -> bool {
        self.access
            .iter()
            .all(|w| w.is_empty() || self.access.iter().any(|u| u[..] == w[..w.len() - 1]))
    }

    /// Every suffix minus its first letter is a suffix.
    pub fn is_suffix_closed(&self) -> bool {
        let e = &self.cells.suffixes;
        e.iter().all(|v| v.is_empty() || e.iter().any(|u| u[..] == v[1..]))
    }

    /// Starts a guard learner for every new state and promotes every
    /// evidence row that is not yet a state to a new access word.
    fn close(&mut self) {
        let mut s = 0;
        while s < self.access.len() {
            if s == self.guards.len() {
                let mut mq = RowOracle {
                    cells: &mut self.cells,
                    access: &self.access[s],
                };
                self.guards.push(PiecewiseLearner::new(&mut mq));
            }
            let fresh: Vec<(Rational, Row)> = self.guards[s]
                .store()
                .iter()
                .filter(|(_, r)| !self.index.contains_key(*r))
                .map(|(q, r)| (q.clone(), r.clone()))
                .collect();
            for (q, row) in fresh {
                if self.index.contains_key(&row) {
                    continue;
                }
                let mut w = self.access[s].clone();
                w.push(q);
                self.index.insert(row.clone(), self.access.len());
                self.access.push(w);
                self.rows.push(row);
            }
            s += 1;
        }
    }

    /// The automaton read off the table: state `i` is access word `i`,
    /// accepting when its row says so on the empty suffix.
    pub fn hypothesis(&self) -> SymbolicAutomaton {
        let guards = self
            .guards
            .iter()
            .map(|g| g.hypothesis().map_labels(|r| self.index[r]))
            .collect();
        let finals = self.rows.iter().map(|r| r[0]).collect();
        SymbolicAutomaton::with_default_names(0, finals, guards).expect("closed tables give valid automata")
    }

    /// Adds a column; every row and every stored guard label grows by one
    /// answer.
    fn add_suffix(&mut self, v: Word) {
        self.cells.suffixes.push(v);
        for i in 0..self.access.len() {
            self.rows[i] = self.cells.row(&self.access[i]);
        }
        self.index = self.rows.iter().cloned().zip(0..).collect();
        for (s, g) in self.guards.iter_mut().enumerate() {
            let mut mq = RowOracle {
                cells: &mut self.cells,
                access: &self.access[s],
            };
            g.relabel(&mut mq);
        }
    }

    /// Locates where `w` first goes wrong by binary search over split
    /// points: at split `i` the prefix read so far is replaced by the
    /// access word of the hypothesis state it reaches.
    pub fn process_counterexample(&mut self, w: &[Rational]) -> Result<CounterexampleOutcome, SfaLearnError> {
        let hyp = self.hypothesis();
        let before = self.cells.queries;
        let expected = self.cells.member(w);
        let (accepted, trace) = hyp.run(w);
        if accepted == expected {
            return Err(SfaLearnError::NotACounterexample(w.to_vec()));
        }
        let alpha = |cells: &mut Cells<M>, i: usize| {
            let mut u = self.access[trace[i]].clone();
            u.extend(w[i..].iter().cloned());
            cells.member(&u)
        };
        // alpha(0) is the true answer and alpha(|w|) the hypothesis answer
        let (mut lo, mut hi) = (0, w.len());
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if alpha(&mut self.cells, mid) == expected {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let split_queries = self.cells.queries - before;
        let (state, letter) = (trace[lo], w[lo].clone());
        let mut ext = self.access[state].clone();
        ext.push(letter.clone());
        let mut new_suffix = None;
        if self.cells.row(&ext) == self.rows[trace[lo + 1]] {
            let v = w[lo + 1..].to_vec();
            self.add_suffix(v.clone());
            new_suffix = Some(v);
        }
        let label = self.cells.row(&ext);
        let guard = &mut self.guards[state];
        let evidence = guard.hypothesis().evaluate(&letter) != &label;
        if evidence {
            let mut mq = RowOracle {
                cells: &mut self.cells,
                access: &self.access[state],
            };
            guard
                .refine_with_label(&letter, &label, &mut mq)
                .map_err(|source| SfaLearnError::Guard { state, source })?;
        }
        self.close();
        Ok(CounterexampleOutcome {
            split: lo,
            state,
            letter,
            split_queries,
            new_suffix,
            evidence,
        })
    }
}

/// Query counts of one state's guard learner.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GuardStats {
    pub state: String,
    pub access: Word,
    /// Rational-level queries, each answered by a row of word queries.
    pub mq_count: u64,
    pub break_links_found: u64,
    pub pieces: usize,
}

/// Outcome of an automaton learning session.
#[derive(Debug, Clone, Serialize)]
pub struct SfaLearnerReport {
    pub result: SymbolicAutomaton,
    pub word_mq_count: u64,
    pub sfa_eq_count: u64,
    pub suffixes: usize,
    pub longest_counterexample: usize,
    pub guards: Vec<GuardStats>,
    pub outcomes: Vec<CounterexampleOutcome>,
}

/// Learns a deterministic automaton from word membership queries and
/// automaton equivalence queries.
pub fn learn_sfa<M, E>(mq: &mut M, eq: &mut E) -> Result<SfaLearnerReport, SfaLearnError>
where
    M: MembershipOracle<[Rational], bool> + ?Sized,
    E: EquivalenceOracle<SymbolicAutomaton, Word> + ?Sized,
{
    let mut eq = Counted::new(eq);
    let mut table = ObservationTable::new(mq)?;
    let mut longest = 0;
    let mut outcomes = Vec::new();
    loop {
        debug_assert!(table.is_closed() && table.is_reduced() && table.is_prefix_closed());
        let hyp = table.hypothesis();
        match eq.check(&hyp) {
            EqAnswer::Equal => {
                let guards = (0..table.access.len())
                    .map(|s| {
                        let g = &table.guards[s];
                        GuardStats {
                            state: hyp.names()[s].clone(),
                            access: table.access[s].clone(),
                            mq_count: g.stats().mq_count,
                            break_links_found: g.stats().break_links_found,
                            pieces: hyp.guard(s).len(),
                        }
                    })
                    .collect();
                return Ok(SfaLearnerReport {
                    result: hyp,
                    word_mq_count: table.word_queries(),
                    sfa_eq_count: eq.count(),
                    suffixes: table.suffixes().len(),
                    longest_counterexample: longest,
                    guards,
                    outcomes,
                });
            }
            EqAnswer::Counterexample(w) => {
                longest = longest.max(w.len());
                outcomes.push(table.process_counterexample(&w)?);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sfa::{letter_pair_automaton, make_sfa_teacher, temperature_automaton};

    fn w(s: &str) -> Word {
        s.split_whitespace().map(|t| t.parse().unwrap()).collect()
    }

    fn learn(target: &SymbolicAutomaton) -> SfaLearnerReport {
        let (mut mq, mut eq) = make_sfa_teacher(target);
        let report = learn_sfa(&mut mq, &mut eq).unwrap();
        assert_eq!(report.word_mq_count, mq.count());
        report
    }

    #[test]
    fn learns_a_one_state_automaton_with_one_equivalence_query() {
        for accept in [false, true] {
            let report = learn(&SymbolicAutomaton::constant(accept));
            assert_eq!(report.result.num_states(), 1);
            assert_eq!(report.result.guard(0).len(), 1);
            assert_eq!(report.sfa_eq_count, 1);
            assert_eq!(report.result.is_final(0), accept);
        }
    }

    #[test]
    fn learns_the_temperature_pattern_exactly() {
        let target = temperature_automaton();
        let report = learn(&target);
        assert!(report.result.equivalent(&target));
        assert_eq!(report.result.num_states(), 3);
        let s0 = report.result.guard(0);
        let bounds: Vec<String> = s0.bounds().iter().map(|(q, _)| q.to_string()).collect();
        assert_eq!(bounds, ["13/2", "23/3"]);
        assert_eq!(s0.len(), 3);
        let s1 = s0.evaluate(&Rational::from(7));
        assert_eq!(report.result.guard(*s1).bounds()[0].0, Rational::from(13));
    }

    #[test]
    fn learns_the_letter_pair_pattern() {
        let target = letter_pair_automaton();
        let report = learn(&target);
        assert!(report.result.equivalent(&target));
        assert_eq!(report.result.num_states(), 3);
    }

    #[test]
    fn first_counterexample_of_the_temperature_pattern_goes_to_the_initial_guard() {
        let (mut mq, _) = make_sfa_teacher(&temperature_automaton());
        let mut table = ObservationTable::new(&mut mq).unwrap();
        assert_eq!(table.hypothesis().num_states(), 1);
        let out = table.process_counterexample(&w("7 14")).unwrap();
        assert_eq!(out.split, 0);
        assert_eq!(out.state, 0);
        assert_eq!(out.letter, Rational::from(7));
        assert_eq!(out.new_suffix, Some(w("14")));
        assert!(out.evidence);
        assert!(table.evidence(0).any(|(q, _)| q == &Rational::from(7)));
        assert_eq!(table.access_words().len(), 2);
    }

    #[test]
    fn single_letter_counterexample_splits_at_the_initial_state() {
        let target = SymbolicAutomaton::with_default_names(
            0,
            vec![false, true],
            vec![
                crate::pwf::from_cuts(vec![0, 1], &[(Rational::from(5), true)]).unwrap(),
                crate::pwf::Piecewise::constant(1),
            ],
        )
        .unwrap();
        let (mut mq, _) = make_sfa_teacher(&target);
        let mut table = ObservationTable::new(&mut mq).unwrap();
        let out = table.process_counterexample(&w("6")).unwrap();
        assert_eq!((out.split, out.state), (0, 0));
        assert!(out.evidence && out.new_suffix.is_none());
    }

    #[test]
    fn rejects_words_that_are_not_counterexamples() {
        let (mut mq, _) = make_sfa_teacher(&temperature_automaton());
        let mut table = ObservationTable::new(&mut mq).unwrap();
        assert!(matches!(
            table.process_counterexample(&w("1 2")),
            Err(SfaLearnError::NotACounterexample(_))
        ));
    }
}

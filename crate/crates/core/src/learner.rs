//! Learning a finite piecewise function from membership and equivalence
//! queries by collecting break links of the Stern-Brocot tree.
//!
//! The learner keeps a sorted array `D` of queried points. A hypothesis is
//! rebuilt from `D` on every round; a counterexample is located below its
//! closest ancestor in `D`, and the straight branch of that ancestor pointing
//! at the counterexample is searched (galloping, then bisection) for an edge
//! whose closed span sees two labels.

use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::pwf::{Interval, Piece, Piecewise};
use crate::rational::Rational;
use crate::sb::{node_of, Direction, SbNode};
use crate::teacher::{Counted, EqAnswer, EquivalenceOracle, MembershipOracle};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LearnError {
    #[error("invalid store: {0}")]
    InvalidStore(String),
    #[error("counterexample {0} is already a stored point")]
    CounterexampleInStore(Rational),
    #[error("teacher is inconsistent: {0}")]
    TeacherInconsistent(String),
    #[error("no new break link below {origin} towards {q_star}")]
    NoProgress { origin: Rational, q_star: Rational },
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Entry<L> {
    q: Rational,
    label: L,
    node: SbNode,
}

/// The array `D`: queried points with their labels, strictly increasing.
#[derive(Clone, PartialEq, Eq)]
pub struct BreakLinkStore<L> {
    entries: Vec<Entry<L>>,
}

impl<L: fmt::Debug> fmt::Debug for BreakLinkStore<L> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list()
            .entries(self.entries.iter().map(|e| (&e.q, &e.label)))
            .finish()
    }
}

impl<L> BreakLinkStore<L> {
    /// Builds a store from points that must be finite, sorted and distinct.
    pub fn from_entries(points: Vec<(Rational, L)>) -> Result<Self, LearnError> {
        if points.is_empty() {
            return Err(LearnError::InvalidStore("no entries".into()));
        }
        let mut entries = Vec::with_capacity(points.len());
        for (q, label) in points {
            let node = node_of(&q).map_err(|e| LearnError::InvalidStore(e.to_string()))?;
            if let Some(prev) = entries.last().map(|e: &Entry<L>| &e.q) {
                if prev >= &q {
                    return Err(LearnError::InvalidStore(format!("{prev} is not below {q}")));
                }
            }
            entries.push(Entry { q, label, node });
        }
        Ok(BreakLinkStore { entries })
    }

    pub fn single(q: Rational, label: L) -> Self {
        let node = node_of(&q).expect("store points are finite");
        BreakLinkStore {
            entries: vec![Entry { q, label, node }],
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn point(&self, i: usize) -> &Rational {
        &self.entries[i].q
    }

    pub fn label(&self, i: usize) -> &L {
        &self.entries[i].label
    }

    pub fn node(&self, i: usize) -> &SbNode {
        &self.entries[i].node
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Rational, &L)> {
        self.entries.iter().map(|e| (&e.q, &e.label))
    }

    pub fn position(&self, q: &Rational) -> Result<usize, usize> {
        self.entries.binary_search_by(|e| e.q.cmp(q))
    }

    pub fn contains(&self, q: &Rational) -> bool {
        self.position(q).is_ok()
    }

    /// Inserts a point unless it is already present; returns whether it was
    /// new.
    pub fn insert(&mut self, q: Rational, label: L) -> bool {
        match self.position(&q) {
            Ok(_) => false,
            Err(at) => {
                let node = node_of(&q).expect("store points are finite");
                self.entries.insert(at, Entry { q, label, node });
                true
            }
        }
    }

    /// Re-labels every point, e.g. after the meaning of labels changed.
    pub fn relabel(&mut self, mut f: impl FnMut(&Rational) -> L) {
        for e in &mut self.entries {
            e.label = f(&e.q);
        }
    }

    /// `entries[i]` is a strict ancestor of `entries[j]`.
    fn is_ancestor(&self, i: usize, j: usize) -> bool {
        self.entries[i].node.is_strict_ancestor_of(&self.entries[j].q)
    }

    /// Every pair of neighbours is related by ancestry.
    pub fn neighbours_are_related(&self) -> bool {
        (1..self.len()).all(|i| self.is_ancestor(i - 1, i) || self.is_ancestor(i, i - 1))
    }
}

/// Rebuilds a representation from `D`: a left-closed cut at `q_i` when its
/// left neighbour is a descendant with another label, a right-closed cut
/// at `q_i` when its right neighbour is a descendant with another label.
pub fn construct_representation<L: Clone + Eq>(store: &BreakLinkStore<L>) -> Piecewise<L> {
    let m = store.len();
    let mut pieces = Vec::new();
    let mut lo = Rational::neg_infinity();
    let mut lo_closed = false;
    let mut current = store.label(0).clone();
    let push = |pieces: &mut Vec<Piece<L>>, lo: &Rational, lo_closed, hi: &Rational, hi_closed, label| {
        let interval = Interval::new(lo.clone(), hi.clone(), lo_closed, hi_closed)
            .expect("store points are distinct, so every piece is non-empty");
        pieces.push(Piece { interval, label });
    };
    for i in 0..m {
        let q = store.point(i);
        if i > 0 && store.is_ancestor(i, i - 1) && store.label(i - 1) != store.label(i) {
            push(&mut pieces, &lo, lo_closed, q, false, current);
            lo = q.clone();
            lo_closed = true;
            current = store.label(i).clone();
        }
        if i + 1 < m && store.is_ancestor(i, i + 1) && store.label(i) != store.label(i + 1) {
            push(&mut pieces, &lo, lo_closed, q, true, store.label(i).clone());
            lo = q.clone();
            lo_closed = false;
            current = store.label(i + 1).clone();
        }
    }
    push(&mut pieces, &lo, lo_closed, &Rational::infinity(), false, store.label(m - 1).clone());
    Piecewise::from_pieces_unchecked(pieces)
}

/// Index of the deepest stored strict ancestor of `q_star`. The root is
/// always an ancestor, so a store holding `0/1` always has an answer.
pub fn find_closest_ancestor<L>(q_star: &Rational, store: &BreakLinkStore<L>) -> Result<usize, LearnError> {
    if store.contains(q_star) {
        return Err(LearnError::CounterexampleInStore(q_star.clone()));
    }
    let mut best: Option<usize> = None;
    for (i, e) in store.entries.iter().enumerate() {
        if !e.node.is_strict_ancestor_of(q_star) {
            continue;
        }
        // ancestors of one point form a chain, so the deeper one lies in
        // the subtree of the shallower
        match best {
            Some(b) if !store.is_ancestor(b, i) => {}
            _ => best = Some(i),
        }
    }
    best.ok_or_else(|| LearnError::InvalidStore(format!("no stored ancestor of {q_star}")))
}

/// A break link found on a straight branch.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BreakLink {
    pub parent: Rational,
    pub child: Rational,
    /// Branch offset of `parent` from the searched node.
    pub distance: BigUint,
    /// Membership queries spent by the search.
    pub queries: u64,
}

/// What a branch search needs to know about its surroundings.
#[derive(Debug, Clone)]
pub struct BranchContext<L> {
    /// The stored point whose branch is searched, and its stored label.
    pub origin: SbNode,
    pub origin_label: L,
    pub direction: Direction,
    pub q_star: Rational,
    pub q_star_label: L,
    /// The stored neighbour on the searched side, if any.
    pub neighbor: Option<(Rational, L)>,
}

impl<L: Clone + Eq> BranchContext<L> {
    fn from_store(store: &BreakLinkStore<L>, r: usize, direction: Direction, q_star: &Rational, q_star_label: &L) -> Self {
        let neighbor = match direction {
            Direction::Right => r.checked_add(1).filter(|&j| j < store.len()),
            Direction::Left => r.checked_sub(1),
        }
        .map(|j| (store.point(j).clone(), store.label(j).clone()));
        BranchContext {
            origin: store.node(r).clone(),
            origin_label: store.label(r).clone(),
            direction,
            q_star: q_star.clone(),
            q_star_label: q_star_label.clone(),
            neighbor,
        }
    }

    /// `a` lies further along the branch direction than `b`.
    fn beyond(&self, a: &Rational, b: &Rational) -> bool {
        match self.direction {
            Direction::Right => a > b,
            Direction::Left => a < b,
        }
    }

    /// Points known to carry a label other than the origin's, nearest first.
    fn witnesses(&self) -> Vec<&Rational> {
        let mut w = Vec::new();
        if self.q_star_label != self.origin_label {
            w.push(&self.q_star);
        }
        if let Some((n, l)) = &self.neighbor {
            if l != &self.origin_label {
                w.push(n);
            }
        }
        w
    }

    fn no_progress(&self) -> LearnError {
        LearnError::NoProgress {
            origin: self.origin.value().clone(),
            q_star: self.q_star.clone(),
        }
    }
}

fn pow2(k: u32) -> BigUint {
    BigUint::one() << k
}

/// Gallops down the branch at offsets `1, 2, 4, ...` until the label
/// changes, or the probe passes the counterexample (when it is labelled
/// differently from the origin), or passes the stored neighbour. Then
/// bisects the last gap.
fn search_branch<L: Clone + Eq, M: MembershipOracle<Rational, L> + ?Sized>(
    ctx: &BranchContext<L>,
    mq: &mut M,
) -> Result<BreakLink, LearnError> {
    let a = &ctx.origin_label;
    let bound = ctx.origin.bound(ctx.direction);
    // the branch converges to `bound`, so it passes any point short of it
    let reachable = |q: &Rational| ctx.beyond(bound, q);
    let stops = (ctx.q_star_label != *a && reachable(&ctx.q_star))
        || ctx.neighbor.as_ref().is_some_and(|(n, _)| reachable(n));
    if !stops {
        return Err(ctx.no_progress());
    }
    let mut queries = 0;
    let mut k: u32 = 0;
    loop {
        let e = ctx.origin.branch_value(ctx.direction, &pow2(k));
        let label = mq.query(&e);
        queries += 1;
        let stop = &label != a
            || (ctx.q_star_label != *a && ctx.beyond(&e, &ctx.q_star))
            || ctx.neighbor.as_ref().is_some_and(|(n, _)| ctx.beyond(&e, n));
        if stop {
            let mut link = bisect_branch(ctx, k, &label, mq)?;
            link.queries += queries;
            return Ok(link);
        }
        k += 1;
    }
}

/// Bisects offsets `(2^(k-1), 2^k]`. The lower probe always carries the
/// origin's label and some differently labelled point lies in
/// `(e_lo, e_hi]`: either `e_hi` itself or a known witness (the
/// counterexample or the stored neighbour). Witnesses below the midpoint
/// pull the upper end down, so the lower end never passes the nearest one
/// and never reaches a stored point.
fn bisect_branch<L: Clone + Eq, M: MembershipOracle<Rational, L> + ?Sized>(
    ctx: &BranchContext<L>,
    k: u32,
    hi_label: &L,
    mq: &mut M,
) -> Result<BreakLink, LearnError> {
    let node = &ctx.origin;
    let dir = ctx.direction;
    if k == 0 {
        return Ok(BreakLink {
            parent: node.value().clone(),
            child: node.branch_value(dir, &BigUint::one()),
            distance: BigUint::zero(),
            queries: 0,
        });
    }
    let a = &ctx.origin_label;
    let mut lo = pow2(k - 1);
    let mut hi = pow2(k);
    let mut e_lo = node.branch_value(dir, &lo);
    let e_hi = node.branch_value(dir, &hi);
    let witnesses = ctx.witnesses();
    let witness_between = |from: &Rational, to: &Rational| {
        witnesses
            .iter()
            .any(|w| ctx.beyond(w, from) && ctx.beyond(to, w))
    };
    if hi_label == a && !witness_between(&e_lo, &e_hi) {
        return Err(ctx.no_progress());
    }
    let mut e_hi = e_hi;
    let mut queries = 0;
    while &hi - &lo > BigUint::one() {
        let mid: BigUint = (&lo + &hi + 1u32) >> 1;
        let e_mid = node.branch_value(dir, &mid);
        let label = mq.query(&e_mid);
        queries += 1;
        if &label != a || witness_between(&e_lo, &e_mid) {
            hi = mid;
            e_hi = e_mid;
        } else {
            lo = mid;
            e_lo = e_mid;
        }
    }
    Ok(BreakLink {
        parent: e_lo,
        child: e_hi,
        distance: lo,
        queries,
    })
}

fn branch_search<L: Clone + Eq, M: MembershipOracle<Rational, L> + ?Sized>(
    store: &BreakLinkStore<L>,
    r: usize,
    direction: Direction,
    q_star: &Rational,
    q_star_label: &L,
    mq: &mut M,
) -> Result<BreakLink, LearnError> {
    let ctx = BranchContext::from_store(store, r, direction, q_star, q_star_label);
    search_branch(&ctx, mq)
}

/// Break link on the right branch of `store[r]`, for a counterexample to
/// its right.
pub fn search_right<L: Clone + Eq, M: MembershipOracle<Rational, L> + ?Sized>(
    store: &BreakLinkStore<L>,
    r: usize,
    q_star: &Rational,
    q_star_label: &L,
    mq: &mut M,
) -> Result<BreakLink, LearnError> {
    branch_search(store, r, Direction::Right, q_star, q_star_label, mq)
}

/// Mirror image of [`search_right`].
pub fn search_left<L: Clone + Eq, M: MembershipOracle<Rational, L> + ?Sized>(
    store: &BreakLinkStore<L>,
    r: usize,
    q_star: &Rational,
    q_star_label: &L,
    mq: &mut M,
) -> Result<BreakLink, LearnError> {
    branch_search(store, r, Direction::Left, q_star, q_star_label, mq)
}

/// Bisection phase on the right branch, after galloping stopped at
/// offset `2^k` whose label was `hi_label`.
pub fn bs_right<L: Clone + Eq, M: MembershipOracle<Rational, L> + ?Sized>(
    ctx: &BranchContext<L>,
    k: u32,
    hi_label: &L,
    mq: &mut M,
) -> Result<BreakLink, LearnError> {
    debug_assert_eq!(ctx.direction, Direction::Right);
    bisect_branch(ctx, k, hi_label, mq)
}

/// Mirror image of [`bs_right`].
pub fn bs_left<L: Clone + Eq, M: MembershipOracle<Rational, L> + ?Sized>(
    ctx: &BranchContext<L>,
    k: u32,
    hi_label: &L,
    mq: &mut M,
) -> Result<BreakLink, LearnError> {
    debug_assert_eq!(ctx.direction, Direction::Left);
    bisect_branch(ctx, k, hi_label, mq)
}

/// Searches the branch of `store[r]` on the side of `q_star`.
pub fn find_break_link<L: Clone + Eq, M: MembershipOracle<Rational, L> + ?Sized>(
    store: &BreakLinkStore<L>,
    r: usize,
    q_star: &Rational,
    q_star_label: &L,
    mq: &mut M,
) -> Result<BreakLink, LearnError> {
    if q_star > store.point(r) {
        search_right(store, r, q_star, q_star_label, mq)
    } else {
        search_left(store, r, q_star, q_star_label, mq)
    }
}

/// Query statistics of one learner.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct LearnerStats {
    pub mq_count: u64,
    pub break_links_found: u64,
    pub refinements: u64,
}

/// A learner that can be driven one counterexample at a time.
#[derive(Debug, Clone)]
pub struct PiecewiseLearner<L> {
    store: BreakLinkStore<L>,
    stats: LearnerStats,
    searches: Vec<BreakLink>,
}

impl<L: Clone + Eq + fmt::Debug> PiecewiseLearner<L> {
    /// Starts from `D = {(0/1, MQ(0/1))}`.
    pub fn new<M: MembershipOracle<Rational, L> + ?Sized>(mq: &mut M) -> Self {
        let zero = Rational::zero();
        let label = mq.query(&zero);
        PiecewiseLearner {
            store: BreakLinkStore::single(zero, label),
            stats: LearnerStats {
                mq_count: 1,
                ..Default::default()
            },
            searches: Vec::new(),
        }
    }

    pub fn store(&self) -> &BreakLinkStore<L> {
        &self.store
    }

    pub fn stats(&self) -> &LearnerStats {
        &self.stats
    }

    /// Every break-link search so far, in order.
    pub fn searches(&self) -> &[BreakLink] {
        &self.searches
    }

    /// The canonical form of the representation rebuilt from `D`.
    pub fn hypothesis(&self) -> Piecewise<L> {
        construct_representation(&self.store).canonicalize()
    }

    /// Processes one counterexample: locates its closest stored ancestor,
    /// finds a new break link below it and stores both ends.
    pub fn refine<M: MembershipOracle<Rational, L> + ?Sized>(
        &mut self,
        q_star: &Rational,
        mq: &mut M,
    ) -> Result<BreakLink, LearnError> {
        let r = find_closest_ancestor(q_star, &self.store)?;
        let label = mq.query(q_star);
        self.stats.mq_count += 1;
        self.refine_labelled(r, q_star, &label, mq)
    }

    /// [`refine`](Self::refine) for a counterexample whose label is known.
    pub fn refine_with_label<M: MembershipOracle<Rational, L> + ?Sized>(
        &mut self,
        q_star: &Rational,
        label: &L,
        mq: &mut M,
    ) -> Result<BreakLink, LearnError> {
        let r = find_closest_ancestor(q_star, &self.store)?;
        self.refine_labelled(r, q_star, label, mq)
    }

    fn refine_labelled<M: MembershipOracle<Rational, L> + ?Sized>(
        &mut self,
        r: usize,
        q_star: &Rational,
        label: &L,
        mq: &mut M,
    ) -> Result<BreakLink, LearnError> {
        let hyp = construct_representation(&self.store);
        if hyp.evaluate(q_star) == label {
            return Err(LearnError::TeacherInconsistent(format!(
                "counterexample {q_star} has label {label:?} in the hypothesis too"
            )));
        }
        self.stats.refinements += 1;
        let link = find_break_link(&self.store, r, q_star, label, mq)?;
        self.stats.mq_count += link.queries;
        let mut fresh = false;
        for q in [&link.parent, &link.child] {
            if !self.store.contains(q) {
                let l = mq.query(q);
                self.stats.mq_count += 1;
                fresh |= self.store.insert(q.clone(), l);
            }
        }
        if !fresh {
            return Err(LearnError::NoProgress {
                origin: self.store.point(r).clone(),
                q_star: q_star.clone(),
            });
        }
        self.stats.break_links_found += 1;
        debug_assert!(self.is_consistent(), "hypothesis inconsistent with {:?}", self.store);
        self.searches.push(link.clone());
        Ok(link)
    }

    /// Re-queries the label of every stored point.
    pub fn relabel<M: MembershipOracle<Rational, L> + ?Sized>(&mut self, mq: &mut M) {
        let mut n = 0;
        self.store.relabel(|q| {
            n += 1;
            mq.query(q)
        });
        self.stats.mq_count += n;
    }

    /// The rebuilt representation agrees with every stored label.
    pub fn is_consistent(&self) -> bool {
        let hyp = construct_representation(&self.store);
        self.store.iter().all(|(q, l)| hyp.evaluate(q) == l)
    }
}

/// Outcome of a learning session.
#[derive(Debug, Clone, Serialize)]
pub struct LearnerReport<L> {
    pub result: Piecewise<L>,
    pub mq_count: u64,
    pub eq_count: u64,
    pub break_links_found: u64,
    pub iterations: u64,
    /// Every break-link search, in order.
    #[serde(skip)]
    pub searches: Vec<BreakLink>,
}

/// Learns the function behind a membership and an equivalence oracle.
pub fn learn<L, M, E>(mq: &mut M, eq: &mut E) -> Result<LearnerReport<L>, LearnError>
where
    L: Clone + Eq + fmt::Debug,
    M: MembershipOracle<Rational, L> + ?Sized,
    E: EquivalenceOracle<Piecewise<L>, Rational> + ?Sized,
{
    let mut mq = Counted::new(mq);
    let mut eq = Counted::new(eq);
    let mut learner = PiecewiseLearner::new(&mut mq);
    loop {
        let hypothesis = learner.hypothesis();
        match eq.check(&hypothesis) {
            EqAnswer::Equal => {
                debug_assert_eq!(mq.count(), learner.stats.mq_count);
                return Ok(LearnerReport {
                    result: hypothesis,
                    mq_count: mq.count(),
                    eq_count: eq.count(),
                    break_links_found: learner.stats.break_links_found,
                    iterations: eq.count(),
                    searches: learner.searches,
                });
            }
            EqAnswer::Counterexample(q) => {
                learner.refine(&q, &mut mq)?;
            }
        }
    }
}

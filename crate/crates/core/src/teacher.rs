//! Oracle interfaces, query accounting, and a simulated teacher that knows
//! a hidden piecewise function.

use std::cell::RefCell;
use std::collections::BTreeSet;
use std::fmt;
use std::rc::Rc;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::pwf::{simplest_rational_in, Interval, Piecewise};
use crate::rational::Rational;
use crate::sb::{convergents, node_and_encoding, parent, Direction, SbNode};

/// Answers "what is the label of this input".
pub trait MembershipOracle<I: ?Sized, L> {
    fn query(&mut self, input: &I) -> L;
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EqAnswer<C> {
    Equal,
    Counterexample(C),
}

/// Answers "is this hypothesis right", with a counterexample when it is not.
pub trait EquivalenceOracle<H: ?Sized, C> {
    fn check(&mut self, hypothesis: &H) -> EqAnswer<C>;
}

impl<I: ?Sized, L, O: MembershipOracle<I, L> + ?Sized> MembershipOracle<I, L> for &mut O {
    fn query(&mut self, input: &I) -> L {
        (**self).query(input)
    }
}

impl<H: ?Sized, C, O: EquivalenceOracle<H, C> + ?Sized> EquivalenceOracle<H, C> for &mut O {
    fn check(&mut self, hypothesis: &H) -> EqAnswer<C> {
        (**self).check(hypothesis)
    }
}

/// Adapts a closure into a membership oracle.
pub struct FnMembership<F>(pub F);

impl<I: ?Sized, L, F: FnMut(&I) -> L> MembershipOracle<I, L> for FnMembership<F> {
    fn query(&mut self, input: &I) -> L {
        (self.0)(input)
    }
}

/// Adapts a closure into an equivalence oracle.
pub struct FnEquivalence<F>(pub F);

impl<H: ?Sized, C, F: FnMut(&H) -> EqAnswer<C>> EquivalenceOracle<H, C> for FnEquivalence<F> {
    fn check(&mut self, hypothesis: &H) -> EqAnswer<C> {
        (self.0)(hypothesis)
    }
}

/// Counts every call that reaches the wrapped oracle.
#[derive(Debug, Clone)]
pub struct Counted<O> {
    inner: O,
    count: u64,
}

impl<O> Counted<O> {
    pub fn new(inner: O) -> Self {
        Counted { inner, count: 0 }
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn inner(&self) -> &O {
        &self.inner
    }

    pub fn into_inner(self) -> O {
        self.inner
    }
}

impl<I: ?Sized, L, O: MembershipOracle<I, L>> MembershipOracle<I, L> for Counted<O> {
    fn query(&mut self, input: &I) -> L {
        self.count += 1;
        self.inner.query(input)
    }
}

impl<H: ?Sized, C, O: EquivalenceOracle<H, C>> EquivalenceOracle<H, C> for Counted<O> {
    fn check(&mut self, hypothesis: &H) -> EqAnswer<C> {
        self.count += 1;
        self.inner.check(hypothesis)
    }
}

/// One oracle call in a transcript.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TranscriptEntry {
    pub kind: &'static str,
    pub input: String,
    pub output: String,
}

/// A transcript shared by the oracles of one session, so that membership
/// and equivalence calls interleave in call order.
pub type Transcript = Rc<RefCell<Vec<TranscriptEntry>>>;

/// Appends every call of the wrapped oracle to a transcript.
pub struct Recorded<O> {
    inner: O,
    kind: &'static str,
    log: Transcript,
}

impl<O> Recorded<O> {
    pub fn new(inner: O, kind: &'static str, log: Transcript) -> Self {
        Recorded { inner, kind, log }
    }

    pub fn inner(&self) -> &O {
        &self.inner
    }
}

impl<I: ?Sized + fmt::Debug, L: fmt::Debug, O: MembershipOracle<I, L>> MembershipOracle<I, L>
    for Recorded<O>
{
    fn query(&mut self, input: &I) -> L {
        let out = self.inner.query(input);
        self.log.borrow_mut().push(TranscriptEntry {
            kind: self.kind,
            input: format!("{input:?}"),
            output: format!("{out:?}"),
        });
        out
    }
}

impl<H: ?Sized + fmt::Debug, C: fmt::Debug, O: EquivalenceOracle<H, C>> EquivalenceOracle<H, C>
    for Recorded<O>
{
    fn check(&mut self, hypothesis: &H) -> EqAnswer<C> {
        let out = self.inner.check(hypothesis);
        let output = match &out {
            EqAnswer::Equal => "equal".to_string(),
            EqAnswer::Counterexample(c) => format!("{c:?}"),
        };
        self.log.borrow_mut().push(TranscriptEntry {
            kind: self.kind,
            input: format!("{hypothesis:?}"),
            output,
        });
        out
    }
}

/// How the simulated teacher picks a counterexample inside the leftmost
/// disagreement cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Strategy {
    /// The shallowest tree node of the cell.
    Simplest,
    /// The left end when it is included, otherwise a point crowding it.
    BoundaryAdjacent,
    /// A point at tree depth at least the given value.
    Deep(u64),
    /// A seeded random descendant of a node whose subtree fits the cell.
    Random(u64),
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Strategy::Simplest => f.write_str("simplest"),
            Strategy::BoundaryAdjacent => f.write_str("boundary"),
            Strategy::Deep(d) => write!(f, "deep:{d}"),
            Strategy::Random(s) => write!(f, "random:{s}"),
        }
    }
}

impl FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || format!("unknown strategy {s:?} (expected simplest, boundary, deep:N or random:SEED)");
        match s.split_once(':') {
            None => match s {
                "simplest" => Ok(Strategy::Simplest),
                "boundary" => Ok(Strategy::BoundaryAdjacent),
                _ => Err(bad()),
            },
            Some(("deep", n)) => n.parse().map(Strategy::Deep).map_err(|_| bad()),
            Some(("random", n)) => n.parse().map(Strategy::Random).map_err(|_| bad()),
            Some(_) => Err(bad()),
        }
    }
}

/// A node whose whole subtree lies inside `cell`, reached from the simplest
/// point `s` of a cell with non-empty interior, and its depth.
fn subtree_inside(cell: &Interval, s: &SbNode, s_depth: &BigUint) -> (SbNode, BigUint) {
    // Step off `s` towards the interior, then walk back towards `s` until
    // the node behind us is inside the cell: the next node's subtree lies
    // strictly between `s` and that node.
    let (out, back, limit) = if s.value() < cell.hi() {
        (Direction::Right, Direction::Left, cell.hi())
    } else {
        (Direction::Left, Direction::Right, cell.lo())
    };
    let t = s.child(out);
    let inside = |q: &Rational| match back {
        Direction::Left => q <= limit,
        Direction::Right => q >= limit,
    };
    let m = if inside(t.value()) {
        BigUint::from(0u32)
    } else {
        t.first_offset_reaching(back, limit, false)
            .expect("the branch converges to s, which is inside the cell")
    };
    let m1 = &m + 1u32;
    let w = t.branch(back, &m1);
    let depth = s_depth + 1u32 + m1;
    (w, depth)
}

/// A rational of `cell` at tree depth at least `depth`, found by
/// descending from the simplest point of the cell, alternating directions.
pub fn deep_witness(cell: &Interval, depth: u64) -> Rational {
    let s = simplest_rational_in(cell);
    let (node, enc) = node_and_encoding(&s).expect("cells contain finite points");
    let s_depth = enc.depth();
    if cell.is_singleton() || s_depth >= BigUint::from(depth) {
        return s;
    }
    let (mut w, d) = subtree_inside(cell, &node, &s_depth);
    let mut d = d.to_u64().unwrap_or(u64::MAX);
    let mut dir = Direction::Right;
    while d < depth {
        w = w.child(dir);
        dir = dir.flip();
        d += 1;
    }
    debug_assert!(cell.contains(w.value()));
    w.into_value()
}

/// Points near the left end of `cell`.
fn boundary_witness(cell: &Interval) -> Rational {
    if cell.lo_closed() {
        return cell.lo().clone();
    }
    let mut s = simplest_rational_in(cell);
    for _ in 0..8 {
        let closer = Interval::open(cell.lo().clone(), s.clone()).expect("s lies right of the open end");
        s = simplest_rational_in(&closer);
    }
    s
}

fn random_witness(cell: &Interval, rng: &mut ChaCha8Rng) -> Rational {
    let s = simplest_rational_in(cell);
    if cell.is_singleton() || rng.gen_bool(0.25) {
        return s;
    }
    let (node, enc) = node_and_encoding(&s).expect("cells contain finite points");
    let (mut w, _) = subtree_inside(cell, &node, &enc.depth());
    for _ in 0..rng.gen_range(0..=32) {
        let dir = if rng.gen_bool(0.5) { Direction::Left } else { Direction::Right };
        w = w.child(dir);
    }
    debug_assert!(cell.contains(w.value()));
    w.into_value()
}

/// Picks counterexamples from cells according to a strategy.
#[derive(Debug, Clone)]
pub struct WitnessPicker {
    strategy: Strategy,
    rng: ChaCha8Rng,
}

impl WitnessPicker {
    pub fn new(strategy: Strategy) -> Self {
        let seed = match strategy {
            Strategy::Random(seed) => seed,
            _ => 0,
        };
        WitnessPicker {
            strategy,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn strategy(&self) -> Strategy {
        self.strategy
    }

    pub fn pick(&mut self, cell: &Interval) -> Rational {
        let q = match self.strategy {
            Strategy::Simplest => simplest_rational_in(cell),
            Strategy::BoundaryAdjacent => boundary_witness(cell),
            Strategy::Deep(d) => deep_witness(cell, d),
            Strategy::Random(_) => random_witness(cell, &mut self.rng),
        };
        debug_assert!(cell.contains(&q));
        q
    }
}

/// Membership half of the simulated teacher.
#[derive(Debug, Clone)]
pub struct SimulatedMembership<L> {
    target: Rc<Piecewise<L>>,
}

impl<L: Clone> MembershipOracle<Rational, L> for SimulatedMembership<L> {
    fn query(&mut self, q: &Rational) -> L {
        self.target.evaluate(q).clone()
    }
}

/// Equivalence half of the simulated teacher: exact comparison through the
/// common refinement, witness chosen by the strategy.
#[derive(Debug, Clone)]
pub struct SimulatedEquivalence<L> {
    target: Rc<Piecewise<L>>,
    picker: WitnessPicker,
}

impl<L: Clone + Eq> EquivalenceOracle<Piecewise<L>, Rational> for SimulatedEquivalence<L> {
    fn check(&mut self, hypothesis: &Piecewise<L>) -> EqAnswer<Rational> {
        match self.target.first_disagreement_cell(hypothesis) {
            None => EqAnswer::Equal,
            Some(cell) => {
                let q = self.picker.pick(&cell);
                debug_assert!(self.target.evaluate(&q) != hypothesis.evaluate(&q));
                EqAnswer::Counterexample(q)
            }
        }
    }
}

pub type SimulatedTeacher<L> = (Counted<SimulatedMembership<L>>, Counted<SimulatedEquivalence<L>>);

/// Counting oracles for a hidden target.
pub fn make_simulated_teacher<L: Clone + Eq>(target: &Piecewise<L>, strategy: Strategy) -> SimulatedTeacher<L> {
    let target = Rc::new(target.canonicalize());
    (
        Counted::new(SimulatedMembership { target: target.clone() }),
        Counted::new(SimulatedEquivalence {
            target,
            picker: WitnessPicker::new(strategy),
        }),
    )
}

/// A tree edge, parent first.
pub type Edge = (Rational, Rational);

/// The break-link predicate: the parent is the root, or the closed span of
/// the edge sees two labels.
pub fn is_break_link<L: Clone + Eq>(target: &Piecewise<L>, p: &Rational, q: &Rational) -> bool {
    if p.is_zero() {
        return true;
    }
    let span = if p < q {
        Interval::closed(p.clone(), q.clone())
    } else {
        Interval::closed(q.clone(), p.clone())
    }
    .expect("edge endpoints are distinct finite rationals");
    !target.is_monochromatic(&span)
}

/// All break links whose child sits at depth at most `max_depth`, by
/// exhaustive walk of the top of the tree.
pub fn enumerate_break_links<L: Clone + Eq>(target: &Piecewise<L>, max_depth: u32) -> BTreeSet<Edge> {
    let mut out = BTreeSet::new();
    let mut level = vec![SbNode::root()];
    for _ in 0..max_depth {
        let mut next = Vec::with_capacity(level.len() * 2);
        for n in &level {
            for dir in [Direction::Left, Direction::Right] {
                let c = n.child(dir);
                if is_break_link(target, n.value(), c.value()) {
                    out.insert((n.value().clone(), c.value().clone()));
                }
                next.push(c);
            }
        }
        level = next;
    }
    out
}

/// The whole break-link set. Every break link touches a convergent of a
/// bound, so only edges incident to those convergents, plus the root
/// edges, are candidates.
pub fn full_break_link_set<L: Clone + Eq>(target: &Piecewise<L>) -> BTreeSet<Edge> {
    let root = SbNode::root();
    let mut candidates: BTreeSet<Edge> = [Direction::Left, Direction::Right]
        .iter()
        .map(|&d| (Rational::zero(), root.child(d).into_value()))
        .collect();
    for (b, _) in target.bounds() {
        for c in convergents(&b).expect("bounds are finite") {
            let node = crate::sb::node_of(&c).expect("finite");
            candidates.insert((parent(&c).expect("convergents are never the root"), c.clone()));
            for d in [Direction::Left, Direction::Right] {
                candidates.insert((c.clone(), node.child(d).into_value()));
            }
        }
    }
    candidates
        .into_iter()
        .filter(|(p, q)| is_break_link(target, p, q))
        .collect()
}

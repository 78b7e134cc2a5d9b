//! Intervals over Q and finite piecewise functions given as interval
//! partitions with one label per piece.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rational::Rational;
use crate::sb::{Direction, SbNode};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PwfError {
    #[error("empty interval {0}")]
    EmptyInterval(String),
    #[error("an infinite endpoint cannot be closed: {0}")]
    ClosedInfinity(String),
    #[error("pieces do not partition Q: {0}")]
    NotAPartition(String),
    #[error("labels must be non-empty strings")]
    EmptyLabel,
}

/// An interval with extended-rational endpoints.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Interval {
    lo: Rational,
    hi: Rational,
    lo_closed: bool,
    hi_closed: bool,
}

impl Interval {
    pub fn new(lo: Rational, hi: Rational, lo_closed: bool, hi_closed: bool) -> Result<Self, PwfError> {
        let i = Interval {
            lo,
            hi,
            lo_closed,
            hi_closed,
        };
        if (i.lo_closed && !i.lo.is_finite()) || (i.hi_closed && !i.hi.is_finite()) {
            return Err(PwfError::ClosedInfinity(i.to_string()));
        }
        match i.lo.cmp(&i.hi) {
            Ordering::Less => Ok(i),
            Ordering::Equal if i.lo_closed && i.hi_closed => Ok(i),
            _ => Err(PwfError::EmptyInterval(i.to_string())),
        }
    }

    pub fn full() -> Self {
        Interval {
            lo: Rational::neg_infinity(),
            hi: Rational::infinity(),
            lo_closed: false,
            hi_closed: false,
        }
    }

    pub fn point(q: Rational) -> Self {
        Interval {
            lo: q.clone(),
            hi: q,
            lo_closed: true,
            hi_closed: true,
        }
    }

    pub fn closed(lo: Rational, hi: Rational) -> Result<Self, PwfError> {
        Self::new(lo, hi, true, true)
    }

    pub fn open(lo: Rational, hi: Rational) -> Result<Self, PwfError> {
        Self::new(lo, hi, false, false)
    }

    pub fn lo(&self) -> &Rational {
        &self.lo
    }

    pub fn hi(&self) -> &Rational {
        &self.hi
    }

    pub fn lo_closed(&self) -> bool {
        self.lo_closed
    }

    pub fn hi_closed(&self) -> bool {
        self.hi_closed
    }

    pub fn is_singleton(&self) -> bool {
        self.lo == self.hi
    }

    /// `q` lies strictly to the left of the interval.
    pub fn is_above(&self, q: &Rational) -> bool {
        q < &self.lo || (q == &self.lo && !self.lo_closed)
    }

    /// `q` lies strictly to the right of the interval.
    pub fn is_below(&self, q: &Rational) -> bool {
        q > &self.hi || (q == &self.hi && !self.hi_closed)
    }

    pub fn contains(&self, q: &Rational) -> bool {
        !self.is_above(q) && !self.is_below(q)
    }

    /// The common part of two intervals, if any.
    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        let (lo, lo_closed) = match self.lo.cmp(&other.lo) {
            Ordering::Less => (&other.lo, other.lo_closed),
            Ordering::Greater => (&self.lo, self.lo_closed),
            Ordering::Equal => (&self.lo, self.lo_closed && other.lo_closed),
        };
        let (hi, hi_closed) = match self.hi.cmp(&other.hi) {
            Ordering::Less => (&self.hi, self.hi_closed),
            Ordering::Greater => (&other.hi, other.hi_closed),
            Ordering::Equal => (&self.hi, self.hi_closed && other.hi_closed),
        };
        Interval::new(lo.clone(), hi.clone(), lo_closed, hi_closed).ok()
    }

    /// Sum of the endpoint bit sizes.
    pub fn size(&self) -> u64 {
        self.lo.bit_size() + self.hi.bit_size()
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let open = if self.lo_closed { '[' } else { '(' };
        let close = if self.hi_closed { ']' } else { ')' };
        write!(f, "{open}{}, {}{close}", self.lo, self.hi)
    }
}

impl fmt::Debug for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Compares right ends: which of two intervals sharing a left part stops
/// first.
fn cmp_hi(a: &Interval, b: &Interval) -> Ordering {
    a.hi.cmp(&b.hi).then(a.hi_closed.cmp(&b.hi_closed))
}

/// The simplest rational of an interval: its shallowest Stern-Brocot node.
///
/// Descends from the root one run at a time. When the current node lies
/// left of the interval the right branch is followed to its first node that
/// is not left of it; that node is either inside, or the answer sits in its
/// left subtree.
pub fn simplest_rational_in(interval: &Interval) -> Rational {
    let mut node = SbNode::root();
    loop {
        let v = node.value();
        let dir = if interval.is_above(v) {
            Direction::Right
        } else if interval.is_below(v) {
            Direction::Left
        } else {
            return node.into_value();
        };
        let j = match dir {
            Direction::Right => node.first_offset_reaching(dir, &interval.lo, !interval.lo_closed),
            Direction::Left => node.first_offset_reaching(dir, &interval.hi, !interval.hi_closed),
        }
        .expect("a non-empty interval inside the subtree is reached by its branch");
        node = node.branch(dir, &j);
    }
}

/// Classification of a finite bound of a canonical representation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundKind {
    /// The bound is the closed left end of its piece.
    Left,
    /// The bound is the closed right end of its piece.
    Right,
    /// A singleton piece.
    Both,
}

/// A non-empty string label.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Label(String);

impl Label {
    pub fn new(name: impl Into<String>) -> Result<Self, PwfError> {
        let name = name.into();
        if name.is_empty() {
            return Err(PwfError::EmptyLabel);
        }
        Ok(Label(name))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl TryFrom<String> for Label {
    type Error = PwfError;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        Label::new(s)
    }
}

impl From<Label> for String {
    fn from(l: Label) -> String {
        l.0
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Piece<L> {
    pub interval: Interval,
    pub label: L,
}

/// A labelled interval partition of Q, ordered left to right.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Piecewise<L> {
    pieces: Vec<Piece<L>>,
}

impl<L: fmt::Debug> fmt::Debug for Piecewise<L> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.pieces {
            write!(f, "({}, {:?})", p.interval, p.label)?;
        }
        Ok(())
    }
}

/// One cell of the common refinement of two representations.
#[derive(Debug, Clone)]
pub struct RefinementCell<'a, L> {
    pub interval: Interval,
    pub left: &'a L,
    pub right: &'a L,
}

impl<L> Piecewise<L> {
    /// Validates that consecutive pieces touch with complementary openness
    /// and together cover Q.
    pub fn new(pieces: Vec<Piece<L>>) -> Result<Self, PwfError> {
        let first = pieces
            .first()
            .ok_or_else(|| PwfError::NotAPartition("no pieces".into()))?;
        if first.interval.lo != Rational::neg_infinity() {
            return Err(PwfError::NotAPartition(format!("{} does not start at -inf", first.interval)));
        }
        let last = pieces.last().expect("non-empty");
        if last.interval.hi != Rational::infinity() {
            return Err(PwfError::NotAPartition(format!("{} does not end at inf", last.interval)));
        }
        for w in pieces.windows(2) {
            let (a, b) = (&w[0].interval, &w[1].interval);
            if a.hi != b.lo || a.hi_closed == b.lo_closed {
                return Err(PwfError::NotAPartition(format!("{a} and {b} do not touch exactly")));
            }
        }
        Ok(Piecewise { pieces })
    }

    /// Skips validation; callers build partitions by construction.
    pub(crate) fn from_pieces_unchecked(pieces: Vec<Piece<L>>) -> Self {
        debug_assert!(!pieces.is_empty());
        Piecewise { pieces }
    }

    pub fn constant(label: L) -> Self {
        Piecewise {
            pieces: vec![Piece {
                interval: Interval::full(),
                label,
            }],
        }
    }

    pub fn pieces(&self) -> &[Piece<L>] {
        &self.pieces
    }

    pub fn len(&self) -> usize {
        self.pieces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pieces.is_empty()
    }

    /// Index of the piece containing `q`.
    pub fn piece_index(&self, q: &Rational) -> usize {
        self.pieces.partition_point(|p| p.interval.is_below(q))
    }

    /// The label at `q`, found by binary search over the pieces.
    pub fn evaluate(&self, q: &Rational) -> &L {
        &self.pieces[self.piece_index(q)].label
    }

    /// Sum of the endpoint sizes of all pieces. Labels are not counted.
    pub fn size(&self) -> u64 {
        self.pieces.iter().map(|p| p.interval.size()).sum()
    }

    /// Finite endpoints, each with the side of the piece that contains it.
    pub fn bounds(&self) -> Vec<(Rational, BoundKind)> {
        let mut out = Vec::new();
        for p in &self.pieces {
            let i = &p.interval;
            if i.is_singleton() {
                out.push((i.lo.clone(), BoundKind::Both));
                continue;
            }
            if i.lo_closed {
                out.push((i.lo.clone(), BoundKind::Left));
            }
            if i.hi_closed {
                out.push((i.hi.clone(), BoundKind::Right));
            }
        }
        out
    }

    /// Cells of the coarsest partition refining both `self` and `other`,
    /// each with the two labels it carries.
    pub fn refinement<'a>(&'a self, other: &'a Piecewise<L>) -> Vec<RefinementCell<'a, L>> {
        let (mut i, mut j) = (0, 0);
        let mut cells = Vec::with_capacity(self.len() + other.len());
        while i < self.len() && j < other.len() {
            let (a, b) = (&self.pieces[i], &other.pieces[j]);
            let cell = a
                .interval
                .intersect(&b.interval)
                .expect("pieces current in both walks overlap");
            cells.push(RefinementCell {
                interval: cell,
                left: &a.label,
                right: &b.label,
            });
            match cmp_hi(&a.interval, &b.interval) {
                Ordering::Less => i += 1,
                Ordering::Greater => j += 1,
                Ordering::Equal => {
                    i += 1;
                    j += 1;
                }
            }
        }
        cells
    }
}

impl<L: Clone + Eq> Piecewise<L> {
    /// Merges adjacent pieces with equal labels.
    pub fn canonicalize(&self) -> Self {
        let mut out: Vec<Piece<L>> = Vec::with_capacity(self.pieces.len());
        for p in &self.pieces {
            match out.last_mut() {
                Some(prev) if prev.label == p.label => {
                    prev.interval.hi = p.interval.hi.clone();
                    prev.interval.hi_closed = p.interval.hi_closed;
                }
                _ => out.push(p.clone()),
            }
        }
        Piecewise { pieces: out }
    }

    pub fn is_canonical(&self) -> bool {
        self.pieces.windows(2).all(|w| w[0].label != w[1].label)
    }

    /// The single label on `interval`, or `None` when it sees two labels.
    pub fn monochromatic_label(&self, interval: &Interval) -> Option<&L> {
        let start = self.pieces.partition_point(|p| cmp_lo_hi_below(&p.interval, interval));
        let label = &self.pieces[start].label;
        for p in &self.pieces[start + 1..] {
            if p.interval.intersect(interval).is_none() {
                break;
            }
            if &p.label != label {
                return None;
            }
        }
        Some(label)
    }

    pub fn is_monochromatic(&self, interval: &Interval) -> bool {
        self.monochromatic_label(interval).is_some()
    }

    /// The leftmost cell of the common refinement where the labels differ.
    pub fn first_disagreement_cell(&self, other: &Piecewise<L>) -> Option<Interval> {
        self.refinement(other)
            .into_iter()
            .find(|c| c.left != c.right)
            .map(|c| c.interval)
    }

    /// The simplest rational of the leftmost disagreement cell.
    pub fn first_disagreement(&self, other: &Piecewise<L>) -> Option<Rational> {
        self.first_disagreement_cell(other)
            .map(|c| simplest_rational_in(&c))
    }

    pub fn map_labels<M>(&self, mut f: impl FnMut(&L) -> M) -> Piecewise<M> {
        Piecewise {
            pieces: self
                .pieces
                .iter()
                .map(|p| Piece {
                    interval: p.interval.clone(),
                    label: f(&p.label),
                })
                .collect(),
        }
    }
}

/// The piece lies entirely left of `interval`.
fn cmp_lo_hi_below(piece: &Interval, interval: &Interval) -> bool {
    piece.hi < interval.lo || (piece.hi == interval.lo && !(piece.hi_closed && interval.lo_closed))
}

#[derive(Serialize, Deserialize)]
struct PieceJson<L> {
    lo: Rational,
    hi: Rational,
    lo_closed: bool,
    hi_closed: bool,
    label: L,
}

#[derive(Serialize, Deserialize)]
#[serde(bound(serialize = "L: Serialize", deserialize = "L: Deserialize<'de>"))]
struct PiecewiseJson<L> {
    pieces: Vec<PieceJson<L>>,
}

impl<L: Serialize> Serialize for Piecewise<L> {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        struct PieceRef<'a, L>(&'a Piece<L>);
        impl<L: Serialize> Serialize for PieceRef<'_, L> {
            fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
                let i = &self.0.interval;
                let mut st = s.serialize_struct("Piece", 5)?;
                st.serialize_field("lo", &i.lo)?;
                st.serialize_field("hi", &i.hi)?;
                st.serialize_field("lo_closed", &i.lo_closed)?;
                st.serialize_field("hi_closed", &i.hi_closed)?;
                st.serialize_field("label", &self.0.label)?;
                st.end()
            }
        }
        let pieces: Vec<PieceRef<'_, L>> = self.pieces.iter().map(PieceRef).collect();
        let mut st = serializer.serialize_struct("Piecewise", 1)?;
        st.serialize_field("pieces", &pieces)?;
        st.end()
    }
}

impl<'de, L: Deserialize<'de>> Deserialize<'de> for Piecewise<L> {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let raw = PiecewiseJson::<L>::deserialize(deserializer)?;
        let pieces = raw
            .pieces
            .into_iter()
            .map(|p| {
                Interval::new(p.lo, p.hi, p.lo_closed, p.hi_closed).map(|interval| Piece {
                    interval,
                    label: p.label,
                })
            })
            .collect::<Result<Vec<_>, _>>()
            .map_err(D::Error::custom)?;
        Piecewise::new(pieces).map_err(D::Error::custom)
    }
}

/// Builds a representation from labels and the cut points between them.
///
/// `cuts[i]` separates piece `i` from piece `i + 1`; its flag tells whether
/// the cut point belongs to the piece on its left. A cut may repeat once
/// (left-open then left-closed) to make a singleton piece.
pub fn from_cuts<L>(labels: Vec<L>, cuts: &[(Rational, bool)]) -> Result<Piecewise<L>, PwfError> {
    if labels.len() != cuts.len() + 1 {
        return Err(PwfError::NotAPartition("need exactly one more label than cuts".into()));
    }
    let mut pieces = Vec::with_capacity(labels.len());
    let mut lo = Rational::neg_infinity();
    let mut lo_closed = false;
    for (i, label) in labels.into_iter().enumerate() {
        let (hi, hi_closed) = match cuts.get(i) {
            Some((q, to_left)) => (q.clone(), *to_left),
            None => (Rational::infinity(), false),
        };
        let interval = Interval::new(lo, hi.clone(), lo_closed, hi_closed)?;
        pieces.push(Piece { interval, label });
        lo = hi;
        lo_closed = !hi_closed;
    }
    Piecewise::new(pieces)
}

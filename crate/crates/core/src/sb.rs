//! Navigation of the Stern-Brocot tree over all of Q.
//!
//! The root is `0/1` with boundary pair `(-inf, +inf)`. Every node is the
//! mediant of its boundary pair, its left subtree is the open interval
//! `(lbound, value)` and its right subtree is `(value, rbound)`. Paths are
//! handled in run-length form, so walking to a node costs one step per run
//! rather than one step per tree level.

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::rational::{Rational, RationalError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TreeError {
    #[error(transparent)]
    Rational(#[from] RationalError),
    #[error("the root 0/1 has no parent")]
    NoParent,
    #[error("malformed encoding: {0}")]
    MalformedEncoding(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    Left,
    Right,
}

impl Direction {
    pub fn flip(self) -> Self {
        match self {
            Direction::Left => Direction::Right,
            Direction::Right => Direction::Left,
        }
    }
}

/// A tree node together with its boundary pair.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct SbNode {
    value: Rational,
    lbound: Rational,
    rbound: Rational,
}

impl fmt::Debug for SbNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:?} < {:?} < {:?})", self.lbound, self.value, self.rbound)
    }
}

impl SbNode {
    pub fn root() -> Self {
        SbNode {
            value: Rational::zero(),
            lbound: Rational::neg_infinity(),
            rbound: Rational::infinity(),
        }
    }

    pub fn value(&self) -> &Rational {
        &self.value
    }

    pub fn lbound(&self) -> &Rational {
        &self.lbound
    }

    pub fn rbound(&self) -> &Rational {
        &self.rbound
    }

    pub fn into_value(self) -> Rational {
        self.value
    }

    /// The boundary the branch in `dir` converges to.
    pub fn bound(&self, dir: Direction) -> &Rational {
        match dir {
            Direction::Left => &self.lbound,
            Direction::Right => &self.rbound,
        }
    }

    pub fn left_child(&self) -> SbNode {
        self.child(Direction::Left)
    }

    pub fn right_child(&self) -> SbNode {
        self.child(Direction::Right)
    }

    pub fn child(&self, dir: Direction) -> SbNode {
        let c = self.bound(dir);
        let value = Rational::from_coprime(
            self.value.numer() + c.numer(),
            self.value.denom() + c.denom(),
        );
        match dir {
            Direction::Left => SbNode {
                value,
                lbound: self.lbound.clone(),
                rbound: self.value.clone(),
            },
            Direction::Right => SbNode {
                value,
                lbound: self.value.clone(),
                rbound: self.rbound.clone(),
            },
        }
    }

    /// Value of the node `m` steps down the straight branch in `dir`:
    /// `(a + m*c) / (b + m*d)` where `a/b` is this node and `c/d` the bound
    /// in `dir`. Offset 0 is the node itself.
    pub fn branch_value(&self, dir: Direction, m: &BigUint) -> Rational {
        let c = self.bound(dir);
        let m = BigInt::from(m.clone());
        Rational::from_coprime(
            self.value.numer() + &m * c.numer(),
            self.value.denom() + &m * c.denom(),
        )
    }

    /// The node `m >= 1` steps down the straight branch in `dir`.
    pub fn branch(&self, dir: Direction, m: &BigUint) -> SbNode {
        debug_assert!(!m.is_zero());
        let value = self.branch_value(dir, m);
        let prev = self.branch_value(dir, &(m - 1u32));
        match dir {
            Direction::Left => SbNode {
                value,
                lbound: self.lbound.clone(),
                rbound: prev,
            },
            Direction::Right => SbNode {
                value,
                lbound: prev,
                rbound: self.rbound.clone(),
            },
        }
    }

    /// True iff `q` lies in the subtree rooted here (the node included).
    pub fn subtree_contains(&self, q: &Rational) -> bool {
        &self.lbound < q && q < &self.rbound
    }

    /// Strict ancestry, decided by the subtree interval.
    pub fn is_strict_ancestor_of(&self, q: &Rational) -> bool {
        q != &self.value && self.subtree_contains(q)
    }

    /// Smallest offset `j >= 1` whose branch node in `dir` reaches
    /// `threshold` (`>=` going right, `<=` going left; strict when
    /// `strict`). `None` when the branch never gets there.
    pub fn first_offset_reaching(
        &self,
        dir: Direction,
        threshold: &Rational,
        strict: bool,
    ) -> Option<BigUint> {
        if !threshold.is_finite() {
            return None;
        }
        let (a, b) = (self.value.numer(), self.value.denom());
        let c = self.bound(dir);
        let (c, d) = (c.numer(), c.denom());
        let (p, s) = (threshold.numer(), threshold.denom());
        // right: j*(s*c - p*d) >= p*b - s*a, left: the same with both sides negated
        let (gap, need) = match dir {
            Direction::Right => (s * c - p * d, p * b - s * a),
            Direction::Left => (p * d - s * c, s * a - p * b),
        };
        if !gap.is_positive() {
            return None;
        }
        let j = if strict {
            need.div_floor(&gap) + 1
        } else {
            -((-need).div_floor(&gap))
        };
        let j = j.max(BigInt::one());
        Some(j.to_biguint().expect("offset is positive"))
    }
}

/// Sign component of an encoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SbSign {
    Negative,
    Zero,
    Positive,
}

/// Run-length form of the root-to-node path: positive numbers start with a
/// run of right moves, negative ones with a run of left moves, and the
/// directions alternate from there.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SbEncoding {
    sign: SbSign,
    runs: Vec<BigUint>,
}

impl SbEncoding {
    pub fn new(sign: SbSign, runs: Vec<BigUint>) -> Result<Self, TreeError> {
        if (sign == SbSign::Zero) != runs.is_empty() {
            return Err(TreeError::MalformedEncoding("zero sign iff no runs"));
        }
        if runs.iter().any(|a| a.is_zero()) {
            return Err(TreeError::MalformedEncoding("every run must be >= 1"));
        }
        Ok(SbEncoding { sign, runs })
    }

    pub fn zero() -> Self {
        SbEncoding {
            sign: SbSign::Zero,
            runs: Vec::new(),
        }
    }

    pub fn sign(&self) -> SbSign {
        self.sign
    }

    pub fn runs(&self) -> &[BigUint] {
        &self.runs
    }

    /// Tree depth, i.e. the path length.
    pub fn depth(&self) -> BigUint {
        self.runs.iter().sum()
    }

    /// The runs paired with their move direction.
    pub fn moves(&self) -> impl Iterator<Item = (Direction, &BigUint)> {
        let first = match self.sign {
            SbSign::Negative => Direction::Left,
            _ => Direction::Right,
        };
        self.runs.iter().enumerate().map(move |(i, a)| {
            let dir = if i % 2 == 0 { first } else { first.flip() };
            (dir, a)
        })
    }

    /// Run-prefix ancestry: `self` is a strict ancestor of `other`.
    pub fn is_ancestor_of(&self, other: &SbEncoding) -> bool {
        if self.sign == SbSign::Zero {
            return other.sign != SbSign::Zero;
        }
        if self.sign != other.sign {
            return false;
        }
        let (k, n) = (self.runs.len(), other.runs.len());
        if k > n || self.runs[..k - 1] != other.runs[..k - 1] {
            return false;
        }
        if k < n {
            self.runs[k - 1] <= other.runs[k - 1]
        } else {
            self.runs[k - 1] < other.runs[n - 1]
        }
    }
}

impl fmt::Display for SbEncoding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = match self.sign {
            SbSign::Negative => "-",
            SbSign::Zero => "",
            SbSign::Positive => "+",
        };
        let runs: Vec<String> = self.runs.iter().map(|a| a.to_string()).collect();
        write!(f, "{sign}[{}]", runs.join(","))
    }
}

/// Encodes a finite rational by the continued fraction of `|q| + 1`.
///
/// If `|q| + 1 = [c0; c1, ..., cm]` (canonical, `cm >= 2` unless `m = 0`)
/// the runs are `c0, ..., c(m-1), cm - 1`.
pub fn sb_encode(q: &Rational) -> Result<SbEncoding, TreeError> {
    q.require_finite()?;
    if q.is_zero() {
        return Ok(SbEncoding::zero());
    }
    let sign = if q.is_negative() {
        SbSign::Negative
    } else {
        SbSign::Positive
    };
    let den = q.denom().magnitude().clone();
    let mut x = q.numer().magnitude() + &den;
    let mut y = den;
    let mut runs = Vec::new();
    while !y.is_zero() {
        let (quot, rem) = x.div_rem(&y);
        runs.push(quot);
        x = y;
        y = rem;
    }
    let last = runs.last_mut().expect("at least one quotient");
    *last -= 1u32;
    debug_assert!(!last.is_zero());
    Ok(SbEncoding { sign, runs })
}

/// Walks the encoded path from the root, calling `visit` after every run.
fn walk(enc: &SbEncoding, mut visit: impl FnMut(&SbNode)) -> SbNode {
    let mut node = SbNode::root();
    for (dir, a) in enc.moves() {
        node = node.branch(dir, a);
        visit(&node);
    }
    node
}

pub fn sb_decode(enc: &SbEncoding) -> Rational {
    walk(enc, |_| {}).into_value()
}

/// The node of a finite rational with its boundary pair.
pub fn node_of(q: &Rational) -> Result<SbNode, TreeError> {
    let node = walk(&sb_encode(q)?, |_| {});
    debug_assert_eq!(node.value(), q);
    Ok(node)
}

/// Node and encoding in one pass.
pub fn node_and_encoding(q: &Rational) -> Result<(SbNode, SbEncoding), TreeError> {
    let enc = sb_encode(q)?;
    let node = walk(&enc, |_| {});
    Ok((node, enc))
}

/// The unique node whose left or right child is `q`.
pub fn parent(q: &Rational) -> Result<Rational, TreeError> {
    let enc = sb_encode(q)?;
    let (last_dir, _) = enc.moves().last().ok_or(TreeError::NoParent)?;
    let node = walk(&enc, |_| {});
    // the last move went away from the parent, which is the bound behind it
    Ok(match last_dir {
        Direction::Right => node.lbound,
        Direction::Left => node.rbound,
    })
}

/// Decodings of every non-empty run prefix: the turning points of the path,
/// ending with `q` itself. Empty for zero.
pub fn convergents(q: &Rational) -> Result<Vec<Rational>, TreeError> {
    let enc = sb_encode(q)?;
    let mut out = Vec::with_capacity(enc.runs.len());
    walk(&enc, |n| out.push(n.value.clone()));
    Ok(out)
}

/// Strict ancestry between finite rationals (irreflexive).
pub fn is_ancestor(p: &Rational, q: &Rational) -> Result<bool, TreeError> {
    Ok(sb_encode(p)?.is_ancestor_of(&sb_encode(q)?))
}

pub fn depth(q: &Rational) -> Result<BigUint, TreeError> {
    Ok(sb_encode(q)?.depth())
}

/// Value of the node `m` steps down the straight branch of `r` in `dir`.
pub fn branch_offset_node(r: &SbNode, dir: Direction, m: &BigUint) -> Rational {
    r.branch_value(dir, m)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(s: &str) -> Rational {
        s.parse().unwrap()
    }

    fn runs(v: &[u32]) -> Vec<BigUint> {
        v.iter().map(|&a| BigUint::from(a)).collect()
    }

    #[test]
    fn children_match_the_tree() {
        let root = SbNode::root();
        assert_eq!(root.left_child().value(), &r("-1"));
        let half = node_of(&r("1/2")).unwrap();
        assert_eq!((half.lbound(), half.rbound()), (&r("0"), &r("1")));
        assert_eq!(half.right_child().value(), &r("2/3"));
        assert_eq!(node_of(&r("-1/2")).unwrap().left_child().value(), &r("-2/3"));
    }

    #[test]
    fn node_of_bounds() {
        let n = node_of(&r("1/3")).unwrap();
        assert_eq!((n.lbound(), n.rbound()), (&r("0"), &r("1/2")));
        let n = node_of(&r("0")).unwrap();
        assert_eq!((n.lbound(), n.rbound()), (&r("-inf"), &r("inf")));
        let n = node_of(&r("-2/3")).unwrap();
        assert_eq!((n.lbound(), n.rbound()), (&r("-1"), &r("-1/2")));
        assert!(node_of(&r("inf")).is_err());
    }

    #[test]
    fn parents() {
        assert_eq!(parent(&r("1/3")).unwrap(), r("1/2"));
        assert_eq!(parent(&r("-1")).unwrap(), r("0"));
        assert_eq!(parent(&r("3/5")).unwrap(), r("2/3"));
        assert_eq!(parent(&r("5")).unwrap(), r("4"));
        assert_eq!(parent(&r("0")), Err(TreeError::NoParent));
    }

    #[test]
    fn encodings() {
        let e = sb_encode(&r("-2/3")).unwrap();
        assert_eq!(e, SbEncoding::new(SbSign::Negative, runs(&[1, 1, 1])).unwrap());
        assert_eq!(e.to_string(), "-[1,1,1]");
        assert_eq!(sb_encode(&r("1/3")).unwrap().to_string(), "+[1,2]");
        assert_eq!(sb_encode(&r("23/108")).unwrap().to_string(), "+[1,4,1,2,3,1]");
        assert_eq!(sb_encode(&r("0")).unwrap(), SbEncoding::zero());
        assert_eq!(sb_encode(&r("7")).unwrap().to_string(), "+[7]");
    }

    #[test]
    fn decodings() {
        let dec = |s, v: &[u32]| sb_decode(&SbEncoding::new(s, runs(v)).unwrap());
        assert_eq!(dec(SbSign::Negative, &[1, 1, 1]), r("-2/3"));
        assert_eq!(dec(SbSign::Positive, &[1, 2]), r("1/3"));
        assert_eq!(dec(SbSign::Zero, &[]), r("0"));
        assert!(SbEncoding::new(SbSign::Positive, runs(&[1, 0])).is_err());
        assert!(SbEncoding::new(SbSign::Zero, runs(&[1])).is_err());
        assert!(SbEncoding::new(SbSign::Positive, vec![]).is_err());
    }

    #[test]
    fn convergent_examples() {
        assert_eq!(convergents(&r("-2/3")).unwrap(), vec![r("-1"), r("-1/2"), r("-2/3")]);
        assert_eq!(convergents(&r("1/3")).unwrap(), vec![r("1"), r("1/3")]);
        assert_eq!(convergents(&r("1")).unwrap(), vec![r("1")]);
        assert!(convergents(&r("0")).unwrap().is_empty());
    }

    #[test]
    fn ancestry_examples() {
        assert!(is_ancestor(&r("1/2"), &r("1/3")).unwrap());
        assert!(!is_ancestor(&r("1/3"), &r("1/2")).unwrap());
        assert!(is_ancestor(&r("0"), &r("-7/3")).unwrap());
        assert!(!is_ancestor(&r("0"), &r("0")).unwrap());
        assert!(!is_ancestor(&r("1/3"), &r("1/3")).unwrap());
        // turning point: 1 is on the path RLL of 1/3
        assert!(is_ancestor(&r("1"), &r("1/3")).unwrap());
        assert!(!is_ancestor(&r("-1"), &r("2/3")).unwrap());
    }

    #[test]
    fn branch_offsets() {
        let root = SbNode::root();
        assert_eq!(branch_offset_node(&root, Direction::Right, &BigUint::from(3u32)), r("3"));
        let one = node_of(&r("1")).unwrap();
        assert_eq!(branch_offset_node(&one, Direction::Left, &BigUint::from(2u32)), r("1/3"));
        assert_eq!(
            branch_offset_node(&one, Direction::Left, &BigUint::one()),
            one.left_child().into_value()
        );
    }

    #[test]
    fn first_offset_reaching_thresholds() {
        let root = SbNode::root();
        let j = |t: &str, strict| root.first_offset_reaching(Direction::Right, &r(t), strict);
        assert_eq!(j("5/2", false), Some(BigUint::from(3u32)));
        assert_eq!(j("3", false), Some(BigUint::from(3u32)));
        assert_eq!(j("3", true), Some(BigUint::from(4u32)));
        assert_eq!(j("-4", false), Some(BigUint::one()));
        let half = node_of(&r("1/2")).unwrap();
        // left branch of 1/2 is 1/3, 1/4, ... towards 0
        let l = half.first_offset_reaching(Direction::Left, &r("1/5"), false);
        assert_eq!(l, Some(BigUint::from(3u32)));
        assert_eq!(half.first_offset_reaching(Direction::Left, &r("-1"), false), None);
    }
}

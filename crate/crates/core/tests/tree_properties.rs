//! Tree navigation checked against a naive root-to-node walk that compares
//! values one level at a time.

use num_bigint::{BigInt, BigUint};
use proptest::prelude::*;
use sblearn::sb::{convergents, depth, is_ancestor, node_of, parent, sb_decode, sb_encode, Direction, SbNode};
use sblearn::{mediant, Rational};

/// Every node from the root's child down to `q`, with the move into it.
fn naive_path(q: &Rational) -> Vec<(Direction, SbNode)> {
    let mut node = SbNode::root();
    let mut path = Vec::new();
    while node.value() != q {
        let dir = if q < node.value() { Direction::Left } else { Direction::Right };
        node = node.child(dir);
        path.push((dir, node.clone()));
    }
    path
}

fn small_rational() -> impl Strategy<Value = Rational> {
    (-300i64..300, 1i64..300).prop_map(|(n, d)| Rational::new(n, d).unwrap())
}

fn big_rational() -> impl Strategy<Value = Rational> {
    (any::<bool>(), prop::collection::vec(any::<u32>(), 1..9), prop::collection::vec(any::<u32>(), 1..9)).prop_map(
        |(neg, n, d)| {
            let n = BigInt::from(BigUint::new(n));
            let d = BigInt::from(BigUint::new(d)) + 1;
            Rational::new(if neg { -n } else { n }, d).unwrap()
        },
    )
}

proptest! {
    #[test]
    fn decode_inverts_encode(q in big_rational()) {
        prop_assert_eq!(sb_decode(&sb_encode(&q).unwrap()), q);
    }

    #[test]
    fn node_bounds_are_a_boundary_pair(q in big_rational()) {
        let n = node_of(&q).unwrap();
        prop_assert!(n.lbound() < n.value() && n.value() < n.rbound());
        prop_assert_eq!(&mediant(n.lbound(), n.rbound()), n.value());
    }

    #[test]
    fn encoding_matches_the_naive_path(q in small_rational()) {
        let path = naive_path(&q);
        let enc = sb_encode(&q).unwrap();
        let expanded: Vec<Direction> = enc
            .moves()
            .flat_map(|(d, a)| std::iter::repeat_n(d, usize::try_from(a).unwrap()))
            .collect();
        let walked: Vec<Direction> = path.iter().map(|(d, _)| *d).collect();
        prop_assert_eq!(expanded, walked);
        prop_assert_eq!(depth(&q).unwrap(), BigUint::from(path.len()));
        let last = path.last().map(|(_, n)| n.clone()).unwrap_or_else(SbNode::root);
        prop_assert_eq!(&node_of(&q).unwrap(), &last);
    }

    #[test]
    fn convergents_are_the_turning_points(q in small_rational()) {
        let path = naive_path(&q);
        let turning: Vec<Rational> = path
            .iter()
            .enumerate()
            .filter(|(i, (d, _))| path.get(i + 1).is_none_or(|(next, _)| next != d))
            .map(|(_, (_, n))| n.value().clone())
            .collect();
        prop_assert_eq!(convergents(&q).unwrap(), turning);
    }

    #[test]
    fn parent_is_the_previous_node(q in small_rational()) {
        let path = naive_path(&q);
        match path.len() {
            0 => prop_assert!(parent(&q).is_err()),
            1 => prop_assert_eq!(parent(&q).unwrap(), Rational::zero()),
            k => prop_assert_eq!(&parent(&q).unwrap(), path[k - 2].1.value()),
        }
    }

    #[test]
    fn ancestry_matches_the_naive_path(p in small_rational(), q in small_rational()) {
        let on_path = p != q && (p.is_zero() || naive_path(&q).iter().any(|(_, n)| n.value() == &p));
        prop_assert_eq!(is_ancestor(&p, &q).unwrap(), on_path);
        prop_assert_eq!(node_of(&p).unwrap().is_strict_ancestor_of(&q), on_path);
    }

    #[test]
    fn branch_offsets_match_repeated_children(q in small_rational(), right in any::<bool>(), m in 1u32..40) {
        let dir = if right { Direction::Right } else { Direction::Left };
        let start = node_of(&q).unwrap();
        let mut walked = start.clone();
        for _ in 0..m {
            walked = walked.child(dir);
        }
        prop_assert_eq!(&start.branch(dir, &BigUint::from(m)), &walked);
    }

    #[test]
    fn first_offset_reaching_is_minimal(q in small_rational(), right in any::<bool>(), t in small_rational(), strict in any::<bool>()) {
        let dir = if right { Direction::Right } else { Direction::Left };
        let start = node_of(&q).unwrap();
        let reaches = |v: &Rational| match (dir, strict) {
            (Direction::Right, true) => v > &t,
            (Direction::Right, false) => v >= &t,
            (Direction::Left, true) => v < &t,
            (Direction::Left, false) => v <= &t,
        };
        let mut node = start.clone();
        let mut found = None;
        for j in 1u32..=2000 {
            node = node.child(dir);
            if reaches(node.value()) {
                found = Some(BigUint::from(j));
                break;
            }
        }
        let got = start.first_offset_reaching(dir, &t, strict);
        match found {
            Some(j) => prop_assert_eq!(got, Some(j)),
            // the branch converges to its bound; unreachable thresholds lie beyond it
            None => prop_assert!(got.is_none() || got.unwrap() > BigUint::from(2000u32)),
        }
    }
}

//! Seeded random rationals and piecewise functions for tests and benchmarks.

use num_bigint::{BigInt, BigUint, RandBigInt};
use rand::Rng;

use crate::pwf::{from_cuts, Label, Piecewise};
use crate::rational::Rational;
use crate::sb::{sb_decode, SbEncoding, SbSign};
use crate::sfa::SymbolicAutomaton;

/// A random run length: first a bit length up to `max_bits`, then a value
/// of that length, so that small and huge runs are both common.
fn random_run<R: Rng + ?Sized>(rng: &mut R, max_bits: u64) -> BigUint {
    let bits = rng.gen_range(1..=max_bits.max(1));
    let low = BigUint::from(1u32) << (bits - 1);
    let high = BigUint::from(1u32) << bits;
    rng.gen_biguint_range(&low, &high)
}

/// A random encoding with up to `max_runs` runs, each below `2^max_bits`.
pub fn random_encoding<R: Rng + ?Sized>(rng: &mut R, max_runs: usize, max_bits: u64) -> SbEncoding {
    if rng.gen_ratio(1, 64) {
        return SbEncoding::zero();
    }
    let sign = if rng.gen_bool(0.5) { SbSign::Positive } else { SbSign::Negative };
    let n = rng.gen_range(1..=max_runs.max(1));
    let runs = (0..n).map(|_| random_run(rng, max_bits)).collect();
    SbEncoding::new(sign, runs).expect("runs are positive")
}

/// A random rational at a random tree position.
pub fn random_tree_rational<R: Rng + ?Sized>(rng: &mut R, max_runs: usize, max_bits: u64) -> Rational {
    sb_decode(&random_encoding(rng, max_runs, max_bits))
}

/// A random rational with numerator and denominator below `2^bits`.
pub fn random_fraction<R: Rng + ?Sized>(rng: &mut R, bits: u64) -> Rational {
    let num = rng.gen_biguint(bits);
    let den = rng.gen_biguint(bits) + 1u32;
    let num = if rng.gen_bool(0.5) { -BigInt::from(num) } else { BigInt::from(num) };
    Rational::new(num, BigInt::from(den)).expect("denominator is positive")
}

/// A random positive rational with numerator and denominator below `2^bits`.
pub fn random_positive<R: Rng + ?Sized>(rng: &mut R, bits: u64) -> Rational {
    let num = rng.gen_biguint(bits) + 1u32;
    let den = rng.gen_biguint(bits) + 1u32;
    Rational::new(BigInt::from(num), BigInt::from(den)).expect("denominator is positive")
}

/// Builds a canonical function from distinct sorted cut points: random
/// closedness, an occasional singleton piece, and labels drawn so that
/// neighbours always differ.
pub fn function_from_points<R: Rng + ?Sized, L: Clone>(rng: &mut R, points: &[Rational], alphabet: &[L]) -> Piecewise<L> {
    assert!(alphabet.len() >= 2, "need two labels to alternate");
    let mut cuts = Vec::with_capacity(points.len() + 1);
    for q in points {
        if rng.gen_ratio(1, 10) {
            cuts.push((q.clone(), false));
            cuts.push((q.clone(), true));
        } else {
            cuts.push((q.clone(), rng.gen_bool(0.5)));
        }
    }
    let mut labels = Vec::with_capacity(cuts.len() + 1);
    let mut prev = rng.gen_range(0..alphabet.len());
    labels.push(alphabet[prev].clone());
    for _ in 0..cuts.len() {
        let mut next = rng.gen_range(0..alphabet.len() - 1);
        if next >= prev {
            next += 1;
        }
        labels.push(alphabet[next].clone());
        prev = next;
    }
    from_cuts(labels, &cuts).expect("sorted distinct cut points form a partition")
}

pub fn default_alphabet() -> Vec<Label> {
    ["A", "B", "C"].iter().map(|s| Label::new(*s).expect("non-empty")).collect()
}

fn sorted_distinct(mut points: Vec<Rational>) -> Vec<Rational> {
    points.sort();
    points.dedup();
    points
}

/// A random canonical target: up to 32 pieces, endpoints at random tree
/// positions with up to 8 runs of up to 64 bits each.
pub fn random_target<R: Rng + ?Sized>(rng: &mut R) -> Piecewise<Label> {
    random_target_with(rng, 32, 8, 64)
}

/// [`random_target`] with explicit limits.
pub fn random_target_with<R: Rng + ?Sized>(rng: &mut R, max_pieces: usize, max_runs: usize, max_bits: u64) -> Piecewise<Label> {
    let k = rng.gen_range(1..=max_pieces.max(1));
    let points = (0..k - 1).map(|_| random_tree_rational(rng, max_runs, max_bits)).collect();
    function_from_points(rng, &sorted_distinct(points), &default_alphabet())
}

/// A target for the size sweep: `pieces - 1` cut points whose numerators
/// and denominators have about `bits / 2` bits each, so that endpoint sizes
/// are about `bits`.
pub fn sweep_target<R: Rng + ?Sized>(rng: &mut R, pieces: usize, bits: u64) -> Piecewise<Label> {
    let half = (bits / 2).max(1);
    let points = (0..pieces.saturating_sub(1)).map(|_| random_fraction(rng, half)).collect();
    function_from_points(rng, &sorted_distinct(points), &default_alphabet())
}

/// A random total automaton with `states` states whose guards have up to
/// `max_pieces` pieces with endpoints of about `bits` bits. Successor
/// labels of neighbouring pieces differ.
pub fn random_sfa<R: Rng + ?Sized>(rng: &mut R, states: usize, max_pieces: usize, bits: u64) -> SymbolicAutomaton {
    assert!(states >= 1);
    let ids: Vec<usize> = (0..states).collect();
    let guards = (0..states)
        .map(|_| {
            if states == 1 {
                return Piecewise::constant(0);
            }
            let k = rng.gen_range(1..=max_pieces.max(1));
            let half = (bits / 2).max(1);
            let points = (0..k - 1).map(|_| random_fraction(rng, half)).collect();
            function_from_points(rng, &sorted_distinct(points), &ids)
        })
        .collect();
    let finals = (0..states).map(|_| rng.gen_bool(0.5)).collect();
    SymbolicAutomaton::with_default_names(0, finals, guards).expect("successors are in range")
}

/// A random word of up to `max_len` letters with about `bits`-bit parts.
pub fn random_word<R: Rng + ?Sized>(rng: &mut R, max_len: usize, bits: u64) -> Vec<Rational> {
    let n = rng.gen_range(0..=max_len);
    (0..n).map(|_| random_fraction(rng, bits)).collect()
}

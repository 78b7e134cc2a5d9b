//! Automaton learning on random targets, certified independently of the
//! teacher's equivalence answers.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sblearn::gen::random_sfa;
use sblearn::sfa::{make_sfa_teacher, temperature_automaton};
use sblearn::sfa_learner::{learn_sfa, ObservationTable};
use sblearn::teacher::{EqAnswer, EquivalenceOracle, FnEquivalence};
use sblearn::{Rational, SymbolicAutomaton, Word};

#[test]
fn learns_random_automata_exactly() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for n in 1..=6 {
        for bits in [4, 8, 16, 32] {
            let target = random_sfa(&mut rng, n, 4, bits);
            let (mut mq, mut eq) = make_sfa_teacher(&target);
            let report = learn_sfa(&mut mq, &mut eq).unwrap();
            assert!(report.result.equivalent(&target), "n={n} bits={bits}");
            assert!(report.result.num_states() <= n);
            assert_eq!(report.word_mq_count, mq.count());
            assert_eq!(report.sfa_eq_count, eq.count());
        }
    }
}

#[test]
fn table_invariants_hold_at_every_hypothesis() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..12 {
        let n = rng.gen_range(2..=5);
        let target = random_sfa(&mut rng, n, 4, 12);
        let (mut mq, mut eq) = make_sfa_teacher(&target);
        let mut table = ObservationTable::new(&mut mq).unwrap();
        loop {
            assert!(table.is_closed() && table.is_reduced() && table.is_prefix_closed());
            assert_eq!(table.access_words().len(), table.rows().len());
            for (s, u) in table.access_words().iter().enumerate() {
                for (j, v) in table.suffixes().iter().enumerate() {
                    let mut w = u.clone();
                    w.extend(v.iter().cloned());
                    assert_eq!(table.rows()[s][j], target.accepts(&w));
                }
            }
            match eq.check(&table.hypothesis()) {
                EqAnswer::Equal => break,
                EqAnswer::Counterexample(w) => {
                    table.process_counterexample(&w).unwrap();
                }
            }
        }
    }
}

#[test]
fn long_counterexample_is_split_with_logarithmic_queries() {
    let target = temperature_automaton();
    let mut word: Word = vec![Rational::from(1); 16];
    word[9] = Rational::from(7);
    word[12] = Rational::from(14);
    assert!(target.accepts(&word));
    let (mut mq, _) = make_sfa_teacher(&target);
    let mut table = ObservationTable::new(&mut mq).unwrap();
    let out = table.process_counterexample(&word).unwrap();
    assert!(out.split_queries <= 5, "{} split queries", out.split_queries);
    assert_eq!(out.letter, Rational::from(7));
}

#[test]
fn guard_queries_grow_with_boundary_size() {
    // a single guard boundary at 2^b / 3 at the initial state
    let mut per_bit = Vec::new();
    for b in [4u32, 8, 16, 32, 64] {
        let q = Rational::new(num_bigint::BigInt::from(1u8) << b, 3).unwrap();
        let g0 = sblearn::pwf::from_cuts(vec![0, 1], &[(q.clone(), true)]).unwrap();
        let target = SymbolicAutomaton::with_default_names(
            0,
            vec![false, true],
            vec![g0, sblearn::Piecewise::constant(1)],
        )
        .unwrap();
        let (mut mq, mut eq) = make_sfa_teacher(&target);
        let report = learn_sfa(&mut mq, &mut eq).unwrap();
        assert!(report.result.equivalent(&target));
        let inner = report.guards[0].mq_count;
        per_bit.push(inner as f64 / q.bit_size() as f64);
    }
    let max = per_bit.iter().cloned().fold(0.0, f64::max);
    assert!(max <= 4.0, "{per_bit:?}");
}

#[test]
fn equivalence_answers_are_trusted_only_through_counterexamples() {
    // a teacher whose counterexamples are long and deep still leads to the target
    let target = temperature_automaton();
    let (mut mq, _) = make_sfa_teacher(&target);
    let t = target.clone();
    let mut eq = FnEquivalence(move |h: &SymbolicAutomaton| {
        let diff = t.product(h, sblearn::Combine::Difference);
        match diff.find_accepted_word() {
            None => EqAnswer::Equal,
            Some(mut w) => {
                let mut padded: Word = vec!["1/1000003".parse().unwrap(); 5];
                padded.append(&mut w);
                if t.accepts(&padded) != h.accepts(&padded) {
                    EqAnswer::Counterexample(padded)
                } else {
                    EqAnswer::Counterexample(diff.find_accepted_word().unwrap())
                }
            }
        }
    });
    let report = learn_sfa(&mut mq, &mut eq).unwrap();
    assert!(report.result.equivalent(&target));
    assert!(report.longest_counterexample >= 6);
}

//! Engine against the brute-force oracles on small random inputs.

use proptest::prelude::*;
use spectra_core::assembly::{check_consistency, find_consistent_assembly};
use spectra_core::oracle::{
    brute_consistent, brute_lcrit, brute_maximal_pairs, enumerate_consistent, exact_center_m, OracleBudget,
};
use spectra_core::reads::{apply_erasures, spectrum_seeded, ErasureStrategy, ReadSet, StrategyKind};
use spectra_core::repeats::{Mode, RepeatAnalyzer};
use spectra_core::sequence::CircularSequence;

fn aperiodic(alphabet: &'static [u8], lens: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = CircularSequence> {
    prop::collection::vec(prop::sample::select(alphabet), lens)
        .prop_map(|v| CircularSequence::new(v).unwrap())
        .prop_filter("aperiodic", |s| s.is_theorem_grade())
}

fn strategy_kind() -> impl Strategy<Value = StrategyKind> {
    prop::sample::select(StrategyKind::ALL.to_vec())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn maximal_pairs_match_scan(s in aperiodic(b"ACGT", 3..=30)) {
        let mut engine: Vec<(usize, usize, usize)> = RepeatAnalyzer::new(&s)
            .maximal_repeats()
            .iter()
            .map(|p| (p.pos1.min(p.pos2), p.pos1.max(p.pos2), p.length))
            .collect();
        engine.sort_unstable();
        let mut brute = brute_maximal_pairs(&s);
        brute.sort_unstable();
        prop_assert_eq!(engine, brute);
    }

    #[test]
    fn l_crit_matches_oracle(s in aperiodic(b"AC", 3..=24)) {
        let a = RepeatAnalyzer::new(&s);
        let brute = brute_lcrit(&s, &OracleBudget::default()).unwrap();
        prop_assert_eq!(a.l_crit(), brute.l_crit);
        let (l_inter, witness) = a.interleaved_length();
        prop_assert_eq!(l_inter, brute.l_inter);
        prop_assert_eq!(witness.is_some(), brute.witness.is_some());
    }

    #[test]
    fn exact_m_matches_centre_enumeration(s in aperiodic(b"ACGT", 4..=20), d in 0usize..3, l in 1usize..6) {
        prop_assume!(l <= s.len());
        let e = RepeatAnalyzer::new(&s).m_bound(d, l, Mode::Exact).unwrap();
        prop_assert!(e.exact);
        prop_assert_eq!(e.upper, exact_center_m(&s, d, l, &OracleBudget::default()).unwrap());
    }

    #[test]
    fn consistency_matches_brute(
        s in aperiodic(b"AC", 5..=10),
        flips in prop::collection::vec(prop::bool::weighted(0.2), 10),
        kind in strategy_kind(),
        seed in 0u64..4,
    ) {
        let t: Vec<u8> = s
            .symbols()
            .iter()
            .zip(&flips)
            .map(|(&b, &f)| if f { if b == b'A' { b'C' } else { b'A' } } else { b })
            .collect();
        let t = CircularSequence::new(t).unwrap();
        let l = 4.min(s.len());
        let d = 1;
        let rs = apply_erasures(&spectrum_seeded(&s, l, seed).unwrap(), &s, d, ErasureStrategy::new(kind, seed)).unwrap();
        let reads: Vec<&[u8]> = rs.reads.iter().map(|r| r.as_bytes()).collect();
        let engine = check_consistency(&t, &rs, d).unwrap().is_some();
        prop_assert_eq!(engine, brute_consistent(t.symbols(), &reads, d));
    }

    #[test]
    fn found_assembly_is_an_enumerated_class(s in aperiodic(b"AC", 5..=11), kind in strategy_kind(), seed in 0u64..4) {
        let l = 5.min(s.len());
        let d = 1;
        let rs: ReadSet = apply_erasures(&spectrum_seeded(&s, l, seed).unwrap(), &s, d, ErasureStrategy::new(kind, seed))
            .unwrap()
            .without_origins();
        let (_, consensus) = find_consistent_assembly(&rs, d).unwrap();
        let classes = enumerate_consistent(&rs, d, b"AC", s.len(), &OracleBudget::default()).unwrap();
        prop_assert!(classes.iter().any(|c| c.rotation_equal(&consensus)));
        prop_assert!(classes.iter().any(|c| c.rotation_equal(&s)));
    }
}

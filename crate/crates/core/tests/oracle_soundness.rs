use gtkit::decoders::{Algorithm, DecodeResult};
use gtkit::design::{DesignKind, DesignMatrix, DesignSpec};
use gtkit::metrics::confusion;
use gtkit::model::{run_tests, sample_defective_set, ItemSet, OutcomeVector};
use gtkit::oracle::{
    brute_force_unweighted_moments, brute_force_weighted_moments, consistent_sets, verify_suite, VerifyConfig,
};
use gtkit::seed::derive_seed;
use gtkit::sim::run_trial_detailed;
use gtkit::theory;

fn instances() -> impl Iterator<Item = (DesignMatrix, ItemSet, OutcomeVector)> {
    (0..3000u64).map(|s| {
        let n = 4 + (s % 11) as usize;
        let k = (s % 4) as usize;
        let t = 2 + (s % 13) as usize;
        let seed = derive_seed(99, &[s]);
        let spec = match s % 3 {
            0 => DesignSpec::bernoulli(n, t, 0.3, seed),
            1 => DesignSpec::constant_column(n, t, 2.min(t), seed),
            _ => DesignSpec::near_constant_column(n, t, 3, seed),
        };
        let x = spec.generate().unwrap();
        let truth = sample_defective_set(n, k, derive_seed(seed, &[1])).unwrap();
        let y = run_tests(&x, &truth).unwrap();
        (x, truth, y)
    })
}

#[test]
fn decoders_agree_with_consistent_sets() {
    let mut unique_cases = 0;
    for (x, truth, y) in instances() {
        let sets = consistent_sets(&x, &y, truth.len()).unwrap();
        assert!(sets.contains(&truth));
        if sets.len() == 1 {
            unique_cases += 1;
            assert_eq!(sets[0], truth);
        }
        let c = Algorithm::Comp.decode(&x, &y, 1.0).unwrap();
        for s in &sets {
            assert!(s.is_subset(&c.estimate));
        }
        for algo in Algorithm::ALL {
            let d: DecodeResult = algo.decode(&x, &y, 1.0).unwrap();
            if confusion(&truth, &d.estimate).unwrap().exact {
                assert!(sets.contains(&d.estimate), "{algo}");
            }
        }
    }
    assert!(unique_cases > 100);
}

#[test]
fn worked_instance_trial_stats() {
    let x = DesignMatrix::from_rows(4, 5, vec![vec![0, 1], vec![0, 2], vec![1, 2, 3], vec![4]]).unwrap();
    let truth = ItemSet::new(5, [0, 1]).unwrap();
    let y = run_tests(&x, &truth).unwrap();
    assert_eq!(y.bits(), &[true, true, true, false]);
    let stats = |algo: Algorithm| confusion(&truth, &algo.decode(&x, &y, 1.0).unwrap().estimate).unwrap();
    assert!(stats(Algorithm::Scomp).exact);
    assert!(stats(Algorithm::WScomp).exact);
    let dd = stats(Algorithm::Dd);
    assert_eq!((dd.misclassified, dd.false_negatives), (2, 2));
    let comp = stats(Algorithm::Comp);
    assert_eq!((comp.misclassified, comp.false_positives), (2, 2));
}

#[test]
fn sampled_trials_respect_the_sandwich() {
    for s in 0..200u64 {
        let spec = DesignSpec::bernoulli(200, 60, 1.0 / 6.0, 0);
        let rec = run_trial_detailed(200, 5, &spec, &Algorithm::ALL, 1.0, s).unwrap();
        let est = |a: Algorithm| &rec.results.iter().find(|r| r.0 == a).unwrap().1.estimate;
        let (c, d, sc, w) = (
            est(Algorithm::Comp),
            est(Algorithm::Dd),
            est(Algorithm::Scomp),
            est(Algorithm::WScomp),
        );
        assert!(d.is_subset(sc) && sc.is_subset(c));
        assert!(d.is_subset(w) && w.is_subset(c));
        for (algo, _, stats) in &rec.results {
            match algo {
                Algorithm::Comp => assert_eq!(stats.false_negatives, 0),
                Algorithm::Dd => assert_eq!(stats.false_positives, 0),
                _ => {}
            }
        }
    }
}

#[test]
fn full_verify_suite_passes() {
    for r in verify_suite(&VerifyConfig::default()).unwrap() {
        assert!(r.passed(), "{r:?}");
    }
}

#[test]
fn enumeration_matches_theory_at_the_cap() {
    let w = brute_force_weighted_moments(16, 4, 0.2f64).unwrap().moments;
    let t = theory::weighted_moments(16, 4, 0.2f64).unwrap();
    assert!((w.mu_nd - t.mu_nd).abs() < 1e-12 && (w.nu_d - t.nu_d).abs() < 1e-12);
    let u = brute_force_unweighted_moments(4, 0.2f64, 16).unwrap().moments;
    assert!((u.mu_nd - t.p * theory::coverage_prob(4, 0.2)).abs() < 1e-12);
}

#[test]
fn design_kind_names_roundtrip() {
    for kind in [
        DesignKind::Bernoulli,
        DesignKind::ConstantColumn,
        DesignKind::NearConstantColumn,
        DesignKind::Explicit,
    ] {
        assert_eq!(kind.as_str().parse::<DesignKind>().unwrap(), kind);
    }
}

//! Distributional checks at fixed seed schedules.

use gtkit::design::DesignSpec;
use gtkit::model::{run_tests, sample_defective_set};
use gtkit::seed::derive_seed;
use gtkit::theory::coverage_prob;
use statrs::distribution::{ChiSquared, ContinuousCDF};

const SAMPLES: u64 = 10_000;

fn chi_square_p_value(counts: &[u64], expected: f64) -> f64 {
    let stat: f64 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
    let dist = ChiSquared::new((counts.len() - 1) as f64).unwrap();
    1.0 - dist.cdf(stat)
}

#[test]
fn constant_column_choice_is_uniform() {
    let mut counts = [[0u64; 3]; 2];
    for s in 0..SAMPLES {
        let m = DesignSpec::constant_column(2, 3, 1, derive_seed(11, &[s]))
            .generate()
            .unwrap();
        for (i, c) in counts.iter_mut().enumerate() {
            let tests = m.tests_of(i);
            assert_eq!(tests.len(), 1);
            c[tests[0]] += 1;
        }
    }
    for c in &counts {
        let p = chi_square_p_value(c, SAMPLES as f64 / 3.0);
        assert!(p > 0.001, "counts {c:?}, p-value {p}");
    }
}

#[test]
fn constant_column_pairs_are_uniform() {
    // L = 2 of T = 4: six equally likely subsets
    let pairs = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];
    let mut counts = [0u64; 6];
    for s in 0..SAMPLES {
        let m = DesignSpec::constant_column(1, 4, 2, derive_seed(12, &[s]))
            .generate()
            .unwrap();
        let col = m.tests_of(0);
        let idx = pairs.iter().position(|&(a, b)| col == [a, b]).unwrap();
        counts[idx] += 1;
    }
    let p = chi_square_p_value(&counts, SAMPLES as f64 / 6.0);
    assert!(p > 0.001, "counts {counts:?}, p-value {p}");
}

#[test]
fn near_constant_column_distinct_count_mean() {
    // 5 (1 - (1 - 1/5)^3) = 2.44
    let expected = 5.0 * (1.0 - 0.8f64.powi(3));
    let weights: Vec<f64> = (0..SAMPLES)
        .map(|s| {
            let m = DesignSpec::near_constant_column(1, 5, 3, derive_seed(13, &[s]))
                .generate()
                .unwrap();
            m.tests_of(0).len() as f64
        })
        .collect();
    let n = weights.len() as f64;
    let mean = weights.iter().sum::<f64>() / n;
    let var = weights.iter().map(|w| (w - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let se = (var / n).sqrt();
    assert!(
        (mean - expected).abs() <= 3.0 * se,
        "mean {mean}, expected {expected}, se {se}"
    );
}

#[test]
fn bernoulli_cell_frequency_converges() {
    let p = 0.3;
    let reps = 4000u64;
    let mut hits = [0u64; 4 * 5];
    for s in 0..reps {
        let m = DesignSpec::bernoulli(5, 4, p, derive_seed(14, &[s]))
            .generate()
            .unwrap();
        for t in 0..4 {
            for &i in m.pool(t) {
                hits[t * 5 + i] += 1;
            }
        }
    }
    let se = (p * (1.0 - p) / reps as f64).sqrt();
    for (cell, &h) in hits.iter().enumerate() {
        let freq = h as f64 / reps as f64;
        assert!((freq - p).abs() <= 4.0 * se, "cell {cell}: {freq}");
    }
}

#[test]
fn defective_sets_are_uniform() {
    // k = 2 of N = 5: ten equally likely subsets
    let mut counts = [0u64; 10];
    for s in 0..SAMPLES {
        let set = sample_defective_set(5, 2, derive_seed(15, &[s])).unwrap();
        let m = set.members();
        let (a, b) = (m[0], m[1]);
        // lexicographic rank of {a, b} among 2-subsets of 0..5
        let rank = (0..a).map(|x| 4 - x).sum::<usize>() + (b - a - 1);
        counts[rank] += 1;
    }
    let p = chi_square_p_value(&counts, SAMPLES as f64 / 10.0);
    assert!(p > 0.001, "counts {counts:?}, p-value {p}");
}

#[test]
fn non_defective_test_positivity_matches_coverage() {
    // P(Y_t = 1 | X_{t,i} = 1, i not defective) = q(k)
    let (n, k, t) = (60, 4, 30);
    let p = 1.0 / (k as f64 + 1.0);
    let (mut hits, mut total) = (0u64, 0u64);
    for s in 0..20_000u64 {
        let m = DesignSpec::bernoulli(n, t, p, derive_seed(16, &[s, 0]))
            .generate()
            .unwrap();
        let truth = sample_defective_set(n, k, derive_seed(16, &[s, 1])).unwrap();
        let y = run_tests(&m, &truth).unwrap();
        // one focal non-defective per replicate
        let focal = (0..n).find(|&i| !truth.contains(i)).unwrap();
        for &test in m.tests_of(focal) {
            total += 1;
            hits += u64::from(y.is_positive(test));
        }
    }
    let q = coverage_prob(k, p);
    let freq = hits as f64 / total as f64;
    let se = (q * (1.0 - q) / total as f64).sqrt();
    assert!((freq - q).abs() <= 4.0 * se, "freq {freq}, q {q}, se {se}");
}

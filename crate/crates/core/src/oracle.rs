//! Brute-force references.
//!
//! The moment oracles enumerate every inclusion pattern of a single test
//! (all `2^N` subsets of items) and take the probability-weighted average of
//! the per-test score, so they share no algebra with [`crate::theory`].
//! [`consistent_sets`] enumerates every size-`k` defective set that
//! reproduces an outcome vector.
//!
//! [`verify_suite`] runs the oracle comparisons together with the closed-form
//! identity and SNR-dominance checks; the `gt verify` command is a thin
//! wrapper around it.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::design::DesignMatrix;
use crate::error::{Error, Result};
use crate::model::{run_tests, ItemSet, OutcomeVector};
use crate::scalar::Scalar;
use crate::theory::{self, MomentSet, ScoringRule};

/// Largest universe the moment enumeration accepts.
pub const MAX_ENUMERATION_ITEMS: usize = 16;
/// Largest number of candidate sets [`consistent_sets`] will try.
pub const MAX_CONSISTENT_CANDIDATES: u128 = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnumerationMethod {
    ExhaustivePatterns,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnumeratedMoments<F> {
    #[serde(flatten)]
    pub moments: MomentSet<F>,
    pub method: EnumerationMethod,
}

/// Item 0 is the focal item. For a defective focal item the other `k - 1`
/// defectives are items `1..k`; for a non-defective focal item the `k`
/// defectives are items `1..=k`.
fn enumerate<F: Scalar>(n: usize, k: usize, p: F, rule: ScoringRule) -> Result<EnumeratedMoments<F>> {
    if n > MAX_ENUMERATION_ITEMS {
        return Err(Error::BudgetExceeded(format!(
            "pattern enumeration supports N <= {MAX_ENUMERATION_ITEMS}, got N = {n}"
        )));
    }
    theory_domain(n, k)?;
    if !(p > F::zero() && p <= F::one()) {
        return Err(Error::param(format!("oracle needs 0 < p <= 1, got {p}")));
    }

    let score = |pool_size: u32| match rule {
        ScoringRule::Weighted => F::one() / F::of(pool_size as usize),
        ScoringRule::Unweighted => F::one(),
    };
    let focal_included = |mask: u32| mask & 1 == 1;
    let prob = |mask: u32| {
        let ones = mask.count_ones() as i32;
        p.powi(ones) * (F::one() - p).powi(n as i32 - ones)
    };
    // Defective-focal case: defectives are {0} ∪ {1..k}; non-defective-focal
    // case: defectives are {1..=k}.
    let def_mask_d: u32 = (1u32 << k) - 1;
    let def_mask_nd: u32 = ((1u32 << (k + 1)) - 1) & !1;

    let mut included = F::zero();
    let mut covered = F::zero();
    let (mut mu_d, mut nu_d, mut mu_nd, mut nu_nd) = (F::zero(), F::zero(), F::zero(), F::zero());
    for mask in 0u32..(1u32 << n) {
        let w = prob(mask);
        if mask & def_mask_nd != 0 {
            covered += w;
        }
        if !focal_included(mask) {
            continue;
        }
        included += w;
        let s = score(mask.count_ones());
        if mask & def_mask_d != 0 {
            mu_d += w * s;
            nu_d += w * s * s;
        }
        if mask & def_mask_nd != 0 {
            mu_nd += w * s;
            nu_nd += w * s * s;
        }
    }
    Ok(EnumeratedMoments {
        moments: MomentSet::assemble(rule, included, covered, mu_d, nu_d, mu_nd, nu_nd),
        method: EnumerationMethod::ExhaustivePatterns,
    })
}

fn theory_domain(n: usize, k: usize) -> Result<()> {
    if k < 1 || k >= n {
        return Err(Error::param(format!("need 1 <= k < N, got N = {n}, k = {k}")));
    }
    Ok(())
}

/// Exact per-test moments of the weighted score `1{X_ti=1, Y_t=1} / |T_t|`.
pub fn brute_force_weighted_moments<F: Scalar>(n: usize, k: usize, p: F) -> Result<EnumeratedMoments<F>> {
    enumerate(n, k, p, ScoringRule::Weighted)
}

/// Exact per-test moments of the indicator `1{X_ti=1, Y_t=1}`.
pub fn brute_force_unweighted_moments<F: Scalar>(k: usize, p: F, n: usize) -> Result<EnumeratedMoments<F>> {
    enumerate(n, k, p, ScoringRule::Unweighted)
}

fn n_choose_k(n: usize, k: usize) -> u128 {
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// Every size-`k` set whose OR outcomes equal `outcomes`, in lexicographic order.
pub fn consistent_sets(design: &DesignMatrix, outcomes: &OutcomeVector, k: usize) -> Result<Vec<ItemSet>> {
    let n = design.n_items();
    if outcomes.len() != design.n_tests() {
        return Err(Error::DimensionMismatch {
            what: "outcome vector",
            expected: design.n_tests(),
            found: outcomes.len(),
        });
    }
    if k > n {
        return Err(Error::param(format!("k = {k} exceeds N = {n}")));
    }
    let total = n_choose_k(n, k);
    if total > MAX_CONSISTENT_CANDIDATES {
        return Err(Error::BudgetExceeded(format!(
            "C({n}, {k}) = {total} candidate sets exceeds {MAX_CONSISTENT_CANDIDATES}"
        )));
    }

    let mut found = Vec::new();
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        let candidate = ItemSet::new(n, idx.iter().copied())?;
        if run_tests(design, &candidate)? == *outcomes {
            found.push(candidate);
        }
        // next combination in lexicographic order
        let Some(pos) = (0..k).rev().find(|&j| idx[j] < n - k + j) else {
            break;
        };
        idx[pos] += 1;
        for j in pos + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
    Ok(found)
}

/// Outcome of one named check in [`verify_suite`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub name: String,
    pub cases: usize,
    /// Largest deviation observed (absolute or relative, see `tolerance_kind`).
    pub worst_deviation: f64,
    pub tolerance: f64,
    pub tolerance_kind: ToleranceKind,
    pub failures: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ToleranceKind {
    Absolute,
    Relative,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyConfig {
    /// Largest `N` for the pattern-enumeration comparisons.
    pub n_max: usize,
    /// Largest `N` for the closed-form identity grid.
    pub identity_n_max: usize,
    /// Largest `k` for the closed-form identity grid.
    pub identity_k_max: usize,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            n_max: 12,
            identity_n_max: 200,
            identity_k_max: 20,
        }
    }
}

/// Inclusion probabilities used by the oracle comparison for a given `k`.
pub fn oracle_probabilities(k: usize) -> [f64; 4] {
    [0.1, 0.25, 0.5, 1.0 / (k as f64 + 1.0)]
}

/// Inclusion probabilities used by the general-`p` identity checks.
pub fn identity_probabilities(k: usize) -> [f64; 3] {
    [0.1, 0.25, 1.0 / (k as f64 + 1.0)]
}

fn rel_dev(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

struct Tally {
    cases: usize,
    worst: f64,
    failures: usize,
}

impl Tally {
    fn of(devs: impl Iterator<Item = (f64, bool)>) -> Self {
        devs.fold(
            Tally {
                cases: 0,
                worst: 0.0,
                failures: 0,
            },
            |mut t, (dev, ok)| {
                t.cases += 1;
                t.worst = if dev.is_nan() { f64::NAN } else { t.worst.max(dev) };
                t.failures += usize::from(!ok || dev.is_nan());
                t
            },
        )
    }

    fn report(self, name: &str, tolerance: f64, tolerance_kind: ToleranceKind) -> CheckReport {
        CheckReport {
            name: name.to_string(),
            cases: self.cases,
            worst_deviation: self.worst,
            tolerance,
            tolerance_kind,
            failures: self.failures,
        }
    }
}

fn max_moment_gap(a: &MomentSet<f64>, b: &MomentSet<f64>) -> f64 {
    [
        (a.mu_d - b.mu_d).abs(),
        (a.nu_d - b.nu_d).abs(),
        (a.mu_nd - b.mu_nd).abs(),
        (a.nu_nd - b.nu_nd).abs(),
    ]
    .into_iter()
    .fold(0.0, f64::max)
}

/// Enumerated vs closed-form moments for every `N <= n_max`, `1 <= k < N`
/// and every probability in [`oracle_probabilities`]. Absolute tolerance 1e-12.
pub fn check_oracle_moments(n_max: usize) -> Result<[CheckReport; 2]> {
    let points: Vec<(usize, usize, f64)> = (2..=n_max.min(MAX_ENUMERATION_ITEMS))
        .flat_map(|n| (1..n).flat_map(move |k| oracle_probabilities(k).map(|p| (n, k, p))))
        .collect();
    let gaps: Vec<(f64, f64)> = points
        .par_iter()
        .map(|&(n, k, p)| -> Result<(f64, f64)> {
            let w = max_moment_gap(
                &brute_force_weighted_moments(n, k, p)?.moments,
                &theory::weighted_moments(n, k, p)?,
            );
            let u = max_moment_gap(
                &brute_force_unweighted_moments(k, p, n)?.moments,
                &theory::unweighted_moments(k, p)?,
            );
            Ok((w, u))
        })
        .collect::<Result<_>>()?;
    let tol = 1e-12;
    Ok([
        Tally::of(gaps.iter().map(|&(w, _)| (w, w <= tol))).report(
            "oracle_weighted_moments",
            tol,
            ToleranceKind::Absolute,
        ),
        Tally::of(gaps.iter().map(|&(_, u)| (u, u <= tol))).report(
            "oracle_unweighted_moments",
            tol,
            ToleranceKind::Absolute,
        ),
    ])
}

/// The closed-form identities against their moment-sum assemblies on
/// `N <= n_max`, `k <= min(k_max, N - 1)`. Relative tolerance 1e-10.
pub fn check_identities(n_max: usize, k_max: usize) -> Result<[CheckReport; 4]> {
    let nk: Vec<(usize, usize)> = (2..=n_max)
        .flat_map(|n| (1..n.min(k_max + 1)).map(move |k| (n, k)))
        .collect();
    let tol = 1e-10;
    let rows: Vec<[f64; 4]> = nk
        .par_iter()
        .map(|&(n, k)| -> Result<[f64; 4]> {
            let mut worst = [0.0f64; 4];
            for p in identity_probabilities(k) {
                let base = theory::base_moment_sums(n, k, p)?;
                worst[0] = worst[0].max(rel_dev(p * base.e_wd, theory::mu_d_closed_form(n, p)));
                worst[1] = worst[1].max(rel_dev(base.e_wd - base.q_e_wnd, theory::numerator_identity(n, k, p)?));
                worst[3] = worst[3].max(rel_dev(base.e_wd2 + base.q_e_wnd2, theory::second_moment_sum(n, k, p)?));
            }
            let p = 1.0 / (k as f64 + 1.0);
            let e_wnd = theory::base_moment_sums(n, k, p)?.e_wnd;
            worst[2] = rel_dev(e_wnd, theory::mu_nd_closed_form(n, k)?);
            Ok(worst)
        })
        .collect::<Result<_>>()?;
    let names = [
        "mu_d_closed_form_vs_sum",
        "numerator_identity_vs_sums",
        "mu_nd_closed_form_vs_double_sum",
        "second_moment_sum_vs_sums",
    ];
    Ok(std::array::from_fn(|j| {
        Tally::of(rows.iter().map(|r| (r[j], r[j] <= tol))).report(names[j], tol, ToleranceKind::Relative)
    }))
}

/// SNR dominance, positivity of `f(N, k)` and agreement of its two
/// evaluations (relative 1e-9) over the given `(N, k)` points.
pub fn check_dominance(name: &str, points: &[(usize, usize)]) -> Result<CheckReport> {
    let tol = 1e-9;
    let rows: Vec<(f64, bool)> = points
        .par_iter()
        .map(|&(n, k)| -> Result<(f64, bool)> {
            let t = theory::f_value::<f64>(n, k)?;
            let dev = t.path_disagreement();
            let ok = theory::snr_dominance(n, k)? && t.f_value > 0.0 && t.residual_19 > 0.0 && dev <= tol;
            Ok((dev, ok))
        })
        .collect::<Result<_>>()?;
    Ok(Tally::of(rows.into_iter()).report(name, tol, ToleranceKind::Relative))
}

/// `(N, k)` points with `k = 1..=k_max`, `N = k+1..=k+n_span`.
pub fn grid_points(ks: impl IntoIterator<Item = usize>, n_span: usize) -> Vec<(usize, usize)> {
    ks.into_iter()
        .flat_map(|k| (k + 1..=k + n_span).map(move |n| (n, k)))
        .collect()
}

/// Jensen lower bounds never exceed the exact second moments.
pub fn check_jensen(points: &[(usize, usize)]) -> Result<CheckReport> {
    let rows: Vec<(f64, bool)> = points
        .par_iter()
        .map(|&(n, k)| -> Result<(f64, bool)> {
            let j = theory::jensen_bounds::<f64>(n, k)?;
            let base = theory::base_moment_sums(n, k, 1.0 / (k as f64 + 1.0))?;
            let excess = (j.lower_d - base.e_wd2).max(j.lower_nd - base.e_wnd2);
            Ok((excess.max(0.0), excess <= 1e-15))
        })
        .collect::<Result<_>>()?;
    Ok(Tally::of(rows.into_iter()).report("jensen_lower_bounds", 1e-15, ToleranceKind::Absolute))
}

/// Every check behind `gt verify`.
pub fn verify_suite(cfg: &VerifyConfig) -> Result<Vec<CheckReport>> {
    let mut reports = Vec::new();
    reports.extend(check_oracle_moments(cfg.n_max)?);
    reports.extend(check_identities(cfg.identity_n_max, cfg.identity_k_max)?);
    reports.push(check_dominance("snr_dominance_k1_10_span50", &grid_points(1..=10, 50))?);
    reports.push(check_dominance(
        "snr_dominance_k20_40_span200",
        &grid_points([20, 40], 200),
    )?);
    reports.push(check_jensen(&grid_points(1..=10, 50))?);
    Ok(reports)
}

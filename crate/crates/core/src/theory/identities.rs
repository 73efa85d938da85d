//! Exact identities behind the SNR comparison, and the positivity function
//! `f(N, k)` whose sign decides it.
//!
//! Most quantities here are evaluated at `p = 1/(k+1)`, where `1 - p = a` with
//! `a = k/(k+1)`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::binomial::{binomial_pmf, csum, one_minus_pow_complement, pow_complement, CompensatedSum};
use super::moments::{base_moment_sums, coverage_prob, unweighted_moments, weighted_moments};
use super::{check_nk, check_open_p, optimal_p, TheoryPoint};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// `E[W_D] - q E[W_ND] = (1-p)^k / ((N-k) p) * (1 - (1-p)^(N-k))`.
pub fn numerator_identity<F: Scalar>(n: usize, k: usize, p: F) -> Result<F> {
    check_nk(n, k)?;
    check_open_p(p)?;
    Ok(pow_complement(p, k) / (F::of(n - k) * p) * one_minus_pow_complement(p, n - k))
}

/// The same numerator assembled from the moment sums.
pub fn numerator_from_sums<F: Scalar>(n: usize, k: usize, p: F) -> Result<F> {
    let base = base_moment_sums(n, k, p)?;
    Ok(base.e_wd - base.q_e_wnd)
}

/// Closed form of `E[W_ND]` at `p = 1/(k+1)`.
pub fn mu_nd_closed_form<F: Scalar>(n: usize, k: usize) -> Result<F> {
    check_nk(n, k)?;
    let p = optimal_p::<F>(k);
    let ak = pow_complement(p, k);
    Ok(F::of(k + 1) / (F::one() - ak) * gap_term(n, k, p))
}

/// `(1 - a^N)/N - a^k (1 - a^(N-k))/(N-k)` with `a = 1 - p`.
fn gap_term<F: Scalar>(n: usize, k: usize, p: F) -> F {
    one_minus_pow_complement(p, n) / F::of(n) - pow_complement(p, k) * one_minus_pow_complement(p, n - k) / F::of(n - k)
}

/// `E[W_D^2] + q E[W_ND^2]` as two single binomial sums:
/// `(2/(Np)) Σ_{s=1..N} C(N,s) p^s (1-p)^(N-s) / s
///  - (1/(p(N-k))) Σ_{s=1..N-k} C(N-k,s) p^s (1-p)^(N-s) / s`.
pub fn second_moment_sum<F: Scalar>(n: usize, k: usize, p: F) -> Result<F> {
    check_nk(n, k)?;
    check_open_p(p)?;
    let over_s = |pmf: Vec<F>| csum(pmf.into_iter().enumerate().skip(1).map(|(s, w)| w / F::of(s)));
    let first = over_s(binomial_pmf(n, p));
    let second = over_s(binomial_pmf(n - k, p)) * pow_complement(p, k);
    Ok(F::of(2) * first / (F::of(n) * p) - second / (p * F::of(n - k)))
}

/// `E[W_D^2] + q E[W_ND^2]` from the single and double moment sums.
pub fn second_moment_from_sums<F: Scalar>(n: usize, k: usize, p: F) -> Result<F> {
    let base = base_moment_sums(n, k, p)?;
    Ok(base.e_wd2 + base.q_e_wnd2)
}

/// Which expression to use for the third coefficient function. The two
/// printed forms disagree; only [`F3Variant::Derivation`] makes
/// the expanded `f(N, k)` agree with the moment assembly.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum F3Variant {
    /// `q^2 (1 - 2pq + q)`.
    #[default]
    Derivation,
    /// `q^2 (1 + q - 2pq^2)`.
    SignAnalysis,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoefficientFunctions<F> {
    pub f1: F,
    pub f2: F,
    pub f3: F,
    pub f4: F,
}

/// `f1..f4` at `p = 1/(k+1)`.
pub fn coefficient_functions<F: Scalar>(k: usize) -> Result<CoefficientFunctions<F>> {
    coefficient_functions_with(k, F3Variant::Derivation)
}

pub fn coefficient_functions_with<F: Scalar>(k: usize, variant: F3Variant) -> Result<CoefficientFunctions<F>> {
    if k < 1 {
        return Err(Error::param("coefficient functions need k >= 1"));
    }
    let p = optimal_p::<F>(k);
    let q = coverage_prob(k, p);
    let one = F::one();
    let two = F::of(2);
    let f1 = one - two * p * q + q;
    let f3 = match variant {
        F3Variant::Derivation => q * q * f1,
        F3Variant::SignAnalysis => q * q * (one + q - two * p * q * q),
    };
    Ok(CoefficientFunctions {
        f1,
        f2: -two * q * (one - p + q * (one - p * q)),
        f3,
        f4: -(one - q) * (one - q),
    })
}

/// `f(N, k)` through the expanded closed form, and independently through the
/// moment-sum assembly.
pub fn f_value<F: Scalar>(n: usize, k: usize) -> Result<TheoryPoint<F>> {
    check_nk(n, k)?;
    let p = optimal_p::<F>(k);
    let q = coverage_prob(k, p);
    let c = coefficient_functions::<F>(k)?;

    let base = base_moment_sums(n, k, p)?;
    let residual_19 = csum([
        base.e_wd * base.e_wd * c.f1,
        base.e_wd * base.e_wnd * c.f2,
        base.e_wnd * base.e_wnd * c.f3,
        (base.e_wd2 + base.q_e_wnd2) * c.f4,
    ]);

    Ok(TheoryPoint {
        n_items: n,
        n_defectives: k,
        p,
        q,
        f1: c.f1,
        f2: c.f2,
        f3: c.f3,
        f4: c.f4,
        f_value: f_closed_form(n, k),
        residual_19,
    })
}

fn f_closed_form<F: Scalar>(n: usize, k: usize) -> F {
    let p = optimal_p::<F>(k);
    let kf = F::of(k);
    let nf = F::of(n);
    let k1 = F::of(k + 1);
    let ak = pow_complement(p, k);
    let ak2 = ak * ak;
    let ak3 = ak2 * ak;
    let one_minus_an = one_minus_pow_complement(p, n);
    let one_minus_ak = one_minus_pow_complement(p, k);
    let gap = gap_term(n, k, p);
    let int = |x: i64| F::from_i64(x).expect("small integer");
    let ki = k as i64;

    let t1 = k1 / (nf * nf) * (F::of(2) * kf - int(ki - 1) * ak) * one_minus_an * one_minus_an;
    let t2 = -k1 / nf * one_minus_an / one_minus_ak
        * gap
        * (F::of(4) * kf - int(6 * ki - 2) * ak + int(2 * ki - 4) * ak2 + F::of(2) * ak3);
    let t3 = k1 / (one_minus_ak * one_minus_ak)
        * gap
        * gap
        * (F::of(2) * kf - int(5 * ki - 1) * ak + int(4 * ki - 2) * ak2 - int(ki - 1) * ak3);

    // (k+1) a^(N+2k) [ (2/N) Σ C(N,s)/(s k^s) - 1/(N-k) Σ C(N-k,s)/(s k^s) ],
    // each summand formed in log space together with the prefactor.
    let ln_a = (-p).ln_1p();
    let ln_pre = F::of(n + 2 * k) * ln_a;
    let ln_k = kf.ln();
    let tail_sum = |m: usize| {
        let mut acc = CompensatedSum::new();
        let mut ln_c = F::zero();
        for s in 1..=m {
            ln_c += (F::of(m - s + 1) / F::of(s)).ln();
            acc.add((ln_pre + ln_c - F::of(s).ln() - F::of(s) * ln_k).exp());
        }
        acc.value()
    };
    let t4 = -k1 * (F::of(2) / nf * tail_sum(n) - tail_sum(n - k) / F::of(n - k));

    csum([t1, t2, t3, t4])
}

/// Jensen lower bounds on `E[W_D^2]` and `E[W_ND^2]` at `p = 1/(k+1)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct JensenBounds<F> {
    pub lower_d: F,
    pub lower_nd: F,
}

pub fn jensen_bounds<F: Scalar>(n: usize, k: usize) -> Result<JensenBounds<F>> {
    check_nk(n, k)?;
    let k1 = F::of(k + 1);
    let lower_d = (k1 / F::of(n + k)).powi(2);
    // (1 - k/(k+1))^k = (k+1)^(-k)
    let c = (-F::of(k) * k1.ln()).exp();
    let lower_nd = (k1 * c / (F::of(k) + F::of(n) * c)).powi(2);
    Ok(JensenBounds { lower_d, lower_nd })
}

/// One row of the `(k, N)` grid emitted by `gt theory f`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridRow<F> {
    pub k: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub f_value: F,
    pub residual_19: F,
    pub snr_w: F,
    pub snr_u: F,
}

/// `f(N, k)` and both SNRs for `k = 1..=k_max`, `N = k+1..=k+n_span`, in
/// row-major `(k, N)` order regardless of how the work is scheduled.
pub fn f_grid<F: Scalar>(k_max: usize, n_span: usize) -> Result<Vec<GridRow<F>>> {
    let points: Vec<(usize, usize)> = (1..=k_max)
        .flat_map(|k| (k + 1..=k + n_span).map(move |n| (k, n)))
        .collect();
    points
        .into_par_iter()
        .map(|(k, n)| {
            let p = optimal_p::<F>(k);
            let point = f_value::<F>(n, k)?;
            Ok(GridRow {
                k,
                n,
                f_value: point.f_value,
                residual_19: point.residual_19,
                snr_w: weighted_moments(n, k, p)?.snr_per,
                snr_u: unweighted_moments(k, p)?.snr_per,
            })
        })
        .collect()
}

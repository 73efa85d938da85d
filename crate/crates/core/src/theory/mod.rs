//! Closed-form analysis of the per-test scores of SCOMP and W-SCOMP under a
//! Bernoulli(p) design.
//!
//! For a focal item `i` and a single test `t`, the weighted contribution is
//! `W = 1{X_ti = 1, Y_t = 1} / w_t` and the unweighted one is
//! `U = 1{X_ti = 1, Y_t = 1}`. Their conditional moments given that `i` is
//! defective (`D`) or not (`ND`) drive the per-test signal-to-noise ratio
//! `(mu_D - mu_ND) / sqrt(sigma_D^2 + sigma_ND^2)`.
//!
//! Notation used throughout:
//! * `q = q(k) = 1 - (1-p)^k`, the probability that a test holding a given
//!   non-defective is positive;
//! * `E[W_D] = E[1/(1+Z)]`, `Z ~ Bin(N-1, p)`, and `E[W_ND]` the same
//!   expectation conditioned on at least one of the `k` defectives being
//!   pooled. These are the "base" moments with the `p` and `q` factors
//!   stripped off.

mod binomial;
mod bounds;
mod identities;
mod moments;

use serde::{Deserialize, Serialize};

pub use binomial::{binomial_pmf, csum, ln_choose, CompensatedSum};
pub use bounds::{bayes_bound, bernstein_bound, chebyshev_bound};
pub use identities::{
    coefficient_functions, coefficient_functions_with, f_grid, f_value, jensen_bounds, mu_nd_closed_form,
    numerator_from_sums, numerator_identity, second_moment_from_sums, second_moment_sum, CoefficientFunctions,
    F3Variant, GridRow, JensenBounds,
};
pub use moments::{
    base_moment_sums, coverage_prob, mu_d_closed_form, snr_aggregate, snr_dominance, unweighted_moments,
    weighted_moments, BaseMoments,
};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScoringRule {
    Weighted,
    Unweighted,
}

/// First and second per-test moments of a scoring rule, with the derived
/// mean gap, total variance and per-test SNR.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentSet<F> {
    pub rule: ScoringRule,
    pub p: F,
    pub mu_d: F,
    pub nu_d: F,
    pub mu_nd: F,
    pub nu_nd: F,
    pub delta_mu: F,
    pub sigma2: F,
    pub snr_per: F,
    pub base_mu_d: F,
    pub base_nu_d: F,
    pub base_mu_nd: F,
    pub base_nu_nd: F,
}

impl<F: Scalar> MomentSet<F> {
    pub fn var_d(&self) -> F {
        self.nu_d - self.mu_d * self.mu_d
    }

    pub fn var_nd(&self) -> F {
        self.nu_nd - self.mu_nd * self.mu_nd
    }

    /// Fills in the derived fields from the four raw moments.
    pub(crate) fn assemble(rule: ScoringRule, p: F, q: F, mu_d: F, nu_d: F, mu_nd: F, nu_nd: F) -> Self {
        let delta_mu = mu_d - mu_nd;
        let sigma2 = (nu_d - mu_d * mu_d) + (nu_nd - mu_nd * mu_nd);
        let pq = p * q;
        MomentSet {
            rule,
            p,
            mu_d,
            nu_d,
            mu_nd,
            nu_nd,
            delta_mu,
            sigma2,
            snr_per: delta_mu / sigma2.sqrt(),
            base_mu_d: mu_d / p,
            base_nu_d: nu_d / p,
            base_mu_nd: mu_nd / pq,
            base_nu_nd: nu_nd / pq,
        }
    }
}

/// Both evaluations of the positivity function `f(N, k)` at `p = 1/(k+1)`.
///
/// `f_value` is the expanded closed form; `residual_19` assembles the same
/// quantity from the moment sums and the coefficient functions
/// `E[W_D]^2 f1 + E[W_D] E[W_ND] f2 + E[W_ND]^2 f3 + (E[W_D^2] + q E[W_ND^2]) f4`.
/// `SNR_W >= SNR_U` holds exactly when this quantity is non-negative.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TheoryPoint<F> {
    pub n_items: usize,
    pub n_defectives: usize,
    pub p: F,
    pub q: F,
    pub f1: F,
    pub f2: F,
    pub f3: F,
    pub f4: F,
    pub f_value: F,
    pub residual_19: F,
}

impl<F: Scalar> TheoryPoint<F> {
    /// `|f_value - residual_19| / max(1, |f_value|)`.
    pub fn path_disagreement(&self) -> F {
        (self.f_value - self.residual_19).abs() / F::one().max(self.f_value.abs())
    }
}

pub(crate) fn check_nk(n: usize, k: usize) -> Result<()> {
    if k < 1 || k >= n {
        return Err(Error::param(format!("need 1 <= k < N, got N = {n}, k = {k}")));
    }
    Ok(())
}

pub(crate) fn check_open_p<F: Scalar>(p: F) -> Result<()> {
    if !(p > F::zero() && p < F::one()) {
        return Err(Error::param(format!("need 0 < p < 1, got p = {p}")));
    }
    Ok(())
}

/// `p = 1/(k+1)`.
pub(crate) fn optimal_p<F: Scalar>(k: usize) -> F {
    F::one() / F::of(k + 1)
}

//! Error-probability bounds expressed through the aggregated SNR. All of them
//! are capped at 1 where the raw expression would be vacuous.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Chebyshev: `P(err_T) <= 4 / SNR_T^2`.
pub fn chebyshev_bound<F: Scalar>(snr_t: F) -> Result<F> {
    if !(snr_t > F::zero()) {
        return Err(Error::param(format!("Chebyshev bound needs SNR_T > 0, got {snr_t}")));
    }
    Ok((F::of(4) / (snr_t * snr_t)).min(F::one()))
}

/// Bhattacharyya bound on the Bayes error of the Gaussian approximation:
/// `0.5 exp(-SNR_T^2 / 4)`.
pub fn bayes_bound<F: Scalar>(snr_t: F) -> F {
    F::lit(0.5) * (-(snr_t * snr_t) / F::of(4)).exp()
}

/// Bernstein tail bound for a sum of `T` independent per-test scores with
/// variance `sigma2` and deviation bound `m`:
/// `2 exp(-eps^2 / (2 T sigma2 + 2 m eps / 3))`.
pub fn bernstein_bound<F: Scalar>(n_tests: usize, sigma2: F, m: F, eps: F) -> Result<F> {
    if n_tests < 1 {
        return Err(Error::param("Bernstein bound needs T >= 1"));
    }
    if !(sigma2 >= F::zero()) {
        return Err(Error::param(format!("variance must be >= 0, got {sigma2}")));
    }
    if !(m > F::zero()) || !(eps > F::zero()) {
        return Err(Error::param(format!(
            "need M > 0 and eps > 0, got M = {m}, eps = {eps}"
        )));
    }
    let two = F::of(2);
    let denom = two * F::of(n_tests) * sigma2 + two * m * eps / F::of(3);
    Ok((two * (-(eps * eps) / denom).exp()).min(F::one()))
}

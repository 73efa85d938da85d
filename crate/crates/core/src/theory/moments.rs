use super::binomial::{binomial_pmf, csum, one_minus_pow_complement, CompensatedSum};
use super::{check_nk, check_open_p, optimal_p, MomentSet, ScoringRule};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// `q(k) = 1 - (1-p)^k`.
pub fn coverage_prob<F: Scalar>(k: usize, p: F) -> F {
    one_minus_pow_complement(p, k)
}

/// `mu_D^(w) = (1 - (1-p)^N) / N`.
pub fn mu_d_closed_form<F: Scalar>(n: usize, p: F) -> F {
    one_minus_pow_complement(p, n) / F::of(n)
}

/// The p/q-stripped moments evaluated from their binomial sums.
///
/// `q_e_wnd` and `q_e_wnd2` are the double sums over `h >= 1` before the
/// division by `q`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BaseMoments<F> {
    pub q: F,
    /// `E[W_D] = E[1/(1+Z)]`, `Z ~ Bin(N-1, p)`.
    pub e_wd: F,
    /// `E[W_D^2]`.
    pub e_wd2: F,
    /// `E[W_ND]`, the double sum divided by `q`.
    pub e_wnd: F,
    pub e_wnd2: F,
    pub q_e_wnd: F,
    pub q_e_wnd2: F,
}

/// Evaluates [`BaseMoments`] with the single sum over `Bin(N-1, p)` and the
/// double sum over `(h, r)`, `h ~ Bin(k, p)` restricted to `h >= 1` and
/// `r ~ Bin(N-k-1, p)`. Cost is `O(k N)`.
pub fn base_moment_sums<F: Scalar>(n: usize, k: usize, p: F) -> Result<BaseMoments<F>> {
    check_nk(n, k)?;
    check_open_p(p)?;
    let all = binomial_pmf(n - 1, p);
    let e_wd = csum(all.iter().enumerate().map(|(j, &w)| w / F::of(1 + j)));
    let e_wd2 = csum(all.iter().enumerate().map(|(j, &w)| w / F::of((1 + j) * (1 + j))));

    let def = binomial_pmf(k, p);
    let other = binomial_pmf(n - k - 1, p);
    let mut first = CompensatedSum::new();
    let mut second = CompensatedSum::new();
    for (h, &wh) in def.iter().enumerate().skip(1) {
        for (r, &wr) in other.iter().enumerate() {
            let inv = F::one() / F::of(1 + h + r);
            let g = wh * wr;
            first.add(g * inv);
            second.add(g * inv * inv);
        }
    }
    let q = coverage_prob(k, p);
    let (q_e_wnd, q_e_wnd2) = (first.value(), second.value());
    Ok(BaseMoments {
        q,
        e_wd,
        e_wd2,
        e_wnd: q_e_wnd / q,
        e_wnd2: q_e_wnd2 / q,
        q_e_wnd,
        q_e_wnd2,
    })
}

/// Per-test moments of the weighted contribution `W`.
///
/// `mu_d` uses the closed form; `nu_d`, `mu_nd` and `nu_nd` come from the
/// binomial sums of [`base_moment_sums`].
pub fn weighted_moments<F: Scalar>(n: usize, k: usize, p: F) -> Result<MomentSet<F>> {
    let base = base_moment_sums(n, k, p)?;
    let mu_d = mu_d_closed_form(n, p);
    let nu_d = p * base.e_wd2;
    let mu_nd = p * base.q_e_wnd;
    let nu_nd = p * base.q_e_wnd2;
    Ok(MomentSet::assemble(
        ScoringRule::Weighted,
        p,
        base.q,
        mu_d,
        nu_d,
        mu_nd,
        nu_nd,
    ))
}

/// Per-test moments of the unweighted indicator `U`: `p` for defectives and
/// `p q(k)` for non-defectives, first and second alike.
pub fn unweighted_moments<F: Scalar>(k: usize, p: F) -> Result<MomentSet<F>> {
    if k < 1 {
        return Err(Error::param("need k >= 1"));
    }
    check_open_p(p)?;
    let q = coverage_prob(k, p);
    let pq = p * q;
    let mut m = MomentSet::assemble(ScoringRule::Unweighted, p, q, p, p, pq, pq);
    // Closed forms: delta = p(1-q), sigma^2 = p(1-p) + pq(1-pq).
    m.delta_mu = p * (F::one() - q);
    m.sigma2 = p * (F::one() - p) + pq * (F::one() - pq);
    m.snr_per = m.delta_mu / m.sigma2.sqrt();
    Ok(m)
}

/// SNR of a score aggregated over `T` independent tests: `sqrt(T) * snr_per`.
pub fn snr_aggregate<F: Scalar>(snr_per: F, n_tests: usize) -> F {
    F::of(n_tests).sqrt() * snr_per
}

/// Whether the weighted per-test SNR is at least the unweighted one at
/// `p = 1/(k+1)`, up to `1e-12`.
pub fn snr_dominance(n: usize, k: usize) -> Result<bool> {
    let p = optimal_p::<f64>(k);
    let w = weighted_moments(n, k, p)?;
    let u = unweighted_moments(k, p)?;
    Ok(w.snr_per >= u.snr_per - 1e-12)
}

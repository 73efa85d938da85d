//! Binomial probabilities and compensated sums.
//!
//! The pmf vector is anchored at the mode, evaluated through a log-space
//! binomial coefficient, and extended in both directions by the
//! multiplicative recurrence `pmf(j+1) = pmf(j) * (n-j)/(j+1) * p/(1-p)`,
//! then renormalised to unit mass. No intermediate value underflows before
//! the peak is reached, for any `n`.

use crate::scalar::Scalar;

/// Neumaier-compensated accumulator.
#[derive(Clone, Copy, Debug)]
pub struct CompensatedSum<F> {
    sum: F,
    carry: F,
}

impl<F: Scalar> Default for CompensatedSum<F> {
    fn default() -> Self {
        Self::new()
    }
}

impl<F: Scalar> CompensatedSum<F> {
    pub fn new() -> Self {
        CompensatedSum {
            sum: F::zero(),
            carry: F::zero(),
        }
    }

    pub fn add(&mut self, x: F) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> F {
        self.sum + self.carry
    }
}

impl<F: Scalar> FromIterator<F> for CompensatedSum<F> {
    fn from_iter<I: IntoIterator<Item = F>>(iter: I) -> Self {
        let mut acc = CompensatedSum::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

/// Compensated sum of an iterator.
pub fn csum<F: Scalar>(iter: impl IntoIterator<Item = F>) -> F {
    iter.into_iter().collect::<CompensatedSum<F>>().value()
}

/// `ln C(n, k)`.
pub fn ln_choose<F: Scalar>(n: usize, k: usize) -> F {
    debug_assert!(k <= n);
    let k = k.min(n - k);
    csum((1..=k).map(|i| (F::of(n - k + i) / F::of(i)).ln()))
}

/// `P(Bin(n, p) = j)` for `j = 0..=n`.
pub fn binomial_pmf<F: Scalar>(n: usize, p: F) -> Vec<F> {
    let mut pmf = vec![F::zero(); n + 1];
    if p <= F::zero() {
        pmf[0] = F::one();
        return pmf;
    }
    if p >= F::one() {
        pmf[n] = F::one();
        return pmf;
    }
    let mode = ((F::of(n + 1) * p).floor().to_usize().unwrap_or(0)).min(n);
    let ln_q = (-p).ln_1p();
    pmf[mode] = (ln_choose::<F>(n, mode) + F::of(mode) * p.ln() + F::of(n - mode) * ln_q).exp();
    let odds = p / (F::one() - p);
    for j in mode..n {
        pmf[j + 1] = pmf[j] * (F::of(n - j) / F::of(j + 1)) * odds;
    }
    for j in (1..=mode).rev() {
        pmf[j - 1] = pmf[j] * (F::of(j) / F::of(n - j + 1)) / odds;
    }
    // the anchor's rounding error is common to every entry
    let total = csum(pmf.iter().copied());
    for v in &mut pmf {
        *v = *v / total;
    }
    pmf
}

/// `(1-p)^m` through `exp(m ln(1-p))`.
pub fn pow_complement<F: Scalar>(p: F, m: usize) -> F {
    if m == 0 {
        return F::one();
    }
    (F::of(m) * (-p).ln_1p()).exp()
}

/// `1 - (1-p)^m` without cancellation for small `p`.
pub fn one_minus_pow_complement<F: Scalar>(p: F, m: usize) -> F {
    if m == 0 {
        return F::zero();
    }
    -(F::of(m) * (-p).ln_1p()).exp_m1()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exact_pmf(n: u64, j: u64, p: f64) -> f64 {
        let c = (0..j).fold(1.0f64, |acc, i| acc * (n - i) as f64 / (i + 1) as f64);
        c * p.powi(j as i32) * (1.0 - p).powi((n - j) as i32)
    }

    #[test]
    fn pmf_matches_direct_formula() {
        for &(n, p) in &[(1usize, 0.5), (7, 0.3), (30, 1.0 / 11.0), (60, 0.9)] {
            let pmf = binomial_pmf(n, p);
            for (j, &v) in pmf.iter().enumerate() {
                let e = exact_pmf(n as u64, j as u64, p);
                assert!((v - e).abs() <= 1e-13 * e.max(1e-300), "n={n} j={j}: {v} vs {e}");
            }
            assert!((csum(pmf.iter().copied()) - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn pmf_degenerate_p() {
        assert_eq!(binomial_pmf(3, 0.0f64), vec![1.0, 0.0, 0.0, 0.0]);
        assert_eq!(binomial_pmf(3, 1.0f64), vec![0.0, 0.0, 0.0, 1.0]);
        assert_eq!(binomial_pmf(0, 0.4f64), vec![1.0]);
    }

    #[test]
    fn pmf_large_n_does_not_underflow_at_the_mode() {
        let pmf = binomial_pmf(2000, 0.5f64);
        assert!(pmf[1000] > 0.0);
        assert!((csum(pmf.iter().copied()) - 1.0).abs() < 1e-13);
        let pmf32 = binomial_pmf(400, 0.5f32);
        assert!((pmf32.iter().sum::<f32>() - 1.0).abs() < 1e-4);
    }

    #[test]
    fn ln_choose_values() {
        assert!((ln_choose::<f64>(4, 2) - 6f64.ln()).abs() < 1e-15);
        assert_eq!(ln_choose::<f64>(9, 0), 0.0);
        assert!((ln_choose::<f64>(500, 10) - 245_810_588_801_891_098_700f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let xs = [1.0, 1e100, 1.0, -1e100];
        assert_eq!(csum(xs), 2.0);
    }

    #[test]
    fn complement_powers() {
        assert!((one_minus_pow_complement(1.0f64 / 3.0, 2) - 5.0 / 9.0).abs() < 1e-15);
        assert_eq!(one_minus_pow_complement(0.0f64, 4), 0.0);
        assert_eq!(one_minus_pow_complement(1.0f64, 4), 1.0);
        assert_eq!(pow_complement(1.0f64, 3), 0.0);
        assert_eq!(pow_complement(0.3f64, 0), 1.0);
    }
}

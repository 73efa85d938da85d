//! Monte Carlo sweeps over the number of tests.
//!
//! Each trial draws a fresh design and a fresh defective set, runs every
//! requested decoder on the same outcomes and scores the estimates. The seed
//! of trial `j` at test count `T` is `derive_seed(master_seed, [T, j])`, so a
//! sweep is a pure function of its [`SimConfig`] no matter how rayon
//! schedules the trials.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::decoders::{Algorithm, DecodeResult};
use crate::design::{optimal_bernoulli_p, optimal_column_weight, DesignKind, DesignSpec};
use crate::error::{Error, Result};
use crate::metrics::{confusion, counting_bound, RecoveryStats};
use crate::model::{run_tests, sample_defective_set, ItemSet};
use crate::seed::derive_seed;

fn default_trials() -> usize {
    1000
}

fn default_alpha() -> f64 {
    1.0
}

fn default_algorithms() -> Vec<Algorithm> {
    Algorithm::ALL.to_vec()
}

/// Sweep configuration; also the JSON schema of `gt simulate --config`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub n_items: usize,
    pub n_defectives: usize,
    pub design_kind: DesignKind,
    pub t_values: Vec<usize>,
    #[serde(default = "default_trials")]
    pub n_trials: usize,
    #[serde(default = "default_algorithms")]
    pub algorithms: Vec<Algorithm>,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    pub master_seed: u64,
    /// Bernoulli inclusion probability; `1/(k+1)` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inclusion_prob: Option<f64>,
    /// Column weight for the column designs; `floor((T/k) ln 2)` per `T` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub column_weight: Option<usize>,
}

impl SimConfig {
    pub fn new(
        n_items: usize,
        n_defectives: usize,
        design_kind: DesignKind,
        t_values: Vec<usize>,
        master_seed: u64,
    ) -> Self {
        SimConfig {
            n_items,
            n_defectives,
            design_kind,
            t_values,
            n_trials: default_trials(),
            algorithms: default_algorithms(),
            alpha: default_alpha(),
            master_seed,
            inclusion_prob: None,
            column_weight: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.t_values.is_empty() || self.t_values.contains(&0) {
            return Err(Error::param("t_values must be non-empty and positive"));
        }
        if self.n_trials == 0 {
            return Err(Error::param("n_trials must be >= 1"));
        }
        if self.n_defectives > self.n_items {
            return Err(Error::param(format!(
                "k = {} exceeds N = {}",
                self.n_defectives, self.n_items
            )));
        }
        if self.algorithms.is_empty() {
            return Err(Error::param("at least one algorithm is required"));
        }
        if !(self.alpha >= 0.0) || !self.alpha.is_finite() {
            return Err(Error::param(format!(
                "alpha must be finite and >= 0, got {}",
                self.alpha
            )));
        }
        for &t in &self.t_values {
            self.design_spec(t, 0)?.validate()?;
        }
        Ok(())
    }

    /// Design used at test count `n_tests`, seeded with `seed`.
    pub fn design_spec(&self, n_tests: usize, seed: u64) -> Result<DesignSpec> {
        let (n, k) = (self.n_items, self.n_defectives);
        Ok(match self.design_kind {
            DesignKind::Bernoulli => {
                let p = match self.inclusion_prob {
                    Some(p) => p,
                    None => optimal_bernoulli_p(k)?,
                };
                DesignSpec::bernoulli(n, n_tests, p, seed)
            }
            DesignKind::ConstantColumn | DesignKind::NearConstantColumn => {
                let l = match self.column_weight {
                    Some(l) => l,
                    None => optimal_column_weight(n_tests, k)?,
                };
                if self.design_kind == DesignKind::ConstantColumn {
                    DesignSpec::constant_column(n, n_tests, l, seed)
                } else {
                    DesignSpec::near_constant_column(n, n_tests, l, seed)
                }
            }
            DesignKind::Explicit => return Err(Error::param("sweeps need a random design kind")),
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: SimConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Everything one trial produced, for callers that want more than the stats.
#[derive(Clone, Debug)]
pub struct TrialRecord {
    pub truth: ItemSet,
    pub results: Vec<(Algorithm, DecodeResult, RecoveryStats)>,
}

/// Seed of trial `trial` at test count `n_tests`.
pub fn trial_seed(master_seed: u64, n_tests: usize, trial: usize) -> u64 {
    derive_seed(master_seed, &[n_tests as u64, trial as u64])
}

/// Like [`run_trial`], keeping the defective set and full decoder outputs.
pub fn run_trial_detailed(
    n: usize,
    k: usize,
    design_spec: &DesignSpec,
    algorithms: &[Algorithm],
    alpha: f64,
    trial_seed: u64,
) -> Result<TrialRecord> {
    let spec = DesignSpec {
        seed: derive_seed(trial_seed, &[0]),
        ..design_spec.clone()
    };
    if spec.n_items != n {
        return Err(Error::DimensionMismatch {
            what: "design items",
            expected: n,
            found: spec.n_items,
        });
    }
    let design = spec.generate()?;
    let truth = sample_defective_set(n, k, derive_seed(trial_seed, &[1]))?;
    let outcomes = run_tests(&design, &truth)?;
    let results = algorithms
        .iter()
        .map(|&algo| {
            let decoded = algo.decode(&design, &outcomes, alpha)?;
            let stats = confusion(&truth, &decoded.estimate)?;
            Ok((algo, decoded, stats))
        })
        .collect::<Result<_>>()?;
    Ok(TrialRecord { truth, results })
}

/// One independent trial: fresh design (its seed is derived from
/// `trial_seed`, overriding `design_spec.seed`), fresh defective set, every
/// decoder on the same outcomes.
pub fn run_trial(
    n: usize,
    k: usize,
    design_spec: &DesignSpec,
    algorithms: &[Algorithm],
    alpha: f64,
    trial_seed: u64,
) -> Result<Vec<(Algorithm, RecoveryStats)>> {
    let record = run_trial_detailed(n, k, design_spec, algorithms, alpha, trial_seed)?;
    Ok(record.results.into_iter().map(|(a, _, s)| (a, s)).collect())
}

/// Aggregate over the trials at one `(T, algorithm)`. Field order is the CSV
/// column order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub design: DesignKind,
    pub algorithm: Algorithm,
    #[serde(rename = "N")]
    pub n_items: usize,
    pub k: usize,
    #[serde(rename = "T")]
    pub n_tests: usize,
    pub alpha: f64,
    pub n_trials: usize,
    pub master_seed: u64,
    pub success_prob: f64,
    pub mean_fn: f64,
    pub mean_fp: f64,
    pub mean_jaccard: f64,
    pub mean_f1: f64,
    pub mean_misclassified: f64,
    pub counting_bound: f64,
}

impl SweepRow {
    /// Binomial standard error of `success_prob`.
    pub fn success_std_err(&self) -> f64 {
        let p = self.success_prob;
        (p * (1.0 - p) / self.n_trials as f64).sqrt()
    }
}

pub const CSV_HEADER: &str = "design,algorithm,N,k,T,alpha,n_trials,master_seed,success_prob,mean_fn,mean_fp,mean_jaccard,mean_f1,mean_misclassified,counting_bound";

#[derive(Clone, Debug, PartialEq)]
pub struct SweepResult {
    pub config: SimConfig,
    /// Ordered by `T` as listed in the config, then by algorithm as listed.
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    pub fn row(&self, n_tests: usize, algorithm: Algorithm) -> Option<&SweepRow> {
        self.rows
            .iter()
            .find(|r| r.n_tests == n_tests && r.algorithm == algorithm)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for row in &self.rows {
            w.serialize(row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }
}

#[derive(Default)]
struct Accumulator {
    successes: usize,
    fn_total: usize,
    fp_total: usize,
    jaccard: f64,
    f1: f64,
}

/// Runs `n_trials` trials at every `T` and aggregates them per algorithm.
pub fn run_sweep(config: &SimConfig) -> Result<SweepResult> {
    config.validate()?;
    let (n, k) = (config.n_items, config.n_defectives);
    let jobs: Vec<(usize, usize)> = config
        .t_values
        .iter()
        .flat_map(|&t| (0..config.n_trials).map(move |j| (t, j)))
        .collect();
    let per_trial: Vec<Vec<(Algorithm, RecoveryStats)>> = jobs
        .par_iter()
        .map(|&(t, j)| {
            let spec = config.design_spec(t, 0)?;
            run_trial(
                n,
                k,
                &spec,
                &config.algorithms,
                config.alpha,
                trial_seed(config.master_seed, t, j),
            )
        })
        .collect::<Result<_>>()?;

    let mut rows = Vec::with_capacity(config.t_values.len() * config.algorithms.len());
    for (block, &t) in per_trial.chunks(config.n_trials).zip(&config.t_values) {
        let bound = counting_bound(n, k, t)?;
        for (a_idx, &algorithm) in config.algorithms.iter().enumerate() {
            let mut acc = Accumulator::default();
            for trial in block {
                let (algo, s) = &trial[a_idx];
                debug_assert_eq!(*algo, algorithm);
                acc.successes += usize::from(s.exact);
                acc.fn_total += s.false_negatives;
                acc.fp_total += s.false_positives;
                acc.jaccard += s.jaccard;
                acc.f1 += s.f1;
            }
            let trials = config.n_trials as f64;
            rows.push(SweepRow {
                design: config.design_kind,
                algorithm,
                n_items: n,
                k,
                n_tests: t,
                alpha: config.alpha,
                n_trials: config.n_trials,
                master_seed: config.master_seed,
                success_prob: acc.successes as f64 / trials,
                mean_fn: acc.fn_total as f64 / trials,
                mean_fp: acc.fp_total as f64 / trials,
                mean_jaccard: acc.jaccard / trials,
                mean_f1: acc.f1 / trials,
                mean_misclassified: (acc.fn_total + acc.fp_total) as f64 / trials,
                counting_bound: bound,
            });
        }
    }
    Ok(SweepResult {
        config: config.clone(),
        rows,
    })
}

/// `Δ(T) = M̄_SCOMP(T) - M̄_W-SCOMP(T)` for every `T` of the sweep, optionally
/// smoothed by a trailing moving average over `window` points.
pub fn delta_series(sweep: &SweepResult, window: Option<usize>) -> Result<Vec<(usize, f64)>> {
    for algo in [Algorithm::Scomp, Algorithm::WScomp] {
        if !sweep.config.algorithms.contains(&algo) {
            return Err(Error::param(format!("delta series needs `{algo}` in the sweep")));
        }
    }
    let raw: Vec<(usize, f64)> = sweep
        .config
        .t_values
        .iter()
        .map(|&t| {
            let s = sweep.row(t, Algorithm::Scomp).expect("row present");
            let w = sweep.row(t, Algorithm::WScomp).expect("row present");
            (t, s.mean_misclassified - w.mean_misclassified)
        })
        .collect();
    Ok(match window {
        None | Some(0) | Some(1) => raw,
        Some(w) => moving_average(&raw, w),
    })
}

/// Trailing moving average over at most `window` points.
pub fn moving_average(series: &[(usize, f64)], window: usize) -> Vec<(usize, f64)> {
    series
        .iter()
        .enumerate()
        .map(|(i, &(t, _))| {
            let lo = (i + 1).saturating_sub(window);
            let span = &series[lo..=i];
            (t, span.iter().map(|&(_, d)| d).sum::<f64>() / span.len() as f64)
        })
        .collect()
}

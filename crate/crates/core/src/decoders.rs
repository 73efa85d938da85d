//! COMP, DD, SCOMP and weighted SCOMP.
//!
//! SCOMP and W-SCOMP run the same greedy kernel and differ only in what an
//! unexplained positive test `t` contributes to the score of each candidate it
//! contains: a unit count for SCOMP, `1 / w_t^alpha` for W-SCOMP, where `w_t`
//! is the number of candidates (potential defectives) in the pool.
//!
//! Kernel conventions:
//! * argmax ties go to the lowest item index;
//! * per-item scores are summed in ascending test order;
//! * after each pick the candidate set shrinks to items that still appear in
//!   an unexplained test;
//! * the loop stops when every positive test is explained, when no candidate
//!   is left, or when the best score is zero. Positive tests may remain
//!   unexplained at that point; the estimate is returned as is.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::AddAssign;
use std::str::FromStr;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::design::DesignMatrix;
use crate::error::{Error, Result};
use crate::model::{ItemSet, OutcomeVector};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Comp,
    Dd,
    Scomp,
    #[serde(rename = "wscomp", alias = "w-scomp", alias = "w_scomp")]
    WScomp,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [Algorithm::Comp, Algorithm::Dd, Algorithm::Scomp, Algorithm::WScomp];

    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::Comp => "comp",
            Algorithm::Dd => "dd",
            Algorithm::Scomp => "scomp",
            Algorithm::WScomp => "wscomp",
        }
    }

    /// Runs this decoder. `alpha` only matters for W-SCOMP.
    pub fn decode(self, design: &DesignMatrix, outcomes: &OutcomeVector, alpha: f64) -> Result<DecodeResult> {
        match self {
            Algorithm::Comp => comp(design, outcomes),
            Algorithm::Dd => dd(design, outcomes),
            Algorithm::Scomp => scomp(design, outcomes),
            Algorithm::WScomp => w_scomp(design, outcomes, alpha),
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "comp" => Ok(Algorithm::Comp),
            "dd" => Ok(Algorithm::Dd),
            "scomp" => Ok(Algorithm::Scomp),
            "wscomp" | "w-scomp" | "w_scomp" => Ok(Algorithm::WScomp),
            other => Err(Error::param(format!("unknown algorithm `{other}`"))),
        }
    }
}

/// One greedy step: the chosen item, its winning score and how many positive
/// tests were still unexplained after adding it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceStep {
    pub item: usize,
    pub score: f64,
    pub remaining_unexplained: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecodeResult {
    pub estimate: ItemSet,
    pub definite_non_defectives: ItemSet,
    pub dd_core: ItemSet,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace: Option<Vec<TraceStep>>,
}

impl DecodeResult {
    /// Complement of the definite non-defectives (the COMP estimate).
    pub fn potential_defectives(&self) -> ItemSet {
        self.definite_non_defectives.complement()
    }
}

/// Scores of candidate items over a set of unexplained tests.
#[derive(Clone, Debug, PartialEq)]
pub struct ScoreVector<F> {
    pub scores: BTreeMap<usize, F>,
    pub weights: BTreeMap<usize, usize>,
    pub alpha: F,
}

fn check_dims(design: &DesignMatrix, outcomes: &OutcomeVector) -> Result<()> {
    if outcomes.len() != design.n_tests() {
        return Err(Error::DimensionMismatch {
            what: "outcome vector",
            expected: design.n_tests(),
            found: outcomes.len(),
        });
    }
    Ok(())
}

/// Mask of items that appear in at least one negative test.
fn dnd_mask(design: &DesignMatrix, outcomes: &OutcomeVector) -> Vec<bool> {
    let mut dnd = vec![false; design.n_items()];
    for (t, pool) in design.rows().iter().enumerate() {
        if !outcomes.is_positive(t) {
            for &i in pool {
                dnd[i] = true;
            }
        }
    }
    dnd
}

/// Potential defectives that are the sole potential defective of some
/// positive test.
fn dd_mask(design: &DesignMatrix, outcomes: &OutcomeVector, dnd: &[bool]) -> Vec<bool> {
    let mut core = vec![false; design.n_items()];
    for (t, pool) in design.rows().iter().enumerate() {
        if !outcomes.is_positive(t) {
            continue;
        }
        let mut pd = pool.iter().filter(|&&i| !dnd[i]);
        if let (Some(&only), None) = (pd.next(), pd.next()) {
            core[only] = true;
        }
    }
    core
}

/// Every item seen in a negative test is non-defective; the rest (including
/// items in no test at all) form the estimate.
pub fn comp(design: &DesignMatrix, outcomes: &OutcomeVector) -> Result<DecodeResult> {
    check_dims(design, outcomes)?;
    let dnd = dnd_mask(design, outcomes);
    let estimate: Vec<bool> = dnd.iter().map(|&b| !b).collect();
    Ok(DecodeResult {
        estimate: ItemSet::from_mask(&estimate),
        definite_non_defectives: ItemSet::from_mask(&dnd),
        dd_core: ItemSet::empty(design.n_items()),
        trace: None,
    })
}

/// Definite defectives: never produces a false positive.
pub fn dd(design: &DesignMatrix, outcomes: &OutcomeVector) -> Result<DecodeResult> {
    check_dims(design, outcomes)?;
    let dnd = dnd_mask(design, outcomes);
    let core = ItemSet::from_mask(&dd_mask(design, outcomes, &dnd));
    Ok(DecodeResult {
        estimate: core.clone(),
        definite_non_defectives: ItemSet::from_mask(&dnd),
        dd_core: core,
        trace: None,
    })
}

/// What an unexplained test containing `w` candidates adds to each of them.
trait TestWeighting {
    type Score: Copy + PartialOrd + Zero + AddAssign;

    fn contribution(&self, w: usize) -> Self::Score;
    fn report(score: Self::Score) -> f64;
}

/// SCOMP: exact integer counts.
struct UnitWeight;

impl TestWeighting for UnitWeight {
    type Score = u64;

    fn contribution(&self, _w: usize) -> u64 {
        1
    }

    fn report(score: u64) -> f64 {
        score as f64
    }
}

/// W-SCOMP: `1 / w^alpha`.
struct ReciprocalWeight<F> {
    alpha: F,
}

impl<F: Scalar> TestWeighting for ReciprocalWeight<F> {
    type Score = F;

    fn contribution(&self, w: usize) -> F {
        if self.alpha.is_zero() {
            F::one()
        } else {
            F::of(w).powf(self.alpha).recip()
        }
    }

    fn report(score: F) -> f64 {
        score.to_f64_lossy()
    }
}

/// Scratch state of the greedy loop.
struct Greedy<'a> {
    design: &'a DesignMatrix,
    candidate: Vec<bool>,
    unexplained: Vec<usize>,
}

impl Greedy<'_> {
    /// `w_t` for every unexplained test, in ascending test order.
    fn pool_weights(&self) -> Vec<usize> {
        self.unexplained
            .iter()
            .map(|&t| self.design.pool(t).iter().filter(|&&i| self.candidate[i]).count())
            .collect()
    }

    fn scores<W: TestWeighting>(&self, weighting: &W, weights: &[usize]) -> Vec<W::Score> {
        let mut scores = vec![W::Score::zero(); self.design.n_items()];
        for (&t, &w) in self.unexplained.iter().zip(weights) {
            if w == 0 {
                continue;
            }
            let c = weighting.contribution(w);
            for &i in self.design.pool(t) {
                if self.candidate[i] {
                    scores[i] += c;
                }
            }
        }
        scores
    }

    /// Lowest-index candidate with the largest score.
    fn argmax<S: Copy + PartialOrd>(&self, scores: &[S]) -> Option<(usize, S)> {
        let mut best: Option<(usize, S)> = None;
        for (i, &s) in scores.iter().enumerate() {
            if !self.candidate[i] {
                continue;
            }
            match best {
                Some((_, b)) if !(s > b) => {}
                _ => best = Some((i, s)),
            }
        }
        best
    }

    fn shrink_candidates(&mut self) {
        let mut still = vec![false; self.candidate.len()];
        for &t in &self.unexplained {
            for &i in self.design.pool(t) {
                still[i] = self.candidate[i];
            }
        }
        self.candidate = still;
    }
}

fn greedy_decode<W: TestWeighting>(
    design: &DesignMatrix,
    outcomes: &OutcomeVector,
    weighting: &W,
) -> Result<DecodeResult> {
    check_dims(design, outcomes)?;
    let n = design.n_items();
    let dnd = dnd_mask(design, outcomes);
    let core = dd_mask(design, outcomes, &dnd);
    let mut estimate = core.clone();

    let unexplained = (0..design.n_tests())
        .filter(|&t| outcomes.is_positive(t) && !design.pool(t).iter().any(|&i| estimate[i]))
        .collect();
    let candidate = (0..n).map(|i| !dnd[i] && !estimate[i]).collect();
    let mut state = Greedy {
        design,
        candidate,
        unexplained,
    };

    let mut trace = Vec::new();
    while !state.unexplained.is_empty() {
        let weights = state.pool_weights();
        let scores = state.scores(weighting, &weights);
        let Some((best, score)) = state.argmax(&scores) else {
            break;
        };
        if !(score > W::Score::zero()) {
            break;
        }
        estimate[best] = true;
        state.candidate[best] = false;
        let before = state.unexplained.len();
        state.unexplained.retain(|&t| !design.contains(t, best));
        if state.unexplained.len() == before {
            break;
        }
        trace.push(TraceStep {
            item: best,
            score: W::report(score),
            remaining_unexplained: state.unexplained.len(),
        });
        state.shrink_candidates();
    }

    Ok(DecodeResult {
        estimate: ItemSet::from_mask(&estimate),
        definite_non_defectives: ItemSet::from_mask(&dnd),
        dd_core: ItemSet::from_mask(&core),
        trace: Some(trace),
    })
}

/// DD followed by greedy additions of the candidate covering the most
/// unexplained positive tests.
pub fn scomp(design: &DesignMatrix, outcomes: &OutcomeVector) -> Result<DecodeResult> {
    greedy_decode(design, outcomes, &UnitWeight)
}

/// Weighted SCOMP: each unexplained test contributes `1 / w_t^alpha` to every
/// candidate it contains. `alpha = 1` is the standard choice; `alpha = 0`
/// reproduces [`scomp`].
pub fn w_scomp<F: Scalar>(design: &DesignMatrix, outcomes: &OutcomeVector, alpha: F) -> Result<DecodeResult> {
    if !(alpha >= F::zero()) || !alpha.is_finite() {
        return Err(Error::param(format!("alpha must be a finite value >= 0, got {alpha}")));
    }
    greedy_decode(design, outcomes, &ReciprocalWeight { alpha })
}

/// Scores `candidates` over the `unexplained` tests with exponent `alpha`.
///
/// `w_t = |candidates ∩ T_t|` for each unexplained test and
/// `S_i = Σ_t X_{t,i} / w_t^alpha`. Tests with no candidate contribute nothing.
pub fn score_items<F: Scalar>(
    design: &DesignMatrix,
    outcomes: &OutcomeVector,
    candidates: &ItemSet,
    unexplained: &[usize],
    alpha: F,
) -> Result<ScoreVector<F>> {
    check_dims(design, outcomes)?;
    candidates.check_universe("candidate set", design.n_items())?;
    if !(alpha >= F::zero()) {
        return Err(Error::param(format!("alpha must be >= 0, got {alpha}")));
    }
    let mut unexplained = unexplained.to_vec();
    unexplained.sort_unstable();
    unexplained.dedup();
    if let Some(&t) = unexplained.iter().find(|&&t| t >= design.n_tests()) {
        return Err(Error::param(format!("test index {t} out of range")));
    }
    let state = Greedy {
        design,
        candidate: candidates.to_mask(),
        unexplained,
    };
    let weights = state.pool_weights();
    let dense = state.scores(&ReciprocalWeight { alpha }, &weights);
    Ok(ScoreVector {
        scores: candidates.members().iter().map(|&i| (i, dense[i])).collect(),
        weights: state.unexplained.iter().copied().zip(weights).collect(),
        alpha,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::run_tests;

    fn worked() -> (DesignMatrix, OutcomeVector) {
        let m = DesignMatrix::from_rows(4, 5, vec![vec![0, 1], vec![0, 2], vec![1, 2, 3], vec![4]]).unwrap();
        let y = OutcomeVector::new(vec![true, true, true, false]);
        (m, y)
    }

    fn identity() -> (DesignMatrix, OutcomeVector) {
        let m = DesignMatrix::from_rows(2, 2, vec![vec![0], vec![1]]).unwrap();
        (m, OutcomeVector::new(vec![true, false]))
    }

    #[test]
    fn comp_examples() {
        let (m, y) = identity();
        let r = comp(&m, &y).unwrap();
        assert_eq!(r.estimate.members(), &[0]);
        assert_eq!(r.definite_non_defectives.members(), &[1]);

        let (m, y) = worked();
        let r = comp(&m, &y).unwrap();
        assert_eq!(r.estimate.members(), &[0, 1, 2, 3]);
        assert_eq!(r.definite_non_defectives.members(), &[4]);
        assert!(r.dd_core.is_empty());

        let all = comp(&m, &OutcomeVector::new(vec![true; 4])).unwrap();
        assert_eq!(all.estimate.len(), 5);
    }

    #[test]
    fn comp_keeps_untested_items() {
        let m = DesignMatrix::from_rows(1, 3, vec![vec![0]]).unwrap();
        let r = comp(&m, &OutcomeVector::new(vec![false])).unwrap();
        assert_eq!(r.estimate.members(), &[1, 2]);
    }

    #[test]
    fn dd_examples() {
        let m = DesignMatrix::from_rows(2, 3, vec![vec![0], vec![1, 2]]).unwrap();
        let y = run_tests(&m, &ItemSet::new(3, [0]).unwrap()).unwrap();
        let r = dd(&m, &y).unwrap();
        assert_eq!(r.definite_non_defectives.members(), &[1, 2]);
        assert_eq!(r.estimate.members(), &[0]);
        assert_eq!(r.potential_defectives().members(), &[0]);

        let (m, y) = worked();
        assert!(dd(&m, &y).unwrap().estimate.is_empty());

        let (m, y) = identity();
        assert_eq!(dd(&m, &y).unwrap().estimate.members(), &[0]);
    }

    #[test]
    fn score_examples() {
        // a=0, b=1, c=2, d=3; pools {a,b}, {a,c}, {b,c,d}
        let m = DesignMatrix::from_rows(3, 4, vec![vec![0, 1], vec![0, 2], vec![1, 2, 3]]).unwrap();
        let y = OutcomeVector::new(vec![true; 3]);
        let cands = ItemSet::new(4, 0..4).unwrap();
        let s = score_items(&m, &y, &cands, &[0, 1, 2], 1.0f64).unwrap();
        assert_eq!(s.weights.values().copied().collect::<Vec<_>>(), vec![2, 2, 3]);
        let expect = [1.0, 0.5 + 1.0 / 3.0, 0.5 + 1.0 / 3.0, 1.0 / 3.0];
        for (i, e) in expect.iter().enumerate() {
            assert!((s.scores[&i] - e).abs() < 1e-15);
        }

        let s0 = score_items(&m, &y, &cands, &[0, 1, 2], 0.0f64).unwrap();
        assert_eq!(
            s0.scores.values().copied().collect::<Vec<_>>(),
            vec![2.0, 2.0, 2.0, 1.0]
        );

        let empty = score_items(&m, &y, &cands, &[], 1.0f64).unwrap();
        assert!(empty.scores.values().all(|&v| v == 0.0));
        assert!(empty.weights.is_empty());
    }

    #[test]
    fn scomp_worked_trace() {
        let (m, y) = worked();
        let r = scomp(&m, &y).unwrap();
        assert_eq!(r.estimate.members(), &[0, 1]);
        let trace = r.trace.unwrap();
        assert_eq!(trace.len(), 2);
        assert_eq!(
            (trace[0].item, trace[0].score, trace[0].remaining_unexplained),
            (0, 2.0, 1)
        );
        assert_eq!(
            (trace[1].item, trace[1].score, trace[1].remaining_unexplained),
            (1, 1.0, 0)
        );
    }

    #[test]
    fn w_scomp_worked_trace() {
        let (m, y) = worked();
        let r = w_scomp(&m, &y, 1.0f64).unwrap();
        assert_eq!(r.estimate.members(), &[0, 1]);
        let trace = r.trace.unwrap();
        assert_eq!(trace[0].item, 0);
        assert!((trace[0].score - 1.0).abs() < 1e-15);
        assert_eq!(trace[1].item, 1);
        assert!((trace[1].score - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(trace[1].remaining_unexplained, 0);
    }

    #[test]
    fn greedy_stops_when_dd_explains_everything() {
        let (m, y) = identity();
        let r = scomp(&m, &y).unwrap();
        assert_eq!(r.estimate.members(), &[0]);
        assert!(r.trace.unwrap().is_empty());
    }

    #[test]
    fn all_negative_outcomes() {
        let (m, _) = worked();
        let y = OutcomeVector::new(vec![false; 4]);
        let r = w_scomp(&m, &y, 1.0f64).unwrap();
        assert!(r.estimate.is_empty());
        assert_eq!(r.definite_non_defectives.members(), &[0, 1, 2, 3, 4]);
    }

    #[test]
    fn alpha_zero_matches_scomp() {
        let (m, y) = worked();
        assert_eq!(w_scomp(&m, &y, 0.0f64).unwrap(), scomp(&m, &y).unwrap());
    }

    #[test]
    fn f32_scores_agree() {
        let (m, y) = worked();
        assert_eq!(
            w_scomp(&m, &y, 1.0f32).unwrap().estimate,
            w_scomp(&m, &y, 1.0f64).unwrap().estimate
        );
    }

    #[test]
    fn rejects_bad_inputs() {
        let (m, y) = worked();
        assert!(w_scomp(&m, &y, -1.0f64).is_err());
        assert!(w_scomp(&m, &y, f64::NAN).is_err());
        let short = OutcomeVector::new(vec![true]);
        assert!(matches!(comp(&m, &short), Err(Error::DimensionMismatch { .. })));
        assert!(dd(&m, &short).is_err());
        assert!(scomp(&m, &short).is_err());
    }

    #[test]
    fn unexplained_positive_with_no_candidates_is_left_alone() {
        // Test 1 is positive but its only item also sits in a negative test:
        // inconsistent with the noiseless model, so nothing can explain it.
        let m = DesignMatrix::from_rows(2, 2, vec![vec![0], vec![0]]).unwrap();
        let y = OutcomeVector::new(vec![false, true]);
        let r = w_scomp(&m, &y, 1.0f64).unwrap();
        assert!(r.estimate.is_empty());
        assert!(r.trace.unwrap().is_empty());
    }

    #[test]
    fn algorithm_names() {
        for a in Algorithm::ALL {
            assert_eq!(a.as_str().parse::<Algorithm>().unwrap(), a);
        }
        assert!("lp".parse::<Algorithm>().is_err());
        assert_eq!(serde_json::to_string(&Algorithm::WScomp).unwrap(), "\"wscomp\"");
    }
}

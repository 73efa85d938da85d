//! Pooling-matrix generators.
//!
//! A design is stored sparsely in both directions: `rows[t]` lists the items
//! pooled into test `t` and `cols[i]` lists the tests item `i` takes part in.
//! Each column is generated from its own ChaCha stream keyed by the column
//! index, so a matrix is a pure function of its [`DesignSpec`].

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed::stream_rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DesignKind {
    Bernoulli,
    ConstantColumn,
    NearConstantColumn,
    Explicit,
}

impl DesignKind {
    pub fn as_str(self) -> &'static str {
        match self {
            DesignKind::Bernoulli => "bernoulli",
            DesignKind::ConstantColumn => "constant_column",
            DesignKind::NearConstantColumn => "near_constant_column",
            DesignKind::Explicit => "explicit",
        }
    }
}

impl fmt::Display for DesignKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DesignKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bernoulli" => Ok(DesignKind::Bernoulli),
            "constant_column" | "constant-column" | "constant" => Ok(DesignKind::ConstantColumn),
            "near_constant_column" | "near-constant-column" | "near-constant" => Ok(DesignKind::NearConstantColumn),
            "explicit" => Ok(DesignKind::Explicit),
            other => Err(Error::param(format!("unknown design kind `{other}`"))),
        }
    }
}

/// Generating parameters recorded alongside a matrix.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DesignParams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(rename = "L", default, skip_serializing_if = "Option::is_none")]
    pub column_weight: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DesignSpec {
    pub design_kind: DesignKind,
    pub n_items: usize,
    pub n_tests: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inclusion_prob: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub column_weight: Option<usize>,
    pub seed: u64,
}

impl DesignSpec {
    pub fn bernoulli(n_items: usize, n_tests: usize, p: f64, seed: u64) -> Self {
        DesignSpec {
            design_kind: DesignKind::Bernoulli,
            n_items,
            n_tests,
            inclusion_prob: Some(p),
            column_weight: None,
            seed,
        }
    }

    pub fn constant_column(n_items: usize, n_tests: usize, column_weight: usize, seed: u64) -> Self {
        DesignSpec {
            design_kind: DesignKind::ConstantColumn,
            n_items,
            n_tests,
            inclusion_prob: None,
            column_weight: Some(column_weight),
            seed,
        }
    }

    pub fn near_constant_column(n_items: usize, n_tests: usize, column_weight: usize, seed: u64) -> Self {
        DesignSpec {
            design_kind: DesignKind::NearConstantColumn,
            column_weight: Some(column_weight),
            ..Self::constant_column(n_items, n_tests, column_weight, seed)
        }
    }

    /// Checks that exactly the parameter relevant to the design kind is set
    /// and that it lies in range.
    pub fn validate(&self) -> Result<()> {
        if self.n_items == 0 || self.n_tests == 0 {
            return Err(Error::param("design needs N >= 1 and T >= 1"));
        }
        match self.design_kind {
            DesignKind::Bernoulli => {
                if self.column_weight.is_some() {
                    return Err(Error::param("bernoulli design takes p, not L"));
                }
                let p = self
                    .inclusion_prob
                    .ok_or_else(|| Error::param("bernoulli design requires p"))?;
                if !(0.0..=1.0).contains(&p) {
                    return Err(Error::param(format!("inclusion probability {p} outside [0, 1]")));
                }
            }
            DesignKind::ConstantColumn | DesignKind::NearConstantColumn => {
                if self.inclusion_prob.is_some() {
                    return Err(Error::param("column designs take L, not p"));
                }
                let l = self
                    .column_weight
                    .ok_or_else(|| Error::param("column design requires L"))?;
                if l < 1 {
                    return Err(Error::param("column weight L must be >= 1"));
                }
                if self.design_kind == DesignKind::ConstantColumn && l > self.n_tests {
                    return Err(Error::param(format!(
                        "column weight L = {l} exceeds the number of tests T = {}",
                        self.n_tests
                    )));
                }
            }
            DesignKind::Explicit => {
                return Err(Error::param("explicit designs are built with DesignMatrix::from_rows"))
            }
        }
        Ok(())
    }

    /// Dispatches to the generator for `design_kind`.
    pub fn generate(&self) -> Result<DesignMatrix> {
        match self.design_kind {
            DesignKind::Bernoulli => gen_bernoulli(self),
            DesignKind::ConstantColumn => gen_constant_column(self),
            DesignKind::NearConstantColumn => gen_near_constant_column(self),
            DesignKind::Explicit => Err(Error::param("explicit designs cannot be generated")),
        }
    }

    fn params(&self) -> DesignParams {
        DesignParams {
            p: self.inclusion_prob,
            column_weight: self.column_weight,
            seed: Some(self.seed),
        }
    }
}

/// Binary `T x N` pooling matrix, immutable once built.
#[derive(Clone, Debug, PartialEq)]
pub struct DesignMatrix {
    n_tests: usize,
    n_items: usize,
    rows: Vec<Vec<usize>>,
    cols: Vec<Vec<usize>>,
    kind: DesignKind,
    params: DesignParams,
}

impl DesignMatrix {
    /// Builds a matrix from per-test pools. Duplicate entries collapse.
    pub fn from_rows(n_tests: usize, n_items: usize, rows: Vec<Vec<usize>>) -> Result<Self> {
        Self::from_rows_with(n_tests, n_items, rows, DesignKind::Explicit, DesignParams::default())
    }

    fn from_rows_with(
        n_tests: usize,
        n_items: usize,
        mut rows: Vec<Vec<usize>>,
        kind: DesignKind,
        params: DesignParams,
    ) -> Result<Self> {
        if rows.len() != n_tests {
            return Err(Error::DimensionMismatch {
                what: "design rows",
                expected: n_tests,
                found: rows.len(),
            });
        }
        let mut cols = vec![Vec::new(); n_items];
        for (t, row) in rows.iter_mut().enumerate() {
            row.sort_unstable();
            row.dedup();
            if let Some(&bad) = row.iter().find(|&&i| i >= n_items) {
                return Err(Error::param(format!(
                    "test {t} references item {bad}, but N = {n_items}"
                )));
            }
            for &i in row.iter() {
                cols[i].push(t);
            }
        }
        Ok(DesignMatrix {
            n_tests,
            n_items,
            rows,
            cols,
            kind,
            params,
        })
    }

    fn from_cols(n_tests: usize, cols: Vec<Vec<usize>>, kind: DesignKind, params: DesignParams) -> Self {
        let n_items = cols.len();
        let mut rows = vec![Vec::new(); n_tests];
        for (i, col) in cols.iter().enumerate() {
            debug_assert!(col.windows(2).all(|w| w[0] < w[1]));
            for &t in col {
                rows[t].push(i);
            }
        }
        DesignMatrix {
            n_tests,
            n_items,
            rows,
            cols,
            kind,
            params,
        }
    }

    pub fn n_tests(&self) -> usize {
        self.n_tests
    }

    pub fn n_items(&self) -> usize {
        self.n_items
    }

    /// Items in test `t`, ascending.
    pub fn pool(&self, t: usize) -> &[usize] {
        &self.rows[t]
    }

    /// Tests containing item `i`, ascending.
    pub fn tests_of(&self, i: usize) -> &[usize] {
        &self.cols[i]
    }

    pub fn rows(&self) -> &[Vec<usize>] {
        &self.rows
    }

    pub fn cols(&self) -> &[Vec<usize>] {
        &self.cols
    }

    pub fn kind(&self) -> DesignKind {
        self.kind
    }

    pub fn params(&self) -> &DesignParams {
        &self.params
    }

    pub fn contains(&self, t: usize, i: usize) -> bool {
        self.rows[t].binary_search(&i).is_ok()
    }

    /// Total number of ones.
    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    /// Dense row-major view, mostly for tests and small examples.
    pub fn to_dense(&self) -> Vec<Vec<bool>> {
        self.rows
            .iter()
            .map(|row| {
                let mut dense = vec![false; self.n_items];
                for &i in row {
                    dense[i] = true;
                }
                dense
            })
            .collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&DesignFile::from(self))?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: DesignFile = serde_json::from_str(text)?;
        DesignMatrix::from_rows_with(file.n_tests, file.n_items, file.rows, file.design_kind, file.params)
    }
}

/// On-disk layout of a design matrix. Only the row view is stored.
#[derive(Serialize, Deserialize)]
struct DesignFile {
    n_tests: usize,
    n_items: usize,
    rows: Vec<Vec<usize>>,
    #[serde(default = "explicit_kind")]
    design_kind: DesignKind,
    #[serde(default)]
    params: DesignParams,
}

fn explicit_kind() -> DesignKind {
    DesignKind::Explicit
}

impl From<&DesignMatrix> for DesignFile {
    fn from(m: &DesignMatrix) -> Self {
        DesignFile {
            n_tests: m.n_tests,
            n_items: m.n_items,
            rows: m.rows.clone(),
            design_kind: m.kind,
            params: m.params.clone(),
        }
    }
}

impl Serialize for DesignMatrix {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        DesignFile::from(self).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for DesignMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let file = DesignFile::deserialize(deserializer)?;
        DesignMatrix::from_rows_with(file.n_tests, file.n_items, file.rows, file.design_kind, file.params)
            .map_err(serde::de::Error::custom)
    }
}

fn expect_kind(spec: &DesignSpec, kind: DesignKind) -> Result<()> {
    if spec.design_kind != kind {
        return Err(Error::param(format!(
            "expected a {kind} spec, got {}",
            spec.design_kind
        )));
    }
    spec.validate()
}

/// Every entry is an independent Bernoulli(p) draw.
pub fn gen_bernoulli(spec: &DesignSpec) -> Result<DesignMatrix> {
    expect_kind(spec, DesignKind::Bernoulli)?;
    let p = spec.inclusion_prob.unwrap_or_default();
    let cols = (0..spec.n_items)
        .map(|i| {
            let mut rng = stream_rng(spec.seed, i as u64);
            (0..spec.n_tests).filter(|_| rng.random_bool(p)).collect()
        })
        .collect();
    Ok(DesignMatrix::from_cols(
        spec.n_tests,
        cols,
        spec.design_kind,
        spec.params(),
    ))
}

/// Each item joins exactly `L` distinct tests, drawn without replacement.
pub fn gen_constant_column(spec: &DesignSpec) -> Result<DesignMatrix> {
    expect_kind(spec, DesignKind::ConstantColumn)?;
    let l = spec.column_weight.unwrap_or_default();
    let cols = (0..spec.n_items)
        .map(|i| {
            let mut rng = stream_rng(spec.seed, i as u64);
            let mut col = index::sample(&mut rng, spec.n_tests, l).into_vec();
            col.sort_unstable();
            col
        })
        .collect();
    Ok(DesignMatrix::from_cols(
        spec.n_tests,
        cols,
        spec.design_kind,
        spec.params(),
    ))
}

/// Each item draws `L` tests uniformly with replacement; repeats collapse, so
/// the column weight lies in `1..=L`.
pub fn gen_near_constant_column(spec: &DesignSpec) -> Result<DesignMatrix> {
    expect_kind(spec, DesignKind::NearConstantColumn)?;
    let l = spec.column_weight.unwrap_or_default();
    let cols = (0..spec.n_items)
        .map(|i| {
            let mut rng = stream_rng(spec.seed, i as u64);
            let picked: BTreeSet<usize> = (0..l).map(|_| rng.random_range(0..spec.n_tests)).collect();
            picked.into_iter().collect()
        })
        .collect();
    Ok(DesignMatrix::from_cols(
        spec.n_tests,
        cols,
        spec.design_kind,
        spec.params(),
    ))
}

/// `p = 1/(k+1)`, the inclusion probability minimising the Bernoulli-design
/// error bound.
pub fn optimal_bernoulli_p(k: usize) -> Result<f64> {
    if k == 0 {
        return Err(Error::param("optimal p is undefined for k = 0"));
    }
    Ok(1.0 / (k as f64 + 1.0))
}

/// `L = floor((T/k) ln 2)`. Zero is reported as an error rather than clamped.
pub fn optimal_column_weight(n_tests: usize, k: usize) -> Result<usize> {
    if n_tests == 0 || k == 0 {
        return Err(Error::param("optimal column weight needs T >= 1 and k >= 1"));
    }
    let l = (n_tests as f64 / k as f64 * std::f64::consts::LN_2).floor() as usize;
    if l == 0 {
        return Err(Error::param(format!(
            "T = {n_tests} too small for k = {k} under this design (L would be 0)"
        )));
    }
    Ok(l)
}

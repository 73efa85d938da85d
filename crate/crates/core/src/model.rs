//! Defective sets and the noiseless OR test model.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::design::DesignMatrix;
use crate::error::{Error, Result};
use crate::seed::stream_rng;

/// A subset of `{0, .., N-1}`, kept sorted and duplicate-free.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawItemSet")]
pub struct ItemSet {
    members: Vec<usize>,
    universe_size: usize,
}

#[derive(Deserialize)]
struct RawItemSet {
    members: Vec<usize>,
    universe_size: usize,
}

impl TryFrom<RawItemSet> for ItemSet {
    type Error = Error;

    fn try_from(raw: RawItemSet) -> Result<Self> {
        ItemSet::new(raw.universe_size, raw.members)
    }
}

impl ItemSet {
    pub fn empty(universe_size: usize) -> Self {
        ItemSet {
            members: Vec::new(),
            universe_size,
        }
    }

    pub fn new(universe_size: usize, members: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut members: Vec<usize> = members.into_iter().collect();
        members.sort_unstable();
        members.dedup();
        if let Some(&bad) = members.last().filter(|&&i| i >= universe_size) {
            return Err(Error::param(format!(
                "item {bad} outside universe of size {universe_size}"
            )));
        }
        Ok(ItemSet { members, universe_size })
    }

    /// Items whose flag is set.
    pub fn from_mask(mask: &[bool]) -> Self {
        ItemSet {
            members: mask.iter().enumerate().filter_map(|(i, &b)| b.then_some(i)).collect(),
            universe_size: mask.len(),
        }
    }

    pub fn to_mask(&self) -> Vec<bool> {
        let mut mask = vec![false; self.universe_size];
        for &i in &self.members {
            mask[i] = true;
        }
        mask
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn universe_size(&self) -> usize {
        self.universe_size
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.members.binary_search(&i).is_ok()
    }

    pub fn is_subset(&self, other: &ItemSet) -> bool {
        self.members.iter().all(|&i| other.contains(i))
    }

    pub fn intersection_len(&self, other: &ItemSet) -> usize {
        self.members.iter().filter(|&&i| other.contains(i)).count()
    }

    /// `{0..N} \ self`.
    pub fn complement(&self) -> ItemSet {
        let mut mask = self.to_mask();
        mask.iter_mut().for_each(|b| *b = !*b);
        ItemSet::from_mask(&mask)
    }

    pub(crate) fn check_universe(&self, what: &'static str, n: usize) -> Result<()> {
        if self.universe_size != n {
            return Err(Error::DimensionMismatch {
                what,
                expected: n,
                found: self.universe_size,
            });
        }
        Ok(())
    }
}

/// Test outcomes `Y`, one bit per test. Stored on disk as `{"bits": [0, 1, ..]}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct OutcomeVector {
    bits: Vec<bool>,
}

impl OutcomeVector {
    pub fn new(bits: Vec<bool>) -> Self {
        OutcomeVector { bits }
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn is_positive(&self, t: usize) -> bool {
        self.bits[t]
    }

    pub fn n_positive(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

#[derive(Serialize, Deserialize)]
struct OutcomeFile {
    bits: Vec<u8>,
}

impl Serialize for OutcomeVector {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        OutcomeFile {
            bits: self.bits.iter().map(|&b| u8::from(b)).collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for OutcomeVector {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let file = OutcomeFile::deserialize(deserializer)?;
        let bits = file
            .bits
            .into_iter()
            .map(|b| match b {
                0 => Ok(false),
                1 => Ok(true),
                other => Err(serde::de::Error::custom(format!("outcome bit {other} is not 0 or 1"))),
            })
            .collect::<std::result::Result<_, _>>()?;
        Ok(OutcomeVector { bits })
    }
}

/// Uniform `k`-subset of `{0, .., N-1}` by sequential selection sampling:
/// item `i` is taken with probability `(k - taken) / (N - i)`.
pub fn sample_defective_set(n: usize, k: usize, seed: u64) -> Result<ItemSet> {
    if k > n {
        return Err(Error::param(format!("k = {k} exceeds N = {n}")));
    }
    let mut rng = stream_rng(seed, 0);
    let mut members = Vec::with_capacity(k);
    for i in 0..n {
        let needed = k - members.len();
        if needed == 0 {
            break;
        }
        let remaining = n - i;
        if rng.random_range(0..remaining) < needed {
            members.push(i);
        }
    }
    Ok(ItemSet {
        members,
        universe_size: n,
    })
}

/// `Y_t = 1` iff pool `t` holds at least one member of `defectives`.
pub fn run_tests(design: &DesignMatrix, defectives: &ItemSet) -> Result<OutcomeVector> {
    defectives.check_universe("defective set", design.n_items())?;
    let bits = design
        .rows()
        .iter()
        .map(|pool| pool.iter().any(|&i| defectives.contains(i)))
        .collect();
    Ok(OutcomeVector { bits })
}

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::DataError;
use crate::seed::{derive_seed, rng_from_seed};

/// A train/test partition of `0..n`. Both sides are kept sorted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitIndices {
    pub train_rows: Vec<usize>,
    pub test_rows: Vec<usize>,
}

impl SplitIndices {
    /// Validates that the two sides are non-empty and partition `0..n`.
    pub fn new(mut train_rows: Vec<usize>, mut test_rows: Vec<usize>, n: usize) -> Result<Self, DataError> {
        if train_rows.is_empty() || test_rows.is_empty() {
            return Err(DataError::EmptyRows);
        }
        train_rows.sort_unstable();
        test_rows.sort_unstable();
        let mut seen = vec![false; n];
        for &r in train_rows.iter().chain(&test_rows) {
            if r >= n {
                return Err(DataError::RowOutOfRange { index: r, n });
            }
            if seen[r] {
                return Err(DataError::InvalidPlan(format!("row {r} appears twice")));
            }
            seen[r] = true;
        }
        if let Some(r) = seen.iter().position(|s| !s) {
            return Err(DataError::InvalidPlan(format!("row {r} is in neither side")));
        }
        Ok(Self { train_rows, test_rows })
    }

    pub fn n(&self) -> usize {
        self.train_rows.len() + self.test_rows.len()
    }

    /// SHA-256 over both index lists; equal digests mean identical splits.
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        for (tag, rows) in [(b'T', &self.train_rows), (b'V', &self.test_rows)] {
            h.update([tag]);
            for &r in rows {
                h.update((r as u64).to_le_bytes());
            }
        }
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }
}

fn permutation(n: usize, seed: u64) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut rng_from_seed(seed));
    perm
}

/// Seeded random split: a uniform permutation of `0..n` whose first
/// `train_count` entries form the training side.
pub fn split_train_test(n: usize, train_count: usize, seed: u64) -> Result<SplitIndices, DataError> {
    if train_count == 0 || train_count >= n {
        return Err(DataError::TrainCountOutOfRange { train_count, n });
    }
    let perm = permutation(n, seed);
    let (train, test) = perm.split_at(train_count);
    SplitIndices::new(train.to_vec(), test.to_vec(), n)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ResampleScheme {
    RepeatedRandomSplit { train_fraction: f64 },
    KFold { k: usize },
}

/// How the benchmark draws its paired train/test splits.
///
/// For `KFold`, `runs` counts repetitions of the whole k-fold partition,
/// each with its own shuffle; `runs = 1` gives exactly `k` splits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResamplePlan {
    pub scheme: ResampleScheme,
    pub runs: usize,
    pub seed: u64,
}

impl ResamplePlan {
    pub fn random_split(runs: usize, train_fraction: f64, seed: u64) -> Self {
        Self {
            scheme: ResampleScheme::RepeatedRandomSplit { train_fraction },
            runs,
            seed,
        }
    }

    pub fn k_fold(k: usize, seed: u64) -> Self {
        Self {
            scheme: ResampleScheme::KFold { k },
            runs: 1,
            seed,
        }
    }

    pub fn validate(&self, n: usize) -> Result<(), DataError> {
        if self.runs == 0 {
            return Err(DataError::InvalidPlan("runs must be positive".into()));
        }
        match self.scheme {
            ResampleScheme::RepeatedRandomSplit { train_fraction } => {
                if !(train_fraction > 0.0 && train_fraction < 1.0) {
                    return Err(DataError::InvalidPlan(format!(
                        "train fraction {train_fraction} outside (0, 1)"
                    )));
                }
                if n < 2 {
                    return Err(DataError::InvalidPlan(format!("cannot split {n} rows")));
                }
            }
            ResampleScheme::KFold { k } => {
                if k < 2 || k > n {
                    return Err(DataError::InvalidPlan(format!("k = {k} outside [2, {n}]")));
                }
            }
        }
        Ok(())
    }

    /// Training-set size used by the random-split scheme for `n` rows.
    pub fn train_count(train_fraction: f64, n: usize) -> usize {
        ((train_fraction * n as f64).round() as usize).clamp(1, n - 1)
    }
}

pub fn make_resamples(n: usize, plan: &ResamplePlan) -> Result<Vec<SplitIndices>, DataError> {
    plan.validate(n)?;
    match plan.scheme {
        ResampleScheme::RepeatedRandomSplit { train_fraction } => {
            let train_count = ResamplePlan::train_count(train_fraction, n);
            (0..plan.runs)
                .map(|run| split_train_test(n, train_count, derive_seed(plan.seed, &[run as u64])))
                .collect()
        }
        ResampleScheme::KFold { k } => {
            let mut splits = Vec::with_capacity(plan.runs * k);
            for rep in 0..plan.runs {
                let perm = permutation(n, derive_seed(plan.seed, &[rep as u64]));
                let (base, extra) = (n / k, n % k);
                let mut start = 0;
                for fold in 0..k {
                    let size = base + usize::from(fold < extra);
                    let test = perm[start..start + size].to_vec();
                    let train = perm[..start].iter().chain(&perm[start + size..]).copied().collect();
                    splits.push(SplitIndices::new(train, test, n)?);
                    start += size;
                }
            }
            Ok(splits)
        }
    }
}

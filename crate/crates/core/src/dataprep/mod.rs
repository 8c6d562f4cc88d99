//! Descriptor datasets: loading, range scaling, splitting and resampling,
//! plus a seeded synthetic generator.

mod io;
mod scaling;
mod split;
mod synthetic;

use std::collections::HashSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::Scalar;

pub use io::{load_csv, read_csv, write_csv};
pub use scaling::{apply_range_scaler, fit_range_scaler, ScalingParams, TargetScaler};
pub use split::{make_resamples, split_train_test, ResamplePlan, ResampleScheme, SplitIndices};
pub use synthetic::{gen_synthetic, SyntheticRecipe, SyntheticSpec};

#[derive(Debug, Error)]
pub enum DataError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("target column `{0}` not found in header")]
    MissingTarget(String),
    #[error("non-numeric cell {value:?} at row {row}, column `{column}`")]
    NonNumeric { row: usize, column: String, value: String },
    #[error("non-finite value at row {row}, column `{column}`")]
    NonFinite { row: usize, column: String },
    #[error("dataset needs at least 2 rows, found {0}")]
    TooFewRows(usize),
    #[error("dataset needs at least 1 feature column")]
    NoFeatures,
    #[error("duplicate feature name `{0}`")]
    DuplicateName(String),
    #[error("row {row} has {found} values, expected {expected}")]
    RaggedRow { row: usize, expected: usize, found: usize },
    #[error("empty row selection")]
    EmptyRows,
    #[error("row index {index} out of range for {n} rows")]
    RowOutOfRange { index: usize, n: usize },
    #[error("column count mismatch: scaler has {expected}, dataset has {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("train count {train_count} must lie strictly between 0 and {n}")]
    TrainCountOutOfRange { train_count: usize, n: usize },
    #[error("invalid resample plan: {0}")]
    InvalidPlan(String),
    #[error("invalid synthetic spec: {0}")]
    InvalidSpec(String),
}

/// Feature matrix (row-major, `n × p`) with its target vector.
///
/// Construction validates shape, finiteness and name uniqueness, so every
/// `Dataset` in circulation satisfies those invariants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset<F> {
    n_rows: usize,
    n_features: usize,
    features: Vec<F>,
    target: Vec<F>,
    feature_names: Vec<String>,
    target_name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    recipe: Option<SyntheticRecipe>,
}

impl<F: Scalar> Dataset<F> {
    pub fn from_rows(
        rows: Vec<Vec<F>>,
        target: Vec<F>,
        feature_names: Vec<String>,
        target_name: impl Into<String>,
    ) -> Result<Self, DataError> {
        let p = feature_names.len();
        let mut features = Vec::with_capacity(rows.len() * p);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != p {
                return Err(DataError::RaggedRow {
                    row: i,
                    expected: p,
                    found: row.len(),
                });
            }
            features.extend_from_slice(row);
        }
        if target.len() != rows.len() {
            return Err(DataError::RaggedRow {
                row: rows.len().min(target.len()),
                expected: rows.len(),
                found: target.len(),
            });
        }
        Self::from_flat(features, target, feature_names, target_name.into())
    }

    pub(crate) fn from_flat(
        features: Vec<F>,
        target: Vec<F>,
        feature_names: Vec<String>,
        target_name: String,
    ) -> Result<Self, DataError> {
        let n = target.len();
        let p = feature_names.len();
        if p == 0 {
            return Err(DataError::NoFeatures);
        }
        if n < 2 {
            return Err(DataError::TooFewRows(n));
        }
        debug_assert_eq!(features.len(), n * p);
        let mut seen = HashSet::with_capacity(p);
        for name in &feature_names {
            if !seen.insert(name.as_str()) {
                return Err(DataError::DuplicateName(name.clone()));
            }
        }
        for (idx, v) in features.iter().enumerate() {
            if !v.is_finite() {
                return Err(DataError::NonFinite {
                    row: idx / p,
                    column: feature_names[idx % p].clone(),
                });
            }
        }
        if let Some(row) = target.iter().position(|v| !v.is_finite()) {
            return Err(DataError::NonFinite {
                row,
                column: target_name,
            });
        }
        Ok(Self {
            n_rows: n,
            n_features: p,
            features,
            target,
            feature_names,
            target_name,
            recipe: None,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn row(&self, i: usize) -> &[F] {
        &self.features[i * self.n_features..(i + 1) * self.n_features]
    }

    pub fn target(&self) -> &[F] {
        &self.target
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn target_name(&self) -> &str {
        &self.target_name
    }

    /// Generator parameters when the dataset came from [`gen_synthetic`].
    pub fn recipe(&self) -> Option<&SyntheticRecipe> {
        self.recipe.as_ref()
    }

    pub fn column(&self, j: usize) -> Vec<F> {
        (0..self.n_rows)
            .map(|i| self.features[i * self.n_features + j])
            .collect()
    }

    /// Targets at the given rows, in the given order.
    pub fn targets_at(&self, rows: &[usize]) -> Vec<F> {
        rows.iter().map(|&r| self.target[r]).collect()
    }

    /// Checks that every index addresses a row of this dataset.
    pub fn check_rows(&self, rows: &[usize]) -> Result<(), DataError> {
        match rows.iter().find(|&&r| r >= self.n_rows) {
            Some(&index) => Err(DataError::RowOutOfRange { index, n: self.n_rows }),
            None => Ok(()),
        }
    }

    /// Same features, replaced target vector (used for target scaling).
    pub fn with_target(&self, target: Vec<F>) -> Result<Self, DataError> {
        if target.len() != self.n_rows {
            return Err(DataError::DimensionMismatch {
                expected: self.n_rows,
                found: target.len(),
            });
        }
        if let Some(row) = target.iter().position(|v| !v.is_finite()) {
            return Err(DataError::NonFinite {
                row,
                column: self.target_name.clone(),
            });
        }
        Ok(Self { target, ..self.clone() })
    }

    pub(crate) fn with_features(&self, features: Vec<F>) -> Self {
        debug_assert_eq!(features.len(), self.features.len());
        Self {
            features,
            ..self.clone()
        }
    }

    pub(crate) fn features_flat(&self) -> &[F] {
        &self.features
    }

    pub(crate) fn set_recipe(&mut self, recipe: SyntheticRecipe) {
        self.recipe = Some(recipe);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(p: usize) -> Vec<String> {
        (1..=p).map(|j| format!("d{j}")).collect()
    }

    #[test]
    fn rejects_single_row() {
        let err = Dataset::from_rows(vec![vec![1.0]], vec![1.0], names(1), "y").unwrap_err();
        assert!(matches!(err, DataError::TooFewRows(1)));
    }

    #[test]
    fn rejects_duplicate_names() {
        let err = Dataset::<f64>::from_rows(
            vec![vec![1.0, 2.0], vec![3.0, 4.0]],
            vec![0.0, 1.0],
            vec!["a".into(), "a".into()],
            "y",
        )
        .unwrap_err();
        assert!(matches!(err, DataError::DuplicateName(n) if n == "a"));
    }

    #[test]
    fn rejects_nan_feature() {
        let err = Dataset::from_rows(vec![vec![1.0], vec![f64::NAN]], vec![0.0, 1.0], names(1), "y").unwrap_err();
        assert!(matches!(err, DataError::NonFinite { row: 1, .. }));
    }

    #[test]
    fn row_and_column_access() {
        let d = Dataset::from_rows(
            vec![vec![1.0f32, 2.0], vec![3.0, 4.0], vec![5.0, 6.0]],
            vec![7.0, 8.0, 9.0],
            names(2),
            "y",
        )
        .unwrap();
        assert_eq!(d.row(1), &[3.0, 4.0]);
        assert_eq!(d.column(1), vec![2.0, 4.0, 6.0]);
        assert_eq!(d.targets_at(&[2, 0]), vec![9.0, 7.0]);
        assert!(d.check_rows(&[0, 3]).is_err());
    }
}

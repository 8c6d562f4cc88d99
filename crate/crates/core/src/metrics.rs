//! Scalar error measures for one prediction/target pair and the combined
//! train/test report.
//!
//! `r2` is defined as `1 − rse`; the squared Pearson correlation is
//! available separately as [`r2_pearson`].

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataprep::Dataset;
use crate::netcore::{predict_batch, NetError, Network};
use crate::Scalar;

/// Targets closer to zero than this make percentage errors undefined.
pub const MPE_ZERO_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum MetricError {
    #[error("length mismatch: {0} targets vs {1} predictions")]
    LengthMismatch(usize, usize),
    #[error("need at least {needed} observations, got {found}")]
    TooFew { needed: usize, found: usize },
    #[error("target is constant; relative errors are undefined")]
    ConstantTarget,
    #[error("target at row {0} is zero; percentage error is undefined")]
    ZeroTarget(usize),
    #[error("non-finite value at position {0}")]
    NonFinite(usize),
}

fn check<F: Scalar>(y: &[F], yhat: &[F], needed: usize) -> Result<(), MetricError> {
    if y.len() != yhat.len() {
        return Err(MetricError::LengthMismatch(y.len(), yhat.len()));
    }
    if y.len() < needed {
        return Err(MetricError::TooFew { needed, found: y.len() });
    }
    if let Some(i) = y.iter().zip(yhat).position(|(a, b)| !a.is_finite() || !b.is_finite()) {
        return Err(MetricError::NonFinite(i));
    }
    Ok(())
}

fn n_of<F: Scalar>(v: &[F]) -> F {
    F::of(v.len() as f64)
}

fn mean<F: Scalar>(v: &[F]) -> F {
    v.iter().copied().sum::<F>() / n_of(v)
}

fn sse<F: Scalar>(y: &[F], yhat: &[F]) -> F {
    y.iter().zip(yhat).map(|(&a, &b)| (b - a) * (b - a)).sum()
}

pub fn rmse<F: Scalar>(y: &[F], yhat: &[F]) -> Result<F, MetricError> {
    check(y, yhat, 1)?;
    Ok((sse(y, yhat) / n_of(y)).sqrt())
}

/// `(1/n) Σ |ŷ − y|`
pub fn mae<F: Scalar>(y: &[F], yhat: &[F]) -> Result<F, MetricError> {
    check(y, yhat, 1)?;
    Ok(y.iter().zip(yhat).map(|(&a, &b)| (b - a).abs()).sum::<F>() / n_of(y))
}

/// `(100/n) Σ (y − ŷ)/y`; positive when the model under-predicts.
pub fn mpe<F: Scalar>(y: &[F], yhat: &[F]) -> Result<F, MetricError> {
    check(y, yhat, 1)?;
    if let Some(row) = y.iter().position(|v| v.abs() <= F::of(MPE_ZERO_TOLERANCE)) {
        return Err(MetricError::ZeroTarget(row));
    }
    let sum: F = y.iter().zip(yhat).map(|(&a, &b)| (a - b) / a).sum();
    Ok(sum / n_of(y) * F::of(100.0))
}

/// `Σ(ŷ − y)² / Σ(ȳ − y)²`
pub fn rse<F: Scalar>(y: &[F], yhat: &[F]) -> Result<F, MetricError> {
    check(y, yhat, 2)?;
    let ybar = mean(y);
    let denom: F = y.iter().map(|&a| (ybar - a) * (ybar - a)).sum();
    if denom == F::zero() {
        return Err(MetricError::ConstantTarget);
    }
    Ok(sse(y, yhat) / denom)
}

/// `1 − rse`. Negative when the model is worse than predicting the mean.
pub fn r2<F: Scalar>(y: &[F], yhat: &[F]) -> Result<F, MetricError> {
    rse(y, yhat).map(|v| F::one() - v)
}

/// Squared Pearson correlation between `y` and `ŷ`.
pub fn r2_pearson<F: Scalar>(y: &[F], yhat: &[F]) -> Result<F, MetricError> {
    check(y, yhat, 2)?;
    let (my, mh) = (mean(y), mean(yhat));
    let (mut sxy, mut sxx, mut syy) = (F::zero(), F::zero(), F::zero());
    for (&a, &b) in y.iter().zip(yhat) {
        sxy = sxy + (a - my) * (b - mh);
        sxx = sxx + (a - my) * (a - my);
        syy = syy + (b - mh) * (b - mh);
    }
    if sxx == F::zero() || syy == F::zero() {
        return Err(MetricError::ConstantTarget);
    }
    Ok(sxy * sxy / (sxx * syy))
}

/// The five measures for one (model, split) pair. Measures that are
/// undefined on the given data (zero targets for MPE, constant targets for
/// RSE/R²) are `None`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "F: Scalar"))]
pub struct MetricsReport<F> {
    pub rmse: F,
    pub r2: Option<F>,
    pub mae: F,
    pub mpe: Option<F>,
    pub rse: Option<F>,
    pub n: usize,
}

impl<F: Scalar> MetricsReport<F> {
    pub fn from_predictions(y: &[F], yhat: &[F]) -> Result<Self, MetricError> {
        let rmse = rmse(y, yhat)?;
        let mae = mae(y, yhat)?;
        let rse = rse(y, yhat).ok();
        Ok(Self {
            rmse,
            r2: rse.map(|v| F::one() - v),
            mae,
            mpe: mpe(y, yhat).ok(),
            rse,
            n: y.len(),
        })
    }
}

/// Column order of [`table_row`].
pub const TABLE_HEADER: [&str; 10] = [
    "RMSE-train",
    "RMSE-test",
    "R2-train",
    "R2-test",
    "MAE-train",
    "MAE-test",
    "MPE-train",
    "MPE-test",
    "RSE-train",
    "RSE-test",
];

/// Train/test pairs of each measure, in [`TABLE_HEADER`] order.
pub fn table_row<F: Scalar>(train: &MetricsReport<F>, test: &MetricsReport<F>) -> [Option<F>; 10] {
    [
        Some(train.rmse),
        Some(test.rmse),
        train.r2,
        test.r2,
        Some(train.mae),
        Some(test.mae),
        train.mpe,
        test.mpe,
        train.rse,
        test.rse,
    ]
}

/// Renders a table row as CSV, with `NA` for undefined cells.
pub fn table_row_csv<F: Scalar>(label: &str, train: &MetricsReport<F>, test: &MetricsReport<F>) -> String {
    let mut out = String::from("model,");
    out.push_str(&TABLE_HEADER.join(","));
    out.push('\n');
    out.push_str(label);
    for cell in table_row(train, test) {
        out.push(',');
        match cell {
            Some(v) => out.push_str(&v.to_string()),
            None => out.push_str("NA"),
        }
    }
    out.push('\n');
    out
}

#[derive(Debug, Error)]
pub enum EvalError {
    #[error(transparent)]
    Net(#[from] NetError),
    #[error(transparent)]
    Metric(#[from] MetricError),
}

/// Predicts each split once and computes every measure on both.
pub fn evaluate_all<F: Scalar>(
    net: &Network<F>,
    data: &Dataset<F>,
    train_rows: &[usize],
    test_rows: &[usize],
) -> Result<(MetricsReport<F>, MetricsReport<F>), EvalError> {
    let report = |rows: &[usize]| -> Result<MetricsReport<F>, EvalError> {
        let yhat = predict_batch(net, data, rows)?;
        Ok(MetricsReport::from_predictions(&data.targets_at(rows), &yhat)?)
    };
    Ok((report(train_rows)?, report(test_rows)?))
}

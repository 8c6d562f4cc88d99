use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{DataError, Dataset};
use crate::Scalar;

/// Per-column min/max fitted on a row subset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingParams<F> {
    pub min: Vec<F>,
    pub max: Vec<F>,
    /// Columns whose fitted max equals min; these scale to 0.
    pub constant_columns: BTreeSet<usize>,
}

impl<F: Scalar> ScalingParams<F> {
    pub fn n_columns(&self) -> usize {
        self.min.len()
    }

    pub fn scale_value(&self, column: usize, v: F) -> F {
        if self.constant_columns.contains(&column) {
            F::zero()
        } else {
            (v - self.min[column]) / (self.max[column] - self.min[column])
        }
    }

    /// Inverse of [`scale_value`](Self::scale_value). Constant columns map
    /// back to their fitted value.
    pub fn unscale_value(&self, column: usize, s: F) -> F {
        if self.constant_columns.contains(&column) {
            self.min[column]
        } else {
            s * (self.max[column] - self.min[column]) + self.min[column]
        }
    }
}

pub fn fit_range_scaler<F: Scalar>(data: &Dataset<F>, rows: &[usize]) -> Result<ScalingParams<F>, DataError> {
    if rows.is_empty() {
        return Err(DataError::EmptyRows);
    }
    data.check_rows(rows)?;
    let p = data.n_features();
    let first = data.row(rows[0]);
    let mut min = first.to_vec();
    let mut max = first.to_vec();
    for &r in &rows[1..] {
        for (j, &v) in data.row(r).iter().enumerate() {
            if v < min[j] {
                min[j] = v;
            }
            if v > max[j] {
                max[j] = v;
            }
        }
    }
    let constant_columns = (0..p).filter(|&j| max[j] == min[j]).collect();
    Ok(ScalingParams {
        min,
        max,
        constant_columns,
    })
}

/// Min-max scales every feature column; the target is left untouched.
pub fn apply_range_scaler<F: Scalar>(data: &Dataset<F>, params: &ScalingParams<F>) -> Result<Dataset<F>, DataError> {
    let p = data.n_features();
    if params.n_columns() != p {
        return Err(DataError::DimensionMismatch {
            expected: params.n_columns(),
            found: p,
        });
    }
    let scaled = data
        .features_flat()
        .iter()
        .enumerate()
        .map(|(idx, &v)| params.scale_value(idx % p, v))
        .collect();
    Ok(data.with_features(scaled))
}

/// Optional min-max scaling of the target, fitted on training rows.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TargetScaler<F> {
    pub min: F,
    pub max: F,
}

impl<F: Scalar> TargetScaler<F> {
    pub fn fit(data: &Dataset<F>, rows: &[usize]) -> Result<Self, DataError> {
        if rows.is_empty() {
            return Err(DataError::EmptyRows);
        }
        data.check_rows(rows)?;
        let t = data.target();
        let (min, max) = rows
            .iter()
            .fold((t[rows[0]], t[rows[0]]), |(lo, hi), &r| (lo.min(t[r]), hi.max(t[r])));
        Ok(Self { min, max })
    }

    fn span(&self) -> F {
        if self.max > self.min {
            self.max - self.min
        } else {
            F::one()
        }
    }

    pub fn scale(&self, y: F) -> F {
        (y - self.min) / self.span()
    }

    pub fn unscale(&self, s: F) -> F {
        s * self.span() + self.min
    }

    pub fn apply(&self, data: &Dataset<F>) -> Result<Dataset<F>, DataError> {
        data.with_target(data.target().iter().map(|&y| self.scale(y)).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn one_column(values: &[f64]) -> Dataset<f64> {
        Dataset::from_rows(
            values.iter().map(|&v| vec![v]).collect(),
            vec![1.0; values.len()],
            vec!["d1".into()],
            "y",
        )
        .unwrap()
    }

    fn all_rows(d: &Dataset<f64>) -> Vec<usize> {
        (0..d.n_rows()).collect()
    }

    #[test]
    fn min_max_over_all_rows() {
        let d = one_column(&[2.0, 4.0, 6.0]);
        let params = fit_range_scaler(&d, &all_rows(&d)).unwrap();
        assert_eq!((params.min[0], params.max[0]), (2.0, 6.0));
        let scaled = apply_range_scaler(&d, &params).unwrap();
        assert_eq!(scaled.column(0), vec![0.0, 0.5, 1.0]);
        assert_eq!(scaled.target(), d.target());
    }

    #[test]
    fn constant_column_maps_to_zero() {
        let d = one_column(&[5.0, 5.0, 5.0]);
        let params = fit_range_scaler(&d, &all_rows(&d)).unwrap();
        assert!(params.constant_columns.contains(&0));
        assert_eq!(apply_range_scaler(&d, &params).unwrap().column(0), vec![0.0; 3]);
    }

    #[test]
    fn train_only_fit_can_leave_unit_interval() {
        let d = one_column(&[1.0, 2.0, 3.0, 10.0, -4.0]);
        let params = fit_range_scaler(&d, &[0, 1, 2]).unwrap();
        let s = apply_range_scaler(&d, &params).unwrap().column(0);
        assert_eq!(s[3], 4.5);
        assert_eq!(s[4], -2.5);
    }

    #[test]
    fn empty_rows_rejected() {
        let d = one_column(&[1.0, 2.0]);
        assert!(matches!(fit_range_scaler(&d, &[]), Err(DataError::EmptyRows)));
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let d = one_column(&[1.0, 2.0]);
        let params = ScalingParams {
            min: vec![0.0, 0.0],
            max: vec![1.0, 1.0],
            constant_columns: BTreeSet::new(),
        };
        assert!(matches!(
            apply_range_scaler(&d, &params),
            Err(DataError::DimensionMismatch { expected: 2, found: 1 })
        ));
    }

    #[test]
    fn scaled_data_is_fixed_point() {
        let d = one_column(&[3.0, 7.0, 4.5, 5.0]);
        let rows = all_rows(&d);
        let once = apply_range_scaler(&d, &fit_range_scaler(&d, &rows).unwrap()).unwrap();
        let twice = apply_range_scaler(&once, &fit_range_scaler(&once, &rows).unwrap()).unwrap();
        assert_eq!(once, twice);
    }

    #[test]
    fn target_scaler_round_trip() {
        let d = one_column(&[0.0, 1.0, 2.0]).with_target(vec![2.0, 6.0, 4.0]).unwrap();
        let ts = TargetScaler::fit(&d, &[0, 1, 2]).unwrap();
        let scaled = ts.apply(&d).unwrap();
        assert_eq!(scaled.target(), &[0.0, 1.0, 0.5]);
        assert_eq!(ts.unscale(0.5), 4.0);
    }

    proptest! {
        #[test]
        fn round_trip_within_1e12(values in prop::collection::vec(-1e6f64..1e6, 2..40)) {
            let d = one_column(&values);
            let params = fit_range_scaler(&d, &all_rows(&d)).unwrap();
            prop_assume!(params.constant_columns.is_empty());
            let scaled = apply_range_scaler(&d, &params).unwrap();
            for (orig, s) in values.iter().zip(scaled.column(0)) {
                prop_assert!((0.0..=1.0).contains(&s));
                let back = params.unscale_value(0, s);
                let scale = orig.abs().max(params.max[0].abs()).max(params.min[0].abs());
                prop_assert!((back - orig).abs() <= 1e-12 * scale);
            }
        }
    }
}

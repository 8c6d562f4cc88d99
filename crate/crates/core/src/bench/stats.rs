use serde::{Deserialize, Serialize};

use super::distributions::{qtukey, student_t_two_sided_p};
use super::{BenchError, BenchmarkResult, MetricKind};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub model: String,
    pub n: usize,
    pub min: f64,
    pub median: f64,
    pub max: f64,
    pub mean: f64,
}

fn sorted(values: &[f64]) -> Vec<f64> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

/// Type-7 quantile of already sorted values.
fn quantile_sorted(v: &[f64], p: f64) -> f64 {
    let h = (v.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(v.len() - 1);
    v[lo] + (h - lo as f64) * (v[hi] - v[lo])
}

/// Min, median, max and mean of each model's successful runs.
pub fn summarize(result: &BenchmarkResult, metric: MetricKind) -> Result<Vec<Summary>, BenchError> {
    result
        .models
        .iter()
        .enumerate()
        .map(|(m, model)| {
            let v = sorted(&result.column(metric, m));
            if v.is_empty() {
                return Err(BenchError::ColumnFailed {
                    metric,
                    model: model.clone(),
                });
            }
            Ok(Summary {
                model: model.clone(),
                n: v.len(),
                min: v[0],
                median: quantile_sorted(&v, 0.5),
                max: v[v.len() - 1],
                mean: v.iter().sum::<f64>() / v.len() as f64,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxStats {
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
    pub whisker_low: f64,
    pub whisker_high: f64,
    pub outliers: Vec<f64>,
}

/// Five-number summary with Tukey whiskers at 1.5·IQR.
pub fn box_stats(values: &[f64]) -> Result<BoxStats, BenchError> {
    if values.len() < 2 {
        return Err(BenchError::InvalidArgument(format!(
            "box statistics need at least 2 values, got {}",
            values.len()
        )));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(BenchError::InvalidArgument("box statistics need finite values".into()));
    }
    let v = sorted(values);
    let (q1, median, q3) = (
        quantile_sorted(&v, 0.25),
        quantile_sorted(&v, 0.5),
        quantile_sorted(&v, 0.75),
    );
    let iqr = q3 - q1;
    let (fence_low, fence_high) = (q1 - 1.5 * iqr, q3 + 1.5 * iqr);
    let whisker_low = v.iter().copied().find(|&x| x >= fence_low).unwrap_or(q1).min(q1);
    let whisker_high = v.iter().rev().copied().find(|&x| x <= fence_high).unwrap_or(q3).max(q3);
    Ok(BoxStats {
        min: v[0],
        q1,
        median,
        q3,
        max: v[v.len() - 1],
        whisker_low,
        whisker_high,
        outliers: v.iter().copied().filter(|&x| x < fence_low || x > fence_high).collect(),
    })
}

/// One-sample t on paired differences `a − b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairedT {
    pub mean_difference: f64,
    /// `None` when the differences have zero variance but a nonzero mean.
    pub t_statistic: Option<f64>,
    pub degrees_of_freedom: usize,
    pub p_value: f64,
    pub degenerate_variance: bool,
}

pub fn paired_t(a: &[f64], b: &[f64]) -> Result<PairedT, BenchError> {
    if a.len() != b.len() {
        return Err(BenchError::InvalidArgument(format!(
            "paired samples differ in length: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    let n = a.len();
    if n < 2 {
        return Err(BenchError::InvalidArgument(format!("need at least 2 pairs, got {n}")));
    }
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let mean = d.iter().sum::<f64>() / n as f64;
    let df = n - 1;
    if d.iter().all(|&x| x == d[0]) {
        let nonzero = d[0] != 0.0;
        return Ok(PairedT {
            mean_difference: d[0],
            t_statistic: if nonzero { None } else { Some(0.0) },
            degrees_of_freedom: df,
            p_value: if nonzero { 0.0 } else { 1.0 },
            degenerate_variance: nonzero,
        });
    }
    let var = d.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / df as f64;
    let t = mean / (var.sqrt() / (n as f64).sqrt());
    Ok(PairedT {
        mean_difference: mean,
        t_statistic: Some(t),
        degrees_of_freedom: df,
        p_value: student_t_two_sided_p(t, df as f64),
        degenerate_variance: false,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairwiseComparison {
    pub model_a: String,
    pub model_b: String,
    pub metric: MetricKind,
    /// Mean of `a − b` over the complete runs.
    pub mean_difference: f64,
    pub t_statistic: Option<f64>,
    pub degrees_of_freedom: usize,
    pub p_value: f64,
    /// Bonferroni: `min(1, p · pairs)` with `pairs = M(M−1)/2`.
    pub adjusted_p: f64,
    pub pairs_adjusted: usize,
    pub runs_used: usize,
    pub degenerate_variance: bool,
    pub alpha: f64,
    /// `adjusted_p < alpha`.
    pub significant: bool,
}

fn require_runs(result: &BenchmarkResult, metric: MetricKind) -> Result<Vec<Vec<f64>>, BenchError> {
    let x = result.complete_matrix(metric);
    if x.len() < 2 {
        return Err(BenchError::InsufficientRuns {
            metric,
            needed: 2,
            found: x.len(),
        });
    }
    Ok(x)
}

/// Paired two-sided t-test between two model columns over complete runs.
pub fn paired_ttest(
    result: &BenchmarkResult,
    metric: MetricKind,
    model_a: &str,
    model_b: &str,
    alpha: f64,
) -> Result<PairwiseComparison, BenchError> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(BenchError::InvalidArgument(format!(
            "alpha must lie in (0, 1), got {alpha}"
        )));
    }
    let (ia, ib) = (result.model_index(model_a)?, result.model_index(model_b)?);
    let x = require_runs(result, metric)?;
    let a: Vec<f64> = x.iter().map(|row| row[ia]).collect();
    let b: Vec<f64> = x.iter().map(|row| row[ib]).collect();
    let t = paired_t(&a, &b)?;
    let m = result.models.len();
    let pairs = (m * (m - 1) / 2).max(1);
    let adjusted_p = (t.p_value * pairs as f64).min(1.0);
    Ok(PairwiseComparison {
        model_a: model_a.to_string(),
        model_b: model_b.to_string(),
        metric,
        mean_difference: t.mean_difference,
        t_statistic: t.t_statistic,
        degrees_of_freedom: t.degrees_of_freedom,
        p_value: t.p_value,
        adjusted_p,
        pairs_adjusted: pairs,
        runs_used: x.len(),
        degenerate_variance: t.degenerate_variance,
        alpha,
        significant: adjusted_p < alpha,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TukeyInterval {
    pub model_a: String,
    pub model_b: String,
    pub metric: MetricKind,
    /// Difference of aligned means, `a − b`.
    pub estimate: f64,
    pub lower: f64,
    pub upper: f64,
    pub confidence: f64,
    pub q_critical: f64,
    pub half_width: f64,
    pub degrees_of_freedom: usize,
    /// The interval excludes zero.
    pub significant: bool,
}

/// Tukey simultaneous intervals for every model pair after removing each
/// run's mean across models.
pub fn tukey_intervals(
    result: &BenchmarkResult,
    metric: MetricKind,
    confidence: f64,
) -> Result<Vec<TukeyInterval>, BenchError> {
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(BenchError::InvalidArgument(format!(
            "confidence must lie in (0, 1), got {confidence}"
        )));
    }
    let x = require_runs(result, metric)?;
    let (r, m) = (x.len(), result.models.len());
    let aligned: Vec<Vec<f64>> = x
        .iter()
        .map(|row| {
            let mean = row.iter().sum::<f64>() / m as f64;
            row.iter().map(|v| v - mean).collect()
        })
        .collect();
    let col_means: Vec<f64> = (0..m)
        .map(|j| aligned.iter().map(|row| row[j]).sum::<f64>() / r as f64)
        .collect();
    // Aligned rows sum to zero, so the grand mean is zero up to rounding.
    let grand = col_means.iter().sum::<f64>() / m as f64;
    let sse: f64 = aligned
        .iter()
        .flat_map(|row| row.iter().zip(&col_means).map(|(v, c)| (v - c + grand).powi(2)))
        .sum();
    let df = (r - 1) * (m - 1);
    let ms = sse / df as f64;
    let q = qtukey(confidence, m, df as f64)?;
    let half_width = q * (ms / r as f64).sqrt();
    let mut out = Vec::with_capacity(m * (m - 1) / 2);
    for i in 0..m {
        for j in i + 1..m {
            let estimate = col_means[i] - col_means[j];
            let (lower, upper) = (estimate - half_width, estimate + half_width);
            out.push(TukeyInterval {
                model_a: result.models[i].clone(),
                model_b: result.models[j].clone(),
                metric,
                estimate,
                lower,
                upper,
                confidence,
                q_critical: q,
                half_width,
                degrees_of_freedom: df,
                significant: lower > 0.0 || upper < 0.0,
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn two_models(a: &[f64], b: &[f64]) -> BenchmarkResult {
        let rmse: Vec<Vec<f64>> = a.iter().zip(b).map(|(x, y)| vec![*x, *y]).collect();
        BenchmarkResult::from_matrices(vec!["A".into(), "B".into()], rmse.clone(), rmse).unwrap()
    }

    #[test]
    fn summary_examples() {
        let r = two_models(&[1.0, 2.0, 3.0, 4.0], &[3.0, 1.0, 2.0, 3.0]);
        let s = summarize(&r, MetricKind::Rmse).unwrap();
        assert_eq!((s[0].min, s[0].median, s[0].max, s[0].mean), (1.0, 2.5, 4.0, 2.5));
        let r = two_models(&[1.0, 2.0, 3.0], &[7.0, 7.0, 7.0]);
        let s = summarize(&r, MetricKind::Rmse).unwrap();
        assert_eq!((s[0].min, s[0].median, s[0].max, s[0].mean), (1.0, 2.0, 3.0, 2.0));
        assert_eq!((s[1].min, s[1].median, s[1].max, s[1].mean), (7.0, 7.0, 7.0, 7.0));
    }

    #[test]
    fn failed_column_is_an_error() {
        let mut r = two_models(&[1.0, 2.0], &[1.0, 2.0]);
        r.rmse[0][1] = None;
        r.rmse[1][1] = None;
        assert!(matches!(
            summarize(&r, MetricKind::Rmse),
            Err(BenchError::ColumnFailed { .. })
        ));
    }

    #[test]
    fn box_examples() {
        let b = box_stats(&[1.0, 2.0, 3.0, 4.0, 5.0]).unwrap();
        assert_eq!((b.q1, b.median, b.q3), (2.0, 3.0, 4.0));
        assert!(b.outliers.is_empty());
        assert_eq!((b.whisker_low, b.whisker_high), (1.0, 5.0));

        let b = box_stats(&[1.0, 2.0, 3.0, 4.0, 100.0]).unwrap();
        assert_eq!(b.outliers, vec![100.0]);
        assert_eq!(b.whisker_high, 4.0);
        assert_eq!(b.max, 100.0);

        let b = box_stats(&[2.5; 4]).unwrap();
        for v in [b.min, b.q1, b.median, b.q3, b.max, b.whisker_low, b.whisker_high] {
            assert_eq!(v, 2.5);
        }
        assert!(box_stats(&[1.0]).is_err());
        assert!(box_stats(&[1.0, f64::NAN]).is_err());
    }

    #[test]
    fn ttest_worked_example() {
        let t = paired_t(&[1.0, 2.0, 3.0], &[0.0; 3]).unwrap();
        assert!((t.t_statistic.unwrap() - 3.4641).abs() < 1e-4);
        assert_eq!(t.degrees_of_freedom, 2);
        assert!((t.p_value - 0.0742).abs() < 1e-4);
    }

    #[test]
    fn ttest_degenerate_cases() {
        let same = paired_t(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(
            (same.mean_difference, same.p_value, same.degenerate_variance),
            (0.0, 1.0, false)
        );
        let shifted = paired_t(&[2.0, 3.0, 4.0], &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!((shifted.p_value, shifted.degenerate_variance), (0.0, true));
        assert!(shifted.t_statistic.is_none());
        assert!(paired_t(&[1.0], &[2.0]).is_err());
        assert!(paired_t(&[1.0, 2.0], &[2.0]).is_err());
    }

    #[test]
    fn same_model_against_itself() {
        let r = two_models(&[1.0, 2.0, 3.0], &[1.5, 0.5, 2.0]);
        let c = paired_ttest(&r, MetricKind::Rmse, "A", "A", 0.05).unwrap();
        assert_eq!((c.mean_difference, c.p_value, c.adjusted_p), (0.0, 1.0, 1.0));
    }

    #[test]
    fn failed_runs_drop_out_of_pairs() {
        let mut r = two_models(&[1.0, 2.0, 3.0, 10.0], &[1.5, 0.5, 2.0, 0.0]);
        r.rmse[3][0] = None;
        let c = paired_ttest(&r, MetricKind::Rmse, "A", "B", 0.05).unwrap();
        assert_eq!(c.runs_used, 3);
        assert!((c.mean_difference - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn identical_columns_give_zero_intervals() {
        let col = [1.0, 2.0, 1.5, 3.0];
        let rmse: Vec<Vec<f64>> = col.iter().map(|&v| vec![v, v, v]).collect();
        let r = BenchmarkResult::from_matrices(vec!["A".into(), "B".into(), "C".into()], rmse.clone(), rmse).unwrap();
        for iv in tukey_intervals(&r, MetricKind::Rmse, 0.95).unwrap() {
            assert_eq!(iv.estimate, 0.0);
            assert!(iv.lower <= 0.0 && iv.upper >= 0.0);
            assert!(!iv.significant);
        }
    }

    #[test]
    fn tukey_hand_computed() {
        // Two models, three runs: differences 1, 2, 3.
        let r = two_models(&[2.0, 4.0, 6.0], &[1.0, 2.0, 3.0]);
        let iv = &tukey_intervals(&r, MetricKind::Rmse, 0.95).unwrap()[0];
        assert!((iv.estimate - 2.0).abs() < 1e-12);
        assert_eq!(iv.degrees_of_freedom, 2);
        // Residual MS is var(d)/2 = 0.5, so half-width = q·sqrt(0.5/3).
        assert!((iv.half_width - iv.q_critical * (0.5f64 / 3.0).sqrt()).abs() < 1e-12);
        // The t critical value for df = 2 at 95% is 4.302653.
        assert!((iv.q_critical / 2f64.sqrt() - 4.302_653).abs() < 1e-5);
    }

    proptest! {
        #[test]
        fn box_ordering_invariant(values in prop::collection::vec(-1e3f64..1e3, 2..40)) {
            let b = box_stats(&values).unwrap();
            prop_assert!(b.min <= b.whisker_low && b.whisker_low <= b.q1 && b.q1 <= b.median);
            prop_assert!(b.median <= b.q3 && b.q3 <= b.whisker_high && b.whisker_high <= b.max);
        }

        #[test]
        fn ttest_antisymmetry(pairs in prop::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 2..20)) {
            let (a, b): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
            let ab = paired_t(&a, &b).unwrap();
            let ba = paired_t(&b, &a).unwrap();
            prop_assert_eq!(ab.mean_difference, -ba.mean_difference);
            prop_assert_eq!(ab.t_statistic.map(|t| -t), ba.t_statistic);
            prop_assert_eq!(ab.p_value, ba.p_value);
            prop_assert!((0.0..=1.0).contains(&ab.p_value));
        }

        #[test]
        fn summaries_ignore_run_order(mut values in prop::collection::vec(-1e3f64..1e3, 1..30), seed in any::<u64>()) {
            use rand::seq::SliceRandom;
            let a = two_models(&values, &values);
            values.shuffle(&mut crate::seed::rng_from_seed(seed));
            let b = two_models(&values, &values);
            let (sa, sb) = (summarize(&a, MetricKind::Rmse).unwrap(), summarize(&b, MetricKind::Rmse).unwrap());
            prop_assert_eq!(sa[0].min, sb[0].min);
            prop_assert_eq!(sa[0].median, sb[0].median);
            prop_assert_eq!(sa[0].max, sb[0].max);
            prop_assert!((sa[0].mean - sb[0].mean).abs() <= 1e-9);
        }
    }
}

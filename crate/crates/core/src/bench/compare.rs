use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::stats::{
    box_stats, paired_ttest, summarize, tukey_intervals, BoxStats, PairwiseComparison, Summary, TukeyInterval,
};
use super::{BenchError, BenchmarkResult, MetricKind};

pub const COMPARISON_SCHEMA_VERSION: u32 = 1;

pub const PAIRING_NOTE: &str = "paired two-sided t-tests on per-run differences; every model shares the same splits";
pub const ADJUSTMENT_NOTE: &str = "Bonferroni over the M(M-1)/2 pairs of each metric; raw and adjusted p both reported";
pub const ALIGNMENT_NOTE: &str =
    "Tukey intervals use aligned values (each run's mean across models removed) and the runs x models residual mean square";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelBox {
    pub model: String,
    /// `None` when the column has fewer than two successful runs.
    pub stats: Option<BoxStats>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricComparison {
    pub metric: MetricKind,
    pub runs_used: usize,
    pub excluded_runs: Vec<usize>,
    /// `M × M`: `matrix[i][j]` for `i < j` is the mean difference
    /// `model_i − model_j`; for `i > j` the adjusted p-value of the pair;
    /// the diagonal is empty.
    pub matrix: Vec<Vec<Option<f64>>>,
    pub pairwise: Vec<PairwiseComparison>,
    pub tukey: Vec<TukeyInterval>,
    pub summaries: Vec<Summary>,
    pub boxes: Vec<ModelBox>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub schema_version: u32,
    pub models: Vec<String>,
    pub alpha: f64,
    pub confidence: f64,
    pub pairing: String,
    pub adjustment: String,
    pub alignment: String,
    pub metrics: Vec<MetricComparison>,
    pub null_rejected: bool,
    pub verdict: String,
}

impl ComparisonReport {
    pub fn metric(&self, metric: MetricKind) -> Option<&MetricComparison> {
        self.metrics.iter().find(|m| m.metric == metric)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("comparison report serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, BenchError> {
        let report: ComparisonReport = serde_json::from_str(text).map_err(|e| BenchError::Malformed(e.to_string()))?;
        if report.schema_version != COMPARISON_SCHEMA_VERSION {
            return Err(BenchError::Malformed(format!(
                "unsupported schema_version {}",
                report.schema_version
            )));
        }
        Ok(report)
    }
}

fn compare_metric(
    result: &BenchmarkResult,
    metric: MetricKind,
    alpha: f64,
    confidence: f64,
) -> Result<MetricComparison, BenchError> {
    let m = result.models.len();
    let complete = result.complete_runs(metric);
    let mut matrix = vec![vec![None; m]; m];
    let mut pairwise = Vec::with_capacity(m * (m - 1) / 2);
    for i in 0..m {
        for j in i + 1..m {
            let c = paired_ttest(result, metric, &result.models[i], &result.models[j], alpha)?;
            matrix[i][j] = Some(c.mean_difference);
            matrix[j][i] = Some(c.adjusted_p);
            pairwise.push(c);
        }
    }
    let boxes = (0..m)
        .map(|j| ModelBox {
            model: result.models[j].clone(),
            stats: box_stats(&result.column(metric, j)).ok(),
        })
        .collect();
    Ok(MetricComparison {
        metric,
        runs_used: complete.len(),
        excluded_runs: (0..result.runs).filter(|r| !complete.contains(r)).collect(),
        matrix,
        pairwise,
        tukey: tukey_intervals(result, metric, confidence)?,
        summaries: summarize(result, metric)?,
        boxes,
    })
}

fn fmt_p(p: f64) -> String {
    format!("{p:.5}")
}

/// Pairwise t-tests, Tukey intervals and box statistics for RMSE and R².
pub fn compare_all(result: &BenchmarkResult, alpha: f64, confidence: f64) -> Result<ComparisonReport, BenchError> {
    result.validate()?;
    let metrics = MetricKind::ALL
        .iter()
        .map(|&metric| compare_metric(result, metric, alpha, confidence))
        .collect::<Result<Vec<_>, _>>()?;
    let rejected: Vec<&PairwiseComparison> = metrics
        .iter()
        .flat_map(|m| m.pairwise.iter())
        .filter(|c| c.significant)
        .collect();
    let verdict = if rejected.is_empty() {
        format!(
            "At alpha = {alpha}: no statistically significant difference between the models \
             (Bonferroni-adjusted paired t-tests); the null hypothesis of equal performance is not rejected."
        )
    } else {
        let list: Vec<String> = rejected
            .iter()
            .map(|c| {
                format!(
                    "{} {} vs {} (adjusted p = {})",
                    c.metric,
                    c.model_a,
                    c.model_b,
                    fmt_p(c.adjusted_p)
                )
            })
            .collect();
        format!(
            "At alpha = {alpha}: the null hypothesis of equal performance is rejected for {}.",
            list.join("; ")
        )
    };
    let null_rejected = !rejected.is_empty();
    Ok(ComparisonReport {
        schema_version: COMPARISON_SCHEMA_VERSION,
        models: result.models.clone(),
        alpha,
        confidence,
        pairing: PAIRING_NOTE.into(),
        adjustment: ADJUSTMENT_NOTE.into(),
        alignment: ALIGNMENT_NOTE.into(),
        metrics,
        null_rejected,
        verdict,
    })
}

/// Upper/lower-triangle matrices for each metric followed by the verdict.
pub fn render_text(report: &ComparisonReport) -> String {
    let width = report.models.iter().map(String::len).max().unwrap_or(0).max(10) + 2;
    let mut out = String::new();
    for mc in &report.metrics {
        let _ = writeln!(
            out,
            "{}: mean differences row - column (upper triangle), Bonferroni-adjusted p-values (lower triangle); {} paired runs",
            mc.metric, mc.runs_used
        );
        let _ = write!(out, "{:width$}", "");
        for m in &report.models {
            let _ = write!(out, "{m:>width$}");
        }
        out.push('\n');
        for (i, row) in mc.matrix.iter().enumerate() {
            let _ = write!(out, "{:width$}", report.models[i]);
            for (j, cell) in row.iter().enumerate() {
                let text = match cell {
                    _ if i == j => "-".to_string(),
                    Some(v) if i < j => format!("{v:.5}"),
                    Some(p) => fmt_p(*p),
                    None => "NA".to_string(),
                };
                let _ = write!(out, "{text:>width$}");
            }
            out.push('\n');
        }
        out.push('\n');
    }
    let _ = writeln!(out, "{}", report.verdict);
    out
}

/// One line per Tukey interval.
pub fn render_tukey_text(report: &ComparisonReport) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "Tukey simultaneous {:.0}% intervals after alignment",
        report.confidence * 100.0
    );
    let _ = writeln!(
        out,
        "{:<6} {:<24} {:>12} {:>12} {:>12} {:>8}",
        "metric", "pair", "estimate", "lower", "upper", "excludes0"
    );
    for mc in &report.metrics {
        for iv in &mc.tukey {
            let _ = writeln!(
                out,
                "{:<6} {:<24} {:>12.6} {:>12.6} {:>12.6} {:>8}",
                mc.metric.label(),
                format!("{}-{}", iv.model_a, iv.model_b),
                iv.estimate,
                iv.lower,
                iv.upper,
                if iv.significant { "yes" } else { "no" }
            );
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn noisy(models: usize, runs: usize, shift: &[f64]) -> BenchmarkResult {
        let mut rng = crate::seed::rng_from_seed(42);
        use rand::Rng;
        let rows: Vec<Vec<f64>> = (0..runs)
            .map(|_| {
                let block: f64 = rng.random::<f64>();
                (0..models)
                    .map(|m| 1.0 + block + shift[m] + 0.05 * rng.random::<f64>())
                    .collect()
            })
            .collect();
        let names = (0..models).map(|m| format!("M{m}")).collect();
        BenchmarkResult::from_matrices(names, rows.clone(), rows).unwrap()
    }

    #[test]
    fn five_models_table_shape() {
        let r = noisy(5, 10, &[0.0; 5]);
        let report = compare_all(&r, 0.05, 0.95).unwrap();
        for mc in &report.metrics {
            assert_eq!(mc.pairwise.len(), 10);
            assert_eq!(mc.tukey.len(), 10);
            assert_eq!(mc.matrix.len(), 5);
            for i in 0..5 {
                assert!(mc.matrix[i][i].is_none());
                for j in 0..5 {
                    if i != j {
                        assert!(mc.matrix[i][j].is_some());
                    }
                }
            }
            for j in 1..5 {
                assert!((0.0..=1.0).contains(&mc.matrix[j][0].unwrap()));
            }
        }
        assert!(report.verdict.contains("0.05"));
        let text = render_text(&report);
        assert!(text.contains("upper triangle"));
        assert_eq!(ComparisonReport::from_json(&report.to_json()).unwrap(), report);
    }

    #[test]
    fn identical_models_are_not_rejected() {
        let rows: Vec<Vec<f64>> = (0..6).map(|r| vec![r as f64 * 0.1 + 1.0; 4]).collect();
        let names = (0..4).map(|m| format!("M{m}")).collect();
        let r = BenchmarkResult::from_matrices(names, rows.clone(), rows).unwrap();
        let report = compare_all(&r, 0.05, 0.95).unwrap();
        assert!(report
            .metrics
            .iter()
            .flat_map(|m| &m.pairwise)
            .all(|c| c.p_value == 1.0));
        assert!(report.verdict.contains("no statistically significant difference"));
        assert!(!report.null_rejected);
    }

    #[test]
    fn clear_shift_is_detected() {
        let r = noisy(3, 12, &[0.0, 0.0, 0.5]);
        let report = compare_all(&r, 0.05, 0.95).unwrap();
        assert!(report.null_rejected);
        let rmse = report.metric(MetricKind::Rmse).unwrap();
        assert!(rmse.tukey.iter().filter(|iv| iv.significant).count() == 2);
        assert!(render_tukey_text(&report).contains("M0-M2"));
    }
}

//! Resampled benchmarks over several model specs and the paired statistics
//! used to compare them.

mod compare;
mod distributions;
mod quadrature;
mod stats;

use std::collections::HashSet;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataprep::{
    apply_range_scaler, fit_range_scaler, make_resamples, DataError, Dataset, ResamplePlan, TargetScaler,
};
use crate::metrics::{r2, rmse};
use crate::models::ModelSpec;
use crate::netcore::{predict_batch, NetError};
use crate::seed::derive_seed;
use crate::trainers::{train, TrainError};
use crate::Scalar;

pub use compare::{compare_all, render_text, render_tukey_text, ComparisonReport, MetricComparison, ModelBox};
pub use distributions::{ptukey, qtukey, student_t_two_sided_p, PTUKEY_TOLERANCE};
pub use quadrature::{integrate, Integral};
pub use stats::{
    box_stats, paired_t, paired_ttest, summarize, tukey_intervals, BoxStats, PairedT, PairwiseComparison, Summary,
    TukeyInterval,
};

pub const BENCHMARK_SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_ALPHA: f64 = 0.05;
pub const DEFAULT_CONFIDENCE: f64 = 0.95;

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("quadrature did not converge: {0}")]
    Quadrature(String),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Net(#[from] NetError),
    #[error(transparent)]
    Train(#[from] TrainError),
    #[error("every run of model `{model}` failed")]
    AllRunsFailed { model: String },
    #[error("{metric}: need at least {needed} complete runs, found {found}")]
    InsufficientRuns {
        metric: MetricKind,
        needed: usize,
        found: usize,
    },
    #[error("unknown model label `{0}`")]
    UnknownModel(String),
    #[error("{metric}: no successful runs for model `{model}`")]
    ColumnFailed { metric: MetricKind, model: String },
    #[error("malformed benchmark result: {0}")]
    Malformed(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MetricKind {
    Rmse,
    R2,
}

impl MetricKind {
    pub const ALL: [MetricKind; 2] = [MetricKind::Rmse, MetricKind::R2];

    pub fn label(self) -> &'static str {
        match self {
            MetricKind::Rmse => "RMSE",
            MetricKind::R2 => "R2",
        }
    }
}

impl fmt::Display for MetricKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for MetricKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "rmse" => Ok(MetricKind::Rmse),
            "r2" | "r²" | "r^2" => Ok(MetricKind::R2),
            other => Err(format!("unknown metric `{other}` (expected rmse or r2)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailedRun {
    pub run: usize,
    pub model: String,
    pub reason: String,
}

/// Test-set predictions of one model on one run, in original target units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunPredictions {
    pub run: usize,
    pub model: String,
    pub rows: Vec<usize>,
    pub actual: Vec<f64>,
    pub predicted: Vec<f64>,
}

/// Per-run, per-model test metrics; `None` marks a failed run (or an
/// undefined R² on a constant test target).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkResult {
    pub schema_version: u32,
    pub models: Vec<String>,
    #[serde(default)]
    pub specs: Vec<ModelSpec>,
    pub plan: Option<ResamplePlan>,
    pub runs: usize,
    pub rmse: Vec<Vec<Option<f64>>>,
    pub r2: Vec<Vec<Option<f64>>>,
    /// `run_seeds[run][model]`: the seed every random draw of that job derives from.
    #[serde(default)]
    pub run_seeds: Vec<Vec<u64>>,
    /// SHA-256 of each run's split, shared by every model column.
    #[serde(default)]
    pub split_digests: Vec<String>,
    #[serde(default)]
    pub failures: Vec<FailedRun>,
    #[serde(default)]
    pub scale_target: bool,
    #[serde(default)]
    pub predictions: Vec<RunPredictions>,
}

impl BenchmarkResult {
    /// Result from hand-supplied `runs × models` matrices.
    pub fn from_matrices(models: Vec<String>, rmse: Vec<Vec<f64>>, r2: Vec<Vec<f64>>) -> Result<Self, BenchError> {
        let wrap = |m: Vec<Vec<f64>>| m.into_iter().map(|row| row.into_iter().map(Some).collect()).collect();
        let result = BenchmarkResult {
            schema_version: BENCHMARK_SCHEMA_VERSION,
            runs: rmse.len(),
            models,
            specs: Vec::new(),
            plan: None,
            rmse: wrap(rmse),
            r2: wrap(r2),
            run_seeds: Vec::new(),
            split_digests: Vec::new(),
            failures: Vec::new(),
            scale_target: false,
            predictions: Vec::new(),
        };
        result.validate()?;
        Ok(result)
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        let bad = |msg: String| Err(BenchError::Malformed(msg));
        if self.schema_version != BENCHMARK_SCHEMA_VERSION {
            return bad(format!("unsupported schema_version {}", self.schema_version));
        }
        if self.models.len() < 2 {
            return bad(format!("need at least 2 models, found {}", self.models.len()));
        }
        let mut seen = HashSet::new();
        for m in &self.models {
            if !seen.insert(m) {
                return bad(format!("duplicate model label `{m}`"));
            }
        }
        for metric in MetricKind::ALL {
            let matrix = self.matrix(metric);
            if matrix.len() != self.runs {
                return bad(format!(
                    "{metric} matrix has {} rows, expected {}",
                    matrix.len(),
                    self.runs
                ));
            }
            for (r, row) in matrix.iter().enumerate() {
                if row.len() != self.models.len() {
                    return bad(format!(
                        "{metric} run {r} has {} entries, expected {}",
                        row.len(),
                        self.models.len()
                    ));
                }
                if row.iter().flatten().any(|v| !v.is_finite()) {
                    return bad(format!("{metric} run {r} contains a non-finite value"));
                }
            }
        }
        if !self.split_digests.is_empty() && self.split_digests.len() != self.runs {
            return bad("split digest count differs from run count".into());
        }
        Ok(())
    }

    pub fn matrix(&self, metric: MetricKind) -> &[Vec<Option<f64>>] {
        match metric {
            MetricKind::Rmse => &self.rmse,
            MetricKind::R2 => &self.r2,
        }
    }

    pub fn model_index(&self, label: &str) -> Result<usize, BenchError> {
        self.models
            .iter()
            .position(|m| m == label)
            .ok_or_else(|| BenchError::UnknownModel(label.to_string()))
    }

    /// Runs with a value for every model.
    pub fn complete_runs(&self, metric: MetricKind) -> Vec<usize> {
        self.matrix(metric)
            .iter()
            .enumerate()
            .filter(|(_, row)| row.iter().all(Option::is_some))
            .map(|(r, _)| r)
            .collect()
    }

    /// All successful values of one model column.
    pub fn column(&self, metric: MetricKind, model: usize) -> Vec<f64> {
        self.matrix(metric).iter().filter_map(|row| row[model]).collect()
    }

    /// `runs × models` matrix restricted to complete runs.
    pub fn complete_matrix(&self, metric: MetricKind) -> Vec<Vec<f64>> {
        self.complete_runs(metric)
            .into_iter()
            .map(|r| {
                self.matrix(metric)[r]
                    .iter()
                    .map(|v| v.expect("complete run"))
                    .collect()
            })
            .collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("benchmark result serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, BenchError> {
        let result: BenchmarkResult = serde_json::from_str(text).map_err(|e| BenchError::Malformed(e.to_string()))?;
        result.validate()?;
        Ok(result)
    }

    /// Long format: `run,model,metric,value` with `NA` for missing values.
    pub fn write_long_csv<W: Write>(&self, writer: W) -> std::io::Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        wtr.write_record(["run", "model", "metric", "value"])?;
        for metric in MetricKind::ALL {
            for (r, row) in self.matrix(metric).iter().enumerate() {
                for (m, v) in row.iter().enumerate() {
                    let value = v.map_or_else(|| "NA".to_string(), |v| v.to_string());
                    wtr.write_record([r.to_string(), self.models[m].clone(), metric.label().to_string(), value])?;
                }
            }
        }
        wtr.flush()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct BenchOptions {
    /// Worker threads; `None` uses the global rayon pool.
    pub jobs: Option<usize>,
    /// Range the target on each run's train rows as well as the features.
    pub scale_target: bool,
}

enum JobOutcome {
    Done {
        rmse: f64,
        r2: Option<f64>,
        predictions: Option<RunPredictions>,
    },
    Failed(String),
}

/// Seed of the `(run, model)` job. The model's own config seed, not its
/// position, identifies it so a column is independent of its neighbours.
pub fn job_seed(master: u64, run: usize, config_seed: u64) -> u64 {
    derive_seed(master, &[run as u64, config_seed])
}

fn run_job<F: Scalar>(
    data: &Dataset<F>,
    spec: &ModelSpec,
    split: &crate::dataprep::SplitIndices,
    run: usize,
    seed: u64,
    opts: &BenchOptions,
) -> Result<JobOutcome, BenchError> {
    let params = fit_range_scaler(data, &split.train_rows)?;
    let mut scaled = apply_range_scaler(data, &params)?;
    let target_scaler = if opts.scale_target {
        let ts = TargetScaler::fit(data, &split.train_rows)?;
        scaled = ts.apply(&scaled)?;
        Some(ts)
    } else {
        None
    };
    let net = spec
        .architecture
        .build::<F>(data.n_features(), derive_seed(seed, &[0]))?;
    let mut cfg = spec.train;
    cfg.seed = derive_seed(seed, &[1]);
    let net = match train(net, &scaled, &split.train_rows, &cfg) {
        Ok((net, _)) => net,
        Err(TrainError::Diverged { epoch, reason }) => {
            return Ok(JobOutcome::Failed(format!("diverged at epoch {epoch}: {reason}")))
        }
        Err(e) => return Err(e.into()),
    };
    let mut yhat = predict_batch(&net, &scaled, &split.test_rows)?;
    if let Some(ts) = &target_scaler {
        yhat.iter_mut().for_each(|v| *v = ts.unscale(*v));
    }
    if yhat.iter().any(|v| !v.is_finite()) {
        return Ok(JobOutcome::Failed("non-finite test prediction".into()));
    }
    let y = data.targets_at(&split.test_rows);
    let rmse_value = rmse(&y, &yhat)
        .map_err(|e| BenchError::InvalidArgument(e.to_string()))?
        .as_f64();
    if !rmse_value.is_finite() {
        return Ok(JobOutcome::Failed("non-finite test RMSE".into()));
    }
    let r2_value = r2(&y, &yhat).ok().map(Scalar::as_f64).filter(|v| v.is_finite());
    let predictions = (run == 0).then(|| RunPredictions {
        run,
        model: spec.label.clone(),
        rows: split.test_rows.clone(),
        actual: y.iter().map(|v| v.as_f64()).collect(),
        predicted: yhat.iter().map(|v| v.as_f64()).collect(),
    });
    Ok(JobOutcome::Done {
        rmse: rmse_value,
        r2: r2_value,
        predictions,
    })
}

/// Trains every spec on every split of `plan` and records test RMSE and R².
///
/// All specs see the same splits. Jobs may run in parallel; results are
/// placed by `(run, model)` so the output does not depend on scheduling.
pub fn run_benchmark<F: Scalar>(
    data: &Dataset<F>,
    specs: &[ModelSpec],
    plan: &ResamplePlan,
    opts: &BenchOptions,
) -> Result<BenchmarkResult, BenchError> {
    if specs.len() < 2 {
        return Err(BenchError::InvalidArgument(format!(
            "a benchmark needs at least 2 models, got {}",
            specs.len()
        )));
    }
    let mut labels = HashSet::new();
    for spec in specs {
        if !labels.insert(&spec.label) {
            return Err(BenchError::InvalidArgument(format!(
                "duplicate model label `{}`",
                spec.label
            )));
        }
        spec.train.validate()?;
    }
    if opts.jobs == Some(0) {
        return Err(BenchError::InvalidArgument("jobs must be at least 1".into()));
    }
    let splits = make_resamples(data.n_rows(), plan)?;
    let runs = splits.len();
    let n_models = specs.len();
    let seeds: Vec<Vec<u64>> = (0..runs)
        .map(|r| specs.iter().map(|s| job_seed(plan.seed, r, s.train.seed)).collect())
        .collect();

    let job = |idx: usize| {
        let (r, m) = (idx / n_models, idx % n_models);
        run_job(data, &specs[m], &splits[r], r, seeds[r][m], opts)
    };
    let outcomes: Vec<Result<JobOutcome, BenchError>> = match opts.jobs {
        Some(1) => (0..runs * n_models).map(job).collect(),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| BenchError::InvalidArgument(format!("thread pool: {e}")))?
            .install(|| (0..runs * n_models).into_par_iter().map(job).collect()),
        None => (0..runs * n_models).into_par_iter().map(job).collect(),
    };

    let mut rmse_m = vec![vec![None; n_models]; runs];
    let mut r2_m = vec![vec![None; n_models]; runs];
    let mut failures = Vec::new();
    let mut predictions = Vec::new();
    for (idx, outcome) in outcomes.into_iter().enumerate() {
        let (r, m) = (idx / n_models, idx % n_models);
        match outcome? {
            JobOutcome::Done {
                rmse,
                r2,
                predictions: p,
            } => {
                rmse_m[r][m] = Some(rmse);
                r2_m[r][m] = r2;
                predictions.extend(p);
            }
            JobOutcome::Failed(reason) => {
                log::warn!("run {r} of {} failed: {reason}", specs[m].label);
                failures.push(FailedRun {
                    run: r,
                    model: specs[m].label.clone(),
                    reason,
                });
            }
        }
    }
    for (m, spec) in specs.iter().enumerate() {
        if rmse_m.iter().all(|row| row[m].is_none()) {
            return Err(BenchError::AllRunsFailed {
                model: spec.label.clone(),
            });
        }
    }
    Ok(BenchmarkResult {
        schema_version: BENCHMARK_SCHEMA_VERSION,
        models: specs.iter().map(|s| s.label.clone()).collect(),
        specs: specs.to_vec(),
        plan: Some(*plan),
        runs,
        rmse: rmse_m,
        r2: r2_m,
        run_seeds: seeds,
        split_digests: splits.iter().map(|s| s.digest()).collect(),
        failures,
        scale_target: opts.scale_target,
        predictions,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataprep::{gen_synthetic, SyntheticSpec};
    use crate::models::{preset, Hyperparameters, ModelKind};

    fn data() -> Dataset<f64> {
        gen_synthetic(&SyntheticSpec {
            n: 30,
            p: 4,
            informative: 2,
            noise_sd: 0.1,
            nonlinearity: 0.3,
            seed: 5,
        })
        .unwrap()
    }

    fn quick(kind: ModelKind, seed: u64) -> ModelSpec {
        let hp = Hyperparameters {
            epochs: Some(20),
            hidden: Some(2),
            ..Default::default()
        };
        preset(kind, &hp, seed)
    }

    #[test]
    fn matrices_have_runs_by_models_shape() {
        let specs: Vec<_> = ModelKind::ALL.iter().map(|&k| quick(k, k.index() as u64)).collect();
        let plan = ResamplePlan::random_split(4, 0.76, 11);
        let result = run_benchmark(&data(), &specs, &plan, &BenchOptions::default()).unwrap();
        assert_eq!(result.runs, 4);
        assert_eq!(result.rmse.len(), 4);
        assert!(result
            .rmse
            .iter()
            .all(|row| row.len() == 5 && row.iter().all(Option::is_some)));
        assert_eq!(result.split_digests.len(), 4);
        assert_eq!(result.predictions.len(), 5);
        assert!(result.predictions.iter().all(|p| p.run == 0 && p.rows.len() == 7));
    }

    #[test]
    fn identical_specs_give_identical_columns() {
        let mut b = quick(ModelKind::Gdbpnn, 9);
        b.label = "copy".into();
        let specs = vec![quick(ModelKind::Gdbpnn, 9), b];
        let plan = ResamplePlan::random_split(3, 0.7, 1);
        let result = run_benchmark(&data(), &specs, &plan, &BenchOptions::default()).unwrap();
        for row in &result.rmse {
            assert_eq!(row[0], row[1]);
        }
    }

    #[test]
    fn scheduling_does_not_change_results() {
        let specs: Vec<_> = [ModelKind::Shlffnn, ModelKind::Qrnn, ModelKind::Gdbpmnn]
            .iter()
            .map(|&k| quick(k, k.index() as u64))
            .collect();
        let plan = ResamplePlan::random_split(3, 0.76, 2);
        let serial = run_benchmark(
            &data(),
            &specs,
            &plan,
            &BenchOptions {
                jobs: Some(1),
                scale_target: false,
            },
        )
        .unwrap();
        let parallel = run_benchmark(
            &data(),
            &specs,
            &plan,
            &BenchOptions {
                jobs: Some(4),
                scale_target: false,
            },
        )
        .unwrap();
        assert_eq!(serial, parallel);
    }

    #[test]
    fn single_run_refuses_comparison() {
        let specs = vec![quick(ModelKind::Shlffnn, 0), quick(ModelKind::Gdbpnn, 1)];
        let plan = ResamplePlan::random_split(1, 0.76, 3);
        let result = run_benchmark(&data(), &specs, &plan, &BenchOptions::default()).unwrap();
        assert_eq!(result.rmse.len(), 1);
        assert!(matches!(
            paired_ttest(&result, MetricKind::Rmse, "SHLFFNN", "GDBPNN", 0.05),
            Err(BenchError::InsufficientRuns { .. })
        ));
        assert!(tukey_intervals(&result, MetricKind::Rmse, 0.95).is_err());
    }

    #[test]
    fn diverging_model_is_reported_by_name() {
        let mut bad = quick(ModelKind::Shlffnn, 0);
        bad.train.eta = 1e6;
        let specs = vec![bad, quick(ModelKind::Gdbpnn, 1)];
        let plan = ResamplePlan::random_split(2, 0.76, 3);
        match run_benchmark(&data(), &specs, &plan, &BenchOptions::default()) {
            Err(BenchError::AllRunsFailed { model }) => assert_eq!(model, "SHLFFNN"),
            other => panic!("expected failure, got {other:?}"),
        }
    }

    #[test]
    fn rejects_single_model() {
        let plan = ResamplePlan::random_split(2, 0.76, 3);
        assert!(run_benchmark(&data(), &[quick(ModelKind::Qrnn, 0)], &plan, &BenchOptions::default()).is_err());
    }

    #[test]
    fn json_and_long_csv() {
        let result = BenchmarkResult::from_matrices(
            vec!["A".into(), "B".into()],
            vec![vec![1.0, 2.0], vec![1.5, 0.1]],
            vec![vec![0.5, 0.25], vec![0.75, 0.125]],
        )
        .unwrap();
        assert_eq!(BenchmarkResult::from_json(&result.to_json()).unwrap(), result);
        let mut buf = Vec::new();
        result.write_long_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 1 + 2 * 2 * 2);
        assert!(text.starts_with("run,model,metric,value\n0,A,RMSE,1\n"));
        assert!(BenchmarkResult::from_json("{\"schema_version\": 1}").is_err());
    }

    #[test]
    fn ragged_matrices_are_rejected() {
        assert!(BenchmarkResult::from_matrices(
            vec!["A".into(), "B".into()],
            vec![vec![1.0, 2.0], vec![1.5]],
            vec![vec![0.5, 0.25], vec![0.75, 0.1]],
        )
        .is_err());
        assert!(BenchmarkResult::from_matrices(vec!["A".into(), "A".into()], vec![], vec![]).is_err());
    }
}

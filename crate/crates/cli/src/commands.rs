use std::collections::HashSet;
use std::path::{Path, PathBuf};

use qsarnet::bench::{
    compare_all, render_text, render_tukey_text, run_benchmark, summarize, BenchOptions, BenchmarkResult,
    ComparisonReport, MetricKind, DEFAULT_ALPHA, DEFAULT_CONFIDENCE,
};
use qsarnet::dataprep::{
    apply_range_scaler, fit_range_scaler, gen_synthetic, read_csv, split_train_test, write_csv, Dataset, ResamplePlan,
    ResampleScheme, SyntheticSpec, TargetScaler,
};
use qsarnet::metrics::{table_row, table_row_csv, MetricsReport, TABLE_HEADER};
use qsarnet::models::{preset, Hyperparameters};
use qsarnet::netcore::predict_batch;
use qsarnet::seed::derive_seed;
use qsarnet::trainers::train;
use serde_json::json;

use crate::args::{BenchmarkArgs, CompareArgs, DataArgs, FormatArg, GenArgs, ReportArgs, SchemeArg, TrainArgs};
use crate::error::CliError;
use crate::output::{input_digest, out_dir, read_file, read_text, FileDigest, Outputs};
use crate::svg::{box_plot_svg, tukey_svg};

pub const DEFAULT_BENCH_RUNS: usize = 25;

fn csv_bytes(f: impl FnOnce(&mut Vec<u8>) -> std::io::Result<()>) -> Result<Vec<u8>, CliError> {
    let mut buf = Vec::new();
    f(&mut buf).map_err(|e| CliError::Other(format!("formatting csv: {e}")))?;
    Ok(buf)
}

fn pretty(value: &impl serde::Serialize) -> Vec<u8> {
    let mut text = serde_json::to_string_pretty(value).expect("serializable");
    text.push('\n');
    text.into_bytes()
}

fn load_data(args: &DataArgs) -> Result<(Dataset<f64>, FileDigest), CliError> {
    let bytes = read_file(&args.data)?;
    let data = read_csv(bytes.as_slice(), &args.target)?;
    Ok((data, input_digest(&args.data, &bytes)))
}

fn manifest_path(dir: &Path, command: &str) -> PathBuf {
    dir.join(format!("{command}.manifest.json"))
}

fn check_unit_interval(name: &str, v: f64) -> Result<(), CliError> {
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(CliError::Usage(format!(
            "--{name} must lie strictly between 0 and 1, got {v}"
        )))
    }
}

pub fn cmd_gen(args: &GenArgs) -> Result<(), CliError> {
    let spec = SyntheticSpec {
        n: args.n as usize,
        p: args.p as usize,
        informative: args.informative.unwrap_or(args.p.min(10)) as usize,
        noise_sd: args.noise,
        nonlinearity: args.nonlinearity,
        seed: args.seed,
    };
    if spec.informative > spec.p {
        return Err(CliError::Usage(format!(
            "--informative ({}) cannot exceed --p ({})",
            spec.informative, spec.p
        )));
    }
    let data: Dataset<f64> = gen_synthetic(&spec)?;
    let path = args.out.clone().unwrap_or_else(|| out_dir(None).join("data.csv"));
    let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "data".into());

    let mut csv = Vec::new();
    write_csv(&data, &mut csv)?;
    let sidecar = json!({
        "schema_version": 1,
        "spec": spec,
        "recipe": data.recipe(),
        "n_rows": data.n_rows(),
        "n_features": data.n_features(),
        "target": data.target_name(),
        "csv_sha256": crate::output::sha256_hex(&csv),
    });
    let mut outputs = Outputs::new(dir.clone());
    outputs.write_path(&path, &csv)?;
    outputs.write_path(&path.with_extension("json"), &pretty(&sidecar))?;
    outputs.finish(
        "gen",
        Some(args.seed),
        json!({ "spec": spec }),
        Vec::new(),
        &dir.join(format!("{stem}.manifest.json")),
    )?;
    println!(
        "wrote {} ({} rows x {} descriptors)",
        path.display(),
        data.n_rows(),
        data.n_features()
    );
    Ok(())
}

pub fn cmd_train(args: &TrainArgs) -> Result<(), CliError> {
    let hp = args.hyper.to_hyperparameters();
    let unused = hp.unused_by(args.model);
    if !unused.is_empty() {
        return Err(CliError::Usage(format!(
            "{} does not use: {}",
            args.model,
            unused.iter().map(|u| format!("--{u}")).collect::<Vec<_>>().join(", ")
        )));
    }
    let (data, input) = load_data(&args.data)?;
    let n = data.n_rows();
    let train_count = match args.train_count {
        Some(c) => c,
        None => {
            check_unit_interval("train-fraction", args.train_fraction)?;
            ResamplePlan::train_count(args.train_fraction, n)
        }
    };
    let split_seed = derive_seed(args.seed, &[2]);
    let split = split_train_test(n, train_count, split_seed)?;
    let spec = preset(args.model, &hp, derive_seed(args.seed, &[1]));
    spec.train.validate()?;
    let init_seed = derive_seed(args.seed, &[0]);

    let scaler = fit_range_scaler(&data, &split.train_rows)?;
    let mut scaled = apply_range_scaler(&data, &scaler)?;
    let target_scaler = if args.scale_target {
        let ts = TargetScaler::fit(&data, &split.train_rows)?;
        scaled = ts.apply(&scaled)?;
        Some(ts)
    } else {
        None
    };
    let net = spec.architecture.build::<f64>(data.n_features(), init_seed)?;
    let (net, trace) = train(net, &scaled, &split.train_rows, &spec.train)?;

    let predict = |rows: &[usize]| -> Result<(Vec<f64>, Vec<f64>), CliError> {
        let mut yhat = predict_batch(&net, &scaled, rows)?;
        if let Some(ts) = &target_scaler {
            yhat.iter_mut().for_each(|v| *v = ts.unscale(*v));
        }
        Ok((data.targets_at(rows), yhat))
    };
    let (y_train, p_train) = predict(&split.train_rows)?;
    let (y_test, p_test) = predict(&split.test_rows)?;
    let train_report = MetricsReport::from_predictions(&y_train, &p_train)?;
    let test_report = MetricsReport::from_predictions(&y_test, &p_test)?;

    let dir = out_dir(args.out.as_deref());
    let mut outputs = Outputs::new(dir.clone());
    outputs.write("network.json", (net.to_json() + "\n").as_bytes())?;
    outputs.write(
        "scaling.json",
        &pretty(&json!({ "features": scaler, "target": target_scaler })),
    )?;
    let metrics = json!({
        "schema_version": 1,
        "model": spec.label,
        "train": train_report,
        "test": test_report,
        "table": {
            "header": TABLE_HEADER,
            "values": table_row(&train_report, &test_report),
        },
    });
    outputs.write("metrics.json", &pretty(&metrics))?;
    outputs.write(
        "metrics.csv",
        table_row_csv(&spec.label, &train_report, &test_report).as_bytes(),
    )?;
    outputs.write("trace.csv", &csv_bytes(|b| trace.write_csv(b))?)?;
    let preds = csv_bytes(|b| {
        let mut w = csv::Writer::from_writer(b);
        w.write_record(["set", "row", "actual", "predicted"])?;
        for (set, rows, y, p) in [
            ("train", &split.train_rows, &y_train, &p_train),
            ("test", &split.test_rows, &y_test, &p_test),
        ] {
            for ((r, a), q) in rows.iter().zip(y).zip(p) {
                w.write_record([set.to_string(), r.to_string(), a.to_string(), q.to_string()])?;
            }
        }
        w.flush()
    })?;
    outputs.write("predictions.csv", &preds)?;
    let config = json!({
        "data": args.data.data.display().to_string(),
        "target": args.data.target,
        "model": args.model,
        "spec": spec,
        "init_seed": init_seed,
        "split": { "train_count": train_count, "seed": split_seed, "digest": split.digest() },
        "scale_target": args.scale_target,
    });
    outputs.finish(
        "train",
        Some(args.seed),
        config,
        vec![input],
        &manifest_path(&dir, "train"),
    )?;
    println!(
        "{}: train RMSE {:.6}, test RMSE {:.6}; outputs in {}",
        spec.label,
        train_report.rmse,
        test_report.rmse,
        dir.display()
    );
    Ok(())
}

fn bench_plan(args: &BenchmarkArgs) -> Result<ResamplePlan, CliError> {
    Ok(match args.scheme {
        SchemeArg::RandomSplit => {
            check_unit_interval("train-fraction", args.train_fraction)?;
            ResamplePlan::random_split(args.runs.unwrap_or(DEFAULT_BENCH_RUNS), args.train_fraction, args.seed)
        }
        SchemeArg::KFold => ResamplePlan {
            scheme: ResampleScheme::KFold { k: args.folds },
            runs: args.runs.unwrap_or(1),
            seed: args.seed,
        },
    })
}

pub fn cmd_benchmark(args: &BenchmarkArgs) -> Result<(), CliError> {
    let mut seen = HashSet::new();
    if let Some(dup) = args.models.iter().find(|m| !seen.insert(**m)) {
        return Err(CliError::Usage(format!("model {dup} listed twice")));
    }
    if args.models.len() < 2 {
        return Err(CliError::Usage("a benchmark needs at least 2 models".into()));
    }
    let hp: Hyperparameters = args.hyper.to_hyperparameters();
    let unused_by_all: Vec<&str> = args
        .models
        .iter()
        .map(|&m| hp.unused_by(m))
        .reduce(|a, b| a.into_iter().filter(|x| b.contains(x)).collect())
        .unwrap_or_default();
    if !unused_by_all.is_empty() {
        return Err(CliError::Usage(format!(
            "no selected model uses: {}",
            unused_by_all
                .iter()
                .map(|u| format!("--{u}"))
                .collect::<Vec<_>>()
                .join(", ")
        )));
    }
    let plan = bench_plan(args)?;
    let (data, input) = load_data(&args.data)?;
    let specs: Vec<_> = args.models.iter().map(|&m| preset(m, &hp, m.index() as u64)).collect();
    let opts = BenchOptions {
        jobs: args.jobs,
        scale_target: args.scale_target,
    };
    let result = run_benchmark(&data, &specs, &plan, &opts)?;

    let dir = out_dir(args.out.as_deref());
    let mut outputs = Outputs::new(dir.clone());
    outputs.write("benchmark.json", (result.to_json() + "\n").as_bytes())?;
    outputs.write("benchmark.csv", &csv_bytes(|b| result.write_long_csv(b))?)?;
    let config = json!({
        "data": args.data.data.display().to_string(),
        "target": args.data.target,
        "models": args.models,
        "specs": specs,
        "plan": plan,
        "scale_target": args.scale_target,
        "jobs": args.jobs,
    });
    outputs.finish(
        "benchmark",
        Some(args.seed),
        config,
        vec![input],
        &manifest_path(&dir, "benchmark"),
    )?;

    println!(
        "{} runs x {} models; {} failed runs",
        result.runs,
        result.models.len(),
        result.failures.len()
    );
    for metric in MetricKind::ALL {
        if let Ok(summaries) = summarize(&result, metric) {
            for s in summaries {
                println!(
                    "{metric:<5} {:<10} min {:.5}  median {:.5}  max {:.5}  mean {:.5}",
                    s.model, s.min, s.median, s.max, s.mean
                );
            }
        }
    }
    Ok(())
}

fn load_result(path: &Path) -> Result<(BenchmarkResult, FileDigest), CliError> {
    let text = read_text(path)?;
    let result = BenchmarkResult::from_json(&text).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    Ok((result, input_digest(path, text.as_bytes())))
}

pub fn cmd_compare(args: &CompareArgs) -> Result<(), CliError> {
    check_unit_interval("alpha", args.alpha)?;
    check_unit_interval("confidence", args.confidence)?;
    let (result, input) = load_result(&args.result)?;
    let report = compare_all(&result, args.alpha, args.confidence)?;
    let text = render_text(&report);
    let dir = out_dir(args.out.as_deref());
    let mut outputs = Outputs::new(dir.clone());
    outputs.write("comparison.json", (report.to_json() + "\n").as_bytes())?;
    outputs.write("comparison.txt", text.as_bytes())?;
    outputs.write("tukey.txt", render_tukey_text(&report).as_bytes())?;
    let config = json!({ "alpha": args.alpha, "confidence": args.confidence });
    outputs.finish("compare", None, config, vec![input], &manifest_path(&dir, "compare"))?;
    print!("{text}");
    Ok(())
}

fn predictions_csv(result: &BenchmarkResult) -> Result<Vec<u8>, CliError> {
    csv_bytes(|b| {
        let mut w = csv::Writer::from_writer(b);
        w.write_record(["run", "model", "row", "actual", "predicted"])?;
        for p in &result.predictions {
            for ((r, a), q) in p.rows.iter().zip(&p.actual).zip(&p.predicted) {
                w.write_record([
                    p.run.to_string(),
                    p.model.clone(),
                    r.to_string(),
                    a.to_string(),
                    q.to_string(),
                ])?;
            }
        }
        w.flush()
    })
}

fn box_stats_csv(report: &ComparisonReport) -> Result<Vec<u8>, CliError> {
    csv_bytes(|b| {
        let mut w = csv::Writer::from_writer(b);
        w.write_record([
            "metric",
            "model",
            "min",
            "q1",
            "median",
            "q3",
            "max",
            "whisker_low",
            "whisker_high",
            "outliers",
        ])?;
        for mc in &report.metrics {
            for bx in &mc.boxes {
                let mut rec = vec![mc.metric.label().to_string(), bx.model.clone()];
                match &bx.stats {
                    Some(s) => {
                        rec.extend(
                            [s.min, s.q1, s.median, s.q3, s.max, s.whisker_low, s.whisker_high].map(|v| v.to_string()),
                        );
                        rec.push(s.outliers.iter().map(f64::to_string).collect::<Vec<_>>().join(";"));
                    }
                    None => rec.extend(std::iter::repeat_n("NA".to_string(), 8)),
                }
                w.write_record(rec)?;
            }
        }
        w.flush()
    })
}

fn tukey_csv(report: &ComparisonReport) -> Result<Vec<u8>, CliError> {
    csv_bytes(|b| {
        let mut w = csv::Writer::from_writer(b);
        w.write_record([
            "metric",
            "model_a",
            "model_b",
            "estimate",
            "lower",
            "upper",
            "confidence",
            "excludes_zero",
        ])?;
        for mc in &report.metrics {
            for iv in &mc.tukey {
                w.write_record([
                    mc.metric.label().to_string(),
                    iv.model_a.clone(),
                    iv.model_b.clone(),
                    iv.estimate.to_string(),
                    iv.lower.to_string(),
                    iv.upper.to_string(),
                    iv.confidence.to_string(),
                    iv.significant.to_string(),
                ])?;
            }
        }
        w.flush()
    })
}

pub fn cmd_report(args: &ReportArgs) -> Result<(), CliError> {
    let (result, result_input) = load_result(&args.result)?;
    let mut inputs = vec![result_input];
    let report = match &args.comparison {
        Some(path) => {
            let text = read_text(path)?;
            let report =
                ComparisonReport::from_json(&text).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
            if report.models != result.models {
                return Err(CliError::Data(format!(
                    "{} compares models {:?} but the result holds {:?}",
                    path.display(),
                    report.models,
                    result.models
                )));
            }
            inputs.push(input_digest(path, text.as_bytes()));
            report
        }
        None => compare_all(&result, DEFAULT_ALPHA, DEFAULT_CONFIDENCE)?,
    };
    let dir = out_dir(args.out.as_deref());
    let mut outputs = Outputs::new(dir.clone());
    match args.format {
        FormatArg::Svg => {
            outputs.write("boxplots.svg", box_plot_svg(&report).as_bytes())?;
            outputs.write("tukey.svg", tukey_svg(&report).as_bytes())?;
        }
        FormatArg::Csv => {
            outputs.write("box_stats.csv", &box_stats_csv(&report)?)?;
            outputs.write("tukey_intervals.csv", &tukey_csv(&report)?)?;
        }
    }
    outputs.write("predictions.csv", &predictions_csv(&result)?)?;
    let format = match args.format {
        FormatArg::Svg => "svg",
        FormatArg::Csv => "csv",
    };
    let config = json!({ "format": format, "alpha": report.alpha, "confidence": report.confidence });
    outputs.finish("report", None, config, inputs, &manifest_path(&dir, "report"))?;
    println!("report written to {}", dir.display());
    Ok(())
}

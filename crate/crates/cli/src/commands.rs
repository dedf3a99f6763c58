use std::fmt;
use std::fs::{self, File};
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use atfnb::dataset::{
    chimerge_discretize, load_csv, read_table_path, Cell, ClassColumn, CsvOptions, Imputer,
    RawDataset,
};
use atfnb::eval::{
    bucket_analysis, run_benchmark, run_matrix, summarize, AccuracyTable, BenchmarkConfig, Bucket,
    DatasetFailure, SummaryOptions,
};
use atfnb::fixtures::{builtin_meta, builtin_table};
use atfnb::framework::{Preprocessor, WeightedNb};
use atfnb::indexes::{AaIndex, CaIndex, IndexPair};
use atfnb::nb::FrequencyModel;
use atfnb::qsf::{feasible_intervals, optimal_interval, sls_with_model};
use atfnb::weighting::{fusion_weights, SchemeSpec};
use atfnb::VERSION;

use crate::{
    BenchmarkArgs, CompareArgs, DiscretizeArgs, Format, InputArgs, PredictArgs, QsfArgs,
    SchemeArgs, TrainArgs,
};

/// Bad arguments or unreadable inputs that are not library errors.
#[derive(Debug)]
struct InputError(String);

impl fmt::Display for InputError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for InputError {}

fn input_error(msg: impl Into<String>) -> anyhow::Error {
    InputError(msg.into()).into()
}

/// 2 for ingestion and usage problems, 3 for failures during computation.
pub fn exit_code(e: &anyhow::Error) -> u8 {
    for cause in e.chain() {
        if cause.is::<InputError>() {
            return 2;
        }
        if let Some(err) = cause.downcast_ref::<atfnb::Error>() {
            return if err.is_ingestion() { 2 } else { 3 };
        }
    }
    3
}

fn csv_options(missing: Option<&str>, delimiter: char) -> Result<CsvOptions> {
    if !delimiter.is_ascii() {
        return Err(input_error(format!(
            "delimiter `{delimiter}` is not a single byte"
        )));
    }
    let mut opts = CsvOptions {
        delimiter: delimiter as u8,
        ..CsvOptions::default()
    };
    if let Some(m) = missing {
        opts = opts.with_missing_marker(m);
    }
    Ok(opts)
}

fn load_input(args: &InputArgs) -> Result<RawDataset> {
    let opts = csv_options(args.missing.as_deref(), args.delimiter)?;
    let class: ClassColumn = args.class.parse().expect("infallible");
    load_csv(&args.input, &class, &opts)
        .with_context(|| format!("loading {}", args.input.display()))
}

fn write_text(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut out = std::io::stdout().lock();
            let written = out.write_all(text.as_bytes()).and_then(|()| {
                if text.ends_with('\n') {
                    Ok(())
                } else {
                    out.write_all(b"\n")
                }
            });
            match written {
                Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
                other => Ok(other?),
            }
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)?)
}

fn config_value<T: Serialize>(args: &T) -> Result<Value> {
    Ok(serde_json::to_value(args)?)
}

pub fn resolve_scheme(args: &SchemeArgs) -> Result<SchemeSpec> {
    let spec = if args.scheme.eq_ignore_ascii_case("fusion") {
        SchemeSpec::fusion(
            args.ca.as_deref().unwrap_or("info_gain").parse()?,
            args.aa.as_deref().unwrap_or("pearson").parse()?,
            args.beta.as_deref().unwrap_or("adaptive").parse()?,
        )
    } else if args.ca.is_some() || args.aa.is_some() || args.beta.is_some() {
        return Err(input_error(
            "--ca, --aa and --beta apply only to --scheme fusion",
        ));
    } else {
        args.scheme.parse::<SchemeSpec>()
    };
    spec.map_err(|e| input_error(e.to_string()))
}

pub fn discretize(args: &DiscretizeArgs) -> Result<()> {
    let raw = load_input(&args.input)?;
    let filled = Imputer::fit(&raw)?.apply(&raw)?;
    let (data, map) = chimerge_discretize(&filled, args.input.significance)?;
    let file =
        File::create(&args.output).with_context(|| format!("writing {}", args.output.display()))?;
    data.write_csv(file)?;
    write_text(Some(&args.map_out), &map.to_json()?)?;
    log::info!(
        "{} rows, {} numeric attributes discretized",
        data.len(),
        map.len()
    );
    Ok(())
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ModelBundle {
    pub version: String,
    pub config: Value,
    pub training_accuracy: f64,
    pub preprocessor: Preprocessor,
    pub classifier: WeightedNb,
}

pub fn train(args: &TrainArgs) -> Result<()> {
    let spec = resolve_scheme(&args.scheme)?;
    let raw = load_input(&args.input)?;
    let (pre, data) = Preprocessor::fit(&raw, args.input.significance)?;
    let classifier = WeightedNb::fit(&data, &spec)?;
    let training_accuracy = classifier.accuracy(&data)?;
    let mut config = config_value(args)?;
    config["resolved_scheme"] = serde_json::to_value(spec)?;
    let bundle = ModelBundle {
        version: VERSION.to_string(),
        config,
        training_accuracy,
        preprocessor: pre,
        classifier,
    };
    write_text(Some(&args.model_out), &to_json(&bundle)?)?;
    let c = &bundle.classifier;
    let summary = json!({
        "model": args.model_out,
        "scheme": spec.name(),
        "training_accuracy": training_accuracy,
        "beta": c.beta,
        "beta_star": c.qsf.as_ref().map(|q| [q.optimal.lo, q.optimal.hi]),
        "weights": c.weights,
    });
    write_text(None, &to_json(&summary)?)
}

pub fn predict(args: &PredictArgs) -> Result<()> {
    let text = fs::read_to_string(&args.model)
        .map_err(|e| input_error(format!("cannot read model {}: {e}", args.model.display())))?;
    let bundle: ModelBundle = serde_json::from_str(&text)
        .map_err(|e| input_error(format!("malformed model {}: {e}", args.model.display())))?;
    let pre = &bundle.preprocessor;
    let opts = csv_options(args.missing.as_deref(), args.delimiter)?;
    let (headers, rows) = read_table_path(&args.input, &opts)?;

    let class_idx = headers.iter().position(|h| *h == pre.class_name);
    let attr_idx: Vec<usize> = (0..headers.len())
        .filter(|&i| Some(i) != class_idx)
        .collect();
    if attr_idx.len() != pre.columns.len() {
        return Err(atfnb::Error::ArityMismatch {
            got: attr_idx.len(),
            expected: pre.columns.len(),
        }
        .into());
    }
    // match columns by name when every name is present, otherwise by position
    let by_name: Option<Vec<usize>> = pre
        .columns
        .iter()
        .map(|c| attr_idx.iter().copied().find(|&i| headers[i] == c.name))
        .collect();
    let order = by_name.unwrap_or(attr_idx);

    let classes = pre.schema.classes();
    let mut out = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["row", "prediction"];
    if class_idx.is_some() {
        header.push("label");
    }
    out.write_record(&header)?;
    let mut correct = 0usize;
    for (r, row) in rows.iter().enumerate() {
        let cells: Vec<Cell> = order
            .iter()
            .zip(&pre.columns)
            .map(|(&i, col)| Cell::parse(&row[i], col.kind, &opts))
            .collect();
        let x = pre
            .encode_row(&cells)
            .with_context(|| format!("row {}", r + 1))?;
        let predicted = &classes[bundle.classifier.predict(&x)?];
        let mut rec = vec![(r + 1).to_string(), predicted.clone()];
        if let Some(ci) = class_idx {
            if row[ci] == *predicted {
                correct += 1;
            }
            rec.push(row[ci].clone());
        }
        out.write_record(&rec)?;
    }
    let csv_text = String::from_utf8(out.into_inner().map_err(|e| anyhow::anyhow!("{e}"))?)?;
    let accuracy =
        (class_idx.is_some() && !rows.is_empty()).then(|| correct as f64 / rows.len() as f64);
    match &args.output {
        Some(path) => {
            write_text(Some(path), &csv_text)?;
            write_text(
                None,
                &to_json(&json!({"predictions": path, "n": rows.len(), "accuracy": accuracy}))?,
            )?;
        }
        None => {
            write_text(None, &csv_text)?;
            if let Some(a) = accuracy {
                eprintln!("accuracy: {a}");
            }
        }
    }
    Ok(())
}

fn resolve_table(spec: &str) -> Result<AccuracyTable> {
    match builtin_table(spec) {
        Some(t) => Ok(t?),
        None => {
            let file = File::open(spec)
                .map_err(|e| input_error(format!("cannot read fixture {spec}: {e}")))?;
            Ok(AccuracyTable::from_csv(file)?)
        }
    }
}

fn resolve_meta(
    spec: &str,
) -> Result<std::collections::BTreeMap<String, atfnb::eval::DatasetMeta>> {
    match builtin_meta(spec) {
        Some(m) => Ok(m?),
        None => {
            let file = File::open(spec)
                .map_err(|e| input_error(format!("cannot read metadata {spec}: {e}")))?;
            Ok(atfnb::eval::load_meta(file)?)
        }
    }
}

fn dataset_name(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

pub fn benchmark(args: &BenchmarkArgs) -> Result<()> {
    if args.from_fixture.is_some() == !args.data.is_empty() {
        return Err(input_error(
            "give either --from-fixture or at least one --data file",
        ));
    }
    let mut failures: Vec<DatasetFailure> = Vec::new();
    let mut runs = None;
    let table = match &args.from_fixture {
        Some(spec) => resolve_table(spec)?,
        None => {
            let algorithms: Vec<SchemeSpec> = args
                .algorithms
                .iter()
                .map(|a| {
                    a.parse()
                        .map_err(|e: atfnb::Error| input_error(e.to_string()))
                })
                .collect::<Result<_>>()?;
            let opts = csv_options(args.missing.as_deref(), ',')?;
            let class: ClassColumn = args.class.parse().expect("infallible");
            let mut datasets = Vec::new();
            for path in &args.data {
                let name = dataset_name(path);
                match load_csv(path, &class, &opts) {
                    Ok(raw) => datasets.push((name, raw)),
                    Err(e) => {
                        log::warn!("dataset `{name}` skipped: {e}");
                        failures.push(DatasetFailure {
                            dataset: name,
                            error: e.to_string(),
                        });
                    }
                }
            }
            let config = BenchmarkConfig {
                algorithms,
                repeats: args.repeats,
                master_seed: args.seed,
                train_fraction: args.fraction,
                significance: args.significance,
            };
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(args.jobs)
                .build()?;
            let output = pool.install(|| run_benchmark(&datasets, &config))?;
            failures.extend(output.failures);
            if let Some(path) = &args.records_out {
                write_text(Some(path), &to_json(&output.records)?)?;
            }
            if output.records.is_empty() {
                return Err(input_error(format!(
                    "no dataset could be benchmarked: {}",
                    failures
                        .iter()
                        .map(|f| format!("{}: {}", f.dataset, f.error))
                        .collect::<Vec<_>>()
                        .join("; ")
                )));
            }
            runs = Some(run_matrix(&output.records));
            AccuracyTable::from_records(&output.records)
        }
    };

    let reference = if table.column_index(&args.reference).is_err() && args.reference == "ATFNB" {
        table.algorithms[0].clone()
    } else {
        args.reference.clone()
    };
    let options = SummaryOptions {
        compare: args.compare.clone(),
        reference: reference.clone(),
        alpha: args.alpha,
        train_fraction: args.fraction,
        corrected_t_test: !args.plain_t_test,
        critical: args.critical,
    };
    let report = summarize(&table, runs.as_ref(), &options)?;
    let buckets: Option<Vec<Bucket>> = args
        .meta
        .as_deref()
        .map(|m| -> Result<_> {
            Ok(bucket_analysis(
                &table,
                &resolve_meta(m)?,
                &reference,
                &report.compared,
            )?)
        })
        .transpose()?;

    let mut config = config_value(args)?;
    if let Some(obj) = config.as_object_mut() {
        obj.remove("jobs");
    }
    let text = match args.format {
        Format::Json => to_json(&json!({
            "version": VERSION,
            "config": config,
            "report": report,
            "buckets": buckets,
            "failures": failures,
        }))?,
        Format::Table => {
            let mut t = format!("atfnb {VERSION}\n\n{}", report.to_text());
            if let Some(b) = &buckets {
                t.push_str(&format!("\nShare of datasets where {reference} is best\n"));
                let w = b.iter().map(|x| x.label.len()).max().unwrap_or(0);
                for x in b {
                    t.push_str(&format!(
                        "{:<w$}  {:>3}  {:>7}\n",
                        x.label,
                        x.n_datasets,
                        x.percentage_text()
                    ));
                }
            }
            for f in &failures {
                t.push_str(&format!("\nskipped {}: {}", f.dataset, f.error));
            }
            t
        }
    };
    write_text(args.output.as_deref(), &text)
}

fn index_pair(ca: &str, aa: &str) -> Result<(CaIndex, AaIndex)> {
    let ca = ca
        .parse()
        .map_err(|e: atfnb::Error| input_error(e.to_string()))?;
    let aa = aa
        .parse()
        .map_err(|e: atfnb::Error| input_error(e.to_string()))?;
    Ok((ca, aa))
}

pub fn compare_qsf_sls(args: &CompareArgs) -> Result<()> {
    let (ca, aa) = index_pair(&args.ca, &args.aa)?;
    let raw = load_input(&args.input)?;
    let (_, data) = Preprocessor::fit(&raw, args.input.significance)?;
    let pair = IndexPair::compute(&data, ca, aa)?;
    let model = FrequencyModel::fit(&data)?;

    let start = Instant::now();
    let q = optimal_interval(&feasible_intervals(&model, &data, &pair.ca, &pair.aa)?);
    let qsf_ms = start.elapsed().as_secs_f64() * 1e3;
    let start = Instant::now();
    let s = sls_with_model(&model, &data, &pair.ca, &pair.aa, args.step)?;
    let sls_ms = start.elapsed().as_secs_f64() * 1e3;

    let qsf_accuracy = model.accuracy(
        &fusion_weights(&pair.ca, &pair.aa, q.representative)?,
        &data,
    )?;
    let report = json!({
        "version": VERSION,
        "config": config_value(args)?,
        "n_instances": data.len(),
        "qsf_interval": [q.optimal.lo, q.optimal.hi],
        "qsf_representative": q.representative,
        "qsf_accuracy": qsf_accuracy,
        "sls_best_points": s.best_betas,
        "sls_accuracy": s.best_accuracy,
        "qsf_ms": qsf_ms,
        "sls_ms": sls_ms,
        "speedup": sls_ms / qsf_ms.max(1e-9),
    });
    write_text(args.output.as_deref(), &to_json(&report)?)
}

pub fn qsf(args: &QsfArgs) -> Result<()> {
    let (ca, aa) = index_pair(&args.ca, &args.aa)?;
    let raw = load_input(&args.input)?;
    let (_, data) = Preprocessor::fit(&raw, args.input.significance)?;
    let start = Instant::now();
    let pair = IndexPair::compute(&data, ca, aa)?;
    let model = FrequencyModel::fit(&data)?;
    let intervals = feasible_intervals(&model, &data, &pair.ca, &pair.aa)?;
    let q = optimal_interval(&intervals);
    let wall_time_ms = start.elapsed().as_secs_f64() * 1e3;
    let training_accuracy = model.accuracy(
        &fusion_weights(&pair.ca, &pair.aa, q.representative)?,
        &data,
    )?;

    let mut report = json!({
        "version": VERSION,
        "config": config_value(args)?,
        "beta_star": [q.optimal.lo, q.optimal.hi],
        "representative": q.representative,
        "coverage": q.coverage,
        "n_instances": q.n_instances,
        "degenerate": q.degenerate,
        "training_accuracy": training_accuracy,
        "candidates": q.candidates,
        "wall_time_ms": wall_time_ms,
    });
    if args.dump_indexes {
        report["indexes"] = serde_json::to_value(&pair)?;
    }
    if args.dump_intervals {
        report["intervals"] = serde_json::to_value(&intervals)?;
    }
    write_text(args.output.as_deref(), &to_json(&report)?)
}

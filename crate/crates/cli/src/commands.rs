use std::fs;
use std::io::{self, BufRead, BufWriter, Write};
use std::path::Path;
use std::time::Instant;

use anyhow::{Context, Result};
use fcmdetect::dataset::{self, LabeledSample};
use fcmdetect::experiments::{self, ReferenceLengthParams, RunManifest, TargetPrefixParams};
use fcmdetect::persistence;
use fcmdetect::pipeline::{self, ClassLabels, PipelineConfig, PreparedData};
use fcmdetect::{Alphabet, BinaryClassifier, Error, Preset};
use serde_json::json;

use crate::args::{self, ClassifyArgs, Command, EvaluateArgs, Experiment, ExperimentArgs, TrainArgs, UsageError};

const CLASSIFY_CHUNK: usize = 4096;

pub fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Train(a) => train(a),
        Command::Classify(a) => classify(a),
        Command::Evaluate(a) => evaluate(a),
        Command::Experiment { kind } => experiment(kind),
    }
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

fn print_json(value: &serde_json::Value) -> Result<()> {
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

fn write_json(value: &impl serde::Serialize, path: &Path) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}

fn train(a: TrainArgs) -> Result<()> {
    let alphabet = a.alphabet.alphabet()?;
    let smoothing = a.model.validate(&alphabet)?;
    let config = args::pipeline_config(
        &a.data,
        &a.prep,
        alphabet,
        a.alphabet.lowercase(),
        a.model.k,
        a.model.alpha,
    )?;
    let start = Instant::now();
    let prepared = pipeline::prepare(&config)?;
    let (classifier, refs) = pipeline::train_classifier(
        &prepared.split.train,
        &config.labels,
        config.k,
        &config.alphabet,
        smoothing,
        config.lowercase(),
        None,
    )?;
    let out = &a.out.out;
    ensure_dir(out)?;
    let manifest = persistence::save_bundle(&classifier, out)?;
    let elapsed = start.elapsed().as_secs_f64();
    dataset::write_jsonl(&prepared.split.validation, out.join("validation.jsonl"))?;
    dataset::write_jsonl(&prepared.split.test, out.join("test.jsonl"))?;
    write_json(&prepared.preprocess, &out.join("preprocess.json"))?;
    RunManifest::new("train", config.seed, run_params(&config))
        .with_dataset(&config.data)?
        .write(out, "train")?;

    let (model_a, model_b) = classifier.models();
    let mut classes = serde_json::Map::new();
    for (reference, model) in refs.iter().zip([model_a, model_b]) {
        let file = out.join(format!("{}.fcm", reference.label));
        let bytes = fs::metadata(&file).map(|m| m.len()).unwrap_or(0);
        classes.insert(
            reference.label.clone(),
            json!({
                "reference_chars": reference.total_chars,
                "reference_samples": reference.sample_ids.len(),
                "contexts": model.context_count(),
                "entries": model.entry_count(),
                "model_bytes": bytes,
            }),
        );
    }
    print_json(&json!({
        "bundle": manifest.display().to_string(),
        "k": config.k,
        "alpha": config.alpha,
        "alphabet": config.alphabet.as_string(),
        "classes": classes,
        "split": split_counts(&prepared),
        "skipped_records": prepared.skipped_records,
        "preprocess": prepared.preprocess,
        "elapsed_seconds": elapsed,
    }))
}

fn split_counts(prepared: &PreparedData) -> serde_json::Value {
    json!({
        "train": prepared.split.train.len(),
        "validation": prepared.split.validation.len(),
        "test": prepared.split.test.len(),
    })
}

fn run_params(config: &PipelineConfig) -> serde_json::Value {
    json!({
        "k": config.k,
        "alpha": config.alpha,
        "alphabet": config.alphabet.as_string(),
        "lowercase": config.lowercase(),
        "min_chars": config.preprocess.min_chars,
        "balance": config.preprocess.balance,
        "ratios": config.ratios,
        "labels": [&config.labels.negative, &config.labels.positive],
    })
}

fn load_classifier(path: &Path) -> Result<BinaryClassifier> {
    persistence::load_bundle(path).with_context(|| format!("loading bundle {}", path.display()))
}

fn classify(a: ClassifyArgs) -> Result<()> {
    let classifier = load_classifier(&a.bundle)?;
    let reader: Box<dyn BufRead> = if a.input == "-" {
        Box::new(io::stdin().lock())
    } else {
        let file = fs::File::open(&a.input).with_context(|| format!("opening {}", a.input))?;
        Box::new(io::BufReader::new(file))
    };
    let (label_a, label_b) = classifier.labels();
    let (key_a, key_b) = (format!("bits_{label_a}"), format!("bits_{label_b}"));
    let mut out = BufWriter::new(io::stdout().lock());
    let mut lines = reader.lines();
    let mut line_no = 0usize;
    loop {
        let mut chunk = Vec::with_capacity(CLASSIFY_CHUNK);
        for line in lines.by_ref().take(CLASSIFY_CHUNK) {
            chunk.push(line.context("reading input")?);
        }
        if chunk.is_empty() {
            break;
        }
        for (decision, _) in classifier.classify_batch(&chunk).into_iter().zip(&chunk) {
            line_no += 1;
            match decision {
                Ok(d) => {
                    let mut obj = serde_json::Map::new();
                    obj.insert("id".into(), json!(line_no));
                    obj.insert("label".into(), json!(d.label));
                    obj.insert(key_a.clone(), json!(d.bits_a));
                    obj.insert(key_b.clone(), json!(d.bits_b));
                    obj.insert("margin_bits_per_symbol".into(), json!(d.margin_bits_per_symbol));
                    obj.insert("tie".into(), json!(d.tie));
                    serde_json::to_writer(&mut out, &obj)?;
                    writeln!(out)?;
                }
                Err(e) => eprintln!("line {line_no}: {e}"),
            }
        }
    }
    out.flush()?;
    Ok(())
}

fn evaluate(a: EvaluateArgs) -> Result<()> {
    let classifier = load_classifier(&a.bundle)?;
    let opts = a.data.load_options()?;
    let loaded = dataset::load_dataset(&a.data.data, &opts)?;
    let (label_a, label_b) = classifier.labels();
    let labels = ClassLabels {
        negative: label_a.to_string(),
        positive: label_b.to_string(),
    };
    let samples: Vec<LabeledSample> = loaded
        .samples
        .into_iter()
        .filter(|s| s.label == labels.negative || s.label == labels.positive)
        .collect();
    if samples.is_empty() {
        return Err(Error::NoRecords(a.data.data.clone()).into());
    }
    let evaluation = pipeline::evaluate(&classifier, &samples, &labels)?;
    ensure_dir(&a.out.out)?;
    pipeline::write_evaluation(&evaluation, &a.out.out, "evaluation")?;
    println!("accuracy {:.6}", evaluation.report.accuracy);
    println!("f1 {:.6}", evaluation.report.f1);
    if evaluation.skipped > 0 {
        eprintln!("{} targets too short to score", evaluation.skipped);
    }
    Ok(())
}

fn experiment_config(common: &ExperimentArgs, k: usize, alpha: f64) -> Result<(PipelineConfig, PreparedData)> {
    let alphabet = common.alphabet.alphabet()?;
    let config = args::pipeline_config(
        &common.data,
        &common.prep,
        alphabet,
        common.alphabet.lowercase(),
        k,
        alpha,
    )?;
    let prepared = pipeline::prepare(&config)?;
    ensure_dir(&common.out.out)?;
    Ok((config, prepared))
}

fn write_manifest(name: &str, config: &PipelineConfig, extra: serde_json::Value, dir: &Path, stem: &str) -> Result<()> {
    let mut params = run_params(config);
    if let (Some(p), serde_json::Value::Object(extra)) = (params.as_object_mut(), extra) {
        p.extend(extra);
    }
    RunManifest::new(name, config.seed, params)
        .with_dataset(&config.data)?
        .write(dir, stem)?;
    Ok(())
}

fn experiment(kind: Experiment) -> Result<()> {
    match kind {
        Experiment::Grid {
            common,
            k_values,
            alpha_values,
            parallel_cells,
        } => {
            let ks = args::parse_k_values(&k_values)?;
            let alphas = args::parse_alpha_values(&alpha_values)?;
            let alphabet = common.alphabet.alphabet()?;
            for &k in &ks {
                args::check_order(k, &alphabet)?;
            }
            let (config, prepared) = experiment_config(&common, ks[0], alphas[0])?;
            let result = experiments::grid_search(
                &prepared.split,
                &ks,
                &alphas,
                &config.alphabet,
                config.lowercase(),
                &config.labels,
                parallel_cells,
            )?;
            let dir = &common.out.out;
            experiments::write_grid_csv(&result, dir.join("grid_search.csv"))?;
            write_manifest(
                "grid",
                &config,
                json!({ "k_values": ks, "alpha_values": alphas, "parallel_cells": parallel_cells }),
                dir,
                "grid_search",
            )?;
            if let Some(best) = result.best_by_f1() {
                println!("best k {} alpha {} f1 {:.6} accuracy {:.6}", best.k, best.alpha, best.f1, best.accuracy);
            }
        }
        Experiment::Trim {
            common,
            k,
            alpha,
            presets,
        } => {
            args::check_alpha(alpha)?;
            let mut alphabets: Vec<(String, Alphabet)> = Vec::new();
            for name in presets.split(',').map(str::trim).filter(|s| !s.is_empty()) {
                let preset: Preset = name.parse().map_err(|e: Error| UsageError(e.to_string()))?;
                let alphabet = preset.alphabet();
                args::check_order(k, &alphabet)?;
                alphabets.push((preset.name().to_string(), alphabet));
            }
            if alphabets.is_empty() {
                return Err(UsageError("no presets given".into()).into());
            }
            let (config, prepared) = experiment_config(&common, k, alpha)?;
            let rows = experiments::alphabet_trim_study(
                &prepared.split,
                k,
                alpha,
                &alphabets,
                config.lowercase(),
                &config.labels,
            )?;
            let dir = &common.out.out;
            experiments::write_trim_csv(&rows, dir.join("alphabet_trim.csv"))?;
            let names: Vec<&str> = alphabets.iter().map(|(n, _)| n.as_str()).collect();
            write_manifest("trim", &config, json!({ "presets": names }), dir, "alphabet_trim")?;
            for row in &rows {
                println!("{} ({} symbols) f1 {:.6} accuracy {:.6}", row.alphabet, row.size, row.f1, row.accuracy);
            }
        }
        Experiment::Reflen {
            common,
            model,
            start,
            step,
            max,
        } => {
            model.validate(&common.alphabet.alphabet()?)?;
            if step == 0 {
                return Err(UsageError("--step must be positive".into()).into());
            }
            let (config, prepared) = experiment_config(&common, model.k, model.alpha)?;
            let params = ReferenceLengthParams {
                k: model.k,
                alpha: model.alpha,
                start,
                step,
                max,
            };
            let points = experiments::reference_length_curve(
                &prepared.split,
                &params,
                &config.alphabet,
                config.lowercase(),
                &config.labels,
            )?;
            let dir = &common.out.out;
            experiments::write_curve_csv(&points, "reference_chars", dir.join("ref_length.csv"))?;
            write_manifest(
                "reflen",
                &config,
                json!({ "start": start, "step": step, "max": max }),
                dir,
                "ref_length",
            )?;
            println!("{} points", points.len());
        }
        Experiment::Prefix {
            common,
            model,
            per_class,
            max_len,
            step,
        } => {
            let smoothing = model.validate(&common.alphabet.alphabet()?)?;
            if step == 0 || max_len == 0 || per_class == 0 {
                return Err(UsageError("--step, --max-len and --per-class must be positive".into()).into());
            }
            let (config, prepared) = experiment_config(&common, model.k, model.alpha)?;
            let (classifier, _) = pipeline::train_classifier(
                &prepared.split.train,
                &config.labels,
                config.k,
                &config.alphabet,
                smoothing,
                config.lowercase(),
                None,
            )?;
            let params = TargetPrefixParams { per_class, max_len, step };
            let points =
                experiments::target_prefix_curve(&classifier, &prepared.split.test, &params, &config.labels)?;
            let dir = &common.out.out;
            experiments::write_curve_csv(&points, "prefix_chars", dir.join("target_prefix.csv"))?;
            write_manifest(
                "prefix",
                &config,
                json!({ "per_class": per_class, "max_len": max_len, "step": step }),
                dir,
                "target_prefix",
            )?;
            println!("{} points", points.len());
        }
        Experiment::Bench {
            common,
            model,
            repetitions,
            single_thread: _,
        } => {
            let smoothing = model.validate(&common.alphabet.alphabet()?)?;
            if repetitions == 0 {
                return Err(UsageError("--repetitions must be at least 1".into()).into());
            }
            let (config, prepared) = experiment_config(&common, model.k, model.alpha)?;
            let start = Instant::now();
            let (classifier, _) = pipeline::train_classifier(
                &prepared.split.train,
                &config.labels,
                config.k,
                &config.alphabet,
                smoothing,
                config.lowercase(),
                None,
            )?;
            let build = start.elapsed().as_secs_f64();
            let alphabet = classifier.alphabet();
            let texts: Vec<&str> = prepared
                .split
                .test
                .iter()
                .map(|s| s.text.as_str())
                .filter(|t| alphabet.filtered_len(t, config.lowercase()) > config.k)
                .collect();
            let report = experiments::throughput_bench(&classifier, &texts, repetitions, build)?;
            let dir = &common.out.out;
            write_json(&report, &dir.join("throughput.json"))?;
            write_manifest("bench", &config, json!({ "repetitions": repetitions }), dir, "throughput")?;
            println!(
                "{:.0} chars/s, {:.1} samples/s over {} chars",
                report.chars_per_second, report.samples_per_second, report.chars
            );
        }
    }
    Ok(())
}

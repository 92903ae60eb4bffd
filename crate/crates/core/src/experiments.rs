//! Parameter sweeps and scaling studies. Each study returns typed rows and
//! can be written as CSV with a JSON sidecar describing the run.
//!
//! CSV headers:
//!
//! - `grid_search.csv`: `k,alpha,f1,accuracy,train_seconds,eval_seconds,eval_chars_per_second`
//! - `alphabet_trim.csv`: `alphabet,size,f1,accuracy`
//! - `ref_length.csv`: `reference_chars,accuracy,f1,n_scored`
//! - `target_prefix.csv`: `prefix_chars,accuracy,f1,n_scored`

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::alphabet::Alphabet;
use crate::classifier::BinaryClassifier;
use crate::dataset::{DatasetSplit, LabeledSample, ReferenceBuilder};
use crate::error::{Error, Result};
use crate::fcm::SmoothingParams;
use crate::pipeline::{self, ClassLabels, Evaluation};

pub const DEFAULT_K_GRID: [usize; 8] = [3, 4, 5, 6, 7, 8, 9, 10];
pub const DEFAULT_ALPHA_GRID: [f64; 5] = [0.1, 0.5, 1.0, 5.0, 10.0];

/// Filtered validation or test targets with their true labels.
struct Targets<'a> {
    sequences: Vec<Vec<u8>>,
    truths: Vec<&'a str>,
    chars: usize,
}

impl<'a> Targets<'a> {
    fn new(samples: &'a [LabeledSample], alphabet: &Alphabet, lowercase: bool) -> Self {
        let sequences: Vec<Vec<u8>> = samples
            .iter()
            .map(|s| alphabet.filter_text(&s.text, lowercase).into_inner())
            .collect();
        let chars = sequences.iter().map(Vec::len).sum();
        Targets {
            sequences,
            truths: samples.iter().map(|s| s.label.as_str()).collect(),
            chars,
        }
    }

    fn evaluate(
        &self,
        classifier: &BinaryClassifier,
        smoothing: SmoothingParams,
        labels: &ClassLabels,
    ) -> Result<Evaluation> {
        let decisions = self
            .sequences
            .iter()
            .map(|s| classifier.classify_symbols_with(s, smoothing))
            .collect();
        pipeline::score_decisions(&self.truths, decisions, labels)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridRow {
    pub k: usize,
    pub alpha: f64,
    pub f1: f64,
    pub accuracy: f64,
    pub train_seconds: f64,
    pub eval_seconds: f64,
    pub eval_chars_per_second: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridSearchResult {
    pub rows: Vec<GridRow>,
}

impl GridSearchResult {
    pub fn best_by_f1(&self) -> Option<&GridRow> {
        self.rows.iter().max_by(|a, b| a.f1.total_cmp(&b.f1))
    }
}

/// Trains one model pair per `k` on the train partition and scores every
/// `alpha` on the validation partition with those same counts.
/// With `parallel`, the alpha cells of each `k` run concurrently.
pub fn grid_search(
    split: &DatasetSplit,
    k_values: &[usize],
    alpha_values: &[f64],
    alphabet: &Alphabet,
    lowercase: bool,
    labels: &ClassLabels,
    parallel: bool,
) -> Result<GridSearchResult> {
    if k_values.is_empty() || alpha_values.is_empty() {
        return Err(Error::InvalidParameter("empty k or alpha list".into()));
    }
    let smoothings = alpha_values
        .iter()
        .map(|&a| SmoothingParams::new(a))
        .collect::<Result<Vec<_>>>()?;
    let targets = Targets::new(&split.validation, alphabet, lowercase);
    let mut rows = Vec::with_capacity(k_values.len() * alpha_values.len());
    for &k in k_values {
        let annotate = |alpha: f64| move |e: Error| Error::Cell { k, alpha, source: Box::new(e) };
        let start = Instant::now();
        let (classifier, _) = pipeline::train_classifier(
            &split.train,
            labels,
            k,
            alphabet,
            smoothings[0],
            lowercase,
            None,
        )
        .map_err(annotate(alpha_values[0]))?;
        let train_seconds = start.elapsed().as_secs_f64();
        let cell = |&smoothing: &SmoothingParams| -> Result<GridRow> {
            let start = Instant::now();
            let eval = targets
                .evaluate(&classifier, smoothing, labels)
                .map_err(annotate(smoothing.alpha()))?;
            let eval_seconds = start.elapsed().as_secs_f64();
            Ok(GridRow {
                k,
                alpha: smoothing.alpha(),
                f1: eval.report.f1,
                accuracy: eval.report.accuracy,
                train_seconds,
                eval_seconds,
                eval_chars_per_second: targets.chars as f64 / eval_seconds.max(1e-12),
            })
        };
        let cells: Vec<Result<GridRow>> = if parallel {
            smoothings.par_iter().map(cell).collect()
        } else {
            smoothings.iter().map(cell).collect()
        };
        for row in cells {
            rows.push(row?);
        }
    }
    Ok(GridSearchResult { rows })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrimRow {
    pub alphabet: String,
    pub size: usize,
    pub f1: f64,
    pub accuracy: f64,
}

/// Retrains and scores (on validation) once per named alphabet.
pub fn alphabet_trim_study(
    split: &DatasetSplit,
    k: usize,
    alpha: f64,
    alphabets: &[(String, Alphabet)],
    lowercase: bool,
    labels: &ClassLabels,
) -> Result<Vec<TrimRow>> {
    if alphabets.is_empty() {
        return Err(Error::InvalidParameter("no alphabets given".into()));
    }
    let smoothing = SmoothingParams::new(alpha)?;
    alphabets
        .iter()
        .map(|(name, alphabet)| {
            let (classifier, _) = pipeline::train_classifier(
                &split.train,
                labels,
                k,
                alphabet,
                smoothing,
                lowercase,
                None,
            )?;
            let eval = Targets::new(&split.validation, alphabet, lowercase)
                .evaluate(&classifier, smoothing, labels)?;
            Ok(TrimRow {
                alphabet: name.clone(),
                size: alphabet.len(),
                f1: eval.report.f1,
                accuracy: eval.report.accuracy,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurvePoint {
    pub x: usize,
    pub accuracy: f64,
    pub f1: f64,
    pub n_scored: usize,
}

#[derive(Debug, Clone)]
pub struct ReferenceLengthParams {
    pub k: usize,
    pub alpha: f64,
    pub start: usize,
    pub step: usize,
    /// Largest length to try; the curve also stops when a class runs out.
    pub max: Option<usize>,
}

/// Accuracy on the test partition as both references grow from `start` in
/// increments of `step` filtered characters.
pub fn reference_length_curve(
    split: &DatasetSplit,
    params: &ReferenceLengthParams,
    alphabet: &Alphabet,
    lowercase: bool,
    labels: &ClassLabels,
) -> Result<Vec<CurvePoint>> {
    let k = params.k;
    if params.step == 0 {
        return Err(Error::InvalidParameter("step must be positive".into()));
    }
    if params.start < k + 1 {
        return Err(Error::InvalidParameter(format!(
            "start {} must exceed k = {k}",
            params.start
        )));
    }
    let smoothing = SmoothingParams::new(params.alpha)?;
    let mut neg = ReferenceBuilder::new(&split.train, &labels.negative, k, alphabet, lowercase)?;
    let mut pos = ReferenceBuilder::new(&split.train, &labels.positive, k, alphabet, lowercase)?;
    let available = neg.available_chars().min(pos.available_chars());
    let limit = params.max.map_or(available, |m| m.min(available));
    if params.start > limit {
        return Err(Error::InvalidParameter(format!(
            "start {} exceeds the {available} characters available per class",
            params.start
        )));
    }
    let targets = Targets::new(&split.test, alphabet, lowercase);
    let mut points = Vec::new();
    let mut length = params.start;
    while length <= limit {
        neg.advance_to(length)?;
        pos.advance_to(length)?;
        let classifier = BinaryClassifier::new(
            (labels.negative.clone(), neg.model().clone()),
            (labels.positive.clone(), pos.model().clone()),
            alphabet.clone(),
            smoothing,
            lowercase,
        )?;
        let eval = targets.evaluate(&classifier, smoothing, labels)?;
        points.push(CurvePoint {
            x: length,
            accuracy: eval.report.accuracy,
            f1: eval.report.f1,
            n_scored: eval.report.matrix.total() as usize,
        });
        length += params.step;
    }
    Ok(points)
}

#[derive(Debug, Clone)]
pub struct TargetPrefixParams {
    pub per_class: usize,
    pub max_len: usize,
    pub step: usize,
}

impl Default for TargetPrefixParams {
    fn default() -> Self {
        TargetPrefixParams {
            per_class: 1500,
            max_len: 1500,
            step: 50,
        }
    }
}

/// Accuracy when only the first N filtered characters of each target are
/// used, for N = step, 2·step, ... up to `max_len`. Per class, the
/// `per_class` shortest samples of at least `max_len` characters are used.
pub fn target_prefix_curve(
    classifier: &BinaryClassifier,
    samples: &[LabeledSample],
    params: &TargetPrefixParams,
    labels: &ClassLabels,
) -> Result<Vec<CurvePoint>> {
    if params.step == 0 || params.max_len == 0 {
        return Err(Error::InvalidParameter("step and max_len must be positive".into()));
    }
    let alphabet = classifier.alphabet();
    let lowercase = classifier.lowercase();
    let mut selected: Vec<(&str, Vec<u8>)> = Vec::new();
    for label in labels.as_array() {
        let mut qualifying: Vec<Vec<u8>> = samples
            .iter()
            .filter(|s| s.label == label)
            .map(|s| alphabet.filter_text(&s.text, lowercase).into_inner())
            .filter(|seq| seq.len() >= params.max_len)
            .collect();
        if qualifying.len() < params.per_class {
            return Err(Error::TooFewSamples {
                label: label.to_string(),
                count: qualifying.len(),
                min: params.per_class,
            });
        }
        qualifying.sort_by_key(Vec::len);
        selected.extend(qualifying.into_iter().take(params.per_class).map(|s| (label, s)));
    }
    let truths: Vec<&str> = selected.iter().map(|(l, _)| *l).collect();
    let mut points = Vec::new();
    let mut n = params.step;
    while n <= params.max_len {
        if n <= classifier.k() {
            log::warn!("prefix length {n} cannot be coded with k = {}; skipped", classifier.k());
            n += params.step;
            continue;
        }
        let decisions = selected
            .iter()
            .map(|(_, seq)| classifier.classify_symbols(&seq[..n]))
            .collect();
        let eval = pipeline::score_decisions(&truths, decisions, labels)?;
        points.push(CurvePoint {
            x: n,
            accuracy: eval.report.accuracy,
            f1: eval.report.f1,
            n_scored: eval.report.matrix.total() as usize,
        });
        n += params.step;
    }
    Ok(points)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThroughputReport {
    pub samples: usize,
    pub chars: usize,
    pub repetitions: usize,
    pub best_seconds: f64,
    pub samples_per_second: f64,
    pub chars_per_second: f64,
    pub peak_rss_bytes: u64,
    pub model_build_seconds: f64,
}

/// Single-threaded inference timing, best of `repetitions` passes. `chars`
/// counts input characters before filtering.
pub fn throughput_bench<T: AsRef<str>>(
    classifier: &BinaryClassifier,
    texts: &[T],
    repetitions: usize,
    model_build_seconds: f64,
) -> Result<ThroughputReport> {
    if repetitions == 0 {
        return Err(Error::InvalidParameter("repetitions must be at least 1".into()));
    }
    if texts.is_empty() {
        return Err(Error::EmptyInput);
    }
    let chars: usize = texts.iter().map(|t| t.as_ref().chars().count()).sum();
    let mut best = f64::INFINITY;
    for _ in 0..repetitions {
        let start = Instant::now();
        for t in texts {
            std::hint::black_box(classifier.classify(t.as_ref())?);
        }
        best = best.min(start.elapsed().as_secs_f64());
    }
    let secs = best.max(1e-12);
    Ok(ThroughputReport {
        samples: texts.len(),
        chars,
        repetitions,
        best_seconds: best,
        samples_per_second: texts.len() as f64 / secs,
        chars_per_second: chars as f64 / secs,
        peak_rss_bytes: peak_rss_bytes(),
        model_build_seconds,
    })
}

/// Peak resident set size of this process, 0 where unavailable.
pub fn peak_rss_bytes() -> u64 {
    #[cfg(unix)]
    {
        let mut usage = std::mem::MaybeUninit::<libc::rusage>::uninit();
        // SAFETY: getrusage fills the struct on success.
        let rc = unsafe { libc::getrusage(libc::RUSAGE_SELF, usage.as_mut_ptr()) };
        if rc == 0 {
            let max = unsafe { usage.assume_init() }.ru_maxrss.max(0) as u64;
            // kilobytes on Linux, bytes on macOS
            return if cfg!(target_os = "macos") { max } else { max * 1024 };
        }
    }
    0
}

/// Run description written next to each experiment's output.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub experiment: String,
    pub tool_version: String,
    pub seed: u64,
    /// Dataset path to SHA-256.
    pub datasets: BTreeMap<String, String>,
    pub params: serde_json::Value,
}

impl RunManifest {
    pub fn new(experiment: &str, seed: u64, params: serde_json::Value) -> Self {
        RunManifest {
            experiment: experiment.to_string(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            seed,
            datasets: BTreeMap::new(),
            params,
        }
    }

    pub fn with_dataset(mut self, path: &Path) -> Result<Self> {
        let sum = crate::dataset::file_checksum(path)?;
        self.datasets.insert(path.display().to_string(), sum);
        Ok(self)
    }

    /// Writes `<dir>/<stem>.meta.json`.
    pub fn write(&self, dir: &Path, stem: &str) -> Result<PathBuf> {
        let path = dir.join(format!("{stem}.meta.json"));
        let mut json = serde_json::to_vec_pretty(self)?;
        json.push(b'\n');
        crate::persistence::write_atomic(&path, &json)?;
        Ok(path)
    }
}

fn write_rows<R: Serialize>(rows: &[R], path: &Path, header: &[&str]) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.serialize(row)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::io(path, e.into_error()))?;
    crate::persistence::write_atomic(path, &bytes)
}

pub fn write_grid_csv(result: &GridSearchResult, path: impl AsRef<Path>) -> Result<()> {
    write_rows(
        &result.rows,
        path.as_ref(),
        &["k", "alpha", "f1", "accuracy", "train_seconds", "eval_seconds", "eval_chars_per_second"],
    )
}

pub fn write_trim_csv(rows: &[TrimRow], path: impl AsRef<Path>) -> Result<()> {
    write_rows(rows, path.as_ref(), &["alphabet", "size", "f1", "accuracy"])
}

/// Writes a curve, naming the x column `x_name`.
pub fn write_curve_csv(points: &[CurvePoint], x_name: &str, path: impl AsRef<Path>) -> Result<()> {
    write_rows(points, path.as_ref(), &[x_name, "accuracy", "f1", "n_scored"])
}

//! End-to-end training and evaluation: load, preprocess, split, build both
//! references, score.

use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::alphabet::{Alphabet, Preset};
use crate::classifier::{BinaryClassifier, Decision};
use crate::dataset::{
    self, ClassReference, DatasetSplit, LabeledSample, LoadOptions, PreprocessOptions,
    PreprocessReport, AI, HUMAN,
};
use crate::error::{Error, Result};
use crate::fcm::SmoothingParams;
use crate::metrics::{self, EvaluationReport};

pub const DEFAULT_K: usize = 8;
pub const DEFAULT_ALPHA: f64 = 0.5;
pub const DEFAULT_SEED: u64 = 42;

/// The two class labels. The classifier's first model is the negative class,
/// the second the positive class used for precision, recall and F1.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClassLabels {
    pub negative: String,
    pub positive: String,
}

impl Default for ClassLabels {
    fn default() -> Self {
        ClassLabels {
            negative: HUMAN.into(),
            positive: AI.into(),
        }
    }
}

impl ClassLabels {
    pub fn as_array(&self) -> [&str; 2] {
        [&self.negative, &self.positive]
    }
}

#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub data: PathBuf,
    pub load: LoadOptions,
    pub preprocess: PreprocessOptions,
    pub alphabet: Alphabet,
    pub labels: ClassLabels,
    pub ratios: [f64; 3],
    pub seed: u64,
    pub k: usize,
    pub alpha: f64,
}

impl PipelineConfig {
    /// Defaults: k = 8, alpha = 0.5, the digits+letters alphabet, seed 42,
    /// 80/10/10 split, labels taken from the `label` field as-is.
    pub fn new(data: impl Into<PathBuf>, load: LoadOptions) -> Self {
        PipelineConfig {
            data: data.into(),
            load,
            preprocess: PreprocessOptions::default(),
            alphabet: Preset::Sigma2.alphabet(),
            labels: ClassLabels::default(),
            ratios: dataset::DEFAULT_RATIOS,
            seed: DEFAULT_SEED,
            k: DEFAULT_K,
            alpha: DEFAULT_ALPHA,
        }
    }

    pub fn lowercase(&self) -> bool {
        self.preprocess.lowercase
    }
}

#[derive(Debug, Clone)]
pub struct PreparedData {
    pub split: DatasetSplit,
    pub preprocess: PreprocessReport,
    pub skipped_records: usize,
}

/// Loads, preprocesses and splits the configured dataset.
pub fn prepare(config: &PipelineConfig) -> Result<PreparedData> {
    let loaded = dataset::load_dataset(&config.data, &config.load)?;
    let labels = config.labels.as_array();
    for label in labels {
        if !loaded.samples.iter().any(|s| s.label == label) {
            return Err(Error::EmptyClass(label.to_string()));
        }
    }
    // labels outside the configured pair are not part of the task
    let samples: Vec<LabeledSample> = loaded
        .samples
        .into_iter()
        .filter(|s| labels.contains(&s.label.as_str()))
        .collect();
    let (samples, preprocess) =
        dataset::preprocess(samples, labels, &config.alphabet, &config.preprocess)?;
    let split = dataset::split(&samples, labels, config.ratios, config.seed)?;
    Ok(PreparedData {
        split,
        preprocess,
        skipped_records: loaded.skipped,
    })
}

/// Builds both class models from `train` and pairs them into a classifier.
pub fn train_classifier(
    train: &[LabeledSample],
    labels: &ClassLabels,
    k: usize,
    alphabet: &Alphabet,
    smoothing: SmoothingParams,
    lowercase: bool,
    max_chars: Option<usize>,
) -> Result<(BinaryClassifier, [ClassReference; 2])> {
    let (ref_neg, model_neg) =
        dataset::build_reference(train, &labels.negative, k, alphabet, lowercase, max_chars)?;
    let (ref_pos, model_pos) =
        dataset::build_reference(train, &labels.positive, k, alphabet, lowercase, max_chars)?;
    let classifier = BinaryClassifier::new(
        (labels.negative.clone(), model_neg),
        (labels.positive.clone(), model_pos),
        alphabet.clone(),
        smoothing,
        lowercase,
    )?;
    Ok((classifier, [ref_neg, ref_pos]))
}

#[derive(Debug, Clone, Serialize)]
pub struct Evaluation {
    #[serde(flatten)]
    pub report: EvaluationReport,
    /// Targets too short to code under the model order.
    pub skipped: usize,
}

/// Scores `(true label, decision)` pairs, ignoring failed items but counting them.
pub fn score_decisions(
    truths: &[&str],
    decisions: Vec<Result<Decision>>,
    labels: &ClassLabels,
) -> Result<Evaluation> {
    let mut pairs = Vec::with_capacity(decisions.len());
    let mut skipped = 0;
    for (truth, decision) in truths.iter().zip(decisions) {
        match decision {
            Ok(d) => pairs.push((*truth, d.label)),
            Err(Error::TargetTooShort { .. }) => skipped += 1,
            Err(e) => return Err(e),
        }
    }
    let report = metrics::score(&pairs, &labels.positive, &labels.negative)?;
    Ok(Evaluation { report, skipped })
}

/// Classifies every sample (on the current rayon pool) and scores the result.
pub fn evaluate(
    classifier: &BinaryClassifier,
    samples: &[LabeledSample],
    labels: &ClassLabels,
) -> Result<Evaluation> {
    let texts: Vec<&str> = samples.iter().map(|s| s.text.as_str()).collect();
    let truths: Vec<&str> = samples.iter().map(|s| s.label.as_str()).collect();
    let decisions = classifier.classify_batch(&texts);
    score_decisions(&truths, decisions, labels)
}

/// Writes an evaluation as `<dir>/<stem>.json` and `<dir>/<stem>_confusion.csv`.
pub fn write_evaluation(evaluation: &Evaluation, dir: &Path, stem: &str) -> Result<(PathBuf, PathBuf)> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let json_path = dir.join(format!("{stem}.json"));
    let mut json = serde_json::to_vec_pretty(evaluation)?;
    json.push(b'\n');
    crate::persistence::write_atomic(&json_path, &json)?;
    let csv_path = dir.join(format!("{stem}_confusion.csv"));
    crate::persistence::write_atomic(&csv_path, evaluation.report.matrix.to_csv().as_bytes())?;
    Ok((json_path, csv_path))
}

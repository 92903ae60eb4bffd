//! Two-model minimum code length classification.

use rayon::prelude::*;
use serde::Serialize;

use crate::alphabet::Alphabet;
use crate::error::{Error, Result};
use crate::fcm::{ContextModel, SmoothingParams};

/// Outcome of classifying one target.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Decision {
    pub label: String,
    pub bits_a: f64,
    pub bits_b: f64,
    pub coded_symbols: usize,
    pub margin_bits_per_symbol: f64,
    pub tie: bool,
}

/// A pair of class models sharing order, alphabet and smoothing.
#[derive(Debug, Clone)]
pub struct BinaryClassifier {
    label_a: String,
    model_a: ContextModel,
    label_b: String,
    model_b: ContextModel,
    alphabet: Alphabet,
    smoothing: SmoothingParams,
    lowercase: bool,
}

impl BinaryClassifier {
    pub fn new(
        (label_a, model_a): (impl Into<String>, ContextModel),
        (label_b, model_b): (impl Into<String>, ContextModel),
        alphabet: Alphabet,
        smoothing: SmoothingParams,
        lowercase: bool,
    ) -> Result<Self> {
        let label_a = label_a.into();
        let label_b = label_b.into();
        if label_a.is_empty() || label_b.is_empty() || label_a == label_b {
            return Err(Error::InvalidLabels);
        }
        if model_a.k() != model_b.k() {
            return Err(Error::ModelMismatch(format!(
                "k = {} vs k = {}",
                model_a.k(),
                model_b.k()
            )));
        }
        for model in [&model_a, &model_b] {
            if model.alphabet_size() != alphabet.len() {
                return Err(Error::ModelMismatch(format!(
                    "model alphabet size {} vs alphabet of {} symbols",
                    model.alphabet_size(),
                    alphabet.len()
                )));
            }
        }
        Ok(BinaryClassifier {
            label_a,
            model_a,
            label_b,
            model_b,
            alphabet,
            smoothing,
            lowercase,
        })
    }

    pub fn k(&self) -> usize {
        self.model_a.k()
    }

    pub fn labels(&self) -> (&str, &str) {
        (&self.label_a, &self.label_b)
    }

    pub fn models(&self) -> (&ContextModel, &ContextModel) {
        (&self.model_a, &self.model_b)
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn smoothing(&self) -> SmoothingParams {
        self.smoothing
    }

    pub fn lowercase(&self) -> bool {
        self.lowercase
    }

    /// Same models with a different smoothing factor.
    pub fn with_smoothing(mut self, smoothing: SmoothingParams) -> Self {
        self.smoothing = smoothing;
        self
    }

    pub fn classify(&self, text: &str) -> Result<Decision> {
        let seq = self.alphabet.filter_text(text, self.lowercase);
        self.classify_symbols(seq.as_slice())
    }

    /// Classifies an already filtered symbol sequence.
    pub fn classify_symbols(&self, seq: &[u8]) -> Result<Decision> {
        self.classify_symbols_with(seq, self.smoothing)
    }

    /// Classifies with a smoothing factor other than the configured one.
    pub fn classify_symbols_with(&self, seq: &[u8], smoothing: SmoothingParams) -> Result<Decision> {
        let bits_a = self.model_a.code_length(seq, smoothing)?;
        let bits_b = self.model_b.code_length(seq, smoothing)?;
        let coded_symbols = seq.len() - self.k();
        let tie = bits_a == bits_b;
        let label = if tie {
            std::cmp::min(&self.label_a, &self.label_b)
        } else if bits_a < bits_b {
            &self.label_a
        } else {
            &self.label_b
        };
        Ok(Decision {
            label: label.clone(),
            bits_a,
            bits_b,
            coded_symbols,
            margin_bits_per_symbol: (bits_a - bits_b).abs() / coded_symbols as f64,
            tie,
        })
    }

    /// Classifies every text, preserving order. Runs on the current rayon pool.
    pub fn classify_batch<T: AsRef<str> + Sync>(&self, texts: &[T]) -> Vec<Result<Decision>> {
        texts
            .par_iter()
            .map(|t| self.classify(t.as_ref()))
            .collect()
    }
}

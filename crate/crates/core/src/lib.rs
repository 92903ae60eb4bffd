//! Compression-based detection of machine-generated text.
//!
//! One finite-context (order-k Markov) model is trained per class on that
//! class's reference text. A target is assigned to the class whose model
//! codes it in fewer bits:
//!
//! ```text
//! bits(t) = Σ_i −log2 P(x_i | x_{i-k} .. x_{i-1})
//! P(s | c) = (N(c, s) + α) / (Σ_j N(c, j) + α·|Σ|)
//! ```
//!
//! ```
//! use fcmdetect::{Alphabet, BinaryClassifier, ContextModel, SmoothingParams};
//!
//! let alphabet = Alphabet::new("ab ").unwrap();
//! let mut a = ContextModel::new(2, alphabet.len()).unwrap();
//! a.train(alphabet.filter_text("ab ab ab ab ab", true).as_slice()).unwrap();
//! let mut b = ContextModel::new(2, alphabet.len()).unwrap();
//! b.train(alphabet.filter_text("aa bb aa bb aa", true).as_slice()).unwrap();
//!
//! let classifier = BinaryClassifier::new(
//!     ("first", a),
//!     ("second", b),
//!     alphabet,
//!     SmoothingParams::new(0.5).unwrap(),
//!     true,
//! )
//! .unwrap();
//! assert_eq!(classifier.classify("ab ab ab").unwrap().label, "first");
//! ```

pub mod alphabet;
pub mod classifier;
pub mod dataset;
pub mod error;
pub mod experiments;
pub mod fcm;
pub mod metrics;
pub mod persistence;
pub mod pipeline;
pub mod synthetic;

pub use alphabet::{preset_alphabet, Alphabet, Preset, SymbolSequence};
pub use classifier::{BinaryClassifier, Decision};
pub use error::{Error, Result};
pub use fcm::{ContextModel, SmoothingParams};
pub use metrics::{ConfusionMatrix, EvaluationReport};

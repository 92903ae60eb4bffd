//! Binary confusion matrix and derived scores.

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConfusionMatrix {
    pub positive_label: String,
    pub negative_label: String,
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub tn: u64,
}

impl ConfusionMatrix {
    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.fn_ + self.tn
    }

    /// The matrix with the roles of the two labels exchanged.
    pub fn swapped(&self) -> ConfusionMatrix {
        ConfusionMatrix {
            positive_label: self.negative_label.clone(),
            negative_label: self.positive_label.clone(),
            tp: self.tn,
            fp: self.fn_,
            fn_: self.fp,
            tn: self.tp,
        }
    }

    /// 2x2 CSV: rows are actual labels, columns predicted labels, negative first.
    pub fn to_csv(&self) -> String {
        let (neg, pos) = (&self.negative_label, &self.positive_label);
        format!(
            "actual,{neg},{pos}\n{neg},{},{}\n{pos},{},{}\n",
            self.tn, self.fp, self.fn_, self.tp
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvaluationReport {
    pub matrix: ConfusionMatrix,
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub macro_f1: f64,
    /// Set when some score had a zero denominator and was reported as 0.
    pub degenerate: bool,
}

fn ratio(num: f64, den: f64, degenerate: &mut bool) -> f64 {
    if den == 0.0 {
        *degenerate = true;
        0.0
    } else {
        num / den
    }
}

/// (precision, recall, f1) for the matrix's positive label.
fn positive_scores(m: &ConfusionMatrix, degenerate: &mut bool) -> (f64, f64, f64) {
    let (tp, fp, fn_) = (m.tp as f64, m.fp as f64, m.fn_ as f64);
    let precision = ratio(tp, tp + fp, degenerate);
    let recall = ratio(tp, tp + fn_, degenerate);
    let f1 = ratio(2.0 * precision * recall, precision + recall, degenerate);
    (precision, recall, f1)
}

impl EvaluationReport {
    pub fn from_matrix(matrix: ConfusionMatrix) -> Result<Self> {
        let total = matrix.total();
        if total == 0 {
            return Err(Error::EmptyInput);
        }
        let mut degenerate = false;
        let (precision, recall, f1) = positive_scores(&matrix, &mut degenerate);
        let (_, _, f1_neg) = positive_scores(&matrix.swapped(), &mut degenerate);
        Ok(EvaluationReport {
            accuracy: (matrix.tp + matrix.tn) as f64 / total as f64,
            precision,
            recall,
            f1,
            macro_f1: (f1 + f1_neg) / 2.0,
            degenerate,
            matrix,
        })
    }
}

/// Tallies `(true label, predicted label)` pairs into a report.
pub fn score<T: AsRef<str>, P: AsRef<str>>(
    pairs: &[(T, P)],
    positive_label: &str,
    negative_label: &str,
) -> Result<EvaluationReport> {
    if pairs.is_empty() {
        return Err(Error::EmptyInput);
    }
    if positive_label == negative_label {
        return Err(Error::InvalidLabels);
    }
    let is_positive = |label: &str| -> Result<bool> {
        if label == positive_label {
            Ok(true)
        } else if label == negative_label {
            Ok(false)
        } else {
            Err(Error::UnknownLabel(label.to_string()))
        }
    };
    let mut m = ConfusionMatrix {
        positive_label: positive_label.to_string(),
        negative_label: negative_label.to_string(),
        tp: 0,
        fp: 0,
        fn_: 0,
        tn: 0,
    };
    for (truth, predicted) in pairs {
        match (is_positive(truth.as_ref())?, is_positive(predicted.as_ref())?) {
            (true, true) => m.tp += 1,
            (false, true) => m.fp += 1,
            (true, false) => m.fn_ += 1,
            (false, false) => m.tn += 1,
        }
    }
    EvaluationReport::from_matrix(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pairs(tp: usize, fp: usize, fn_: usize, tn: usize) -> Vec<(&'static str, &'static str)> {
        let mut v = Vec::new();
        v.extend(std::iter::repeat_n(("ai", "ai"), tp));
        v.extend(std::iter::repeat_n(("human", "ai"), fp));
        v.extend(std::iter::repeat_n(("ai", "human"), fn_));
        v.extend(std::iter::repeat_n(("human", "human"), tn));
        v
    }

    #[test]
    fn perfect() {
        let r = score(&pairs(5, 0, 0, 7), "ai", "human").unwrap();
        assert_eq!(r.accuracy, 1.0);
        assert_eq!(r.f1, 1.0);
        assert_eq!(r.macro_f1, 1.0);
        assert!(!r.degenerate);
    }

    #[test]
    fn worked_case() {
        let r = score(&pairs(8, 2, 1, 9), "ai", "human").unwrap();
        assert!((r.precision - 0.8).abs() < 1e-12);
        assert!((r.recall - 8.0 / 9.0).abs() < 1e-12);
        assert!((r.f1 - 16.0 / 19.0).abs() < 1e-12);
        assert!((r.f1 - 0.8421).abs() < 1e-4);
        assert!((r.accuracy - 0.85).abs() < 1e-12);
    }

    #[test]
    fn degenerate_cells() {
        // nothing predicted positive
        let r = score(&pairs(0, 0, 3, 4), "ai", "human").unwrap();
        assert_eq!(r.precision, 0.0);
        assert_eq!(r.f1, 0.0);
        assert!(r.degenerate);
    }

    #[test]
    fn errors() {
        let empty: Vec<(&str, &str)> = vec![];
        assert!(matches!(score(&empty, "ai", "human"), Err(Error::EmptyInput)));
        assert!(matches!(
            score(&[("ai", "robot")], "ai", "human"),
            Err(Error::UnknownLabel(_))
        ));
    }

    #[test]
    fn csv_layout() {
        let r = score(&pairs(8, 2, 1, 9), "ai", "human").unwrap();
        assert_eq!(r.matrix.to_csv(), "actual,human,ai\nhuman,9,2\nai,1,8\n");
    }

    proptest! {
        #[test]
        fn label_swap_symmetry(tp in 0usize..20, fp in 0usize..20, fn_ in 0usize..20, tn in 0usize..20) {
            prop_assume!(tp + fp + fn_ + tn > 0);
            let p = pairs(tp, fp, fn_, tn);
            let a = score(&p, "ai", "human").unwrap();
            let b = score(&p, "human", "ai").unwrap();
            prop_assert_eq!(b.matrix, a.matrix.swapped());
            prop_assert!((a.macro_f1 - b.macro_f1).abs() < 1e-15);
            prop_assert_eq!(a.accuracy, b.accuracy);
        }

        #[test]
        fn permutation_invariance(mut p in proptest::collection::vec(
            (prop_oneof![Just("ai"), Just("human")], prop_oneof![Just("ai"), Just("human")]), 1..100),
            seed: u64)
        {
            let a = score(&p, "ai", "human").unwrap();
            use rand::{seq::SliceRandom, SeedableRng};
            p.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            let b = score(&p, "ai", "human").unwrap();
            prop_assert_eq!(a, b);
        }
    }
}

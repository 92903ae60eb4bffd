//! Labeled corpora: loading, preprocessing, stratified splitting, and
//! per-class reference models.

use std::collections::{BTreeMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::alphabet::Alphabet;
use crate::error::{Error, Result};
use crate::fcm::ContextModel;

pub const HUMAN: &str = "human";
pub const AI: &str = "ai";
pub const DEFAULT_MIN_CHARS: usize = 50;
pub const DEFAULT_RATIOS: [f64; 3] = [0.8, 0.1, 0.1];
pub const MIN_SAMPLES_PER_CLASS: usize = 10;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledSample {
    pub id: String,
    pub text: String,
    pub label: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Jsonl,
}

impl Format {
    /// Guesses the format from a file extension.
    pub fn from_path(path: &Path) -> Option<Format> {
        match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
            "csv" | "tsv" => Some(Format::Csv),
            "jsonl" | "ndjson" | "json" => Some(Format::Jsonl),
            _ => None,
        }
    }
}

impl std::str::FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "jsonl" => Ok(Format::Jsonl),
            other => Err(Error::InvalidParameter(format!("unknown format `{other}`"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct LoadOptions {
    pub format: Format,
    pub text_field: String,
    pub label_field: String,
    /// Raw label value to canonical label. Empty means labels are taken as-is.
    pub label_map: BTreeMap<String, String>,
    pub delimiter: u8,
}

impl LoadOptions {
    pub fn new(format: Format) -> Self {
        LoadOptions {
            format,
            text_field: "text".into(),
            label_field: "label".into(),
            label_map: BTreeMap::new(),
            delimiter: b',',
        }
    }

    fn canonical_label(&self, raw: &str) -> Option<String> {
        if self.label_map.is_empty() {
            (!raw.is_empty()).then(|| raw.to_string())
        } else {
            self.label_map.get(raw).cloned()
        }
    }
}

#[derive(Debug, Clone)]
pub struct LoadedDataset {
    pub samples: Vec<LabeledSample>,
    /// Records skipped for missing or empty text, or an unmapped label.
    pub skipped: usize,
}

fn json_scalar(v: &serde_json::Value) -> Option<String> {
    match v {
        serde_json::Value::String(s) => Some(s.clone()),
        serde_json::Value::Number(n) => Some(n.to_string()),
        serde_json::Value::Bool(b) => Some(b.to_string()),
        _ => None,
    }
}

/// Reads labeled records. Ids are `<file name>:<record ordinal>`, counting
/// data records from 0.
pub fn load_dataset(path: impl AsRef<Path>, opts: &LoadOptions) -> Result<LoadedDataset> {
    let path = path.as_ref();
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut samples = Vec::new();
    let mut skipped = 0;
    let mut push = |ordinal: usize, text: Option<String>, raw_label: Option<String>| {
        let label = raw_label.and_then(|l| opts.canonical_label(&l));
        match (text, label) {
            (Some(text), Some(label)) if !text.is_empty() => samples.push(LabeledSample {
                id: format!("{name}:{ordinal}"),
                text,
                label,
            }),
            _ => skipped += 1,
        }
    };
    match opts.format {
        Format::Jsonl => {
            let mut ordinal = 0;
            for (line_no, line) in BufReader::new(file).lines().enumerate() {
                let line = line.map_err(|e| Error::io(path, e))?;
                if line.trim().is_empty() {
                    continue;
                }
                let value: serde_json::Value =
                    serde_json::from_str(&line).map_err(|e| Error::Parse {
                        path: path.to_path_buf(),
                        record: line_no + 1,
                        message: e.to_string(),
                    })?;
                let text = value.get(&opts.text_field).and_then(json_scalar);
                let label = value.get(&opts.label_field).and_then(json_scalar);
                push(ordinal, text, label);
                ordinal += 1;
            }
        }
        Format::Csv => {
            let mut reader = csv::ReaderBuilder::new()
                .delimiter(opts.delimiter)
                .from_reader(BufReader::new(file));
            let headers = reader.headers()?.clone();
            let column = |field: &str| headers.iter().position(|h| h == field);
            let (text_col, label_col) = (column(&opts.text_field), column(&opts.label_field));
            for (ordinal, record) in reader.records().enumerate() {
                let record = record.map_err(|e| Error::Parse {
                    path: path.to_path_buf(),
                    record: ordinal + 1,
                    message: e.to_string(),
                })?;
                let text = text_col.and_then(|c| record.get(c)).map(str::to_string);
                let label = label_col.and_then(|c| record.get(c)).map(str::to_string);
                push(ordinal, text, label);
            }
        }
    }
    if samples.is_empty() {
        return Err(Error::NoRecords(path.to_path_buf()));
    }
    Ok(LoadedDataset { samples, skipped })
}

/// Writes samples as JSONL with fields `id`, `text`, `label`.
pub fn write_jsonl(samples: &[LabeledSample], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for s in samples {
        serde_json::to_writer(&mut w, s)?;
        w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone)]
pub struct PreprocessOptions {
    pub min_chars: usize,
    pub lowercase: bool,
    pub balance: bool,
}

impl Default for PreprocessOptions {
    fn default() -> Self {
        PreprocessOptions {
            min_chars: DEFAULT_MIN_CHARS,
            lowercase: true,
            balance: true,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct StageCounts {
    pub removed_duplicates: usize,
    pub removed_short: usize,
    pub removed_balance: usize,
    pub kept: usize,
    pub kept_chars: usize,
}

/// Per-class removal counts, keyed by label.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct PreprocessReport(pub BTreeMap<String, StageCounts>);

/// Removes duplicates (on the filtered sequence, first occurrence wins) and
/// short samples, then optionally balances total filtered characters by
/// dropping the longest samples of the larger class first.
///
/// During balancing a sample is dropped only if that brings the two totals
/// closer, so the final difference is below half the length of any sample
/// left in the larger class, or below the length of the last dropped sample
/// when the totals crossed.
pub fn preprocess(
    samples: Vec<LabeledSample>,
    labels: [&str; 2],
    alphabet: &Alphabet,
    opts: &PreprocessOptions,
) -> Result<(Vec<LabeledSample>, PreprocessReport)> {
    let mut report = PreprocessReport(
        labels
            .iter()
            .map(|l| (l.to_string(), StageCounts::default()))
            .collect(),
    );
    let mut seen: HashSet<Vec<u8>> = HashSet::new();
    let mut kept: Vec<(LabeledSample, usize)> = Vec::with_capacity(samples.len());
    for s in samples {
        let stage = report
            .0
            .get_mut(&s.label)
            .ok_or_else(|| Error::UnknownLabel(s.label.clone()))?;
        let seq = alphabet.filter_text(&s.text, opts.lowercase).into_inner();
        let len = seq.len();
        if !seen.insert(seq) {
            stage.removed_duplicates += 1;
        } else if len < opts.min_chars {
            stage.removed_short += 1;
        } else {
            kept.push((s, len));
        }
    }

    if opts.balance {
        let total =
            |label: &str, kept: &[(LabeledSample, usize)]| -> usize {
                kept.iter().filter(|(s, _)| s.label == label).map(|(_, n)| n).sum()
            };
        let (t0, t1) = (total(labels[0], &kept), total(labels[1], &kept));
        let (larger, mut diff) = if t0 >= t1 {
            (labels[0], (t0 - t1) as i64)
        } else {
            (labels[1], (t1 - t0) as i64)
        };
        let mut candidates: Vec<usize> = (0..kept.len())
            .filter(|&i| kept[i].0.label == larger)
            .collect();
        // longest first, earlier samples first among equal lengths
        candidates.sort_by_key(|&i| (std::cmp::Reverse(kept[i].1), i));
        let mut drop = vec![false; kept.len()];
        for i in candidates {
            if diff <= 0 {
                break;
            }
            let len = kept[i].1 as i64;
            if len < 2 * diff {
                drop[i] = true;
                diff -= len;
            }
        }
        let mut idx = 0;
        kept.retain(|_| {
            let d = drop[idx];
            idx += 1;
            !d
        });
        report.0.get_mut(larger).unwrap().removed_balance = drop.iter().filter(|&&d| d).count();
    }

    for (s, len) in &kept {
        let stage = report.0.get_mut(&s.label).unwrap();
        stage.kept += 1;
        stage.kept_chars += len;
    }
    for label in labels {
        if report.0[label].kept == 0 {
            return Err(Error::EmptyClass(label.to_string()));
        }
    }
    Ok((kept.into_iter().map(|(s, _)| s).collect(), report))
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetSplit {
    pub train: Vec<LabeledSample>,
    pub validation: Vec<LabeledSample>,
    pub test: Vec<LabeledSample>,
    pub seed: u64,
    pub ratios: [f64; 3],
}

/// Part sizes for `n` samples: floors of each share, with the remainder given
/// to train first, then validation.
pub fn split_sizes(n: usize, ratios: [f64; 3]) -> [usize; 3] {
    let mut sizes = ratios.map(|r| (n as f64 * r + 1e-9).floor() as usize);
    let mut rem = n.saturating_sub(sizes.iter().sum());
    for size in sizes.iter_mut() {
        if rem == 0 {
            break;
        }
        *size += 1;
        rem -= 1;
    }
    sizes
}

/// Stratified seeded split. Each class is shuffled independently, in the
/// order given by `labels`, with one generator seeded from `seed`.
pub fn split(
    samples: &[LabeledSample],
    labels: [&str; 2],
    ratios: [f64; 3],
    seed: u64,
) -> Result<DatasetSplit> {
    if ratios.iter().any(|r| !r.is_finite() || *r < 0.0)
        || (ratios.iter().sum::<f64>() - 1.0).abs() > 1e-9
    {
        return Err(Error::InvalidRatios(ratios));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = DatasetSplit {
        train: Vec::new(),
        validation: Vec::new(),
        test: Vec::new(),
        seed,
        ratios,
    };
    for label in labels {
        let mut class: Vec<&LabeledSample> = samples.iter().filter(|s| s.label == label).collect();
        if class.len() < MIN_SAMPLES_PER_CLASS {
            return Err(Error::TooFewSamples {
                label: label.to_string(),
                count: class.len(),
                min: MIN_SAMPLES_PER_CLASS,
            });
        }
        class.shuffle(&mut rng);
        let [n_train, n_val, _] = split_sizes(class.len(), ratios);
        let (train, rest) = class.split_at(n_train);
        let (val, test) = rest.split_at(n_val);
        out.train.extend(train.iter().map(|&s| s.clone()));
        out.validation.extend(val.iter().map(|&s| s.clone()));
        out.test.extend(test.iter().map(|&s| s.clone()));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClassReference {
    pub label: String,
    pub sample_ids: Vec<String>,
    pub total_chars: usize,
}

/// Total filtered characters available for `label`.
pub fn class_chars(samples: &[LabeledSample], label: &str, alphabet: &Alphabet, lowercase: bool) -> usize {
    samples
        .iter()
        .filter(|s| s.label == label)
        .map(|s| alphabet.filtered_len(&s.text, lowercase))
        .sum()
}

/// Trains a class model on a growing prefix of the class's filtered
/// character stream. Samples are consumed in the order given and each starts
/// a fresh context; a sample cut at a length boundary resumes where it stopped
/// when the builder advances, so every prefix length yields the same counts as
/// training from scratch on that prefix.
pub struct ReferenceBuilder {
    label: String,
    sequences: Vec<(String, Vec<u8>)>,
    model: ContextModel,
    /// Index of the sample being consumed and symbols of it already used.
    sample: usize,
    offset: usize,
    total_chars: usize,
    available: usize,
}

impl ReferenceBuilder {
    pub fn new(
        samples: &[LabeledSample],
        label: &str,
        k: usize,
        alphabet: &Alphabet,
        lowercase: bool,
    ) -> Result<Self> {
        let model = ContextModel::new(k, alphabet.len())?;
        let sequences: Vec<(String, Vec<u8>)> = samples
            .iter()
            .filter(|s| s.label == label)
            .map(|s| (s.id.clone(), alphabet.filter_text(&s.text, lowercase).into_inner()))
            .filter(|(_, seq)| !seq.is_empty())
            .collect();
        let available = sequences.iter().map(|(_, s)| s.len()).sum();
        if available == 0 {
            return Err(Error::EmptyClass(label.to_string()));
        }
        Ok(ReferenceBuilder {
            label: label.to_string(),
            sequences,
            model,
            sample: 0,
            offset: 0,
            total_chars: 0,
            available,
        })
    }

    /// Filtered characters in the whole class stream.
    pub fn available_chars(&self) -> usize {
        self.available
    }

    pub fn total_chars(&self) -> usize {
        self.total_chars
    }

    pub fn model(&self) -> &ContextModel {
        &self.model
    }

    /// Trains on the stream up to `chars` filtered characters (capped at the
    /// available amount). Never moves backwards.
    pub fn advance_to(&mut self, chars: usize) -> Result<()> {
        let k = self.model.k();
        while self.total_chars < chars && self.sample < self.sequences.len() {
            let seq = &self.sequences[self.sample].1;
            let take = (seq.len() - self.offset).min(chars - self.total_chars);
            let end = self.offset + take;
            // re-read up to k symbols so windows ending in the new part keep their context
            self.model.train(&seq[self.offset.saturating_sub(k)..end])?;
            self.total_chars += take;
            if end == seq.len() {
                self.sample += 1;
                self.offset = 0;
            } else {
                self.offset = end;
            }
        }
        Ok(())
    }

    pub fn reference(&self) -> ClassReference {
        let used = self.sample + usize::from(self.offset > 0);
        ClassReference {
            label: self.label.clone(),
            sample_ids: self.sequences[..used].iter().map(|(id, _)| id.clone()).collect(),
            total_chars: self.total_chars,
        }
    }

    pub fn finish(self) -> (ClassReference, ContextModel) {
        let reference = self.reference();
        (reference, self.model)
    }
}

/// Trains one order-`k` model on the samples of `label`, in the order given,
/// with a fresh context per sample. With `max_chars`, training stops once that
/// many filtered characters were used, truncating the last sample.
pub fn build_reference(
    samples: &[LabeledSample],
    label: &str,
    k: usize,
    alphabet: &Alphabet,
    lowercase: bool,
    max_chars: Option<usize>,
) -> Result<(ClassReference, ContextModel)> {
    let mut builder = ReferenceBuilder::new(samples, label, k, alphabet, lowercase)?;
    builder.advance_to(max_chars.unwrap_or(usize::MAX))?;
    Ok(builder.finish())
}

/// Sha-256 of a file, hex encoded.
pub fn file_checksum(path: impl AsRef<Path>) -> Result<String> {
    use sha2::{Digest, Sha256};
    let path = path.as_ref();
    let mut file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut hasher = Sha256::new();
    std::io::copy(&mut file, &mut hasher).map_err(|e| Error::io(path, e))?;
    Ok(hex::encode(hasher.finalize()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alphabet::Preset;
    use std::path::PathBuf;

    fn sample(id: usize, text: &str, label: &str) -> LabeledSample {
        LabeledSample {
            id: format!("t:{id}"),
            text: text.into(),
            label: label.into(),
        }
    }

    fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
        let p = dir.join(name);
        File::create(&p).unwrap().write_all(body.as_bytes()).unwrap();
        p
    }

    #[test]
    fn jsonl_label_map() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(
            dir.path(),
            "d.jsonl",
            "{\"answer\": \"hello there\", \"source\": \"chatgpt\"}\n\n{\"answer\": \"hi\", \"source\": \"human\"}\n{\"answer\": \"x\", \"source\": \"other\"}\n",
        );
        let mut opts = LoadOptions::new(Format::Jsonl);
        opts.text_field = "answer".into();
        opts.label_field = "source".into();
        opts.label_map = [("chatgpt", AI), ("human", HUMAN)]
            .into_iter()
            .map(|(a, b)| (a.to_string(), b.to_string()))
            .collect();
        let d = load_dataset(&p, &opts).unwrap();
        assert_eq!(d.samples.len(), 2);
        assert_eq!(d.skipped, 1);
        assert_eq!(d.samples[0].label, AI);
        assert_eq!(d.samples[0].id, "d.jsonl:0");
        assert_eq!(d.samples[1].label, HUMAN);
        assert_eq!(d.samples[1].id, "d.jsonl:1");
    }

    #[test]
    fn jsonl_numeric_labels() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(dir.path(), "n.jsonl", "{\"text\": \"abc\", \"generated\": 1.0}\n");
        let mut opts = LoadOptions::new(Format::Jsonl);
        opts.label_field = "generated".into();
        opts.label_map.insert("1.0".into(), AI.into());
        assert_eq!(load_dataset(&p, &opts).unwrap().samples[0].label, AI);
    }

    #[test]
    fn jsonl_syntax_error_names_line() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(dir.path(), "bad.jsonl", "{\"text\": \"a\", \"label\": \"ai\"}\n{oops\n");
        match load_dataset(&p, &LoadOptions::new(Format::Jsonl)) {
            Err(Error::Parse { record, .. }) => assert_eq!(record, 2),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn empty_and_missing_files() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(dir.path(), "empty.jsonl", "");
        assert!(matches!(
            load_dataset(&p, &LoadOptions::new(Format::Jsonl)),
            Err(Error::NoRecords(_))
        ));
        assert!(matches!(
            load_dataset(dir.path().join("nope.csv"), &LoadOptions::new(Format::Csv)),
            Err(Error::Io { .. })
        ));
    }

    #[test]
    fn csv_skips_empty_text() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(
            dir.path(),
            "d.csv",
            "text,label\n\"hello, \"\"world\"\"\",human\n,ai\nsome text,ai\n",
        );
        let d = load_dataset(&p, &LoadOptions::new(Format::Csv)).unwrap();
        assert_eq!(d.samples.len(), 2);
        assert_eq!(d.skipped, 1);
        assert_eq!(d.samples[0].text, "hello, \"world\"");
        assert_eq!(d.samples[1].id, "d.csv:2");
    }

    #[test]
    fn csv_custom_delimiter() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(dir.path(), "d.tsv", "label\ttext\nai\tone two\n");
        let mut opts = LoadOptions::new(Format::Csv);
        opts.delimiter = b'\t';
        let d = load_dataset(&p, &opts).unwrap();
        assert_eq!(d.samples[0].text, "one two");
    }

    fn opts(min_chars: usize, balance: bool) -> PreprocessOptions {
        PreprocessOptions {
            min_chars,
            lowercase: true,
            balance,
        }
    }

    #[test]
    fn duplicates_compare_filtered_text() {
        let a = Preset::Sigma2.alphabet();
        let samples = vec![
            sample(0, "Hello World", HUMAN),
            sample(1, "hello world!!", HUMAN),
            sample(2, "something else", AI),
        ];
        let (kept, report) = preprocess(samples, [HUMAN, AI], &a, &opts(1, false)).unwrap();
        assert_eq!(kept.len(), 2);
        assert_eq!(kept[0].id, "t:0");
        assert_eq!(report.0[HUMAN].removed_duplicates, 1);
    }

    #[test]
    fn short_boundary() {
        let a = Preset::Sigma2.alphabet();
        let samples = vec![
            sample(0, &"a".repeat(99), HUMAN),
            sample(1, &"b".repeat(100), HUMAN),
            sample(2, &"c".repeat(100), AI),
        ];
        let (kept, report) = preprocess(samples, [HUMAN, AI], &a, &opts(100, false)).unwrap();
        assert_eq!(kept.len(), 2);
        assert_eq!(report.0[HUMAN].removed_short, 1);
        let json = serde_json::to_value(&report).unwrap();
        assert_eq!(json["human"]["removed_short"], 1);
        assert_eq!(json["ai"]["removed_balance"], 0);
    }

    #[test]
    fn empty_class_is_error() {
        let a = Preset::Sigma2.alphabet();
        let samples = vec![sample(0, "long enough text", HUMAN)];
        assert!(matches!(
            preprocess(samples, [HUMAN, AI], &a, &opts(1, false)),
            Err(Error::EmptyClass(l)) if l == AI
        ));
    }

    fn distinct_text(i: usize, len: usize) -> String {
        let mut s = format!("{i:06}");
        while s.len() < len {
            s.push('x');
        }
        s.truncate(len);
        s
    }

    #[test]
    fn balance_1000_vs_1500() {
        let a = Preset::Sigma2.alphabet();
        let mut samples = Vec::new();
        for i in 0..10 {
            samples.push(sample(i, &distinct_text(i, 100), HUMAN));
        }
        let lens = [300, 250, 200, 200, 150, 150, 100, 100, 50];
        for (j, &len) in lens.iter().enumerate() {
            samples.push(sample(100 + j, &distinct_text(100 + j, len), AI));
        }
        let (kept, report) = preprocess(samples, [HUMAN, AI], &a, &opts(1, true)).unwrap();
        let sum = |l: &str| -> usize {
            kept.iter().filter(|s| s.label == l).map(|s| a.filtered_len(&s.text, true)).sum()
        };
        let (h, ai) = (sum(HUMAN), sum(AI));
        assert_eq!(h, 1000);
        assert_eq!(report.0[HUMAN].removed_balance, 0);
        assert!(report.0[AI].removed_balance > 0);
        let max_len = kept.iter().map(|s| s.text.len()).max().unwrap();
        assert!(h.abs_diff(ai) < max_len, "{h} vs {ai}");
        assert_eq!(report.0[AI].kept_chars, ai);
    }

    #[test]
    fn split_exact_and_deterministic() {
        let samples: Vec<_> = (0..200)
            .map(|i| sample(i, "text", if i % 2 == 0 { HUMAN } else { AI }))
            .collect();
        let s = split(&samples, [HUMAN, AI], DEFAULT_RATIOS, 42).unwrap();
        assert_eq!((s.train.len(), s.validation.len(), s.test.len()), (160, 20, 20));
        for part in [&s.train, &s.validation, &s.test] {
            assert_eq!(part.iter().filter(|x| x.label == AI).count() * 2, part.len());
        }
        let again = split(&samples, [HUMAN, AI], DEFAULT_RATIOS, 42).unwrap();
        assert_eq!(s, again);
        let other = split(&samples, [HUMAN, AI], DEFAULT_RATIOS, 7).unwrap();
        assert_ne!(s.train, other.train);
    }

    #[test]
    fn split_rounding() {
        assert_eq!(split_sizes(101, DEFAULT_RATIOS), [81, 10, 10]);
        assert_eq!(split_sizes(102, DEFAULT_RATIOS), [82, 10, 10]);
        assert_eq!(split_sizes(109, DEFAULT_RATIOS), [88, 11, 10]);
        assert_eq!(split_sizes(100, DEFAULT_RATIOS), [80, 10, 10]);
        assert_eq!(split_sizes(10, DEFAULT_RATIOS), [8, 1, 1]);
        for n in 0..500 {
            let sizes = split_sizes(n, DEFAULT_RATIOS);
            assert_eq!(sizes.iter().sum::<usize>(), n);
            for (s, r) in sizes.iter().zip(DEFAULT_RATIOS) {
                assert!((*s as f64 - n as f64 * r).abs() <= 1.0 + 1e-9);
            }
        }
    }

    #[test]
    fn split_errors() {
        let samples: Vec<_> = (0..30)
            .map(|i| sample(i, "t", if i < 25 { HUMAN } else { AI }))
            .collect();
        assert!(matches!(
            split(&samples, [HUMAN, AI], DEFAULT_RATIOS, 1),
            Err(Error::TooFewSamples { count: 5, .. })
        ));
        assert!(matches!(
            split(&samples, [HUMAN, AI], [0.5, 0.5, 0.5], 1),
            Err(Error::InvalidRatios(_))
        ));
    }

    #[test]
    fn reference_truncation() {
        let a = Preset::Sigma2.alphabet();
        let samples: Vec<_> = (0..5)
            .map(|i| sample(i, &distinct_text(i, 40), HUMAN))
            .chain([sample(9, "ignored other class", AI)])
            .collect();
        let (r, m) = build_reference(&samples, HUMAN, 2, &a, true, Some(100)).unwrap();
        assert_eq!(r.total_chars, 100);
        assert_eq!(r.sample_ids, vec!["t:0", "t:1", "t:2"]);
        assert_eq!(m.trained_symbols(), 38 + 38 + 18);

        let (full, _) = build_reference(&samples, HUMAN, 2, &a, true, None).unwrap();
        assert_eq!(full.total_chars, 200);
        assert_eq!(class_chars(&samples, HUMAN, &a, true), 200);
        assert!(matches!(
            build_reference(&samples, "robot", 2, &a, true, None),
            Err(Error::EmptyClass(_))
        ));
    }

    #[test]
    fn reference_is_reproducible() {
        let a = Preset::Sigma2.alphabet();
        let samples: Vec<_> = (0..20).map(|i| sample(i, &distinct_text(i * 7, 90), AI)).collect();
        let (_, m1) = build_reference(&samples, AI, 3, &a, true, None).unwrap();
        let (_, m2) = build_reference(&samples, AI, 3, &a, true, None).unwrap();
        assert_eq!(
            crate::persistence::encode_model(&m1, &a).unwrap(),
            crate::persistence::encode_model(&m2, &a).unwrap()
        );
    }

    #[test]
    fn incremental_matches_fresh_build() {
        let a = Preset::Sigma2.alphabet();
        let samples: Vec<_> = (0..12)
            .map(|i| sample(i, &distinct_text(i * 13, 20 + 7 * i), HUMAN))
            .collect();
        let k = 3;
        let mut builder = ReferenceBuilder::new(&samples, HUMAN, k, &a, true).unwrap();
        for len in [1, 2, 3, 5, 9, 20, 21, 44, 100, 101, 250, 600, 10_000] {
            builder.advance_to(len).unwrap();
            let (r, m) = build_reference(&samples, HUMAN, k, &a, true, Some(len)).unwrap();
            assert_eq!(builder.reference(), r, "len {len}");
            assert_eq!(builder.model(), &m, "len {len}");
        }
        assert_eq!(builder.total_chars(), builder.available_chars());
    }
}

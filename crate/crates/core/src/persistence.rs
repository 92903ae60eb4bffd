//! Binary model files and JSON classifier bundles.
//!
//! Model file layout, all integers little-endian:
//!
//! ```text
//! magic        4 bytes  "FCMX"
//! version      u16
//! k            u8
//! alphabet     u32 byte length + UTF-8 symbols in index order
//! entry_count  u64
//! entries      entry_count x (context_key u64, symbol u8, count u64),
//!              strictly increasing by (context_key, symbol)
//! checksum     u32 CRC-32 of every preceding byte
//! ```

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::alphabet::Alphabet;
use crate::classifier::BinaryClassifier;
use crate::error::{Error, Result};
use crate::fcm::{ContextModel, SmoothingParams};

pub const MAGIC: &[u8; 4] = b"FCMX";
pub const FORMAT_VERSION: u16 = 1;
pub const BUNDLE_VERSION: u32 = 1;
const ENTRY_BYTES: usize = 17;

/// Serializes a model. The output depends only on the count multiset.
pub fn encode_model(model: &ContextModel, alphabet: &Alphabet) -> Result<Vec<u8>> {
    if model.alphabet_size() != alphabet.len() {
        return Err(Error::ModelMismatch(format!(
            "model alphabet size {} vs alphabet of {} symbols",
            model.alphabet_size(),
            alphabet.len()
        )));
    }
    let symbols = alphabet.as_string();
    let entries = model.entries();
    let mut out =
        Vec::with_capacity(4 + 2 + 1 + 4 + symbols.len() + 8 + entries.len() * ENTRY_BYTES + 4);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.push(model.k() as u8);
    out.extend_from_slice(&(symbols.len() as u32).to_le_bytes());
    out.extend_from_slice(symbols.as_bytes());
    out.extend_from_slice(&(entries.len() as u64).to_le_bytes());
    for (ctx, sym, count) in entries {
        out.extend_from_slice(&ctx.to_le_bytes());
        out.push(sym);
        out.extend_from_slice(&count.to_le_bytes());
    }
    let crc = crc32fast::hash(&out);
    out.extend_from_slice(&crc.to_le_bytes());
    Ok(out)
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.buf.len())
            .ok_or_else(|| Error::Malformed("unexpected end of data".into()))?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

/// Parses a model file. Checks run in the order magic, checksum, version,
/// then structure.
pub fn decode_model(bytes: &[u8]) -> Result<(ContextModel, Alphabet)> {
    if bytes.len() < MAGIC.len() || &bytes[..4] != MAGIC {
        return Err(Error::BadMagic);
    }
    if bytes.len() < 4 + 2 + 4 {
        return Err(Error::ChecksumMismatch);
    }
    let (body, tail) = bytes.split_at(bytes.len() - 4);
    if crc32fast::hash(body) != u32::from_le_bytes(tail.try_into().unwrap()) {
        return Err(Error::ChecksumMismatch);
    }
    let mut r = Reader { buf: body, pos: 4 };
    let version = r.u16()?;
    if version == 0 || version > FORMAT_VERSION {
        return Err(Error::UnsupportedVersion(version));
    }
    let k = r.u8()? as usize;
    let alphabet_len = r.u32()? as usize;
    let symbols = std::str::from_utf8(r.take(alphabet_len)?)
        .map_err(|e| Error::Malformed(format!("alphabet is not UTF-8: {e}")))?;
    let alphabet = Alphabet::new(symbols)?;
    let count = r.u64()?;
    let expected = (count as usize)
        .checked_mul(ENTRY_BYTES)
        .ok_or_else(|| Error::Malformed("entry count too large".into()))?;
    if body.len() - r.pos != expected {
        return Err(Error::Malformed(format!(
            "{count} entries declared, {} bytes of entry data",
            body.len() - r.pos
        )));
    }
    let mut entries = Vec::with_capacity(count as usize);
    let mut prev: Option<(u64, u8)> = None;
    for _ in 0..count {
        let ctx = r.u64()?;
        let sym = r.u8()?;
        let n = r.u64()?;
        if prev.is_some_and(|p| p >= (ctx, sym)) {
            return Err(Error::UnsortedEntries);
        }
        prev = Some((ctx, sym));
        entries.push((ctx, sym, n));
    }
    let model = ContextModel::from_entries(k, alphabet.len(), entries)?;
    Ok((model, alphabet))
}

/// Writes `bytes` to a temporary file next to `path` and renames it into place.
pub(crate) fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

pub fn save_model(model: &ContextModel, alphabet: &Alphabet, path: impl AsRef<Path>) -> Result<()> {
    write_atomic(path.as_ref(), &encode_model(model, alphabet)?)
}

pub fn load_model(path: impl AsRef<Path>) -> Result<(ContextModel, Alphabet)> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_model(&bytes)
}

/// JSON manifest tying two model files to their labels and inference settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BundleManifest {
    pub version: u32,
    pub label_a: String,
    pub label_b: String,
    /// Relative paths are resolved against the manifest's directory.
    pub model_a_path: String,
    pub model_b_path: String,
    pub alpha: f64,
    pub lowercase: bool,
}

pub const BUNDLE_FILE: &str = "bundle.json";

/// Writes `<dir>/<label>.fcm` for each model plus `<dir>/bundle.json`.
/// Returns the manifest path.
pub fn save_bundle(classifier: &BinaryClassifier, dir: impl AsRef<Path>) -> Result<PathBuf> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let (label_a, label_b) = classifier.labels();
    let (model_a, model_b) = classifier.models();
    let file_a = format!("{label_a}.fcm");
    let file_b = format!("{label_b}.fcm");
    save_model(model_a, classifier.alphabet(), dir.join(&file_a))?;
    save_model(model_b, classifier.alphabet(), dir.join(&file_b))?;
    let manifest = BundleManifest {
        version: BUNDLE_VERSION,
        label_a: label_a.to_string(),
        label_b: label_b.to_string(),
        model_a_path: file_a,
        model_b_path: file_b,
        alpha: classifier.smoothing().alpha(),
        lowercase: classifier.lowercase(),
    };
    let path = dir.join(BUNDLE_FILE);
    let mut json = serde_json::to_vec_pretty(&manifest)?;
    json.push(b'\n');
    write_atomic(&path, &json)?;
    Ok(path)
}

/// Loads a bundle from its manifest path, or from a directory containing `bundle.json`.
pub fn load_bundle(path: impl AsRef<Path>) -> Result<BinaryClassifier> {
    let mut path = path.as_ref().to_path_buf();
    if path.is_dir() {
        path = path.join(BUNDLE_FILE);
    }
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let manifest: BundleManifest = serde_json::from_str(&text)?;
    if manifest.version == 0 || manifest.version > BUNDLE_VERSION {
        return Err(Error::UnsupportedVersion(manifest.version as u16));
    }
    let base = path.parent().unwrap_or(Path::new("."));
    let (model_a, alphabet_a) = load_model(base.join(&manifest.model_a_path))?;
    let (model_b, alphabet_b) = load_model(base.join(&manifest.model_b_path))?;
    if alphabet_a != alphabet_b {
        return Err(Error::ModelMismatch("models use different alphabets".into()));
    }
    BinaryClassifier::new(
        (manifest.label_a, model_a),
        (manifest.label_b, model_b),
        alphabet_a,
        SmoothingParams::new(manifest.alpha)?,
        manifest.lowercase,
    )
}

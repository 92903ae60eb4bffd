//! Symbol alphabets and the mapping from raw text onto symbol indices.
//!
//! Characters outside the alphabet are dropped without resetting context, so
//! the characters on either side of a gap become neighbours.

use std::fmt;
use std::str::FromStr;

use rustc_hash::FxHashMap;

use crate::error::{Error, Result};

const NOT_PRESENT: u16 = u16::MAX;

/// The four preset alphabets used by the trimming study.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Preset {
    /// Space and lowercase letters.
    Sigma1,
    /// Digits, space and lowercase letters.
    Sigma2,
    /// `Sigma2` plus common punctuation.
    Sigma3,
    /// `Sigma3` plus `@#$`.
    Sigma4,
}

impl Preset {
    pub const ALL: [Preset; 4] = [Preset::Sigma1, Preset::Sigma2, Preset::Sigma3, Preset::Sigma4];

    /// Characters of the preset, in index order.
    pub fn chars(self) -> &'static str {
        match self {
            Preset::Sigma1 => " abcdefghijklmnopqrstuvwxyz",
            Preset::Sigma2 => "1234567890 abcdefghijklmnopqrstuvwxyz",
            Preset::Sigma3 => "1234567890 abcdefghijklmnopqrstuvwxyz.,!?'\"/\\;:_-",
            // The published listing of this set is cut off after `$`.
            Preset::Sigma4 => "1234567890 abcdefghijklmnopqrstuvwxyz.,!?'\"/\\;:_-@#$",
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Preset::Sigma1 => "sigma1",
            Preset::Sigma2 => "sigma2",
            Preset::Sigma3 => "sigma3",
            Preset::Sigma4 => "sigma4",
        }
    }

    pub fn alphabet(self) -> Alphabet {
        Alphabet::new(self.chars()).expect("preset alphabets are valid")
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_lowercase();
        let digit = lower
            .strip_prefix("sigma")
            .or_else(|| lower.strip_prefix('σ'))
            .or_else(|| lower.strip_prefix('s'));
        match digit {
            Some("1") => Ok(Preset::Sigma1),
            Some("2") => Ok(Preset::Sigma2),
            Some("3") => Ok(Preset::Sigma3),
            Some("4") => Ok(Preset::Sigma4),
            _ => Err(Error::UnknownPreset(s.to_string())),
        }
    }
}

/// Looks up a preset alphabet by name (`sigma1`..`sigma4`, `Σ1`..`Σ4`).
pub fn preset_alphabet(name: &str) -> Result<Alphabet> {
    name.parse::<Preset>().map(Preset::alphabet)
}

/// An ordered set of distinct characters with a character to index bijection.
#[derive(Clone)]
pub struct Alphabet {
    symbols: Vec<char>,
    ascii: [u16; 128],
    other: FxHashMap<char, u8>,
}

impl Alphabet {
    /// Builds an alphabet from `chars` in order. Duplicates are rejected.
    pub fn new(chars: &str) -> Result<Self> {
        let symbols: Vec<char> = chars.chars().collect();
        if symbols.is_empty() {
            return Err(Error::EmptyAlphabet);
        }
        if symbols.len() > 256 {
            return Err(Error::AlphabetTooLarge(symbols.len()));
        }
        let mut ascii = [NOT_PRESENT; 128];
        let mut other = FxHashMap::default();
        for (i, &c) in symbols.iter().enumerate() {
            let fresh = if c.is_ascii() {
                let slot = &mut ascii[c as usize];
                let fresh = *slot == NOT_PRESENT;
                *slot = i as u16;
                fresh
            } else {
                other.insert(c, i as u8).is_none()
            };
            if !fresh {
                return Err(Error::DuplicateSymbol(c));
            }
        }
        if symbols.len() < 2 {
            return Err(Error::AlphabetTooSmall(symbols.len()));
        }
        Ok(Alphabet {
            symbols,
            ascii,
            other,
        })
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn symbols(&self) -> &[char] {
        &self.symbols
    }

    /// The alphabet rendered as a string in index order.
    pub fn as_string(&self) -> String {
        self.symbols.iter().collect()
    }

    #[inline]
    pub fn index_of(&self, c: char) -> Option<u8> {
        if c.is_ascii() {
            match self.ascii[c as usize] {
                NOT_PRESENT => None,
                i => Some(i as u8),
            }
        } else {
            self.other.get(&c).copied()
        }
    }

    pub fn symbol(&self, index: u8) -> Option<char> {
        self.symbols.get(index as usize).copied()
    }

    /// Maps `text` onto symbol indices, dropping characters outside the alphabet.
    pub fn filter_text(&self, text: &str, lowercase: bool) -> SymbolSequence {
        let mut out = Vec::with_capacity(text.len());
        self.filter_into(text, lowercase, &mut out);
        SymbolSequence(out)
    }

    /// Like [`Alphabet::filter_text`] but appends to an existing buffer.
    pub fn filter_into(&self, text: &str, lowercase: bool, out: &mut Vec<u8>) {
        for c in text.chars() {
            if lowercase {
                if c.is_ascii() {
                    if let Some(i) = self.index_of(c.to_ascii_lowercase()) {
                        out.push(i);
                    }
                } else {
                    out.extend(c.to_lowercase().filter_map(|l| self.index_of(l)));
                }
            } else if let Some(i) = self.index_of(c) {
                out.push(i);
            }
        }
    }

    /// Number of symbols `text` keeps after filtering, without allocating.
    pub fn filtered_len(&self, text: &str, lowercase: bool) -> usize {
        text.chars()
            .map(|c| {
                if !lowercase {
                    usize::from(self.index_of(c).is_some())
                } else if c.is_ascii() {
                    usize::from(self.index_of(c.to_ascii_lowercase()).is_some())
                } else {
                    c.to_lowercase()
                        .filter(|&l| self.index_of(l).is_some())
                        .count()
                }
            })
            .sum()
    }

    /// Renders symbol indices back into characters.
    pub fn render(&self, seq: &[u8]) -> String {
        seq.iter().map(|&i| self.symbols[i as usize]).collect()
    }
}

impl PartialEq for Alphabet {
    fn eq(&self, other: &Self) -> bool {
        self.symbols == other.symbols
    }
}

impl Eq for Alphabet {}

impl fmt::Debug for Alphabet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("Alphabet").field(&self.as_string()).finish()
    }
}

/// A sequence of symbol indices for some alphabet.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct SymbolSequence(Vec<u8>);

impl SymbolSequence {
    /// Wraps raw indices after checking them against `alphabet_size`.
    pub fn from_indices(indices: Vec<u8>, alphabet_size: usize) -> Result<Self> {
        if let Some(&bad) = indices.iter().find(|&&i| i as usize >= alphabet_size) {
            return Err(Error::SymbolOutOfRange {
                index: bad,
                alphabet_size,
            });
        }
        Ok(SymbolSequence(indices))
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<u8> {
        self.0
    }

    /// The first `n` symbols (or all of them if shorter).
    pub fn prefix(&self, n: usize) -> &[u8] {
        &self.0[..n.min(self.0.len())]
    }
}

impl AsRef<[u8]> for SymbolSequence {
    fn as_ref(&self) -> &[u8] {
        &self.0
    }
}

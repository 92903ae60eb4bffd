//! Finite-context models: sparse order-k symbol counts, additively smoothed
//! conditional probabilities, and the resulting code length of a sequence.
//!
//! Contexts are encoded as base-|Σ| integers over the k most recent symbols
//! (oldest symbol most significant). A (context, symbol) pair is stored under
//! the (k+1)-gram key `context * |Σ| + symbol`, so the model requires
//! `|Σ|^(k+1)` to fit in a `u64`.

use rustc_hash::FxHashMap;

use crate::error::{Error, Result};

/// Additive smoothing factor applied at inference time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothingParams {
    alpha: f64,
}

impl SmoothingParams {
    pub fn new(alpha: f64) -> Result<Self> {
        if alpha.is_finite() && alpha > 0.0 {
            Ok(SmoothingParams { alpha })
        } else {
            Err(Error::InvalidAlpha(alpha))
        }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
}

/// Occurrence counts `N(context, symbol)` for one class.
#[derive(Debug, Clone)]
pub struct ContextModel {
    k: usize,
    alphabet_size: usize,
    /// `alphabet_size^(k-1)`, the weight of the oldest symbol in a context key.
    high: u64,
    counts: FxHashMap<u64, u64>,
    totals: FxHashMap<u64, u64>,
    trained_symbols: u64,
}

impl ContextModel {
    /// An empty model of order `k` over `alphabet_size` symbols.
    pub fn new(k: usize, alphabet_size: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidOrder);
        }
        if !(2..=256).contains(&alphabet_size) {
            return Err(if alphabet_size < 2 {
                Error::AlphabetTooSmall(alphabet_size)
            } else {
                Error::AlphabetTooLarge(alphabet_size)
            });
        }
        let size = alphabet_size as u64;
        let fits = u32::try_from(k + 1)
            .ok()
            .and_then(|e| size.checked_pow(e))
            .is_some();
        if !fits {
            return Err(Error::KeySpaceOverflow { k, alphabet_size });
        }
        Ok(ContextModel {
            k,
            alphabet_size,
            high: size.pow(k as u32 - 1),
            counts: FxHashMap::default(),
            totals: FxHashMap::default(),
            trained_symbols: 0,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn alphabet_size(&self) -> usize {
        self.alphabet_size
    }

    /// Total number of (context, symbol) events recorded.
    pub fn trained_symbols(&self) -> u64 {
        self.trained_symbols
    }

    /// Number of distinct (context, symbol) pairs with a nonzero count.
    pub fn entry_count(&self) -> usize {
        self.counts.len()
    }

    /// Number of distinct contexts seen.
    pub fn context_count(&self) -> usize {
        self.totals.len()
    }

    fn check_symbols(&self, seq: &[u8]) -> Result<()> {
        match seq.iter().find(|&&s| s as usize >= self.alphabet_size) {
            Some(&index) => Err(Error::SymbolOutOfRange {
                index,
                alphabet_size: self.alphabet_size,
            }),
            None => Ok(()),
        }
    }

    /// Context key of a k-symbol window.
    pub fn context_key(&self, context: &[u8]) -> Result<u64> {
        if context.len() != self.k {
            return Err(Error::ContextLength {
                expected: self.k,
                got: context.len(),
            });
        }
        self.check_symbols(context)?;
        Ok(self.key_unchecked(context))
    }

    #[inline]
    fn key_unchecked(&self, context: &[u8]) -> u64 {
        let size = self.alphabet_size as u64;
        context.iter().fold(0u64, |key, &s| key * size + s as u64)
    }

    /// Counts every full-context position of `seq`. Context never carries over
    /// from a previous call.
    pub fn train(&mut self, seq: &[u8]) -> Result<()> {
        self.check_symbols(seq)?;
        let k = self.k;
        if seq.len() <= k {
            return Ok(());
        }
        let size = self.alphabet_size as u64;
        let mut ctx = self.key_unchecked(&seq[..k]);
        for i in k..seq.len() {
            let s = seq[i] as u64;
            let slot = self.counts.entry(ctx * size + s).or_insert(0);
            *slot = slot.checked_add(1).ok_or(Error::CountOverflow)?;
            let total = self.totals.entry(ctx).or_insert(0);
            *total = total.checked_add(1).ok_or(Error::CountOverflow)?;
            ctx = (ctx - seq[i - k] as u64 * self.high) * size + s;
        }
        self.trained_symbols = self
            .trained_symbols
            .checked_add((seq.len() - k) as u64)
            .ok_or(Error::CountOverflow)?;
        Ok(())
    }

    /// `N(context, symbol)`, zero when absent.
    pub fn count(&self, context: &[u8], symbol: u8) -> Result<u64> {
        let ctx = self.context_key(context)?;
        self.check_symbols(&[symbol])?;
        Ok(self.count_by_key(ctx, symbol))
    }

    /// Sum of counts over all symbols following `context`.
    pub fn context_total(&self, context: &[u8]) -> Result<u64> {
        let ctx = self.context_key(context)?;
        Ok(self.totals.get(&ctx).copied().unwrap_or(0))
    }

    #[inline]
    fn count_by_key(&self, ctx: u64, symbol: u8) -> u64 {
        self.counts
            .get(&(ctx * self.alphabet_size as u64 + symbol as u64))
            .copied()
            .unwrap_or(0)
    }

    /// Smoothed probability of `symbol` following `context`.
    pub fn symbol_probability(
        &self,
        context: &[u8],
        symbol: u8,
        smoothing: SmoothingParams,
    ) -> Result<f64> {
        let ctx = self.context_key(context)?;
        self.check_symbols(&[symbol])?;
        let n = self.count_by_key(ctx, symbol) as f64;
        let total = self.totals.get(&ctx).copied().unwrap_or(0) as f64;
        let alpha = smoothing.alpha;
        Ok((n + alpha) / (total + alpha * self.alphabet_size as f64))
    }

    /// Bits needed to code `seq` under this model. The first k symbols have no
    /// full context and are not coded.
    pub fn code_length(&self, seq: &[u8], smoothing: SmoothingParams) -> Result<f64> {
        let k = self.k;
        if seq.len() <= k {
            return Err(Error::TargetTooShort { len: seq.len(), k });
        }
        self.check_symbols(seq)?;
        let size = self.alphabet_size as u64;
        let alpha = smoothing.alpha;
        let alpha_sigma = alpha * self.alphabet_size as f64;
        let mut ctx = self.key_unchecked(&seq[..k]);
        let mut bits = 0.0f64;
        for i in k..seq.len() {
            let s = seq[i] as u64;
            let n = self.counts.get(&(ctx * size + s)).copied().unwrap_or(0) as f64;
            let total = self.totals.get(&ctx).copied().unwrap_or(0) as f64;
            bits -= ((n + alpha) / (total + alpha_sigma)).log2();
            ctx = (ctx - seq[i - k] as u64 * self.high) * size + s;
        }
        Ok(bits)
    }

    /// All nonzero counts as `(context_key, symbol, count)`, sorted.
    pub fn entries(&self) -> Vec<(u64, u8, u64)> {
        let size = self.alphabet_size as u64;
        let mut grams: Vec<(u64, u64)> = self.counts.iter().map(|(&g, &c)| (g, c)).collect();
        grams.sort_unstable_by_key(|&(g, _)| g);
        grams
            .into_iter()
            .map(|(g, c)| (g / size, (g % size) as u8, c))
            .collect()
    }

    /// Rebuilds a model from `(context_key, symbol, count)` triples.
    pub fn from_entries(
        k: usize,
        alphabet_size: usize,
        entries: impl IntoIterator<Item = (u64, u8, u64)>,
    ) -> Result<Self> {
        let mut model = ContextModel::new(k, alphabet_size)?;
        let size = alphabet_size as u64;
        let context_limit = model.high * size;
        for (ctx, symbol, count) in entries {
            if ctx >= context_limit {
                return Err(Error::Malformed(format!("context key {ctx} out of range")));
            }
            if symbol as usize >= alphabet_size {
                return Err(Error::SymbolOutOfRange {
                    index: symbol,
                    alphabet_size,
                });
            }
            if count == 0 {
                return Err(Error::Malformed("zero count entry".into()));
            }
            if model.counts.insert(ctx * size + symbol as u64, count).is_some() {
                return Err(Error::Malformed("duplicate entry".into()));
            }
            let total = model.totals.entry(ctx).or_insert(0);
            *total = total.checked_add(count).ok_or(Error::CountOverflow)?;
            model.trained_symbols = model
                .trained_symbols
                .checked_add(count)
                .ok_or(Error::CountOverflow)?;
        }
        Ok(model)
    }
}

impl PartialEq for ContextModel {
    fn eq(&self, other: &Self) -> bool {
        self.k == other.k
            && self.alphabet_size == other.alphabet_size
            && self.counts == other.counts
    }
}

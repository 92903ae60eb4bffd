//! Seeded synthetic text sources for tests, examples and benchmarks.

use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::SliceRandom;
use rand::Rng;

use crate::alphabet::Alphabet;

/// A fixed order-n Markov chain over symbol indices.
#[derive(Debug, Clone)]
pub struct MarkovSource {
    order: usize,
    alphabet_size: usize,
    /// One distribution per context, indexed by the base-|Σ| context key.
    tables: Vec<WeightedIndex<f64>>,
}

impl MarkovSource {
    fn from_weights(order: usize, alphabet_size: usize, weights: Vec<Vec<f64>>) -> Self {
        let tables = weights
            .into_iter()
            .map(|w| WeightedIndex::new(w).expect("positive weights"))
            .collect();
        MarkovSource {
            order,
            alphabet_size,
            tables,
        }
    }

    /// Two sources whose transition tables favour complementary halves of the
    /// alphabet in every context. `bias` is the probability mass a source puts
    /// on its favoured half.
    pub fn disjoint_pair<R: Rng>(
        order: usize,
        alphabet_size: usize,
        bias: f64,
        rng: &mut R,
    ) -> (MarkovSource, MarkovSource) {
        assert!(alphabet_size >= 2 && (0.5..1.0).contains(&bias));
        let contexts = alphabet_size.pow(order as u32);
        let half = alphabet_size / 2;
        let mut wa = Vec::with_capacity(contexts);
        let mut wb = Vec::with_capacity(contexts);
        let mut symbols: Vec<usize> = (0..alphabet_size).collect();
        for _ in 0..contexts {
            symbols.shuffle(rng);
            let raw: Vec<f64> = (0..alphabet_size).map(|_| rng.gen_range(0.2..1.0)).collect();
            let (first, second) = symbols.split_at(half);
            let mass = |set: &[usize]| set.iter().map(|&s| raw[s]).sum::<f64>();
            let (m1, m2) = (mass(first), mass(second));
            let mut a = vec![0.0; alphabet_size];
            let mut b = vec![0.0; alphabet_size];
            for &s in first {
                a[s] = bias * raw[s] / m1;
                b[s] = (1.0 - bias) * raw[s] / m1;
            }
            for &s in second {
                a[s] = (1.0 - bias) * raw[s] / m2;
                b[s] = bias * raw[s] / m2;
            }
            wa.push(a);
            wb.push(b);
        }
        (
            MarkovSource::from_weights(order, alphabet_size, wa),
            MarkovSource::from_weights(order, alphabet_size, wb),
        )
    }

    /// A source with independently random transition tables.
    pub fn random<R: Rng>(order: usize, alphabet_size: usize, rng: &mut R) -> MarkovSource {
        let contexts = alphabet_size.pow(order as u32);
        let weights = (0..contexts)
            .map(|_| {
                (0..alphabet_size)
                    .map(|_| rng.gen_range(0.01f64..1.0).powi(3))
                    .collect()
            })
            .collect();
        MarkovSource::from_weights(order, alphabet_size, weights)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn alphabet_size(&self) -> usize {
        self.alphabet_size
    }

    /// Draws `len` symbols, starting from a uniformly random context.
    pub fn generate<R: Rng>(&self, len: usize, rng: &mut R) -> Vec<u8> {
        let size = self.alphabet_size;
        let contexts = self.tables.len();
        let mut ctx = rng.gen_range(0..contexts);
        let mut out = Vec::with_capacity(len);
        for _ in 0..len {
            let s = self.tables[ctx].sample(rng);
            out.push(s as u8);
            ctx = (ctx * size + s) % contexts;
        }
        out
    }

    /// Draws `len` symbols and renders them through `alphabet`.
    pub fn generate_text<R: Rng>(&self, alphabet: &Alphabet, len: usize, rng: &mut R) -> String {
        assert_eq!(alphabet.len(), self.alphabet_size);
        alphabet.render(&self.generate(len, rng))
    }
}

/// Word-level text from a Zipf-distributed vocabulary of pseudo-words,
/// separated by spaces with occasional punctuation and digits. Its n-gram
/// statistics resemble natural language more than a character Markov chain.
#[derive(Debug, Clone)]
pub struct WordSource {
    words: Vec<String>,
    weights: WeightedIndex<f64>,
}

impl WordSource {
    pub fn new<R: Rng>(vocabulary: usize, zipf_exponent: f64, rng: &mut R) -> WordSource {
        const LETTERS: &[u8] = b"etaoinshrdlcumwfgypbvkjxqz";
        let words = (0..vocabulary)
            .map(|_| {
                let len = rng.gen_range(1..=9);
                (0..len)
                    .map(|_| {
                        // skewed towards frequent letters
                        let r: f64 = rng.gen();
                        LETTERS[((r * r) * LETTERS.len() as f64) as usize] as char
                    })
                    .collect()
            })
            .collect();
        let weights = WeightedIndex::new(
            (1..=vocabulary).map(|rank| 1.0 / (rank as f64).powf(zipf_exponent)),
        )
        .expect("positive weights");
        WordSource { words, weights }
    }

    /// Roughly `chars` characters of text.
    pub fn generate<R: Rng>(&self, chars: usize, rng: &mut R) -> String {
        let mut out = String::with_capacity(chars + 16);
        while out.len() < chars {
            if !out.is_empty() {
                out.push(' ');
            }
            if rng.gen_ratio(1, 40) {
                out.push_str(&rng.gen_range(0..2000).to_string());
            } else {
                out.push_str(&self.words[self.weights.sample(rng)]);
            }
            if rng.gen_ratio(1, 12) {
                out.push(if rng.gen_ratio(1, 4) { ',' } else { '.' });
            }
        }
        out
    }
}

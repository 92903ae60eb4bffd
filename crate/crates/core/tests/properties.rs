use fcmdetect::dataset::{self, LabeledSample};
use fcmdetect::experiments::{self, ReferenceLengthParams, TargetPrefixParams};
use fcmdetect::pipeline::{self, ClassLabels};
use fcmdetect::synthetic::{MarkovSource, WordSource};
use fcmdetect::{preset_alphabet, Alphabet, BinaryClassifier, ContextModel, SmoothingParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn smoothing(alpha: f64) -> SmoothingParams {
    SmoothingParams::new(alpha).unwrap()
}

#[test]
fn self_affinity() {
    // a text used as one class's reference codes shorter under that class
    let alphabet = preset_alphabet("sigma2").unwrap();
    let mut wins = 0;
    for seed in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = WordSource::new(1500, 1.1, &mut rng);
        let b = WordSource::new(1500, 1.1, &mut rng);
        let text_a = a.generate(30_000, &mut rng);
        let text_b = b.generate(30_000, &mut rng);
        let mut ma = ContextModel::new(6, alphabet.len()).unwrap();
        ma.train(alphabet.filter_text(&text_a, true).as_slice()).unwrap();
        let mut mb = ContextModel::new(6, alphabet.len()).unwrap();
        mb.train(alphabet.filter_text(&text_b, true).as_slice()).unwrap();
        let c = BinaryClassifier::new(("a", ma), ("b", mb), alphabet.clone(), smoothing(0.5), true).unwrap();
        let start = rng.gen_range(0..text_a.len() - 600);
        let start = (start..).find(|&i| text_a.is_char_boundary(i)).unwrap();
        let d = c.classify(&text_a[start..start + 500]).unwrap();
        wins += (d.label == "a") as usize;
    }
    assert!(wins >= 19, "{wins}/20");
}

#[test]
fn batch_matches_sequential() {
    let alphabet = preset_alphabet("sigma2").unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let a = WordSource::new(1000, 1.0, &mut rng);
    let b = WordSource::new(1000, 1.2, &mut rng);
    let mut ma = ContextModel::new(4, alphabet.len()).unwrap();
    ma.train(alphabet.filter_text(&a.generate(50_000, &mut rng), true).as_slice()).unwrap();
    let mut mb = ContextModel::new(4, alphabet.len()).unwrap();
    mb.train(alphabet.filter_text(&b.generate(50_000, &mut rng), true).as_slice()).unwrap();
    let c = BinaryClassifier::new(("human", ma), ("ai", mb), alphabet, smoothing(0.5), true).unwrap();
    let texts: Vec<String> = (0..1000)
        .map(|i| {
            let n = rng.gen_range(0..400);
            if i % 2 == 0 { a.generate(n, &mut rng) } else { b.generate(n, &mut rng) }
        })
        .collect();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
    let batch = pool.install(|| c.classify_batch(&texts));
    assert_eq!(batch.len(), texts.len());
    for (t, got) in texts.iter().zip(batch) {
        let want = c.classify(t);
        match (got, want) {
            (Ok(g), Ok(w)) => {
                assert_eq!(g.label, w.label);
                assert_eq!(g.bits_a.to_bits(), w.bits_a.to_bits());
                assert_eq!(g.bits_b.to_bits(), w.bits_b.to_bits());
            }
            (Err(g), Err(w)) => assert_eq!(g.to_string(), w.to_string()),
            (g, w) => panic!("{g:?} vs {w:?}"),
        }
    }
}

fn markov_split(seed: u64, per_class: usize, len: usize) -> (dataset::DatasetSplit, Alphabet) {
    let alphabet = Alphabet::new("abcdef").unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (sa, sb) = MarkovSource::disjoint_pair(2, alphabet.len(), 0.6, &mut rng);
    let mut samples = Vec::new();
    for i in 0..per_class * 2 {
        let (label, src) = if i % 2 == 0 { ("human", &sa) } else { ("ai", &sb) };
        samples.push(LabeledSample {
            id: format!("s:{i}"),
            text: src.generate_text(&alphabet, len, &mut rng),
            label: label.into(),
        });
    }
    let split = dataset::split(&samples, ["human", "ai"], [0.6, 0.1, 0.3], seed).unwrap();
    (split, alphabet)
}

#[test]
fn accuracy_grows_with_reference_length() {
    let (split, alphabet) = markov_split(3, 400, 400);
    let params = ReferenceLengthParams {
        k: 2,
        alpha: 0.5,
        start: 50,
        step: 2000,
        max: Some(40_050),
    };
    let points =
        experiments::reference_length_curve(&split, &params, &alphabet, true, &ClassLabels::default()).unwrap();
    assert!(points.len() >= 10);
    let first = points.first().unwrap().accuracy;
    let last = points.last().unwrap().accuracy;
    assert!(last > first + 0.1, "{first} -> {last}");
    assert!(last >= 0.95, "{last}");
}

#[test]
fn accuracy_grows_with_target_prefix() {
    let (split, alphabet) = markov_split(4, 400, 600);
    let labels = ClassLabels::default();
    let (classifier, _) =
        pipeline::train_classifier(&split.train, &labels, 2, &alphabet, smoothing(0.5), true, None).unwrap();
    let params = TargetPrefixParams {
        per_class: 100,
        max_len: 600,
        step: 25,
    };
    let points = experiments::target_prefix_curve(&classifier, &split.test, &params, &labels).unwrap();
    assert_eq!(points.first().unwrap().x, 25);
    assert_eq!(points.last().unwrap().x, 600);
    let first = points.first().unwrap().accuracy;
    let last = points.last().unwrap().accuracy;
    assert!(last > first, "{first} -> {last}");
    assert!(last >= 0.95, "{last}");
}

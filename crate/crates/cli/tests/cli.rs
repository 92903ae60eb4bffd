use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

const BIN: &str = env!("CARGO_BIN_EXE_fcmdetect");

fn run(args: &[&str], stdin: Option<&str>) -> Output {
    let mut child = Command::new(BIN)
        .args(args)
        .env_remove("FCMDETECT_OUT")
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    {
        let mut pipe = child.stdin.take().unwrap();
        if let Some(input) = stdin {
            pipe.write_all(input.as_bytes()).unwrap();
        }
    }
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// Two classes drawn from disjoint vocabularies, deterministic.
fn write_separable(dir: &Path, human_only: bool) -> PathBuf {
    let human = ["the", "of", "and", "to", "in", "was", "for", "on", "that", "with"];
    let ai = ["quantum", "neural", "vector", "latent", "model", "token", "system", "layer"];
    let mut state = 7u64;
    let mut next = move |n: usize| {
        state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (state >> 33) as usize % n
    };
    let path = dir.join("data.jsonl");
    let mut f = std::fs::File::create(&path).unwrap();
    for i in 0..80 {
        let is_human = human_only || i % 2 == 0;
        let words: &[&str] = if is_human { &human } else { &ai };
        let text: Vec<&str> = (0..40 + next(20)).map(|_| words[next(words.len())]).collect();
        let label = if is_human { "human" } else { "ai" };
        let line = format!("{{\"text\":\"{}\",\"label\":\"{label}\"}}\n", text.join(" "));
        f.write_all(line.as_bytes()).unwrap();
    }
    path
}

fn train(dir: &Path) -> PathBuf {
    let data = write_separable(dir, false);
    let out = dir.join("out");
    let o = run(
        &["train", "--data", data.to_str().unwrap(), "--k", "3", "--out", out.to_str().unwrap()],
        None,
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    out
}

#[test]
fn missing_data_is_a_usage_error() {
    let o = run(&["train"], None);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("--data"));
}

#[test]
fn invalid_parameters_are_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_separable(dir.path(), false);
    let data = data.to_str().unwrap();
    for extra in [
        &["--alpha", "0"][..],
        &["--k", "0"],
        &["--k", "12"],
        &["--split", "0.5,0.5,0.5"],
        &["--alphabet", "sigma9"],
    ] {
        let mut args = vec!["train", "--data", data];
        args.extend_from_slice(extra);
        let o = run(&args, None);
        assert_eq!(o.status.code(), Some(2), "{extra:?}");
    }
    assert_eq!(run(&["experiment", "nope"], None).status.code(), Some(2));
}

#[test]
fn single_class_dataset_fails_naming_the_class() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_separable(dir.path(), true);
    let out = dir.path().join("out");
    let o = run(
        &["train", "--data", data.to_str().unwrap(), "--out", out.to_str().unwrap()],
        None,
    );
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("ai"));
}

#[test]
fn train_classify_evaluate() {
    let dir = tempfile::tempdir().unwrap();
    let out = train(dir.path());
    for file in ["bundle.json", "human.fcm", "ai.fcm", "test.jsonl", "validation.jsonl", "train.meta.json"] {
        assert!(out.join(file).exists(), "{file}");
    }

    let bundle = out.to_str().unwrap();
    let input = "the of and to in was for on that with the of and\nab\nquantum neural vector latent model token\n";
    let o = run(&["classify", "--bundle", bundle], Some(input));
    assert!(o.status.success());
    let lines: Vec<serde_json::Value> =
        stdout(&o).lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[0]["id"], 1);
    assert_eq!(lines[0]["label"], "human");
    assert_eq!(lines[1]["id"], 3);
    assert_eq!(lines[1]["label"], "ai");
    for key in ["bits_human", "bits_ai", "margin_bits_per_symbol", "tie"] {
        assert!(lines[0].get(key).is_some(), "{key}");
    }
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));

    let test = out.join("test.jsonl");
    let o = run(
        &["evaluate", "--bundle", bundle, "--data", test.to_str().unwrap(), "--out", bundle],
        None,
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("accuracy 1.000000"));
    let report: serde_json::Value =
        serde_json::from_slice(&std::fs::read(out.join("evaluation.json")).unwrap()).unwrap();
    assert_eq!(report["accuracy"], 1.0);
    let csv = std::fs::read_to_string(out.join("evaluation_confusion.csv")).unwrap();
    assert!(csv.starts_with("actual,human,ai\n"));
}

#[test]
fn empty_stdin_gives_no_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = train(dir.path());
    let o = run(&["classify", "--bundle", out.to_str().unwrap()], Some(""));
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
}

#[test]
fn worker_count_does_not_change_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = train(dir.path());
    let input: String = std::fs::read_to_string(out.join("validation.jsonl"))
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str::<serde_json::Value>(l).unwrap()["text"].as_str().unwrap().to_string() + "\n")
        .collect();
    let bundle = out.to_str().unwrap();
    let one = run(&["--workers", "1", "classify", "--bundle", bundle], Some(&input));
    let four = run(&["--workers", "4", "classify", "--bundle", bundle], Some(&input));
    assert!(!one.stdout.is_empty());
    assert_eq!(one.stdout, four.stdout);
}

#[test]
fn training_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_separable(dir.path(), false);
    let mut outputs = Vec::new();
    for name in ["a", "b"] {
        let out = dir.path().join(name);
        let o = run(
            &["train", "--data", data.to_str().unwrap(), "--out", out.to_str().unwrap()],
            None,
        );
        assert!(o.status.success());
        outputs.push(out);
    }
    for file in ["human.fcm", "ai.fcm", "bundle.json", "test.jsonl", "preprocess.json"] {
        let a = std::fs::read(outputs[0].join(file)).unwrap();
        let b = std::fs::read(outputs[1].join(file)).unwrap();
        assert_eq!(a, b, "{file}");
    }
}

#[test]
fn experiments_write_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_separable(dir.path(), false);
    let data = data.to_str().unwrap();
    let out = dir.path().join("exp");
    let out_s = out.to_str().unwrap();
    let cases: [(&[&str], &str, &str); 4] = [
        (&["grid", "--k", "2..3", "--alpha", "0.5,1"], "grid_search.csv", "k,alpha,f1,accuracy,train_seconds,eval_seconds,eval_chars_per_second"),
        (&["trim", "--k", "3"], "alphabet_trim.csv", "alphabet,size,f1,accuracy"),
        (&["reflen", "--k", "3", "--start", "200", "--step", "1000"], "ref_length.csv", "reference_chars,accuracy,f1,n_scored"),
        (&["bench", "--k", "3", "--single-thread"], "throughput.json", "{"),
    ];
    for (args, file, header) in cases {
        let mut full = vec!["experiment"];
        full.extend_from_slice(args);
        full.extend_from_slice(&["--data", data, "--out", out_s]);
        let o = run(&full, None);
        assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
        let body = std::fs::read_to_string(out.join(file)).unwrap();
        assert!(body.starts_with(header), "{file}: {body}");
        let stem = file.split('.').next().unwrap();
        let meta: serde_json::Value =
            serde_json::from_slice(&std::fs::read(out.join(format!("{stem}.meta.json"))).unwrap()).unwrap();
        assert_eq!(meta["seed"], 42);
        assert_eq!(meta["datasets"].as_object().unwrap().len(), 1);
    }
}

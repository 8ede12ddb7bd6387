use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn minkpp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_minkpp"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn benchmark_score_eval_sweep_online() {
    let dir = tempfile::tempdir().unwrap();
    let stats = dir.path().join("stats.jsonl");
    let out = minkpp(&[
        "toy-lm",
        "benchmark",
        "--n-snippets",
        "30",
        "--seed",
        "3",
        "--vectors",
        "--lowercase",
        "--neighbors",
        "2",
        "--ref-order",
        "1",
        "--output",
        s(&stats),
    ]);
    assert!(out.status.success(), "{out:?}");
    assert_eq!(fs::read_to_string(&stats).unwrap().lines().count(), 60);

    let out = minkpp(&["validate", "--input", s(&stats)]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("\"ok\":true"));

    for method in [
        "loss",
        "zlib",
        "ref",
        "lowercase",
        "neighbor",
        "mink",
        "minkpp",
    ] {
        let scores = dir.path().join(format!("{method}.jsonl"));
        let out = minkpp(&[
            "score",
            "--input",
            s(&stats),
            "--method",
            method,
            "--output",
            s(&scores),
        ]);
        assert!(out.status.success(), "{method}: {out:?}");
        let text = fs::read_to_string(&scores).unwrap();
        let header: serde_json::Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
        assert_eq!(header["schema"], "mia-scores/v1");
        assert_eq!(header["config"]["method"], method);
        assert_eq!(text.lines().count(), 61);

        let roc = dir.path().join(format!("{method}.roc.csv"));
        let report = dir.path().join(format!("{method}.report.json"));
        let out = minkpp(&[
            "eval",
            "--scores",
            s(&scores),
            "--fpr",
            "0.05,0.1",
            "--roc-out",
            s(&roc),
            "--report-out",
            s(&report),
        ]);
        assert!(out.status.success(), "{out:?}");
        assert!(stdout(&out).starts_with("AUROC="));
        let r: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
        assert_eq!(r["schema"], "mia-eval/v1");
        assert_eq!(r["n_pos"], 30);
        assert_eq!(r["tpr_at_fpr"].as_array().unwrap().len(), 2);
        assert!(fs::read_to_string(&roc)
            .unwrap()
            .starts_with("fpr,tpr,threshold\n0,0,inf\n"));
    }

    let sweep = dir.path().join("sweep.csv");
    let out = minkpp(&[
        "sweep",
        "--input",
        s(&stats),
        "--k-grid",
        "10,20,50",
        "--output",
        s(&sweep),
    ]);
    assert!(out.status.success(), "{out:?}");
    let csv = fs::read_to_string(&sweep).unwrap();
    assert_eq!(csv.lines().count(), 1 + 3 * 4);
    assert!(csv.contains("\nminkpp,sub_mu,20,"));

    let verdicts = dir.path().join("verdicts.jsonl");
    let out = minkpp(&[
        "online",
        "--input",
        s(&stats),
        "--window",
        "16",
        "--threshold",
        "-0.5",
        "--output",
        s(&verdicts),
    ]);
    assert!(out.status.success(), "{out:?}");
    // 63 positions per record -> windows of 16, 16, 16, 15.
    let lines: Vec<serde_json::Value> = fs::read_to_string(&verdicts)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(lines.len(), 60 * 4);
    assert_eq!(lines[3]["end"], 63);
}

#[test]
fn train_then_stats() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus.txt");
    fs::write(
        &corpus,
        "the quick brown fox jumps over the lazy dog\n".repeat(20),
    )
    .unwrap();
    let model = dir.path().join("model.json");
    let out = minkpp(&[
        "toy-lm",
        "train",
        "--corpus",
        s(&corpus),
        "--order",
        "2",
        "--output",
        s(&model),
    ]);
    assert!(out.status.success(), "{out:?}");

    let text = dir.path().join("probe.txt");
    fs::write(&text, "the lazy fox").unwrap();
    let stats = dir.path().join("probe.jsonl");
    let out = minkpp(&[
        "toy-lm",
        "stats",
        "--model",
        s(&model),
        "--text",
        s(&text),
        "--label",
        "member",
        "--vectors",
        "--output",
        s(&stats),
    ]);
    assert!(out.status.success(), "{out:?}");
    let line = fs::read_to_string(&stats).unwrap();
    let v: serde_json::Value = serde_json::from_str(line.trim()).unwrap();
    assert_eq!(v["id"], "probe");
    assert_eq!(v["label"], "member");
    assert_eq!(v["logp"].as_array().unwrap().len(), 11);
    assert_eq!(v["text"], "the lazy fox");
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let stats = dir.path().join("no_text.jsonl");
    fs::write(
        &stats,
        "{\"schema\":\"mia-stats/v1\",\"id\":\"a\",\"label\":\"member\",\"logp\":[-1.0],\"mu\":[-1.0],\"sigma\":[0.0]}\n",
    )
    .unwrap();
    let scores = dir.path().join("scores.jsonl");

    let out = minkpp(&[
        "score",
        "--input",
        s(&stats),
        "--method",
        "zlib",
        "--output",
        s(&scores),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("requires text"));
    assert!(!scores.exists());

    // Lenient mode skips the record instead.
    let out = minkpp(&[
        "score",
        "--input",
        s(&stats),
        "--method",
        "zlib",
        "--lenient",
        "--output",
        s(&scores),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("1 skipped"));

    let out = minkpp(&[
        "score",
        "--input",
        s(&stats),
        "--method",
        "nope",
        "--output",
        s(&scores),
    ]);
    assert_eq!(out.status.code(), Some(1));
    let out = minkpp(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(1));

    let bad = dir.path().join("bad.jsonl");
    fs::write(&bad, "{\"schema\":\"mia-stats/v9\"}\n").unwrap();
    let out = minkpp(&["validate", "--input", s(&bad)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stdout(&out).contains("\"ok\":false"));

    let out = minkpp(&[
        "score",
        "--input",
        s(&dir.path().join("missing.jsonl")),
        "--output",
        s(&scores),
    ]);
    assert_eq!(out.status.code(), Some(2));

    // Only members: AUROC is undefined.
    let one = dir.path().join("one.jsonl");
    fs::write(&one, "{\"schema\":\"mia-scores/v1\",\"tool_version\":\"0\",\"config\":{\"method\":\"loss\",\"k_percent\":20.0,\"variant\":\"full\",\"sigma_floor\":1e-6,\"reference_name\":null}}\n{\"id\":\"a\",\"label\":\"member\",\"score\":1.0}\n").unwrap();
    let out = minkpp(&["eval", "--scores", s(&one)]);
    assert_eq!(out.status.code(), Some(2));

    assert_eq!(minkpp(&["--help"]).status.code(), Some(0));
}

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use acueval::metaeval::BenchmarkReport;
use acueval::pipeline::backends::{LexicalChecker, SentenceExtractor};
use acueval::pipeline::two_stage_recall;
use serde_json::Value;

fn acueval(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_acueval"))
        .args(args)
        .env_remove("ACUEVAL_ENDPOINT")
        .output()
        .unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

const EXAMPLES: [(&str, &str, [&str; 2]); 3] = [
    (
        "e1",
        "The bridge opened on Monday. Traffic fell by half.",
        [
            "The bridge opened on Monday.",
            "Traffic fell by half after the bridge opened on Monday.",
        ],
    ),
    (
        "e2",
        "A storm hit the coast. Thousands lost power. Schools closed.",
        [
            "A storm hit the coast and schools closed.",
            "Sunny weather continued.",
        ],
    ),
    (
        "e3",
        "The team won the final. Fans celebrated downtown.",
        [
            "Fans celebrated downtown.",
            "The team won the final and fans celebrated.",
        ],
    ),
];

fn write_dataset(dir: &Path) -> PathBuf {
    let p = dir.join("data.jsonl");
    let lines: Vec<String> = EXAMPLES
        .iter()
        .map(|(id, r, [a, b])| {
            serde_json::json!({
                "example_id": id,
                "reference": r,
                "candidates": {"sysA": a, "sysB": b},
            })
            .to_string()
        })
        .collect();
    fs::write(&p, lines.join("\n") + "\n").unwrap();
    p
}

#[test]
fn score_writes_matrix_audit_and_timing() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_dataset(dir.path());
    let out = dir.path().join("out");
    let o = acueval(&[
        "score",
        "--dataset",
        path(&data),
        "--checker",
        "lexical",
        "--direction",
        "recall",
        "--out-dir",
        path(&out),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));

    let csv = fs::read_to_string(out.join("scores.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("doc_id,sysA,sysB"));
    for ((id, reference, cands), line) in EXAMPLES.iter().zip(lines) {
        let cells: Vec<&str> = line.split(',').collect();
        assert_eq!(cells[0], *id);
        for (cand, cell) in cands.iter().zip(&cells[1..]) {
            let expected = two_stage_recall(
                reference,
                cand,
                &SentenceExtractor,
                &LexicalChecker::default(),
            )
            .unwrap()
            .recall;
            assert_eq!(cell.parse::<f64>().unwrap(), expected, "{id}");
        }
    }
    let audit = fs::read_to_string(out.join("audit.jsonl")).unwrap();
    // 2 + 3 + 2 reference units, each checked against 2 systems.
    assert_eq!(audit.lines().count(), 14);
    let timing: Value =
        serde_json::from_str(&fs::read_to_string(out.join("timing.json")).unwrap()).unwrap();
    assert!(timing["extraction"].is_f64() && timing["checking"].is_f64());
    assert_eq!(timing["checked_units"], 14);
}

#[test]
fn score_output_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_dataset(dir.path());
    let run = |name: &str, workers: &str| {
        let out = dir.path().join(name);
        let o = acueval(&[
            "score",
            "--dataset",
            path(&data),
            "--direction",
            "f1",
            "--aggregate",
            "probability",
            "--workers",
            workers,
            "--out-dir",
            path(&out),
        ]);
        assert!(o.status.success());
        (
            fs::read(out.join("scores.csv")).unwrap(),
            fs::read(out.join("audit.jsonl")).unwrap(),
        )
    };
    let a = run("a", "1");
    assert_eq!(a, run("b", "4"));
    assert_eq!(a, run("c", "1"));
}

#[test]
fn unreachable_remote_backend_exits_69() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_dataset(dir.path());
    let out = dir.path().join("out");
    let o = acueval(&[
        "score",
        "--dataset",
        path(&data),
        "--checker",
        "remote",
        "--endpoint",
        "http://127.0.0.1:9",
        "--timeout",
        "5",
        "--out-dir",
        path(&out),
    ]);
    assert_eq!(
        o.status.code(),
        Some(69),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    assert!(!out.exists());
}

#[test]
fn endpoint_precedence_is_flag_then_config_then_env() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_dataset(dir.path());
    let config = dir.path().join("acueval.toml");
    fs::write(&config, "endpoint = \"http://127.0.0.1:10\"\n").unwrap();
    let run = |extra: &[&str]| {
        let mut args = vec![
            "score",
            "--dataset",
            path(&data),
            "--extractor",
            "remote",
            "--timeout",
            "5",
            "--out-dir",
            path(dir.path()),
        ];
        args.extend_from_slice(extra);
        let o = Command::new(env!("CARGO_BIN_EXE_acueval"))
            .args(&args)
            .env("ACUEVAL_ENDPOINT", "http://127.0.0.1:11")
            .output()
            .unwrap();
        assert_eq!(o.status.code(), Some(69));
        String::from_utf8(o.stderr).unwrap()
    };
    assert!(run(&[
        "--endpoint",
        "http://127.0.0.1:9",
        "--config",
        path(&config)
    ])
    .contains("127.0.0.1:9/"));
    assert!(run(&["--config", path(&config)]).contains("127.0.0.1:10/"));
    assert!(run(&[]).contains("127.0.0.1:11/"));
}

#[test]
fn missing_endpoint_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_dataset(dir.path());
    let o = acueval(&[
        "score",
        "--dataset",
        path(&data),
        "--checker",
        "remote",
        "--dry-run",
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn dry_run_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_dataset(dir.path());
    let out = dir.path().join("out");
    let o = path(&out);
    for args in [
        vec![
            "score",
            "--dataset",
            path(&data),
            "--out-dir",
            o,
            "--dry-run",
        ],
        vec![
            "candidate-sim",
            "--dataset",
            path(&data),
            "--out-dir",
            o,
            "--dry-run",
        ],
    ] {
        let r = acueval(&args);
        assert!(
            r.status.success(),
            "{args:?}: {}",
            String::from_utf8_lossy(&r.stderr)
        );
        assert!(!out.exists(), "{args:?}");
    }
}

#[test]
fn error_classes_map_to_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.jsonl");
    fs::write(
        &bad,
        "{\"example_id\": \"x\", \"reference\": 3, \"candidates\": {}}\n",
    )
    .unwrap();
    let o = acueval(&["stats", "--dataset", path(&bad)]);
    assert_eq!(o.status.code(), Some(65));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 1"));
    let o = acueval(&[
        "stats",
        "--dataset",
        path(&dir.path().join("missing.jsonl")),
    ]);
    assert_eq!(o.status.code(), Some(74));
    let o = acueval(&["score", "--bogus"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn stats_prints_counts() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_dataset(dir.path());
    let o = acueval(&["stats", "--dataset", path(&data)]);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["n_docs"], 3);
    assert_eq!(v["n_systems"], 2);
    assert_eq!(v["n_summaries"], 6);
}

fn write_matrix(p: &Path, rows: &[[f64; 3]]) {
    let mut s = String::from("doc_id,s0,s1,s2\n");
    for (i, r) in rows.iter().enumerate() {
        s += &format!("d{i},{},{},{}\n", r[0], r[1], r[2]);
    }
    fs::write(p, s).unwrap();
}

#[test]
fn benchmark_human_against_itself() {
    let dir = tempfile::tempdir().unwrap();
    let human = dir.path().join("human.csv");
    let noise = dir.path().join("noise.csv");
    let rows: Vec<[f64; 3]> = (0..30)
        .map(|i| {
            [
                (i % 7) as f64,
                ((i * 3) % 5) as f64 + 0.5,
                (i % 4) as f64 + 0.25,
            ]
        })
        .collect();
    write_matrix(&human, &rows);
    let noisy: Vec<[f64; 3]> = (0..30)
        .map(|i| [((i * 5) % 3) as f64, (i % 2) as f64, ((i * 7) % 6) as f64])
        .collect();
    write_matrix(&noise, &noisy);
    let out = dir.path().join("out");
    let o = acueval(&[
        "benchmark",
        "--human",
        path(&human),
        "--metric",
        &format!("copy={}", path(&human)),
        "--metric",
        &format!("noise={}", path(&noise)),
        "--baseline",
        "noise",
        "--coefficient",
        "kendall",
        "--coefficient",
        "pearson",
        "--resamples",
        "200",
        "--seed",
        "3",
        "--out-dir",
        path(&out),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report: BenchmarkReport =
        serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    let copies: Vec<_> = report.rows.iter().filter(|r| r.metric == "copy").collect();
    assert_eq!(copies.len(), 2);
    for r in copies {
        assert_eq!((r.system, r.summary), (1.0, 1.0));
        assert!(r.dagger_summary);
    }
    let csv_rows =
        BenchmarkReport::read_csv_rows(fs::File::open(out.join("report.csv")).unwrap()).unwrap();
    assert_eq!(csv_rows, report.rows);
    assert!(String::from_utf8_lossy(&o.stdout).contains("copy"));
}

#[test]
fn benchmark_reports_misaligned_matrix() {
    let dir = tempfile::tempdir().unwrap();
    let human = dir.path().join("human.csv");
    let other = dir.path().join("other.csv");
    write_matrix(&human, &[[1.0, 2.0, 3.0], [3.0, 1.0, 2.0]]);
    fs::write(&other, "doc_id,s0,s1,s2\nd0,1,2,3\nd9,1,2,3\n").unwrap();
    let o = acueval(&[
        "benchmark",
        "--human",
        path(&human),
        "--metric",
        &format!("m={}", path(&other)),
        "--dry-run",
    ]);
    assert_eq!(o.status.code(), Some(65));
    assert!(String::from_utf8_lossy(&o.stderr).contains("metric `m`"));
}

#[test]
fn quality_on_identical_sets_is_100() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("units.jsonl");
    let units = ["the prosecutor is from Marseille", "no videos were used"];
    let line =
        serde_json::json!({"example_id": "e", "generated": units, "reference": units}).to_string();
    fs::write(&input, format!("{line}\n")).unwrap();
    let out = dir.path().join("out");
    let o = acueval(&[
        "acu-quality",
        "--input",
        path(&input),
        "--out-dir",
        path(&out),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value =
        serde_json::from_str(&fs::read_to_string(out.join("quality.json")).unwrap()).unwrap();
    for k in ["precision", "recall", "f1"] {
        assert_eq!(v["corpus"][k], 100.0);
    }
}

#[test]
fn gen_pretrain_two_by_twelve() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("cands.jsonl");
    let mut lines = String::new();
    for (id, reference) in [
        ("a", "The bridge opened. Traffic fell."),
        ("b", "A storm hit. Power failed."),
    ] {
        let cands: Vec<String> = (0..12)
            .map(|k| format!("{} variant {k}", &reference[..k + 5]))
            .collect();
        lines +=
            &serde_json::json!({"example_id": id, "reference": reference, "candidates": cands})
                .to_string();
        lines.push('\n');
    }
    fs::write(&input, lines).unwrap();
    let run = |name: &str| {
        let out = dir.path().join(name);
        let o = acueval(&[
            "gen-pretrain",
            "--input",
            path(&input),
            "--scorer",
            "two-stage",
            "--out-dir",
            path(&out),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        fs::read_to_string(out.join("pretrain-00000.jsonl")).unwrap()
    };
    let shard = run("a");
    assert_eq!(shard.lines().count(), 24);
    for line in shard.lines() {
        let v: Value = serde_json::from_str(line).unwrap();
        let t = v["target_score"].as_f64().unwrap();
        assert!((0.0..=1.0).contains(&t));
    }
    assert_eq!(shard, run("b"));
}

#[test]
fn candidate_sim_three_candidates() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data.jsonl");
    let mut s = String::new();
    for i in 0..4 {
        s += &serde_json::json!({
            "example_id": format!("e{i}"),
            "reference": "r",
            "candidates": {"a": "one two three", "b": "one two four", "c": format!("five six {i}")},
        })
        .to_string();
        s.push('\n');
    }
    fs::write(&data, s).unwrap();
    let out = dir.path().join("out");
    let o = acueval(&[
        "candidate-sim",
        "--dataset",
        path(&data),
        "--bins",
        "10",
        "--out-dir",
        path(&out),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let pairs = fs::read_to_string(out.join("pairs.jsonl")).unwrap();
    assert_eq!(pairs.lines().count(), 12);
    for i in 0..4 {
        let tag = format!("\"e{i}\"");
        assert_eq!(pairs.lines().filter(|l| l.contains(&tag)).count(), 3);
    }
    let hist = fs::read_to_string(out.join("histogram.csv")).unwrap();
    let total: usize = hist
        .lines()
        .skip(1)
        .map(|l| l.rsplit(',').next().unwrap().parse::<usize>().unwrap())
        .sum();
    assert_eq!(total, 12);
    let summary: Value =
        serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["count"], 12);
}

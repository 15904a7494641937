use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn catalog() -> String {
    fixtures().join("catalog").display().to_string()
}

fn embeddings() -> String {
    fixtures().join("embeddings/fixture.vec").display().to_string()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_triplesim"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn json(out: &Output) -> Value {
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn validate_reports_counts_and_coverage() {
    let c = catalog();
    let e = embeddings();
    let report = json(&run(&["validate", &c, "--embeddings", &e, "--format", "json"]));
    let files = report["files"].as_array().unwrap();
    assert_eq!(files.len(), 5);
    let counts: Vec<(u64, u64, u64)> = files
        .iter()
        .map(|f| {
            (
                f["triples"].as_u64().unwrap(),
                f["qualitative"].as_u64().unwrap(),
                f["quantitative"].as_u64().unwrap(),
            )
        })
        .collect();
    for &(n, l, h) in &counts {
        assert_eq!(l + h, n);
    }
    assert_eq!(counts.iter().map(|c| c.0).collect::<Vec<_>>(), [20, 20, 21, 22, 21]);
    let v1_oov = files[0]["oov"].as_array().unwrap();
    assert!(v1_oov.iter().any(|w| w == "rc2"));
    assert!(report["config"]["embedding_sha256"].as_str().unwrap().len() == 64);

    let table = run(&["validate", &c]);
    assert_eq!(table.status.code(), Some(0));
    assert!(stdout(&table).contains("5 file(s), 0 failed"));
}

#[test]
fn validate_flags_corrupted_lines() {
    let dir = tempfile::tempdir().unwrap();
    fs::copy(fixtures().join("catalog/V1.triples"), dir.path().join("V1.triples")).unwrap();
    fs::write(
        dir.path().join("bad.triples"),
        "<vo:X,rdf:type,vo:Automobile>\nvo:X,vo:carburant,vo:diesel\n",
    )
    .unwrap();
    let out = run(&["validate", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stdout(&out).contains("bad.triples:2:"), "{}", stdout(&out));
    assert!(stdout(&out).contains("2 file(s), 1 failed"));
}

#[test]
fn exit_codes() {
    let c = catalog();
    let e = embeddings();
    let profile = fixtures().join("profiles/copy_V3.triples");
    let p = profile.to_str().unwrap();

    // usage
    assert_eq!(run(&["rank", p, &c, "--embeddings", &e, "--top-k", "0"]).status.code(), Some(1));
    assert_eq!(run(&["matrix", &c, "--bogus"]).status.code(), Some(1));
    assert_eq!(run(&["matrix", &c, "--set-mode", "average"]).status.code(), Some(1));
    assert_eq!(run(&["matrix", &c, "--weights", "1,1"]).status.code(), Some(1));
    assert_eq!(
        run(&["matrix", &c, "--approach", "ablation", "--weights", "0,1,1", "--embeddings", &e])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(run(&[]).status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));

    // model
    assert_eq!(run(&["matrix", &c]).status.code(), Some(3));
    assert_eq!(run(&["matrix", &c, "--approach", "ablation"]).status.code(), Some(3));
    assert_eq!(run(&["compare", &c]).status.code(), Some(3));
    let dir = tempfile::tempdir().unwrap();
    let broken = dir.path().join("broken.vec");
    fs::write(&broken, "2 3\nnoir 1 0 0\nbleu 0 1\n").unwrap();
    let out = run(&["matrix", &c, "--embeddings", broken.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));

    // data
    let single = tempfile::tempdir().unwrap();
    fs::copy(fixtures().join("catalog/V1.triples"), single.path().join("V1.triples")).unwrap();
    assert_eq!(
        run(&["matrix", single.path().to_str().unwrap(), "--approach", "n2"]).status.code(),
        Some(2)
    );
    let empty = tempfile::tempdir().unwrap();
    assert_eq!(
        run(&["matrix", empty.path().to_str().unwrap(), "--approach", "n2"]).status.code(),
        Some(2)
    );
}

#[test]
fn matrix_outputs_and_diagonal() {
    let c = catalog();
    let e = embeddings();
    for approach in ["n1", "n2", "ablation"] {
        let m = json(&run(&["matrix", &c, "--approach", approach, "--embeddings", &e, "--format", "json"]));
        assert_eq!(m["labels"].as_array().unwrap().len(), 5);
        assert_eq!(m["mode"], "normalized");
        let values: Vec<f64> = m["values"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
        for i in 0..5 {
            assert_eq!(values[i * 5 + i], 1.0);
        }
        assert_eq!(m["config"]["approach"], approach);
    }

    let first = run(&["matrix", &c, "--approach", "n1", "--embeddings", &e, "--format", "csv"]);
    let second = run(&["matrix", &c, "--approach", "n1", "--embeddings", &e, "--format", "csv"]);
    assert_eq!(first.stdout, second.stdout);
    let text = stdout(&first);
    assert!(text.starts_with("# approach=n1\n"));
    assert!(text.contains("\nlabel,V1,V2,V3,V4,V5\n"));

    let table = stdout(&run(&["matrix", &c, "--approach", "n2"]));
    assert!(table.contains("1.00"));
}

#[test]
fn output_file() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("m.csv");
    let out = run(&[
        "matrix",
        &catalog(),
        "--approach",
        "n2",
        "--format",
        "csv",
        "--output",
        target.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    assert!(fs::read_to_string(target).unwrap().contains("label,V1"));
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(
        &cfg,
        format!(
            "backend = tfidf\nalpha = 0\nbeta = 1\ngamma = 1\nset_mode = literal\nembedding_path = {}\n",
            embeddings()
        ),
    )
    .unwrap();
    let c = catalog();
    let cfg = cfg.to_str().unwrap();

    let m = json(&run(&["matrix", &c, "--config", cfg, "--format", "json"]));
    assert_eq!(m["config"]["approach"], "n2");
    assert_eq!(m["weights"]["alpha"], 0.0);
    assert_eq!(m["weights"]["beta"], 1.5);
    assert_eq!(m["mode"], "literal");

    let m = json(&run(&[
        "matrix", &c, "--config", cfg, "--approach", "n1", "--weights", "2,2,2", "--set-mode",
        "normalized", "--format", "json",
    ]));
    assert_eq!(m["config"]["approach"], "n1");
    assert_eq!(m["weights"]["alpha"], 1.0);
    assert_eq!(m["mode"], "normalized");
    assert_eq!(m["config"]["embedding_path"], embeddings());

    fs::write(dir.path().join("bad.cfg"), "colour = red\n").unwrap();
    let out = run(&["matrix", &c, "--config", dir.path().join("bad.cfg").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn rank_outputs() {
    let c = catalog();
    let e = embeddings();
    let copy = fixtures().join("profiles/copy_V3.triples");
    let r = json(&run(&["rank", copy.to_str().unwrap(), &c, "--embeddings", &e, "--format", "json"]));
    assert_eq!(r["items"][0]["label"], "V3");
    assert_eq!(r["items"][0]["score"], 1.0);
    assert_eq!(r["config"]["top_k"], "5");

    let diesel = fixtures().join("profiles/diesel_mecanique.triples");
    for approach in ["n1", "n2"] {
        let r = json(&run(&[
            "rank",
            diesel.to_str().unwrap(),
            &c,
            "--approach",
            approach,
            "--embeddings",
            &e,
            "--top-k",
            "2",
            "--format",
            "json",
        ]));
        assert_eq!(r["user_id"], "louis");
        let items = r["items"].as_array().unwrap();
        assert_eq!(items.len(), 2);
        let top = items[0]["label"].as_str().unwrap();
        assert!(top == "V3" || top == "V5", "{approach}: {top}");
    }

    let all = stdout(&run(&["rank", diesel.to_str().unwrap(), &c, "--embeddings", &e, "--top-k", "50", "--format", "csv"]));
    assert_eq!(all.lines().filter(|l| !l.starts_with('#')).count(), 6);
}

#[test]
fn compare_table() {
    let c = catalog();
    let e = embeddings();
    let out = run(&["compare", &c, "--embeddings", &e, "--format", "csv"]);
    let text = stdout(&out);
    let rows: Vec<Vec<f64>> = text
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').skip(2).map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 10);
    assert!(rows.iter().all(|r| r.len() == 3));
    for col in 0..3 {
        for other in col + 1..3 {
            assert!(rows.iter().any(|r| (r[col] - r[other]).abs() > 1e-6));
        }
    }

    let again = stdout(&run(&["compare", &c, "--embeddings", &e, "--format", "csv"]));
    assert_eq!(text, again);

    let table = stdout(&run(&["compare", &c, "--embeddings", &e]));
    assert!(table.contains("V1 - V2"));
    let json = json(&run(&["compare", &c, "--embeddings", &e, "--format", "json"]));
    assert_eq!(json["pairs"].as_array().unwrap().len(), 10);
}

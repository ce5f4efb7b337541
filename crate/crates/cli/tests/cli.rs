use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn vprisk(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vprisk"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

const T8: &str = "a,b,d\n0,0,0\n0,0,0\n0,0,1\n0,1,1\n1,0,0\n1,1,1\n1,1,1\n1,1,0\n";

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn train_t8_with_explicit_and_auto_beta() {
    let dir = tempfile::tempdir().unwrap();
    let data = write(dir.path(), "t8.csv", T8);
    let model = dir.path().join("m.json");
    let out = vprisk(&[
        "train",
        "--input",
        s(&data),
        "--out",
        s(&model),
        "--beta",
        "0.6",
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&model).unwrap()).unwrap();
    assert_eq!(json["reduct"], serde_json::json!(["b"]));
    assert_eq!(json["rules"].as_array().unwrap().len(), 2);

    let out = vprisk(&["train", "--input", s(&data), "--out", s(&model)]);
    assert_eq!(code(&out), 0);
    assert!(stderr(&out).contains("2/3"));
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&model).unwrap()).unwrap();
    assert!((json["beta"].as_f64().unwrap() - 2.0 / 3.0).abs() < 1e-11);
}

#[test]
fn usage_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let data = write(dir.path(), "t8.csv", T8);
    let model = dir.path().join("m.json");
    assert_eq!(
        code(&vprisk(&[
            "train",
            "--input",
            s(&data),
            "--out",
            s(&model),
            "--beta",
            "0.4"
        ])),
        2
    );
    assert!(!model.exists());
    let missing = dir.path().join("missing.toml");
    let out = vprisk(&[
        "simulate",
        "--config",
        s(&missing),
        "--out",
        s(&dir.path().join("e.csv")),
    ]);
    assert_eq!(code(&out), 2);
    let empty = write(dir.path(), "empty.csv", "a,b,d\n");
    assert_eq!(
        code(&vprisk(&[
            "train",
            "--input",
            s(&empty),
            "--out",
            s(&model)
        ])),
        2
    );
    assert_eq!(code(&vprisk(&["bogus"])), 2);
}

#[test]
fn degenerate_inputs_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "bad.toml",
        "[[rules]]\nname = \"gentle\"\ndecel_mean = -0.5\ndecel_spread = 0.5\n",
    );
    let events = dir.path().join("e.csv");
    let out = vprisk(&["simulate", "--config", s(&cfg), "--out", s(&events)]);
    assert_eq!(code(&out), 3);
    assert!(stderr(&out).contains("gentle"));
    assert!(!events.exists());

    let single = write(dir.path(), "one.csv", "a,b,d\n0,1,1\n1,0,1\n");
    let out = vprisk(&[
        "train",
        "--input",
        s(&single),
        "--out",
        s(&dir.path().join("m.json")),
    ]);
    assert_eq!(code(&out), 3);
}

#[test]
fn schema_mismatch_exit_4_and_corrupt_model_exit_5() {
    let dir = tempfile::tempdir().unwrap();
    let data = write(dir.path(), "t8.csv", T8);
    let model = dir.path().join("m.json");
    assert_eq!(
        code(&vprisk(&[
            "train",
            "--input",
            s(&data),
            "--out",
            s(&model),
            "--beta",
            "0.6"
        ])),
        0
    );
    let other = write(dir.path(), "other.csv", "a,c,d\n0,1,0\n");
    let out = vprisk(&[
        "classify",
        "--model",
        s(&model),
        "--input",
        s(&other),
        "--out",
        s(&dir.path().join("p.csv")),
    ]);
    assert_eq!(code(&out), 4);
    assert!(stderr(&out).contains('b'));

    let text = fs::read_to_string(&model).unwrap();
    let broken = write(dir.path(), "broken.json", &text[..text.len() / 2]);
    let out = vprisk(&[
        "classify",
        "--model",
        s(&broken),
        "--input",
        s(&data),
        "--out",
        s(&dir.path().join("p.csv")),
    ]);
    assert_eq!(code(&out), 5);
    let bad_beta = write(
        dir.path(),
        "bad_beta.json",
        &text.replace("\"beta\": 0.6", "\"beta\": 0.3"),
    );
    let out = vprisk(&[
        "classify",
        "--model",
        s(&bad_beta),
        "--input",
        s(&data),
        "--out",
        s(&dir.path().join("p.csv")),
    ]);
    assert_eq!(code(&out), 5);
}

#[test]
fn classify_and_evaluate_simulated_events() {
    let dir = tempfile::tempdir().unwrap();
    let events = dir.path().join("events.csv");
    let model = dir.path().join("model.json");
    let preds = dir.path().join("preds.csv");
    let report = dir.path().join("report");
    assert_eq!(
        code(&vprisk(&["--seed", "3", "simulate", "--out", s(&events)])),
        0
    );
    assert_eq!(
        code(&vprisk(&[
            "train",
            "--input",
            s(&events),
            "--out",
            s(&model)
        ])),
        0
    );
    assert_eq!(
        code(&vprisk(&[
            "classify",
            "--model",
            s(&model),
            "--input",
            s(&events),
            "--out",
            s(&preds)
        ])),
        0
    );
    let text = fs::read_to_string(&preds).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("id,decision,belief,matched,similarity,score")
    );
    assert_eq!(lines.count(), 1000);

    let out = vprisk(&[
        "evaluate",
        "--model",
        s(&model),
        "--input",
        s(&events),
        "--out-dir",
        s(&report),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let csv = fs::read_to_string(report.join("report.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(rows.len(), 2);
    // noise-free training data is reproduced exactly
    assert!(
        rows[0].starts_with("vprs,") && rows[0].contains(",1.000000,0.000000,1.000000,1.000000,")
    );
    assert!(report.join("roc_vprs.csv").exists() && report.join("roc_ttc.csv").exists());
}

#[test]
fn quantize_then_train_on_levels() {
    let dir = tempfile::tempdir().unwrap();
    let events = dir.path().join("events.csv");
    let levels = dir.path().join("levels.csv");
    let model = dir.path().join("model.json");
    assert_eq!(
        code(&vprisk(&["--seed", "8", "simulate", "--out", s(&events)])),
        0
    );
    assert_eq!(
        code(&vprisk(&[
            "quantize",
            "--input",
            s(&events),
            "--out",
            s(&levels)
        ])),
        0
    );
    let header = fs::read_to_string(&levels).unwrap();
    assert!(header.starts_with("c1,c2,c3,c4,c5,c6,c7,c8,c9,risk\n"));
    let out = vprisk(&[
        "train",
        "--input",
        s(&levels),
        "--out",
        s(&model),
        "--method",
        "greedy",
        "--beta",
        "0.9",
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let report = dir.path().join("r");
    let out = vprisk(&[
        "evaluate",
        "--model",
        s(&model),
        "--input",
        s(&levels),
        "--out-dir",
        s(&report),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    // no raw TTC in a level table, so only the model is scored
    assert_eq!(
        fs::read_to_string(report.join("report.csv"))
            .unwrap()
            .lines()
            .count(),
        2
    );
}

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tailscore"))
        .args(args)
        .output()
        .expect("spawn tailscore")
}

fn write(dir: &TempDir, name: &str, body: &str) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, body).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn json(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).unwrap()
}

fn u4(dir: &TempDir) -> PathBuf {
    write(dir, "u4.csv", "y\n1\n2\n3\n4\n")
}

#[test]
fn eval_u4() {
    let d = TempDir::new().unwrap();
    let r = json(&run(&[
        "eval",
        "--input",
        s(&u4(&d)),
        "--level-p",
        "0.5",
        "--level-q",
        "0.75",
        "--tau",
        "0.5",
    ]));
    assert_eq!(r["schema_version"], 1);
    assert_eq!(r["es"], 3.5);
    assert_eq!(r["var_minus"], 2.0);
    assert_eq!(r["var_plus"], 3.0);
    assert_eq!(r["rvar"], 3.0);
    assert_eq!(r["expectile"], 2.5);
    assert_eq!(r["tail_risk"], 3.5);
}

#[test]
fn eval_empty_file_is_an_input_error() {
    let d = TempDir::new().unwrap();
    for body in ["", "y\n"] {
        let out = run(&[
            "eval",
            "--input",
            s(&write(&d, "e.csv", body)),
            "--level-p",
            "0.5",
        ]);
        assert_eq!(out.status.code(), Some(2));
    }
}

#[test]
fn eval_single_row() {
    let d = TempDir::new().unwrap();
    let f = write(&d, "one.csv", "y\n1.5e0\n");
    let r = json(&run(&[
        "eval",
        "--input",
        s(&f),
        "--level-p",
        "0.3",
        "--level-q",
        "0.6",
        "--tau",
        "0.8",
    ]));
    for k in [
        "mean",
        "var_minus",
        "var_plus",
        "es",
        "rvar",
        "expectile",
        "tail_risk",
    ] {
        assert_eq!(r[k], 1.5, "{k}");
    }
}

#[test]
fn eval_rejects_bad_levels_and_missing_column() {
    let d = TempDir::new().unwrap();
    let f = u4(&d);
    assert_eq!(
        run(&["eval", "--input", s(&f), "--level-p", "1.5"])
            .status
            .code(),
        Some(2)
    );
    let g = write(&d, "z.csv", "z\n1\n");
    let out = run(&["eval", "--input", s(&g)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("`y`"));
}

#[test]
fn pinball_scores_match_hand_values() {
    let d = TempDir::new().unwrap();
    let f = write(&d, "f.csv", "y,x\n2,1\n1,3\n4,4\n");
    let o = d.path().join("scored.csv");
    let r = json(&run(&[
        "score",
        "--input",
        s(&f),
        "--output",
        s(&o),
        "--family",
        "pinball",
        "--level-p",
        "0.25",
    ]));
    // (1{y <= x} - p)(x - y)
    let expect = [0.25, 1.5, 0.0];
    let mut rdr = csv::Reader::from_path(&o).unwrap();
    assert_eq!(rdr.headers().unwrap(), vec!["y", "x", "score"]);
    let got: Vec<f64> = rdr
        .records()
        .map(|r| r.unwrap()[2].parse().unwrap())
        .collect();
    for (g, e) in got.iter().zip(expect) {
        assert!((g - e).abs() <= 1e-15, "{got:?}");
    }
    assert!((r["mean_score"].as_f64().unwrap() - 1.75 / 3.0).abs() <= 1e-15);
}

#[test]
fn malformed_row_reports_its_line() {
    let d = TempDir::new().unwrap();
    let f = write(&d, "f.csv", "y,x\n2,1\n1,abc\n");
    let out = run(&[
        "score",
        "--input",
        s(&f),
        "--family",
        "pinball",
        "--level-p",
        "0.5",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(
        String::from_utf8_lossy(&out.stderr).contains("line 3"),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn arity_mismatch_is_an_input_error() {
    let d = TempDir::new().unwrap();
    let f = write(&d, "f.csv", "y,x\n2,1\n");
    let out = run(&[
        "score",
        "--input",
        s(&f),
        "--family",
        "fz",
        "--level-p",
        "0.5",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn score_round_trip_is_bit_exact() {
    let d = TempDir::new().unwrap();
    let mut body = String::from("y,v,x\n");
    for i in 0..200 {
        let y = ((i * 37) % 101) as f64 / 7.0;
        body += &format!(
            "{y},{},{}\n",
            0.1 * (i % 13) as f64,
            1.0 / (1 + i % 5) as f64 + 3.0
        );
    }
    let f = write(&d, "f.csv", &body);
    let o = d.path().join("scored.csv");
    let r = json(&run(&[
        "score",
        "--input",
        s(&f),
        "--output",
        s(&o),
        "--family",
        "fz",
        "--level-p",
        "0.9",
    ]));
    let mut rdr = csv::Reader::from_path(&o).unwrap();
    let scores: Vec<f64> = rdr
        .records()
        .map(|r| r.unwrap()[3].parse().unwrap())
        .collect();
    let mean = scores.iter().sum::<f64>() / scores.len() as f64;
    assert_eq!(mean.to_bits(), r["mean_score"].as_f64().unwrap().to_bits());

    // Without --output the CSV goes to stdout.
    let out = run(&[
        "score",
        "--input",
        s(&f),
        "--family",
        "fz",
        "--level-p",
        "0.9",
    ]);
    assert!(out.status.success());
    assert_eq!(out.stdout, fs::read(&o).unwrap());
}

#[test]
fn fz_optimal_forecast_attains_the_grid_minimum() {
    let d = TempDir::new().unwrap();
    let fit = json(&run(&[
        "fit",
        "--input",
        s(&u4(&d)),
        "--family",
        "fz",
        "--level-p",
        "0.5",
        "--grid",
        "0:5:0.5",
    ]));
    let f = write(&d, "f.csv", "y,v,x\n1,2,3.5\n2,2,3.5\n3,2,3.5\n4,2,3.5\n");
    let o = d.path().join("o.csv");
    let r = json(&run(&[
        "score",
        "--input",
        s(&f),
        "--output",
        s(&o),
        "--family",
        "fz",
        "--level-p",
        "0.5",
    ]));
    let a = r["mean_score"].as_f64().unwrap();
    let m = fit["objective"].as_f64().unwrap();
    assert!((a - m).abs() <= 1e-12, "{a} vs {m}");
}

#[test]
fn fit_z_on_u4() {
    let d = TempDir::new().unwrap();
    let r = json(&run(&[
        "fit",
        "--input",
        s(&u4(&d)),
        "--family",
        "fz",
        "--level-p",
        "0.5",
        "--method",
        "z",
    ]));
    assert_eq!(r["point"], serde_json::json!([2.0, 3.5]));
}

#[test]
fn fit_m_quantile_set() {
    let d = TempDir::new().unwrap();
    let r = json(&run(&[
        "fit",
        "--input",
        s(&u4(&d)),
        "--family",
        "pinball",
        "--level-p",
        "0.5",
        "--grid",
        "0:5:0.5",
    ]));
    assert_eq!(r["set"], serde_json::json!([[2.0], [2.5], [3.0]]));
    let out = run(&[
        "fit",
        "--input",
        s(&u4(&d)),
        "--family",
        "pinball",
        "--level-p",
        "0.5",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn backtest_calibration_and_comparison() {
    let d = TempDir::new().unwrap();
    let mut good = String::from("y,v,x\n");
    let mut bad = good.clone();
    for i in 0..40 {
        let y = 1 + i % 4;
        good += &format!("{y},2,3.5\n");
        bad += &format!("{y},1,2\n");
    }
    let (g, b) = (write(&d, "g.csv", &good), write(&d, "b.csv", &bad));
    let r = json(&run(&[
        "backtest",
        "--input",
        s(&g),
        "--family",
        "fz",
        "--level-p",
        "0.5",
        "--lag",
        "0",
    ]));
    let m: Vec<f64> = serde_json::from_value(r["mean_id"].clone()).unwrap();
    assert!(m.iter().all(|x| x.abs() <= 1e-12), "{m:?}");
    assert_eq!(r["n"], 40);

    let r = json(&run(&[
        "backtest",
        "--input",
        s(&g),
        "--input",
        s(&b),
        "--family",
        "fz",
        "--level-p",
        "0.5",
    ]));
    assert!(r["mean_id"][0].as_f64().unwrap() < 0.0);
}

#[test]
fn verify_fz_passes() {
    let d = TempDir::new().unwrap();
    let o = d.path().join("r.json");
    let out = run(&["verify", "--suite", "fz", "--seed", "7", "--output", s(&o)]);
    assert_eq!(out.status.code(), Some(0));
    let r: Value = serde_json::from_slice(&fs::read(&o).unwrap()).unwrap();
    assert_eq!(r["pass"], true);
    assert_eq!(r["schema_version"], 1);
}

#[test]
fn verify_broken_score_fails() {
    let out = run(&["verify", "--suite", "broken-no-correction"]);
    assert_eq!(out.status.code(), Some(3));
    let r: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(r["pass"], false);
}

#[test]
fn verify_unknown_suite() {
    assert_eq!(run(&["verify", "--suite", "nope"]).status.code(), Some(2));
}

#[test]
fn config_file_matches_flags() {
    let d = TempDir::new().unwrap();
    let f = write(&d, "f.csv", "y,v,x\n1,2,3\n5,4,4.5\n");
    let c = write(&d, "c.json", r#"{"construction": "fz", "p": 0.5}"#);
    let a = json(&run(&[
        "score",
        "--input",
        s(&f),
        "--output",
        s(&d.path().join("a.csv")),
        "--config",
        s(&c),
    ]));
    let b = json(&run(&[
        "score",
        "--input",
        s(&f),
        "--output",
        s(&d.path().join("b.csv")),
        "--family",
        "fz",
        "--level-p",
        "0.5",
    ]));
    assert_eq!(a["mean_score"], b["mean_score"]);
}

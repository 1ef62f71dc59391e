use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn hnbss(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hnbss"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(String::from).collect())
        .collect();
    (header, rows)
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn small_config(dir: &Path) -> String {
    let path = dir.join("run.toml");
    fs::write(
        &path,
        "[simulate]\nn_series = 3\nn_periods = 20\n[evaluate]\ninitial_train = 17\nmax_horizon = 2\n",
    )
    .unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn fit_reads_a_two_series_file_with_a_missing_cell() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in.csv");
    fs::write(
        &input,
        "series_id,period,value\na,1,3\na,2,0\na,3,1\na,4,2\nb,1,5\nb,2,4\nb,4,1\n",
    )
    .unwrap();
    let out = dir.path().join("out");
    let o = hnbss(&[
        "fit",
        "--input",
        input.to_str().unwrap(),
        "--output-dir",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let (header, rows) = read_csv(&out.join("posterior.csv"));
    assert_eq!(
        header,
        [
            "scope",
            "series_id",
            "parameter",
            "estimate",
            "lower",
            "upper"
        ]
    );
    for id in ["a", "b"] {
        assert!(rows.iter().any(|r| r[1] == id && r[2] == "mu"));
    }
    for r in &rows {
        let (est, lo, hi): (f64, f64, f64) = (
            r[3].parse().unwrap(),
            r[4].parse().unwrap(),
            r[5].parse().unwrap(),
        );
        assert!(lo <= est + 1e-9 && est <= hi + 1e-9, "{r:?}");
    }
    assert!(out.join("diagnostics.csv").exists());
    assert!(out.join("config.toml").exists());
}

#[test]
fn negative_value_reports_row_and_column() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in.csv");
    fs::write(
        &input,
        "series_id,period,value\na,1,1\na,2,1\na,3,1\na,4,1\na,5,1\na,6,-1\n",
    )
    .unwrap();
    let o = hnbss(&[
        "stats",
        "--input",
        input.to_str().unwrap(),
        "--output-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert!(!o.status.success());
    let err = stderr(&o);
    let line = err.lines().last().unwrap();
    assert!(
        line.starts_with("error: kind=input message=row 7, column value"),
        "{err}"
    );
}

#[test]
fn errors_use_a_single_line_format() {
    let o = hnbss(&["fit", "--group-mode", "bogus"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(
        stderr(&o).starts_with("error: kind=usage message="),
        "{}",
        stderr(&o)
    );
    let dir = tempfile::tempdir().unwrap();
    let o = hnbss(&["fit", "--output-dir", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o)
        .trim_end()
        .ends_with("pass --input or set `input` in the config"));
    assert!(stderr(&o).contains("error: kind=config message="));
}

#[test]
fn simulate_fit_forecast_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let run = |name: &str| {
        let out = dir.path().join(name);
        let o = hnbss(&[
            "simulate",
            "--config",
            &cfg,
            "--seed",
            "7",
            "--output-dir",
            out.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
        let data = out.join("dataset.csv");
        let o = hnbss(&[
            "forecast",
            "--config",
            &cfg,
            "--input",
            data.to_str().unwrap(),
            "--horizon",
            "3",
            "--output-dir",
            out.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
        (
            fs::read(&data).unwrap(),
            fs::read(out.join("forecast.csv")).unwrap(),
        )
    };
    let first = run("one");
    assert_eq!(first, run("two"));

    let (header, rows) = read_csv(&dir.path().join("one/forecast.csv"));
    assert_eq!(
        &header[..5],
        ["series_id", "period", "step", "mean", "variance"]
    );
    assert_eq!(header.len(), 5 + 5 + 5);
    assert_eq!(rows.len(), 9);
    // the horizon extends the simulated axis 1..=20
    assert_eq!(rows[0][1], "21");
    assert_eq!(rows[2][2], "3");
    let (_, truth) = read_csv(&dir.path().join("one/truth.csv"));
    assert!(truth
        .iter()
        .any(|r| r[0] == "series" && r[1] == "s2" && r[2] == "phi"));
}

#[test]
fn evaluate_writes_one_row_per_model_horizon_and_metric() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let out = dir.path().to_str().unwrap();
    assert!(hnbss(&["simulate", "--config", &cfg, "--output-dir", out])
        .status
        .success());
    let data = dir.path().join("dataset.csv");
    let o = hnbss(&[
        "evaluate",
        "--config",
        &cfg,
        "--input",
        data.to_str().unwrap(),
        "--baselines",
        "croston,ses",
        "--workers",
        "2",
        "--output-dir",
        out,
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let (header, rows) = read_csv(&dir.path().join("metrics.csv"));
    assert_eq!(
        header,
        ["model", "horizon", "metric", "value", "cells", "excluded"]
    );
    let models = [
        "hnbss-hierarchical",
        "croston-gaussian",
        "croston-poisson",
        "ses-gaussian",
        "ses-poisson",
    ];
    assert_eq!(rows.len(), models.len() * 2 * 3);
    let mut keys: Vec<(String, String, String)> = rows
        .iter()
        .map(|r| (r[0].clone(), r[1].clone(), r[2].clone()))
        .collect();
    keys.sort();
    keys.dedup();
    assert_eq!(keys.len(), rows.len());
    for m in models {
        // windows at 17, 18 and 19 training periods: 3 cells per series at h = 1
        let r = rows
            .iter()
            .find(|r| r[0] == m && r[1] == "1" && r[2] == "nll")
            .unwrap();
        assert_eq!(r[4], "9");
    }
    let (_, evals) = read_csv(&dir.path().join("evaluation.csv"));
    assert_eq!(evals.len(), models.len());
    assert!(evals.iter().all(|r| r[1] == "3"));
}

#[test]
fn stats_classifies_every_series() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in.csv");
    let mut text = String::from("series_id,period,value\n");
    for t in 1..=8 {
        text += &format!(
            "smooth,{t},5\nlumpy,{t},{}\nnone,{t},0\n",
            if t % 4 == 0 { 9 * t } else { 0 }
        );
    }
    fs::write(&input, text).unwrap();
    let o = hnbss(&[
        "stats",
        "--input",
        input.to_str().unwrap(),
        "--output-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let (_, rows) = read_csv(&dir.path().join("stats.csv"));
    let cat: Vec<&str> = rows.iter().map(|r| r[5].as_str()).collect();
    assert_eq!(cat, ["smooth", "lumpy", ""]);
    let (_, summary) = read_csv(&dir.path().join("stats_summary.csv"));
    let get = |k: &str| summary.iter().find(|r| r[0] == k).unwrap()[1].clone();
    assert_eq!(get("percent_smooth"), "50");
    assert_eq!(get("uncategorized"), "1");
}

#[test]
fn masks_and_group_subsets_come_from_the_config() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in.csv");
    let mut text = String::from("series_id,period,value\n");
    for t in 1..=10 {
        text += &format!("a,{t},{}\nb,{t},{}\nc,{t},1\n", t % 3, (t + 1) % 4);
    }
    fs::write(&input, text).unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(
        &cfg,
        "[group]\nseries = [\"b\", \"a\"]\nmasks = [{ series = \"a\", keep = 2 }]\n",
    )
    .unwrap();
    let o = hnbss(&[
        "stats",
        "--config",
        cfg.to_str().unwrap(),
        "--input",
        input.to_str().unwrap(),
        "--output-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let (_, rows) = read_csv(&dir.path().join("stats.csv"));
    assert_eq!(rows.len(), 2);
    assert_eq!((rows[0][0].as_str(), rows[0][1].as_str()), ("b", "10"));
    assert_eq!((rows[1][0].as_str(), rows[1][1].as_str()), ("a", "2"));
}

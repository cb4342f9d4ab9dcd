use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn pwca(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pwca")).args(args).output().expect("binary runs")
}

fn pwca_in(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pwca"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn error_line(o: &Output) -> String {
    stderr(o).lines().find(|l| l.starts_with("ERROR:")).unwrap_or_default().to_string()
}

/// Writes a small two-view dataset with train/ and test/ splits under
/// `dir` and returns its directory.
fn synth(dir: &Path, extra: &[&str]) -> PathBuf {
    let out = dir.join("data");
    let mut args = vec![
        "synth", "--l", "120", "--latent", "5", "--dims", "8,9", "--sigma", "0.2", "--seed", "3", "--n-train",
        "80", "--out",
    ];
    let out_s = out.to_str().unwrap().to_string();
    args.push(&out_s);
    args.extend_from_slice(extra);
    let o = pwca(&args);
    assert!(o.status.success(), "{}", stderr(&o));
    out
}

#[test]
fn every_subcommand_documents_its_flags() {
    let expected: &[(&str, &[&str])] = &[
        ("train", &["--views", "--method", "--tau", "--k", "--kernel", "--bandwidth", "--center", "--out", "0.01"]),
        ("eval", &["--model", "--test", "--query-view", "--target-view", "--report", "--ranks", "--seed"]),
        ("compare", &["--train", "--test", "--tau", "--k", "--kernel", "--out", "--directions", "0.01"]),
        (
            "synth",
            &["--l", "--views", "--latent", "--dims", "--sigma", "--seed", "--map-seeds", "--n-train", "--out", "700", "50,60"],
        ),
        ("bound", &["--n", "--delta", "--kl", "--emp-risk", "0.05"]),
        ("grid-demo", &["--cells", "--samples", "--epsilon", "--lo", "--hi", "--delta", "--out"]),
    ];
    for (cmd, flags) in expected {
        let o = pwca(&[cmd, "--help"]);
        assert_eq!(o.status.code(), Some(0), "{cmd}");
        let help = stdout(&o);
        for f in *flags {
            assert!(help.contains(f), "`{cmd} --help` does not mention {f}:\n{help}");
        }
    }
    assert_eq!(pwca(&["--help"]).status.code(), Some(0));
}

#[test]
fn usage_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let data = synth(dir.path(), &[]);
    let v0 = data.join("train/view0.mtx");
    let v1 = data.join("train/view1.mtx");
    let model = dir.path().join("m.json");
    let (v0, v1, model) = (v0.to_str().unwrap(), v1.to_str().unwrap(), model.to_str().unwrap());

    let o = pwca(&["train", "--views", v0, v1, "--tau", "0", "--out", model]);
    assert_eq!(o.status.code(), Some(1));
    assert!(error_line(&o).starts_with("ERROR:usage:"), "{}", stderr(&o));

    let o = pwca(&["train", "--views", v0, v1, "--out", model, "--frobnicate"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(error_line(&o).starts_with("ERROR:usage:"));

    let o = pwca(&["train", "--views", v0, v1, "--kernel", "rbf", "--out", model]);
    assert_eq!(o.status.code(), Some(1));

    let o = pwca(&["train", "--views", v0, v1, "--out", "/nonexistent/dir/m.json"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(!Path::new(model).exists());

    let o = pwca(&["synth", "--views", "3", "--dims", "5,6", "--out", dir.path().join("x").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(pwca(&[]).status.code(), Some(1));
}

#[test]
fn data_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let o = pwca(&["bound", "--n", "7", "--delta", "0.05", "--kl", "0"]);
    assert_eq!(o.status.code(), Some(2));
    let line = error_line(&o);
    assert!(line.starts_with("ERROR:sample_size_too_small:"), "{line}");
    assert!(line.contains("n >= 8"));

    let missing = dir.path().join("missing.mtx");
    let o = pwca(&[
        "train",
        "--views",
        missing.to_str().unwrap(),
        missing.to_str().unwrap(),
        "--out",
        dir.path().join("m.json").to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(error_line(&o).starts_with("ERROR:io:"));

    let bad = dir.path().join("bad.mtx");
    std::fs::write(&bad, "%%PWCA-VIEW 2 2 1\n0 0 oops\n").unwrap();
    let o = pwca_in(dir.path(), &["train", "--views", "bad.mtx", "bad.mtx", "--out", "m.json"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(error_line(&o).starts_with("ERROR:parse:"), "{}", stderr(&o));

    let samples = dir.path().join("s.csv");
    // Every cell of a 2x2 grid is contradicted by one of these samples.
    std::fs::write(&samples, "z,y\n0.2,0.2\n0.2,0.8\n0.8,0.2\n").unwrap();
    let o = pwca(&["grid-demo", "--cells", "2", "--samples", samples.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(error_line(&o).starts_with("ERROR:infeasible:"));
}

#[test]
fn synth_train_eval_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let data = synth(dir.path(), &[]);
    for f in ["manifest.json", "view0.mtx", "train/view1.mtx", "test/view0.mtx"] {
        assert!(data.join(f).is_file(), "{f}");
    }
    let o = pwca_in(
        &data,
        &["train", "--views", "train/view0.mtx", "train/view1.mtx", "--k", "10", "--out", "model.json"],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("pwca: s=2 l=80 k=10"));

    let o = pwca_in(
        &data,
        &[
            "eval", "--model", "model.json", "--test", "test/view0.mtx", "test/view1.mtx", "--query-view", "1",
            "--target-view", "0", "--report", "report.json", "--seed", "3",
        ],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(data.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["n_queries"], 40);
    assert_eq!(report["query_view"], 1);
    assert_eq!(report["seed"], 3);
    assert_eq!(report["k"], 10);
    let ranks = std::fs::read_to_string(data.join("report.csv")).unwrap();
    let parsed: Vec<usize> = ranks.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert_eq!(parsed.len(), 40);
    let ap = parsed.iter().map(|&r| 1.0 / r as f64).sum::<f64>() / 40.0;
    let reported = report["ap"].as_f64().unwrap();
    assert!((ap - reported).abs() <= 1e-15);
    assert!(reported > 2.0 * (1..=40).map(|i| 1.0 / i as f64).sum::<f64>() / 40.0);

    let o = pwca_in(
        &data,
        &["eval", "--model", "model.json", "--test", "test/view0.mtx", "--report", "r.json"],
    );
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn compare_emits_one_row_per_method() {
    let dir = tempfile::tempdir().unwrap();
    let data = synth(dir.path(), &[]);
    let o = pwca_in(
        &data,
        &[
            "compare", "--train", "train/view0.mtx", "train/view1.mtx", "--test", "test/view0.mtx",
            "test/view1.mtx", "--k", "10", "--out", "table.csv", "--directions", "dirs.csv",
        ],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let table = std::fs::read_to_string(data.join("table.csv")).unwrap();
    assert_eq!(stdout(&o), table);
    let lines: Vec<&str> = table.lines().collect();
    assert_eq!(lines[0], "method,0-1,mean");
    assert!(lines[1].starts_with("pwca,") && lines[2].starts_with("kcca,"));
    for row in &lines[1..] {
        let vals: Vec<f64> = row.split(',').skip(1).map(|v| v.parse().unwrap()).collect();
        assert_eq!(vals[0], vals[1]);
    }
    let dirs = std::fs::read_to_string(data.join("dirs.csv")).unwrap();
    assert_eq!(dirs.lines().next(), Some("method,query_view,target_view,ap"));
    assert_eq!(dirs.lines().count(), 5);
}

#[test]
fn seeded_runs_are_byte_identical() {
    let run = |dir: &Path| -> Vec<Vec<u8>> {
        let data = synth(dir, &["--split-seed", "5"]);
        let ok = |o: Output| assert!(o.status.success(), "{}", stderr(&o));
        ok(pwca_in(&data, &["train", "--views", "train/view0.mtx", "train/view1.mtx", "--out", "model.json"]));
        ok(pwca_in(
            &data,
            &["eval", "--model", "model.json", "--test", "test/view0.mtx", "test/view1.mtx", "--report", "r.json", "--seed", "5"],
        ));
        ok(pwca_in(
            &data,
            &[
                "compare", "--train", "train/view0.mtx", "train/view1.mtx", "--test", "test/view0.mtx",
                "test/view1.mtx", "--out", "t.csv", "--seed", "5",
            ],
        ));
        ["view0.mtx", "train/view1.mtx", "test/view0.mtx", "model.json", "r.json", "r.csv", "t.csv"]
            .iter()
            .map(|f| std::fs::read(data.join(f)).unwrap())
            .collect()
    };
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    assert_eq!(run(a.path()), run(b.path()));
}

#[test]
fn bound_and_grid_demo_report_json() {
    let o = pwca(&["bound", "--n", "100", "--delta", "0.05", "--kl", "1.6094379124341003"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!((v["rhs"].as_f64().unwrap() - 0.07600902459542082).abs() <= 1e-12);
    assert!(v["kl_qp"].is_number() && v["risk_upper_bound"].is_number());

    let dir = tempfile::tempdir().unwrap();
    let samples = dir.path().join("diag.csv");
    std::fs::write(&samples, "z,y\n0.1,0.1\n0.3,0.3\n0.5,0.5\n0.7,0.7\n0.9,0.9\n").unwrap();
    let out = dir.path().join("weights.csv");
    let o = pwca(&["grid-demo", "--samples", samples.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["support"], serde_json::json!([0, 6, 12, 18, 24]));
    assert!((v["kl_qp"].as_f64().unwrap() - 5f64.ln()).abs() <= 1e-12);
    assert!(v["rhs"].is_null());
    let csv = std::fs::read_to_string(&out).unwrap();
    assert_eq!(csv.lines().count(), 26);
    assert!(csv.lines().nth(1).unwrap().starts_with("0,0,0,0,0.2"));
}

#[test]
fn thread_cap_is_validated() {
    let o = Command::new(env!("CARGO_BIN_EXE_pwca"))
        .env("PWCA_THREADS", "lots")
        .args(["bound", "--n", "100", "--kl", "0"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
    let o = Command::new(env!("CARGO_BIN_EXE_pwca"))
        .env("PWCA_THREADS", "1")
        .args(["bound", "--n", "100", "--kl", "0"])
        .output()
        .unwrap();
    assert!(o.status.success());
}

use std::path::Path;

use multisense_cli::manifest::{read_all, MANIFEST_FILE};
use multisense_cli::output::read_csv;

fn run(args: &[&str]) -> i32 {
    let mut argv = vec!["multisense".to_string()];
    argv.extend(args.iter().map(|s| s.to_string()));
    multisense_cli::run(argv)
}

fn column(path: &Path, name: &str) -> Vec<String> {
    let (header, rows) = read_csv(path).unwrap();
    let k = header.iter().position(|h| h == name).unwrap();
    rows.into_iter().map(|r| r[k].clone()).collect()
}

fn floats(path: &Path, name: &str) -> Vec<f64> {
    column(path, name)
        .iter()
        .map(|v| v.parse().unwrap())
        .collect()
}

#[test]
fn constants_sweep_trends() {
    let dir = tempfile::tempdir().unwrap();
    let fourier = dir.path().join("fourier");
    let canonical = dir.path().join("canonical");
    let f = fourier.to_str().unwrap();
    let c = canonical.to_str().unwrap();
    assert_eq!(
        run(&[
            "constants-sweep",
            "--basis",
            "fourier",
            "--n",
            "64",
            "--out",
            f
        ]),
        0
    );
    assert_eq!(
        run(&[
            "constants-sweep",
            "--basis",
            "canonical",
            "--n",
            "64",
            "--out",
            c,
            "--plot"
        ]),
        0
    );

    let csv = fourier.join("constants_sweep.csv");
    for v in floats(&csv, "gamma_distinct_sq")
        .into_iter()
        .chain(floats(&csv, "gamma_identical_sq"))
    {
        assert!((v - 1.0).abs() < 1e-9);
    }
    let csv = canonical.join("constants_sweep.csv");
    let sensors = floats(&csv, "C");
    assert_eq!(sensors, vec![1.0, 2.0, 4.0, 8.0, 16.0]);
    for (v, c) in floats(&csv, "gamma_identical_sq").iter().zip(&sensors) {
        assert!((v - c).abs() < 1e-9);
    }
    assert!(canonical.join("constants_sweep.svg").exists());
    assert!(!fourier.join("constants_sweep.svg").exists());
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    assert_eq!(run(&["--help"]), 0);
    assert_eq!(run(&["--version"]), 0);
    assert_eq!(run(&[]), 1);
    assert_eq!(run(&["no-such-command"]), 1);
    assert_eq!(run(&["constants-sweep", "--n", "abc", "--out", out]), 1);
    // random family without a seed
    assert_eq!(
        run(&["constants-sweep", "--family", "global", "--out", out]),
        1
    );
    // partitioned needs C | n
    assert_eq!(
        run(&["constants-sweep", "--C", "3", "--n", "64", "--out", out]),
        1
    );
    assert_eq!(run(&["phase-transition", "--out", out]), 1);
    assert_eq!(run(&["constants-sweep", "--threads", "0", "--out", out]), 1);

    let bad = dir.path().join("bad.bin");
    std::fs::write(&bad, b"not an ensemble").unwrap();
    let y = dir.path().join("y.csv");
    std::fs::write(&y, "index,re,im\n0,1,0\n").unwrap();
    let code = run(&[
        "recover",
        "--ensemble",
        bad.to_str().unwrap(),
        "--y",
        y.to_str().unwrap(),
        "--out",
        out,
    ]);
    assert_eq!(code, 2);
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(
        &cfg,
        "# sweep\nbasis = canonical\nn = 32\nC = 1,2\nplot = true\n",
    )
    .unwrap();
    let out = dir.path().join("out");
    let o = out.to_str().unwrap();
    assert_eq!(
        run(&[
            "constants-sweep",
            "--config",
            cfg.to_str().unwrap(),
            "--n",
            "16",
            "--out",
            o
        ]),
        0
    );
    let csv = out.join("constants_sweep.csv");
    assert_eq!(column(&csv, "basis"), vec!["canonical", "canonical"]);
    assert!(out.join("constants_sweep.svg").exists());

    let runs = read_all(&out.join(MANIFEST_FILE)).unwrap();
    assert_eq!(runs.len(), 1);
    assert_eq!(runs[0].params["n"], 16);
    assert!(runs[0].argv.iter().any(|a| a == "--basis"));
    assert!(runs[0].outputs.contains_key("constants_sweep.csv"));
}

#[test]
fn ensemble_recover_aric_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let o = dir.path().to_str().unwrap();
    let path = |name: &str| dir.path().join(name).to_str().unwrap().to_string();
    assert_eq!(
        run(&[
            "ensemble", "--n", "32", "--m", "24", "--C", "4", "--family", "banded", "--basis",
            "cosine", "--s", "2", "--seed", "1", "--out", o
        ]),
        0
    );
    let (ens, y, x) = (path("ensemble.bin"), path("y.csv"), path("x.csv"));
    assert_eq!(
        run(&[
            "recover",
            "--ensemble",
            &ens,
            "--y",
            &y,
            "--x-true",
            &x,
            "--out",
            o
        ]),
        0
    );
    let diag = dir.path().join("recover_diagnostics.csv");
    assert_eq!(column(&diag, "success"), vec!["true"]);
    assert!(floats(&diag, "relative_error")[0] < 1e-3);

    assert_eq!(
        run(&["aric-check", "--ensemble", &ens, "--s", "1,2", "--out", o]),
        0
    );
    let aric = dir.path().join("aric.csv");
    assert_eq!(column(&aric, "method"), vec!["exhaustive", "exhaustive"]);
    let alpha = floats(&aric, "alpha_s");
    let beta = floats(&aric, "beta_s");
    assert!(alpha[1] <= alpha[0] && beta[1] >= beta[0]);

    // sampled estimates need a seed
    assert_eq!(
        run(&[
            "aric-check",
            "--ensemble",
            &ens,
            "--s",
            "2",
            "--method",
            "sampled",
            "--out",
            o
        ]),
        1
    );
    assert_eq!(read_all(&dir.path().join(MANIFEST_FILE)).unwrap().len(), 3);
}

#[test]
fn phase_transition_is_thread_count_independent_and_replayable() {
    let dir = tempfile::tempdir().unwrap();
    let one = dir.path().join("one");
    let two = dir.path().join("two");
    let base = [
        "phase-transition",
        "--n",
        "16",
        "--grid",
        "4",
        "--trials",
        "3",
        "--C",
        "1,2",
        "--seed",
        "11",
    ];
    for (out, threads) in [(&one, "1"), (&two, "2")] {
        let mut args = base.to_vec();
        args.extend([
            "--threads",
            threads,
            "--plot",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(run(&args), 0);
    }
    for name in [
        "phase_grid_C1.csv",
        "phase_grid_C2.csv",
        "transition_curve.csv",
    ] {
        assert_eq!(
            std::fs::read(one.join(name)).unwrap(),
            std::fs::read(two.join(name)).unwrap()
        );
    }
    assert!(one.join("phase_grid_C2.svg").exists());
    let grid = one.join("phase_grid_C1.csv");
    assert_eq!(column(&grid, "trials").len(), 16);
    for f in floats(&grid, "success_fraction") {
        assert!((0.0..=1.0).contains(&f));
    }

    let o = one.to_str().unwrap();
    assert_eq!(run(&["report", "--out", o]), 0);
    let report = std::fs::read_to_string(one.join("report.md")).unwrap();
    assert!(report.contains("transition_curve.csv"));
    assert_eq!(run(&["replay", "--out", o]), 0);
    assert!(column(&one.join("replay.csv"), "match")
        .iter()
        .all(|m| m == "true"));

    // a tampered output is reported as a mismatch
    let runs = read_all(&one.join(MANIFEST_FILE)).unwrap();
    let mut bad = runs[0].clone();
    bad.outputs
        .insert("transition_curve.csv".into(), "0".repeat(64));
    let manifest = dir.path().join("tampered.jsonl");
    std::fs::write(&manifest, serde_json::to_string(&bad).unwrap() + "\n").unwrap();
    assert_eq!(
        run(&[
            "replay",
            "--manifest",
            manifest.to_str().unwrap(),
            "--out",
            o
        ]),
        2
    );
}

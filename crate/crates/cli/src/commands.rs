use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use multisense_core::aric::{binomial, EXHAUSTIVE_LIMIT};
use multisense_core::constants::{gamma_distinct, gamma_identical, xi_distinct, xi_identical};
use multisense_core::experiments::non_decreasing_columns;
use multisense_core::rng::derive_seed;
use multisense_core::{
    aric_exhaustive, aric_sampled, assemble_block_diagonal, assemble_distinct,
    assemble_distinct_varied, assemble_identical, random_sparse_signal, recovery_sufficient,
    relative_error, run_experiment, solve_bpdn, subgaussian_matrix, success, DMatrix, DVector,
    EntryDist, ExperimentConfig, MeasurementEnsemble, ProfileSet, SamplingMode, SolverConfig,
    UnitaryBasis, C64,
};

use crate::args::*;
use crate::manifest::{self, RunManifest, MANIFEST_FILE};
use crate::output::{fmt_f64, fmt_opt, read_csv, read_vector, OutDir};
use crate::plot::{heatmap, line_chart, Series};
use crate::CliError;

const SALT_PROFILE: u64 = 1;
const SALT_SIGNAL: u64 = 2;
const SALT_NOISE: u64 = 3;

pub const CONSTANTS_CSV: &str = "constants_sweep.csv";
pub const CURVE_CSV: &str = "transition_curve.csv";
pub const ARIC_CSV: &str = "aric.csv";
pub const RECOVER_CSV: &str = "recover_diagnostics.csv";
pub const REPLAY_CSV: &str = "replay.csv";

pub fn grid_csv(sensors: usize) -> String {
    format!("phase_grid_C{sensors}.csv")
}

/// Runs one parsed command and appends its manifest. `argv` excludes the
/// program name.
pub fn execute(cmd: &Command, argv: &[String]) -> Result<(), CliError> {
    let common = cmd.common();
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = common.threads {
        if t == 0 {
            return Err(CliError::Usage("--threads must be >= 1".into()));
        }
        builder = builder.num_threads(t);
    }
    let pool = builder
        .build()
        .map_err(|e| CliError::Runtime(e.to_string()))?;

    let started = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs_f64())
        .unwrap_or(0.0);
    let clock = Instant::now();
    let mut out = OutDir::create(&common.out)?;
    let mut argv = argv.to_vec();
    pool.install(|| match cmd {
        Command::ConstantsSweep(a) => constants_sweep(a, &mut out),
        Command::PhaseTransition(a) => phase_transition(a, &mut out),
        Command::AricCheck(a) => aric_check(a, &mut out),
        Command::Ensemble(a) => ensemble(a, &mut out),
        Command::Recover(a) => recover(a, &mut out),
        Command::Report(a) => {
            if a.input.is_none() {
                // pin the input so a replay into another directory reads the same files
                argv.push("--input".into());
                argv.push(common.out.display().to_string());
            }
            report(a, &mut out)
        }
        Command::Replay(a) => replay(a, &mut out),
    })?;

    let mut outputs = BTreeMap::new();
    for name in out.written() {
        outputs.insert(name.clone(), manifest::sha256_file(&out.path(name))?);
    }
    let entry = RunManifest {
        subcommand: cmd.name().to_string(),
        argv,
        params: serde_json::to_value(cmd).map_err(|e| CliError::Runtime(e.to_string()))?,
        seed: cmd.seed(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        started_unix: started,
        wall_clock_seconds: clock.elapsed().as_secs_f64(),
        outputs,
    };
    manifest::append(out.root(), &entry)
}

fn require_seed(seed: Option<u64>, what: &str) -> Result<u64, CliError> {
    seed.ok_or_else(|| CliError::Usage(format!("--seed is required for {what}")))
}

fn constants_sweep(a: &ConstantsSweepArgs, out: &mut OutDir) -> Result<(), CliError> {
    if a.sensors.is_empty() {
        return Err(CliError::Usage(
            "--C needs at least one sensor count".into(),
        ));
    }
    let seed = if a.family.is_random() {
        require_seed(a.seed, "random profile families")?
    } else {
        a.seed.unwrap_or(0)
    };
    let basis = UnitaryBasis::new(a.basis, a.n)?;
    let mut rows = Vec::new();
    for &c in &a.sensors {
        let p = ProfileSet::family(
            a.family,
            c,
            a.n,
            derive_seed(seed, &[SALT_PROFILE, c as u64]),
            a.circulant,
        )?;
        let gd = gamma_distinct(&p, &basis)?;
        let gi = gamma_identical(&p, &basis)?;
        let (xd, xi) = (xi_distinct(&p), xi_identical(&p));
        rows.push(vec![
            c.to_string(),
            a.basis.name().to_string(),
            a.family.name().to_string(),
            fmt_f64(gd * gd),
            fmt_f64(gi * gi),
            fmt_f64(xd * xd),
            fmt_f64(xi * xi),
        ]);
    }
    out.csv(
        CONSTANTS_CSV,
        &[
            "C",
            "basis",
            "family",
            "gamma_distinct_sq",
            "gamma_identical_sq",
            "xi_distinct_sq",
            "xi_identical_sq",
        ],
        rows,
    )?;
    print_file(&out.path(CONSTANTS_CSV))?;
    if a.common.plot {
        plot_constants(out)?;
    }
    Ok(())
}

fn plot_constants(out: &mut OutDir) -> Result<(), CliError> {
    let (header, rows) = read_csv(&out.path(CONSTANTS_CSV))?;
    let title = rows
        .first()
        .map(|r| format!("{} profiles, {} basis", r[2], r[1]))
        .unwrap_or_default();
    let series: Vec<Series> = (3..header.len())
        .map(|k| Series {
            label: header[k].clone(),
            points: rows
                .iter()
                .filter_map(|r| Some((r[0].parse().ok()?, r[k].parse().ok()?)))
                .collect(),
        })
        .collect();
    let svg = line_chart(&title, "C", "squared constant", &series);
    out.bytes("constants_sweep.svg", svg.as_bytes())
}

fn experiment_config(a: &PhaseTransitionArgs) -> ExperimentConfig {
    let base = if a.full {
        ExperimentConfig::default()
    } else {
        ExperimentConfig::scaled_down()
    };
    let grid = a.grid.unwrap_or(base.grid_rows);
    ExperimentConfig {
        n: a.n.unwrap_or(base.n),
        grid_rows: grid,
        grid_cols: grid,
        trials: a.trials.unwrap_or(base.trials),
        tol: a.tol,
        sensors: a.sensors.clone(),
        family: a.family,
        basis: a.basis,
        sampling: a.mode,
        entry_dist: a.dist,
        circulant: a.circulant,
        fresh_ensemble_per_trial: !a.shared_ensemble,
        seed: a.seed,
        solver: SolverConfig {
            max_iterations: a.max_iter,
            ..SolverConfig::default()
        },
    }
}

fn phase_transition(a: &PhaseTransitionArgs, out: &mut OutDir) -> Result<(), CliError> {
    let cfg = experiment_config(a);
    cfg.validate()?;
    let grids = run_experiment(&cfg)?;
    for g in &grids {
        let mut rows = Vec::new();
        for (i, row) in g.successes.iter().enumerate() {
            for (j, &k) in row.iter().enumerate() {
                rows.push(vec![
                    i.to_string(),
                    j.to_string(),
                    fmt_f64(cfg.col_abscissa(j)),
                    fmt_f64(cfg.row_ordinate(i)),
                    g.m_values[j].to_string(),
                    g.s_values[i].to_string(),
                    k.to_string(),
                    cfg.trials.to_string(),
                    fmt_f64(g.success_fraction[i][j]),
                ]);
            }
        }
        out.csv(
            &grid_csv(g.sensors),
            &[
                "row",
                "col",
                "m_over_cn",
                "s_over_n",
                "m",
                "s",
                "successes",
                "trials",
                "success_fraction",
            ],
            rows,
        )?;
    }
    let mut rows = Vec::new();
    for g in &grids {
        for (j, v) in g.transition_curve.iter().enumerate() {
            rows.push(vec![
                g.sensors.to_string(),
                j.to_string(),
                fmt_f64(cfg.col_abscissa(j)),
                fmt_opt(*v),
            ]);
        }
    }
    out.csv(CURVE_CSV, &["C", "col", "m_over_cn", "s_over_n"], rows)?;
    let json = serde_json::to_string_pretty(&cfg).map_err(|e| CliError::Runtime(e.to_string()))?;
    out.bytes("phase_config.json", json.as_bytes())?;

    let curves: Vec<_> = grids.iter().map(|g| g.transition_curve.clone()).collect();
    let (ok, total) = non_decreasing_columns(&curves);
    println!("transition curve non-decreasing in C on {ok}/{total} comparable columns");
    if a.common.plot {
        for g in &grids {
            plot_phase(out, g.sensors)?;
        }
    }
    Ok(())
}

type Curve = (usize, Vec<Option<f64>>);

/// Parses a transition-curve CSV into per-C curves, in file order.
fn read_curves(path: &Path) -> Result<Vec<Curve>, CliError> {
    let (_, rows) = read_csv(path)?;
    let mut curves: Vec<Curve> = Vec::new();
    for r in rows {
        let c: usize = r[0]
            .parse()
            .map_err(|_| CliError::Runtime(format!("bad C '{}'", r[0])))?;
        let v = if r[3].is_empty() {
            None
        } else {
            r[3].parse().ok()
        };
        match curves.last_mut() {
            Some((last, vals)) if *last == c => vals.push(v),
            _ => curves.push((c, vec![v])),
        }
    }
    Ok(curves)
}

fn plot_phase(out: &mut OutDir, sensors: usize) -> Result<(), CliError> {
    let (_, rows) = read_csv(&out.path(&grid_csv(sensors)))?;
    let parse = |s: &str| s.parse::<usize>().unwrap_or(0);
    let n_rows = rows.iter().map(|r| parse(&r[0]) + 1).max().unwrap_or(0);
    let n_cols = rows.iter().map(|r| parse(&r[1]) + 1).max().unwrap_or(0);
    let mut values = vec![vec![0.0; n_cols]; n_rows];
    for r in &rows {
        values[parse(&r[0])][parse(&r[1])] = r[8].parse().unwrap_or(0.0);
    }
    let curve = read_curves(&out.path(CURVE_CSV))?
        .into_iter()
        .find(|(c, _)| *c == sensors)
        .map(|(_, v)| v)
        .unwrap_or_default();
    let svg = heatmap(
        &format!("empirical success, C = {sensors}"),
        "m / (C N)",
        "s / N",
        &values,
        &curve,
    );
    out.bytes(&format!("phase_grid_C{sensors}.svg"), svg.as_bytes())
}

fn generate(g: &GenerateArgs) -> Result<MeasurementEnsemble, CliError> {
    let seed = require_seed(g.seed, "generated ensembles")?;
    let basis = UnitaryBasis::new(g.basis, g.n)?;
    let profile_seed = derive_seed(seed, &[SALT_PROFILE]);
    let need_m = || {
        g.m.ok_or_else(|| CliError::Usage(format!("--m is required for {} sampling", g.mode)))
    };
    let profiles = || ProfileSet::family(g.family, g.sensors, g.n, profile_seed, g.circulant);
    let ens = match g.mode {
        SamplingMode::Distinct => assemble_distinct(&profiles()?, &basis, need_m()?, g.dist, seed)?,
        SamplingMode::Identical => {
            assemble_identical(&profiles()?, &basis, need_m()?, g.dist, seed)?
        }
        SamplingMode::DistinctVaried => {
            if g.rows.is_empty() {
                return Err(CliError::Usage(
                    "--rows is required for distinct-varied sampling".into(),
                ));
            }
            assemble_distinct_varied(&profiles()?, &basis, &g.rows, g.dist, seed)?
        }
        SamplingMode::BlockDiagonal => {
            assemble_block_diagonal(&basis, g.sensors, need_m()?, g.dist, seed)?
        }
    };
    let family = if g.mode == SamplingMode::BlockDiagonal {
        "partitioned".to_string()
    } else {
        g.family.to_string()
    };
    let circ = if g.circulant { ":circulant" } else { "" };
    Ok(ens.with_refs(
        format!("{family}:C={}:seed={profile_seed}{circ}", g.sensors),
        format!("{}:{}", g.basis, g.n),
    ))
}

fn read_ensemble(path: &Path) -> Result<MeasurementEnsemble, CliError> {
    let bytes = std::fs::read(path)
        .map_err(|e| CliError::Usage(format!("cannot read ensemble {}: {e}", path.display())))?;
    Ok(MeasurementEnsemble::from_bytes(&bytes)?)
}

fn ensemble(a: &EnsembleArgs, out: &mut OutDir) -> Result<(), CliError> {
    if a.noise.is_nan() || a.noise < 0.0 {
        return Err(CliError::Usage("--noise must be >= 0".into()));
    }
    let ens = generate(&a.generate)?;
    let seed = ens.seed;
    let x = random_sparse_signal(ens.cols(), a.sparsity, derive_seed(seed, &[SALT_SIGNAL]))?;
    let mut y = &ens.matrix * &x;
    if a.noise > 0.0 {
        let draw = subgaussian_matrix(
            2,
            y.len(),
            EntryDist::Gaussian,
            derive_seed(seed, &[SALT_NOISE]),
        );
        let e = DVector::from_iterator(
            y.len(),
            (0..y.len()).map(|i| C64::new(draw[(0, i)], draw[(1, i)])),
        );
        y += e.clone() * C64::new(a.noise / e.norm(), 0.0);
    }
    out.bytes("ensemble.bin", &ens.to_bytes())?;
    out.vector("x.csv", &x)?;
    out.vector("y.csv", &y)?;
    println!(
        "{} ensemble {}x{} ({} sensors, seed {}), s = {}, noise = {}",
        ens.mode,
        ens.rows(),
        ens.cols(),
        ens.sensors(),
        seed,
        a.sparsity,
        a.noise
    );
    Ok(())
}

fn aric_check(a: &AricCheckArgs, out: &mut OutDir) -> Result<(), CliError> {
    let matrix: DMatrix<C64> = match &a.ensemble {
        Some(path) => read_ensemble(path)?.matrix,
        None => generate(&a.generate)?.matrix,
    };
    if a.orders.is_empty() {
        return Err(CliError::Usage("--s needs at least one order".into()));
    }
    let mut rows = Vec::new();
    for &s in &a.orders {
        let exhaustive = match a.method {
            AricMethodArg::Exhaustive => true,
            AricMethodArg::Sampled => false,
            AricMethodArg::Auto => binomial(matrix.ncols(), s) <= EXHAUSTIVE_LIMIT,
        };
        let est = if exhaustive {
            aric_exhaustive(&matrix, s)?
        } else {
            let seed = require_seed(a.generate.seed, "sampled ARIC estimates")?;
            aric_sampled(&matrix, s, a.trials, derive_seed(seed, &[s as u64]))?
        };
        rows.push(vec![
            s.to_string(),
            fmt_f64(est.alpha_s),
            fmt_f64(est.beta_s),
            fmt_f64(est.ratio()),
            recovery_sufficient(&est).to_string(),
            est.method.to_string(),
            est.supports_checked.to_string(),
        ]);
    }
    out.csv(
        ARIC_CSV,
        &[
            "s",
            "alpha_s",
            "beta_s",
            "ratio",
            "sufficient",
            "method",
            "supports_checked",
        ],
        rows,
    )?;
    print_file(&out.path(ARIC_CSV))
}

fn recover(a: &RecoverArgs, out: &mut OutDir) -> Result<(), CliError> {
    let ens = read_ensemble(&a.ensemble)?;
    let y = read_vector(&a.y)?;
    let cfg = SolverConfig {
        eta: a.eta,
        max_iterations: a.max_iter,
        primal_tol: a.primal_tol,
        feasibility_tol: a.feasibility_tol,
        ..SolverConfig::default()
    };
    let r = solve_bpdn(&ens.matrix, &y, &cfg)?;
    out.vector("x_hat.csv", &r.x_hat)?;
    let residual = (&ens.matrix * &r.x_hat - &y).norm();
    let (err, ok) = match &a.x_true {
        Some(p) => {
            let x = read_vector(p)?;
            if x.len() != r.x_hat.len() {
                return Err(CliError::Usage(format!(
                    "--x-true has length {}, expected {}",
                    x.len(),
                    r.x_hat.len()
                )));
            }
            (
                Some(relative_error(&x, &r.x_hat)),
                Some(success(&x, &r.x_hat, 1e-3)),
            )
        }
        None => (None, None),
    };
    out.csv(
        RECOVER_CSV,
        &[
            "iterations",
            "converged",
            "objective",
            "residual_norm",
            "feasibility_gap",
            "relative_error",
            "success",
        ],
        [vec![
            r.iterations.to_string(),
            r.converged.to_string(),
            fmt_f64(r.objective),
            fmt_f64(residual),
            fmt_f64(r.final_feasibility_gap),
            fmt_opt(err),
            ok.map(|b| b.to_string()).unwrap_or_default(),
        ]],
    )?;
    print_file(&out.path(RECOVER_CSV))?;
    if !r.converged {
        eprintln!(
            "warning: solver stopped after {} iterations without converging",
            r.iterations
        );
    }
    Ok(())
}

fn report(a: &ReportArgs, out: &mut OutDir) -> Result<(), CliError> {
    let input: PathBuf = a.input.clone().unwrap_or_else(|| a.common.out.clone());
    let mut names: Vec<String> = std::fs::read_dir(&input)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", input.display())))?
        .filter_map(|e| e.ok())
        .filter(|e| e.path().is_file())
        .map(|e| e.file_name().to_string_lossy().into_owned())
        .filter(|n| n.ends_with(".csv"))
        .collect();
    names.sort();

    let mut md = String::from("# Run report\n");
    for name in &names {
        let path = input.join(name);
        if name == CURVE_CSV {
            let curves = read_curves(&path)?;
            let only: Vec<_> = curves.iter().map(|(_, v)| v.clone()).collect();
            let (ok, total) = non_decreasing_columns(&only);
            md.push_str(&format!("\n## {name}\n\n"));
            for (c, v) in &curves {
                let present = v.iter().filter(|x| x.is_some()).count();
                md.push_str(&format!(
                    "- C = {c}: transition present in {present}/{} columns\n",
                    v.len()
                ));
            }
            md.push_str(&format!(
                "- non-decreasing in C on {ok}/{total} comparable columns\n"
            ));
        } else if name.starts_with("phase_grid_C") {
            let (_, rows) = read_csv(&path)?;
            let mean = rows
                .iter()
                .filter_map(|r| r[8].parse::<f64>().ok())
                .sum::<f64>()
                / rows.len().max(1) as f64;
            md.push_str(&format!(
                "\n## {name}\n\n- {} cells, mean success fraction {mean:.4}\n",
                rows.len()
            ));
        } else {
            let (header, rows) = read_csv(&path)?;
            md.push_str(&format!(
                "\n## {name}\n\n| {} |\n|{}\n",
                header.join(" | "),
                "---|".repeat(header.len())
            ));
            for r in rows.iter().take(50) {
                md.push_str(&format!("| {} |\n", r.join(" | ")));
            }
            if rows.len() > 50 {
                md.push_str(&format!("\n({} more rows)\n", rows.len() - 50));
            }
        }
    }
    out.bytes("report.md", md.as_bytes())?;
    print!("{md}");
    if a.common.plot && input == out.root() {
        if names.iter().any(|n| n == CONSTANTS_CSV) {
            plot_constants(out)?;
        }
        if names.iter().any(|n| n == CURVE_CSV) {
            for (c, _) in read_curves(&out.path(CURVE_CSV))? {
                if out.path(&grid_csv(c)).exists() {
                    plot_phase(out, c)?;
                }
            }
        }
    }
    Ok(())
}

fn replay(a: &ReplayArgs, out: &mut OutDir) -> Result<(), CliError> {
    let path = a
        .manifest
        .clone()
        .unwrap_or_else(|| a.common.out.join(MANIFEST_FILE));
    let entries = manifest::read_all(&path)?;
    let selected: Vec<(usize, &RunManifest)> = entries
        .iter()
        .enumerate()
        .filter(|(i, m)| a.index.is_none_or(|k| k == *i) && m.subcommand != "replay")
        .collect();
    if selected.is_empty() {
        return Err(CliError::Usage(format!(
            "nothing to replay in {}",
            path.display()
        )));
    }
    let mut rows = Vec::new();
    let mut mismatches = 0;
    for (i, entry) in selected {
        let scratch = out.root().join("replay").join(i.to_string());
        if scratch.exists() {
            std::fs::remove_dir_all(&scratch)?;
        }
        let mut argv = vec!["multisense".to_string()];
        argv.extend(entry.argv.iter().cloned());
        argv.push("--out".into());
        argv.push(scratch.display().to_string());
        let code = crate::run(argv);
        for (name, expected) in &entry.outputs {
            let actual = if code == 0 {
                manifest::sha256_file(&scratch.join(name)).unwrap_or_default()
            } else {
                String::new()
            };
            let same = actual == *expected;
            if !same {
                mismatches += 1;
            }
            rows.push(vec![
                i.to_string(),
                entry.subcommand.clone(),
                name.clone(),
                expected.clone(),
                actual,
                same.to_string(),
            ]);
        }
    }
    out.csv(
        REPLAY_CSV,
        &["index", "subcommand", "file", "expected", "actual", "match"],
        rows,
    )?;
    print_file(&out.path(REPLAY_CSV))?;
    if mismatches > 0 {
        return Err(CliError::Runtime(format!(
            "{mismatches} output(s) differ from the manifest"
        )));
    }
    Ok(())
}

fn print_file(path: &Path) -> Result<(), CliError> {
    print!("{}", std::fs::read_to_string(path)?);
    Ok(())
}

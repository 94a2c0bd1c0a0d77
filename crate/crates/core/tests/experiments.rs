use std::path::Path;
use std::process::Command;

use cinf_core::harness::{
    emit_outputs, run_check_instance, run_pt_simulation, run_pt_simulation_with, ExperimentConfig,
    ExperimentKind, ExperimentOutput, OutputFormat, PtCsvWriter, PT_GRID_HEADER,
};
use cinf_core::randmat::Mode;

fn cinf(args: &[&str], dir: &Path) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_cinf"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

fn small_grid() -> ExperimentConfig {
    ExperimentConfig {
        n: 40,
        eta_grid: vec![0.7, 0.8],
        beta_grid: vec![0.05, 0.2],
        trials: 3,
        seed: 17,
        ..ExperimentConfig::default()
    }
}

#[test]
fn success_rate_falls_with_rank() {
    let cfg = ExperimentConfig {
        n: 80,
        eta_grid: vec![0.8],
        beta_grid: vec![0.025, 0.05, 0.1, 0.15, 0.2],
        trials: 20,
        seed: 2024,
        ..ExperimentConfig::default()
    };
    let res = run_pt_simulation(&cfg).unwrap();
    let rates: Vec<f64> = res.rows.iter().map(|r| r.success_rate).collect();
    let inversions: Vec<f64> = rates
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| w[1] - w[0])
        .collect();
    assert!(
        inversions.len() <= 1 && inversions.iter().all(|&d| d <= 0.1),
        "{rates:?}"
    );
    for r in &res.rows {
        assert!(r.successes <= r.trials);
        assert_eq!(r.success_rate, r.successes as f64 / r.trials as f64);
        assert!(r.k <= r.l);
    }
    let (agree, total) = res.off_boundary_agreement();
    assert!(
        total > 0 && agree as f64 >= 0.9 * total as f64,
        "{agree}/{total}"
    );
}

#[test]
fn identical_configs_give_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_grid();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    emit_outputs(
        &ExperimentOutput::PtGrid(run_pt_simulation(&cfg).unwrap()),
        &a,
        OutputFormat::Csv,
        false,
    )
    .unwrap();
    let mut w = PtCsvWriter::create(&b).unwrap();
    run_pt_simulation_with(&cfg, |r| w.row(r)).unwrap();
    drop(w);
    let (sa, sb) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(sa, sb);
    assert!(String::from_utf8(sa)
        .unwrap()
        .starts_with(&format!("{PT_GRID_HEADER}\n")));

    let j1 = dir.path().join("a.json");
    let j2 = dir.path().join("b.json");
    for p in [&j1, &j2] {
        emit_outputs(
            &ExperimentOutput::PtGrid(run_pt_simulation(&cfg).unwrap()),
            p,
            OutputFormat::Json,
            false,
        )
        .unwrap();
    }
    assert_eq!(std::fs::read(&j1).unwrap(), std::fs::read(&j2).unwrap());

    let other = ExperimentConfig { seed: 18, ..cfg };
    emit_outputs(
        &ExperimentOutput::PtGrid(run_pt_simulation(&other).unwrap()),
        &b,
        OutputFormat::Csv,
        false,
    )
    .unwrap();
    assert_ne!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn partial_results_survive_a_failing_sink() {
    let mut seen = 0;
    let err = run_pt_simulation_with(&small_grid(), |_| {
        seen += 1;
        if seen == 2 {
            Err(cinf_core::Error::Parameter("sink full".into()))
        } else {
            Ok(())
        }
    });
    assert!(err.is_err());
    assert_eq!(seen, 2);
}

#[test]
fn check_instance_examples() {
    let cfg = |k: usize, seed: u64| ExperimentConfig {
        kind: ExperimentKind::CheckInstance,
        n: 60,
        k: Some(k),
        l: Some(48),
        mode: Mode::WorstCase,
        seed,
        ..ExperimentConfig::default()
    };
    let below = run_check_instance(&cfg(3, 7)).unwrap();
    assert!(below.certificate.equivalent && below.solve.success == Some(true));

    // Above the curve the verdict depends on the draw at n=60; what must
    // hold for every draw is that certificate and solver agree.
    let mut failures = 0;
    for seed in 0..10 {
        let r = run_check_instance(&cfg(12, seed)).unwrap();
        assert!(r.agreement, "seed {seed}");
        if !r.certificate.equivalent {
            failures += 1;
        }
    }
    assert!(failures >= 7, "{failures}/10");

    let trivial = run_check_instance(&cfg(0, 7)).unwrap();
    assert!(trivial.certificate.equivalent && trivial.solve.success == Some(true));
}

#[test]
fn cli_writes_curve_and_plot_script() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _, err) = cinf(
        &[
            "pt-curve",
            "--points",
            "3",
            "--eta-min",
            "0.2",
            "--eta-max",
            "0.8",
            "--out",
            "c.csv",
            "--plot-script",
        ],
        dir.path(),
    );
    assert_eq!(code, 0, "{err}");
    let csv = std::fs::read_to_string(dir.path().join("c.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "eta,alpha,beta_wc");
    assert_eq!(lines.len(), 4);
    let script = std::fs::read_to_string(dir.path().join("c_plot.py")).unwrap();
    assert!(script.contains("\"c.csv\""));
}

#[test]
fn cli_check_and_spectrum() {
    let dir = tempfile::tempdir().unwrap();
    let (code, out, err) = cinf(
        &[
            "check",
            "--n",
            "60",
            "--k",
            "3",
            "--l",
            "48",
            "--seed",
            "7",
            "--dump-matrix",
            "x.csv",
        ],
        dir.path(),
    );
    assert_eq!(code, 0, "{err}");
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["certificate"]["equivalent"], true);
    assert_eq!(v["solve"]["success"], true);
    let x = std::fs::read_to_string(dir.path().join("x.csv")).unwrap();
    assert_eq!(x.lines().count(), 60);

    let (code, _, err) = cinf(
        &[
            "spectrum", "--beta", "0.1", "--eta", "0.8", "--n", "200", "--bins", "10", "--which",
            "d", "--out", "s.csv",
        ],
        dir.path(),
    );
    assert_eq!(code, 0, "{err}");
    let s = std::fs::read_to_string(dir.path().join("s.csv")).unwrap();
    let lines: Vec<&str> = s.lines().collect();
    assert_eq!(
        &lines[..2],
        ["# atoms", "location,empirical_mass,theory_mass"]
    );
    let bins_at = lines.iter().position(|l| *l == "# bins").unwrap();
    assert_eq!(
        lines[bins_at + 1],
        "bin_lo,bin_hi,empirical_mass,theory_mass"
    );
    assert_eq!(lines.len() - bins_at - 2, 10);
}

#[test]
fn cli_runs_from_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig {
        out_path: "grid.csv".into(),
        ..small_grid()
    };
    std::fs::write(
        dir.path().join("cfg.json"),
        serde_json::to_string(&cfg).unwrap(),
    )
    .unwrap();
    let (code, _, err) = cinf(&["--config", "cfg.json"], dir.path());
    assert_eq!(code, 0, "{err}");
    let direct = ExperimentOutput::PtGrid(run_pt_simulation(&small_grid()).unwrap()).to_csv();
    assert_eq!(
        std::fs::read_to_string(dir.path().join("grid.csv")).unwrap(),
        direct
    );
}

#[test]
fn cli_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(cinf(&["--help"], dir.path()).0, 0);
    assert_eq!(cinf(&["--version"], dir.path()).0, 0);
    assert_eq!(cinf(&[], dir.path()).0, 1);
    assert_eq!(cinf(&["pt-curve", "--points", "many"], dir.path()).0, 1);
    assert_eq!(
        cinf(
            &["pt-curve", "--eta-min", "0", "--out", "c.csv"],
            dir.path()
        )
        .0,
        1
    );
    assert_eq!(
        cinf(
            &["spectrum", "--beta", "0.3", "--eta", "0.2", "--which", "q", "--n", "200"],
            dir.path()
        )
        .0,
        1
    );
    assert_eq!(
        cinf(&["check", "--n", "10", "--k", "6", "--l", "4"], dir.path()).0,
        1
    );
    assert_eq!(cinf(&["--config", "missing.json"], dir.path()).0, 2);
    std::fs::write(dir.path().join("bad.json"), "{ not json").unwrap();
    assert_eq!(cinf(&["--config", "bad.json"], dir.path()).0, 1);

    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "").unwrap();
    let (code, _, err) = cinf(&["pt-curve", "--out", "file/sub/c.csv"], dir.path());
    assert_eq!(code, 2, "{err}");
    let (code, _, _) = cinf(
        &[
            "pt-simulate",
            "--n",
            "20",
            "--trials",
            "1",
            "--out",
            "file/g.csv",
        ],
        dir.path(),
    );
    assert_eq!(code, 2);
}

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use relaxns::io::{RunConfig, DIAGNOSTICS_HEADER, SNAPSHOT_HEADER};

const BIN: &str = env!("CARGO_BIN_EXE_relaxns");

fn relaxns(args: &[&str], out: &Path) -> Output {
    Command::new(BIN)
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("case.toml");
    fs::write(&path, text).unwrap();
    path.display().to_string()
}

const SHORT: &str = "[grid]\nr_max = 16\nn_cells = 200\n[solver]\nt_end = 0.2\n";

#[test]
fn check_structure_passes_with_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let out = relaxns(&["check-structure", "--config", "default"], dir.path());
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(
        stdout.contains("PASS") && !stdout.contains("FAIL"),
        "{stdout}"
    );
    assert!(dir.path().join("structure.csv").exists());
}

#[test]
fn unknown_subcommand_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = relaxns(&["integrate"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
}

#[test]
fn zero_tau_run_points_to_the_classical_solver() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[params]\ntau = 0\n");
    let out = relaxns(&["run", "--config", &cfg], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("run-classical"));
}

#[test]
fn invalid_gamma_reports_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[params]\n\ngamma = 1.0\n");
    let out = relaxns(&["run", "--config", &cfg], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains(":3:") && err.contains("gamma > 1"), "{err}");
}

#[test]
fn missing_config_file_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("absent.toml");
    let out = relaxns(&["run", "--config", missing.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn equilibrium_run_writes_zero_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &format!("{SHORT}[init]\nbump_amp = 0\n"));
    let out = relaxns(&["run", "--quiet", "--config", &cfg], dir.path());
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(out.stdout.is_empty());

    let diag = fs::read_to_string(dir.path().join("diagnostics.csv")).unwrap();
    let mut lines = diag.lines();
    assert_eq!(lines.next(), Some(DIAGNOSTICS_HEADER));
    let header: Vec<&str> = DIAGNOSTICS_HEADER.split(',').collect();
    let mut rows = 0;
    for line in lines {
        rows += 1;
        for (name, field) in header.iter().zip(line.split(',')) {
            // the mass column holds the absolute mass, not a deviation
            if matches!(*name, "t" | "mass") || field.is_empty() {
                continue;
            }
            assert_eq!(field.parse::<f64>().unwrap(), 0.0, "{name} in {line}");
        }
    }
    assert!(rows >= 2);

    let snap = fs::read_to_string(dir.path().join("final.csv")).unwrap();
    assert!(!snap.contains('\r'));
    assert_eq!(snap.lines().next(), Some(SNAPSHOT_HEADER));
    assert_eq!(snap.lines().count(), 201);
}

#[test]
fn run_is_deterministic_and_manifest_reparses() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_text = format!("{SHORT}[init]\nvel_amp = 0.05\n");
    let cfg = write_config(dir.path(), &cfg_text);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let res = relaxns(&["run", "--quiet", "--config", &cfg], out);
        assert_eq!(
            res.status.code(),
            Some(0),
            "{}",
            String::from_utf8_lossy(&res.stderr)
        );
    }
    for name in ["initial.csv", "final.csv", "diagnostics.csv"] {
        assert_eq!(
            fs::read(a.join(name)).unwrap(),
            fs::read(b.join(name)).unwrap(),
            "{name} differs"
        );
    }
    let manifest = fs::read_to_string(a.join("manifest.txt")).unwrap();
    assert!(manifest.contains("complete"));
    let echoed = RunConfig::<f64>::parse_str(&manifest, "manifest").unwrap();
    assert_eq!(
        echoed,
        RunConfig::<f64>::parse_str(&cfg_text, "case").unwrap()
    );

    let diag = fs::read_to_string(a.join("diagnostics.csv")).unwrap();
    let e_run: Vec<f64> = diag
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(2).unwrap().parse().unwrap())
        .collect();
    assert!(e_run.windows(2).all(|w| w[1] >= w[0]));
}

#[test]
fn classical_run_and_energy_report_succeed() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "[grid]\nr_max = 16\nn_cells = 100\n[solver]\nt_end = 0.1\n",
    );
    let out = relaxns(&["run-classical", "--quiet", "--config", &cfg], dir.path());
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let manifest = fs::read_to_string(dir.path().join("manifest.txt")).unwrap();
    assert!(manifest.contains("tau = 0"));

    // long enough for the energy ratio to level off
    let cfg = write_config(
        dir.path(),
        "[grid]\nr_max = 61\nn_cells = 200\n[solver]\nt_end = 20\noutput_interval = 0.5\n",
    );
    let report_dir = dir.path().join("report");
    let out = relaxns(&["energy-report", "--config", &cfg], &report_dir);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let report = fs::read_to_string(report_dir.join("energy_report.txt")).unwrap();
    assert!(report.contains("PASS"), "{report}");
}

#[test]
fn sweep_writes_one_row_per_tau() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "[grid]\nr_max = 16\nn_cells = 100\n[init]\nvel_amp = 0.05\n[solver]\nt_end = 0.2\n",
    );
    let out = relaxns(
        &[
            "sweep-tau",
            "--quiet",
            "--config",
            &cfg,
            "--tau-list",
            "1e-2,1e-3",
        ],
        dir.path(),
    );
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let table = fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    assert_eq!(table.lines().count(), 3, "{table}");
    assert!(dir.path().join("sweep_summary.txt").exists());
}

//! Command-line contract: flag validation, error messages, exit codes.

use std::path::PathBuf;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_covertd2d"))
}

fn tmp(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join("covertd2d-cli-tests");
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn unknown_kind_is_a_usage_error_listing_valid_kinds() {
    let out = bin().args(["validate", "--kinds", "sinr-xx", "--trials", "10"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("unknown kind"), "{err}");
    for k in ["sinr-ps", "ph-ps", "sinr-ts", "ph-ts", "fa", "md"] {
        assert!(err.contains(k), "missing {k} in {err}");
    }
}

#[test]
fn zero_trials_is_a_config_error() {
    let out = bin().args(["validate", "--trials", "0"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("trials"));
}

#[test]
fn lower_stage_rejects_grid_below_noise_floor() {
    let out = bin()
        .args(["lower-stage", "--tau-min-dbm", "-95", "--grid", "10"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("noise floor"));
}

#[test]
fn lower_stage_flat_curve_at_vanishing_power() {
    let path = tmp("lower_flat.csv");
    let out = bin()
        .args([
            "lower-stage",
            "--ps-dbm",
            "-120",
            "--grid",
            "24",
            "--out",
            path.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&path).unwrap();
    for line in text.lines().skip(2) {
        let fields: Vec<&str> = line.split(',').collect();
        if fields[0] == "grid" {
            let err: f64 = fields[3].parse().unwrap();
            assert!((err - 1.0).abs() <= 1e-3, "curve not flat: {line}");
        }
    }
}

#[test]
fn invalid_config_file_is_rejected() {
    let path = tmp("bad_config.txt");
    std::fs::write(&path, "alpha = 2.0\n").unwrap();
    let out = bin()
        .args(["lower-stage", "--config", path.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("alpha"));

    std::fs::write(&path, "p_cell = 10\n").unwrap();
    let out = bin()
        .args(["lower-stage", "--config", path.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("p_cell_dbm"));
}

#[test]
fn infeasible_equilibrium_exits_three_with_diagnostics() {
    let cfg = tmp("infeasible.txt");
    std::fs::write(&cfg, "r_link = 2.0\nlambda_a = 0.002\n").unwrap();
    let out_csv = tmp("infeasible_eq.csv");
    let out = bin()
        .args([
            "equilibrium",
            "--scheme",
            "ts",
            "--config",
            cfg.to_str().unwrap(),
            "--population",
            "24",
            "--generations",
            "30",
            "--out",
            out_csv.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("slack"), "{err}");
    let text = std::fs::read_to_string(&out_csv).unwrap();
    assert!(text.lines().any(|l| l.starts_with("infeasible,")), "{text}");
}

#[test]
fn sweep_with_empty_values_is_a_config_error() {
    let spec = tmp("sweep_empty.txt");
    std::fs::write(&spec, "field = lambda_a\ntask = lower-stage\n").unwrap();
    let out = bin().args(["sweep", "--spec", spec.to_str().unwrap()]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("values"));
}

#[test]
fn sweep_lower_stage_runs() {
    let spec = tmp("sweep_ls.txt");
    std::fs::write(
        &spec,
        "field = lambda_a\nvalues = 0.001, 0.002\ntask = lower-stage\nps_dbm = 10\n",
    )
    .unwrap();
    let out_csv = tmp("sweep_ls.csv");
    let out = bin()
        .args(["sweep", "--spec", spec.to_str().unwrap(), "--out", out_csv.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&out_csv).unwrap();
    let rows: Vec<&str> = text.lines().skip(2).collect();
    assert_eq!(rows.len(), 2);
    // denser adversaries detect better: error_star falls with lambda_a
    let e1: f64 = rows[0].split(',').nth(3).unwrap().parse().unwrap();
    let e2: f64 = rows[1].split(',').nth(3).unwrap().parse().unwrap();
    assert!(e2 < e1, "{text}");
}

#[test]
fn validate_passes_on_small_deterministic_run() {
    let path = tmp("val_small.csv");
    let out = bin()
        .args([
            "validate",
            "--kinds",
            "sinr-ps,fa",
            "--trials",
            "8000",
            "--rho-points",
            "3",
            "--tau-points",
            "4",
            "--seed",
            "9",
            "--out",
            path.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().skip(2).count(), 7);
    assert!(text.lines().next().unwrap().starts_with("# covertd2d"));
}

#[test]
fn sweep_eps_covert_utility_is_nondecreasing_for_ps() {
    // relaxing the covertness slack can only enlarge the feasible set
    let spec = tmp("sweep_eps.txt");
    std::fs::write(
        &spec,
        "field = eps_covert\nvalues = 0.01, 0.02, 0.03, 0.05\ntask = equilibrium\nscheme = ps\nseed = 3\npopulation = 32\ngenerations = 48\n",
    )
    .unwrap();
    let out_csv = tmp("sweep_eps.csv");
    let out = bin()
        .args(["sweep", "--spec", spec.to_str().unwrap(), "--out", out_csv.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&out_csv).unwrap();
    let mut prev = f64::NEG_INFINITY;
    let mut rows = 0;
    for line in text.lines().skip(2) {
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields[3], "ok", "{line}");
        let u: f64 = fields[6].parse().unwrap();
        assert!(u >= prev - 1e-6, "utility fell along eps_covert: {text}");
        prev = u;
        rows += 1;
    }
    assert_eq!(rows, 4);
}

#[test]
fn equilibrium_surface_is_written_and_marks_feasibility() {
    let out_csv = tmp("eq_surface_main.csv");
    let surface = tmp("eq_surface.csv");
    let out = bin()
        .args([
            "equilibrium",
            "--scheme",
            "ps",
            "--population",
            "24",
            "--generations",
            "24",
            "--surface",
            surface.to_str().unwrap(),
            "--surface-grid",
            "12",
            "--out",
            out_csv.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&surface).unwrap();
    let rows: Vec<&str> = text.lines().skip(2).collect();
    assert_eq!(rows.len(), 144);
    let feasible: Vec<bool> = rows.iter().map(|r| r.ends_with(",1")).collect();
    assert!(feasible.iter().any(|&b| b), "no feasible cell on the surface");
    assert!(feasible.iter().any(|&b| !b), "no infeasible cell on the surface");
    // the equilibrium's utility must beat every feasible surface cell
    let eq_util: f64 = std::fs::read_to_string(&out_csv)
        .unwrap()
        .lines()
        .nth(2)
        .unwrap()
        .split(',')
        .nth(5)
        .unwrap()
        .parse()
        .unwrap();
    for (row, ok) in rows.iter().zip(&feasible) {
        if *ok {
            let u: f64 = row.split(',').nth(2).unwrap().parse().unwrap();
            assert!(eq_util >= u - 1e-6, "surface cell beats equilibrium: {row}");
        }
    }
}

#[test]
fn lower_stage_curve_dips_once_and_optimum_beats_grid() {
    let path = tmp("lower_shape.csv");
    let out = bin()
        .args(["lower-stage", "--ps-dbm", "10", "--grid", "120", "--out", path.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&path).unwrap();
    let mut grid: Vec<f64> = Vec::new();
    let mut argmin = f64::NAN;
    let mut optimum = f64::NAN;
    for line in text.lines().skip(2) {
        let fields: Vec<&str> = line.split(',').collect();
        let err: f64 = fields[3].parse().unwrap();
        match fields[0] {
            "grid" => grid.push(err),
            "grid_argmin" => argmin = err,
            "optimum" => optimum = err,
            other => panic!("unexpected row type {other}"),
        }
    }
    // decreasing then increasing
    let min_idx = grid
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap();
    assert!(min_idx > 0 && min_idx < grid.len() - 1, "minimum at the edge");
    assert!(grid[0] > grid[min_idx] && *grid.last().unwrap() > grid[min_idx]);
    // line-search optimum at least as good as the plotted grid
    assert!(optimum <= argmin + 1e-6, "optimum {optimum} vs grid argmin {argmin}");
}

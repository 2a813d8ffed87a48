//! Binary-level checks of the `compute` subcommand: the documented
//! examples, file formats, round-trips, and config precedence.

use std::path::PathBuf;
use std::process::Command;

use qbm::model::ReducedParams;
use qbm::quadrature::QuadratureSettings;
use qbm::series::{compute_series, GridSpacing, Route, TimeGrid};
use qbm_cli::output::parse_series_csv;

fn qbm() -> Command {
    Command::new(env!("CARGO_BIN_EXE_qbm"))
}

/// Per-test output path; tests run in parallel, so names must be unique.
fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join("qbm-cli-tests");
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn run_ok(args: &[&str]) {
    let output = qbm().args(args).output().unwrap();
    assert!(
        output.status.success(),
        "qbm {args:?} failed: {}",
        String::from_utf8_lossy(&output.stderr)
    );
}

#[test]
fn high_t_example_reaches_the_classical_ramp() {
    let path = scratch("hot_ramp.csv");
    run_ok(&[
        "compute", "--route", "high_t", "--gamma", "1", "--omega-c", "0", "--omega-th",
        "200", "--t-start", "0", "--t-end", "5", "--n-points", "64", "--output",
        path.to_str().unwrap(),
    ]);
    let parsed = parse_series_csv(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(parsed.times.len(), 64);
    // 2 hbar omega_th gamma / m * (t - 1 + e^{ -t }) at t = 5.
    let expected = 400.0 * (4.0 + (-5.0f64).exp());
    let last = *parsed.values.last().unwrap();
    assert!(
        (last - expected).abs() <= 1e-9 * expected,
        "last row {last}, expected {expected}"
    );
}

#[test]
fn exact_and_quadrature_agree_at_the_cli_boundary() {
    let common = [
        "--gamma", "1", "--omega-c", "0.5", "--omega-th", "10", "--t-start", "0.1",
        "--t-end", "5", "--n-points", "20",
    ];
    let exact_path = scratch("boundary_exact.csv");
    let quad_path = scratch("boundary_quad.csv");
    let mut exact_args = vec!["compute", "--route", "exact"];
    exact_args.extend_from_slice(&common);
    exact_args.extend_from_slice(&["--output", exact_path.to_str().unwrap()]);
    run_ok(&exact_args);
    let mut quad_args = vec!["compute", "--route", "quadrature"];
    quad_args.extend_from_slice(&common);
    quad_args.extend_from_slice(&["--output", quad_path.to_str().unwrap()]);
    run_ok(&quad_args);

    let exact = parse_series_csv(&std::fs::read_to_string(&exact_path).unwrap()).unwrap();
    let quad = parse_series_csv(&std::fs::read_to_string(&quad_path).unwrap()).unwrap();
    let mut worst = 0.0f64;
    for (a, b) in exact.values.iter().zip(&quad.values) {
        worst = worst.max((a - b).abs() / b.abs());
    }
    assert!(worst <= 1e-6, "worst relative difference {worst:.3e}");
}

#[test]
fn quadrature_from_zero_starts_at_exactly_zero() {
    let path = scratch("zero_start.csv");
    run_ok(&[
        "compute", "--route", "quadrature", "--gamma", "1", "--omega-c", "2",
        "--omega-th", "5", "--t-start", "0", "--t-end", "3", "--n-points", "8",
        "--output", path.to_str().unwrap(),
    ]);
    let parsed = parse_series_csv(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(parsed.times[0].to_bits(), 0.0f64.to_bits());
    assert_eq!(parsed.values[0].to_bits(), 0.0f64.to_bits());
    assert_eq!(parsed.routes[0], "quadrature");
    assert!(!parsed.fallbacks[0]);
}

#[test]
fn csv_round_trips_the_in_memory_series_bit_exactly() {
    let path = scratch("roundtrip.csv");
    run_ok(&[
        "compute", "--route", "exact", "--gamma", "1", "--omega-c", "0.5",
        "--omega-th", "10", "--t-start", "0.1", "--t-end", "5", "--n-points", "20",
        "--output", path.to_str().unwrap(),
    ]);
    let parsed = parse_series_csv(&std::fs::read_to_string(&path).unwrap()).unwrap();

    let params = ReducedParams::new(1.0, 0.5, 10.0, 1.0, 1.0).unwrap();
    let grid = TimeGrid {
        t_start: 0.1,
        t_end: 5.0,
        n_points: 20,
        spacing: GridSpacing::Linear,
    };
    let series = compute_series(
        &params,
        &qbm::model::KernelModel::Ohmic { gamma: 1.0 },
        Route::Exact,
        &grid,
        &QuadratureSettings::default(),
    )
    .unwrap();
    assert_eq!(parsed.times.len(), series.times.len());
    for i in 0..series.times.len() {
        assert_eq!(parsed.times[i].to_bits(), series.times[i].to_bits(), "t[{i}]");
        assert_eq!(
            parsed.values[i].to_bits(),
            series.values[i].to_bits(),
            "msd[{i}]"
        );
        assert_eq!(parsed.fallbacks[i], series.fallback_flags[i], "flag[{i}]");
    }
}

#[test]
fn json_and_csv_carry_identical_values() {
    let csv_path = scratch("pair.csv");
    let json_path = scratch("pair.json");
    let common = [
        "compute", "--route", "exact", "--gamma", "1", "--omega-c", "0.5",
        "--omega-th", "10", "--t-start", "0.1", "--t-end", "2", "--n-points", "6",
    ];
    let mut csv_args = common.to_vec();
    csv_args.extend_from_slice(&["--output", csv_path.to_str().unwrap()]);
    run_ok(&csv_args);
    let mut json_args = common.to_vec();
    json_args.extend_from_slice(&[
        "--format",
        "json",
        "--output",
        json_path.to_str().unwrap(),
    ]);
    run_ok(&json_args);

    let csv = parse_series_csv(&std::fs::read_to_string(&csv_path).unwrap()).unwrap();
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&json_path).unwrap()).unwrap();
    assert_eq!(doc["route"], "exact");
    assert_eq!(doc["params"]["gamma"].as_f64(), Some(1.0));
    assert_eq!(doc["params"]["n_points"].as_u64(), Some(6));
    let rows = doc["series"].as_array().unwrap();
    assert_eq!(rows.len(), csv.times.len());
    for (i, row) in rows.iter().enumerate() {
        assert_eq!(
            row["t"].as_f64().unwrap().to_bits(),
            csv.times[i].to_bits(),
            "t[{i}]"
        );
        assert_eq!(
            row["msd"].as_f64().unwrap().to_bits(),
            csv.values[i].to_bits(),
            "msd[{i}]"
        );
        assert_eq!(row["fallback"].as_bool(), Some(csv.fallbacks[i]), "flag[{i}]");
    }
}

/// Maps a header key back to its command-line flag; `None` for entries
/// that are not flags of `compute`.
fn flag_for(key: &str) -> Option<&'static str> {
    match key {
        "route" => Some("--route"),
        "mode" => Some("--mode"),
        "kernel" => Some("--kernel"),
        "tau" => Some("--tau"),
        "gamma" => Some("--gamma"),
        "omega_c" => Some("--omega-c"),
        "omega_th" => Some("--omega-th"),
        "mass" => Some("--mass"),
        "hbar" => Some("--hbar"),
        "t_start" => Some("--t-start"),
        "t_end" => Some("--t-end"),
        "n_points" => Some("--n-points"),
        "spacing" => Some("--spacing"),
        "seed" => Some("--seed"),
        "n_particles" => Some("--n-particles"),
        "format" => Some("--format"),
        _ => None,
    }
}

#[test]
fn header_echo_suffices_to_rerun_the_command() {
    let first = scratch("selfdesc_first.csv");
    run_ok(&[
        "compute", "--route", "quadrature", "--mode", "low_t", "--kernel", "srt",
        "--tau", "0.1", "--gamma", "1", "--omega-c", "3", "--omega-th", "0",
        "--t-start", "0.25", "--t-end", "4", "--n-points", "12", "--spacing", "log",
        "--output", first.to_str().unwrap(),
    ]);
    let parsed = parse_series_csv(&std::fs::read_to_string(&first).unwrap()).unwrap();
    assert_eq!(parsed.header_value("command"), Some("compute"));

    let second = scratch("selfdesc_second.csv");
    let mut args: Vec<String> = vec!["compute".to_string()];
    for (key, value) in &parsed.header {
        if let Some(flag) = flag_for(key) {
            args.push(flag.to_string());
            args.push(value.clone());
        }
    }
    args.push("--output".to_string());
    args.push(second.to_str().unwrap().to_string());
    let output = qbm().args(&args).output().unwrap();
    assert!(
        output.status.success(),
        "re-run failed: {}",
        String::from_utf8_lossy(&output.stderr)
    );
    assert_eq!(
        std::fs::read(&first).unwrap(),
        std::fs::read(&second).unwrap(),
        "the echoed header did not reproduce the file"
    );
}

#[test]
fn flags_override_the_config_file() {
    let config = scratch("override.json");
    let from_file = scratch("override_file.csv");
    std::fs::write(
        &config,
        format!(
            r#"{{
                "route": "exact",
                "gamma": 1.0,
                "omega_c": 0.5,
                "omega_th": 10.0,
                "t_grid": {{"t_start": 0.1, "t_end": 2.0, "n_points": 4}},
                "output": {:?}
            }}"#,
            from_file.to_str().unwrap()
        ),
    )
    .unwrap();
    run_ok(&["compute", "--config", config.to_str().unwrap()]);
    let base = parse_series_csv(&std::fs::read_to_string(&from_file).unwrap()).unwrap();
    assert_eq!(base.header_value("omega_c"), Some("5.0000000000000000e-1"));

    let overridden_path = scratch("override_flag.csv");
    run_ok(&[
        "compute", "--config", config.to_str().unwrap(), "--omega-c", "5",
        "--output", overridden_path.to_str().unwrap(),
    ]);
    let over = parse_series_csv(&std::fs::read_to_string(&overridden_path).unwrap()).unwrap();
    assert_eq!(over.header_value("omega_c"), Some("5.0000000000000000e0"));
    assert_ne!(base.values[3], over.values[3]);
}

#[test]
fn thread_cap_does_not_change_the_bytes() {
    let free = scratch("threads_free.csv");
    let capped = scratch("threads_capped.csv");
    let common = [
        "compute", "--route", "quadrature", "--gamma", "1", "--omega-c", "10",
        "--omega-th", "100", "--t-start", "0", "--t-end", "10", "--n-points", "64",
    ];
    let mut free_args = common.to_vec();
    free_args.extend_from_slice(&["--output", free.to_str().unwrap()]);
    run_ok(&free_args);
    let mut capped_args = common.to_vec();
    capped_args.extend_from_slice(&["--output", capped.to_str().unwrap()]);
    let output = qbm()
        .args(&capped_args)
        .env("QBM_THREADS", "1")
        .output()
        .unwrap();
    assert!(output.status.success());
    let free_bytes = std::fs::read(&free).unwrap();
    let capped_bytes = std::fs::read(&capped).unwrap();
    // The files differ only in the output path, which is not echoed.
    assert_eq!(free_bytes, capped_bytes);
}

#[test]
fn grid_driven_stochastic_route_matches_explicit_stepping() {
    let by_grid = scratch("stoch_grid.csv");
    run_ok(&[
        "compute", "--route", "simulate", "--gamma", "1", "--omega-c", "0.5",
        "--omega-th", "100", "--t-start", "0", "--t-end", "2", "--n-points", "5",
        "--n-particles", "500", "--seed", "7", "--output", by_grid.to_str().unwrap(),
    ]);
    let by_steps = scratch("stoch_steps.csv");
    // The grid above resolves to dt = 0.01 over 200 steps; stride 50
    // thins the explicit run onto the same five sample times.
    run_ok(&[
        "simulate", "--gamma", "1", "--omega-c", "0.5", "--omega-th", "100", "--dt",
        "0.01", "--n-steps", "200", "--stride", "50", "--n-particles", "500",
        "--seed", "7", "--output", by_steps.to_str().unwrap(),
    ]);
    let grid = parse_series_csv(&std::fs::read_to_string(&by_grid).unwrap()).unwrap();
    let steps = parse_series_csv(&std::fs::read_to_string(&by_steps).unwrap()).unwrap();
    assert_eq!(grid.header_value("dt"), Some("1.0000000000000000e-2"));
    assert_eq!(grid.header_value("n_steps"), Some("200"));
    assert_eq!(grid.times.len(), 5);
    for i in 0..5 {
        assert_eq!(grid.times[i].to_bits(), steps.times[i].to_bits(), "t[{i}]");
        assert_eq!(grid.values[i].to_bits(), steps.values[i].to_bits(), "msd[{i}]");
    }
}

#[test]
fn stochastic_route_rejects_incompatible_grids() {
    for (extra, needle) in [
        (vec!["--t-start", "1", "--t-end", "2"], "t = 0"),
        (
            vec!["--t-start", "0.5", "--t-end", "2", "--spacing", "log"],
            "linear",
        ),
    ] {
        let mut args = vec![
            "compute", "--route", "simulate", "--gamma", "1", "--omega-c", "0.5",
            "--omega-th", "100", "--n-points", "5", "--n-particles", "10", "--output",
            "/tmp/qbm-never-written.csv",
        ];
        args.extend(extra.iter().copied());
        let output = qbm().args(&args).output().unwrap();
        assert_eq!(output.status.code(), Some(2), "{extra:?}");
        let stderr = String::from_utf8_lossy(&output.stderr);
        assert!(stderr.contains(needle), "{stderr}");
    }
}

#[test]
fn unreadable_config_file_is_a_usage_error() {
    let output = qbm()
        .args(["compute", "--config", "/nonexistent/qbm.json"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("configuration error"), "{stderr}");
}

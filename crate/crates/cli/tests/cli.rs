use std::path::Path;
use std::process::{Command, Output};

use qkelly_cli::output::{read_aggregates_csv, read_trajectories_csv, CSV_VERSION};
use qkelly_cli::presets::Preset;
use qkelly_core::betting::Game;
use qkelly_core::engine::simulate_trajectory;

fn qkelly(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qkelly")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn validate_fig4a() {
    let o = qkelly(&["validate", "--preset", "fig4a"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.starts_with("super-fair, expanding, G ≈ 0.35183"), "{out}");
    assert!(out.contains("r0"));
}

#[test]
fn validate_rejects_unfair_and_unnormalized() {
    let dir = tempfile::tempdir().unwrap();
    let unfair = write_config(dir.path(), "unfair.toml", "[game]\np = [0.5, 0.5]\nk2 = [1.5, 1.5]\n");
    let o = qkelly(&["validate", "--config", &unfair]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("sum of 1/k^2"), "{}", stderr(&o));

    let bad_eta = write_config(dir.path(), "eta.toml", "[game]\np = [0.5, 0.5]\nk2 = [3.0, 3.0]\neta2 = [0.5, 0.6]\n");
    let o = qkelly(&["validate", "--config", &bad_eta]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("normalization"));
}

#[test]
fn usage_errors_exit_one() {
    let o = qkelly(&["figures", "--preset", "fig9"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("fig4a, fig4c"), "{}", stderr(&o));
    assert_eq!(qkelly(&["validate"]).status.code(), Some(1));
    assert_eq!(qkelly(&["bogus"]).status.code(), Some(1));
    assert_eq!(qkelly(&["validate", "--config", "/nonexistent/cfg.toml"]).status.code(), Some(1));
    assert_eq!(qkelly(&["--help"]).status.code(), Some(0));
}

#[test]
fn unwritable_output_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("occupied");
    std::fs::write(&file, "x").unwrap();
    let out = file.join("sub");
    let o = qkelly(&["simulate", "--preset", "fig5a", "--samples", "10", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
}

#[test]
fn csv_round_trip_is_exact() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let o = qkelly(&[
        "simulate",
        "--preset",
        "fig4a",
        "--samples",
        "40",
        "--steps",
        "30",
        "--seed",
        "5",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));

    let text = std::fs::read_to_string(out.join("trajectories.csv")).unwrap();
    assert_eq!(text.lines().next().unwrap(), format!("# {CSV_VERSION}"));

    let mut cfg = Preset::Fig4a.config().resolve().unwrap().game;
    cfg.n_samples = 40;
    cfg.t_max = 30;
    cfg.seed = 5;
    let game = Game::new(cfg).unwrap();
    let rows = read_trajectories_csv(&out.join("trajectories.csv")).unwrap();
    assert_eq!(rows.len(), 40 * 30);
    for row in &rows {
        let traj = simulate_trajectory(&game, row.sample_id).unwrap();
        let s = &traj.steps[row.t - 1];
        assert_eq!(row.winner, s.winner + 1);
        assert_eq!(row.log2_g_bar.to_bits(), s.log2_g.to_bits());
        assert_eq!(row.gamma_bar.to_bits(), s.gamma.to_bits());
        assert_eq!(row.e_bar.to_bits(), s.energy.to_bits());
        assert_eq!(row.ergotropy_bar.to_bits(), s.ergotropy.to_bits());
        assert_eq!(row.mu.map(f64::to_bits), s.mu.map(f64::to_bits));
        assert_eq!(row.r.to_bits(), s.r.to_bits());
    }

    let agg = read_aggregates_csv(&out.join("aggregates.csv")).unwrap();
    assert_eq!(agg.len(), 30);
    for a in &agg {
        assert_eq!(a.r_hist.len(), 100);
        assert_eq!(a.r_hist.iter().sum::<u64>(), 40);
        let mean = rows.iter().filter(|r| r.t == a.t).map(|r| r.r).sum::<f64>() / 40.0;
        assert!((a.mean_r.unwrap() - mean).abs() < 1e-14);
    }

    let meta: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("meta.json")).unwrap()).unwrap();
    assert_eq!(meta["seed"], 5);
    assert_eq!(meta["config"]["run"]["t_max"], 30);
    assert_eq!(meta["derived"]["fairness"], "super-fair");
}

#[test]
fn coherent_presets_have_unit_mu_column() {
    let dir = tempfile::tempdir().unwrap();
    for preset in ["fig5a", "fig5b", "fig5c", "fig5d"] {
        let out = dir.path().join(preset);
        let o = qkelly(&["simulate", "--preset", preset, "--samples", "50", "--out", out.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0));
        for row in read_trajectories_csv(&out.join("trajectories.csv")).unwrap() {
            assert_eq!(row.mu, Some(1.0));
        }
    }
}

#[test]
fn fig5a_mean_r_tracks_mean_field() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("fig5a");
    let o = qkelly(&["simulate", "--preset", "fig5a", "--no-trajectories", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let agg = read_aggregates_csv(&out.join("aggregates.csv")).unwrap();
    let last = agg.last().unwrap();
    assert_eq!(last.t, 100);
    assert!((last.mean_r.unwrap() - 0.862069).abs() < 0.05);
    assert!((last.mean_field_r.unwrap() - 50.0 / 58.0).abs() < 1e-3);
    assert!(!out.join("trajectories.csv").exists());
}

#[test]
fn json_format() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("json");
    let o = qkelly(&[
        "simulate",
        "--preset",
        "fig4a",
        "--samples",
        "5",
        "--steps",
        "3",
        "--format",
        "json",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("aggregates.json")).unwrap()).unwrap();
    assert_eq!(v["rows"].as_array().unwrap().len(), 3);
    let t: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("trajectories.json")).unwrap()).unwrap();
    assert_eq!(t["rows"].as_array().unwrap().len(), 15);
    assert!(!out.join("aggregates.csv").exists());
}

#[test]
fn moments_reports() {
    let o = qkelly(&["moments", "--preset", "fig4a", "--t", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("closed form 1.944444444444444"), "{out}");
    assert!(out.contains("t -> inf  3.5"), "{out}");
    assert!(out.contains("MISMATCH"));

    let dir = tempfile::tempdir().unwrap();
    let fair_kelly =
        write_config(dir.path(), "k.toml", "[game]\np = [0.7, 0.3]\nk2 = [2.0, 2.0]\n[input_state]\nm2 = 50.0\n");
    let o = qkelly(&["moments", "--config", &fair_kelly, "--t", "30"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("diverges linearly"), "{out}");
    assert!(out.contains("oracle skipped"), "{out}");
}

fn gap_of(out: &str) -> f64 {
    let line = out.lines().find(|l| l.starts_with("gap")).unwrap();
    line.split_whitespace().last().unwrap().parse().unwrap()
}

#[test]
fn optimize_reports_gap() {
    let o = qkelly(&["optimize", "--preset", "fig4c"]);
    assert!((gap_of(&stdout(&o)) - 0.244478).abs() < 1e-6);
    let o = qkelly(&["optimize", "--preset", "fig4a"]);
    assert!(gap_of(&stdout(&o)).abs() < 1e-12);
    let o = qkelly(&["optimize", "--preset", "fig8", "--grid", "100"]);
    let gap = gap_of(&stdout(&o));
    assert!(gap > 0.0 && gap < 1e-3, "{gap}");
}

#[test]
fn exact_writes_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("exact");
    let o = qkelly(&["exact", "--preset", "fig4a", "--t-enum", "6", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = std::fs::read_to_string(out.join("exact.csv")).unwrap();
    assert_eq!(text.lines().count(), 2 + 6);
    let o = qkelly(&["exact", "--preset", "fig4a", "--t-enum", "40", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn figures_sweep_and_horizons() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("fig6");
    let o = qkelly(&["figures", "--preset", "fig6", "--samples", "200", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = std::fs::read_to_string(out.join("fig6.csv")).unwrap();
    assert_eq!(text.lines().count(), 2 + 4 * 13);

    let out = dir.path().join("fig8");
    let o = qkelly(&["figures", "--preset", "fig8", "--samples", "100", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let agg = read_aggregates_csv(&out.join("aggregates.csv")).unwrap();
    assert_eq!(agg.last().unwrap().t, 250);
    assert!(out.join("mu_histogram.csv").exists());
}

//! Dataset files.
//!
//! Every CSV starts with a version comment line, then a header row. Floats
//! are written with 17 significant digits and re-parse to the same double.
//! Undefined values (`mu` for inputs without ergotropy) are empty fields.

use std::fs;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use qkelly_core::analysis::{mean_field_r, quantum_doubling_rate};
use qkelly_core::betting::Game;
use qkelly_core::engine::{ExactDistribution, Histogram, SampleBatch};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::config::{Format, ResolvedConfig};
use crate::error::CliError;

pub const CSV_VERSION: &str = "qkelly-csv v1";

pub const TRAJECTORY_COLUMNS: [&str; 9] =
    ["sample_id", "t", "winner", "log2_g_bar", "gamma_bar", "E_bar", "ergotropy_bar", "mu", "r"];

pub const AGGREGATE_COLUMNS: [&str; 7] = ["t", "mean_r", "std_r", "mean_mu", "std_mu", "mean_gamma", "mean_field_r"];

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

pub fn bin_columns(bins: usize) -> Vec<String> {
    (0..bins).map(|i| format!("bin_{i:03}")).collect()
}

fn create(path: &Path) -> Result<BufWriter<fs::File>, CliError> {
    fs::File::create(path).map(BufWriter::new).map_err(|e| CliError::io(path, e))
}

fn csv_writer<W: Write>(mut w: W) -> io::Result<csv::Writer<W>> {
    writeln!(w, "# {CSV_VERSION}")?;
    Ok(csv::Writer::from_writer(w))
}

fn finish<W: Write>(w: csv::Writer<W>) -> io::Result<()> {
    w.into_inner().map_err(|e| e.into_error())?.flush()
}

/// Opens a CSV written by this module, checking the version line.
pub fn csv_reader(path: &Path) -> Result<csv::Reader<BufReader<fs::File>>, CliError> {
    let file = fs::File::open(path).map_err(|e| CliError::io(path, e))?;
    let mut r = BufReader::new(file);
    let mut first = String::new();
    r.read_line(&mut first).map_err(|e| CliError::io(path, e))?;
    if first.trim_end() != format!("# {CSV_VERSION}") {
        return Err(CliError::Usage(format!(
            "{}: expected version line '# {CSV_VERSION}', found '{}'",
            path.display(),
            first.trim_end()
        )));
    }
    Ok(csv::Reader::from_reader(r))
}

pub fn write_trajectories_csv<W: Write>(w: W, batch: &SampleBatch) -> io::Result<()> {
    let mut w = csv_writer(w)?;
    w.write_record(TRAJECTORY_COLUMNS)?;
    for traj in &batch.trajectories {
        for (i, s) in traj.steps.iter().enumerate() {
            w.write_record([
                traj.sample_id.to_string(),
                (i + 1).to_string(),
                (s.winner + 1).to_string(),
                fmt_f64(s.log2_g),
                fmt_f64(s.gamma),
                fmt_f64(s.energy),
                fmt_f64(s.ergotropy),
                fmt_opt(s.mu),
                fmt_f64(s.r),
            ])?;
        }
    }
    finish(w)
}

/// One row of trajectories.csv. `winner` is 1-based.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRow {
    pub sample_id: u64,
    pub t: usize,
    pub winner: usize,
    pub log2_g_bar: f64,
    pub gamma_bar: f64,
    #[serde(rename = "E_bar")]
    pub e_bar: f64,
    pub ergotropy_bar: f64,
    pub mu: Option<f64>,
    pub r: f64,
}

pub fn read_trajectories_csv(path: &Path) -> Result<Vec<TrajectoryRow>, CliError> {
    Ok(csv_reader(path)?.deserialize().collect::<Result<_, _>>()?)
}

/// One row of aggregates.csv; `r_hist` holds the `bin_*` columns.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AggregateRow {
    pub t: usize,
    pub mean_r: Option<f64>,
    pub std_r: Option<f64>,
    pub mean_mu: Option<f64>,
    pub std_mu: Option<f64>,
    pub mean_gamma: Option<f64>,
    pub mean_field_r: Option<f64>,
    pub r_hist: Vec<u64>,
}

pub fn aggregate_rows(game: &Game, batch: &SampleBatch) -> Vec<AggregateRow> {
    batch
        .aggregates
        .iter()
        .map(|a| AggregateRow {
            t: a.t,
            mean_r: a.r.mean(),
            std_r: a.r.std(),
            mean_mu: a.mu.mean(),
            std_mu: a.mu.std(),
            mean_gamma: a.gamma.mean(),
            mean_field_r: mean_field_r(game, a.t).ok(),
            r_hist: a.r_hist.counts.clone(),
        })
        .collect()
}

pub fn write_aggregates_csv<W: Write>(w: W, rows: &[AggregateRow]) -> io::Result<()> {
    let bins = rows.first().map_or(0, |r| r.r_hist.len());
    let mut w = csv_writer(w)?;
    let header: Vec<String> = AGGREGATE_COLUMNS.iter().map(|s| s.to_string()).chain(bin_columns(bins)).collect();
    w.write_record(&header)?;
    for r in rows {
        let mut rec = vec![
            r.t.to_string(),
            fmt_opt(r.mean_r),
            fmt_opt(r.std_r),
            fmt_opt(r.mean_mu),
            fmt_opt(r.std_mu),
            fmt_opt(r.mean_gamma),
            fmt_opt(r.mean_field_r),
        ];
        rec.extend(r.r_hist.iter().map(u64::to_string));
        w.write_record(&rec)?;
    }
    finish(w)
}

pub fn read_aggregates_csv(path: &Path) -> Result<Vec<AggregateRow>, CliError> {
    let mut rdr = csv_reader(path)?;
    let header = rdr.headers()?.clone();
    let fixed = AGGREGATE_COLUMNS.len();
    for (i, name) in AGGREGATE_COLUMNS.iter().enumerate() {
        if header.get(i) != Some(name) {
            return Err(CliError::Usage(format!("{}: missing column {name}", path.display())));
        }
    }
    let bad = |what: &str| CliError::Usage(format!("{}: malformed {what}", path.display()));
    let num = |s: &str| -> Result<Option<f64>, CliError> {
        if s.is_empty() {
            Ok(None)
        } else {
            s.parse().map(Some).map_err(|_| bad("number"))
        }
    };
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        rows.push(AggregateRow {
            t: rec[0].parse().map_err(|_| bad("t"))?,
            mean_r: num(&rec[1])?,
            std_r: num(&rec[2])?,
            mean_mu: num(&rec[3])?,
            std_mu: num(&rec[4])?,
            mean_gamma: num(&rec[5])?,
            mean_field_r: num(&rec[6])?,
            r_hist: rec.iter().skip(fixed).map(|c| c.parse().map_err(|_| bad("bin"))).collect::<Result<_, _>>()?,
        });
    }
    Ok(rows)
}

/// Per-step histogram of one quantity, one row per `t`.
pub fn write_histogram_csv<'a, W: Write>(
    w: W,
    hists: impl IntoIterator<Item = (usize, &'a Histogram)>,
) -> io::Result<()> {
    let mut w = csv_writer(w)?;
    let mut header_written = false;
    for (t, h) in hists {
        if !header_written {
            let header: Vec<String> = std::iter::once("t".to_string()).chain(bin_columns(h.counts.len())).collect();
            w.write_record(&header)?;
            header_written = true;
        }
        let rec: Vec<String> = std::iter::once(t.to_string()).chain(h.counts.iter().map(u64::to_string)).collect();
        w.write_record(&rec)?;
    }
    finish(w)
}

/// Exact enumeration table, with the closed forms alongside.
pub fn write_exact_csv<W: Write>(w: W, game: &Game, dist: &ExactDistribution) -> io::Result<()> {
    use qkelly_core::analysis::{gamma_mean, gamma_second_moment_printed};
    let mut w = csv_writer(w)?;
    w.write_record([
        "t",
        "paths",
        "total_prob",
        "mean_gamma",
        "closed_form_gamma",
        "mean_gamma_sq",
        "printed_gamma_sq",
        "mean_r",
        "mean_mu",
    ])?;
    for l in &dist.levels {
        w.write_record([
            l.t.to_string(),
            l.paths.len().to_string(),
            fmt_f64(l.total_prob),
            fmt_f64(l.mean_gamma),
            fmt_f64(gamma_mean(game, l.t)),
            fmt_f64(l.mean_gamma_sq),
            fmt_f64(gamma_second_moment_printed(game, l.t)),
            fmt_f64(l.mean_r),
            fmt_opt(l.mean_mu),
        ])?;
    }
    finish(w)
}

/// One point of the ergotropy sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub family: &'static str,
    pub e0: f64,
    pub m2: f64,
    pub cosh2z: f64,
    pub t: usize,
    pub mean_mu: Option<f64>,
    pub std_mu: Option<f64>,
    pub mean_r: Option<f64>,
    pub std_r: Option<f64>,
}

pub fn write_sweep_csv<W: Write>(w: W, rows: &[SweepRow]) -> io::Result<()> {
    let mut w = csv_writer(w)?;
    w.write_record(["family", "E0", "m2", "cosh2z", "t", "mean_mu", "std_mu", "mean_r", "std_r"])?;
    for r in rows {
        w.write_record([
            r.family.to_string(),
            fmt_f64(r.e0),
            fmt_f64(r.m2),
            fmt_f64(r.cosh2z),
            r.t.to_string(),
            fmt_opt(r.mean_mu),
            fmt_opt(r.std_mu),
            fmt_opt(r.mean_r),
            fmt_opt(r.std_r),
        ])?;
    }
    finish(w)
}

/// Resolved configuration and derived facts. Holds nothing that depends on
/// the machine or the worker count.
pub fn meta(cfg: &ResolvedConfig, game: &Game, command: &str, preset: Option<&str>) -> serde_json::Value {
    let g = &cfg.game;
    let rate = quantum_doubling_rate(game);
    json!({
        "format": CSV_VERSION,
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "preset": preset,
        "seed": g.seed,
        "config": {
            "game": { "J": g.horses(), "p": g.p, "k2": g.k2, "eta2": g.eta2 },
            "input_state": {
                "mean": g.input.mean,
                "m2": g.input.m2(),
                "n": g.input.n,
                "zeta_abs": g.input.zeta_abs,
                "zeta_phase": g.input.zeta_phase,
                "cosh2z": g.input.cosh2z(),
            },
            "run": { "t_max": g.t_max, "n_samples": g.n_samples, "seed": g.seed, "t_enum": cfg.t_enum },
            "output": { "histogram_bins": cfg.bins, "gamma_max": cfg.gamma_max },
        },
        "derived": {
            "fairness": cfg.fairness.to_string(),
            "doubling_rate": rate.rate,
            "regime": rate.regime.to_string(),
            "energy0": game.energy0(),
            "ergotropy0": game.ergotropy0(),
            "r0": game.r0(),
        },
        "rng": "chacha8, stream = trajectory index, u = (x >> 11) * 2^-53",
        "histograms": "uniform bins over [0, 1], lower edge inclusive, last bin closed",
    })
}

pub fn write_json(path: &Path, value: &impl Serialize) -> Result<(), CliError> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| CliError::io(path, e.into()))?;
    writeln!(w).and_then(|_| w.flush()).map_err(|e| CliError::io(path, e))
}

/// Writes one file through `f`, mapping errors to the path.
pub fn write_with(path: &Path, f: impl FnOnce(&mut BufWriter<fs::File>) -> io::Result<()>) -> Result<(), CliError> {
    let mut w = create(path)?;
    f(&mut w).and_then(|_| w.flush()).map_err(|e| CliError::io(path, e))
}

pub fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

/// Writes the sampling outputs and returns the paths written.
pub fn write_batch(
    dir: &Path,
    cfg: &ResolvedConfig,
    game: &Game,
    batch: &SampleBatch,
    meta: &serde_json::Value,
) -> Result<Vec<PathBuf>, CliError> {
    ensure_dir(dir)?;
    let rows = aggregate_rows(game, batch);
    let mut written = Vec::new();
    for format in &cfg.formats {
        match format {
            Format::Csv => {
                if !batch.trajectories.is_empty() {
                    let p = dir.join("trajectories.csv");
                    write_with(&p, |w| write_trajectories_csv(w, batch))?;
                    written.push(p);
                }
                let p = dir.join("aggregates.csv");
                write_with(&p, |w| write_aggregates_csv(w, &rows))?;
                written.push(p);
                let p = dir.join("mu_histogram.csv");
                write_with(&p, |w| write_histogram_csv(w, batch.aggregates.iter().map(|a| (a.t, &a.mu_hist))))?;
                written.push(p);
            }
            Format::Json => {
                if !batch.trajectories.is_empty() {
                    let p = dir.join("trajectories.json");
                    let traj: Vec<TrajectoryRow> = trajectory_rows(batch).collect();
                    write_json(&p, &json!({ "format": "qkelly-json v1", "rows": traj }))?;
                    written.push(p);
                }
                let p = dir.join("aggregates.json");
                write_json(&p, &json!({ "format": "qkelly-json v1", "rows": rows }))?;
                written.push(p);
            }
        }
    }
    let p = dir.join("meta.json");
    write_json(&p, meta)?;
    written.push(p);
    Ok(written)
}

pub fn trajectory_rows(batch: &SampleBatch) -> impl Iterator<Item = TrajectoryRow> + '_ {
    batch.trajectories.iter().flat_map(|traj| {
        traj.steps.iter().enumerate().map(move |(i, s)| TrajectoryRow {
            sample_id: traj.sample_id,
            t: i + 1,
            winner: s.winner + 1,
            log2_g_bar: s.log2_g,
            gamma_bar: s.gamma,
            e_bar: s.energy,
            ergotropy_bar: s.ergotropy,
            mu: s.mu,
            r: s.r,
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits_round_trip() {
        for x in [0.1, 1.0 / 3.0, 0.862_068_965_517_241_4, 5e-324, 1.7976931348623157e308, -2.5e-7] {
            let s = fmt_f64(x);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits(), "{s}");
            let mantissa = s.split('e').next().unwrap().trim_start_matches('-');
            assert_eq!(mantissa.chars().filter(|c| c.is_ascii_digit()).count(), 17);
        }
        assert_eq!(fmt_opt(None), "");
    }

    #[test]
    fn bin_names() {
        let b = bin_columns(100);
        assert_eq!(b[0], "bin_000");
        assert_eq!(b[99], "bin_099");
    }
}

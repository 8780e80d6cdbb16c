//! Command-line front end for the quantum Kelly betting simulator: config
//! files, figure presets, parallel sampling and dataset files.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod output;
pub mod presets;
pub mod runner;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use qkelly_core::analysis::{
    gamma_mean, gamma_mean_limit, kelly_grid_check, kelly_optimize, moment_report, quantum_doubling_rate, Asymptote,
};
use qkelly_core::betting::{Game, GameConfig};
use qkelly_core::engine::{enumerate_exact, ENUMERATION_LIMIT};
use qkelly_core::gaussian::StateParams;

use config::{Format, ResolvedConfig, RunConfigFile};
use error::CliError;
use output::SweepRow;
use presets::{Family, Preset};

#[derive(Debug, Parser)]
#[command(name = "qkelly", version, about = "Quantum Kelly betting with Gaussian bosonic channels")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Run configuration file (TOML).
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Named figure preset, used instead of a config file.
    #[arg(long, global = true, value_name = "NAME")]
    pub preset: Option<Preset>,
    #[arg(long, global = true, value_name = "U64")]
    pub seed: Option<u64>,
    /// Number of sampled trajectories.
    #[arg(long, global = true, value_name = "N")]
    pub samples: Option<usize>,
    /// Number of rounds per trajectory.
    #[arg(long, global = true, value_name = "T")]
    pub steps: Option<usize>,
    /// Output directory.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Worker threads for sampling; defaults to the number of cores.
    #[arg(long, global = true, value_name = "N")]
    pub workers: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a configuration and print its fairness, doubling rate and r0.
    Validate,
    /// Sample trajectories and write trajectories, aggregates and metadata.
    Simulate {
        /// Write only aggregates, not per-trajectory rows.
        #[arg(long)]
        no_trajectories: bool,
    },
    /// Enumerate every trajectory up to a depth and tabulate exact moments.
    Exact {
        #[arg(long, value_name = "T")]
        t_enum: Option<usize>,
    },
    /// Closed-form moments of the accumulated noise, with the exact values.
    Moments {
        #[arg(long, value_name = "T")]
        t: Option<usize>,
        #[arg(long, value_name = "T")]
        t_enum: Option<usize>,
    },
    /// Kelly splitter and its doubling rate against the configured one.
    Optimize {
        /// Also scan a simplex grid with this many steps per axis.
        #[arg(long, value_name = "STEPS", default_value_t = 0)]
        grid: usize,
    },
    /// Run figure presets and write the datasets for plotting.
    Figures {
        /// Run every preset.
        #[arg(long)]
        all: bool,
        /// Also write per-trajectory rows.
        #[arg(long)]
        trajectories: bool,
    },
}

impl Cli {
    fn base_config(&self) -> Result<(RunConfigFile, Option<Preset>), CliError> {
        match (&self.config, self.preset) {
            (Some(_), Some(_)) => Err(CliError::Usage("give either --config or --preset, not both".into())),
            (Some(path), None) => Ok((RunConfigFile::load(path)?, None)),
            (None, Some(p)) => Ok((p.config(), Some(p))),
            (None, None) => Err(CliError::Usage("a configuration is required: --config PATH or --preset NAME".into())),
        }
    }

    fn apply_overrides(&self, mut file: RunConfigFile) -> RunConfigFile {
        if let Some(s) = self.seed {
            file.run.seed = Some(s);
        }
        if let Some(n) = self.samples {
            file.run.n_samples = Some(n);
        }
        if let Some(t) = self.steps {
            file.run.t_max = Some(t);
        }
        if let Some(o) = &self.out {
            file.output.directory = Some(o.clone());
        }
        if let Some(f) = self.format {
            file.output.formats = Some(vec![f]);
        }
        file
    }

    /// The resolved configuration after command-line overrides.
    pub fn resolve(&self) -> Result<(ResolvedConfig, Option<Preset>), CliError> {
        let (file, preset) = self.base_config()?;
        Ok((self.apply_overrides(file).resolve()?, preset))
    }
}

/// Runs one command and returns its report.
pub fn execute(cli: &Cli) -> Result<String, CliError> {
    match &cli.command {
        Command::Validate => validate(cli),
        Command::Simulate { no_trajectories } => simulate(cli, !no_trajectories),
        Command::Exact { t_enum } => exact(cli, *t_enum),
        Command::Moments { t, t_enum } => moments(cli, *t, *t_enum),
        Command::Optimize { grid } => optimize(cli, *grid),
        Command::Figures { all, trajectories } => figures(cli, *all, *trajectories),
    }
}

fn vec_str(v: &[f64]) -> String {
    let items: Vec<String> = v.iter().map(|x| format!("{x}")).collect();
    format!("({})", items.join(", "))
}

fn validate(cli: &Cli) -> Result<String, CliError> {
    let (cfg, _) = cli.resolve()?;
    let game = Game::new(cfg.game.clone())?;
    let rate = quantum_doubling_rate(&game);
    let mut s = String::new();
    writeln!(s, "{}, {}, G ≈ {:.6}", cfg.fairness, rate.regime, rate.rate).unwrap();
    writeln!(s, "horses            {}", game.horses().len()).unwrap();
    writeln!(s, "p                 {}", vec_str(&cfg.game.p)).unwrap();
    writeln!(s, "k^2               {}", vec_str(&cfg.game.k2)).unwrap();
    writeln!(s, "eta^2             {}", vec_str(&cfg.game.eta2)).unwrap();
    writeln!(s, "sum 1/k^2         {}", cfg.game.inverse_odds_sum()).unwrap();
    writeln!(s, "fairness          {}", cfg.fairness).unwrap();
    writeln!(s, "G                 {}", rate.rate).unwrap();
    writeln!(s, "regime            {}", rate.regime).unwrap();
    writeln!(s, "E[1/g^2]          {}", rate.inv_g2).unwrap();
    writeln!(s, "E[1/g^4]          {}", rate.inv_g4).unwrap();
    writeln!(s, "energy E0         {}", game.energy0()).unwrap();
    writeln!(s, "ergotropy         {}", game.ergotropy0()).unwrap();
    write!(s, "r0                {}", game.r0()).unwrap();
    Ok(s)
}

fn simulate(cli: &Cli, keep_trajectories: bool) -> Result<String, CliError> {
    let (cfg, preset) = cli.resolve()?;
    let game = Game::new(cfg.game.clone())?;
    let batch = runner::run_batch(&game, &cfg.sampler_options(keep_trajectories), cli.workers)?;
    let meta = output::meta(&cfg, &game, "simulate", preset.map(Preset::name));
    let written = output::write_batch(&cfg.directory, &cfg, &game, &batch, &meta)?;
    Ok(batch_summary(&cfg, &game, &batch, &written))
}

fn batch_summary(
    cfg: &ResolvedConfig,
    game: &Game,
    batch: &qkelly_core::engine::SampleBatch,
    written: &[PathBuf],
) -> String {
    let last = batch.at(batch.t_max).expect("non-empty batch");
    let mut s = String::new();
    writeln!(s, "{} trajectories of {} rounds, seed {}", batch.n_samples, batch.t_max, cfg.game.seed).unwrap();
    let opt = |x: Option<f64>| x.map_or("undefined".to_string(), |v| format!("{v:.6}"));
    writeln!(
        s,
        "t = {}: mean r = {}, mean mu = {}, mean gamma = {}",
        last.t,
        opt(last.r.mean()),
        opt(last.mu.mean()),
        opt(last.gamma.mean())
    )
    .unwrap();
    if let Ok(Some(r)) = qkelly_core::analysis::mean_field_r_limit(game) {
        writeln!(s, "mean-field r as t -> inf: {r:.6}").unwrap();
    }
    for p in written {
        writeln!(s, "wrote {}", p.display()).unwrap();
    }
    s.pop();
    s
}

fn enumeration_fits(horses: usize, t: usize) -> bool {
    (horses as f64).powi(t as i32) <= ENUMERATION_LIMIT as f64
}

fn exact(cli: &Cli, t_enum: Option<usize>) -> Result<String, CliError> {
    let (cfg, _) = cli.resolve()?;
    let game = Game::new(cfg.game.clone())?;
    let t_enum = t_enum.unwrap_or(cfg.t_enum);
    let dist = enumerate_exact(&game, t_enum)?;
    output::ensure_dir(&cfg.directory)?;
    let path = cfg.directory.join("exact.csv");
    output::write_with(&path, |w| output::write_exact_csv(w, &game, &dist))?;
    let mut s = String::new();
    writeln!(
        s,
        "{:>4} {:>22} {:>22} {:>22} {:>12}",
        "t", "E[gamma] exact", "E[gamma] closed", "E[gamma^2] exact", "E[r]"
    )
    .unwrap();
    for l in &dist.levels {
        writeln!(
            s,
            "{:>4} {:>22.15} {:>22.15} {:>22.15} {:>12.8}",
            l.t,
            l.mean_gamma,
            gamma_mean(&game, l.t),
            l.mean_gamma_sq,
            l.mean_r
        )
        .unwrap();
    }
    write!(s, "wrote {}", path.display()).unwrap();
    Ok(s)
}

fn describe_mean_limit(game: &Game) -> String {
    match gamma_mean_limit(game) {
        Asymptote::Finite(v) => format!("{v}"),
        Asymptote::Diverges => {
            let b = qkelly_core::analysis::MomentBlocks::new(game);
            if (b.inv_g2 - 1.0).abs() < qkelly_core::analysis::SINGULAR_TOL {
                "diverges linearly".to_string()
            } else {
                "diverges geometrically".to_string()
            }
        }
        Asymptote::Undefined => "undefined".to_string(),
    }
}

fn moments(cli: &Cli, t: Option<usize>, t_enum: Option<usize>) -> Result<String, CliError> {
    let (cfg, _) = cli.resolve()?;
    let game = Game::new(cfg.game.clone())?;
    let t_enum = t_enum.unwrap_or(cfg.t_enum);
    let t = t.unwrap_or(t_enum.max(1));
    if t == 0 {
        return Err(CliError::Usage("--t must be positive".into()));
    }
    let oracle =
        if t <= t_enum && enumeration_fits(game.horses().len(), t) { Some(enumerate_exact(&game, t)?) } else { None };
    let rep = moment_report(&game, t, oracle.as_ref());
    let b = rep.blocks;
    let skipped = || "skipped".to_string();
    let mut s = String::new();
    writeln!(s, "t = {t}").unwrap();
    writeln!(
        s,
        "E[1/g^2] = {}  E[1/g^4] = {}  E[alpha/g^2] = {}  E[alpha^2/g^4] = {}",
        b.inv_g2, b.inv_g4, b.alpha_g2, b.alpha2_g4
    )
    .unwrap();
    writeln!(
        s,
        "E[gamma_t]            closed form {}  oracle {}",
        rep.gamma_mean,
        rep.gamma_mean_oracle.map_or_else(skipped, |v| v.to_string())
    )
    .unwrap();
    writeln!(s, "E[gamma_t], t -> inf  {}", describe_mean_limit(&game)).unwrap();
    let sm = rep.second_moment;
    writeln!(
        s,
        "E[gamma_t^2]          as printed {}  oracle {}  relative gap {}{}",
        sm.printed,
        sm.oracle.map_or_else(skipped, |v| v.to_string()),
        sm.relative_discrepancy.map_or_else(skipped, |v| format!("{v:.3e}")),
        if sm.flagged { "  MISMATCH" } else { "" }
    )
    .unwrap();
    writeln!(s, "E[gamma_t^2], t -> inf as printed {}", sm.printed_limit).unwrap();
    let undefined = || "undefined".to_string();
    writeln!(s, "mean-field r_t        {}", rep.mean_field_r.map_or_else(undefined, |v| v.to_string())).unwrap();
    let limit = match (rep.mean_field_r_limit, gamma_mean_limit(&game)) {
        (Some(v), _) => v.to_string(),
        (None, Asymptote::Diverges) if game.ergotropy0() > 0.0 => "1 (E[gamma_t] diverges)".to_string(),
        _ => undefined(),
    };
    write!(s, "mean-field r, t -> inf {limit}").unwrap();
    Ok(s)
}

fn optimize(cli: &Cli, grid: usize) -> Result<String, CliError> {
    let (cfg, _) = cli.resolve()?;
    let g = &cfg.game;
    let eta = kelly_optimize(&g.p);
    let eta2: Vec<f64> = eta.iter().map(|e| e * e).collect();
    let best = qkelly_core::analysis::doubling_rate(&g.p, &g.k2, &eta2);
    let own = qkelly_core::analysis::doubling_rate(&g.p, &g.k2, &g.eta2);
    let mut s = String::new();
    writeln!(s, "kelly eta     {}", vec_str(&eta)).unwrap();
    writeln!(s, "kelly eta^2   {}", vec_str(&eta2)).unwrap();
    writeln!(s, "G*            {best}").unwrap();
    writeln!(s, "config eta^2  {}", vec_str(&g.eta2)).unwrap();
    writeln!(s, "G             {own}").unwrap();
    write!(s, "gap G* - G    {}", best - own).unwrap();
    if grid > 0 {
        let chk = kelly_grid_check(&g.p, &g.k2, grid);
        write!(
            s,
            "\ngrid          {} points, best G {} at eta^2 {}, max excess over G* {:.3e}",
            chk.points,
            chk.best_rate,
            vec_str(&chk.best_eta2),
            chk.max_excess
        )
        .unwrap();
    }
    Ok(s)
}

/// Asymptotic statistics of the ergotropy sweep: every family at every
/// initial ergotropy, sampled on the same races.
pub fn run_sweep(
    base: &GameConfig,
    ergotropies: &[f64],
    bins: usize,
    workers: Option<usize>,
) -> Result<Vec<SweepRow>, CliError> {
    let opts = qkelly_core::engine::SamplerOptions { bins, gamma_range: (0.0, 10.0), keep_trajectories: false };
    let mut rows = Vec::new();
    for family in Family::ALL {
        for &e0 in ergotropies {
            let (m2, cosh2z) = family.input(e0);
            let mut cfg = base.clone();
            cfg.input = StateParams::from_cosh(0.0, cosh2z, m2)?;
            let game = Game::new(cfg)?;
            let batch = runner::run_batch(&game, &opts, workers)?;
            let last = batch.at(batch.t_max).expect("non-empty batch");
            rows.push(SweepRow {
                family: family.name(),
                e0,
                m2,
                cosh2z,
                t: batch.t_max,
                mean_mu: last.mu.mean(),
                std_mu: last.mu.std(),
                mean_r: last.r.mean(),
                std_r: last.r.std(),
            });
        }
    }
    Ok(rows)
}

fn figures(cli: &Cli, all: bool, trajectories: bool) -> Result<String, CliError> {
    if cli.config.is_some() {
        return Err(CliError::Usage("figures takes --preset NAME or --all, not --config".into()));
    }
    let list: Vec<Preset> = match (all, cli.preset) {
        (true, None) => Preset::ALL.to_vec(),
        (false, Some(p)) => vec![p],
        (true, Some(_)) => return Err(CliError::Usage("give either --preset or --all".into())),
        (false, None) => {
            let names: Vec<_> = Preset::ALL.iter().map(|p| p.name()).collect();
            return Err(CliError::Usage(format!(
                "figures needs --preset NAME or --all; presets: {}",
                names.join(", ")
            )));
        }
    };
    let mut report = Vec::new();
    for preset in list {
        let mut file = preset.config();
        file.output.directory = None;
        let mut cfg = cli_overrides(cli).apply_overrides(file).resolve()?;
        cfg.directory = match (&cli.out, all) {
            (Some(dir), false) => dir.clone(),
            (Some(dir), true) => dir.join(preset.name()),
            (None, _) => Path::new("out").join(preset.name()),
        };
        eprintln!("running {preset}: {}", preset.description());
        report.push(run_figure(preset, &cfg, trajectories, cli.workers)?);
    }
    Ok(report.join("\n"))
}

fn cli_overrides(cli: &Cli) -> Cli {
    Cli {
        command: Command::Validate,
        config: None,
        preset: None,
        seed: cli.seed,
        samples: cli.samples,
        steps: cli.steps,
        out: None,
        format: cli.format,
        workers: cli.workers,
    }
}

/// Runs one preset into `cfg.directory`.
pub fn run_figure(
    preset: Preset,
    cfg: &ResolvedConfig,
    trajectories: bool,
    workers: Option<usize>,
) -> Result<String, CliError> {
    let game = Game::new(cfg.game.clone())?;
    let meta = output::meta(cfg, &game, "figures", Some(preset.name()));
    if preset == Preset::Fig6 {
        let rows = run_sweep(&cfg.game, &presets::sweep_ergotropies(), cfg.bins, workers)?;
        output::ensure_dir(&cfg.directory)?;
        let path = cfg.directory.join("fig6.csv");
        output::write_with(&path, |w| output::write_sweep_csv(w, &rows))?;
        let meta_path = cfg.directory.join("meta.json");
        output::write_json(&meta_path, &meta)?;
        return Ok(format!("{preset}: wrote {}\n{preset}: wrote {}", path.display(), meta_path.display()));
    }
    let batch = runner::run_batch(&game, &cfg.sampler_options(trajectories), workers)?;
    let written = output::write_batch(&cfg.directory, cfg, &game, &batch, &meta)?;
    Ok(batch_summary(cfg, &game, &batch, &written)
        .lines()
        .map(|l| format!("{preset}: {l}"))
        .collect::<Vec<_>>()
        .join("\n"))
}

//! Run configuration files.
//!
//! A run is described by a TOML document with four tables:
//!
//! ```toml
//! [game]
//! p = [0.7, 0.3]
//! k2 = [3.0, 3.0]        # or k = [...] amplitudes
//! eta2 = [0.7, 0.3]      # or eta = [...]; omitted means Kelly, eta2 = p
//! fairness_required = "any"   # "fair" | "super-fair" | "any"
//!
//! [input_state]
//! m2 = 0.0               # or mean = [x, y]
//! n = 0.0
//! cosh2z = 51.0          # or zeta_abs
//! zeta_phase = 0.0
//!
//! [run]
//! t_max = 100
//! n_samples = 10000
//! seed = 1
//! t_enum = 12
//!
//! [output]
//! directory = "out"
//! formats = ["csv"]
//! histogram_bins = 100
//! gamma_max = 10.0
//! ```
//!
//! Squared quantities are preferred because the game is parametrised by
//! `k²` and `η²`; amplitudes are squared on input.

use std::path::{Path, PathBuf};

use qkelly_core::betting::{Fairness, GameConfig};
use qkelly_core::engine::{SamplerOptions, DEFAULT_BINS, DEFAULT_T_ENUM};
use qkelly_core::gaussian::StateParams;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfigFile {
    #[serde(default)]
    pub game: GameSection,
    #[serde(default)]
    pub input_state: InputSection,
    #[serde(default)]
    pub run: RunSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameSection {
    /// Optional horse count, cross-checked against the vectors.
    #[serde(rename = "J", alias = "j", skip_serializing_if = "Option::is_none")]
    pub horses: Option<usize>,
    pub p: Option<Vec<f64>>,
    pub k: Option<Vec<f64>>,
    pub k2: Option<Vec<f64>>,
    pub eta: Option<Vec<f64>>,
    pub eta2: Option<Vec<f64>>,
    pub fairness_required: Option<FairnessRequirement>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FairnessRequirement {
    Fair,
    SuperFair,
    #[default]
    Any,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputSection {
    pub m2: Option<f64>,
    pub mean: Option<[f64; 2]>,
    pub n: Option<f64>,
    pub zeta_abs: Option<f64>,
    pub cosh2z: Option<f64>,
    pub zeta_phase: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub t_max: Option<usize>,
    pub n_samples: Option<usize>,
    pub seed: Option<u64>,
    pub t_enum: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub directory: Option<PathBuf>,
    pub formats: Option<Vec<Format>>,
    pub histogram_bins: Option<usize>,
    pub gamma_max: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// A configuration that passed every check.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedConfig {
    pub game: GameConfig,
    pub fairness: Fairness,
    pub t_enum: usize,
    pub directory: PathBuf,
    pub formats: Vec<Format>,
    pub bins: usize,
    pub gamma_max: f64,
}

impl ResolvedConfig {
    pub fn sampler_options(&self, keep_trajectories: bool) -> SamplerOptions {
        SamplerOptions { bins: self.bins, gamma_range: (0.0, self.gamma_max), keep_trajectories }
    }
}

pub const DEFAULT_T_MAX: usize = 100;
pub const DEFAULT_SAMPLES: usize = 10_000;
pub const DEFAULT_SEED: u64 = 1;
pub const DEFAULT_GAMMA_MAX: f64 = 10.0;

fn squares(
    errors: &mut Vec<String>,
    field: &str,
    squared: &Option<Vec<f64>>,
    plain: &Option<Vec<f64>>,
) -> Option<Vec<f64>> {
    match (squared, plain) {
        (Some(_), Some(_)) => {
            errors.push(format!("game.{field}2 and game.{field}: give only one of them"));
            None
        }
        (Some(v), None) => Some(v.clone()),
        (None, Some(v)) => Some(v.iter().map(|x| x * x).collect()),
        (None, None) => None,
    }
}

impl RunConfigFile {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(vec![format!("parse error: {e}")]))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(vec![format!("cannot read {}: {e}", path.display())]))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    /// Validates every field and builds the game, collecting all problems
    /// into a single report.
    pub fn resolve(&self) -> Result<ResolvedConfig, CliError> {
        let mut errors = Vec::new();
        let g = &self.game;
        let p = g.p.clone();
        if p.is_none() {
            errors.push("game.p: missing".to_string());
        }
        let k2 = squares(&mut errors, "k", &g.k2, &g.k);
        if k2.is_none() && g.k.is_none() && g.k2.is_none() {
            errors.push("game.k2: missing (or give game.k)".to_string());
        }
        let eta2 = squares(&mut errors, "eta", &g.eta2, &g.eta).or_else(|| p.clone());
        if let (Some(j), Some(p)) = (g.horses, &p) {
            if j != p.len() {
                errors.push(format!("game.J = {j} but game.p has {} entries", p.len()));
            }
        }

        let s = &self.input_state;
        if s.m2.is_some() && s.mean.is_some() {
            errors.push("input_state.m2 and input_state.mean: give only one of them".to_string());
        }
        if s.zeta_abs.is_some() && s.cosh2z.is_some() {
            errors.push("input_state.zeta_abs and input_state.cosh2z: give only one of them".to_string());
        }
        let mean = match (s.mean, s.m2) {
            (Some(m), _) => m,
            (None, Some(m2)) if m2 >= 0.0 => [m2.sqrt(), 0.0],
            (None, Some(m2)) => {
                errors.push(format!("input_state.m2 = {m2} must be non-negative"));
                [0.0, 0.0]
            }
            (None, None) => [0.0, 0.0],
        };
        let zeta_abs = match (s.zeta_abs, s.cosh2z) {
            (Some(z), _) => z,
            (None, Some(c)) if c >= 1.0 => c.acosh() / 2.0,
            (None, Some(c)) => {
                errors.push(format!("input_state.cosh2z = {c} must be at least 1"));
                0.0
            }
            (None, None) => 0.0,
        };
        let input = match StateParams::new(s.n.unwrap_or(0.0), zeta_abs, s.zeta_phase.unwrap_or(0.0), mean) {
            Ok(i) => Some(i),
            Err(e) => {
                errors.push(format!("input_state: {e}"));
                None
            }
        };

        let r = &self.run;
        let t_max = r.t_max.unwrap_or(DEFAULT_T_MAX);
        let n_samples = r.n_samples.unwrap_or(DEFAULT_SAMPLES);
        if t_max == 0 {
            errors.push("run.t_max must be positive".to_string());
        }
        if n_samples == 0 {
            errors.push("run.n_samples must be positive".to_string());
        }
        let o = &self.output;
        let bins = o.histogram_bins.unwrap_or(DEFAULT_BINS);
        if bins == 0 {
            errors.push("output.histogram_bins must be positive".to_string());
        }
        let gamma_max = o.gamma_max.unwrap_or(DEFAULT_GAMMA_MAX);
        if !(gamma_max > 0.0 && gamma_max.is_finite()) {
            errors.push(format!("output.gamma_max = {gamma_max} must be positive"));
        }

        let (Some(p), Some(k2), Some(eta2), Some(input)) = (p, k2, eta2, input) else {
            return Err(CliError::Config(errors));
        };
        let game = GameConfig { p, k2, eta2, input, t_max, n_samples, seed: r.seed.unwrap_or(DEFAULT_SEED) };
        let fairness = match game.validate() {
            Ok(f) => Some(f),
            Err(qkelly_core::Error::Config(items)) => {
                errors.extend(items.into_iter().map(|m| format!("game: {m}")));
                None
            }
            Err(e) => {
                errors.push(format!("game: {e}"));
                None
            }
        };
        if let Some(f) = fairness {
            match (g.fairness_required.unwrap_or_default(), f) {
                (FairnessRequirement::Fair, Fairness::SuperFair) => {
                    errors.push("game.fairness_required = fair but the odds are super-fair".to_string())
                }
                (FairnessRequirement::SuperFair, Fairness::Fair) => {
                    errors.push("game.fairness_required = super-fair but the odds are fair".to_string())
                }
                _ => {}
            }
        }
        if !errors.is_empty() {
            return Err(CliError::Config(errors));
        }
        Ok(ResolvedConfig {
            game,
            fairness: fairness.expect("checked above"),
            t_enum: r.t_enum.unwrap_or(DEFAULT_T_ENUM),
            directory: o.directory.clone().unwrap_or_else(|| PathBuf::from("out")),
            formats: o.formats.clone().unwrap_or_else(|| vec![Format::Csv]),
            bins,
            gamma_max,
        })
    }
}

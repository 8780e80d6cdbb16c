//! Configurations that reproduce the published figures.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::config::{GameSection, InputSection, OutputSection, RunConfigFile, RunSection};

/// Seed shared by every preset, so families of one sweep see the same races.
pub const PRESET_SEED: u64 = 20_250_101;
pub const PRESET_SAMPLES: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    Fig4a,
    Fig4c,
    Fig5a,
    Fig5b,
    Fig5c,
    Fig5d,
    Fig6,
    Fig7,
    Fig8,
}

impl Preset {
    pub const ALL: [Preset; 9] = [
        Preset::Fig4a,
        Preset::Fig4c,
        Preset::Fig5a,
        Preset::Fig5b,
        Preset::Fig5c,
        Preset::Fig5d,
        Preset::Fig6,
        Preset::Fig7,
        Preset::Fig8,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Fig4a => "fig4a",
            Preset::Fig4c => "fig4c",
            Preset::Fig5a => "fig5a",
            Preset::Fig5b => "fig5b",
            Preset::Fig5c => "fig5c",
            Preset::Fig5d => "fig5d",
            Preset::Fig6 => "fig6",
            Preset::Fig7 => "fig7",
            Preset::Fig8 => "fig8",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            Preset::Fig4a => "squeezed vacuum, Kelly betting, r and mu histograms",
            Preset::Fig4c => "squeezed vacuum, sub-optimal splitter",
            Preset::Fig5a => "coherent input, Kelly betting, J=2 k^2=3",
            Preset::Fig5b => "coherent input, Kelly betting, p=(0.6,0.4)",
            Preset::Fig5c => "coherent input, p=(0.7,0.3) with eta^2=(0.6,0.4)",
            Preset::Fig5d => "coherent input, p=(0.7,0.3) with eta^2=(0.3,0.7)",
            Preset::Fig6 => "asymptotic mu and r against initial ergotropy, four input families",
            Preset::Fig7 => "displaced thermal input, n=10",
            Preset::Fig8 => "fair odds k^2=2, slightly sub-optimal eta^2=(0.71,0.29)",
        }
    }

    /// Game and run settings. For the sweep this is the base game, with the
    /// input replaced per point.
    pub fn config(self) -> RunConfigFile {
        let (p, k2, eta2, input, t_max) = match self {
            Preset::Fig4a => (vec![0.7, 0.3], 3.0, None, squeezed(51.0), 100),
            Preset::Fig4c => (vec![0.7, 0.3], 3.0, Some(vec![0.3, 0.7]), squeezed(51.0), 150),
            Preset::Fig5a => (vec![0.7, 0.3], 3.0, None, coherent(50.0), 100),
            Preset::Fig5b => (vec![0.6, 0.4], 3.0, None, coherent(50.0), 100),
            Preset::Fig5c => (vec![0.7, 0.3], 3.0, Some(vec![0.6, 0.4]), coherent(50.0), 150),
            Preset::Fig5d => (vec![0.7, 0.3], 3.0, Some(vec![0.3, 0.7]), coherent(50.0), 150),
            Preset::Fig6 => (vec![0.7, 0.3], 3.0, None, coherent(100.0), 100),
            Preset::Fig7 => {
                (vec![0.7, 0.3], 3.0, None, InputSection { m2: Some(50.0), n: Some(10.0), ..Default::default() }, 100)
            }
            Preset::Fig8 => (vec![0.7, 0.3], 2.0, Some(vec![0.71, 0.29]), coherent(50.0), 250),
        };
        RunConfigFile {
            game: GameSection { k2: Some(vec![k2; p.len()]), p: Some(p), eta2, ..Default::default() },
            input_state: input,
            run: RunSection {
                t_max: Some(t_max),
                n_samples: Some(PRESET_SAMPLES),
                seed: Some(PRESET_SEED),
                t_enum: None,
            },
            output: OutputSection { directory: Some(format!("out/{}", self.name()).into()), ..Default::default() },
        }
    }
}

fn squeezed(cosh2z: f64) -> InputSection {
    InputSection { cosh2z: Some(cosh2z), ..Default::default() }
}

fn coherent(m2: f64) -> InputSection {
    InputSection { m2: Some(m2), ..Default::default() }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Preset::ALL.into_iter().find(|p| p.name().eq_ignore_ascii_case(s)).ok_or_else(|| {
            let names: Vec<_> = Preset::ALL.iter().map(|p| p.name()).collect();
            format!("unknown preset '{s}', expected one of {}", names.join(", "))
        })
    }
}

/// Input families compared in the ergotropy sweep. All are pure states.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Coherent,
    Squeezed,
    /// Three quarters of the ergotropy in the displacement.
    Mixed34,
    /// Seven eighths of the ergotropy in the displacement.
    Mixed78,
}

impl Family {
    pub const ALL: [Family; 4] = [Family::Coherent, Family::Squeezed, Family::Mixed34, Family::Mixed78];

    pub fn name(self) -> &'static str {
        match self {
            Family::Coherent => "coherent",
            Family::Squeezed => "squeezed",
            Family::Mixed34 => "m2=3E0/4",
            Family::Mixed78 => "m2=7E0/8",
        }
    }

    /// `(m², cosh 2|ζ|)` for a pure state with ergotropy `e0`.
    pub fn input(self, e0: f64) -> (f64, f64) {
        let m2 = match self {
            Family::Coherent => 2.0 * e0,
            Family::Squeezed => 0.0,
            Family::Mixed34 => 0.75 * e0,
            Family::Mixed78 => 0.875 * e0,
        };
        (m2, 1.0 + 2.0 * e0 - m2)
    }
}

/// Initial ergotropies of the sweep, `50·10^(k/4)` for `k = 0..=12`.
pub fn sweep_ergotropies() -> Vec<f64> {
    (0..=12).map(|k| 50.0 * 10f64.powf(k as f64 / 4.0)).collect()
}

//! The betting protocol.
//!
//! Each round the input mode is split over `J` horses with transmissivities
//! `η_j` (`Σ η_j² = 1`). Only the branch of the winning horse is kept and
//! amplified by its odds `k_j`, so winning horse `j` applies the gain channel
//! `Φ[g_j; α_j]` with
//!
//! ```text
//! g_j = k_j η_j,   α_j = (k_j²(1 − η_j²) + k_j² − 1) / 2.
//! ```
//!
//! After `t` rounds the composed channel is `Φ[ḡ_t; ᾱ_t]` with
//! `ḡ_t = Π g_{j_ℓ}` and `ᾱ_{t+1} = g²ᾱ_t + α`. Payoffs only depend on
//! `ḡ_t` and on the renormalised noise `γ̄_t = ᾱ_t / ḡ_t²`.
//!
//! Horses are indexed from zero.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::channels::GainChannel;
use crate::gaussian::{GaussianState, StateParams};
use crate::{Error, Result};

/// Tolerance on `Σp = 1`, `Ση² = 1` and on the fair-odds equality.
pub const NORMALIZATION_TOL: f64 = 1e-12;
/// Slack on `μ̄_t ≤ 1` and `r̄_t ≤ r₀`.
pub const BOUND_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fairness {
    /// `Σ 1/k_j² = 1`.
    Fair,
    /// `Σ 1/k_j² < 1`.
    SuperFair,
}

impl core::fmt::Display for Fairness {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(match self {
            Fairness::Fair => "fair",
            Fairness::SuperFair => "super-fair",
        })
    }
}

/// Raw game parameters. Odds and transmissivities are given squared.
#[derive(Debug, Clone, PartialEq)]
pub struct GameConfig {
    /// Win probabilities `p_j`.
    pub p: Vec<f64>,
    /// Squared odds amplitudes `k_j²`.
    pub k2: Vec<f64>,
    /// Squared transmissivities `η_j²`.
    pub eta2: Vec<f64>,
    pub input: StateParams,
    pub t_max: usize,
    pub n_samples: usize,
    pub seed: u64,
}

impl GameConfig {
    /// Kelly betting `η_j² = p_j`.
    pub fn kelly(p: Vec<f64>, k2: Vec<f64>, input: StateParams) -> Self {
        let eta2 = p.clone();
        GameConfig { p, k2, eta2, input, t_max: 100, n_samples: 10_000, seed: 0 }
    }

    pub fn horses(&self) -> usize {
        self.p.len()
    }

    /// Checks every constraint and reports all violations at once.
    pub fn validate(&self) -> Result<Fairness> {
        let mut problems: Vec<String> = Vec::new();
        let j = self.p.len();
        if j < 2 {
            problems.push(format!("at least two horses are required (J = {j})"));
        }
        if self.k2.len() != j || self.eta2.len() != j {
            problems.push(format!(
                "vector lengths differ: p has {j}, k has {}, eta has {}",
                self.k2.len(),
                self.eta2.len()
            ));
        }
        for (i, &p) in self.p.iter().enumerate() {
            if !(p > 0.0 && p <= 1.0) {
                problems.push(format!("p[{i}] = {p} must lie in (0, 1]"));
            }
        }
        let p_sum: f64 = self.p.iter().sum();
        if libm::fabs(p_sum - 1.0) > NORMALIZATION_TOL {
            problems.push(format!("probabilities sum to {p_sum}, expected 1"));
        }
        for (i, &e) in self.eta2.iter().enumerate() {
            if !(e > 0.0 && e < 1.0) {
                problems.push(format!("eta[{i}]^2 = {e} must lie in (0, 1)"));
            }
        }
        let eta_sum: f64 = self.eta2.iter().sum();
        if libm::fabs(eta_sum - 1.0) > NORMALIZATION_TOL {
            problems.push(format!("splitter normalization violated: sum of eta^2 = {eta_sum}, expected 1"));
        }
        for (i, &k) in self.k2.iter().enumerate() {
            if !(k > 1.0) || !k.is_finite() {
                problems.push(format!("k[{i}]^2 = {k} must exceed 1"));
            }
        }
        let inv_odds = self.inverse_odds_sum();
        if inv_odds > 1.0 + NORMALIZATION_TOL {
            problems.push(format!("unfair odds: sum of 1/k^2 = {inv_odds} > 1"));
        }
        if let Err(e) = self.input.to_state() {
            problems.push(format!("input state: {e}"));
        }
        if !problems.is_empty() {
            return Err(Error::Config(problems));
        }
        Ok(if libm::fabs(inv_odds - 1.0) <= NORMALIZATION_TOL { Fairness::Fair } else { Fairness::SuperFair })
    }

    pub fn inverse_odds_sum(&self) -> f64 {
        self.k2.iter().map(|k| 1.0 / k).sum()
    }
}

/// Gain channel applied when horse `index` wins.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HorseChannel {
    pub index: usize,
    pub g: f64,
    pub g2: f64,
    pub alpha: f64,
    pub log2_g: f64,
}

impl HorseChannel {
    pub fn new(index: usize, k2: f64, eta2: f64) -> Self {
        let g2 = k2 * eta2;
        HorseChannel {
            index,
            g: libm::sqrt(g2),
            g2,
            alpha: (k2 * (1.0 - eta2) + k2 - 1.0) / 2.0,
            log2_g: libm::log2(g2) / 2.0,
        }
    }

    pub fn as_gain(&self) -> GainChannel {
        // alpha_j >= |g_j^2 - 1| / 2 holds for every admissible (k, eta).
        GainChannel::new(self.g, self.alpha).expect("horse channel is CPTP")
    }
}

/// A validated game with its derived per-horse channels and input data.
#[derive(Debug, Clone)]
pub struct Game {
    config: GameConfig,
    fairness: Fairness,
    horses: Vec<HorseChannel>,
    cumulative: Vec<f64>,
    input_state: GaussianState,
    energy0: f64,
    ergotropy0: f64,
}

impl Game {
    pub fn new(config: GameConfig) -> Result<Self> {
        let fairness = config.validate()?;
        let horses = config
            .k2
            .iter()
            .zip(&config.eta2)
            .enumerate()
            .map(|(j, (&k2, &eta2))| HorseChannel::new(j, k2, eta2))
            .collect();
        let mut acc = 0.0;
        let cumulative = config
            .p
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        let input_state = config.input.to_state()?;
        let energy0 = config.input.energy();
        let ergotropy0 = config.input.ergotropy();
        Ok(Game { config, fairness, horses, cumulative, input_state, energy0, ergotropy0 })
    }

    pub fn config(&self) -> &GameConfig {
        &self.config
    }

    pub fn fairness(&self) -> Fairness {
        self.fairness
    }

    pub fn horses(&self) -> &[HorseChannel] {
        &self.horses
    }

    pub fn horse(&self, j: usize) -> Result<&HorseChannel> {
        self.horses.get(j).ok_or(Error::HorseIndex { index: j, horses: self.horses.len() })
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.config.p
    }

    pub fn input_state(&self) -> &GaussianState {
        &self.input_state
    }

    /// `E₀`.
    pub fn energy0(&self) -> f64 {
        self.energy0
    }

    /// `ℰ₀`, the capital put into the game.
    pub fn ergotropy0(&self) -> f64 {
        self.ergotropy0
    }

    /// `r₀ = ℰ₀ / E₀`.
    pub fn r0(&self) -> f64 {
        self.ergotropy0 / self.energy0
    }

    /// Maps a uniform variate in `[0, 1)` to a horse by inverse CDF over the
    /// cumulative probabilities in index order. A variate equal to a
    /// boundary goes to the lower index.
    pub fn draw_winner(&self, u: f64) -> usize {
        self.cumulative.iter().position(|&c| u <= c).unwrap_or(self.cumulative.len() - 1)
    }

    pub fn payoff(&self, state: &TrajectoryState) -> Result<PayoffRecord> {
        let input = &self.config.input;
        let z = input.noise_factor();
        let gamma = state.gamma_bar;
        let gamma_cap = gamma / z;
        let g2 = state.g_bar2();

        // 1 + 4Γc + 4Γ² = A² + B with A = 1 + 2Γ, B = 4Γ(c − 1) ≥ 0.
        let a = 1.0 + 2.0 * gamma_cap;
        let b = 4.0 * gamma_cap * input.cosh2z_minus_one();
        let root = libm::sqrt(a * a + b);
        let delta = z / 2.0 * (b / (root + a));

        let energy = g2 * (self.energy0 + gamma);
        let n_bar = g2 * z * root / 2.0 - 0.5;
        let ergotropy = g2 * (self.ergotropy0 - delta);
        let (mu, r) = if self.ergotropy0 > 0.0 {
            (Some(1.0 - delta / self.ergotropy0), (self.ergotropy0 - delta) / (self.energy0 + gamma))
        } else {
            (None, 0.0)
        };

        if !r.is_finite() || mu.is_some_and(|m| !m.is_finite()) {
            return Err(Error::Invariant(format!("non-finite figure of merit at t = {}", state.t)));
        }
        if let Some(mu) = mu {
            if mu > 1.0 + BOUND_TOL {
                return Err(Error::Invariant(format!("mu = {mu} exceeds 1 at t = {}", state.t)));
            }
        }
        let r0 = self.r0();
        if r > r0 + BOUND_TOL {
            return Err(Error::Invariant(format!("r = {r} exceeds r0 = {r0} at t = {}", state.t)));
        }
        Ok(PayoffRecord { energy, n_bar, ergotropy, delta, gamma_cap, mu, r })
    }

    /// `(μ̄_t, r̄_t)`; undefined when the input carries no ergotropy.
    pub fn figures_of_merit(&self, payoff: &PayoffRecord) -> Result<(f64, f64)> {
        payoff.mu.map(|mu| (mu, payoff.r)).ok_or(Error::UndefinedMu)
    }

    /// Expected energy over all trajectories of length `t`.
    ///
    /// Energy is linear in the state, so it follows
    /// `E[Ē_t] = E[g²] E[Ē_{t−1}] + E[α]`.
    pub fn average_energy_expectation(&self, t: usize) -> f64 {
        let (mut slope, mut intercept) = (0.0, 0.0);
        for (h, p) in self.horses.iter().zip(&self.config.p) {
            slope += p * h.g2;
            intercept += p * h.alpha;
        }
        (0..t).fold(self.energy0, |e, _| slope * e + intercept)
    }
}

/// Running `(ḡ_t, ᾱ_t, γ̄_t)` of a trajectory.
///
/// `ḡ_t` is held as `log₂ ḡ_t` because it grows like `2^{Gt}`. `γ̄_t` is
/// accumulated term by term as `Σ α_{j_ℓ} / ḡ_ℓ²`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TrajectoryState {
    pub t: usize,
    pub log2_g: f64,
    pub alpha_bar: f64,
    pub gamma_bar: f64,
}

impl TrajectoryState {
    pub fn new() -> Self {
        Self::default()
    }

    #[must_use]
    pub fn step(self, horse: &HorseChannel) -> Self {
        let log2_g = self.log2_g + horse.log2_g;
        TrajectoryState {
            t: self.t + 1,
            log2_g,
            alpha_bar: horse.g2 * self.alpha_bar + horse.alpha,
            gamma_bar: self.gamma_bar + horse.alpha * libm::exp2(-2.0 * log2_g),
        }
    }

    pub fn g_bar(&self) -> f64 {
        libm::exp2(self.log2_g)
    }

    pub fn g_bar2(&self) -> f64 {
        libm::exp2(2.0 * self.log2_g)
    }

    /// The accumulated channel `Φ[ḡ_t; ᾱ_t]`.
    pub fn channel(&self) -> Result<GainChannel> {
        GainChannel::new(self.g_bar(), self.alpha_bar)
    }
}

/// A trajectory together with its winner history.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrajectoryRecord {
    pub winners: Vec<usize>,
    pub state: TrajectoryState,
}

impl TrajectoryRecord {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_winners(game: &Game, winners: &[usize]) -> Result<Self> {
        let mut rec = TrajectoryRecord::new();
        for &w in winners {
            rec.push(game, w)?;
        }
        Ok(rec)
    }

    /// Returns the trajectory extended by one round won by `winner`.
    pub fn step(&self, game: &Game, winner: usize) -> Result<Self> {
        let mut next = self.clone();
        next.push(game, winner)?;
        Ok(next)
    }

    pub fn push(&mut self, game: &Game, winner: usize) -> Result<()> {
        let horse = game.horse(winner)?;
        self.state = self.state.step(horse);
        self.winners.push(winner);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.winners.len()
    }

    pub fn is_empty(&self) -> bool {
        self.winners.is_empty()
    }

    /// `ᾱ_t = ḡ_t² Σ_ℓ α_{j_ℓ}/ḡ_ℓ²` with the partial products multiplied
    /// out directly rather than through the recursion.
    pub fn alpha_bar_closed_form(&self, game: &Game) -> f64 {
        let mut g2_partial = 1.0;
        let mut sum = 0.0;
        for &w in &self.winners {
            let h = &game.horses()[w];
            g2_partial *= h.g2;
            sum += h.alpha / g2_partial;
        }
        g2_partial * sum
    }
}

/// Payoff quantities after `t` rounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PayoffRecord {
    /// `Ē_t = ḡ_t²(E₀ + γ̄_t)`.
    pub energy: f64,
    /// Thermal photon number `n̄_t` of the output state.
    pub n_bar: f64,
    /// `ℰ̄_t = ḡ_t²(ℰ₀ − Δ̄_t)`.
    pub ergotropy: f64,
    pub delta: f64,
    /// `Γ̄_t = γ̄_t / (2n+1)`.
    pub gamma_cap: f64,
    /// `μ̄_t`, `None` for inputs without ergotropy.
    pub mu: Option<f64>,
    /// `r̄_t = ℰ̄_t / Ē_t`.
    pub r: f64,
}

impl PayoffRecord {
    /// `Ē_t − n̄_t − ½`.
    pub fn ergotropy_from_energy(&self) -> f64 {
        self.energy - self.n_bar - 0.5
    }
}

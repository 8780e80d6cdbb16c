//! Closed-form analysis of the betting game.
//!
//! The noise recursion `ᾱ_{t+1} = g² ᾱ_t + α` is an iterated random affine
//! map with slopes `g_j²` and intercepts `α_j`. Whether it expands or
//! contracts on average is decided by the doubling rate
//! `G = Σ p_j log₂ g_j`. Kelly betting `η_j² = p_j` maximises `G`.
//!
//! The renormalised noise `γ̄_t = ᾱ_t / ḡ_t²` has closed-form moments built
//! from four expectations over a single round:
//! `E[1/g²]`, `E[1/g⁴]`, `E[α/g²]` and `E[α²/g⁴]`.

use alloc::vec::Vec;

use crate::betting::Game;
use crate::engine::{ExactDistribution, SampleBatch};
use crate::{Error, Result};

/// `|G|` at or below this is classified as marginal.
pub const MARGINAL_TOL: f64 = 1e-12;
/// Distance from a singular point of the moment formulas at which the
/// limit branches take over.
pub const SINGULAR_TOL: f64 = 1e-12;
/// Relative gap above which a printed moment formula is flagged against the
/// enumeration oracle.
pub const DISCREPANCY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassicalDoublingRate {
    /// `W(b) = Σ p_j log₂(o_j b_j)`; `−∞` if a winning outcome gets no bet.
    pub rate: f64,
    /// `W* = Σ p_j log₂ o_j − H(p)`, attained at `b = p`.
    pub optimum: f64,
    /// Shannon entropy `H(p)` in bits.
    pub entropy: f64,
}

fn check_simplex(what: &'static str, v: &[f64]) -> Result<()> {
    let sum: f64 = v.iter().sum();
    if v.iter().any(|&x| !(x >= 0.0)) || libm::fabs(sum - 1.0) > 1e-12 {
        return Err(Error::Domain { what, value: sum });
    }
    Ok(())
}

/// Doubling rate of classical horse-race betting with fractions `b`, odds
/// `o` and probabilities `p`.
pub fn classical_doubling_rate(b: &[f64], o: &[f64], p: &[f64]) -> Result<ClassicalDoublingRate> {
    if b.len() != p.len() || o.len() != p.len() {
        return Err(Error::Domain { what: "vector length", value: b.len() as f64 });
    }
    check_simplex("betting fractions", b)?;
    check_simplex("probabilities", p)?;
    if let Some(&bad) = o.iter().find(|&&x| !(x > 0.0)) {
        return Err(Error::Domain { what: "odds", value: bad });
    }
    let mut rate = 0.0;
    let mut optimum = 0.0;
    let mut entropy = 0.0;
    for ((&bj, &oj), &pj) in b.iter().zip(o).zip(p) {
        if pj == 0.0 {
            continue;
        }
        rate += if bj == 0.0 { f64::NEG_INFINITY } else { pj * libm::log2(oj * bj) };
        optimum += pj * libm::log2(oj);
        entropy -= pj * libm::log2(pj);
    }
    Ok(ClassicalDoublingRate { rate, optimum: optimum - entropy, entropy })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// `G > 0`: `ḡ_t` diverges almost surely.
    Expanding,
    /// `G < 0`: `ḡ_t → 0` almost surely.
    Contracting,
    Marginal,
}

impl core::fmt::Display for Regime {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(match self {
            Regime::Expanding => "expanding",
            Regime::Contracting => "contracting",
            Regime::Marginal => "marginal",
        })
    }
}

/// `x ↦ slope · x + intercept`, one branch of the random map driving `ᾱ_t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineMap {
    pub slope: f64,
    pub intercept: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegimeReport {
    /// `G = Σ p_j log₂(k_j η_j)`.
    pub rate: f64,
    pub regime: Regime,
    pub inv_g2: f64,
    pub inv_g4: f64,
    /// `E[1/g²] < 1`: `E[γ̄_t]` stays bounded.
    pub first_moment_bounded: bool,
    /// `E[1/g⁴] < 1`: `E[γ̄_t²]` stays bounded.
    pub second_moment_bounded: bool,
    pub maps: Vec<AffineMap>,
}

/// `G` for squared odds `k2` and squared transmissivities `eta2`.
pub fn doubling_rate(p: &[f64], k2: &[f64], eta2: &[f64]) -> f64 {
    p.iter()
        .zip(k2.iter().zip(eta2))
        .map(|(&pj, (&k, &e))| if pj == 0.0 { 0.0 } else { pj * libm::log2(k * e) / 2.0 })
        .sum()
}

pub fn classify(rate: f64) -> Regime {
    if libm::fabs(rate) <= MARGINAL_TOL {
        Regime::Marginal
    } else if rate > 0.0 {
        Regime::Expanding
    } else {
        Regime::Contracting
    }
}

pub fn quantum_doubling_rate(game: &Game) -> RegimeReport {
    let cfg = game.config();
    let rate = doubling_rate(&cfg.p, &cfg.k2, &cfg.eta2);
    let blocks = MomentBlocks::new(game);
    RegimeReport {
        rate,
        regime: classify(rate),
        inv_g2: blocks.inv_g2,
        inv_g4: blocks.inv_g4,
        first_moment_bounded: blocks.inv_g2 < 1.0,
        second_moment_bounded: blocks.inv_g4 < 1.0,
        maps: game.horses().iter().map(|h| AffineMap { slope: h.g2, intercept: h.alpha }).collect(),
    }
}

/// Kelly splitting `η_j = √p_j`.
pub fn kelly_optimize(p: &[f64]) -> Vec<f64> {
    p.iter().map(|&x| libm::sqrt(x)).collect()
}

/// All points of the simplex `{w ∈ ℝᴶ : w ≥ 0, Σw = 1}` on a grid of
/// `1/steps`.
pub fn simplex_grid(horses: usize, steps: usize) -> Vec<Vec<f64>> {
    fn fill(remaining: usize, left: usize, steps: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<f64>>) {
        if left == 1 {
            prefix.push(remaining);
            out.push(prefix.iter().map(|&c| c as f64 / steps as f64).collect());
            prefix.pop();
            return;
        }
        for c in 0..=remaining {
            prefix.push(c);
            fill(remaining - c, left - 1, steps, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if horses > 0 {
        fill(steps, horses, steps, &mut Vec::with_capacity(horses), &mut out);
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct KellyGridCheck {
    pub kelly_rate: f64,
    pub best_rate: f64,
    pub best_eta2: Vec<f64>,
    pub points: usize,
    /// `max_grid G − G(η² = p)`; never above ~1e-12 if Kelly is optimal.
    pub max_excess: f64,
}

/// Exhaustive grid search of `G` over `η²` on the simplex.
pub fn kelly_grid_check(p: &[f64], k2: &[f64], steps: usize) -> KellyGridCheck {
    let kelly_rate = doubling_rate(p, k2, p);
    let mut best_rate = f64::NEG_INFINITY;
    let mut best_eta2 = Vec::new();
    let grid = simplex_grid(p.len(), steps);
    for eta2 in &grid {
        let g = doubling_rate(p, k2, eta2);
        if g > best_rate {
            best_rate = g;
            best_eta2.clone_from(eta2);
        }
    }
    KellyGridCheck { kelly_rate, best_rate, best_eta2, points: grid.len(), max_excess: best_rate - kelly_rate }
}

/// Single-round expectations the moment formulas are built from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentBlocks {
    /// `E[1/g²]`
    pub inv_g2: f64,
    /// `E[1/g⁴]`
    pub inv_g4: f64,
    /// `E[α/g²]`
    pub alpha_g2: f64,
    /// `E[α²/g⁴]`
    pub alpha2_g4: f64,
}

impl MomentBlocks {
    pub fn new(game: &Game) -> Self {
        let mut b = MomentBlocks { inv_g2: 0.0, inv_g4: 0.0, alpha_g2: 0.0, alpha2_g4: 0.0 };
        for (h, &p) in game.horses().iter().zip(game.probabilities()) {
            let inv = 1.0 / h.g2;
            b.inv_g2 += p * inv;
            b.inv_g4 += p * inv * inv;
            b.alpha_g2 += p * h.alpha * inv;
            b.alpha2_g4 += p * h.alpha * h.alpha * inv * inv;
        }
        b
    }
}

/// `Σ_{k=0}^{t−1} xᵏ = (1 − xᵗ)/(1 − x)`, or `t` at `x = 1`.
fn geometric_sum(x: f64, t: usize) -> f64 {
    if libm::fabs(1.0 - x) < SINGULAR_TOL {
        t as f64
    } else {
        (1.0 - libm::pow(x, t as f64)) / (1.0 - x)
    }
}

/// `(S(a) − S(b)) / (a − b)` with `S` the geometric sum, continued by its
/// derivative `Σ k a^{k−1}` when `a = b`.
fn geometric_divided_difference(a: f64, b: f64, t: usize) -> f64 {
    if libm::fabs(a - b) < SINGULAR_TOL {
        let mut acc = 0.0;
        let mut pow = 1.0;
        for k in 1..t {
            acc += k as f64 * pow;
            pow *= a;
        }
        acc
    } else {
        (geometric_sum(a, t) - geometric_sum(b, t)) / (a - b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Asymptote {
    Finite(f64),
    /// The moment grows without bound.
    Diverges,
    /// The closed form has no limit under its stated assumptions.
    Undefined,
}

impl core::fmt::Display for Asymptote {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Asymptote::Finite(v) => write!(f, "{v}"),
            Asymptote::Diverges => f.write_str("diverges"),
            Asymptote::Undefined => f.write_str("undefined"),
        }
    }
}

/// `E[γ̄_t] = E[α/g²] (1 − E[1/g²]ᵗ)/(1 − E[1/g²])`, linear in `t` when
/// `E[1/g²] = 1`.
pub fn gamma_mean(game: &Game, t: usize) -> f64 {
    let b = MomentBlocks::new(game);
    b.alpha_g2 * geometric_sum(b.inv_g2, t)
}

pub fn gamma_mean_limit(game: &Game) -> Asymptote {
    let b = MomentBlocks::new(game);
    if b.inv_g2 < 1.0 - SINGULAR_TOL {
        Asymptote::Finite(b.alpha_g2 / (1.0 - b.inv_g2))
    } else {
        Asymptote::Diverges
    }
}

/// Second moment of `γ̄_t` from the closed form exactly as it is usually
/// quoted:
///
/// ```text
/// E[α²/g⁴] S(E[1/g⁴]) − (S(E[1/g²]) − S(E[1/g⁴])) / (E[1/g²] − E[1/g⁴])
/// ```
///
/// with `S(x) = (1 − xᵗ)/(1 − x)`. It agrees with the exact value at
/// `t = 1` only; see [`gamma_second_moment`] for the audited comparison.
pub fn gamma_second_moment_printed(game: &Game, t: usize) -> f64 {
    let b = MomentBlocks::new(game);
    b.alpha2_g4 * geometric_sum(b.inv_g4, t) - geometric_divided_difference(b.inv_g2, b.inv_g4, t)
}

/// Limit of [`gamma_second_moment_printed`] as `t → ∞`, defined only when
/// `E[1/g²] < 1`, `E[1/g⁴] < 1` and `E[1/g²] ≠ E[1/g⁴]`.
pub fn gamma_second_moment_printed_limit(game: &Game) -> Asymptote {
    let b = MomentBlocks::new(game);
    let ok = b.inv_g2 < 1.0 - SINGULAR_TOL
        && b.inv_g4 < 1.0 - SINGULAR_TOL
        && libm::fabs(b.inv_g2 - b.inv_g4) >= SINGULAR_TOL;
    if !ok {
        return Asymptote::Undefined;
    }
    let tail = (1.0 / (1.0 - b.inv_g2) - 1.0 / (1.0 - b.inv_g4)) / (b.inv_g2 - b.inv_g4);
    Asymptote::Finite(b.alpha2_g4 / (1.0 - b.inv_g4) - tail)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecondMomentAudit {
    pub t: usize,
    pub printed: f64,
    /// Exact value from enumeration; authoritative when present.
    pub oracle: Option<f64>,
    pub relative_discrepancy: Option<f64>,
    pub flagged: bool,
    pub printed_limit: Asymptote,
}

/// Evaluates the quoted closed form and, when the enumeration reaches `t`,
/// the exact value, flagging any relative gap above [`DISCREPANCY_TOL`].
pub fn gamma_second_moment(game: &Game, t: usize, oracle: Option<&ExactDistribution>) -> SecondMomentAudit {
    let printed = gamma_second_moment_printed(game, t);
    let oracle = oracle.and_then(|d| d.at(t)).map(|l| l.mean_gamma_sq);
    let relative_discrepancy = oracle.map(|o| libm::fabs(printed - o) / libm::fmax(libm::fabs(o), f64::MIN_POSITIVE));
    SecondMomentAudit {
        t,
        printed,
        oracle,
        relative_discrepancy,
        flagged: relative_discrepancy.is_some_and(|d| d > DISCREPANCY_TOL),
        printed_limit: gamma_second_moment_printed_limit(game),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanFieldParams {
    pub cosh2z: f64,
    /// `F = m²/(2n+1)`.
    pub f: f64,
    /// `E[Γ̄_t] = E[γ̄_t]/(2n+1)`.
    pub e_gamma_cap: f64,
    /// `r̃_t`.
    pub r_tilde: f64,
}

fn mean_field_from(game: &Game, e_gamma: f64) -> Result<MeanFieldParams> {
    if !(game.ergotropy0() > 0.0) {
        return Err(Error::UndefinedMu);
    }
    let input = &game.config().input;
    let z = input.noise_factor();
    let c = input.cosh2z();
    let f = input.m2() / z;
    let g = e_gamma / z;
    let r_tilde = 1.0 - libm::sqrt(1.0 + 4.0 * g * c + 4.0 * g * g) / (c + 2.0 * g + f);
    Ok(MeanFieldParams { cosh2z: c, f, e_gamma_cap: g, r_tilde })
}

/// Mean-field ratio: `r̄_t` with `Γ̄_t` replaced by its expectation,
///
/// ```text
/// r̃_t = 1 − √(1 + 4E[Γ̄_t] cosh 2|ζ| + 4E[Γ̄_t]²) / (cosh 2|ζ| + 2E[Γ̄_t] + F).
/// ```
pub fn mean_field(game: &Game, t: usize) -> Result<MeanFieldParams> {
    mean_field_from(game, gamma_mean(game, t))
}

pub fn mean_field_r(game: &Game, t: usize) -> Result<f64> {
    mean_field(game, t).map(|m| m.r_tilde)
}

/// `r̃_∞`, or `None` if `E[γ̄_t]` diverges.
pub fn mean_field_r_limit(game: &Game) -> Result<Option<f64>> {
    match gamma_mean_limit(game) {
        Asymptote::Finite(g) => mean_field_from(game, g).map(|m| Some(m.r_tilde)),
        _ if game.ergotropy0() > 0.0 => Ok(None),
        _ => Err(Error::UndefinedMu),
    }
}

/// Everything known in closed form about `γ̄_t` at one horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentReport {
    pub t: usize,
    pub blocks: MomentBlocks,
    pub gamma_mean: f64,
    pub gamma_mean_oracle: Option<f64>,
    pub gamma_mean_limit: Asymptote,
    pub second_moment: SecondMomentAudit,
    /// `None` when the input has no ergotropy.
    pub mean_field_r: Option<f64>,
    pub mean_field_r_limit: Option<f64>,
}

pub fn moment_report(game: &Game, t: usize, oracle: Option<&ExactDistribution>) -> MomentReport {
    MomentReport {
        t,
        blocks: MomentBlocks::new(game),
        gamma_mean: gamma_mean(game, t),
        gamma_mean_oracle: oracle.and_then(|d| d.at(t)).map(|l| l.mean_gamma),
        gamma_mean_limit: gamma_mean_limit(game),
        second_moment: gamma_second_moment(game, t, oracle),
        mean_field_r: mean_field_r(game, t).ok(),
        mean_field_r_limit: mean_field_r_limit(game).ok().flatten(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LlnReport {
    pub t: usize,
    pub samples: u64,
    /// Sample mean of `log₂(ḡ_t)/t`.
    pub mean_rate: f64,
    /// Sample standard deviation of `log₂(ḡ_t)/t`.
    pub std_rate: f64,
    /// `G`.
    pub expected_rate: f64,
    pub deviation: f64,
    /// Standard deviation of `log₂ g_j` over one round.
    pub step_log_std: f64,
    /// Predicted standard deviation of `log₂(ḡ_t)/t`, `σ_step/√t`.
    pub predicted_std_rate: f64,
}

/// Compares the empirical growth exponent of `ḡ_t` with `G`, the analogue of
/// the law of large numbers for the gambler's wealth.
pub fn wealth_lln_check(game: &Game, batch: &SampleBatch) -> Result<LlnReport> {
    if batch.t_max < 50 {
        return Err(Error::Domain { what: "t_max for the LLN check", value: batch.t_max as f64 });
    }
    let t = batch.t_max;
    let agg = batch.at(t).expect("batch holds its final step");
    let tf = t as f64;
    let mean_rate = agg.log2_g.mean().ok_or(Error::Domain { what: "n_samples", value: 0.0 })? / tf;
    let std_rate = agg.log2_g.std().unwrap_or(0.0) / tf;
    let expected_rate = quantum_doubling_rate(game).rate;
    let second: f64 = game.horses().iter().zip(game.probabilities()).map(|(h, &p)| p * h.log2_g * h.log2_g).sum();
    let step_log_std = libm::sqrt(libm::fmax(second - expected_rate * expected_rate, 0.0));
    Ok(LlnReport {
        t,
        samples: batch.n_samples,
        mean_rate,
        std_rate,
        expected_rate,
        deviation: libm::fabs(mean_rate - expected_rate),
        step_log_std,
        predicted_std_rate: step_log_std / libm::sqrt(tf),
    })
}

//! Stochastic experiment engines.
//!
//! # Random streams
//!
//! Trajectory `i` of a run with master seed `s` draws its winners from
//! `ChaCha8Rng::seed_from_u64(s)` switched to stream `i`
//! (`set_stream(i)`). ChaCha is counter based, so every trajectory is a pure
//! function of `(config, s, i)` and the batch does not depend on how
//! trajectories are distributed over workers. Each round consumes one
//! `u64`, mapped to `[0, 1)` as `(x >> 11) · 2⁻⁵³`, then to a horse by
//! [`Game::draw_winner`].
//!
//! # Aggregation
//!
//! Per-step sums use [`ExactSum`], so merging partial batches in any order
//! gives bit-identical aggregates.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::Range;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::analysis;
use crate::betting::{Game, TrajectoryState};
use crate::sum::ExactSum;
use crate::{Error, Result};

/// Largest number of trajectories [`enumerate_exact`] will visit at its
/// deepest level.
pub const ENUMERATION_LIMIT: u64 = 1 << 24;
/// Default enumeration depth for two horses (4096 trajectories).
pub const DEFAULT_T_ENUM: usize = 12;
pub const DEFAULT_BINS: usize = 100;

pub fn trajectory_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Uniform variate in `[0, 1)` with 53 random bits.
pub fn uniform01<R: RngCore>(rng: &mut R) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Uniform bins over `[lo, hi]`. Bins are closed below and open above,
/// except the last which also holds `hi`; out-of-range values are clamped
/// into the edge bins so counts always add up to the sample size.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub lo: f64,
    pub hi: f64,
    pub counts: Vec<u64>,
}

impl Histogram {
    pub fn new(lo: f64, hi: f64, bins: usize) -> Self {
        assert!(hi > lo && bins > 0, "histogram needs hi > lo and at least one bin");
        Histogram { lo, hi, counts: vec![0; bins] }
    }

    pub fn bin_of(&self, value: f64) -> usize {
        let bins = self.counts.len();
        let pos = (value - self.lo) / (self.hi - self.lo) * bins as f64;
        if !(pos >= 0.0) {
            0
        } else if pos >= bins as f64 {
            bins - 1
        } else {
            pos as usize
        }
    }

    pub fn add(&mut self, value: f64) {
        let b = self.bin_of(value);
        self.counts[b] += 1;
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn merge(&mut self, other: &Histogram) {
        debug_assert_eq!(self.counts.len(), other.counts.len());
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
    }
}

/// Count, exact sums and range of one scalar.
#[derive(Debug, Clone, PartialEq)]
pub struct Moments {
    pub count: u64,
    pub sum: ExactSum,
    pub sum_sq: ExactSum,
    pub min: f64,
    pub max: f64,
}

impl Default for Moments {
    fn default() -> Self {
        Moments { count: 0, sum: ExactSum::new(), sum_sq: ExactSum::new(), min: f64::INFINITY, max: f64::NEG_INFINITY }
    }
}

impl Moments {
    pub fn add(&mut self, x: f64) {
        self.count += 1;
        self.sum.add(x);
        self.sum_sq.add(x * x);
        self.min = self.min.min(x);
        self.max = self.max.max(x);
    }

    pub fn merge(&mut self, other: &Moments) {
        self.count += other.count;
        self.sum.merge(&other.sum);
        self.sum_sq.merge(&other.sum_sq);
        self.min = self.min.min(other.min);
        self.max = self.max.max(other.max);
    }

    pub fn mean(&self) -> Option<f64> {
        (self.count > 0).then(|| self.sum.value() / self.count as f64)
    }

    /// Sample standard deviation (`n − 1` denominator).
    pub fn std(&self) -> Option<f64> {
        if self.count < 2 {
            return (self.count == 1).then_some(0.0);
        }
        let n = self.count as f64;
        let s = self.sum.value();
        let var = (self.sum_sq.value() - s * (s / n)) / (n - 1.0);
        Some(libm::sqrt(libm::fmax(var, 0.0)))
    }

    pub fn std_error(&self) -> Option<f64> {
        self.std().map(|s| s / libm::sqrt(self.count as f64))
    }
}

/// One round of one sampled trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepSample {
    pub winner: usize,
    pub log2_g: f64,
    pub gamma: f64,
    pub energy: f64,
    pub ergotropy: f64,
    pub mu: Option<f64>,
    pub r: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampledTrajectory {
    pub sample_id: u64,
    /// `steps[t - 1]` holds round `t`.
    pub steps: Vec<StepSample>,
}

/// Distribution of the sample at one time step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepAggregate {
    pub t: usize,
    pub r: Moments,
    pub mu: Moments,
    pub gamma: Moments,
    pub log2_g: Moments,
    pub r_hist: Histogram,
    pub mu_hist: Histogram,
    pub gamma_hist: Histogram,
}

impl StepAggregate {
    fn new(t: usize, opts: &SamplerOptions) -> Self {
        StepAggregate {
            t,
            r: Moments::default(),
            mu: Moments::default(),
            gamma: Moments::default(),
            log2_g: Moments::default(),
            r_hist: Histogram::new(0.0, 1.0, opts.bins),
            mu_hist: Histogram::new(0.0, 1.0, opts.bins),
            gamma_hist: Histogram::new(opts.gamma_range.0, opts.gamma_range.1, opts.bins),
        }
    }

    fn add(&mut self, s: &StepSample) {
        self.r.add(s.r);
        self.r_hist.add(s.r);
        if let Some(mu) = s.mu {
            self.mu.add(mu);
            self.mu_hist.add(mu);
        }
        self.gamma.add(s.gamma);
        self.gamma_hist.add(s.gamma);
        self.log2_g.add(s.log2_g);
    }

    fn merge(&mut self, other: &StepAggregate) {
        self.r.merge(&other.r);
        self.mu.merge(&other.mu);
        self.gamma.merge(&other.gamma);
        self.log2_g.merge(&other.log2_g);
        self.r_hist.merge(&other.r_hist);
        self.mu_hist.merge(&other.mu_hist);
        self.gamma_hist.merge(&other.gamma_hist);
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SamplerOptions {
    pub bins: usize,
    /// Histogram range for `γ̄_t`.
    pub gamma_range: (f64, f64),
    /// Keep every per-step record, not only the aggregates.
    pub keep_trajectories: bool,
}

impl Default for SamplerOptions {
    fn default() -> Self {
        SamplerOptions { bins: DEFAULT_BINS, gamma_range: (0.0, 10.0), keep_trajectories: true }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleBatch {
    pub t_max: usize,
    /// Number of trajectories merged into this batch.
    pub n_samples: u64,
    /// `aggregates[t - 1]` describes round `t`.
    pub aggregates: Vec<StepAggregate>,
    /// Sorted by `sample_id`; empty unless trajectories were kept.
    pub trajectories: Vec<SampledTrajectory>,
}

impl SampleBatch {
    fn empty(t_max: usize, opts: &SamplerOptions) -> Self {
        SampleBatch {
            t_max,
            n_samples: 0,
            aggregates: (1..=t_max).map(|t| StepAggregate::new(t, opts)).collect(),
            trajectories: Vec::new(),
        }
    }

    pub fn at(&self, t: usize) -> Option<&StepAggregate> {
        t.checked_sub(1).and_then(|i| self.aggregates.get(i))
    }

    /// Combines two disjoint batches. The result does not depend on the
    /// order of the operands.
    pub fn merge(mut self, other: SampleBatch) -> SampleBatch {
        assert_eq!(self.t_max, other.t_max, "cannot merge batches of different horizons");
        self.n_samples += other.n_samples;
        for (a, b) in self.aggregates.iter_mut().zip(&other.aggregates) {
            a.merge(b);
        }
        if self.trajectories.is_empty() {
            self.trajectories = other.trajectories;
        } else if !other.trajectories.is_empty() {
            let left = core::mem::take(&mut self.trajectories);
            let mut merged = Vec::with_capacity(left.len() + other.trajectories.len());
            let mut l = left.into_iter().peekable();
            let mut r = other.trajectories.into_iter().peekable();
            loop {
                let take_left = match (l.peek(), r.peek()) {
                    (Some(a), Some(b)) => a.sample_id <= b.sample_id,
                    (Some(_), None) => true,
                    (None, Some(_)) => false,
                    (None, None) => break,
                };
                merged.push(if take_left { l.next() } else { r.next() }.unwrap());
            }
            self.trajectories = merged;
        }
        self
    }
}

fn check_run(game: &Game) -> Result<()> {
    let cfg = game.config();
    if cfg.n_samples == 0 {
        return Err(Error::Domain { what: "n_samples", value: 0.0 });
    }
    if cfg.t_max == 0 {
        return Err(Error::Domain { what: "t_max", value: 0.0 });
    }
    Ok(())
}

/// Runs trajectory `index` of the game's seeded experiment.
pub fn simulate_trajectory(game: &Game, index: u64) -> Result<SampledTrajectory> {
    let cfg = game.config();
    let mut rng = trajectory_rng(cfg.seed, index);
    let mut state = TrajectoryState::new();
    let mut steps = Vec::with_capacity(cfg.t_max);
    for _ in 0..cfg.t_max {
        let winner = game.draw_winner(uniform01(&mut rng));
        state = state.step(&game.horses()[winner]);
        let pay = game.payoff(&state)?;
        steps.push(StepSample {
            winner,
            log2_g: state.log2_g,
            gamma: state.gamma_bar,
            energy: pay.energy,
            ergotropy: pay.ergotropy,
            mu: pay.mu,
            r: pay.r,
        });
    }
    Ok(SampledTrajectory { sample_id: index, steps })
}

/// Samples trajectories `range` of the experiment.
pub fn sample_range(game: &Game, opts: &SamplerOptions, range: Range<u64>) -> Result<SampleBatch> {
    check_run(game)?;
    let mut batch = SampleBatch::empty(game.config().t_max, opts);
    for index in range {
        let traj = simulate_trajectory(game, index)?;
        for (agg, step) in batch.aggregates.iter_mut().zip(&traj.steps) {
            agg.add(step);
        }
        batch.n_samples += 1;
        if opts.keep_trajectories {
            batch.trajectories.push(traj);
        }
    }
    Ok(batch)
}

/// Samples all `n_samples` trajectories sequentially.
pub fn sample_trajectories(game: &Game, opts: &SamplerOptions) -> Result<SampleBatch> {
    sample_range(game, opts, 0..game.config().n_samples as u64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactPath {
    pub prob: f64,
    pub state: TrajectoryState,
    pub r: f64,
    pub mu: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExactLevel {
    pub t: usize,
    /// Path `i` extends path `i / J` of the previous level with winner `i % J`.
    pub paths: Vec<ExactPath>,
    pub total_prob: f64,
    pub mean_gamma: f64,
    pub mean_gamma_sq: f64,
    pub mean_r: f64,
    pub mean_mu: Option<f64>,
}

impl ExactLevel {
    pub fn gamma_variance(&self) -> f64 {
        self.mean_gamma_sq - self.mean_gamma * self.mean_gamma
    }
}

/// Every trajectory up to a fixed depth, with its exact probability.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactDistribution {
    pub horses: usize,
    /// `levels[t - 1]` holds all `Jᵗ` trajectories of length `t`.
    pub levels: Vec<ExactLevel>,
}

impl ExactDistribution {
    pub fn at(&self, t: usize) -> Option<&ExactLevel> {
        t.checked_sub(1).and_then(|i| self.levels.get(i))
    }

    pub fn t_enum(&self) -> usize {
        self.levels.len()
    }

    /// Winner sequence of path `index` at depth `t`.
    pub fn winners(&self, t: usize, mut index: usize) -> Vec<usize> {
        let mut w = vec![0; t];
        for slot in w.iter_mut().rev() {
            *slot = index % self.horses;
            index /= self.horses;
        }
        w
    }
}

/// Exhaustive probability-weighted enumeration of all trajectories of
/// length `1..=t_enum`.
pub fn enumerate_exact(game: &Game, t_enum: usize) -> Result<ExactDistribution> {
    let horses = game.horses().len();
    let budget_ok =
        u32::try_from(t_enum).ok().and_then(|e| (horses as u64).checked_pow(e)).is_some_and(|n| n <= ENUMERATION_LIMIT);
    if !budget_ok {
        return Err(Error::EnumerationBudget { horses, steps: t_enum, limit: ENUMERATION_LIMIT });
    }
    let p = game.probabilities();
    let mut levels: Vec<ExactLevel> = Vec::with_capacity(t_enum);
    let root = [ExactPath { prob: 1.0, state: TrajectoryState::new(), r: game.r0(), mu: None }];
    for t in 1..=t_enum {
        let parents: &[ExactPath] = levels.last().map_or(&root[..], |l| &l.paths);
        let mut paths = Vec::with_capacity(parents.len() * horses);
        let (mut total, mut g1, mut g2, mut r_sum, mut mu_sum) =
            (ExactSum::new(), ExactSum::new(), ExactSum::new(), ExactSum::new(), ExactSum::new());
        for parent in parents {
            for (horse, &pj) in game.horses().iter().zip(p) {
                let state = parent.state.step(horse);
                let pay = game.payoff(&state)?;
                let prob = parent.prob * pj;
                total.add(prob);
                g1.add(prob * state.gamma_bar);
                g2.add(prob * state.gamma_bar * state.gamma_bar);
                r_sum.add(prob * pay.r);
                if let Some(mu) = pay.mu {
                    mu_sum.add(prob * mu);
                }
                paths.push(ExactPath { prob, state, r: pay.r, mu: pay.mu });
            }
        }
        levels.push(ExactLevel {
            t,
            paths,
            total_prob: total.value(),
            mean_gamma: g1.value(),
            mean_gamma_sq: g2.value(),
            mean_r: r_sum.value(),
            mean_mu: (game.ergotropy0() > 0.0).then(|| mu_sum.value()),
        });
    }
    Ok(ExactDistribution { horses, levels })
}

/// Tail behaviour of `γ̄_t` along one trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailReport {
    pub sample_id: u64,
    /// Largest `γ̄_{t+1} − γ̄_t` for `t ≥ t_half`.
    pub max_tail_increment: f64,
    /// Least-squares slope of `log₂(γ̄_{t+1} − γ̄_t)` against `t` over the
    /// tail; negative means geometric decay.
    pub decay_rate_log2: Option<f64>,
    /// Smallest increment seen anywhere along the trajectory.
    pub min_increment: f64,
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub t_half: usize,
    /// Doubling rate `G` of the game; convergence of `γ̄_t` is expected
    /// only when it is positive.
    pub doubling_rate: f64,
    pub expanding: bool,
    pub trajectories: Vec<TailReport>,
    pub flagged: usize,
    pub flagged_fraction: f64,
    /// `γ̄_t` never decreased on any trajectory.
    pub monotone: bool,
}

/// Checks empirically that `γ̄_t` settles along each sampled trajectory:
/// its increments over the second half of the horizon should shrink
/// geometrically (slope ≈ −2G in `log₂`). A trajectory is flagged when the
/// fitted slope is not negative.
pub fn empirical_convergence_diagnostic(game: &Game, batch: &SampleBatch) -> Result<ConvergenceReport> {
    if batch.t_max < 20 {
        return Err(Error::Domain { what: "t_max for convergence diagnostic", value: batch.t_max as f64 });
    }
    if batch.trajectories.is_empty() {
        return Err(Error::Invariant(format!(
            "convergence diagnostic needs per-trajectory records ({} samples were aggregated only)",
            batch.n_samples
        )));
    }
    let doubling_rate = analysis::quantum_doubling_rate(game).rate;
    let t_half = batch.t_max / 2;
    let mut reports = Vec::with_capacity(batch.trajectories.len());
    let mut monotone = true;
    for traj in &batch.trajectories {
        let mut prev = 0.0;
        let mut min_increment = f64::INFINITY;
        let mut max_tail = 0.0f64;
        let (mut n, mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for (i, step) in traj.steps.iter().enumerate() {
            let t = i + 1;
            let inc = step.gamma - prev;
            prev = step.gamma;
            min_increment = min_increment.min(inc);
            if t > t_half {
                max_tail = max_tail.max(inc);
                if inc > 0.0 {
                    let (x, y) = (t as f64, libm::log2(inc));
                    n += 1.0;
                    sx += x;
                    sy += y;
                    sxx += x * x;
                    sxy += x * y;
                }
            }
        }
        monotone &= min_increment >= 0.0;
        let denom = n * sxx - sx * sx;
        let slope = (n >= 2.0 && denom > 0.0).then(|| (n * sxy - sx * sy) / denom);
        let flagged = !matches!(slope, Some(s) if s < 0.0);
        reports.push(TailReport {
            sample_id: traj.sample_id,
            max_tail_increment: max_tail,
            decay_rate_log2: slope,
            min_increment,
            flagged,
        });
    }
    let flagged = reports.iter().filter(|r| r.flagged).count();
    Ok(ConvergenceReport {
        t_half,
        doubling_rate,
        expanding: doubling_rate > analysis::MARGINAL_TOL,
        flagged_fraction: flagged as f64 / reports.len() as f64,
        flagged,
        trajectories: reports,
        monotone,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::betting::GameConfig;
    use crate::gaussian::StateParams;
    use approx::assert_relative_eq;

    fn game(input: StateParams, eta2: Vec<f64>, t_max: usize, n: usize) -> Game {
        let mut cfg = GameConfig::kelly(vec![0.7, 0.3], vec![3.0, 3.0], input);
        cfg.eta2 = eta2;
        cfg.t_max = t_max;
        cfg.n_samples = n;
        cfg.seed = 42;
        Game::new(cfg).unwrap()
    }

    fn fig4(t_max: usize, n: usize) -> Game {
        game(StateParams::from_cosh(0.0, 51.0, 0.0).unwrap(), vec![0.7, 0.3], t_max, n)
    }

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: Vec<u64> = (0..4).map(|_| trajectory_rng(7, 3).next_u64()).collect();
        assert!(a.windows(2).all(|w| w[0] == w[1]));
        assert_ne!(trajectory_rng(7, 3).next_u64(), trajectory_rng(7, 4).next_u64());
        assert_ne!(trajectory_rng(7, 3).next_u64(), trajectory_rng(8, 3).next_u64());
        let mut rng = trajectory_rng(1, 0);
        for _ in 0..1000 {
            let u = uniform01(&mut rng);
            assert!((0.0..1.0).contains(&u));
        }
    }

    #[test]
    fn empty_runs_rejected() {
        let opts = SamplerOptions::default();
        assert!(matches!(sample_trajectories(&fig4(0, 10), &opts), Err(Error::Domain { .. })));
        assert!(matches!(sample_trajectories(&fig4(10, 0), &opts), Err(Error::Domain { .. })));
    }

    #[test]
    fn deterministic_and_split_invariant() {
        let g = fig4(30, 200);
        let opts = SamplerOptions::default();
        let whole = sample_trajectories(&g, &opts).unwrap();
        assert_eq!(whole, sample_trajectories(&g, &opts).unwrap());

        let a = sample_range(&g, &opts, 0..37).unwrap();
        let b = sample_range(&g, &opts, 37..150).unwrap();
        let c = sample_range(&g, &opts, 150..200).unwrap();
        let forward = a.clone().merge(b.clone()).merge(c.clone());
        let shuffled = c.merge(a).merge(b);
        assert_eq!(forward, whole);
        assert_eq!(shuffled, whole);
    }

    #[test]
    fn aggregate_invariants() {
        let g = fig4(25, 500);
        let batch = sample_trajectories(&g, &SamplerOptions::default()).unwrap();
        for agg in &batch.aggregates {
            assert_eq!(agg.r_hist.total(), 500);
            assert_eq!(agg.mu_hist.total(), 500);
            assert_eq!(agg.gamma_hist.total(), 500);
            for m in [&agg.r, &agg.mu, &agg.gamma] {
                let mean = m.mean().unwrap();
                assert!(m.min <= mean && mean <= m.max);
            }
            assert!(agg.r.max <= g.r0() + 1e-9);
        }
    }

    #[test]
    fn histogram_edges() {
        let mut h = Histogram::new(0.0, 1.0, 100);
        assert_eq!(h.bin_of(0.0), 0);
        assert_eq!(h.bin_of(0.01), 1);
        assert_eq!(h.bin_of(0.999), 99);
        assert_eq!(h.bin_of(1.0), 99);
        assert_eq!(h.bin_of(-0.5), 0);
        assert_eq!(h.bin_of(f64::NAN), 0);
        h.add(1.0);
        h.add(0.5);
        assert_eq!(h.total(), 2);
    }

    #[test]
    fn enumeration_small_depths() {
        let dist = enumerate_exact(&fig4(1, 1), 12).unwrap();
        for level in &dist.levels {
            assert!((level.total_prob - 1.0).abs() <= 1e-12);
            assert_eq!(level.paths.len(), 1 << level.t);
            assert!(level.gamma_variance() >= 0.0);
        }
        assert_relative_eq!(dist.at(1).unwrap().mean_gamma, 7.0 / 6.0, epsilon = 1e-14);
        assert_relative_eq!(dist.at(2).unwrap().mean_gamma, 35.0 / 18.0, epsilon = 1e-14);
        let second = 0.7 * (1.45f64 / 2.1).powi(2) + 0.3 * (2.05f64 / 0.9).powi(2);
        assert_relative_eq!(dist.at(1).unwrap().mean_gamma_sq, second, epsilon = 1e-14);
        assert_eq!(dist.winners(3, 0b110), vec![1, 1, 0]);
        let path = &dist.at(3).unwrap().paths[0b110];
        assert_relative_eq!(path.prob, 0.3 * 0.3 * 0.7, epsilon = 1e-15);
    }

    #[test]
    fn enumeration_budget() {
        let g = fig4(1, 1);
        assert!(matches!(enumerate_exact(&g, 25), Err(Error::EnumerationBudget { .. })));
        assert!(matches!(enumerate_exact(&g, 1000), Err(Error::EnumerationBudget { .. })));
    }

    #[test]
    fn monte_carlo_agrees_with_enumeration() {
        let dist = enumerate_exact(&fig4(1, 1), 12).unwrap();
        for input in [StateParams::from_cosh(0.0, 51.0, 0.0).unwrap(), StateParams::coherent(50.0).unwrap()] {
            let g = game(input, vec![0.7, 0.3], 12, 10_000);
            let batch =
                sample_trajectories(&g, &SamplerOptions { keep_trajectories: false, ..Default::default() }).unwrap();
            for t in 1..=12 {
                let agg = batch.at(t).unwrap();
                let exact = dist.at(t).unwrap().mean_gamma;
                let se = agg.gamma.std_error().unwrap();
                assert!((agg.gamma.mean().unwrap() - exact).abs() <= 4.0 * se, "t = {t}");
            }
        }
    }

    #[test]
    fn convergence_expanding() {
        let g = game(StateParams::coherent(50.0).unwrap(), vec![0.7, 0.3], 60, 300);
        let batch = sample_trajectories(&g, &SamplerOptions::default()).unwrap();
        let report = empirical_convergence_diagnostic(&g, &batch).unwrap();
        assert!(report.expanding);
        assert!(report.monotone);
        assert!(report.flagged_fraction < 0.05, "{}", report.flagged_fraction);
        for tail in &report.trajectories {
            assert!(tail.min_increment >= 0.0);
        }
    }

    #[test]
    fn convergence_contracting() {
        // G = ½(0.9 log₂ 0.2 + 0.1 log₂ 1.8) < 0.
        let mut cfg = GameConfig::kelly(vec![0.9, 0.1], vec![2.0, 2.0], StateParams::coherent(50.0).unwrap());
        cfg.eta2 = vec![0.1, 0.9];
        cfg.t_max = 40;
        cfg.n_samples = 100;
        let g = Game::new(cfg).unwrap();
        let batch = sample_trajectories(&g, &SamplerOptions::default()).unwrap();
        let report = empirical_convergence_diagnostic(&g, &batch).unwrap();
        assert!(!report.expanding);
        assert!(report.monotone);
        assert!(report.flagged_fraction > 0.9);
    }

    #[test]
    fn convergence_needs_horizon_and_records() {
        let g = fig4(10, 5);
        let batch = sample_trajectories(&g, &SamplerOptions::default()).unwrap();
        assert!(empirical_convergence_diagnostic(&g, &batch).is_err());
        let g = fig4(30, 5);
        let opts = SamplerOptions { keep_trajectories: false, ..Default::default() };
        let batch = sample_trajectories(&g, &opts).unwrap();
        assert!(empirical_convergence_diagnostic(&g, &batch).is_err());
    }
}

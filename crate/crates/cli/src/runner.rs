//! Parallel sampling. Trajectory streams are fixed by `(seed, index)` and
//! batches merge exactly, so results do not depend on the worker count.

use qkelly_core::betting::Game;
use qkelly_core::engine::{sample_range, SampleBatch, SamplerOptions};
use rayon::prelude::*;

use crate::error::CliError;

/// Trajectories per work unit.
pub const CHUNK: u64 = 256;

/// Runs all `n_samples` trajectories of `game` on `workers` threads
/// (`None` picks the number of cores).
pub fn run_batch(game: &Game, opts: &SamplerOptions, workers: Option<usize>) -> Result<SampleBatch, CliError> {
    let n = game.config().n_samples as u64;
    let chunks: Vec<_> = (0..n).step_by(CHUNK as usize).map(|lo| lo..(lo + CHUNK).min(n)).collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start worker pool: {e}")))?;
    let batches: Vec<_> = pool.install(|| {
        chunks.into_par_iter().map(|range| sample_range(game, opts, range)).collect::<Result<Vec<_>, _>>()
    })?;
    let mut it = batches.into_iter();
    let first = it.next().ok_or_else(|| CliError::Usage("n_samples must be positive".into()))?;
    Ok(it.fold(first, SampleBatch::merge))
}

#[cfg(test)]
mod tests {
    use super::*;
    use qkelly_core::betting::GameConfig;
    use qkelly_core::engine::sample_trajectories;
    use qkelly_core::gaussian::StateParams;

    #[test]
    fn parallel_equals_sequential() {
        let mut cfg =
            GameConfig::kelly(vec![0.7, 0.3], vec![3.0, 3.0], StateParams::from_cosh(0.0, 51.0, 0.0).unwrap());
        cfg.t_max = 20;
        cfg.n_samples = 1000;
        cfg.seed = 3;
        let game = Game::new(cfg).unwrap();
        let opts = SamplerOptions::default();
        let seq = sample_trajectories(&game, &opts).unwrap();
        for w in [1, 3, 8] {
            assert_eq!(run_batch(&game, &opts, Some(w)).unwrap(), seq);
        }
    }
}

use approx::assert_relative_eq;
use qkelly_core::analysis::{
    gamma_mean, gamma_second_moment, mean_field_r, quantum_doubling_rate, MomentBlocks, Regime,
};
use qkelly_core::betting::{Game, GameConfig, TrajectoryRecord};
use qkelly_core::channels::GainChannel;
use qkelly_core::engine::{enumerate_exact, sample_trajectories, SamplerOptions};
use qkelly_core::gaussian::StateParams;

fn game(p: &[f64], k2: &[f64], eta2: &[f64], input: StateParams) -> Game {
    let mut cfg = GameConfig::kelly(p.to_vec(), k2.to_vec(), input);
    cfg.eta2 = eta2.to_vec();
    Game::new(cfg).unwrap()
}

fn squeezed() -> StateParams {
    StateParams::from_cosh(0.0, 51.0, 0.0).unwrap()
}

#[test]
fn three_horse_closed_form_matches_enumeration() {
    let g = game(&[0.5, 0.3, 0.2], &[4.0, 4.0, 4.0], &[0.4, 0.35, 0.25], squeezed());
    let dist = enumerate_exact(&g, 8).unwrap();
    for level in &dist.levels {
        assert_relative_eq!(level.total_prob, 1.0, epsilon = 1e-12);
        assert_relative_eq!(gamma_mean(&g, level.t), level.mean_gamma, max_relative = 1e-10);
        assert_eq!(level.paths.len(), 3usize.pow(level.t as u32));
    }
    let b = MomentBlocks::new(&g);
    assert_relative_eq!(dist.at(1).unwrap().mean_gamma_sq, b.alpha2_g4, max_relative = 1e-12);
    assert!(!gamma_second_moment(&g, 1, Some(&dist)).flagged);
}

#[test]
fn enumerated_paths_agree_with_channel_composition() {
    let g = game(&[0.7, 0.3], &[3.0, 3.0], &[0.7, 0.3], squeezed());
    let dist = enumerate_exact(&g, 5).unwrap();
    for (i, path) in dist.at(5).unwrap().paths.iter().enumerate() {
        let winners = dist.winners(5, i);
        let composed = winners
            .iter()
            .map(|&w| g.horses()[w].as_gain())
            .fold(GainChannel::identity(), |acc, h| GainChannel::compose(&acc, &h));
        let rec = TrajectoryRecord::from_winners(&g, &winners).unwrap();
        assert_relative_eq!(composed.g(), rec.state.g_bar(), max_relative = 1e-12);
        assert_relative_eq!(composed.alpha(), rec.state.alpha_bar, max_relative = 1e-12);
        assert_relative_eq!(path.state.gamma_bar, rec.state.gamma_bar, max_relative = 1e-12);

        let out = composed.apply(g.input_state()).unwrap();
        let pay = g.payoff(&rec.state).unwrap();
        assert_relative_eq!(out.energy(), pay.energy, max_relative = 1e-9);
        assert_relative_eq!(out.ergotropy(), pay.ergotropy, max_relative = 1e-8);
    }
}

#[test]
fn sampled_mean_agrees_with_closed_form() {
    let mut cfg = GameConfig::kelly(vec![0.6, 0.4], vec![3.0, 3.0], StateParams::coherent(50.0).unwrap());
    cfg.t_max = 40;
    cfg.n_samples = 20_000;
    cfg.seed = 77;
    let g = Game::new(cfg).unwrap();
    let batch = sample_trajectories(&g, &SamplerOptions { keep_trajectories: false, ..Default::default() }).unwrap();
    for t in [1, 5, 20, 40] {
        let agg = batch.at(t).unwrap();
        let se = agg.gamma.std_error().unwrap();
        assert!((agg.gamma.mean().unwrap() - gamma_mean(&g, t)).abs() < 5.0 * se, "t = {t}");
    }
    let r = batch.at(40).unwrap().r.mean().unwrap();
    assert!((r - mean_field_r(&g, 40).unwrap()).abs() < 0.05);
}

#[test]
fn regimes_of_published_configurations() {
    let kelly = game(&[0.7, 0.3], &[3.0, 3.0], &[0.7, 0.3], squeezed());
    assert_eq!(quantum_doubling_rate(&kelly).regime, Regime::Expanding);
    let contracting = game(&[0.9, 0.1], &[2.0, 2.0], &[0.1, 0.9], squeezed());
    assert_eq!(quantum_doubling_rate(&contracting).regime, Regime::Contracting);
}

//! Shared fixtures for the benchmarks.

use std::sync::Arc;

use tegta::estimation::{AbstractionLevel, EmpiricalGame};
use tegta::games::{GameId, GameSpec};
use tegta::psro::simulate_profile;
use tegta::solvers::RestrictedNormalForm;

/// An empirical game over `game` with `k` strategies per player, each
/// profile simulated `m` times.
pub fn populated(game: GameId, seed: u64, obs_events: usize, k: usize, m: u64) -> EmpiricalGame {
    let tree = Arc::new(GameSpec::new(game, seed).build());
    let mut g = EmpiricalGame::new(Arc::clone(&tree), AbstractionLevel::first(obs_events));
    for player in 1..=tree.num_players() {
        let infosets = tree.player_infosets(player);
        for s in 0..k {
            let strategy = infosets
                .iter()
                .enumerate()
                .map(|(i, &id)| (s + i) % tree.infoset(id).actions().len())
                .collect();
            g.add_strategy(player, strategy);
        }
    }
    for idx in g.profiles() {
        simulate_profile(&mut g, &idx, m, 0.1, seed).expect("simulation of a valid profile");
    }
    g
}

/// Deterministic pseudo-random bimatrix game with payoffs in [0, 1).
pub fn bimatrix(n: usize, seed: u64) -> RestrictedNormalForm {
    let mut x = seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) | 1;
    let mut next = || {
        x ^= x << 13;
        x ^= x >> 7;
        x ^= x << 17;
        (x >> 11) as f64 / (1u64 << 53) as f64
    };
    let a: Vec<Vec<f64>> = (0..n).map(|_| (0..n).map(|_| next()).collect()).collect();
    let b: Vec<Vec<f64>> = (0..n).map(|_| (0..n).map(|_| next()).collect()).collect();
    RestrictedNormalForm::bimatrix(&a, &b)
}

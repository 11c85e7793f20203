//! Tabular Q-learning best response against a fixed opponent mixture.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::game_tree::{analysis_argmax, GameTree, PureStrategy};
use crate::games::{play, simulator_sample, ObservationModel};

use super::SolverError;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QConfig {
    pub alpha: f64,
    pub epsilon: f64,
    pub episodes: usize,
    pub discount: f64,
}

impl Default for QConfig {
    fn default() -> Self {
        QConfig {
            alpha: 0.1,
            epsilon: 0.1,
            episodes: 10_000,
            discount: 1.0,
        }
    }
}

/// Action values for one player, indexed by the player's local infoset
/// index. Entries start at zero.
#[derive(Clone, Debug, PartialEq)]
pub struct QTable {
    pub values: Vec<Vec<f64>>,
    pub visited: Vec<bool>,
}

impl QTable {
    pub fn new(tree: &GameTree, player: usize) -> Self {
        let sets = tree.player_infosets(player);
        QTable {
            values: sets.iter().map(|s| vec![0.0; tree.infoset(*s).actions().len()]).collect(),
            visited: vec![false; sets.len()],
        }
    }

    /// Greedy action per infoset, lowest index on ties; 0 where unvisited.
    pub fn greedy(&self) -> PureStrategy {
        self.values
            .iter()
            .zip(&self.visited)
            .map(|(q, &v)| if v { analysis_argmax(q) } else { 0 })
            .collect()
    }
}

/// Learns a pure strategy for `player` by playing episodes against
/// opponents that each draw a pure strategy from their mixture at the start
/// of every episode. `opponents[q - 1]` is player `q`'s mixture; the entry
/// for `player` itself is ignored.
pub fn q_learning_br<R: Rng>(
    tree: &GameTree,
    player: usize,
    opponents: &[Vec<(f64, PureStrategy)>],
    noise_variance: f64,
    config: &QConfig,
    rng: &mut R,
) -> Result<(PureStrategy, QTable), SolverError> {
    if config.episodes == 0 {
        return Err(SolverError::NoEpisodes);
    }
    tree.check_player(player).map_err(|e| SolverError::Game(e.to_string()))?;
    let mut table = QTable::new(tree, player);
    let weights: Vec<Vec<f64>> = opponents.iter().map(|m| m.iter().map(|(w, _)| *w).collect()).collect();
    let mut drawn: Vec<usize> = vec![0; opponents.len()];
    for _ in 0..config.episodes {
        for (q, w) in weights.iter().enumerate() {
            if q + 1 != player && !w.is_empty() {
                drawn[q] = simulator_sample(w, rng);
            }
        }
        let ep = play(tree, ObservationModel::first(0), noise_variance, rng, |set, r| {
            let info = tree.infoset(set);
            let q = info.player();
            if q == player {
                let row = &table.values[info.local_index()];
                if r.gen::<f64>() < config.epsilon {
                    r.gen_range(0..row.len())
                } else {
                    analysis_argmax(row)
                }
            } else {
                opponents[q - 1][drawn[q - 1]].1[info.local_index()]
            }
        });
        let own: Vec<(usize, usize)> = ep
            .decisions
            .iter()
            .filter(|(s, _)| tree.infoset(*s).player() == player)
            .map(|(s, a)| (tree.infoset(*s).local_index(), *a))
            .collect();
        let reward = ep.payoffs[player - 1];
        for (t, &(i, a)) in own.iter().enumerate() {
            let target = match own.get(t + 1) {
                Some(&(next, _)) => {
                    config.discount * table.values[next].iter().copied().fold(f64::NEG_INFINITY, f64::max)
                }
                None => reward,
            };
            let q = &mut table.values[i][a];
            *q += config.alpha * (target - *q);
            table.visited[i] = true;
        }
    }
    Ok((table.greedy(), table))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game_tree::{NodeSpec, StrategyProfile, TreeBuilder};
    use crate::games::generate_game1;
    use crate::rng;

    fn bandit() -> GameTree {
        let mut b = TreeBuilder::new(1);
        let r = b.root(NodeSpec::decision(1, "I"));
        b.child(r, "a", NodeSpec::Terminal(vec![0.0]));
        b.child(r, "b", NodeSpec::Terminal(vec![1.0]));
        b.build().unwrap()
    }

    #[test]
    fn bandit_learns_best_arm() {
        let t = bandit();
        let cfg = QConfig {
            episodes: 500,
            ..QConfig::default()
        };
        let (s, _) = q_learning_br(&t, 1, &[vec![]], 0.0, &cfg, &mut rng::stream(1, &[])).unwrap();
        assert_eq!(s, vec![1]);
        let zero = QConfig {
            episodes: 0,
            ..cfg
        };
        assert!(q_learning_br(&t, 1, &[vec![]], 0.0, &zero, &mut rng::stream(1, &[])).is_err());
    }

    #[test]
    fn greedy_first_trajectory_without_exploration() {
        let mut b = TreeBuilder::new(1);
        let r = b.root(NodeSpec::decision(1, "I"));
        b.child(r, "a", NodeSpec::Terminal(vec![1.0]));
        b.child(r, "b", NodeSpec::Terminal(vec![5.0]));
        let t = b.build().unwrap();
        let cfg = QConfig {
            epsilon: 0.0,
            episodes: 1,
            ..QConfig::default()
        };
        let (s, table) = q_learning_br(&t, 1, &[vec![]], 0.0, &cfg, &mut rng::stream(1, &[])).unwrap();
        assert_eq!(s, vec![0]);
        assert!((table.values[0][0] - 0.1).abs() < 1e-12);
    }

    #[test]
    fn same_seed_same_strategy() {
        let t = generate_game1(3);
        let opp = vec![vec![], vec![(1.0, vec![2, 5])]];
        let cfg = QConfig {
            episodes: 2000,
            ..QConfig::default()
        };
        let a = q_learning_br(&t, 1, &opp, 0.1, &cfg, &mut rng::stream(5, &[])).unwrap().0;
        let b = q_learning_br(&t, 1, &opp, 0.1, &cfg, &mut rng::stream(5, &[])).unwrap().0;
        assert_eq!(a, b);
        let prof = StrategyProfile::from_pure(&t, &[a, vec![2, 5]]).unwrap();
        assert!(t.expected_payoff(&prof).is_ok());
    }
}

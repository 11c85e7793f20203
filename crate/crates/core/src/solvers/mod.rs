//! Meta-strategy solvers and best-response oracles.

mod cfr;
mod nash;
mod qlearn;

pub use cfr::{cfr, CfrResult};
pub use nash::{all_equilibria, nash_support_enumeration, select_equilibrium};
pub use qlearn::{q_learning_br, QConfig, QTable};

use crate::estimation::product_indices;
use crate::game_tree::{GameTree, NodeSpec, TreeBuilder};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SolverError {
    #[error("support enumeration handles exactly 2 players, got {0}")]
    TooManyPlayers(usize),
    #[error("empty restricted strategy set for player {0}")]
    EmptySet(usize),
    #[error("no equilibrium found")]
    NoEquilibrium,
    #[error("iteration count must be positive")]
    NoIterations,
    #[error("episode budget must be positive")]
    NoEpisodes,
    #[error("{0}")]
    Game(String),
}

/// One weight vector per player over its restricted set.
pub type MixedProfile = Vec<Vec<f64>>;

/// Payoff tensor over the restricted strategy sets.
#[derive(Clone, Debug, PartialEq)]
pub struct RestrictedNormalForm {
    sizes: Vec<usize>,
    /// Payoff vectors in odometer order, last player fastest.
    payoffs: Vec<Vec<f64>>,
}

impl RestrictedNormalForm {
    pub fn from_fn<E, F>(sizes: &[usize], mut payoff: F) -> Result<Self, E>
    where
        F: FnMut(&[usize]) -> Result<Vec<f64>, E>,
    {
        let payoffs = product_indices(sizes)
            .iter()
            .map(|idx| payoff(idx))
            .collect::<Result<Vec<_>, E>>()?;
        Ok(RestrictedNormalForm {
            sizes: sizes.to_vec(),
            payoffs,
        })
    }

    /// Two-player game from row-player and column-player matrices.
    pub fn bimatrix(a: &[Vec<f64>], b: &[Vec<f64>]) -> Self {
        let rows = a.len();
        let cols = a.first().map_or(0, Vec::len);
        let mut payoffs = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                payoffs.push(vec![a[i][j], b[i][j]]);
            }
        }
        RestrictedNormalForm {
            sizes: vec![rows, cols],
            payoffs,
        }
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn num_players(&self) -> usize {
        self.sizes.len()
    }

    fn flat(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.sizes).fold(0, |acc, (&i, &s)| acc * s + i)
    }

    pub fn payoff(&self, idx: &[usize]) -> &[f64] {
        &self.payoffs[self.flat(idx)]
    }

    pub fn expected(&self, mix: &[Vec<f64>]) -> Vec<f64> {
        let mut out = vec![0.0; self.sizes.len()];
        for (idx, u) in product_indices(&self.sizes).iter().zip(&self.payoffs) {
            let w: f64 = idx.iter().enumerate().map(|(j, &i)| mix[j][i]).product();
            if w != 0.0 {
                for (o, x) in out.iter_mut().zip(u) {
                    *o += w * x;
                }
            }
        }
        out
    }

    /// Payoff of each pure deviation of `player` against the others' mixtures.
    pub fn deviation_values(&self, player: usize, mix: &[Vec<f64>]) -> Vec<f64> {
        let j = player - 1;
        let mut out = vec![0.0; self.sizes[j]];
        for (idx, u) in product_indices(&self.sizes).iter().zip(&self.payoffs) {
            let w: f64 = idx
                .iter()
                .enumerate()
                .filter(|(q, _)| *q != j)
                .map(|(q, &i)| mix[q][i])
                .product();
            out[idx[j]] += w * u[j];
        }
        out
    }

    /// Per-player regret of `mix` within the restricted game.
    pub fn regret(&self, mix: &[Vec<f64>]) -> Vec<f64> {
        let u = self.expected(mix);
        (1..=self.sizes.len())
            .map(|p| {
                let best = self
                    .deviation_values(p, mix)
                    .into_iter()
                    .fold(f64::NEG_INFINITY, f64::max);
                (best - u[p - 1]).max(0.0)
            })
            .collect()
    }

    /// The game as a tree: players choose in turn without seeing earlier
    /// choices.
    pub fn to_tree(&self) -> GameTree {
        let n = self.sizes.len();
        let mut b = TreeBuilder::new(n);
        let root = b.root(NodeSpec::decision(1, "s1"));
        let mut frontier = vec![(root, 0usize)];
        for p in 1..=n {
            let mut next = Vec::new();
            for (node, flat) in frontier {
                for i in 0..self.sizes[p - 1] {
                    let f = flat * self.sizes[p - 1] + i;
                    let spec = if p == n {
                        NodeSpec::Terminal(self.payoffs[f].clone())
                    } else {
                        NodeSpec::decision(p + 1, format!("s{}", p + 1))
                    };
                    let c = b.child(node, &format!("r{i}"), spec);
                    next.push((c, f));
                }
            }
            frontier = next;
        }
        b.build().expect("normal-form tree is valid")
    }
}

/// Uniform mixture over each restricted set.
pub fn uniform_mss(sizes: &[usize]) -> Result<MixedProfile, SolverError> {
    sizes
        .iter()
        .enumerate()
        .map(|(j, &k)| {
            if k == 0 {
                Err(SolverError::EmptySet(j + 1))
            } else {
                Ok(vec![1.0 / k as f64; k])
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_weights() {
        assert_eq!(uniform_mss(&[1]).unwrap(), vec![vec![1.0]]);
        assert_eq!(uniform_mss(&[4]).unwrap(), vec![vec![0.25; 4]]);
        assert_eq!(uniform_mss(&[2, 0]), Err(SolverError::EmptySet(2)));
    }

    #[test]
    fn uniform_payoff_is_tensor_mean() {
        let g = RestrictedNormalForm::bimatrix(
            &[vec![1.0, 2.0, 3.0], vec![4.0, 5.0, 6.0]],
            &[vec![0.0, 1.0, 0.0], vec![1.0, 0.0, 1.0]],
        );
        let mix = uniform_mss(g.sizes()).unwrap();
        let u = g.expected(&mix);
        assert!((u[0] - 3.5).abs() < 1e-12);
        assert!((u[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn tree_form_matches_tensor() {
        let g = RestrictedNormalForm::bimatrix(&[vec![1.0, -1.0], vec![-1.0, 1.0]], &[vec![-1.0, 1.0], vec![1.0, -1.0]]);
        let t = g.to_tree();
        assert_eq!(t.num_leaves(), 4);
        assert_eq!(t.player_infosets(2).len(), 1);
        let p = crate::game_tree::StrategyProfile::from_pure(&t, &[vec![1], vec![0]]).unwrap();
        assert_eq!(t.expected_payoff(&p).unwrap(), vec![-1.0, 1.0]);
    }
}

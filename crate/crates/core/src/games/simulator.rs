use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::game_tree::{GameTree, InfosetId, NodeId, NodeKind, StrategyProfile};

/// Which chance events the simulator reports: the first `revealed` events
/// along the path, in order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObservationModel {
    pub revealed: usize,
}

impl ObservationModel {
    pub fn first(revealed: usize) -> Self {
        ObservationModel { revealed }
    }

    pub fn reveals(&self, event_index: usize) -> bool {
        event_index < self.revealed
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Observation {
    /// Position of the event among the chance events on the path.
    pub event: usize,
    /// Identifies the chance node: the event position and every outcome
    /// revealed before it.
    pub tag: String,
    pub label: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimulationTrace {
    pub observations: Vec<Observation>,
    pub payoffs: Vec<f64>,
    /// The leaf actually reached. Not part of what the simulator reports;
    /// kept for checking estimators against ground truth.
    pub terminal: NodeId,
}

impl SimulationTrace {
    pub fn labels(&self) -> Vec<&str> {
        self.observations.iter().map(|o| o.label.as_str()).collect()
    }
}

/// One playthrough with every decision made by `policy`.
#[derive(Clone, Debug)]
pub struct Episode {
    pub terminal: NodeId,
    pub observations: Vec<Observation>,
    pub payoffs: Vec<f64>,
    /// Every (infoset, action) taken, in order.
    pub decisions: Vec<(InfosetId, usize)>,
}

pub(crate) fn sample_index<R: Rng + ?Sized>(dist: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for (i, &p) in dist.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    // rounding left a sliver of mass; take the last positive entry
    dist.iter().rposition(|&p| p > 0.0).unwrap_or(0)
}

/// Plays one path from the root. Chance follows the tree's distributions;
/// decisions come from `policy`. Payoffs get independent Gaussian noise
/// with the given variance for each player.
pub fn play<R, F>(
    tree: &GameTree,
    obs: ObservationModel,
    noise_variance: f64,
    rng: &mut R,
    mut policy: F,
) -> Episode
where
    R: Rng + ?Sized,
    F: FnMut(InfosetId, &mut R) -> usize,
{
    assert!(noise_variance >= 0.0, "noise variance must be nonnegative");
    let mut cur = tree.root();
    let mut observations = Vec::new();
    let mut decisions = Vec::new();
    let mut tag = String::new();
    loop {
        let node = tree.node(cur);
        match node.kind() {
            NodeKind::Terminal { utility } => {
                let mut payoffs = utility.clone();
                if noise_variance > 0.0 {
                    let normal = Normal::new(0.0, noise_variance.sqrt()).expect("finite std");
                    for p in &mut payoffs {
                        *p += normal.sample(rng);
                    }
                }
                return Episode {
                    terminal: cur,
                    observations,
                    payoffs,
                    decisions,
                };
            }
            NodeKind::Chance { probs } => {
                let i = sample_index(probs, rng);
                let event = node.event_index();
                if obs.reveals(event) {
                    let label = node.children()[i].label.clone();
                    observations.push(Observation {
                        event,
                        tag: format!("e{}{}", event + 1, tag),
                        label: label.clone(),
                    });
                    tag.push('/');
                    tag.push_str(&label);
                }
                cur = node.children()[i].child;
            }
            NodeKind::Decision { infoset, .. } => {
                let a = policy(*infoset, rng);
                decisions.push((*infoset, a));
                cur = node.children()[a].child;
            }
        }
    }
}

/// Samples one trace of `profile`.
pub fn simulate<R: Rng + ?Sized>(
    tree: &GameTree,
    profile: &StrategyProfile,
    obs: ObservationModel,
    noise_variance: f64,
    rng: &mut R,
) -> SimulationTrace {
    let ep = play(tree, obs, noise_variance, rng, |set, r| sample_index(profile.dist(set), r));
    SimulationTrace {
        observations: ep.observations,
        payoffs: ep.payoffs,
        terminal: ep.terminal,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game_tree::{NodeSpec, TreeBuilder};
    use crate::games::generate_game1;
    use crate::rng;

    #[test]
    fn noiseless_deterministic_path() {
        let mut b = TreeBuilder::new(2);
        let r = b.root(NodeSpec::decision(1, "I"));
        let c = b.child(r, "x", NodeSpec::Chance);
        b.child(r, "y", NodeSpec::Terminal(vec![0.0, 0.0]));
        b.chance_child(c, "A", 1.0, NodeSpec::Terminal(vec![2.5, -1.0]));
        let t = b.build().unwrap();
        let p = StrategyProfile::from_pure(&t, &[vec![0], vec![]]).unwrap();
        let mut g = rng::stream(1, &[]);
        let tr = simulate(&t, &p, ObservationModel::first(1), 0.0, &mut g);
        assert_eq!(tr.payoffs, vec![2.5, -1.0]);
        assert_eq!(tr.labels(), vec!["A"]);
    }

    #[test]
    fn chance_frequency_matches() {
        let t = generate_game1(9);
        let p = StrategyProfile::from_pure(&t, &[vec![0], vec![0, 0]]).unwrap();
        let c = t.node(t.root()).children()[0].child;
        let pa = t.node(c).chance_probs().unwrap()[0];
        let mut g = rng::stream(2, &[]);
        let n = 100_000;
        let hits = (0..n)
            .filter(|_| simulate(&t, &p, ObservationModel::first(1), 0.1, &mut g).labels()[0] == "A")
            .count();
        let sd = (pa * (1.0 - pa) / n as f64).sqrt();
        assert!((hits as f64 / n as f64 - pa).abs() <= 4.0 * sd);
    }

    #[test]
    fn hidden_events_are_not_reported() {
        let t = generate_game1(9);
        let p = StrategyProfile::uniform(&t);
        let mut g = rng::stream(3, &[]);
        let tr = simulate(&t, &p, ObservationModel::first(0), 0.1, &mut g);
        assert!(tr.observations.is_empty());
        assert_eq!(tr.payoffs.len(), 2);
    }

    #[test]
    fn noise_is_centered() {
        let mut b = TreeBuilder::new(2);
        b.root(NodeSpec::Terminal(vec![1.25, 3.0]));
        let t = b.build().unwrap();
        let p = StrategyProfile::uniform(&t);
        let mut g = rng::stream(4, &[]);
        let n = 100_000;
        let mut sums = [0.0; 2];
        for _ in 0..n {
            let tr = simulate(&t, &p, ObservationModel::first(0), 0.1, &mut g);
            sums[0] += tr.payoffs[0];
            sums[1] += tr.payoffs[1];
        }
        let tol = 4.0 * (0.1f64 / n as f64).sqrt();
        assert!((sums[0] / n as f64 - 1.25).abs() <= tol);
        assert!((sums[1] / n as f64 - 3.0).abs() <= tol);
    }
}

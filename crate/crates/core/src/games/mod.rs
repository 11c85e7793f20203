//! Benchmark game generators and the noisy black-box simulator.

pub mod fixtures;
mod simulator;

pub use simulator::{play, simulate, Episode, Observation, ObservationModel, SimulationTrace};
pub(crate) use simulator::sample_index as simulator_sample;

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::game_tree::{GameTree, NodeId, NodeSpec, TreeBuilder};
use crate::rng::{self, purpose};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GameId {
    Game1,
    Game2,
    Game3,
}

impl GameId {
    /// Number of chance events along every path.
    pub fn num_events(self) -> usize {
        match self {
            GameId::Game1 => 1,
            GameId::Game2 => 2,
            GameId::Game3 => 3,
        }
    }
}

impl fmt::Display for GameId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GameId::Game1 => "game1",
            GameId::Game2 => "game2",
            GameId::Game3 => "game3",
        })
    }
}

impl FromStr for GameId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "game1" => Ok(GameId::Game1),
            "game2" => Ok(GameId::Game2),
            "game3" => Ok(GameId::Game3),
            other => Err(format!("unknown game {other:?} (expected game1, game2 or game3)")),
        }
    }
}

/// A generated game instance: which game, and the seed it was drawn from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GameSpec {
    pub game: GameId,
    pub seed: u64,
    /// Rounds of the third game; ignored by the others.
    #[serde(default = "default_rounds")]
    pub rounds: usize,
}

fn default_rounds() -> usize {
    3
}

impl GameSpec {
    pub fn new(game: GameId, seed: u64) -> Self {
        GameSpec {
            game,
            seed,
            rounds: default_rounds(),
        }
    }

    pub fn build(&self) -> GameTree {
        match self.game {
            GameId::Game1 => generate_game1(self.seed),
            GameId::Game2 => generate_game2(self.seed),
            GameId::Game3 => generate_game3_rounds(self.seed, self.rounds),
        }
    }

    pub fn num_events(&self) -> usize {
        match self.game {
            GameId::Game3 => self.rounds,
            g => g.num_events(),
        }
    }
}

const GAME1_ACTIONS: usize = 10;

/// Uniform draw from `{0, 1/per_unit, ..., max}`.
fn grid<R: Rng>(rng: &mut R, max: f64, per_unit: f64) -> f64 {
    let k = (max * per_unit).round() as u32;
    f64::from(rng.gen_range(0..=k)) / per_unit
}

fn labels(prefix: &str, n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("{prefix}{i}")).collect()
}

/// Player 1 picks one of ten actions, Nature draws A or B with a
/// per-action probability, and player 2 picks one of ten actions knowing
/// only the chance outcome. 200 leaves with utilities on a 0.25 grid in [0, 5].
pub fn generate_game1(seed: u64) -> GameTree {
    let mut rng = rng::stream(seed, &[purpose::GAME, 1]);
    let p1 = labels("a", GAME1_ACTIONS);
    let p2 = labels("b", GAME1_ACTIONS);
    let mut b = TreeBuilder::new(2);
    let root = b.root(NodeSpec::decision(1, "1"));
    for a in &p1 {
        let pa: f64 = rng.gen();
        let c = b.child(root, a, NodeSpec::Chance);
        for (e, p) in [("A", pa), ("B", 1.0 - pa)] {
            let h = b.chance_child(c, e, p, NodeSpec::decision(2, format!("2{e}")));
            for act in &p2 {
                let u = vec![grid(&mut rng, 5.0, 4.0), grid(&mut rng, 5.0, 4.0)];
                b.child(h, act, NodeSpec::Terminal(u));
            }
        }
    }
    b.build().expect("generated game is valid")
}

/// The first game followed by a second event C/D, whose probability depends
/// on the first event and player 2's action, and a second player-1 turn
/// that sees its own first action and the second event. Utilities on a 0.1
/// grid in [0, 10].
pub fn generate_game2(seed: u64) -> GameTree {
    let mut rng = rng::stream(seed, &[purpose::GAME, 2]);
    let p1 = labels("a", GAME1_ACTIONS);
    let p2 = labels("b", GAME1_ACTIONS);
    let p1b = labels("c", GAME1_ACTIONS);
    let pa: Vec<f64> = (0..GAME1_ACTIONS).map(|_| rng.gen()).collect();
    // P(C | e1, player 2 action)
    let pc: Vec<Vec<f64>> = (0..2)
        .map(|_| (0..GAME1_ACTIONS).map(|_| rng.gen()).collect())
        .collect();
    let mut b = TreeBuilder::new(2);
    let root = b.root(NodeSpec::decision(1, "1"));
    for (i, a) in p1.iter().enumerate() {
        let c = b.child(root, a, NodeSpec::Chance);
        for (ei, (e, p)) in [("A", pa[i]), ("B", 1.0 - pa[i])].into_iter().enumerate() {
            let h = b.chance_child(c, e, p, NodeSpec::decision(2, format!("2{e}")));
            for (k, act) in p2.iter().enumerate() {
                let c2 = b.child(h, act, NodeSpec::Chance);
                let q = pc[ei][k];
                for (e2, p2c) in [("C", q), ("D", 1.0 - q)] {
                    let g = b.chance_child(c2, e2, p2c, NodeSpec::decision(1, format!("1{a}{e2}")));
                    for act2 in &p1b {
                        let u = vec![grid(&mut rng, 10.0, 10.0), grid(&mut rng, 10.0, 10.0)];
                        b.child(g, act2, NodeSpec::Terminal(u));
                    }
                }
            }
        }
    }
    b.build().expect("generated game is valid")
}

pub fn generate_game3(seed: u64) -> GameTree {
    generate_game3_rounds(seed, 3)
}

/// Rounds of (Nature, player 1, player 2), each picking from the options it
/// has not used yet, four to start with. Within a round each player sees
/// the chance outcome and everything from earlier rounds, but player 2 does
/// not see player 1's current action. Chance outcomes have normalized
/// uniform weights; utilities sit on a 0.25 grid in [0, 5].
pub fn generate_game3_rounds(seed: u64, rounds: usize) -> GameTree {
    const OPTIONS: usize = 4;
    assert!(
        (1..=OPTIONS).contains(&rounds),
        "rounds must be between 1 and {OPTIONS}"
    );
    let mut rng = rng::stream(seed, &[purpose::GAME, 3, rounds as u64]);
    let events = ["A", "B", "C", "D"];
    let mut b = TreeBuilder::new(2);
    let root = b.root(NodeSpec::Chance);

    struct Frame {
        node: NodeId,
        round: usize,
        used_e: Vec<usize>,
        used_a: Vec<usize>,
        used_b: Vec<usize>,
        key: String,
    }
    let mut stack = vec![Frame {
        node: root,
        round: 0,
        used_e: vec![],
        used_a: vec![],
        used_b: vec![],
        key: String::new(),
    }];
    while let Some(f) = stack.pop() {
        let free = |used: &[usize]| (0..OPTIONS).filter(|x| !used.contains(x)).collect::<Vec<_>>();
        let es = free(&f.used_e);
        let weights: Vec<f64> = es.iter().map(|_| 1.0 - rng.gen::<f64>()).collect();
        let z: f64 = weights.iter().sum();
        for (&e, w) in es.iter().zip(&weights) {
            let key = if f.key.is_empty() {
                events[e].to_string()
            } else {
                format!("{}.{}", f.key, events[e])
            };
            let h1 = b.chance_child(f.node, events[e], w / z, NodeSpec::decision(1, key.clone()));
            for a in free(&f.used_a) {
                let la = format!("a{}", a + 1);
                let h2 = b.child(h1, &la, NodeSpec::decision(2, key.clone()));
                for bb in free(&f.used_b) {
                    let lb = format!("b{}", bb + 1);
                    let last = f.round + 1 == rounds;
                    let spec = if last {
                        NodeSpec::Terminal(vec![grid(&mut rng, 5.0, 4.0), grid(&mut rng, 5.0, 4.0)])
                    } else {
                        NodeSpec::Chance
                    };
                    let next = b.child(h2, &lb, spec);
                    if !last {
                        let mut used_e = f.used_e.clone();
                        used_e.push(e);
                        let mut used_a = f.used_a.clone();
                        used_a.push(a);
                        let mut used_b = f.used_b.clone();
                        used_b.push(bb);
                        stack.push(Frame {
                            node: next,
                            round: f.round + 1,
                            used_e,
                            used_a,
                            used_b,
                            key: format!("{key}.{la}.{lb}"),
                        });
                    }
                }
            }
        }
    }
    b.build().expect("generated game is valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn game1_shape() {
        let t = generate_game1(3);
        assert!(t.validate().is_valid());
        assert_eq!(t.num_leaves(), 200);
        assert_eq!(t.player_infosets(2).len(), 2);
        assert_eq!(t.player_infosets(1).len(), 1);
        for n in t.nodes() {
            if let Some(u) = n.utility() {
                for &x in u {
                    assert!((0.0..=5.0).contains(&x));
                    assert_eq!((x * 4.0).fract(), 0.0);
                }
            }
        }
    }

    #[test]
    fn game2_shape() {
        let t = generate_game2(3);
        assert_eq!(t.num_leaves(), 4000);
        assert_eq!(t.player_infosets(1).len(), 21);
        assert_eq!(t.player_infosets(2).len(), 2);
    }

    #[test]
    fn game2_second_event_depends_on_first_event_and_reply_only() {
        let t = generate_game2(11);
        // the C/D node after (a1, A, b4) and (a7, A, b4) share P(C)
        let find = |path: [&str; 3]| {
            let mut cur = t.root();
            for l in path {
                cur = t.node(cur).children().iter().find(|e| e.label == l).unwrap().child;
            }
            t.node(cur).chance_probs().unwrap().to_vec()
        };
        assert_eq!(find(["a1", "A", "b4"]), find(["a7", "A", "b4"]));
        assert_ne!(find(["a1", "A", "b4"]), find(["a1", "B", "b4"]));
    }

    #[test]
    fn game3_shape() {
        let t = generate_game3(5);
        assert_eq!(t.player_infosets(1).len(), 3652);
        assert_eq!(t.player_infosets(2).len(), 3652);
        assert_eq!(t.num_leaves(), 13824);
        // after e1 = A, Nature can only pick B, C or D
        let p1 = t.node(t.root()).children()[0].child;
        let p2 = t.node(p1).children()[0].child;
        let c2 = t.node(p2).children()[0].child;
        let outs: Vec<_> = t.node(c2).children().iter().map(|e| e.label.as_str()).collect();
        assert_eq!(outs, vec!["B", "C", "D"]);
    }

    #[test]
    fn game3_two_rounds() {
        let t = generate_game3_rounds(5, 2);
        assert_eq!(t.player_infosets(1).len(), 4 + 192);
        assert_eq!(t.num_leaves(), 64 * 27);
    }

    #[test]
    fn generators_are_deterministic() {
        let a = generate_game1(42);
        let b = generate_game1(42);
        let c = generate_game1(43);
        let leaves = |t: &GameTree| {
            t.nodes()
                .iter()
                .filter_map(|n| n.utility().map(<[f64]>::to_vec))
                .collect::<Vec<_>>()
        };
        assert_eq!(leaves(&a), leaves(&b));
        assert_ne!(leaves(&a), leaves(&c));
    }

    #[test]
    fn game_id_parses() {
        assert_eq!("game2".parse::<GameId>().unwrap(), GameId::Game2);
        assert!("game4".parse::<GameId>().is_err());
    }
}

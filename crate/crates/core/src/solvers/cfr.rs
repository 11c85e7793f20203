//! Vanilla counterfactual regret minimization with regret matching.

use crate::game_tree::{GameTree, NodeId, NodeKind, Regret, StrategyProfile};

use super::SolverError;

#[derive(Clone, Debug)]
pub struct CfrResult {
    /// Reach-weighted average strategy.
    pub average: StrategyProfile,
    /// Regret of `average` in the game it was computed on.
    pub exploitability: Regret,
}

struct Tables {
    regrets: Vec<Vec<f64>>,
    strategy_sum: Vec<Vec<f64>>,
    current: Vec<Vec<f64>>,
}

fn regret_matching(regrets: &[f64], out: &mut [f64]) {
    let pos: f64 = regrets.iter().map(|r| r.max(0.0)).sum();
    if pos > 0.0 {
        for (o, r) in out.iter_mut().zip(regrets) {
            *o = r.max(0.0) / pos;
        }
    } else {
        let k = out.len() as f64;
        out.iter_mut().for_each(|o| *o = 1.0 / k);
    }
}

/// Runs `iterations` simultaneous-update CFR passes over `tree`.
pub fn cfr(tree: &GameTree, iterations: usize) -> Result<CfrResult, SolverError> {
    if iterations == 0 {
        return Err(SolverError::NoIterations);
    }
    let sizes: Vec<usize> = tree.infosets().iter().map(|s| s.actions().len()).collect();
    let mut t = Tables {
        regrets: sizes.iter().map(|&k| vec![0.0; k]).collect(),
        strategy_sum: sizes.iter().map(|&k| vec![0.0; k]).collect(),
        current: sizes.iter().map(|&k| vec![1.0 / k as f64; k]).collect(),
    };
    let n = tree.num_players();
    let mut reach = vec![1.0; n + 1];
    for _ in 0..iterations {
        for (cur, reg) in t.current.iter_mut().zip(&t.regrets) {
            regret_matching(reg, cur);
        }
        walk(tree, tree.root(), &mut reach, &mut t);
    }
    let mut average = StrategyProfile::uniform(tree);
    for (i, sum) in t.strategy_sum.iter().enumerate() {
        let z: f64 = sum.iter().sum();
        if z > 0.0 {
            average.set_dist(crate::game_tree::InfosetId(i), sum.iter().map(|s| s / z).collect());
        }
    }
    let exploitability = tree
        .regret(&average)
        .map_err(|e| SolverError::Game(e.to_string()))?;
    Ok(CfrResult {
        average,
        exploitability,
    })
}

/// Returns every player's value of the subtree; `reach[0]` is chance.
fn walk(tree: &GameTree, id: NodeId, reach: &mut Vec<f64>, t: &mut Tables) -> Vec<f64> {
    let node = tree.node(id);
    match node.kind() {
        NodeKind::Terminal { utility } => utility.clone(),
        NodeKind::Chance { probs } => {
            let mut v = vec![0.0; reach.len() - 1];
            let saved = reach[0];
            for (e, &p) in node.children().iter().zip(probs) {
                if p == 0.0 {
                    continue;
                }
                reach[0] = saved * p;
                let c = walk(tree, e.child, reach, t);
                for (x, y) in v.iter_mut().zip(c) {
                    *x += p * y;
                }
            }
            reach[0] = saved;
            v
        }
        NodeKind::Decision { player, infoset } => {
            let p = *player;
            let s = infoset.0;
            let sigma = t.current[s].clone();
            let saved = reach[p];
            let mut child_vals = Vec::with_capacity(sigma.len());
            let mut v = vec![0.0; reach.len() - 1];
            for (e, &w) in node.children().iter().zip(&sigma) {
                reach[p] = saved * w;
                let c = walk(tree, e.child, reach, t);
                for (x, y) in v.iter_mut().zip(&c) {
                    *x += w * y;
                }
                child_vals.push(c[p - 1]);
            }
            reach[p] = saved;
            let others: f64 = reach
                .iter()
                .enumerate()
                .filter(|(q, _)| *q != p)
                .map(|(_, r)| r)
                .product();
            for (a, cv) in child_vals.iter().enumerate() {
                t.regrets[s][a] += others * (cv - v[p - 1]);
                t.strategy_sum[s][a] += saved * sigma[a];
            }
            v
        }
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::games::fixtures::kuhn_poker as kuhn;
    use crate::game_tree::{NodeSpec, TreeBuilder};

    fn one_shot() -> GameTree {
        let mut b = TreeBuilder::new(1);
        let r = b.root(NodeSpec::decision(1, "I"));
        for (l, u) in [("a", 1.0), ("b", 3.0), ("c", 2.0)] {
            b.child(r, l, NodeSpec::Terminal(vec![u]));
        }
        b.build().unwrap()
    }

    #[test]
    fn bandit_concentrates() {
        let t = one_shot();
        let res = cfr(&t, 1000).unwrap();
        let d = res.average.dist(t.player_infosets(1)[0]);
        assert!(d[1] > 0.99, "{d:?}");
        assert!(cfr(&t, 0).is_err());
    }

    #[test]
    fn matching_pennies_converges() {
        let mut b = TreeBuilder::new(2);
        let r = b.root(NodeSpec::decision(1, "p1"));
        for a in ["H", "T"] {
            let h = b.child(r, a, NodeSpec::decision(2, "p2"));
            for c in ["H", "T"] {
                let u = if a == c { 1.0 } else { -1.0 };
                b.child(h, c, NodeSpec::Terminal(vec![u, -u]));
            }
        }
        let t = b.build().unwrap();
        let res = cfr(&t, 10_000).unwrap();
        for s in t.infosets() {
            let i = t.find_infoset(s.player(), s.name()).unwrap();
            assert!((res.average.dist(i)[0] - 0.5).abs() < 1e-2);
        }
    }

    #[test]
    fn kuhn_exploitability_shrinks() {
        let t = kuhn();
        assert_eq!(t.player_infosets(1).len(), 6);
        assert_eq!(t.player_infosets(2).len(), 6);
        let e2 = cfr(&t, 100).unwrap().exploitability.total;
        let e3 = cfr(&t, 1000).unwrap().exploitability.total;
        let e4 = cfr(&t, 10_000).unwrap().exploitability.total;
        assert!(e3 <= e2 && e4 <= e3, "{e2} {e3} {e4}");
        assert!(e4 < 0.01, "{e4}");
    }
}

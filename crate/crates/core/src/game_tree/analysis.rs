use super::{GameTree, InfosetId, NodeId, NodeKind, PureStrategy, StrategyProfile, TreeError};

/// Reach probability of a node split by contributor.
#[derive(Clone, Debug, PartialEq)]
pub struct Reach {
    pub chance: f64,
    /// Factor of player `j` at index `j - 1`.
    pub players: Vec<f64>,
}

impl Reach {
    pub fn total(&self) -> f64 {
        self.chance * self.players.iter().product::<f64>()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BestResponse {
    pub player: usize,
    pub strategy: PureStrategy,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Regret {
    /// Regret of player `j` at index `j - 1`.
    pub per_player: Vec<f64>,
    pub total: f64,
}

/// Payoff slack below which a negative regret is treated as zero.
const REGRET_SLACK: f64 = 1e-9;

impl GameTree {
    pub fn reach_probability(&self, node: NodeId, profile: &StrategyProfile) -> Result<Reach, TreeError> {
        self.get_node(node)?;
        let mut reach = Reach {
            chance: 1.0,
            players: vec![1.0; self.num_players()],
        };
        for (h, a) in self.path(node) {
            match &self.node(h).kind {
                NodeKind::Chance { probs } => reach.chance *= probs[a],
                NodeKind::Decision { player, infoset } => {
                    reach.players[player - 1] *= profile.prob(*infoset, a)
                }
                NodeKind::Terminal { .. } => unreachable!("terminal on a path"),
            }
        }
        Ok(reach)
    }

    pub fn expected_payoff(&self, profile: &StrategyProfile) -> Result<Vec<f64>, TreeError> {
        profile.check(self)?;
        let mut out = vec![0.0; self.num_players()];
        self.accumulate(self.root(), 1.0, profile, &mut out);
        Ok(out)
    }

    fn accumulate(&self, id: NodeId, weight: f64, profile: &StrategyProfile, out: &mut [f64]) {
        let node = self.node(id);
        match &node.kind {
            NodeKind::Terminal { utility } => {
                for (o, u) in out.iter_mut().zip(utility) {
                    *o += weight * u;
                }
            }
            NodeKind::Chance { probs } => {
                for (e, &p) in node.children.iter().zip(probs) {
                    if p > 0.0 {
                        self.accumulate(e.child, weight * p, profile, out);
                    }
                }
            }
            NodeKind::Decision { infoset, .. } => {
                for (e, &p) in node.children.iter().zip(profile.dist(*infoset)) {
                    if p > 0.0 {
                        self.accumulate(e.child, weight * p, profile, out);
                    }
                }
            }
        }
    }

    /// Exact best response of `player` to the other players' strategies in
    /// `profile` (its own entries are ignored). Ties go to the lowest action
    /// index.
    pub fn best_response(&self, player: usize, profile: &StrategyProfile) -> Result<BestResponse, TreeError> {
        self.check_player(player)?;
        profile.check(self)?;
        let n = self.nodes().len();

        // reach of every node from chance and the other players
        let mut opp = vec![0.0; n];
        let mut stack = vec![(self.root(), 1.0)];
        while let Some((id, w)) = stack.pop() {
            opp[id.0] = w;
            let node = self.node(id);
            match &node.kind {
                NodeKind::Terminal { .. } => {}
                NodeKind::Chance { probs } => {
                    for (e, &p) in node.children.iter().zip(probs) {
                        stack.push((e.child, w * p));
                    }
                }
                NodeKind::Decision { player: p, infoset } => {
                    let d = profile.dist(*infoset);
                    for (a, e) in node.children.iter().enumerate() {
                        let f = if *p == player { 1.0 } else { d[a] };
                        stack.push((e.child, w * f));
                    }
                }
            }
        }

        let mut order: Vec<InfosetId> = self.player_infosets(player).to_vec();
        order.sort_by_key(|s| std::cmp::Reverse(self.infoset(*s).own_history().len()));

        let mut choice: Vec<Option<usize>> = vec![None; self.infosets().len()];
        let mut memo: Vec<Option<f64>> = vec![None; n];
        for set in order {
            let info = self.infoset(set);
            let k = info.actions().len();
            let mut vals = vec![0.0; k];
            for &h in info.nodes() {
                let w = opp[h.0];
                if w == 0.0 {
                    continue;
                }
                for (a, e) in self.node(h).children.iter().enumerate() {
                    vals[a] += w * self.br_value(e.child, player, profile, &choice, &mut memo);
                }
            }
            choice[set.0] = Some(argmax_lowest(&vals));
        }
        let value = self.br_value(self.root(), player, profile, &choice, &mut memo);
        let strategy = self
            .player_infosets(player)
            .iter()
            .map(|s| choice[s.0].unwrap_or(0))
            .collect();
        Ok(BestResponse {
            player,
            strategy,
            value,
        })
    }

    /// Value to `player` of the subtree at `id`, weighted only by
    /// probabilities below `id`, with `player` following `choice`.
    fn br_value(
        &self,
        id: NodeId,
        player: usize,
        profile: &StrategyProfile,
        choice: &[Option<usize>],
        memo: &mut [Option<f64>],
    ) -> f64 {
        if let Some(v) = memo[id.0] {
            return v;
        }
        let node = self.node(id);
        let v = match &node.kind {
            NodeKind::Terminal { utility } => utility[player - 1],
            NodeKind::Chance { probs } => {
                let mut s = 0.0;
                for (e, &p) in node.children.iter().zip(probs) {
                    if p > 0.0 {
                        s += p * self.br_value(e.child, player, profile, choice, memo);
                    }
                }
                s
            }
            NodeKind::Decision { player: p, infoset } if *p == player => {
                let a = choice[infoset.0].expect("deeper infosets are decided first");
                self.br_value(node.children[a].child, player, profile, choice, memo)
            }
            NodeKind::Decision { infoset, .. } => {
                let mut s = 0.0;
                for (e, &p) in node.children.iter().zip(profile.dist(*infoset)) {
                    if p > 0.0 {
                        s += p * self.br_value(e.child, player, profile, choice, memo);
                    }
                }
                s
            }
        };
        memo[id.0] = Some(v);
        v
    }

    pub fn regret(&self, profile: &StrategyProfile) -> Result<Regret, TreeError> {
        let u = self.expected_payoff(profile)?;
        let mut per_player = Vec::with_capacity(self.num_players());
        for j in 1..=self.num_players() {
            let br = self.best_response(j, profile)?;
            let r = br.value - u[j - 1];
            per_player.push(if r < 0.0 && r > -REGRET_SLACK { 0.0 } else { r });
        }
        let total = per_player.iter().sum();
        Ok(Regret { per_player, total })
    }

    pub fn is_eps_nash(&self, profile: &StrategyProfile, eps: f64) -> Result<bool, TreeError> {
        if eps < 0.0 || eps.is_nan() {
            return Err(TreeError::NegativeEpsilon(eps));
        }
        Ok(self.regret(profile)?.per_player.iter().all(|&r| r <= eps))
    }
}

/// Index of the maximum, preferring the lowest index among near-ties.
pub(crate) fn argmax_lowest(vals: &[f64]) -> usize {
    let best = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let tol = 1e-12 * (1.0 + best.abs());
    vals.iter().position(|&v| v >= best - tol).unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::super::{NodeSpec, TreeBuilder};
    use super::*;

    fn matching_pennies() -> GameTree {
        let mut b = TreeBuilder::new(2);
        let r = b.root(NodeSpec::decision(1, "p1"));
        for a in ["H", "T"] {
            let h = b.child(r, a, NodeSpec::decision(2, "p2"));
            for c in ["H", "T"] {
                let u = if a == c { 1.0 } else { -1.0 };
                b.child(h, c, NodeSpec::Terminal(vec![u, -u]));
            }
        }
        b.build().unwrap()
    }

    #[test]
    fn root_reach_is_one() {
        let t = matching_pennies();
        let p = StrategyProfile::uniform(&t);
        assert_eq!(t.reach_probability(t.root(), &p).unwrap().total(), 1.0);
        assert!(t.reach_probability(NodeId(999), &p).is_err());
    }

    #[test]
    fn chance_leaf_reach() {
        let mut b = TreeBuilder::new(2);
        let r = b.root(NodeSpec::decision(1, "a"));
        let c = b.child(r, "x", NodeSpec::Chance);
        let h = b.chance_child(c, "A", 0.3, NodeSpec::decision(2, "b"));
        b.chance_child(c, "B", 0.7, NodeSpec::Terminal(vec![0.0, 0.0]));
        let leaf = b.child(h, "y", NodeSpec::Terminal(vec![1.0, 1.0]));
        let t = b.build().unwrap();
        let p = StrategyProfile::from_pure(&t, &[vec![0], vec![0]]).unwrap();
        let reach = t.reach_probability(leaf, &p).unwrap();
        assert!((reach.total() - 0.3).abs() < 1e-15);
        assert_eq!(reach.players, vec![1.0, 1.0]);
    }

    #[test]
    fn single_leaf_payoff() {
        let mut b = TreeBuilder::new(2);
        b.root(NodeSpec::Terminal(vec![3.0, -1.0]));
        let t = b.build().unwrap();
        let p = StrategyProfile::uniform(&t);
        assert_eq!(t.expected_payoff(&p).unwrap(), vec![3.0, -1.0]);
    }

    #[test]
    fn chance_mixture_payoff() {
        let mut b = TreeBuilder::new(1);
        let r = b.root(NodeSpec::Chance);
        b.chance_child(r, "A", 0.55, NodeSpec::Terminal(vec![10.0]));
        b.chance_child(r, "B", 0.45, NodeSpec::Terminal(vec![0.0]));
        let t = b.build().unwrap();
        let u = t.expected_payoff(&StrategyProfile::uniform(&t)).unwrap();
        assert!((u[0] - 5.5).abs() < 1e-12);
    }

    #[test]
    fn best_response_argmax_and_ties() {
        let mut b = TreeBuilder::new(1);
        let r = b.root(NodeSpec::decision(1, "I"));
        for (l, u) in [("a", 0.0), ("b", 5.0), ("c", 2.0)] {
            b.child(r, l, NodeSpec::Terminal(vec![u]));
        }
        let t = b.build().unwrap();
        let br = t.best_response(1, &StrategyProfile::uniform(&t)).unwrap();
        assert_eq!(br.strategy, vec![1]);
        assert_eq!(br.value, 5.0);
        assert!(t.best_response(0, &StrategyProfile::uniform(&t)).is_err());
        assert!(t.best_response(2, &StrategyProfile::uniform(&t)).is_err());

        // uniform matching pennies: both replies earn 0
        let mp = matching_pennies();
        let br = mp.best_response(2, &StrategyProfile::uniform(&mp)).unwrap();
        assert_eq!(br.strategy, vec![0]);
    }

    #[test]
    fn regret_at_equilibrium() {
        let mp = matching_pennies();
        let p = StrategyProfile::uniform(&mp);
        let reg = mp.regret(&p).unwrap();
        assert!(reg.total.abs() < 1e-12);
        assert!(mp.is_eps_nash(&p, 0.0).unwrap());
        assert!(mp.is_eps_nash(&p, -0.1).is_err());

        let pure = StrategyProfile::from_pure(&mp, &[vec![0], vec![0]]).unwrap();
        let reg = mp.regret(&pure).unwrap();
        assert_eq!(reg.per_player, vec![0.0, 2.0]);
        assert!(!mp.is_eps_nash(&pure, 0.1).unwrap());
    }
}

use super::{GameTree, InfosetId, TreeError, PROB_TOL};

/// A pure strategy of one player: one action index per infoset, aligned
/// with [`GameTree::player_infosets`].
pub type PureStrategy = Vec<usize>;

/// Pure strategies for players `1..=n`, stored at index `j - 1`.
pub type PureProfile = Vec<PureStrategy>;

/// Behavioral strategies for every player, indexed by global infoset id.
#[derive(Clone, Debug, PartialEq)]
pub struct StrategyProfile {
    dists: Vec<Vec<f64>>,
}

impl StrategyProfile {
    pub fn uniform(tree: &GameTree) -> Self {
        StrategyProfile {
            dists: tree
                .infosets()
                .iter()
                .map(|set| {
                    let k = set.actions().len();
                    vec![1.0 / k as f64; k]
                })
                .collect(),
        }
    }

    pub fn from_pure(tree: &GameTree, profile: &[PureStrategy]) -> Result<Self, TreeError> {
        if profile.len() != tree.num_players() {
            return Err(TreeError::ProfileMismatch(format!(
                "{} pure strategies for {} players",
                profile.len(),
                tree.num_players()
            )));
        }
        let mut out = Self::uniform(tree);
        for (j, pure) in profile.iter().enumerate() {
            out.set_pure(tree, j + 1, pure)?;
        }
        Ok(out)
    }

    pub fn set_pure(&mut self, tree: &GameTree, player: usize, pure: &[usize]) -> Result<(), TreeError> {
        tree.check_player(player)?;
        let sets = tree.player_infosets(player);
        if sets.len() != pure.len() {
            return Err(TreeError::ProfileMismatch(format!(
                "player {player} has {} infosets, strategy covers {}",
                sets.len(),
                pure.len()
            )));
        }
        for (&set, &a) in sets.iter().zip(pure) {
            let d = &mut self.dists[set.0];
            if a >= d.len() {
                return Err(TreeError::ProfileMismatch(format!(
                    "action {a} out of range at infoset {:?}",
                    tree.infoset(set).name()
                )));
            }
            d.iter_mut().for_each(|p| *p = 0.0);
            d[a] = 1.0;
        }
        Ok(())
    }

    /// Replaces `player`'s strategy by the behavioral equivalent of a
    /// mixture over pure strategies. At each infoset the mixture is
    /// conditioned on the player's own actions leading there; where no
    /// mixture component reaches the infoset the unconditioned mixture is
    /// used instead.
    pub fn set_mixture(
        &mut self,
        tree: &GameTree,
        player: usize,
        mixture: &[(f64, &PureStrategy)],
    ) -> Result<(), TreeError> {
        tree.check_player(player)?;
        let sets = tree.player_infosets(player);
        for (_, pure) in mixture {
            if pure.len() != sets.len() {
                return Err(TreeError::ProfileMismatch("mixture component length".into()));
            }
        }
        for &set in sets {
            let info = tree.infoset(set);
            let k = info.actions().len();
            let mut cond = vec![0.0; k];
            let mut flat = vec![0.0; k];
            for &(w, pure) in mixture {
                let a = pure[info.local_index()];
                if a >= k {
                    return Err(TreeError::ProfileMismatch(format!("action {a} out of range")));
                }
                flat[a] += w;
                let consistent = info
                    .own_history()
                    .iter()
                    .all(|&(prev, b)| pure[tree.infoset(prev).local_index()] == b);
                if consistent {
                    cond[a] += w;
                }
            }
            let total: f64 = cond.iter().sum();
            let src = if total > 0.0 { cond } else { flat };
            let z: f64 = src.iter().sum();
            self.dists[set.0] = if z > 0.0 {
                src.iter().map(|w| w / z).collect()
            } else {
                vec![1.0 / k as f64; k]
            };
        }
        Ok(())
    }

    /// Copies `player`'s infoset distributions from `other`.
    pub fn take_player(&mut self, tree: &GameTree, player: usize, other: &StrategyProfile) {
        for &set in tree.player_infosets(player) {
            self.dists[set.0] = other.dists[set.0].clone();
        }
    }

    pub fn dist(&self, set: InfosetId) -> &[f64] {
        &self.dists[set.0]
    }

    pub fn prob(&self, set: InfosetId, action: usize) -> f64 {
        self.dists[set.0][action]
    }

    pub fn set_dist(&mut self, set: InfosetId, dist: Vec<f64>) {
        self.dists[set.0] = dist;
    }

    /// Checks shape and normalization against `tree`.
    pub fn check(&self, tree: &GameTree) -> Result<(), TreeError> {
        if self.dists.len() != tree.infosets().len() {
            return Err(TreeError::ProfileMismatch("infoset count".into()));
        }
        for (d, set) in self.dists.iter().zip(tree.infosets()) {
            if d.len() != set.actions().len() {
                return Err(TreeError::ProfileMismatch(format!(
                    "infoset {:?} has {} actions, distribution has {}",
                    set.name(),
                    set.actions().len(),
                    d.len()
                )));
            }
            let s: f64 = d.iter().sum();
            if d.iter().any(|&p| p < 0.0) || (s - 1.0).abs() > PROB_TOL {
                return Err(TreeError::ProfileMismatch(format!(
                    "distribution at {:?} is not normalized",
                    set.name()
                )));
            }
        }
        Ok(())
    }

    /// Pure strategy for `player` if every one of its distributions is a point mass.
    pub fn as_pure(&self, tree: &GameTree, player: usize) -> Option<PureStrategy> {
        tree.player_infosets(player)
            .iter()
            .map(|s| self.dists[s.0].iter().position(|&p| p == 1.0))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::super::{NodeSpec, TreeBuilder};
    use super::*;

    fn two_stage() -> GameTree {
        // player 1 moves, then moves again knowing its first action
        let mut b = TreeBuilder::new(1);
        let r = b.root(NodeSpec::decision(1, "a"));
        for (l, name) in [("L", "bL"), ("R", "bR")] {
            let h = b.child(r, l, NodeSpec::decision(1, name));
            b.child(h, "x", NodeSpec::Terminal(vec![0.0]));
            b.child(h, "y", NodeSpec::Terminal(vec![1.0]));
        }
        b.build().unwrap()
    }

    #[test]
    fn mixture_conditions_on_own_reach() {
        let tree = two_stage();
        let s1 = vec![0, 0, 1]; // L, then x at bL, y at bR
        let s2 = vec![1, 1, 0]; // R, then y at bL, x at bR
        let mut prof = StrategyProfile::uniform(&tree);
        prof.set_mixture(&tree, 1, &[(0.25, &s1), (0.75, &s2)]).unwrap();
        let a = tree.find_infoset(1, "a").unwrap();
        let bl = tree.find_infoset(1, "bL").unwrap();
        let br = tree.find_infoset(1, "bR").unwrap();
        assert_eq!(prof.dist(a), &[0.25, 0.75]);
        // only s1 reaches bL, only s2 reaches bR
        assert_eq!(prof.dist(bl), &[1.0, 0.0]);
        assert_eq!(prof.dist(br), &[1.0, 0.0]);
        prof.check(&tree).unwrap();
    }

    #[test]
    fn pure_roundtrip() {
        let tree = two_stage();
        let prof = StrategyProfile::from_pure(&tree, &[vec![1, 0, 1]]).unwrap();
        assert_eq!(prof.as_pure(&tree, 1), Some(vec![1, 0, 1]));
        assert!(StrategyProfile::from_pure(&tree, &[vec![2, 0, 0]]).is_err());
    }
}

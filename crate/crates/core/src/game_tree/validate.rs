use std::collections::HashSet;

use super::{GameTree, InfosetId, NodeId, NodeKind, PROB_TOL};

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum Violation {
    #[error("root {0} has a parent edge")]
    RootHasParent(NodeId),
    #[error("node {0} has {1} parent edges")]
    ParentCount(NodeId, usize),
    #[error("node {0} is unreachable from the root")]
    Unreachable(NodeId),
    #[error("edge from {0} points outside the node list")]
    DanglingEdge(NodeId),
    #[error("node {0} repeats edge label {1:?}")]
    DuplicateLabel(NodeId, String),
    #[error("terminal {0} has children")]
    TerminalWithChildren(NodeId),
    #[error("non-terminal node {0} has no children")]
    Childless(NodeId),
    #[error("decision node {0} belongs to player {1}, not a strategic player")]
    BadPlayer(NodeId, usize),
    #[error("decision node {0} is not listed in its infoset {1:?}")]
    NotInInfoset(NodeId, String),
    #[error("infoset {0:?} lists node {1} which is not a matching decision node")]
    ForeignNode(String, NodeId),
    #[error("infoset {0:?} has no nodes")]
    EmptyInfoset(String),
    #[error("node {0} actions {1:?} differ from its infoset actions {2:?}")]
    ActionMismatch(NodeId, Vec<String>, Vec<String>),
    #[error("chance node {0}: distribution sums to {1}")]
    ChanceSum(NodeId, f64),
    #[error("chance node {0}: negative mass {1}")]
    NegativeMass(NodeId, f64),
    #[error("chance node {0}: {1} probabilities for {2} outcomes")]
    ChanceArity(NodeId, usize, usize),
    #[error("infoset {0:?} violates perfect recall")]
    PerfectRecall(String),
    #[error("terminal {0} has {1} utilities, expected {2}")]
    UtilityLength(NodeId, usize, usize),
    #[error("terminal {0} has a non-finite utility")]
    NonFinite(NodeId),
}

#[derive(Clone, Debug, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl GameTree {
    /// Checks every structural invariant and reports all violations found.
    pub fn validate(&self) -> ValidationReport {
        let mut out = Vec::new();
        let n = self.nodes.len();
        let name = |i: InfosetId| self.infosets[i.0].name.clone();

        let mut parents = vec![0usize; n];
        for (i, node) in self.nodes.iter().enumerate() {
            let mut labels = HashSet::new();
            for e in &node.children {
                if e.child.0 >= n {
                    out.push(Violation::DanglingEdge(NodeId(i)));
                } else {
                    parents[e.child.0] += 1;
                }
                if !labels.insert(e.label.as_str()) {
                    out.push(Violation::DuplicateLabel(NodeId(i), e.label.clone()));
                }
            }
        }
        if self.root.0 >= n {
            out.push(Violation::DanglingEdge(self.root));
            return ValidationReport { violations: out };
        }
        for (i, &p) in parents.iter().enumerate() {
            if i == self.root.0 {
                if p != 0 {
                    out.push(Violation::RootHasParent(self.root));
                }
            } else if p != 1 {
                out.push(Violation::ParentCount(NodeId(i), p));
            }
        }

        // own action sequences per node, by walk from the root
        let mut seen = vec![false; n];
        let mut own: Vec<Vec<(InfosetId, usize)>> = vec![Vec::new(); n];
        let mut stack = vec![(self.root, vec![Vec::new(); self.num_players + 1])];
        while let Some((id, seqs)) = stack.pop() {
            if seen[id.0] {
                continue;
            }
            seen[id.0] = true;
            let node = &self.nodes[id.0];
            let decision = match node.kind {
                NodeKind::Decision { player, infoset } if player >= 1 && player <= self.num_players => {
                    own[id.0] = seqs[player].clone();
                    Some((player, infoset))
                }
                _ => None,
            };
            for (a, e) in node.children.iter().enumerate() {
                if e.child.0 >= n {
                    continue;
                }
                let mut s = seqs.clone();
                if let Some((player, infoset)) = decision {
                    s[player].push((infoset, a));
                }
                stack.push((e.child, s));
            }
        }
        for (i, &s) in seen.iter().enumerate() {
            if !s {
                out.push(Violation::Unreachable(NodeId(i)));
            }
        }

        for (i, node) in self.nodes.iter().enumerate() {
            let id = NodeId(i);
            match &node.kind {
                NodeKind::Terminal { utility } => {
                    if utility.len() != self.num_players {
                        out.push(Violation::UtilityLength(id, utility.len(), self.num_players));
                    }
                    if utility.iter().any(|u| !u.is_finite()) {
                        out.push(Violation::NonFinite(id));
                    }
                    if !node.children.is_empty() {
                        out.push(Violation::TerminalWithChildren(id));
                    }
                }
                NodeKind::Chance { probs } => {
                    if node.children.is_empty() {
                        out.push(Violation::Childless(id));
                    }
                    if probs.len() != node.children.len() {
                        out.push(Violation::ChanceArity(id, probs.len(), node.children.len()));
                    }
                    for &p in probs {
                        if p < 0.0 || !p.is_finite() {
                            out.push(Violation::NegativeMass(id, p));
                        }
                    }
                    let sum: f64 = probs.iter().sum();
                    if (sum - 1.0).abs() > PROB_TOL {
                        out.push(Violation::ChanceSum(id, (sum * 1e12).round() / 1e12));
                    }
                }
                NodeKind::Decision { player, infoset } => {
                    if node.children.is_empty() {
                        out.push(Violation::Childless(id));
                    }
                    if *player == 0 || *player > self.num_players {
                        out.push(Violation::BadPlayer(id, *player));
                        continue;
                    }
                    let Some(set) = self.infosets.get(infoset.0) else {
                        out.push(Violation::NotInInfoset(id, format!("#{}", infoset.0)));
                        continue;
                    };
                    if set.player != *player || !set.nodes.contains(&id) {
                        out.push(Violation::NotInInfoset(id, set.name.clone()));
                    }
                    let labels: Vec<String> = node.children.iter().map(|e| e.label.clone()).collect();
                    if labels != set.actions {
                        out.push(Violation::ActionMismatch(id, labels, set.actions.clone()));
                    }
                }
            }
        }

        for (i, set) in self.infosets.iter().enumerate() {
            let sid = InfosetId(i);
            if set.nodes.is_empty() {
                out.push(Violation::EmptyInfoset(set.name.clone()));
                continue;
            }
            for &h in &set.nodes {
                let ok = matches!(
                    self.nodes.get(h.0).map(|n| &n.kind),
                    Some(NodeKind::Decision { infoset, .. }) if *infoset == sid
                );
                if !ok {
                    out.push(Violation::ForeignNode(name(sid), h));
                }
            }
            let first = &own[set.nodes[0].0.min(n - 1)];
            if set
                .nodes
                .iter()
                .any(|h| h.0 < n && &own[h.0] != first)
            {
                out.push(Violation::PerfectRecall(name(sid)));
            }
        }

        ValidationReport { violations: out }
    }
}

#[cfg(test)]
mod tests {
    use super::super::{NodeSpec, TreeBuilder};
    use super::*;

    #[test]
    fn single_leaf_is_valid() {
        let mut b = TreeBuilder::new(2);
        b.root(NodeSpec::Terminal(vec![3.0, -1.0]));
        let tree = b.build_unchecked().unwrap();
        assert!(tree.validate().is_valid());
    }

    #[test]
    fn chance_sum_reported() {
        let mut b = TreeBuilder::new(1);
        let r = b.root(NodeSpec::Chance);
        b.chance_child(r, "a", 0.6, NodeSpec::Terminal(vec![0.0]));
        b.chance_child(r, "b", 0.5, NodeSpec::Terminal(vec![0.0]));
        let tree = b.build_unchecked().unwrap();
        let report = tree.validate();
        assert_eq!(report.violations.len(), 1);
        assert_eq!(
            report.violations[0].to_string(),
            format!("chance node {}: distribution sums to 1.1", r)
        );
    }

    #[test]
    fn forgetting_own_action_is_caught() {
        let mut b = TreeBuilder::new(1);
        let r = b.root(NodeSpec::decision(1, "first"));
        for a in ["l", "r"] {
            let h = b.child(r, a, NodeSpec::decision(1, "second"));
            b.child(h, "x", NodeSpec::Terminal(vec![0.0]));
            b.child(h, "y", NodeSpec::Terminal(vec![1.0]));
        }
        let err = b.build().unwrap_err().to_string();
        assert!(err.contains("perfect recall"), "{err}");
    }

    #[test]
    fn mismatched_actions_are_caught() {
        let mut b = TreeBuilder::new(2);
        let r = b.root(NodeSpec::Chance);
        let h1 = b.chance_child(r, "A", 0.5, NodeSpec::decision(1, "I"));
        let h2 = b.chance_child(r, "B", 0.5, NodeSpec::decision(1, "I"));
        b.child(h1, "x", NodeSpec::Terminal(vec![0.0, 0.0]));
        b.child(h2, "y", NodeSpec::Terminal(vec![0.0, 0.0]));
        let tree = b.build_unchecked().unwrap();
        assert!(tree
            .validate()
            .violations
            .iter()
            .any(|v| matches!(v, Violation::ActionMismatch(..))));
    }

    #[test]
    fn wrong_utility_length() {
        let mut b = TreeBuilder::new(2);
        b.root(NodeSpec::Terminal(vec![1.0]));
        assert!(b.build().is_err());
    }
}

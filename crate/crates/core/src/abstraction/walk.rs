//! Walking a game at a coarser granularity. A position in the coarse game is
//! a set of true nodes that the model cannot tell apart; hidden chance nodes
//! are replaced by their children until the set is made of decision nodes
//! of one player, revealed chance nodes, or leaves.

use crate::game_tree::{GameTree, InfosetId, NodeId, NodeKind};

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum Frontier {
    /// Decision of `player`; `coords` are the distinct true infosets in the
    /// set, sorted. A coarse action is one true action per coordinate.
    Decision { player: usize, coords: Vec<InfosetId> },
    /// Revealed chance event shared by every node of the set.
    Chance,
    Leaf,
}

/// Replaces hidden chance nodes by the children `expand` returns for them,
/// repeatedly. `expand` answers `None` for nodes that stay visible.
pub(crate) fn close<F>(tree: &GameTree, mut set: Vec<NodeId>, expand: F) -> Vec<NodeId>
where
    F: Fn(NodeId) -> Option<Vec<NodeId>>,
{
    loop {
        let mut changed = false;
        let mut next = Vec::with_capacity(set.len());
        for h in set {
            if tree.node(h).is_chance() {
                if let Some(children) = expand(h) {
                    next.extend(children);
                    changed = true;
                    continue;
                }
            }
            next.push(h);
        }
        set = next;
        if !changed {
            set.sort_unstable();
            set.dedup();
            return set;
        }
    }
}

pub(crate) fn classify(tree: &GameTree, set: &[NodeId]) -> Result<Frontier, String> {
    let first = set.first().ok_or("empty node set")?;
    match tree.node(*first).kind() {
        NodeKind::Terminal { .. } => {
            if set.iter().all(|h| tree.node(*h).is_terminal()) {
                Ok(Frontier::Leaf)
            } else {
                Err(mixed(set))
            }
        }
        NodeKind::Chance { .. } => {
            if set.iter().all(|h| tree.node(*h).is_chance()) {
                Ok(Frontier::Chance)
            } else {
                Err(mixed(set))
            }
        }
        NodeKind::Decision { player, .. } => {
            let mut coords = Vec::new();
            for h in set {
                match tree.node(*h).kind() {
                    NodeKind::Decision { player: p, infoset } if p == player => coords.push(*infoset),
                    _ => return Err(mixed(set)),
                }
            }
            coords.sort_unstable();
            coords.dedup();
            Ok(Frontier::Decision {
                player: *player,
                coords,
            })
        }
    }
}

fn mixed(set: &[NodeId]) -> String {
    format!(
        "nodes {:?} mix node kinds or players and cannot form one abstract position",
        set.iter().map(|n| n.0).collect::<Vec<_>>()
    )
}

/// Children of every node in `set` under the coarse action `tuple`, where
/// `tuple[i]` is the action taken at `coords[i]`.
pub(crate) fn advance_decision(
    tree: &GameTree,
    set: &[NodeId],
    coords: &[InfosetId],
    tuple: &[usize],
) -> Vec<NodeId> {
    set.iter()
        .map(|&h| {
            let set_id = tree.node(h).infoset().expect("decision node");
            let i = coords.binary_search(&set_id).expect("coordinate present");
            tree.node(h).children()[tuple[i]].child
        })
        .collect()
}

/// Children labeled `label` of the chance nodes in `set`.
pub(crate) fn advance_chance(tree: &GameTree, set: &[NodeId], label: &str) -> Vec<NodeId> {
    set.iter()
        .filter_map(|&h| {
            tree.node(h)
                .children()
                .iter()
                .find(|e| e.label == label)
                .map(|e| e.child)
        })
        .collect()
}

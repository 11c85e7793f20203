//! Finite imperfect-information extensive-form games with perfect recall.
//!
//! A [`GameTree`] is immutable once built. Nodes are addressed by [`NodeId`]
//! and histories (edge-label paths from the root) are derived on demand.
//! Nature is player `0`; strategic players are `1..=n`.

mod analysis;
mod builder;
pub mod format;
mod strategy;
mod validate;

pub use analysis::{BestResponse, Reach, Regret};
pub(crate) use analysis::argmax_lowest as analysis_argmax;
pub use builder::{NodeSpec, TreeBuilder};
pub use strategy::{PureProfile, PureStrategy, StrategyProfile};
pub use validate::{ValidationReport, Violation};

use std::fmt;

/// Tolerance used for every sum-to-one check.
pub const PROB_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(pub usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct InfosetId(pub usize);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n{}", self.0)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum TreeError {
    #[error("invalid game tree: {}", .0.join("; "))]
    Invalid(Vec<String>),
    #[error("node {0} out of range")]
    NodeOutOfRange(usize),
    #[error("player {0} is not a strategic player of this game")]
    BadPlayer(usize),
    #[error("strategy profile does not match the game: {0}")]
    ProfileMismatch(String),
    #[error("epsilon must be nonnegative, got {0}")]
    NegativeEpsilon(f64),
    #[error("malformed game file: {0}")]
    Format(String),
}

#[derive(Clone, Debug)]
pub struct Edge {
    pub label: String,
    pub child: NodeId,
}

#[derive(Clone, Debug)]
pub enum NodeKind {
    Terminal { utility: Vec<f64> },
    /// Outcome probabilities aligned with the node's children.
    Chance { probs: Vec<f64> },
    Decision { player: usize, infoset: InfosetId },
}

#[derive(Clone, Debug)]
pub struct Node {
    pub(crate) kind: NodeKind,
    pub(crate) parent: Option<NodeId>,
    pub(crate) children: Vec<Edge>,
    pub(crate) depth: usize,
    /// Number of chance nodes strictly above this node.
    pub(crate) event_index: usize,
}

impl Node {
    pub fn kind(&self) -> &NodeKind {
        &self.kind
    }

    pub fn parent(&self) -> Option<NodeId> {
        self.parent
    }

    pub fn children(&self) -> &[Edge] {
        &self.children
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    /// Position of this node in the sequence of chance events along its path
    /// (only meaningful for chance nodes).
    pub fn event_index(&self) -> usize {
        self.event_index
    }

    /// Owner of the node: 0 for chance, the acting player for decisions,
    /// `None` for terminals.
    pub fn player(&self) -> Option<usize> {
        match &self.kind {
            NodeKind::Terminal { .. } => None,
            NodeKind::Chance { .. } => Some(0),
            NodeKind::Decision { player, .. } => Some(*player),
        }
    }

    pub fn is_terminal(&self) -> bool {
        matches!(self.kind, NodeKind::Terminal { .. })
    }

    pub fn is_chance(&self) -> bool {
        matches!(self.kind, NodeKind::Chance { .. })
    }

    pub fn infoset(&self) -> Option<InfosetId> {
        match &self.kind {
            NodeKind::Decision { infoset, .. } => Some(*infoset),
            _ => None,
        }
    }

    pub fn utility(&self) -> Option<&[f64]> {
        match &self.kind {
            NodeKind::Terminal { utility } => Some(utility),
            _ => None,
        }
    }

    pub fn chance_probs(&self) -> Option<&[f64]> {
        match &self.kind {
            NodeKind::Chance { probs } => Some(probs),
            _ => None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Infoset {
    pub(crate) player: usize,
    pub(crate) name: String,
    pub(crate) actions: Vec<String>,
    pub(crate) nodes: Vec<NodeId>,
    /// Index of this infoset within its player's infoset list.
    pub(crate) local: usize,
    /// The owner's own (infoset, action) sequence leading here.
    pub(crate) own_history: Vec<(InfosetId, usize)>,
}

impl Infoset {
    pub fn player(&self) -> usize {
        self.player
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn actions(&self) -> &[String] {
        &self.actions
    }

    pub fn nodes(&self) -> &[NodeId] {
        &self.nodes
    }

    pub fn local_index(&self) -> usize {
        self.local
    }

    pub fn own_history(&self) -> &[(InfosetId, usize)] {
        &self.own_history
    }
}

#[derive(Clone, Debug)]
pub struct GameTree {
    num_players: usize,
    nodes: Vec<Node>,
    root: NodeId,
    infosets: Vec<Infoset>,
    player_infosets: Vec<Vec<InfosetId>>,
}

impl GameTree {
    /// Assembles a tree without checking invariants. Depth, event indices
    /// and own histories are filled in by a walk from `root`; nodes not
    /// reachable from the root keep zeroed metadata.
    pub(crate) fn from_parts(
        num_players: usize,
        mut nodes: Vec<Node>,
        root: NodeId,
        mut infosets: Vec<Infoset>,
    ) -> Self {
        let mut seen = vec![false; nodes.len()];
        let mut first_seq: Vec<Option<Vec<(InfosetId, usize)>>> = vec![None; infosets.len()];
        let mut stack = vec![(root, 0usize, 0usize, vec![Vec::new(); num_players + 1])];
        while let Some((id, depth, events, seqs)) = stack.pop() {
            if id.0 >= nodes.len() || seen[id.0] {
                continue;
            }
            seen[id.0] = true;
            let node = &mut nodes[id.0];
            node.depth = depth;
            node.event_index = events;
            let next_events = events + usize::from(node.is_chance());
            let decision = match node.kind {
                NodeKind::Decision { player, infoset } => Some((player, infoset)),
                _ => None,
            };
            if let Some((player, infoset)) = decision {
                if let Some(slot) = first_seq.get_mut(infoset.0) {
                    if slot.is_none() && player < seqs.len() {
                        *slot = Some(seqs[player].clone());
                    }
                }
            }
            for (a, e) in node.children.iter().enumerate().rev() {
                let mut s = seqs.clone();
                if let Some((player, infoset)) = decision {
                    if player < s.len() {
                        s[player].push((infoset, a));
                    }
                }
                stack.push((e.child, depth + 1, next_events, s));
            }
        }
        let mut player_infosets = vec![Vec::new(); num_players + 1];
        for (i, set) in infosets.iter_mut().enumerate() {
            if set.player <= num_players {
                set.local = player_infosets[set.player].len();
                player_infosets[set.player].push(InfosetId(i));
            }
            set.own_history = first_seq[i].take().unwrap_or_default();
        }
        GameTree {
            num_players,
            nodes,
            root,
            infosets,
            player_infosets,
        }
    }

    /// Number of strategic players (Nature excluded).
    pub fn num_players(&self) -> usize {
        self.num_players
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id.0]
    }

    pub fn get_node(&self, id: NodeId) -> Result<&Node, TreeError> {
        self.nodes.get(id.0).ok_or(TreeError::NodeOutOfRange(id.0))
    }

    pub fn infosets(&self) -> &[Infoset] {
        &self.infosets
    }

    pub fn infoset(&self, id: InfosetId) -> &Infoset {
        &self.infosets[id.0]
    }

    /// Infosets owned by `player`, in local-index order.
    pub fn player_infosets(&self, player: usize) -> &[InfosetId] {
        self.player_infosets
            .get(player)
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    pub fn find_infoset(&self, player: usize, name: &str) -> Option<InfosetId> {
        self.player_infosets(player)
            .iter()
            .copied()
            .find(|&i| self.infosets[i.0].name == name)
    }

    pub fn terminals(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.nodes
            .iter()
            .enumerate()
            .filter(|(_, n)| n.is_terminal())
            .map(|(i, _)| NodeId(i))
    }

    pub fn num_leaves(&self) -> usize {
        self.terminals().count()
    }

    /// Edge labels along the root-to-node path.
    pub fn history(&self, id: NodeId) -> Vec<&str> {
        let mut labels = Vec::new();
        let mut cur = id;
        while let Some(parent) = self.nodes[cur.0].parent {
            let edge = self.nodes[parent.0]
                .children
                .iter()
                .find(|e| e.child == cur)
                .expect("parent lists child");
            labels.push(edge.label.as_str());
            cur = parent;
        }
        labels.reverse();
        labels
    }

    /// Path of (node, child index) pairs from the root down to `id`.
    pub fn path(&self, id: NodeId) -> Vec<(NodeId, usize)> {
        let mut steps = Vec::new();
        let mut cur = id;
        while let Some(parent) = self.nodes[cur.0].parent {
            let idx = self.nodes[parent.0]
                .children
                .iter()
                .position(|e| e.child == cur)
                .expect("parent lists child");
            steps.push((parent, idx));
            cur = parent;
        }
        steps.reverse();
        steps
    }

    /// Player `player`'s own (infoset, action) sequence before reaching `id`.
    pub fn own_sequence(&self, id: NodeId, player: usize) -> Vec<(InfosetId, usize)> {
        self.path(id)
            .into_iter()
            .filter_map(|(n, a)| match self.nodes[n.0].kind {
                NodeKind::Decision { player: p, infoset } if p == player => Some((infoset, a)),
                _ => None,
            })
            .collect()
    }

    pub(crate) fn check_player(&self, player: usize) -> Result<(), TreeError> {
        if player == 0 || player > self.num_players {
            Err(TreeError::BadPlayer(player))
        } else {
            Ok(())
        }
    }

    /// Per-player `(min, max)` of leaf utilities.
    pub fn utility_range(&self, player: usize) -> (f64, f64) {
        self.nodes
            .iter()
            .filter_map(|n| n.utility())
            .map(|u| u[player - 1])
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                (lo.min(v), hi.max(v))
            })
    }
}

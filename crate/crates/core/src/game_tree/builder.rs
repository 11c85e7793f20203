use std::collections::HashMap;

use super::{Edge, GameTree, Infoset, InfosetId, Node, NodeId, NodeKind, TreeError};

/// What kind of node to create.
#[derive(Clone, Debug)]
pub enum NodeSpec {
    Terminal(Vec<f64>),
    Chance,
    /// Decision node of `player` in the infoset called `infoset`. Nodes that
    /// share a (player, name) pair share an infoset.
    Decision { player: usize, infoset: String },
}

impl NodeSpec {
    pub fn decision(player: usize, infoset: impl Into<String>) -> Self {
        NodeSpec::Decision {
            player,
            infoset: infoset.into(),
        }
    }
}

/// Incremental construction of a [`GameTree`].
///
/// ```
/// use tegta::game_tree::{NodeSpec, TreeBuilder};
/// let mut b = TreeBuilder::new(1);
/// let root = b.root(NodeSpec::decision(1, "I"));
/// b.child(root, "l", NodeSpec::Terminal(vec![0.0]));
/// b.child(root, "r", NodeSpec::Terminal(vec![1.0]));
/// let tree = b.build().unwrap();
/// assert_eq!(tree.num_leaves(), 2);
/// ```
#[derive(Debug)]
pub struct TreeBuilder {
    num_players: usize,
    nodes: Vec<Node>,
    root: Option<NodeId>,
    infosets: Vec<Infoset>,
    index: HashMap<(usize, String), InfosetId>,
    declared: HashMap<InfosetId, Vec<String>>,
}

impl TreeBuilder {
    pub fn new(num_players: usize) -> Self {
        TreeBuilder {
            num_players,
            nodes: Vec::new(),
            root: None,
            infosets: Vec::new(),
            index: HashMap::new(),
            declared: HashMap::new(),
        }
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    /// Fixes the action list of an infoset up front instead of taking it
    /// from the child labels of its first node.
    pub fn declare_infoset(&mut self, player: usize, name: &str, actions: Vec<String>) -> InfosetId {
        let id = self.intern(player, name);
        self.declared.insert(id, actions);
        id
    }

    fn intern(&mut self, player: usize, name: &str) -> InfosetId {
        if let Some(&id) = self.index.get(&(player, name.to_string())) {
            return id;
        }
        let id = InfosetId(self.infosets.len());
        self.infosets.push(Infoset {
            player,
            name: name.to_string(),
            actions: Vec::new(),
            nodes: Vec::new(),
            local: 0,
            own_history: Vec::new(),
        });
        self.index.insert((player, name.to_string()), id);
        id
    }

    /// Adds a detached node. Used by the file loader, which wires edges itself.
    pub(crate) fn add_node(&mut self, spec: NodeSpec) -> NodeId {
        let id = NodeId(self.nodes.len());
        let kind = match spec {
            NodeSpec::Terminal(utility) => NodeKind::Terminal { utility },
            NodeSpec::Chance => NodeKind::Chance { probs: Vec::new() },
            NodeSpec::Decision { player, infoset } => {
                let set = self.intern(player, &infoset);
                self.infosets[set.0].nodes.push(id);
                NodeKind::Decision {
                    player,
                    infoset: set,
                }
            }
        };
        self.nodes.push(Node {
            kind,
            parent: None,
            children: Vec::new(),
            depth: 0,
            event_index: 0,
        });
        id
    }

    pub(crate) fn set_root(&mut self, id: NodeId) {
        self.root = Some(id);
    }

    pub(crate) fn link(&mut self, parent: NodeId, label: &str, child: NodeId, prob: Option<f64>) {
        self.nodes[child.0].parent = Some(parent);
        let node = &mut self.nodes[parent.0];
        node.children.push(Edge {
            label: label.to_string(),
            child,
        });
        if let NodeKind::Chance { probs } = &mut node.kind {
            probs.push(prob.unwrap_or(0.0));
        }
    }

    pub fn root(&mut self, spec: NodeSpec) -> NodeId {
        let id = self.add_node(spec);
        self.root = Some(id);
        id
    }

    /// Appends a child below a decision node (or a chance node with
    /// probability 0; use [`TreeBuilder::chance_child`] for chance edges).
    pub fn child(&mut self, parent: NodeId, label: &str, spec: NodeSpec) -> NodeId {
        let id = self.add_node(spec);
        self.link(parent, label, id, None);
        id
    }

    pub fn chance_child(&mut self, parent: NodeId, label: &str, prob: f64, spec: NodeSpec) -> NodeId {
        let id = self.add_node(spec);
        self.link(parent, label, id, Some(prob));
        id
    }

    /// Builds and validates.
    pub fn build(self) -> Result<GameTree, TreeError> {
        let tree = self.build_unchecked()?;
        let report = tree.validate();
        if report.is_valid() {
            Ok(tree)
        } else {
            Err(TreeError::Invalid(
                report.violations.iter().map(|v| v.to_string()).collect(),
            ))
        }
    }

    /// Builds without running [`GameTree::validate`]. Only fails when no
    /// root was set.
    pub fn build_unchecked(mut self) -> Result<GameTree, TreeError> {
        let root = self
            .root
            .ok_or_else(|| TreeError::Invalid(vec!["tree has no root".into()]))?;
        for (i, set) in self.infosets.iter_mut().enumerate() {
            if let Some(actions) = self.declared.remove(&InfosetId(i)) {
                set.actions = actions;
            } else if let Some(first) = set.nodes.first() {
                set.actions = self.nodes[first.0]
                    .children
                    .iter()
                    .map(|e| e.label.clone())
                    .collect();
            }
        }
        Ok(GameTree::from_parts(
            self.num_players,
            self.nodes,
            root,
            self.infosets,
        ))
    }
}

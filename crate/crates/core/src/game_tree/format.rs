//! JSON game files.
//!
//! ```json
//! {
//!   "players": 2,
//!   "nodes": [{"id": 0, "player": 0, "children": [{"label": "A", "child": 1}]}, ...],
//!   "chance": {"0": {"A": 0.4, "B": 0.6}},
//!   "infosets": {"1": {"I": {"nodes": [1, 2], "actions": ["l", "r"]}}}
//! }
//! ```
//!
//! Terminal nodes carry `utility`; decision nodes carry `player` and
//! `infoset`. The root is the node no edge points to.

use std::collections::{BTreeMap, HashMap};
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::{GameTree, NodeId, NodeKind, NodeSpec, TreeBuilder, TreeError};

#[derive(Serialize, Deserialize, Debug)]
pub struct GameFile {
    pub players: usize,
    pub nodes: Vec<NodeEntry>,
    #[serde(default)]
    pub chance: BTreeMap<String, BTreeMap<String, f64>>,
    #[serde(default)]
    pub infosets: BTreeMap<String, BTreeMap<String, InfosetEntry>>,
}

#[derive(Serialize, Deserialize, Debug)]
pub struct NodeEntry {
    pub id: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub player: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub infoset: Option<String>,
    #[serde(default)]
    pub children: Vec<ChildEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub utility: Option<Vec<f64>>,
}

#[derive(Serialize, Deserialize, Debug)]
pub struct ChildEntry {
    pub label: String,
    pub child: usize,
}

#[derive(Serialize, Deserialize, Debug)]
pub struct InfosetEntry {
    pub nodes: Vec<usize>,
    pub actions: Vec<String>,
}

impl GameFile {
    pub fn from_tree(tree: &GameTree) -> Self {
        let mut chance = BTreeMap::new();
        let mut nodes = Vec::with_capacity(tree.nodes().len());
        for (i, node) in tree.nodes().iter().enumerate() {
            let children = node
                .children()
                .iter()
                .map(|e| ChildEntry {
                    label: e.label.clone(),
                    child: e.child.0,
                })
                .collect();
            let mut entry = NodeEntry {
                id: i,
                player: node.player(),
                infoset: None,
                children,
                utility: None,
            };
            match node.kind() {
                NodeKind::Terminal { utility } => entry.utility = Some(utility.clone()),
                NodeKind::Chance { probs } => {
                    let dist = node
                        .children()
                        .iter()
                        .zip(probs)
                        .map(|(e, &p)| (e.label.clone(), p))
                        .collect();
                    chance.insert(i.to_string(), dist);
                }
                NodeKind::Decision { infoset, .. } => {
                    entry.infoset = Some(tree.infoset(*infoset).name().to_string())
                }
            }
            nodes.push(entry);
        }
        let mut infosets: BTreeMap<String, BTreeMap<String, InfosetEntry>> = BTreeMap::new();
        for set in tree.infosets() {
            infosets.entry(set.player().to_string()).or_default().insert(
                set.name().to_string(),
                InfosetEntry {
                    nodes: set.nodes().iter().map(|n| n.0).collect(),
                    actions: set.actions().to_vec(),
                },
            );
        }
        GameFile {
            players: tree.num_players(),
            nodes,
            chance,
            infosets,
        }
    }

    /// Converts to a tree and validates it.
    pub fn into_tree(self) -> Result<GameTree, TreeError> {
        let n = self.nodes.len();
        let mut errors = Vec::new();
        let mut by_id: Vec<Option<&NodeEntry>> = vec![None; n];
        for entry in &self.nodes {
            if entry.id >= n || by_id[entry.id].is_some() {
                return Err(TreeError::Format(format!(
                    "node ids must be 0..{n} without repeats (saw {})",
                    entry.id
                )));
            }
            by_id[entry.id] = Some(entry);
        }
        let entries: Vec<&NodeEntry> = by_id.into_iter().map(|e| e.expect("filled")).collect();

        // infoset membership declared in the infosets map
        let mut member: HashMap<usize, (usize, String)> = HashMap::new();
        for (player, sets) in &self.infosets {
            let player: usize = player
                .parse()
                .map_err(|_| TreeError::Format(format!("bad player key {player:?}")))?;
            for (name, set) in sets {
                for &h in &set.nodes {
                    if member.insert(h, (player, name.clone())).is_some() {
                        errors.push(format!("node {h} listed in two infosets"));
                    }
                }
            }
        }

        let mut b = TreeBuilder::new(self.players);
        for entry in &entries {
            let spec = if let Some(u) = &entry.utility {
                NodeSpec::Terminal(u.clone())
            } else if entry.player == Some(0) || self.chance.contains_key(&entry.id.to_string()) {
                NodeSpec::Chance
            } else {
                let player = entry
                    .player
                    .ok_or_else(|| TreeError::Format(format!("node {} has no player", entry.id)))?;
                let name = entry.infoset.clone().or_else(|| {
                    member
                        .get(&entry.id)
                        .filter(|(p, _)| *p == player)
                        .map(|(_, s)| s.clone())
                });
                let name = name.ok_or_else(|| {
                    TreeError::Format(format!("decision node {} has no infoset", entry.id))
                })?;
                match member.get(&entry.id) {
                    Some((p, s)) if *p == player && *s == name => {}
                    _ => errors.push(format!(
                        "node {} is not listed under infoset {name:?} of player {player}",
                        entry.id
                    )),
                }
                NodeSpec::Decision {
                    player,
                    infoset: name,
                }
            };
            b.add_node(spec);
        }
        for (player, sets) in &self.infosets {
            if let Ok(player) = player.parse::<usize>() {
                for (name, set) in sets {
                    b.declare_infoset(player, name, set.actions.clone());
                }
            }
        }

        let mut has_parent = vec![false; n];
        for entry in &entries {
            let dist = self.chance.get(&entry.id.to_string());
            for c in &entry.children {
                if c.child >= n {
                    return Err(TreeError::Format(format!(
                        "node {} points at missing node {}",
                        entry.id, c.child
                    )));
                }
                has_parent[c.child] = true;
                let prob = dist.map(|d| {
                    d.get(&c.label).copied().unwrap_or_else(|| {
                        errors.push(format!("chance node {} lacks a probability for {:?}", entry.id, c.label));
                        0.0
                    })
                });
                b.link(NodeId(entry.id), &c.label, NodeId(c.child), prob);
            }
            if let Some(d) = dist {
                if d.len() != entry.children.len() {
                    errors.push(format!("chance node {} has extra outcome labels", entry.id));
                }
            }
        }
        let roots: Vec<usize> = (0..n).filter(|&i| !has_parent[i]).collect();
        if roots.len() != 1 {
            errors.push(format!("expected exactly one root, found {}", roots.len()));
        } else {
            b.set_root(NodeId(roots[0]));
        }
        if !errors.is_empty() {
            return Err(TreeError::Invalid(errors));
        }
        b.build()
    }
}

pub fn read_game<R: Read>(reader: R) -> Result<GameTree, TreeError> {
    let file: GameFile = serde_json::from_reader(reader).map_err(|e| TreeError::Format(e.to_string()))?;
    file.into_tree()
}

pub fn write_game<W: Write>(tree: &GameTree, writer: W) -> Result<(), TreeError> {
    serde_json::to_writer(writer, &GameFile::from_tree(tree)).map_err(|e| TreeError::Format(e.to_string()))
}

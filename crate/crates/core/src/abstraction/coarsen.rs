//! Coarsening a game by hiding chance outcomes from the players.
//!
//! A coarse node stands for a set of true nodes the players can no longer
//! tell apart, each weighted by its probability given the coarse history.
//! Hidden chance nodes are replaced by their children. A decision over
//! several true infosets becomes a choice of one action per infoset, which
//! is then unrolled into a chain of binary choices.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use super::walk::{self, Frontier};
use crate::game_tree::{GameTree, InfosetId, NodeId, NodeKind, NodeSpec, TreeBuilder};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CoarsenError {
    #[error("node {0} is not a chance node")]
    NotChance(usize),
    #[error("node {0} does not exist")]
    UnknownNode(usize),
    #[error("chance node {node} has no outcome {label:?}")]
    UnknownOutcome { node: usize, label: String },
    #[error("children of chance node {0} do not all belong to one player")]
    MixedChildren(usize),
    #[error("{0}")]
    Structure(String),
    #[error("true infoset {0:?} is split across coarse infosets")]
    NotRefinement(String),
    #[error("coarse game is invalid: {0}")]
    Invalid(String),
}

/// Outcomes to hide, per chance node.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoarseningSpec {
    pub nodes: Vec<SpecEntry>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpecEntry {
    pub node: usize,
    /// Labels of the outcomes the players stop observing.
    pub remove: Vec<String>,
}

impl CoarseningSpec {
    pub fn new() -> Self {
        CoarseningSpec::default()
    }

    pub fn hide(mut self, node: NodeId, remove: &[&str]) -> Self {
        self.nodes.push(SpecEntry {
            node: node.0,
            remove: remove.iter().map(|s| s.to_string()).collect(),
        });
        self
    }

    /// Every chance node at event position `event` loses all its outcomes.
    pub fn hide_event(tree: &GameTree, event: usize) -> Self {
        let mut spec = CoarseningSpec::new();
        for (i, n) in tree.nodes().iter().enumerate() {
            if n.is_chance() && n.event_index() == event {
                spec.nodes.push(SpecEntry {
                    node: i,
                    remove: n.children().iter().map(|e| e.label.clone()).collect(),
                });
            }
        }
        spec
    }

    /// Checks the spec against `tree`, returning the removed outcome indices
    /// per node.
    pub fn check(&self, tree: &GameTree) -> Result<BTreeMap<NodeId, BTreeSet<usize>>, CoarsenError> {
        let mut out: BTreeMap<NodeId, BTreeSet<usize>> = BTreeMap::new();
        for entry in &self.nodes {
            let id = NodeId(entry.node);
            let node = tree.get_node(id).map_err(|_| CoarsenError::UnknownNode(entry.node))?;
            if !node.is_chance() {
                return Err(CoarsenError::NotChance(entry.node));
            }
            let mut owner = None;
            for e in node.children() {
                let p = tree.node(e.child).player().filter(|&p| p > 0);
                match (p, owner) {
                    (None, _) => return Err(CoarsenError::MixedChildren(entry.node)),
                    (Some(p), None) => owner = Some(p),
                    (Some(p), Some(q)) if p != q => return Err(CoarsenError::MixedChildren(entry.node)),
                    _ => {}
                }
            }
            let set = out.entry(id).or_default();
            for label in &entry.remove {
                let k = node
                    .children()
                    .iter()
                    .position(|e| &e.label == label)
                    .ok_or_else(|| CoarsenError::UnknownOutcome {
                        node: entry.node,
                        label: label.clone(),
                    })?;
                set.insert(k);
            }
        }
        out.retain(|_, s| !s.is_empty());
        Ok(out)
    }
}

/// A coarse infoset and the true infosets it merges.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoarseInfoset {
    pub player: usize,
    pub name: String,
    pub covers: Vec<String>,
    /// True infoset whose action this choice narrows down. `None` when the
    /// infoset is copied unchanged.
    pub picks: Option<String>,
}

/// One action tuple of a merged infoset.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TupleEntry {
    pub infoset: String,
    /// `(true infoset, true action)` per component.
    pub actions: Vec<(String, String)>,
}

/// Witness that the coarse game refines the true one.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub infosets: Vec<CoarseInfoset>,
    pub tuples: Vec<TupleEntry>,
    /// True nodes behind each coarse node, by coarse node index.
    pub nodes: Vec<Vec<usize>>,
}

#[derive(Clone, Debug)]
pub struct CoarsenedGame {
    pub tree: GameTree,
    pub certificate: Certificate,
}

/// The merged infoset over `coords`: its name and its action tuples, one
/// action index per coordinate, in odometer order.
pub fn coarsen_infosets(tree: &GameTree, coords: &[InfosetId]) -> (String, Vec<Vec<usize>>) {
    let name = coords
        .iter()
        .map(|&c| tree.infoset(c).name())
        .collect::<Vec<_>>()
        .join("+");
    let sizes: Vec<usize> = coords.iter().map(|&c| tree.infoset(c).actions().len()).collect();
    (name, crate::estimation::product_indices(&sizes))
}

/// Binary chain for choosing one action per component.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Condensed {
    /// `nodes[0]` is the entry point.
    pub nodes: Vec<CondensedNode>,
    /// Completed tuples, indexed by [`Target::Tuple`].
    pub tuples: Vec<Vec<usize>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CondensedNode {
    /// Component whose action is being narrowed down.
    pub component: usize,
    /// Labels of the edges taken from the entry point.
    pub path: Vec<String>,
    pub edges: Vec<(String, Target)>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Target {
    Node(usize),
    Tuple(usize),
}

/// Unrolls the product of `components` (action labels per component) into a
/// tree with at most two edges per node. A component with more than two
/// actions is split in halves; an edge covering several actions is labeled
/// with them joined by `|`.
pub fn condense_branching(components: &[Vec<String>]) -> Condensed {
    let mut out = Condensed {
        nodes: Vec::new(),
        tuples: Vec::new(),
    };
    fn grow(
        comps: &[Vec<String>],
        k: usize,
        range: (usize, usize),
        path: Vec<String>,
        chosen: &mut Vec<usize>,
        out: &mut Condensed,
    ) -> Target {
        let (lo, hi) = range;
        if hi - lo == 1 {
            chosen.push(lo);
            let t = if k + 1 == comps.len() {
                out.tuples.push(chosen.clone());
                Target::Tuple(out.tuples.len() - 1)
            } else {
                grow(comps, k + 1, (0, comps[k + 1].len()), path, chosen, out)
            };
            chosen.pop();
            return t;
        }
        let me = out.nodes.len();
        out.nodes.push(CondensedNode {
            component: k,
            path: path.clone(),
            edges: Vec::new(),
        });
        let parts: Vec<(usize, usize)> = if hi - lo == 2 {
            vec![(lo, lo + 1), (lo + 1, hi)]
        } else {
            let mid = lo + (hi - lo).div_ceil(2);
            vec![(lo, mid), (mid, hi)]
        };
        for (a, b) in parts {
            let label = comps[k][a..b].join("|");
            let mut p = path.clone();
            p.push(label.clone());
            let t = grow(comps, k, (a, b), p, chosen, out);
            out.nodes[me].edges.push((label, t));
        }
        Target::Node(me)
    }
    if components.is_empty() || components.iter().any(Vec::is_empty) {
        return out;
    }
    let mut chosen = Vec::new();
    grow(components, 0, (0, components[0].len()), Vec::new(), &mut chosen, &mut out);
    out
}

type Position = Vec<(NodeId, f64)>;

struct Coarsener<'a> {
    tree: &'a GameTree,
    hidden: BTreeMap<NodeId, BTreeSet<usize>>,
    b: TreeBuilder,
    cert_nodes: Vec<Vec<usize>>,
    infosets: BTreeMap<(usize, String), CoarseInfoset>,
    tuples: BTreeMap<String, TupleEntry>,
    /// Merged name for each true infoset seen at a decision position.
    owner: HashMap<InfosetId, String>,
}

enum At {
    Root,
    Child(NodeId, String),
    Chance(NodeId, String, f64),
}

impl Coarsener<'_> {
    /// Hidden means every outcome but at most one is removed.
    fn fully_hidden(&self, h: NodeId) -> bool {
        self.hidden
            .get(&h)
            .is_some_and(|r| self.tree.node(h).children().len() - r.len() <= 1)
    }

    fn close(&self, mut pos: Position) -> Position {
        loop {
            let mut changed = false;
            let mut next = Vec::with_capacity(pos.len());
            for (h, w) in pos {
                if self.fully_hidden(h) {
                    let node = self.tree.node(h);
                    let probs = node.chance_probs().expect("chance node");
                    for (e, p) in node.children().iter().zip(probs) {
                        next.push((e.child, w * p));
                    }
                    changed = true;
                } else {
                    next.push((h, w));
                }
            }
            pos = next;
            if !changed {
                pos.sort_by_key(|x| x.0);
                return pos;
            }
        }
    }

    fn attach(&mut self, at: &At, spec: NodeSpec, pos: &Position) -> NodeId {
        let id = match at {
            At::Root => self.b.root(spec),
            At::Child(p, label) => self.b.child(*p, label, spec),
            At::Chance(p, label, prob) => self.b.chance_child(*p, label, *prob, spec),
        };
        self.cert_nodes.push(pos.iter().map(|x| x.0 .0).collect());
        id
    }

    fn emit(&mut self, pos: Position, at: At) -> Result<(), CoarsenError> {
        let pos = self.close(pos);
        let ids: Vec<NodeId> = pos.iter().map(|x| x.0).collect();
        match walk::classify(self.tree, &ids).map_err(CoarsenError::Structure)? {
            Frontier::Leaf => {
                let n = self.tree.num_players();
                let mut u = vec![0.0; n];
                let total: f64 = pos.iter().map(|x| x.1).sum();
                for (h, w) in &pos {
                    let share = if total > 0.0 { w / total } else { 1.0 / pos.len() as f64 };
                    for (acc, v) in u.iter_mut().zip(self.tree.node(*h).utility().expect("leaf")) {
                        *acc += share * v;
                    }
                }
                self.attach(&at, NodeSpec::Terminal(u), &pos);
            }
            Frontier::Chance => {
                let me = self.attach(&at, NodeSpec::Chance, &pos);
                // outcome groups in order of first appearance
                let mut groups: Vec<(String, Position)> = Vec::new();
                let total: f64 = pos.iter().map(|x| x.1).sum();
                for (h, w) in &pos {
                    let node = self.tree.node(*h);
                    let removed = self.hidden.get(h);
                    let merged: Vec<&str> = node
                        .children()
                        .iter()
                        .enumerate()
                        .filter(|(k, _)| removed.is_some_and(|r| r.contains(k)))
                        .map(|(_, e)| e.label.as_str())
                        .collect();
                    let merged = merged.join("|");
                    let share = if total > 0.0 { w / total } else { 1.0 / pos.len() as f64 };
                    let probs = node.chance_probs().expect("chance node");
                    for (k, (e, p)) in node.children().iter().zip(probs).enumerate() {
                        let label = if removed.is_some_and(|r| r.contains(&k)) {
                            merged.clone()
                        } else {
                            e.label.clone()
                        };
                        match groups.iter_mut().find(|g| g.0 == label) {
                            Some(g) => g.1.push((e.child, share * p)),
                            None => groups.push((label, vec![(e.child, share * p)])),
                        }
                    }
                }
                for (label, mut child) in groups {
                    let mass: f64 = child.iter().map(|x| x.1).sum();
                    if mass > 0.0 {
                        child.iter_mut().for_each(|x| x.1 /= mass);
                    }
                    self.emit(child, At::Chance(me, label, mass))?;
                }
            }
            Frontier::Decision { player, coords } => self.decision(pos, at, player, &coords)?,
        }
        Ok(())
    }

    fn decision(&mut self, pos: Position, at: At, player: usize, coords: &[InfosetId]) -> Result<(), CoarsenError> {
        let tree = self.tree;
        let (name, _) = coarsen_infosets(tree, coords);
        for &c in coords {
            match self.owner.get(&c) {
                Some(n) if *n != name => return Err(CoarsenError::NotRefinement(tree.infoset(c).name().to_string())),
                Some(_) => {}
                None => {
                    self.owner.insert(c, name.clone());
                }
            }
        }
        let covers: Vec<String> = coords.iter().map(|&c| tree.infoset(c).name().to_string()).collect();
        let ids: Vec<NodeId> = pos.iter().map(|x| x.0).collect();
        if coords.len() == 1 {
            self.infosets.entry((player, name.clone())).or_insert(CoarseInfoset {
                player,
                name: name.clone(),
                covers,
                picks: None,
            });
            let me = self.attach(&at, NodeSpec::decision(player, name), &pos);
            let actions = tree.infoset(coords[0]).actions().to_vec();
            for (k, a) in actions.iter().enumerate() {
                let next = walk::advance_decision(tree, &ids, coords, &[k]);
                let child: Position = next.into_iter().zip(pos.iter().map(|x| x.1)).collect();
                self.emit(child, At::Child(me, a.clone()))?;
            }
            return Ok(());
        }
        let comps: Vec<Vec<String>> = coords.iter().map(|&c| tree.infoset(c).actions().to_vec()).collect();
        let chain = condense_branching(&comps);
        for t in &chain.tuples {
            let actions = coords
                .iter()
                .zip(t)
                .map(|(&c, &k)| (tree.infoset(c).name().to_string(), tree.infoset(c).actions()[k].clone()))
                .collect();
            let label = format!("{name}#{}", t.iter().map(|k| k.to_string()).collect::<Vec<_>>().join(","));
            self.tuples.entry(label).or_insert(TupleEntry {
                infoset: name.clone(),
                actions,
            });
        }
        let mut made: Vec<NodeId> = Vec::with_capacity(chain.nodes.len());
        // nodes are numbered in creation order, parents first
        let mut parent_of: Vec<Option<(usize, String)>> = vec![None; chain.nodes.len()];
        for (i, n) in chain.nodes.iter().enumerate() {
            for (label, t) in &n.edges {
                if let Target::Node(c) = t {
                    parent_of[*c] = Some((i, label.clone()));
                }
            }
        }
        for (i, n) in chain.nodes.iter().enumerate() {
            let iname = if n.path.is_empty() {
                name.clone()
            } else {
                format!("{name}/{}", n.path.join("/"))
            };
            self.infosets.entry((player, iname.clone())).or_insert(CoarseInfoset {
                player,
                name: iname.clone(),
                covers: covers.clone(),
                picks: Some(covers[n.component].clone()),
            });
            let spot = match &parent_of[i] {
                None => match &at {
                    At::Root => At::Root,
                    At::Child(p, l) => At::Child(*p, l.clone()),
                    At::Chance(p, l, q) => At::Chance(*p, l.clone(), *q),
                },
                Some((p, l)) => At::Child(made[*p], l.clone()),
            };
            made.push(self.attach(&spot, NodeSpec::decision(player, iname), &pos));
        }
        for (i, n) in chain.nodes.iter().enumerate() {
            for (label, t) in &n.edges {
                if let Target::Tuple(k) = t {
                    let next = walk::advance_decision(tree, &ids, coords, &chain.tuples[*k]);
                    let child: Position = next.into_iter().zip(pos.iter().map(|x| x.1)).collect();
                    self.emit(child, At::Child(made[i], label.clone()))?;
                }
            }
        }
        Ok(())
    }
}

/// Coarsens `tree` by hiding the outcomes listed in `spec`.
///
/// A chance node left with at most one visible outcome disappears: its
/// children merge into one position. Otherwise the removed outcomes merge
/// into a single chance edge labeled with their names joined by `|`.
/// Coarse chance probabilities and leaf utilities are the conditional
/// expectations over the merged true nodes.
pub fn coarsen(tree: &GameTree, spec: &CoarseningSpec) -> Result<CoarsenedGame, CoarsenError> {
    let hidden = spec.check(tree)?;
    let mut c = Coarsener {
        tree,
        hidden,
        b: TreeBuilder::new(tree.num_players()),
        cert_nodes: Vec::new(),
        infosets: BTreeMap::new(),
        tuples: BTreeMap::new(),
        owner: HashMap::new(),
    };
    c.emit(vec![(tree.root(), 1.0)], At::Root)?;
    let out = c.b.build().map_err(|e| CoarsenError::Invalid(e.to_string()))?;
    let certificate = Certificate {
        infosets: c.infosets.into_values().collect(),
        tuples: c.tuples.into_values().collect(),
        nodes: c.cert_nodes,
    };
    Ok(CoarsenedGame { tree: out, certificate })
}

impl Certificate {
    /// Checks that every coarse infoset covers exactly the nodes of the
    /// true infosets it lists, and that no true infoset is listed under two
    /// merged infosets.
    pub fn validate(&self, truth: &GameTree, coarse: &GameTree) -> Result<(), CoarsenError> {
        if self.nodes.len() != coarse.nodes().len() {
            return Err(CoarsenError::Structure(format!(
                "certificate maps {} nodes, coarse game has {}",
                self.nodes.len(),
                coarse.nodes().len()
            )));
        }
        let mut roots: HashMap<&str, &[String]> = HashMap::new();
        for set in coarse.infosets() {
            let entry = self
                .infosets
                .iter()
                .find(|c| c.player == set.player() && c.name == set.name())
                .ok_or_else(|| CoarsenError::Structure(format!("infoset {:?} missing from certificate", set.name())))?;
            let covered: BTreeSet<usize> = set.nodes().iter().flat_map(|n| self.nodes[n.0].iter().copied()).collect();
            let mut expected = BTreeSet::new();
            for name in &entry.covers {
                let id = truth
                    .find_infoset(set.player(), name)
                    .ok_or_else(|| CoarsenError::Structure(format!("unknown true infoset {name:?}")))?;
                if let Some(prev) = roots.insert(name.as_str(), &entry.covers) {
                    if prev != entry.covers.as_slice() {
                        return Err(CoarsenError::NotRefinement(name.clone()));
                    }
                }
                expected.extend(truth.infoset(id).nodes().iter().map(|n| n.0));
            }
            if covered != expected {
                return Err(CoarsenError::NotRefinement(entry.covers.join("+")));
            }
        }
        Ok(())
    }
}

/// Node-for-node comparison: same shape, edge labels, node kinds, players,
/// infoset names, chance probabilities and utilities (within `tol`).
pub fn isomorphic(a: &GameTree, b: &GameTree, tol: f64) -> bool {
    fn same(a: &GameTree, x: NodeId, b: &GameTree, y: NodeId, tol: f64) -> bool {
        let (nx, ny) = (a.node(x), b.node(y));
        let kinds = match (nx.kind(), ny.kind()) {
            (NodeKind::Terminal { utility: u }, NodeKind::Terminal { utility: v }) => {
                u.len() == v.len() && u.iter().zip(v).all(|(p, q)| (p - q).abs() <= tol)
            }
            (NodeKind::Chance { probs: p }, NodeKind::Chance { probs: q }) => {
                p.len() == q.len() && p.iter().zip(q).all(|(s, t)| (s - t).abs() <= tol)
            }
            (NodeKind::Decision { player: p, infoset: i }, NodeKind::Decision { player: q, infoset: j }) => {
                p == q && a.infoset(*i).name() == b.infoset(*j).name()
            }
            _ => false,
        };
        kinds
            && nx.children().len() == ny.children().len()
            && nx
                .children()
                .iter()
                .zip(ny.children())
                .all(|(e, f)| e.label == f.label && same(a, e.child, b, f.child, tol))
    }
    a.num_players() == b.num_players() && a.nodes().len() == b.nodes().len() && same(a, a.root(), b, b.root(), tol)
}

/// Largest number of children of any node.
pub fn branching_factor(tree: &GameTree) -> usize {
    tree.nodes().iter().map(|n| n.children().len()).max().unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::games::fixtures::hidden_chance as fixture;
    use crate::games::{generate_game1, generate_game2, generate_game3_rounds};

    #[test]
    fn empty_spec_is_identity() {
        for t in [generate_game1(3), generate_game2(3), generate_game3_rounds(3, 2), fixture()] {
            let c = coarsen(&t, &CoarseningSpec::new()).unwrap();
            assert!(isomorphic(&t, &c.tree, 0.0));
            c.certificate.validate(&t, &c.tree).unwrap();
            assert!(c.certificate.tuples.is_empty());
        }
    }

    #[test]
    fn fixture_merges_into_six_tuples_of_depth_three() {
        let t = fixture();
        let spec = CoarseningSpec::new().hide(t.root(), &["B"]);
        let c = coarsen(&t, &spec).unwrap();
        let g = &c.tree;
        assert!(!g.node(g.root()).is_chance());
        assert_eq!(c.certificate.tuples.len(), 6);
        assert_eq!(g.num_leaves(), 6);
        assert!(branching_factor(g) <= 2);
        let depth = g.terminals().map(|l| g.node(l).depth()).max().unwrap();
        assert_eq!(depth, 3);
        c.certificate.validate(&t, g).unwrap();
        // every coarse leaf averages the two true leaves with weights 0.4/0.6
        let leaf = g.terminals().next().unwrap();
        assert!((g.node(leaf).utility().unwrap()[1] - 1.6).abs() < 1e-12);
        assert_eq!(c.certificate.infosets[0].covers, vec!["IA", "IB"]);
    }

    #[test]
    fn tuple_count_is_the_product() {
        let t = fixture();
        let ids = [t.find_infoset(2, "IA").unwrap(), t.find_infoset(2, "IB").unwrap()];
        let (name, tuples) = coarsen_infosets(&t, &ids);
        assert_eq!(name, "IA+IB");
        assert_eq!(tuples.len(), 6);
    }

    #[test]
    fn condensing_binary_pairs() {
        let s = |v: &[&str]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>();
        let c = condense_branching(&[s(&["a", "b"]), s(&["x", "y"])]);
        assert_eq!(c.nodes.len(), 3);
        assert_eq!(c.tuples, vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]);
        assert!(c.nodes.iter().all(|n| n.edges.len() == 2));
        let one = condense_branching(&[s(&["a", "b"])]);
        assert_eq!(one.nodes.len(), 1);
        let three = condense_branching(&[s(&["a", "b", "c"])]);
        assert_eq!(three.tuples.len(), 3);
        assert_eq!(three.nodes[0].edges[0].0, "a|b");
    }

    #[test]
    fn game2_without_second_event_matches_first_event_model() {
        let t = generate_game2(5);
        let c = coarsen(&t, &CoarseningSpec::hide_event(&t, 1)).unwrap();
        c.certificate.validate(&t, &c.tree).unwrap();
        let merged: BTreeSet<Vec<String>> = c
            .certificate
            .infosets
            .iter()
            .filter(|s| s.player == 1 && s.picks.is_some())
            .map(|s| s.covers.clone())
            .collect();
        let expected: BTreeSet<Vec<String>> = (1..=10)
            .map(|i| vec![format!("1a{i}C"), format!("1a{i}D")])
            .collect();
        assert_eq!(merged, expected);
        // the abstract walk that the empirical model uses sees the same sets
        let expand = |h: NodeId| {
            let n = t.node(h);
            (n.event_index() >= 1).then(|| n.children().iter().map(|e| e.child).collect())
        };
        let root = walk::close(&t, vec![t.root()], expand);
        assert!(matches!(walk::classify(&t, &root).unwrap(), Frontier::Decision { player: 1, .. }));
        // taking the first edge everywhere plays action 0 everywhere
        let first = |g: &GameTree| {
            let p: Vec<Vec<usize>> = (1..=2).map(|j| vec![0; g.player_infosets(j).len()]).collect();
            g.expected_payoff(&crate::game_tree::StrategyProfile::from_pure(g, &p).unwrap()).unwrap()
        };
        let (u, v) = (first(&t), first(&c.tree));
        assert!(u.iter().zip(&v).all(|(a, b)| (a - b).abs() < 1e-9), "{u:?} {v:?}");
    }

    #[test]
    fn partial_hiding_keeps_a_merged_edge() {
        let mut b = TreeBuilder::new(1);
        let r = b.root(NodeSpec::Chance);
        for (e, p) in [("A", 0.2), ("B", 0.1), ("C", 0.3), ("D", 0.4)] {
            let h = b.chance_child(r, e, p, NodeSpec::decision(1, format!("I{e}")));
            b.child(h, "l", NodeSpec::Terminal(vec![0.0]));
            b.child(h, "r", NodeSpec::Terminal(vec![p]));
        }
        let t = b.build().unwrap();
        let c = coarsen(&t, &CoarseningSpec::new().hide(t.root(), &["C", "D"])).unwrap();
        let root = c.tree.node(c.tree.root());
        let labels: Vec<&str> = root.children().iter().map(|e| e.label.as_str()).collect();
        assert_eq!(labels, vec!["A", "B", "C|D"]);
        assert!((root.chance_probs().unwrap()[2] - 0.7).abs() < 1e-12);
        c.certificate.validate(&t, &c.tree).unwrap();
    }

    #[test]
    fn rejects_bad_specs() {
        let t = fixture();
        let leaf = t.terminals().next().unwrap();
        assert_eq!(
            coarsen(&t, &CoarseningSpec::new().hide(leaf, &[])).unwrap_err(),
            CoarsenError::NotChance(leaf.0)
        );
        assert!(matches!(
            coarsen(&t, &CoarseningSpec::new().hide(t.root(), &["Q"])),
            Err(CoarsenError::UnknownOutcome { .. })
        ));
        let g = generate_game2(1);
        let c2 = g.nodes().iter().position(|n| n.is_chance() && n.event_index() == 1).unwrap();
        assert!(coarsen(&g, &CoarseningSpec::new().hide(NodeId(c2), &["C", "D"])).is_err());
    }

    proptest::proptest! {
        #[test]
        fn condensed_leaves_are_the_product(sizes in proptest::collection::vec(1usize..6, 1..4)) {
            let comps: Vec<Vec<String>> = sizes
                .iter()
                .map(|&n| (0..n).map(|i| format!("a{i}")).collect())
                .collect();
            let c = condense_branching(&comps);
            let product = crate::estimation::product_indices(&sizes);
            proptest::prop_assert_eq!(&c.tuples, &product);
            proptest::prop_assert!(c.nodes.iter().all(|n| n.edges.len() == 2));
        }
    }
}

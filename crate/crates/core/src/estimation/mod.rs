//! Empirical game models built from simulation traces.
//!
//! [`EmpiricalGame`] keeps two views of the same data. The normal-form view
//! averages the payoffs observed for each strategy profile. The tree view
//! files every trace under a leaf of an abstract game tree whose shape is
//! discovered from the traces, keeping visit counts at revealed chance
//! nodes, and estimates a profile's payoff by recombining leaf means with
//! the empirical chance frequencies. Hidden chance events are folded into
//! the leaf means.
//!
//! The model reads the structure of the true game (turn order, infosets,
//! action labels) to lay out its tree. Chance probabilities and utilities
//! of the true game are never read.

mod accum;
mod tracelog;

pub use accum::{CompensatedSum, PayoffAccum};
pub use tracelog::{read_trace_log, TraceLogError, TraceRecord};

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::abstraction::walk::{self, Frontier};
use crate::game_tree::{GameTree, InfosetId, NodeId, PureProfile, PureStrategy, StrategyProfile};
use crate::games::SimulationTrace;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EstimationError {
    #[error("no samples to estimate from")]
    Empty,
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("observation {label:?} was never an outcome of chance event {event}")]
    UnknownLabel { event: usize, label: String },
    #[error("trace reports {got} observations, the model needs at least {needed}")]
    MissingObservation { needed: usize, got: usize },
    #[error("profile {0:?} does not index the restricted strategy sets")]
    BadProfile(Vec<usize>),
    #[error("{0}")]
    Abstraction(String),
    #[error("payoff vector has {got} entries for {players} players")]
    PayoffLength { got: usize, players: usize },
}

/// How many chance events (counted from the root along each path) the model
/// conditions on. Later events are marginalized into leaf means. Zero makes
/// the tree view collapse to one leaf per profile.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AbstractionLevel {
    pub revealed: usize,
}

impl AbstractionLevel {
    pub fn first(revealed: usize) -> Self {
        AbstractionLevel { revealed }
    }
}

/// Which estimator an empirical model answers with.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Nf,
    Te,
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ModelKind::Nf => "nf",
            ModelKind::Te => "te",
        })
    }
}

impl std::str::FromStr for ModelKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "nf" => Ok(ModelKind::Nf),
            "te" => Ok(ModelKind::Te),
            _ => Err(format!("unknown model {s:?}, expected nf or te")),
        }
    }
}

/// Arithmetic mean of payoff samples.
pub fn nf_estimate(samples: &[f64]) -> Result<f64, EstimationError> {
    if samples.is_empty() {
        return Err(EstimationError::Empty);
    }
    let mut s = CompensatedSum::default();
    for &x in samples {
        s.add(x);
    }
    Ok(s.value() / samples.len() as f64)
}

pub type SkelId = usize;

#[derive(Clone, Debug)]
enum SkelKind {
    Decision {
        player: usize,
        coords: Vec<InfosetId>,
        children: BTreeMap<Vec<usize>, SkelId>,
    },
    Chance {
        count: u64,
        /// (label, count, child) in first-seen order.
        children: Vec<(String, u64, SkelId)>,
    },
    Leaf {
        acc: PayoffAccum,
    },
}

#[derive(Clone, Debug)]
struct SkelNode {
    kind: SkelKind,
    parent: Option<SkelId>,
    depth: usize,
    /// Ordinals of the profiles whose traces passed through this node.
    visitors: BTreeSet<u32>,
}

/// Visit counts at one chance node of the model.
#[derive(Clone, Debug, PartialEq)]
pub struct ChanceStats {
    pub node: SkelId,
    pub count: u64,
    pub edges: Vec<(String, u64)>,
}

#[derive(Clone, Debug)]
pub struct EmpiricalGame {
    tree: Arc<GameTree>,
    level: AbstractionLevel,
    strategies: Vec<Vec<PureStrategy>>,
    skeleton: Vec<SkelNode>,
    nf: HashMap<Vec<usize>, PayoffAccum>,
    ordinals: HashMap<Vec<usize>, u32>,
    paths: HashMap<(Vec<usize>, Vec<String>), Vec<SkelId>>,
}

impl EmpiricalGame {
    pub fn new(tree: Arc<GameTree>, level: AbstractionLevel) -> Self {
        let n = tree.num_players();
        EmpiricalGame {
            tree,
            level,
            strategies: vec![Vec::new(); n],
            skeleton: Vec::new(),
            nf: HashMap::new(),
            ordinals: HashMap::new(),
            paths: HashMap::new(),
        }
    }

    pub fn tree(&self) -> &Arc<GameTree> {
        &self.tree
    }

    pub fn level(&self) -> AbstractionLevel {
        self.level
    }

    pub fn num_players(&self) -> usize {
        self.strategies.len()
    }

    /// Adds a pure strategy to the restricted set of `player` unless an
    /// identical one is present. Returns its index and whether it was new.
    pub fn add_strategy(&mut self, player: usize, strategy: PureStrategy) -> (usize, bool) {
        let set = &mut self.strategies[player - 1];
        if let Some(i) = set.iter().position(|s| *s == strategy) {
            return (i, false);
        }
        set.push(strategy);
        (set.len() - 1, true)
    }

    pub fn strategies(&self, player: usize) -> &[PureStrategy] {
        &self.strategies[player - 1]
    }

    pub fn set_sizes(&self) -> Vec<usize> {
        self.strategies.iter().map(Vec::len).collect()
    }

    /// Every index vector over the restricted sets, in odometer order with
    /// the last player varying fastest.
    pub fn profiles(&self) -> Vec<Vec<usize>> {
        product_indices(&self.set_sizes())
    }

    pub fn pure_profile(&self, idx: &[usize]) -> Result<PureProfile, EstimationError> {
        self.check_idx(idx)?;
        Ok(idx
            .iter()
            .enumerate()
            .map(|(j, &i)| self.strategies[j][i].clone())
            .collect())
    }

    pub fn behavioral(&self, idx: &[usize]) -> Result<StrategyProfile, EstimationError> {
        let pure = self.pure_profile(idx)?;
        StrategyProfile::from_pure(&self.tree, &pure).map_err(|e| EstimationError::Abstraction(e.to_string()))
    }

    fn check_idx(&self, idx: &[usize]) -> Result<(), EstimationError> {
        if idx.len() != self.strategies.len() || idx.iter().zip(&self.strategies).any(|(&i, s)| i >= s.len()) {
            Err(EstimationError::BadProfile(idx.to_vec()))
        } else {
            Ok(())
        }
    }

    /// Records one trace of the profile `idx` in both views.
    pub fn ingest(&mut self, idx: &[usize], trace: &SimulationTrace) -> Result<(), EstimationError> {
        let labels: Vec<String> = trace.observations.iter().map(|o| o.label.clone()).collect();
        self.ingest_observed(idx, &labels, &trace.payoffs)
    }

    /// Like [`EmpiricalGame::ingest`] for a trace given as its observation
    /// labels and payoff vector. Labels past the abstraction level are
    /// ignored.
    pub fn ingest_observed(&mut self, idx: &[usize], labels: &[String], payoffs: &[f64]) -> Result<(), EstimationError> {
        self.check_idx(idx)?;
        let players = self.tree.num_players();
        if payoffs.len() != players {
            return Err(EstimationError::PayoffLength { got: payoffs.len(), players });
        }
        let k = self.level.revealed;
        let labels: Vec<String> = labels.iter().take(k).cloned().collect();
        let key = (idx.to_vec(), labels);
        let path = match self.paths.get(&key) {
            Some(p) => p.clone(),
            None => {
                let p = self.build_path(idx, &key.1)?;
                self.paths.insert(key, p.clone());
                p
            }
        };
        let n_ord = self.ordinals.len() as u32;
        let ord = *self.ordinals.entry(idx.to_vec()).or_insert(n_ord);
        for w in 0..path.len() {
            let id = path[w];
            self.skeleton[id].visitors.insert(ord);
            match &mut self.skeleton[id].kind {
                SkelKind::Chance { count, children } => {
                    *count += 1;
                    let next = path[w + 1];
                    let edge = children.iter_mut().find(|c| c.2 == next).expect("edge on path");
                    edge.1 += 1;
                }
                SkelKind::Leaf { acc } => acc.push(payoffs),
                SkelKind::Decision { .. } => {}
            }
        }
        self.nf
            .entry(idx.to_vec())
            .or_insert_with(|| PayoffAccum::new(payoffs.len()))
            .push(payoffs);
        Ok(())
    }

    fn new_skel(&mut self, frontier: &Frontier, parent: Option<SkelId>) -> SkelId {
        let depth = parent.map_or(0, |p| self.skeleton[p].depth + 1);
        let kind = match frontier {
            Frontier::Decision { player, coords } => SkelKind::Decision {
                player: *player,
                coords: coords.clone(),
                children: BTreeMap::new(),
            },
            Frontier::Chance => SkelKind::Chance {
                count: 0,
                children: Vec::new(),
            },
            Frontier::Leaf => SkelKind::Leaf {
                acc: PayoffAccum::new(self.tree.num_players()),
            },
        };
        self.skeleton.push(SkelNode {
            kind,
            parent,
            depth,
            visitors: BTreeSet::new(),
        });
        self.skeleton.len() - 1
    }

    /// Walks the abstract game for profile `idx` and observations `labels`,
    /// creating skeleton nodes as needed. Returns the skeleton path.
    fn build_path(&mut self, idx: &[usize], labels: &[String]) -> Result<Vec<SkelId>, EstimationError> {
        let tree = Arc::clone(&self.tree);
        let k = self.level.revealed;
        let expand = |h: NodeId| {
            let node = tree.node(h);
            (node.event_index() >= k).then(|| node.children().iter().map(|e| e.child).collect())
        };
        let mut set = walk::close(&tree, vec![tree.root()], expand);
        let mut frontier = walk::classify(&tree, &set).map_err(EstimationError::Abstraction)?;
        if self.skeleton.is_empty() {
            self.new_skel(&frontier, None);
        }
        let mut cur = 0;
        let mut path = vec![cur];
        let mut seen_events = 0;
        loop {
            let next_set;
            let step: Step = match &frontier {
                Frontier::Leaf => {
                    if !matches!(self.skeleton[cur].kind, SkelKind::Leaf { .. }) {
                        return Err(EstimationError::Abstraction("model leaf collides with an inner node".into()));
                    }
                    return Ok(path);
                }
                Frontier::Chance => {
                    let label = labels.get(seen_events).ok_or(EstimationError::MissingObservation {
                        needed: seen_events + 1,
                        got: labels.len(),
                    })?;
                    let event = tree.node(set[0]).event_index();
                    next_set = walk::advance_chance(&tree, &set, label);
                    if next_set.is_empty() {
                        return Err(EstimationError::UnknownLabel {
                            event,
                            label: label.clone(),
                        });
                    }
                    seen_events += 1;
                    Step::Chance(label.clone())
                }
                Frontier::Decision { player, coords } => {
                    let strat = &self.strategies[player - 1][idx[player - 1]];
                    let tuple: Vec<usize> = coords
                        .iter()
                        .map(|c| strat[tree.infoset(*c).local_index()])
                        .collect();
                    next_set = walk::advance_decision(&tree, &set, coords, &tuple);
                    Step::Decision(tuple)
                }
            };
            set = walk::close(&tree, next_set, expand);
            frontier = walk::classify(&tree, &set).map_err(EstimationError::Abstraction)?;
            let existing = match (&self.skeleton[cur].kind, &step) {
                (SkelKind::Chance { children, .. }, Step::Chance(l)) => {
                    children.iter().find(|c| &c.0 == l).map(|c| c.2)
                }
                (SkelKind::Decision { children, .. }, Step::Decision(t)) => children.get(t).copied(),
                _ => return Err(EstimationError::Abstraction("model node kind changed between traces".into())),
            };
            let child = match existing {
                Some(c) => c,
                None => {
                    let c = self.new_skel(&frontier, Some(cur));
                    match (&mut self.skeleton[cur].kind, step) {
                        (SkelKind::Chance { children, .. }, Step::Chance(l)) => children.push((l, 0, c)),
                        (SkelKind::Decision { children, .. }, Step::Decision(t)) => {
                            children.insert(t, c);
                        }
                        _ => unreachable!(),
                    }
                    c
                }
            };
            cur = child;
            path.push(cur);
        }
    }

    /// Number of traces recorded for profile `idx`.
    pub fn sample_count(&self, idx: &[usize]) -> u64 {
        self.nf.get(idx).map_or(0, PayoffAccum::count)
    }

    /// Mean payoff over the traces of profile `idx`.
    pub fn nf_estimate(&self, idx: &[usize]) -> Result<Vec<f64>, EstimationError> {
        self.check_idx(idx)?;
        self.nf
            .get(idx)
            .and_then(PayoffAccum::mean)
            .ok_or_else(|| EstimationError::InsufficientData(format!("profile {idx:?} was never simulated")))
    }

    /// Tree-view payoff estimate of the pure profile `idx`.
    pub fn te_estimate(&self, idx: &[usize]) -> Result<Vec<f64>, EstimationError> {
        self.check_idx(idx)?;
        if self.skeleton.is_empty() {
            return Err(EstimationError::InsufficientData("no traces recorded".into()));
        }
        self.eval(0, idx)
    }

    fn eval(&self, id: SkelId, idx: &[usize]) -> Result<Vec<f64>, EstimationError> {
        match &self.skeleton[id].kind {
            SkelKind::Leaf { acc } => acc
                .mean()
                .ok_or_else(|| EstimationError::InsufficientData(format!("leaf {id} has no samples"))),
            SkelKind::Chance { count, children } => {
                // sum of count-weighted values over the total count keeps
                // small-integer data exact
                let mut out = vec![0.0; self.num_players()];
                for (_, m, child) in children {
                    if *m == 0 {
                        continue;
                    }
                    let v = self.eval(*child, idx)?;
                    for (o, x) in out.iter_mut().zip(v) {
                        *o += *m as f64 * x;
                    }
                }
                Ok(out.into_iter().map(|x| x / *count as f64).collect())
            }
            SkelKind::Decision {
                player,
                coords,
                children,
            } => {
                let strat = &self.strategies[player - 1][idx[player - 1]];
                let tuple: Vec<usize> = coords
                    .iter()
                    .map(|c| strat[self.tree.infoset(*c).local_index()])
                    .collect();
                match children.get(&tuple) {
                    Some(&c) => self.eval(c, idx),
                    None => Err(EstimationError::InsufficientData(format!(
                        "profile {idx:?} leaves the simulated tree at model node {id} (player {player} action {tuple:?})"
                    ))),
                }
            }
        }
    }

    /// Tree-view estimate of a mixed profile given as one weight vector per
    /// player over its restricted set.
    pub fn te_estimate_mixed(&self, weights: &[Vec<f64>]) -> Result<Vec<f64>, EstimationError> {
        mix_estimates(weights, |idx| self.te_estimate(idx))
    }

    pub fn nf_estimate_mixed(&self, weights: &[Vec<f64>]) -> Result<Vec<f64>, EstimationError> {
        mix_estimates(weights, |idx| self.nf_estimate(idx))
    }

    pub fn chance_stats(&self) -> Vec<ChanceStats> {
        self.skeleton
            .iter()
            .enumerate()
            .filter_map(|(i, n)| match &n.kind {
                SkelKind::Chance { count, children } => Some(ChanceStats {
                    node: i,
                    count: *count,
                    edges: children.iter().map(|(l, m, _)| (l.clone(), *m)).collect(),
                }),
                _ => None,
            })
            .collect()
    }

    pub fn skeleton_len(&self) -> usize {
        self.skeleton.len()
    }

    pub fn leaves(&self) -> Vec<SkelId> {
        self.skeleton
            .iter()
            .enumerate()
            .filter(|(_, n)| matches!(n.kind, SkelKind::Leaf { .. }))
            .map(|(i, _)| i)
            .collect()
    }

    /// Sample count and per-player mean at a leaf.
    pub fn leaf_stats(&self, leaf: SkelId) -> Option<(u64, Vec<f64>)> {
        match &self.skeleton.get(leaf)?.kind {
            SkelKind::Leaf { acc } => Some((acc.count(), acc.mean().unwrap_or_default())),
            _ => None,
        }
    }

    /// Leaf reached by profile `idx` with the given observations, if any
    /// trace got there.
    pub fn leaf_for(&self, idx: &[usize], labels: &[&str]) -> Option<SkelId> {
        let mut cur = 0;
        let mut next_label = labels.iter();
        self.skeleton.first()?;
        loop {
            match &self.skeleton[cur].kind {
                SkelKind::Leaf { .. } => return Some(cur),
                SkelKind::Chance { children, .. } => {
                    let l = next_label.next()?;
                    cur = children.iter().find(|c| c.0 == *l)?.2;
                }
                SkelKind::Decision {
                    player,
                    coords,
                    children,
                } => {
                    let strat = self.strategies[player - 1].get(*idx.get(player - 1)?)?;
                    let tuple: Vec<usize> = coords
                        .iter()
                        .map(|c| strat[self.tree.infoset(*c).local_index()])
                        .collect();
                    cur = *children.get(&tuple)?;
                }
            }
        }
    }

    /// Number of simulated profiles whose traces crossed the first edge on
    /// the model path to `leaf`.
    pub fn compute_c(&self, leaf: SkelId) -> Result<usize, EstimationError> {
        match self.skeleton.get(leaf).map(|n| &n.kind) {
            Some(SkelKind::Leaf { .. }) => {}
            _ => return Err(EstimationError::InsufficientData(format!("unknown leaf {leaf}"))),
        }
        // depth-1 ancestor of the leaf
        let mut cur = leaf;
        while self.skeleton[cur].depth > 1 {
            cur = self.skeleton[cur].parent.expect("non-root node has a parent");
        }
        Ok(self.skeleton[cur].visitors.len())
    }

    /// Sum of all payoff samples at the leaves, per player. Equals the sum
    /// over the normal-form view when every trace was ingested once.
    pub fn leaf_payoff_total(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.num_players()];
        for n in &self.skeleton {
            if let SkelKind::Leaf { acc } = &n.kind {
                for (o, s) in out.iter_mut().zip(acc.sums()) {
                    *o += s;
                }
            }
        }
        out
    }
}

enum Step {
    Chance(String),
    Decision(Vec<usize>),
}

/// Every index vector in the product of `0..sizes[j]`, last index fastest.
pub fn product_indices(sizes: &[usize]) -> Vec<Vec<usize>> {
    if sizes.contains(&0) {
        return Vec::new();
    }
    let total: usize = sizes.iter().product();
    let mut out = Vec::with_capacity(total);
    let mut cur = vec![0; sizes.len()];
    for _ in 0..total {
        out.push(cur.clone());
        for j in (0..sizes.len()).rev() {
            cur[j] += 1;
            if cur[j] < sizes[j] {
                break;
            }
            cur[j] = 0;
        }
    }
    out
}

/// Expected payoff of a product mixture, combining pure estimates
/// multilinearly.
pub fn mix_estimates<F>(weights: &[Vec<f64>], mut pure: F) -> Result<Vec<f64>, EstimationError>
where
    F: FnMut(&[usize]) -> Result<Vec<f64>, EstimationError>,
{
    let sizes: Vec<usize> = weights.iter().map(Vec::len).collect();
    let mut out = vec![0.0; weights.len()];
    for idx in product_indices(&sizes) {
        let w: f64 = idx.iter().enumerate().map(|(j, &i)| weights[j][i]).product();
        if w == 0.0 {
            continue;
        }
        let v = pure(&idx)?;
        for (o, x) in out.iter_mut().zip(v) {
            *o += w * x;
        }
    }
    Ok(out)
}

/// `|U_j(σ) − Û_j(σ)|` for every listed profile and player, in profile-major order.
pub fn payoff_gaps<F>(truth: &[Vec<f64>], mut estimate: F) -> Result<Vec<f64>, EstimationError>
where
    F: FnMut(usize) -> Result<Vec<f64>, EstimationError>,
{
    if truth.is_empty() {
        return Err(EstimationError::Empty);
    }
    let mut gaps = Vec::new();
    for (i, u) in truth.iter().enumerate() {
        let est = estimate(i)?;
        gaps.extend(u.iter().zip(&est).map(|(a, b)| (a - b).abs()));
    }
    Ok(gaps)
}

/// Mean absolute error of `estimate` over players and profiles. `truth[i]`
/// is the true payoff vector of the `i`-th profile.
pub fn estimation_error<F>(truth: &[Vec<f64>], estimate: F) -> Result<f64, EstimationError>
where
    F: FnMut(usize) -> Result<Vec<f64>, EstimationError>,
{
    let gaps = payoff_gaps(truth, estimate)?;
    Ok(gaps.iter().sum::<f64>() / gaps.len() as f64)
}

/// Exact payoffs of pure profiles in the true game.
pub fn true_payoffs(tree: &GameTree, profiles: &[PureProfile]) -> Vec<Vec<f64>> {
    profiles
        .iter()
        .map(|p| {
            let s = StrategyProfile::from_pure(tree, p).expect("profile fits the game");
            tree.expected_payoff(&s).expect("valid profile")
        })
        .collect()
}

//! Expansion of a tree model when restricted sets are kept per infoset.
//!
//! With per-infoset action sets a new best response adds one action at some
//! infosets. The tree model does not need every new combination simulated:
//! it is enough to pair each new component with the old combinations and to
//! simulate the joint best-response profile once. Paths of the combinations
//! left out are covered by those families.

use crate::estimation::{product_indices, EmpiricalGame, EstimationError};
use crate::game_tree::{GameTree, PureProfile, PureStrategy};

use super::simulate_profile;

/// Restricted actions per player (outer) and local infoset (inner).
pub type ComponentSets = Vec<Vec<Vec<usize>>>;

/// Every profile whose components are drawn from `sets`, with `fixed`
/// overriding single components.
fn combos(sets: &ComponentSets, fixed: Option<(usize, usize, usize)>) -> Vec<PureProfile> {
    let mut slots: Vec<(usize, usize, Vec<usize>)> = Vec::new();
    for (j, per) in sets.iter().enumerate() {
        for (i, acts) in per.iter().enumerate() {
            let choices = match fixed {
                Some((fj, fi, a)) if fj == j && fi == i => vec![a],
                _ => acts.clone(),
            };
            slots.push((j, i, choices));
        }
    }
    let sizes: Vec<usize> = slots.iter().map(|s| s.2.len()).collect();
    product_indices(&sizes)
        .into_iter()
        .map(|pick| {
            let mut prof: PureProfile = sets.iter().map(|per| vec![0; per.len()]).collect();
            for ((j, i, choices), k) in slots.iter().zip(pick) {
                prof[*j][*i] = choices[k];
            }
            prof
        })
        .collect()
}

/// Profiles to simulate after best responses `br` (one pure strategy per
/// player): for every component where `br` brings a new action, that action
/// against all old combinations; then the joint `br` profile.
pub fn infoset_families(old: &ComponentSets, br: &[PureStrategy]) -> Vec<PureProfile> {
    let mut out: Vec<PureProfile> = Vec::new();
    let push = |p: PureProfile, out: &mut Vec<PureProfile>| {
        if !out.contains(&p) {
            out.push(p);
        }
    };
    for (j, per) in old.iter().enumerate() {
        for (i, acts) in per.iter().enumerate() {
            let a = br[j][i];
            if !acts.contains(&a) {
                for p in combos(old, Some((j, i, a))) {
                    push(p, &mut out);
                }
            }
        }
    }
    if !out.is_empty() {
        push(br.to_vec(), &mut out);
    }
    out
}

/// Whether `strategy` takes every own action leading to local infoset `i`.
pub fn relevant(tree: &GameTree, player: usize, strategy: &[usize], i: usize) -> bool {
    let set = tree.player_infosets(player)[i];
    tree.infoset(set)
        .own_history()
        .iter()
        .all(|&(prev, a)| strategy[tree.infoset(prev).local_index()] == a)
}

/// Pure strategies of `player` built from the component sets, one per
/// distinct behaviour: infosets the strategy itself never leads to get the
/// first action of their set.
pub fn reduced_strategies(tree: &GameTree, player: usize, comps: &[Vec<usize>]) -> Vec<PureStrategy> {
    let sets = tree.player_infosets(player);
    let mut order: Vec<usize> = (0..sets.len()).collect();
    order.sort_by_key(|&i| (tree.infoset(sets[i]).own_history().len(), i));
    let mut out = Vec::new();
    let mut cur: Vec<usize> = comps.iter().map(|c| c[0]).collect();
    fn rec(
        tree: &GameTree,
        player: usize,
        comps: &[Vec<usize>],
        order: &[usize],
        pos: usize,
        cur: &mut Vec<usize>,
        out: &mut Vec<PureStrategy>,
    ) {
        let Some(&i) = order.get(pos) else {
            out.push(cur.clone());
            return;
        };
        if relevant(tree, player, cur, i) {
            for &a in &comps[i] {
                cur[i] = a;
                rec(tree, player, comps, order, pos + 1, cur, out);
            }
            cur[i] = comps[i][0];
        } else {
            rec(tree, player, comps, order, pos + 1, cur, out);
        }
    }
    rec(tree, player, comps, &order, 0, &mut cur, &mut out);
    out
}

/// Maps `strategy` onto the reduced form of the component sets: irrelevant
/// infosets, and relevant ones whose action is not in the set, get the first
/// action of their set.
pub fn canonical(tree: &GameTree, player: usize, comps: &[Vec<usize>], strategy: &[usize]) -> PureStrategy {
    let sets = tree.player_infosets(player);
    let mut order: Vec<usize> = (0..sets.len()).collect();
    order.sort_by_key(|&i| (tree.infoset(sets[i]).own_history().len(), i));
    let mut out: Vec<usize> = comps.iter().map(|c| c[0]).collect();
    for i in order {
        if relevant(tree, player, &out, i) && comps[i].contains(&strategy[i]) {
            out[i] = strategy[i];
        }
    }
    out
}

/// Tree-aware variant of [`infoset_families`]: strategies are reduced, so
/// a new component is only paired with old strategies that lead to its
/// infoset. `added` lists `(player, local infoset, action)` in the order
/// the components were added; `new` holds the component sets after adding.
pub fn reduced_families(
    tree: &GameTree,
    old: &ComponentSets,
    new: &ComponentSets,
    added: &[(usize, usize, usize)],
    br: &[PureStrategy],
) -> Vec<PureProfile> {
    let n = old.len();
    let olds: Vec<Vec<PureStrategy>> = (0..n).map(|j| reduced_strategies(tree, j + 1, &old[j])).collect();
    let mut out: Vec<PureProfile> = Vec::new();
    for &(j, i, a) in added {
        let mut comps = old[j].clone();
        comps[i] = vec![a];
        let own: Vec<PureStrategy> = reduced_strategies(tree, j + 1, &comps)
            .into_iter()
            .filter(|s| relevant(tree, j + 1, s, i))
            .map(|s| canonical(tree, j + 1, &new[j], &s))
            .collect();
        let mut sets: Vec<&[PureStrategy]> = olds.iter().map(Vec::as_slice).collect();
        sets[j] = &own;
        let sizes: Vec<usize> = sets.iter().map(|s| s.len()).collect();
        for pick in product_indices(&sizes) {
            let p: PureProfile = pick.iter().enumerate().map(|(q, &k)| sets[q][k].clone()).collect();
            if !out.contains(&p) {
                out.push(p);
            }
        }
    }
    if !added.is_empty() {
        let joint: PureProfile = (0..n).map(|j| canonical(tree, j + 1, &new[j], &br[j])).collect();
        if !out.contains(&joint) {
            out.push(joint);
        }
    }
    out
}

/// Adds each profile's strategies to the restricted sets and simulates it
/// `m` times. Returns the restricted index of each profile.
pub fn expand_te_model(
    game: &mut EmpiricalGame,
    profiles: &[PureProfile],
    m: u64,
    noise_variance: f64,
    seed: u64,
) -> Result<Vec<Vec<usize>>, EstimationError> {
    let mut out = Vec::with_capacity(profiles.len());
    for p in profiles {
        let idx: Vec<usize> = p
            .iter()
            .enumerate()
            .map(|(j, s)| game.add_strategy(j + 1, s.clone()).0)
            .collect();
        simulate_profile(game, &idx, m, noise_variance, seed)?;
        out.push(idx);
    }
    Ok(out)
}

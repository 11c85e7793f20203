//! Policy-space response oracles over an empirical game model.
//!
//! Each iteration solves the current empirical game, records metrics,
//! computes a best response per player against the solution in the true
//! game, adds the novel ones to the restricted sets, and simulates every new
//! combination of restricted strategies `m` times.

mod expand;

pub use expand::{
    canonical, expand_te_model, infoset_families, reduced_families, reduced_strategies, relevant, ComponentSets,
};

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::bounds::{c_histogram, linf_distance, min_c};
use crate::estimation::{
    estimation_error, AbstractionLevel, EmpiricalGame, EstimationError, ModelKind,
};
use crate::game_tree::{GameTree, PureProfile, PureStrategy, StrategyProfile};
use crate::games::{simulate, ObservationModel};
use crate::rng::{self, purpose};
use crate::solvers::{
    cfr, q_learning_br, select_equilibrium, uniform_mss, MixedProfile, QConfig, RestrictedNormalForm,
    SolverError,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MssKind {
    Nash,
    Cfr,
    Uniform,
}

impl std::fmt::Display for MssKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            MssKind::Nash => "nash",
            MssKind::Cfr => "cfr",
            MssKind::Uniform => "uniform",
        })
    }
}

impl std::str::FromStr for MssKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "nash" => Ok(MssKind::Nash),
            "cfr" => Ok(MssKind::Cfr),
            "uniform" => Ok(MssKind::Uniform),
            _ => Err(format!("unknown meta-strategy solver {s:?}")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BrKind {
    Exact,
    Qlearn,
}

impl std::fmt::Display for BrKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            BrKind::Exact => "exact",
            BrKind::Qlearn => "qlearn",
        })
    }
}

impl std::str::FromStr for BrKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "exact" => Ok(BrKind::Exact),
            "qlearn" => Ok(BrKind::Qlearn),
            _ => Err(format!("unknown best-response oracle {s:?}")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PsroConfig {
    /// Estimator the meta-strategy solver reads.
    pub model: ModelKind,
    /// Chance events the simulator reveals and the tree model conditions on.
    pub obs_events: usize,
    /// Simulations per new profile combination.
    pub samples: u64,
    pub max_iters: usize,
    pub mss: MssKind,
    pub br: BrKind,
    pub noise_variance: f64,
    pub cfr_iters: usize,
    pub qlearn: QConfig,
    pub expansion: Expansion,
}

impl PsroConfig {
    pub fn new(model: ModelKind, obs_events: usize) -> Self {
        PsroConfig {
            model,
            obs_events,
            samples: 500,
            max_iters: 20,
            mss: MssKind::Nash,
            br: BrKind::Exact,
            noise_variance: 0.1,
            cfr_iters: 1000,
            qlearn: QConfig::default(),
            expansion: match model {
                ModelKind::Nf => Expansion::Profiles,
                ModelKind::Te => Expansion::Infosets,
            },
        }
    }

    fn check(&self) -> Result<(), PsroError> {
        if self.samples == 0 {
            return Err(PsroError::Config("samples per profile must be at least 1".into()));
        }
        if !(self.noise_variance >= 0.0) {
            return Err(PsroError::Config("noise variance must be nonnegative".into()));
        }
        Ok(())
    }
}

/// How restricted sets grow.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Expansion {
    /// Whole best-response strategies are added; every new profile is
    /// simulated.
    Profiles,
    /// Best-response actions are added per infoset and the restricted set
    /// holds every reduced combination. The tree model only simulates the
    /// families that cover new paths; the normal-form model simulates every
    /// new profile.
    Infosets,
}

impl std::fmt::Display for Expansion {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Expansion::Profiles => "profiles",
            Expansion::Infosets => "infosets",
        })
    }
}

impl std::str::FromStr for Expansion {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "profiles" => Ok(Expansion::Profiles),
            "infosets" => Ok(Expansion::Infosets),
            _ => Err(format!("unknown expansion {s:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PsroError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("meta-strategy solver failed at iteration {iteration}: {source}")]
    Mss { iteration: usize, source: SolverError },
    #[error("best response failed at iteration {iteration}: {message}")]
    Oracle { iteration: usize, message: String },
    #[error(transparent)]
    Estimation(#[from] EstimationError),
}

/// Metrics of one iteration, taken after the model update and solve.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    /// Mean absolute payoff error of the configured estimator.
    pub est_error: f64,
    pub est_error_nf: f64,
    pub est_error_te: f64,
    /// Largest absolute payoff error of the configured estimator.
    pub linf: f64,
    pub linf_nf: f64,
    pub linf_te: f64,
    /// Regret of the solution within the empirical game.
    pub gamma: f64,
    /// True-game regret of the solution, per player.
    pub regret_per_player: Vec<f64>,
    pub regret: f64,
    pub set_sizes: Vec<usize>,
    /// Simulations run so far.
    pub simulations: u64,
    /// Profiles whose tree estimate needed the normal-form fallback.
    pub te_fallbacks: usize,
    /// Smallest data-sharing multiplicity over the tree model's leaves.
    pub min_c: usize,
    pub wall_ms: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunMetrics {
    pub records: Vec<IterationRecord>,
    /// True when the loop stopped because no best response was novel.
    pub terminated: bool,
    pub solution: MixedProfile,
    pub strategies: Vec<Vec<PureStrategy>>,
    /// Leaves of the final tree model by data-sharing multiplicity.
    pub c_histogram: BTreeMap<usize, usize>,
}

impl RunMetrics {
    pub fn last(&self) -> &IterationRecord {
        self.records.last().expect("at least iteration 0 is recorded")
    }
}

/// Fills the first restricted set of each player with one uniformly random
/// pure strategy.
pub fn initial_strategies(tree: &GameTree, seed: u64) -> PureProfile {
    use rand::Rng;
    (1..=tree.num_players())
        .map(|j| {
            let mut r = rng::stream(seed, &[purpose::INIT, j as u64]);
            tree.player_infosets(j)
                .iter()
                .map(|&s| r.gen_range(0..tree.infoset(s).actions().len()))
                .collect()
        })
        .collect()
}

/// Seed of the simulation stream for a pure profile. Depends only on the
/// master seed and the profile, so runs that simulate the same profile see
/// the same traces.
pub fn profile_seed(seed: u64, profile: &PureProfile) -> u64 {
    let fp = rng::fingerprint(
        profile
            .iter()
            .flat_map(|s| std::iter::once(s.len() as u64).chain(s.iter().map(|&a| a as u64))),
    );
    rng::derive_seed(seed, &[purpose::SIMULATE, fp])
}

/// Simulates `profile` `m` times into `game` under restricted index `idx`.
pub fn simulate_profile(
    game: &mut EmpiricalGame,
    idx: &[usize],
    m: u64,
    noise_variance: f64,
    seed: u64,
) -> Result<(), EstimationError> {
    let pure = game.pure_profile(idx)?;
    let behavioral = game.behavioral(idx)?;
    let obs = ObservationModel::first(game.level().revealed);
    let tree = Arc::clone(game.tree());
    let mut r = rng::stream(profile_seed(seed, &pure), &[]);
    for _ in 0..m {
        let trace = simulate(&tree, &behavioral, obs, noise_variance, &mut r);
        game.ingest(idx, &trace)?;
    }
    Ok(())
}

/// Behavioral profile of the true game that plays each player's mixture
/// over its restricted set.
pub fn lift(tree: &GameTree, strategies: &[Vec<PureStrategy>], mix: &[Vec<f64>]) -> StrategyProfile {
    let mut prof = StrategyProfile::uniform(tree);
    for (j, (set, w)) in strategies.iter().zip(mix).enumerate() {
        let parts: Vec<(f64, &PureStrategy)> = w
            .iter()
            .zip(set)
            .filter(|(w, _)| **w > 0.0)
            .map(|(w, s)| (*w, s))
            .collect();
        prof.set_mixture(tree, j + 1, &parts)
            .expect("restricted strategies fit the game");
    }
    prof
}

/// Regret in the full true game of a mixture over the restricted sets.
pub fn true_game_regret(
    tree: &GameTree,
    strategies: &[Vec<PureStrategy>],
    mix: &[Vec<f64>],
) -> Result<crate::game_tree::Regret, PsroError> {
    if mix.len() != strategies.len() || mix.iter().zip(strategies).any(|(w, s)| w.len() != s.len()) {
        return Err(PsroError::Config("solution support lies outside the restricted sets".into()));
    }
    tree.regret(&lift(tree, strategies, mix))
        .map_err(|e| PsroError::Config(e.to_string()))
}

/// Per-profile payoff estimates of the configured model. A tree estimate
/// that runs off the simulated region falls back to the profile mean.
struct Estimates {
    /// `None` for profiles never simulated.
    nf: Vec<Option<Vec<f64>>>,
    te: Vec<Vec<f64>>,
    fallbacks: usize,
}

fn estimates(game: &EmpiricalGame, profiles: &[Vec<usize>]) -> Result<Estimates, EstimationError> {
    let mut out = Estimates {
        nf: Vec::with_capacity(profiles.len()),
        te: Vec::with_capacity(profiles.len()),
        fallbacks: 0,
    };
    for idx in profiles {
        let nf = match game.sample_count(idx) {
            0 => None,
            _ => Some(game.nf_estimate(idx)?),
        };
        let te = match (game.te_estimate(idx), &nf) {
            (Ok(v), _) => v,
            (Err(EstimationError::InsufficientData(_)), Some(v)) => {
                out.fallbacks += 1;
                v.clone()
            }
            (Err(e), _) => return Err(e),
        };
        out.nf.push(nf);
        out.te.push(te);
    }
    Ok(out)
}

fn solve(
    sizes: &[usize],
    payoffs: &[Vec<f64>],
    cfg: &PsroConfig,
    iteration: usize,
) -> Result<(MixedProfile, f64), PsroError> {
    let rnf = RestrictedNormalForm::from_fn::<(), _>(sizes, {
        let mut i = 0;
        move |_| {
            i += 1;
            Ok(payoffs[i - 1].clone())
        }
    })
    .expect("payoff list covers the restricted profiles");
    let mix = match cfg.mss {
        MssKind::Nash => select_equilibrium(&rnf),
        MssKind::Uniform => uniform_mss(sizes),
        MssKind::Cfr => cfr(&rnf.to_tree(), cfg.cfr_iters.max(1)).map(|res| {
            let t = rnf.to_tree();
            (1..=sizes.len())
                .map(|p| res.average.dist(t.player_infosets(p)[0]).to_vec())
                .collect()
        }),
    }
    .map_err(|source| PsroError::Mss { iteration, source })?;
    let gamma = rnf.regret(&mix).into_iter().sum();
    Ok((mix, gamma))
}

/// Local infosets of `player` reached with positive probability when
/// `player` plays `br` against `others`.
fn reached_infosets(tree: &GameTree, player: usize, br: &PureStrategy, others: &StrategyProfile) -> Vec<usize> {
    let mut prof = others.clone();
    prof.set_pure(tree, player, br).expect("best response fits the game");
    tree
        .player_infosets(player)
        .iter()
        .enumerate()
        .filter(|(_, &s)| {
            tree.infoset(s).nodes().iter().any(|&h| {
                tree.reach_probability(h, &prof).map(|r| r.total() > 0.0).unwrap_or(false)
            })
        })
        .map(|(i, _)| i)
        .collect()
}

/// Whether `br` differs from every strategy in `set` at some infoset it
/// reaches against `others`.
fn is_novel(tree: &GameTree, player: usize, br: &PureStrategy, set: &[PureStrategy], others: &StrategyProfile) -> bool {
    let reached = reached_infosets(tree, player, br, others);
    !set.iter().any(|s| reached.iter().all(|&i| s[i] == br[i]))
}

fn best_response(
    tree: &GameTree,
    player: usize,
    profile: &StrategyProfile,
    strategies: &[Vec<PureStrategy>],
    mix: &[Vec<f64>],
    cfg: &PsroConfig,
    seed: u64,
    iteration: usize,
) -> Result<PureStrategy, PsroError> {
    let fail = |message: String| PsroError::Oracle { iteration, message };
    match cfg.br {
        BrKind::Exact => tree
            .best_response(player, profile)
            .map(|b| b.strategy)
            .map_err(|e| fail(e.to_string())),
        BrKind::Qlearn => {
            let opponents: Vec<Vec<(f64, PureStrategy)>> = strategies
                .iter()
                .zip(mix)
                .map(|(set, w)| {
                    w.iter()
                        .zip(set)
                        .filter(|(w, _)| **w > 0.0)
                        .map(|(w, s)| (*w, s.clone()))
                        .collect()
                })
                .collect();
            let mut r = rng::stream(seed, &[purpose::ORACLE, iteration as u64, player as u64]);
            q_learning_br(tree, player, &opponents, cfg.noise_variance, &cfg.qlearn, &mut r)
                .map(|(s, _)| s)
                .map_err(|e| fail(e.to_string()))
        }
    }
}

/// Runs the loop from the seeded initial profile until no best response is
/// novel or `max_iters` expansions have happened.
pub fn run_psro(tree: Arc<GameTree>, cfg: &PsroConfig, seed: u64) -> Result<RunMetrics, PsroError> {
    cfg.check()?;
    let start = std::time::Instant::now();
    let n = tree.num_players();
    let mut game = EmpiricalGame::new(Arc::clone(&tree), AbstractionLevel::first(cfg.obs_events));
    let init = initial_strategies(&tree, seed);
    let mut comps: ComponentSets = init.iter().map(|s| s.iter().map(|&a| vec![a]).collect()).collect();
    for (j, s) in init.into_iter().enumerate() {
        game.add_strategy(j + 1, s);
    }
    let first = vec![0; n];
    simulate_profile(&mut game, &first, cfg.samples, cfg.noise_variance, seed)?;
    let mut simulations = cfg.samples;
    let mut truth: HashMap<Vec<usize>, Vec<f64>> = HashMap::new();
    let mut records = Vec::new();
    let mut iteration = 0;
    loop {
        let profiles = game.profiles();
        let sizes = game.set_sizes();
        for idx in &profiles {
            if game.sample_count(idx) == 0 && matches!(game.te_estimate(idx), Err(EstimationError::InsufficientData(_))) {
                simulate_profile(&mut game, idx, cfg.samples, cfg.noise_variance, seed)?;
                simulations += cfg.samples;
            }
            if !truth.contains_key(idx) {
                let u = tree
                    .expected_payoff(&game.behavioral(idx)?)
                    .map_err(|e| PsroError::Config(e.to_string()))?;
                truth.insert(idx.clone(), u);
            }
        }
        let true_u: Vec<Vec<f64>> = profiles.iter().map(|i| truth[i].clone()).collect();
        let est = estimates(&game, &profiles)?;
        let chosen: Vec<Vec<f64>> = match cfg.model {
            ModelKind::Nf => est.nf.iter().map(|v| v.clone().expect("every profile is simulated")).collect(),
            ModelKind::Te => est.te.clone(),
        };
        let (mix, gamma) = solve(&sizes, &chosen, cfg, iteration)?;
        let strategies: Vec<Vec<PureStrategy>> = (1..=n).map(|j| game.strategies(j).to_vec()).collect();
        let regret = true_game_regret(&tree, &strategies, &mix)?;
        // the normal-form error only covers simulated profiles
        let seen: Vec<usize> = (0..profiles.len()).filter(|&i| est.nf[i].is_some()).collect();
        let seen_u: Vec<Vec<f64>> = seen.iter().map(|&i| true_u[i].clone()).collect();
        let nf_at = |k: usize| Ok(est.nf[seen[k]].clone().expect("simulated"));
        let (err_nf, linf_nf) = (estimation_error(&seen_u, nf_at)?, linf_distance(&seen_u, nf_at)?);
        let te_at = |i: usize| Ok(est.te[i].clone());
        let (err_te, linf_te) = (estimation_error(&true_u, te_at)?, linf_distance(&true_u, te_at)?);
        let (est_error, linf_chosen) = match cfg.model {
            ModelKind::Nf => (err_nf, linf_nf),
            ModelKind::Te => (err_te, linf_te),
        };
        records.push(IterationRecord {
            iteration,
            est_error,
            est_error_nf: err_nf,
            est_error_te: err_te,
            linf: linf_chosen,
            linf_nf,
            linf_te,
            gamma,
            regret_per_player: regret.per_player.clone(),
            regret: regret.total,
            set_sizes: sizes.clone(),
            simulations,
            te_fallbacks: est.fallbacks,
            min_c: min_c(&game)?.unwrap_or(0),
            wall_ms: start.elapsed().as_secs_f64() * 1e3,
        });
        let hist = c_histogram(&game)?;
        let mut done = |terminated: bool, mix: MixedProfile| RunMetrics {
            records: std::mem::take(&mut records),
            terminated,
            solution: mix,
            strategies: strategies.clone(),
            c_histogram: hist.clone(),
        };
        if iteration == cfg.max_iters {
            return Ok(done(false, mix));
        }

        let lifted = lift(&tree, &strategies, &mix);
        let mut brs = Vec::with_capacity(n);
        for j in 1..=n {
            brs.push(best_response(&tree, j, &lifted, &strategies, &mix, cfg, seed, iteration)?);
        }
        let before: BTreeSet<Vec<usize>> = profiles.into_iter().collect();
        match cfg.expansion {
            Expansion::Profiles => {
                let mut added = false;
                for (j, br) in brs.into_iter().enumerate() {
                    if is_novel(&tree, j + 1, &br, game.strategies(j + 1), &lifted) {
                        added |= game.add_strategy(j + 1, br).1;
                    }
                }
                if !added {
                    return Ok(done(true, mix));
                }
            }
            Expansion::Infosets => {
                let old = comps.clone();
                let mut added = Vec::new();
                for (j, br) in brs.iter().enumerate() {
                    for i in reached_infosets(&tree, j + 1, br, &lifted) {
                        if !comps[j][i].contains(&br[i]) {
                            comps[j][i].push(br[i]);
                            added.push((j, i, br[i]));
                        }
                    }
                }
                if added.is_empty() {
                    return Ok(done(true, mix));
                }
                for (j, c) in comps.iter().enumerate() {
                    for s in reduced_strategies(&tree, j + 1, c) {
                        game.add_strategy(j + 1, s);
                    }
                }
                if cfg.model == ModelKind::Te {
                    for p in reduced_families(&tree, &old, &comps, &added, &brs) {
                        let idx: Vec<usize> =
                            p.into_iter().enumerate().map(|(j, s)| game.add_strategy(j + 1, s).0).collect();
                        if game.sample_count(&idx) == 0 {
                            simulate_profile(&mut game, &idx, cfg.samples, cfg.noise_variance, seed)?;
                            simulations += cfg.samples;
                        }
                    }
                    iteration += 1;
                    continue;
                }
            }
        }
        for idx in game.profiles() {
            if !before.contains(&idx) {
                simulate_profile(&mut game, &idx, cfg.samples, cfg.noise_variance, seed)?;
                simulations += cfg.samples;
            }
        }
        iteration += 1;
    }
}

#[cfg(test)]
mod tests;

//! Repeated PSRO runs over a grid of models and observation levels, with
//! per-iteration aggregation across repetitions.
//!
//! A run directory holds:
//! - `metrics.csv`: one row per (arm, repetition, iteration, metric)
//! - `summary.csv`: mean and standard error per (arm, iteration, metric)
//! - `bounds.json`: final-iteration bound report per run
//! - `manifest.json`: the plan, seeds, and failed repetitions
//! - `timing.json`: wall-clock milliseconds per iteration
//! - one SVG chart per plotted metric
//!
//! Everything except `timing.json` is a function of the plan alone.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{hoeffding_eps, regret_bound_check, BoundInputs, RegretBoundReport};
use crate::estimation::ModelKind;
use crate::games::{GameId, GameSpec};
use crate::plot::{Chart, Curve};
use crate::psro::{run_psro, BrKind, Expansion, MssKind, PsroConfig, RunMetrics};
use crate::rng::{self, purpose};
use crate::stats;

#[derive(Debug, thiserror::Error)]
pub enum ExperimentError {
    #[error("invalid plan: {0}")]
    Plan(String),
    #[error("cannot write {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Plot(#[from] crate::plot::PlotError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    EstError,
    Regret,
}

impl std::fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ExperimentKind::EstError => "est-error",
            ExperimentKind::Regret => "regret",
        })
    }
}

impl std::str::FromStr for ExperimentKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "est-error" => Ok(ExperimentKind::EstError),
            "regret" => Ok(ExperimentKind::Regret),
            _ => Err(format!("unknown experiment {s:?}")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentPlan {
    pub experiment: ExperimentKind,
    pub game: GameId,
    /// Rounds of the third game.
    pub rounds: usize,
    pub models: Vec<ModelKind>,
    pub obs_events: Vec<usize>,
    pub samples: u64,
    pub reps: usize,
    pub max_iters: usize,
    pub mss: MssKind,
    pub br: BrKind,
    /// `None` lets each model use its own default.
    pub expansion: Option<Expansion>,
    pub noise_variance: f64,
    /// Confidence parameter of the reported bounds.
    pub delta: f64,
    pub seed: u64,
}

impl ExperimentPlan {
    /// Defaults per game: exact oracles on the first two games, Q-learning
    /// and CFR on the third with ten times the samples.
    pub fn preset(experiment: ExperimentKind, game: GameId) -> Self {
        let base = ExperimentPlan {
            experiment,
            game,
            rounds: 3,
            models: vec![ModelKind::Nf, ModelKind::Te],
            obs_events: vec![1],
            samples: 500,
            reps: 25,
            max_iters: 20,
            mss: MssKind::Nash,
            br: BrKind::Exact,
            expansion: None,
            noise_variance: 0.1,
            delta: 0.05,
            seed: 0,
        };
        match game {
            GameId::Game1 => base,
            GameId::Game2 => ExperimentPlan {
                obs_events: vec![1, 2],
                max_iters: 40,
                ..base
            },
            GameId::Game3 => ExperimentPlan {
                obs_events: vec![1, 2, 3],
                samples: 5000,
                mss: MssKind::Cfr,
                br: BrKind::Qlearn,
                expansion: Some(Expansion::Profiles),
                ..base
            },
        }
    }

    pub fn check(&self) -> Result<(), ExperimentError> {
        let bad = |m: &str| Err(ExperimentError::Plan(m.into()));
        if self.reps == 0 {
            return bad("at least one repetition is needed");
        }
        if self.samples == 0 {
            return bad("samples per profile must be at least 1");
        }
        if self.models.is_empty() || self.obs_events.is_empty() {
            return bad("no model or observation level selected");
        }
        let events = GameSpec { game: self.game, seed: 0, rounds: self.rounds }.num_events();
        if let Some(k) = self.obs_events.iter().find(|&&k| k > events) {
            return Err(ExperimentError::Plan(format!("{} has {events} chance events, asked to reveal {k}", self.game)));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return bad("delta must lie in (0, 1)");
        }
        Ok(())
    }

    /// Seed of repetition `r`; it picks both the game instance and the
    /// PSRO streams, so arms of one repetition are paired.
    pub fn rep_seed(&self, r: usize) -> u64 {
        rng::derive_seed(self.seed, &[purpose::REPETITION, r as u64])
    }

    /// Model and observation-level combinations, in output order.
    pub fn arms(&self) -> Vec<(ModelKind, usize)> {
        let mut out = Vec::new();
        for &k in &self.obs_events {
            for &m in &self.models {
                out.push((m, k));
            }
        }
        out
    }

    fn config(&self, model: ModelKind, obs_events: usize) -> PsroConfig {
        let mut cfg = PsroConfig::new(model, obs_events);
        cfg.samples = self.samples;
        cfg.max_iters = self.max_iters;
        cfg.mss = self.mss;
        cfg.br = self.br;
        cfg.noise_variance = self.noise_variance;
        if let Some(e) = self.expansion {
            cfg.expansion = e;
        }
        cfg
    }
}

/// Final-iteration bounds of one run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundsRecord {
    pub model: ModelKind,
    pub obs_events: usize,
    pub repetition: usize,
    pub terminated: bool,
    pub eps_nf: f64,
    pub eps_te: f64,
    pub min_c: usize,
    pub c_histogram: BTreeMap<usize, usize>,
    pub linf: f64,
    /// Only for terminated runs, where the bound applies.
    pub regret_check: Option<RegretBoundReport>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub model: ModelKind,
    pub obs_events: usize,
    pub repetition: usize,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub version: String,
    pub plan: ExperimentPlan,
    pub rep_seeds: Vec<u64>,
    pub failures: Vec<Failure>,
}

/// One finished run with its coordinates in the plan.
#[derive(Clone, Debug)]
pub struct ArmRun {
    pub model: ModelKind,
    pub obs_events: usize,
    pub repetition: usize,
    pub metrics: RunMetrics,
}

#[derive(Clone, Debug)]
pub struct ExperimentOutput {
    pub runs: Vec<ArmRun>,
    pub failures: Vec<Failure>,
}

/// Named per-iteration values of a run, in a fixed order.
pub fn metric_rows(run: &RunMetrics) -> Vec<(usize, String, f64)> {
    let mut out = Vec::new();
    for r in &run.records {
        let mut push = |name: &str, v: f64| out.push((r.iteration, name.to_string(), v));
        push("est_error", r.est_error);
        push("est_error_nf", r.est_error_nf);
        push("est_error_te", r.est_error_te);
        push("linf", r.linf);
        push("gamma", r.gamma);
        push("regret", r.regret);
        for (j, v) in r.regret_per_player.iter().enumerate() {
            push(&format!("regret_p{}", j + 1), *v);
        }
        for (j, v) in r.set_sizes.iter().enumerate() {
            push(&format!("set_size_p{}", j + 1), *v as f64);
        }
        push("simulations", r.simulations as f64);
        push("te_fallbacks", r.te_fallbacks as f64);
        push("min_c", r.min_c as f64);
    }
    out
}

fn thread_count() -> Option<usize> {
    std::env::var("TEGTA_THREADS").ok()?.parse().ok().filter(|&n| n > 0)
}

/// Runs every arm and repetition of `plan`. Failed runs are collected
/// rather than aborting the others.
pub fn execute(plan: &ExperimentPlan) -> Result<ExperimentOutput, ExperimentError> {
    plan.check()?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = thread_count() {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| ExperimentError::Plan(e.to_string()))?;
    let arms = plan.arms();
    let jobs: Vec<(usize, ModelKind, usize)> = (0..plan.reps)
        .flat_map(|r| arms.iter().map(move |&(m, k)| (r, m, k)))
        .collect();
    let results: Vec<Result<ArmRun, Failure>> = pool.install(|| {
        let trees: Vec<Arc<_>> = (0..plan.reps)
            .into_par_iter()
            .map(|r| {
                let spec = GameSpec {
                    game: plan.game,
                    seed: plan.rep_seed(r),
                    rounds: plan.rounds,
                };
                Arc::new(spec.build())
            })
            .collect();
        jobs.par_iter()
            .map(|&(r, model, k)| {
                run_psro(Arc::clone(&trees[r]), &plan.config(model, k), plan.rep_seed(r))
                    .map(|metrics| ArmRun {
                        model,
                        obs_events: k,
                        repetition: r,
                        metrics,
                    })
                    .map_err(|e| Failure {
                        model,
                        obs_events: k,
                        repetition: r,
                        message: e.to_string(),
                    })
            })
            .collect()
    });
    let mut out = ExperimentOutput {
        runs: Vec::new(),
        failures: Vec::new(),
    };
    for r in results {
        match r {
            Ok(run) => out.runs.push(run),
            Err(f) => out.failures.push(f),
        }
    }
    let key = |m: ModelKind, k: usize, r: usize| (arms.iter().position(|a| *a == (m, k)), r);
    out.runs.sort_by_key(|a| key(a.model, a.obs_events, a.repetition));
    out.failures.sort_by_key(|f| key(f.model, f.obs_events, f.repetition));
    Ok(out)
}

/// Mean and standard error per (arm, metric, iteration). Runs that stopped
/// early contribute their last value to later iterations.
pub fn aggregate(
    plan: &ExperimentPlan,
    runs: &[ArmRun],
) -> BTreeMap<(usize, String), Vec<(usize, f64, f64, usize)>> {
    let arms = plan.arms();
    let mut out = BTreeMap::new();
    for (a, &(model, k)) in arms.iter().enumerate() {
        let mine: Vec<Vec<(usize, String, f64)>> = runs
            .iter()
            .filter(|r| r.model == model && r.obs_events == k)
            .map(|r| metric_rows(&r.metrics))
            .collect();
        if mine.is_empty() {
            continue;
        }
        let last = mine.iter().flat_map(|rows| rows.iter().map(|x| x.0)).max().unwrap_or(0);
        let mut names: Vec<String> = Vec::new();
        for rows in &mine {
            for (_, n, _) in rows {
                if !names.contains(n) {
                    names.push(n.clone());
                }
            }
        }
        for name in names {
            let per_run: Vec<Vec<f64>> = mine
                .iter()
                .map(|rows| rows.iter().filter(|x| x.1 == name).map(|x| x.2).collect())
                .collect();
            let mut curve = Vec::with_capacity(last + 1);
            for it in 0..=last {
                let vals: Vec<f64> = per_run
                    .iter()
                    .filter_map(|v| v.get(it).or(v.last()).copied())
                    .collect();
                curve.push((it, stats::mean(&vals), stats::sem(&vals), vals.len()));
            }
            out.insert((a, name), curve);
        }
    }
    out
}

/// Final-iteration bounds of each run.
pub fn bounds_records(plan: &ExperimentPlan, runs: &[ArmRun]) -> Vec<BoundsRecord> {
    runs.iter()
        .map(|r| {
            let last = r.metrics.last();
            let profiles: usize = last.set_sizes.iter().product();
            let inputs = BoundInputs {
                delta: plan.delta,
                m: plan.samples,
                variance: plan.noise_variance,
                pairs: last.set_sizes.len() * profiles,
                c: last.min_c.max(1) as f64,
                gamma: last.gamma,
            };
            let eps = |k| hoeffding_eps(k, &inputs).unwrap_or(f64::NAN);
            BoundsRecord {
                model: r.model,
                obs_events: r.obs_events,
                repetition: r.repetition,
                terminated: r.metrics.terminated,
                eps_nf: eps(ModelKind::Nf),
                eps_te: eps(ModelKind::Te),
                min_c: last.min_c,
                c_histogram: r.metrics.c_histogram.clone(),
                linf: last.linf,
                regret_check: r
                    .metrics
                    .terminated
                    .then(|| regret_bound_check(last.linf, last.gamma, &last.regret_per_player)),
            }
        })
        .collect()
}

fn io(path: &Path) -> impl FnOnce(std::io::Error) -> ExperimentError + '_ {
    move |source| ExperimentError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn write(path: &Path, bytes: impl AsRef<[u8]>) -> Result<(), ExperimentError> {
    fs::write(path, bytes).map_err(io(path))
}

/// Renders `metric` for every arm found in `summary.csv`-style curves.
pub fn chart(
    plan: &ExperimentPlan,
    curves: &BTreeMap<(usize, String), Vec<(usize, f64, f64, usize)>>,
    metric: &str,
) -> Chart {
    let arms = plan.arms();
    let many = plan.obs_events.len() > 1;
    Chart {
        title: format!("{} {}", plan.game, metric.replace('_', " ")),
        x_label: "iteration".into(),
        y_label: metric.replace('_', " "),
        curves: curves
            .iter()
            .filter(|((_, n), _)| n == metric)
            .map(|((a, _), pts)| {
                let (m, k) = arms[*a];
                Curve {
                    label: if many { format!("{m} ({k} events)") } else { m.to_string() },
                    points: pts.iter().map(|&(i, mean, sem, _)| (i as f64, mean, sem)).collect(),
                }
            })
            .collect(),
    }
}

/// Runs the plan and writes the run directory. Returns the runs as well.
pub fn run_experiment(plan: &ExperimentPlan, dir: &Path) -> Result<ExperimentOutput, ExperimentError> {
    plan.check()?;
    fs::create_dir_all(dir).map_err(io(dir))?;
    let out = execute(plan)?;
    let game = plan.game.to_string();
    let experiment = plan.experiment.to_string();

    let path = dir.join("metrics.csv");
    let mut w = csv::Writer::from_path(&path)?;
    w.write_record(["experiment", "game", "model", "obs_events", "repetition", "iteration", "metric", "value"])?;
    for run in &out.runs {
        for (it, name, v) in metric_rows(&run.metrics) {
            w.write_record([
                experiment.clone(),
                game.clone(),
                run.model.to_string(),
                run.obs_events.to_string(),
                run.repetition.to_string(),
                it.to_string(),
                name,
                v.to_string(),
            ])?;
        }
    }
    w.flush().map_err(io(&path))?;

    let curves = aggregate(plan, &out.runs);
    let arms = plan.arms();
    let path = dir.join("summary.csv");
    let mut w = csv::Writer::from_path(&path)?;
    w.write_record(["experiment", "game", "model", "obs_events", "iteration", "metric", "mean", "sem", "n"])?;
    for ((a, name), pts) in &curves {
        let (m, k) = arms[*a];
        for &(it, mean, sem, n) in pts {
            w.write_record([
                experiment.clone(),
                game.clone(),
                m.to_string(),
                k.to_string(),
                it.to_string(),
                name.clone(),
                mean.to_string(),
                sem.to_string(),
                n.to_string(),
            ])?;
        }
    }
    w.flush().map_err(io(&path))?;

    write(&dir.join("bounds.json"), serde_json::to_string_pretty(&bounds_records(plan, &out.runs))?)?;
    let manifest = Manifest {
        version: env!("CARGO_PKG_VERSION").to_string(),
        plan: plan.clone(),
        rep_seeds: (0..plan.reps).map(|r| plan.rep_seed(r)).collect(),
        failures: out.failures.clone(),
    };
    write(&dir.join("manifest.json"), serde_json::to_string_pretty(&manifest)?)?;
    let timing: Vec<serde_json::Value> = out
        .runs
        .iter()
        .map(|r| {
            serde_json::json!({
                "model": r.model,
                "obs_events": r.obs_events,
                "repetition": r.repetition,
                "wall_ms": r.metrics.records.iter().map(|x| x.wall_ms).collect::<Vec<_>>(),
            })
        })
        .collect();
    write(&dir.join("timing.json"), serde_json::to_string_pretty(&timing)?)?;

    if !out.runs.is_empty() {
        for metric in ["est_error", "regret"] {
            write(&dir.join(format!("{metric}.svg")), chart(plan, &curves, metric).render()?)?;
        }
    }
    Ok(out)
}

/// Reads a `summary.csv` back into charts, one per metric listed.
pub fn charts_from_summary(path: &Path, metrics: &[&str]) -> Result<Vec<(String, Chart)>, ExperimentError> {
    let mut r = csv::Reader::from_path(path)?;
    let mut by_metric: BTreeMap<String, BTreeMap<String, Vec<(f64, f64, f64)>>> = BTreeMap::new();
    let mut game = String::new();
    let mut levels = std::collections::BTreeSet::new();
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let field = |i: usize| rec.get(i).unwrap_or("").to_string();
        let num = |i: usize| {
            field(i)
                .parse::<f64>()
                .map_err(|_| ExperimentError::Plan(format!("bad number {:?} in {}", field(i), path.display())))
        };
        game = field(1);
        levels.insert(field(3));
        rows.push((field(2), field(3), num(4)?, field(5), num(6)?, num(7)?));
    }
    for (model, k, it, metric, mean, sem) in rows {
        if !metrics.contains(&metric.as_str()) {
            continue;
        }
        let label = if levels.len() > 1 { format!("{model} ({k} events)") } else { model };
        by_metric.entry(metric).or_default().entry(label).or_default().push((it, mean, sem));
    }
    Ok(by_metric
        .into_iter()
        .map(|(metric, curves)| {
            let chart = Chart {
                title: format!("{game} {}", metric.replace('_', " ")),
                x_label: "iteration".into(),
                y_label: metric.replace('_', " "),
                curves: curves.into_iter().map(|(label, points)| Curve { label, points }).collect(),
            };
            (metric, chart)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny(dir: &Path) -> ExperimentPlan {
        let mut plan = ExperimentPlan::preset(ExperimentKind::EstError, GameId::Game1);
        plan.reps = 1;
        plan.max_iters = 1;
        plan.samples = 20;
        let _ = dir;
        plan
    }

    #[test]
    fn one_rep_one_iteration_rows() {
        let tmp = tempfile::tempdir().unwrap();
        let plan = tiny(tmp.path());
        run_experiment(&plan, tmp.path()).unwrap();
        let mut r = csv::Reader::from_path(tmp.path().join("metrics.csv")).unwrap();
        let mut iters = std::collections::BTreeSet::new();
        let mut models = std::collections::BTreeSet::new();
        for rec in r.records() {
            let rec = rec.unwrap();
            iters.insert(rec[5].to_string());
            models.insert(rec[2].to_string());
            assert_eq!(&rec[0], "est-error");
        }
        assert!(iters.iter().all(|i| i == "0" || i == "1"));
        assert!(iters.contains("0"));
        assert_eq!(models.len(), 2);
        for f in ["summary.csv", "bounds.json", "manifest.json", "timing.json", "est_error.svg", "regret.svg"] {
            assert!(tmp.path().join(f).exists(), "{f}");
        }
    }

    #[test]
    fn carry_forward_fills_finished_runs() {
        let plan = tiny(Path::new("."));
        let out = execute(&plan).unwrap();
        let mut runs = out.runs.clone();
        // pretend a second repetition stopped at iteration 0
        let mut short = runs[0].clone();
        short.repetition = 1;
        short.metrics.records.truncate(1);
        runs.push(short);
        let curves = aggregate(&plan, &runs);
        let nf = &curves[&(0, "regret".to_string())];
        let full = &runs[0].metrics.records;
        let last = full.len() - 1;
        let want = (full[last].regret + full[0].regret) / 2.0;
        assert!((nf[last].1 - want).abs() < 1e-12);
        assert_eq!(nf[last].3, 2);
    }

    #[test]
    fn rejects_bad_plans() {
        let mut plan = ExperimentPlan::preset(ExperimentKind::Regret, GameId::Game1);
        plan.obs_events = vec![2];
        assert!(plan.check().is_err());
        plan.obs_events = vec![1];
        plan.reps = 0;
        assert!(plan.check().is_err());
    }

    #[test]
    fn presets_follow_the_protocol() {
        let g3 = ExperimentPlan::preset(ExperimentKind::EstError, GameId::Game3);
        assert_eq!((g3.samples, g3.mss, g3.br), (5000, MssKind::Cfr, BrKind::Qlearn));
        assert_eq!(g3.obs_events, vec![1, 2, 3]);
        let g1 = ExperimentPlan::preset(ExperimentKind::Regret, GameId::Game1);
        assert_eq!((g1.samples, g1.reps, g1.max_iters), (500, 25, 20));
        assert_eq!("est-error".parse::<ExperimentKind>().unwrap(), ExperimentKind::EstError);
    }
}

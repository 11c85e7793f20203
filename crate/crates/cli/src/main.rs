use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use tegta::abstraction::{coarsen, CoarseningSpec};
use tegta::estimation::{read_trace_log, AbstractionLevel, EmpiricalGame, ModelKind};
use tegta::experiment::{charts_from_summary, run_experiment, BoundsRecord, ExperimentKind, ExperimentPlan, Manifest};
use tegta::game_tree::format::{read_game, write_game};
use tegta::games::{GameId, GameSpec};
use tegta::psro::{BrKind, Expansion, MssKind};
use tegta::{GameTree, PureStrategy};

#[derive(Parser)]
#[command(name = "tegta", version, about = "Tree-exploiting empirical game-theoretic analysis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a game instance and write it as JSON.
    Gen {
        #[arg(long)]
        game: GameId,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Rounds of game3.
        #[arg(long, default_value_t = 3)]
        rounds: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Hide chance outcomes of a game file.
    Coarsen {
        #[arg(long)]
        game: PathBuf,
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        certificate: PathBuf,
    },
    /// Run PSRO repetitions and write a run directory.
    Run(RunArgs),
    /// Re-estimate profile payoffs from a trace log.
    Estimate {
        #[arg(long)]
        game: PathBuf,
        /// JSON list, per player, of pure strategies (one action index per infoset).
        #[arg(long)]
        strategies: PathBuf,
        #[arg(long)]
        traces: PathBuf,
        #[arg(long, default_value = "te")]
        model: ModelKind,
        #[arg(long, default_value_t = 1)]
        obs_events: usize,
    },
    /// Print the bound report of a finished run directory.
    Bounds {
        #[arg(long)]
        run: PathBuf,
    },
    /// Render charts from a summary.csv.
    Plot {
        #[arg(long)]
        summary: PathBuf,
        #[arg(long = "metric", default_values_t = ["est_error".to_string(), "regret".to_string()])]
        metrics: Vec<String>,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    game: GameId,
    #[arg(long, default_value = "regret")]
    experiment: ExperimentKind,
    /// Only this model; both when absent.
    #[arg(long)]
    model: Option<ModelKind>,
    /// Chance events revealed to the model; repeat for several.
    #[arg(long = "obs-events")]
    obs_events: Vec<usize>,
    #[arg(long)]
    samples: Option<u64>,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    mss: Option<MssKind>,
    #[arg(long)]
    br: Option<BrKind>,
    #[arg(long)]
    max_iters: Option<usize>,
    #[arg(long)]
    expansion: Option<Expansion>,
    #[arg(long)]
    rounds: Option<usize>,
    #[arg(long)]
    out: PathBuf,
}

fn load_game(path: &Path) -> Result<GameTree> {
    let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    read_game(BufReader::new(f)).with_context(|| format!("reading {}", path.display()))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(
        File::create(path).with_context(|| format!("creating {}", path.display()))?,
    ))
}

fn plan_from(a: &RunArgs) -> ExperimentPlan {
    let mut plan = ExperimentPlan::preset(a.experiment, a.game);
    plan.seed = a.seed;
    if let Some(m) = a.model {
        plan.models = vec![m];
    }
    if !a.obs_events.is_empty() {
        plan.obs_events = a.obs_events.clone();
    }
    if let Some(r) = a.rounds {
        plan.rounds = r;
        plan.obs_events.retain(|&k| k <= r);
    }
    macro_rules! set {
        ($($f:ident),*) => { $( if let Some(v) = a.$f { plan.$f = v; } )* };
    }
    set!(samples, reps, mss, br, max_iters);
    if a.expansion.is_some() {
        plan.expansion = a.expansion;
    }
    plan
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Gen { game, seed, rounds, out } => {
            let tree = GameSpec { game, seed, rounds }.build();
            let mut w = create(&out)?;
            write_game(&tree, &mut w)?;
            w.flush()?;
        }
        Command::Coarsen {
            game,
            spec,
            out,
            certificate,
        } => {
            let tree = load_game(&game)?;
            let spec: CoarseningSpec = serde_json::from_reader(BufReader::new(
                File::open(&spec).with_context(|| format!("opening {}", spec.display()))?,
            ))
            .context("reading the coarsening spec")?;
            let result = coarsen(&tree, &spec)?;
            result.certificate.validate(&tree, &result.tree)?;
            let mut w = create(&out)?;
            write_game(&result.tree, &mut w)?;
            w.flush()?;
            let mut w = create(&certificate)?;
            serde_json::to_writer_pretty(&mut w, &result.certificate)?;
            w.flush()?;
            println!(
                "{} nodes, {} infosets, {} merged action tuples",
                result.tree.nodes().len(),
                result.tree.infosets().len(),
                result.certificate.tuples.len()
            );
        }
        Command::Run(args) => {
            let plan = plan_from(&args);
            let out = run_experiment(&plan, &args.out)?;
            for f in &out.failures {
                eprintln!(
                    "{} with {} events, repetition {} failed: {}",
                    f.model, f.obs_events, f.repetition, f.message
                );
            }
            println!("{} runs written to {}", out.runs.len(), args.out.display());
        }
        Command::Estimate {
            game,
            strategies,
            traces,
            model,
            obs_events,
        } => {
            let tree = Arc::new(load_game(&game)?);
            let sets: Vec<Vec<PureStrategy>> = serde_json::from_reader(BufReader::new(
                File::open(&strategies).with_context(|| format!("opening {}", strategies.display()))?,
            ))
            .context("reading the strategy sets")?;
            if sets.len() != tree.num_players() {
                bail!("{} strategy sets for {} players", sets.len(), tree.num_players());
            }
            let mut g = EmpiricalGame::new(Arc::clone(&tree), AbstractionLevel::first(obs_events));
            for (j, set) in sets.into_iter().enumerate() {
                for s in set {
                    g.add_strategy(j + 1, s);
                }
            }
            let log = read_trace_log(BufReader::new(
                File::open(&traces).with_context(|| format!("opening {}", traces.display()))?,
            ))?;
            for t in &log {
                g.ingest_observed(&t.profile, &t.labels, &t.payoffs)?;
            }
            for idx in g.profiles() {
                let est = match model {
                    ModelKind::Nf => g.nf_estimate(&idx),
                    ModelKind::Te => g.te_estimate(&idx),
                };
                let id: Vec<String> = idx.iter().map(usize::to_string).collect();
                match est {
                    Ok(u) => {
                        let u: Vec<String> = u.iter().map(|v| format!("{v:.6}")).collect();
                        println!("{}\t{}\t{}", id.join(":"), g.sample_count(&idx), u.join(","));
                    }
                    Err(e) => println!("{}\t{}\t{e}", id.join(":"), g.sample_count(&idx)),
                }
            }
        }
        Command::Bounds { run } => {
            let read = |name: &str| -> Result<BufReader<File>> {
                let p = run.join(name);
                Ok(BufReader::new(File::open(&p).with_context(|| format!("opening {}", p.display()))?))
            };
            let manifest: Manifest = serde_json::from_reader(read("manifest.json")?)?;
            let records: Vec<BoundsRecord> = serde_json::from_reader(read("bounds.json")?)?;
            let plan = &manifest.plan;
            println!(
                "{} {}, m = {}, noise variance {}, delta {}",
                plan.experiment, plan.game, plan.samples, plan.noise_variance, plan.delta
            );
            println!("model\tevents\trep\tterminated\teps_nf\teps_te\tmin_c\tlinf\tbound\tregret\tcheck");
            let mut checked = 0;
            let mut passed = 0;
            for r in &records {
                let (bound, regret, check) = match &r.regret_check {
                    Some(c) => {
                        checked += 1;
                        passed += usize::from(c.pass);
                        (
                            format!("{:.6}", c.bound),
                            format!("{:.6}", c.regrets.iter().cloned().fold(0.0, f64::max)),
                            if c.pass { "pass" } else { "FAIL" },
                        )
                    }
                    None => ("-".into(), "-".into(), "n/a"),
                };
                println!(
                    "{}\t{}\t{}\t{}\t{:.6}\t{:.6}\t{}\t{:.6}\t{bound}\t{regret}\t{check}",
                    r.model, r.obs_events, r.repetition, r.terminated, r.eps_nf, r.eps_te, r.min_c, r.linf
                );
            }
            let mut hist = std::collections::BTreeMap::new();
            for r in &records {
                for (c, n) in &r.c_histogram {
                    *hist.entry(*c).or_insert(0usize) += n;
                }
            }
            println!("c histogram (leaves across runs):");
            for (c, n) in &hist {
                println!("  c = {c}: {n}");
            }
            println!("regret bound: {passed}/{checked} terminated runs within 2*linf + gamma");
        }
        Command::Plot { summary, metrics, out } => {
            std::fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
            let names: Vec<&str> = metrics.iter().map(String::as_str).collect();
            let charts = charts_from_summary(&summary, &names)?;
            if charts.is_empty() {
                bail!("no rows for {:?} in {}", metrics, summary.display());
            }
            for (metric, chart) in charts {
                let path = out.join(format!("{metric}.svg"));
                std::fs::write(&path, chart.render()?).with_context(|| format!("writing {}", path.display()))?;
                println!("{}", path.display());
            }
        }
    }
    Ok(())
}

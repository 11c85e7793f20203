use super::*;
use crate::game_tree::{NodeSpec, TreeBuilder};
use crate::games::generate_game1;

/// Both players have a strictly dominant second action.
fn dominant() -> GameTree {
    let mut b = TreeBuilder::new(2);
    let r = b.root(NodeSpec::decision(1, "p1"));
    for (i, a) in ["x", "y"].iter().enumerate() {
        let h = b.child(r, a, NodeSpec::decision(2, "p2"));
        for (k, c) in ["x", "y"].iter().enumerate() {
            b.child(h, c, NodeSpec::Terminal(vec![i as f64 * 2.0 + k as f64, k as f64 * 2.0 + i as f64]));
        }
    }
    b.build().unwrap()
}

/// One chance event between the players, three actions each, player 2
/// sees the outcome.
fn three_by_three() -> GameTree {
    let mut b = TreeBuilder::new(2);
    let r = b.root(NodeSpec::decision(1, "1"));
    let mut u = 0.0;
    for a in ["a1", "a2", "a3"] {
        let c = b.child(r, a, NodeSpec::Chance);
        for (e, p) in [("A", 0.5), ("B", 0.5)] {
            let h = b.chance_child(c, e, p, NodeSpec::decision(2, format!("2{e}")));
            for x in ["b1", "b2", "b3"] {
                u += 0.5;
                b.child(h, x, NodeSpec::Terminal(vec![u, -u]));
            }
        }
    }
    b.build().unwrap()
}

#[test]
fn dominant_profile_terminates_with_zero_regret() {
    let t = Arc::new(dominant());
    for model in [ModelKind::Nf, ModelKind::Te] {
        let mut cfg = PsroConfig::new(model, 0);
        cfg.samples = 20;
        let run = run_psro(Arc::clone(&t), &cfg, 3).unwrap();
        assert!(run.terminated);
        assert!(run.records.len() <= 3, "{}", run.records.len());
        assert!(run.last().regret.abs() < 1e-9);
    }
}

#[test]
fn sets_grow_and_iterations_are_contiguous() {
    let t = Arc::new(generate_game1(11));
    let mut cfg = PsroConfig::new(ModelKind::Te, 1);
    cfg.samples = 50;
    cfg.max_iters = 6;
    let run = run_psro(t, &cfg, 4).unwrap();
    for (i, w) in run.records.iter().enumerate() {
        assert_eq!(w.iteration, i);
    }
    for w in run.records.windows(2) {
        assert!(w[0].set_sizes.iter().zip(&w[1].set_sizes).all(|(a, b)| a <= b));
        assert!(w[0].simulations < w[1].simulations);
    }
    assert_eq!(run.records[0].set_sizes, vec![1, 1]);
    assert_eq!(run.records[0].simulations, 50);
}

#[test]
fn same_seed_same_metrics_and_paired_start() {
    let t = Arc::new(generate_game1(2));
    let mut cfg = PsroConfig::new(ModelKind::Nf, 1);
    cfg.samples = 30;
    cfg.max_iters = 4;
    let strip = |mut r: RunMetrics| {
        r.records.iter_mut().for_each(|x| x.wall_ms = 0.0);
        r
    };
    let a = strip(run_psro(Arc::clone(&t), &cfg, 9).unwrap());
    let b = strip(run_psro(Arc::clone(&t), &cfg, 9).unwrap());
    assert_eq!(a, b);
    cfg.model = ModelKind::Te;
    let c = run_psro(t, &cfg, 9).unwrap();
    assert_eq!(a.records[0].est_error_nf, c.records[0].est_error_nf);
    assert_eq!(a.records[0].est_error_te, c.records[0].est_error_te);
}

#[test]
fn singleton_regret_matches_best_response_gain() {
    let t = dominant();
    let strategies = vec![vec![vec![0]], vec![vec![0]]];
    let mix = vec![vec![1.0], vec![1.0]];
    let reg = true_game_regret(&t, &strategies, &mix).unwrap();
    let prof = lift(&t, &strategies, &mix);
    let u = t.expected_payoff(&prof).unwrap();
    for j in 1..=2 {
        let br = t.best_response(j, &prof).unwrap();
        assert!((reg.per_player[j - 1] - (br.value - u[j - 1])).abs() < 1e-12);
    }
    assert!(true_game_regret(&t, &strategies, &[vec![0.5, 0.5], vec![1.0]]).is_err());
}

#[test]
fn infoset_families_cover_the_highlighted_combinations() {
    let t = Arc::new(three_by_three());
    let mut g = EmpiricalGame::new(Arc::clone(&t), AbstractionLevel::first(1));
    let old: ComponentSets = vec![vec![vec![0, 1]], vec![vec![0], vec![0]]];
    let start = expand_te_model(&mut g, &[vec![vec![0], vec![0, 0]], vec![vec![1], vec![0, 0]]], 60, 0.1, 1).unwrap();
    assert_eq!(start.len(), 2);
    assert_eq!(g.leaves().len(), 4);

    let br = vec![vec![2], vec![1, 2]];
    let fam = infoset_families(&old, &br);
    assert_eq!(
        fam,
        vec![
            vec![vec![2], vec![0, 0]],
            vec![vec![0], vec![1, 0]],
            vec![vec![1], vec![1, 0]],
            vec![vec![0], vec![0, 2]],
            vec![vec![1], vec![0, 2]],
            vec![vec![2], vec![1, 2]],
        ]
    );
    expand_te_model(&mut g, &fam, 60, 0.1, 1).unwrap();
    assert_eq!(g.leaves().len(), 12);

    // (a3, b2 at A, b1 at B) was never simulated but every path it takes was
    let idx = vec![2, g.strategies(2).iter().position(|s| *s == vec![1, 0]).unwrap()];
    assert!(g.te_estimate(&idx).is_ok());
    assert!(g.nf_estimate(&idx).is_err());

    // leaves under a1 were reached by three simulated profiles
    let leaf = g.leaf_for(&[0, 0], &["A"]).unwrap();
    assert_eq!(g.compute_c(leaf).unwrap(), 3);
    for s in g.chance_stats() {
        assert_eq!(s.edges.iter().map(|e| e.1).sum::<u64>(), s.count);
    }
}

#[test]
fn retread_best_response_adds_no_nodes() {
    let t = Arc::new(three_by_three());
    let mut g = EmpiricalGame::new(Arc::clone(&t), AbstractionLevel::first(1));
    expand_te_model(&mut g, &[vec![vec![0], vec![0, 0]]], 40, 0.1, 1).unwrap();
    let before = g.skeleton_len();
    let old: ComponentSets = vec![vec![vec![0]], vec![vec![0], vec![0]]];
    assert!(infoset_families(&old, &[vec![0], vec![0, 0]]).is_empty());
    expand_te_model(&mut g, &[vec![vec![0], vec![0, 0]]], 40, 0.1, 2).unwrap();
    assert_eq!(g.skeleton_len(), before);
    assert_eq!(g.sample_count(&[0, 0]), 80);
}

/// Player 1 moves, and moves again only after "a".
fn two_step() -> GameTree {
    let mut b = TreeBuilder::new(2);
    let r = b.root(NodeSpec::decision(1, "p1"));
    let h = b.child(r, "a", NodeSpec::decision(1, "p1a"));
    b.child(h, "x", NodeSpec::Terminal(vec![1.0, 0.0]));
    b.child(h, "y", NodeSpec::Terminal(vec![2.0, 0.0]));
    b.child(r, "b", NodeSpec::Terminal(vec![0.0, 0.0]));
    b.build().unwrap()
}

#[test]
fn reduced_strategies_skip_unreachable_choices() {
    let t = two_step();
    let comps = vec![vec![0, 1], vec![0, 1]];
    let red = reduced_strategies(&t, 1, &comps);
    assert_eq!(red, vec![vec![0, 0], vec![0, 1], vec![1, 0]]);
    assert_eq!(canonical(&t, 1, &comps, &[1, 1]), vec![1, 0]);
    assert_eq!(canonical(&t, 1, &[vec![1], vec![1]], &[0, 0]), vec![1, 1]);
    assert!(relevant(&t, 1, &[0, 1], 1));
    assert!(!relevant(&t, 1, &[1, 1], 1));
}

#[test]
fn reduced_families_pair_new_actions_with_old_strategies() {
    let t = three_by_three();
    let old: ComponentSets = vec![vec![vec![0, 1]], vec![vec![0], vec![0]]];
    let new: ComponentSets = vec![vec![vec![0, 1, 2]], vec![vec![0, 1], vec![0, 2]]];
    let added = [(0, 0, 2), (1, 0, 1), (1, 1, 2)];
    let br = vec![vec![2], vec![1, 2]];
    assert_eq!(reduced_families(&t, &old, &new, &added, &br), infoset_families(&old, &br));
}

#[test]
fn infoset_expansion_terminates_and_simulates_less() {
    let t = Arc::new(three_by_three());
    let mut sims = Vec::new();
    for model in [ModelKind::Nf, ModelKind::Te] {
        let mut cfg = PsroConfig::new(model, 1);
        cfg.samples = 40;
        cfg.expansion = Expansion::Infosets;
        let run = run_psro(Arc::clone(&t), &cfg, 5).unwrap();
        assert!(run.terminated);
        for w in run.records.windows(2) {
            assert!(w[0].set_sizes.iter().zip(&w[1].set_sizes).all(|(a, b)| a <= b));
        }
        sims.push(run.last().simulations);
    }
    assert!(sims[1] <= sims[0], "{sims:?}");
}

#[test]
fn expansion_names_round_trip() {
    for e in [Expansion::Profiles, Expansion::Infosets] {
        assert_eq!(e.to_string().parse::<Expansion>().unwrap(), e);
    }
    assert!("matrix".parse::<Expansion>().is_err());
    assert_eq!(PsroConfig::new(ModelKind::Te, 1).expansion, Expansion::Infosets);
}

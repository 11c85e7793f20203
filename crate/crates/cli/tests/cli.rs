use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn tegta(args: &[&str]) -> Output {
    let out = Command::new(env!("CARGO_BIN_EXE_tegta")).args(args).output().unwrap();
    assert!(
        out.status.success(),
        "tegta {args:?} failed:\n{}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn gen_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    tegta(&["gen", "--game", "game2", "--seed", "4", "--out", s(&a)]);
    tegta(&["gen", "--game", "game2", "--seed", "4", "--out", s(&b)]);
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    let c = dir.path().join("c.json");
    tegta(&["gen", "--game", "game2", "--seed", "5", "--out", s(&c)]);
    assert_ne!(fs::read(&a).unwrap(), fs::read(&c).unwrap());
}

#[test]
fn worked_example_through_trace_log() {
    let dir = tempfile::tempdir().unwrap();
    let game = dir.path().join("g1.json");
    tegta(&["gen", "--game", "game1", "--out", s(&game)]);
    let strategies = dir.path().join("strategies.json");
    fs::write(&strategies, "[[[0]], [[0, 0], [1, 1]]]").unwrap();
    let mut log = String::from("# profile\tlabels\tpayoffs\n");
    for (i, u) in [99, 95, 100, 96, 95, 100, 92, 95, 93, 94].iter().enumerate() {
        let e = if i < 6 { "A" } else { "B" };
        log.push_str(&format!("0:0\t{e}\t{u},0\n"));
    }
    for i in 0..10 {
        let e = if i < 5 { "A" } else { "B" };
        log.push_str(&format!("0:1\t{e}\t90,0\n"));
    }
    let traces = dir.path().join("traces.tsv");
    fs::write(&traces, log).unwrap();

    let run = |model: &str| {
        let out = tegta(&[
            "estimate",
            "--game",
            s(&game),
            "--strategies",
            s(&strategies),
            "--traces",
            s(&traces),
            "--model",
            model,
        ]);
        String::from_utf8(out.stdout).unwrap()
    };
    let nf = run("nf");
    let te = run("te");
    assert!(nf.lines().any(|l| l == "0:0\t10\t95.900000,0.000000"), "{nf}");
    assert!(te.lines().any(|l| l == "0:0\t10\t95.700000,0.000000"), "{te}");
    assert!(te.lines().any(|l| l == "0:1\t10\t90.000000,0.000000"), "{te}");
}

#[test]
fn coarsen_writes_game_and_certificate() {
    let dir = tempfile::tempdir().unwrap();
    let game = dir.path().join("g1.json");
    tegta(&["gen", "--game", "game1", "--seed", "2", "--out", s(&game)]);
    let spec = dir.path().join("spec.json");
    fs::write(&spec, r#"{"nodes": []}"#).unwrap();
    let out = dir.path().join("coarse.json");
    let cert = dir.path().join("cert.json");
    tegta(&[
        "coarsen",
        "--game",
        s(&game),
        "--spec",
        s(&spec),
        "--out",
        s(&out),
        "--certificate",
        s(&cert),
    ]);
    let original: serde_json::Value = serde_json::from_slice(&fs::read(&game).unwrap()).unwrap();
    let coarse: serde_json::Value = serde_json::from_slice(&fs::read(&out).unwrap()).unwrap();
    assert_eq!(original["nodes"].as_array().unwrap().len(), coarse["nodes"].as_array().unwrap().len());
    let cert: serde_json::Value = serde_json::from_slice(&fs::read(&cert).unwrap()).unwrap();
    assert!(cert["tuples"].as_array().unwrap().is_empty());
}

#[test]
fn coarsen_rejects_unknown_node() {
    let dir = tempfile::tempdir().unwrap();
    let game = dir.path().join("g1.json");
    tegta(&["gen", "--game", "game1", "--out", s(&game)]);
    let spec = dir.path().join("spec.json");
    fs::write(&spec, r#"{"nodes": [{"node": 999999, "remove": ["A"]}]}"#).unwrap();
    let out = dir.path().join("coarse.json");
    let status = Command::new(env!("CARGO_BIN_EXE_tegta"))
        .args(["coarsen", "--game", s(&game), "--spec", s(&spec), "--out", s(&out)])
        .args(["--certificate", s(&dir.path().join("c.json"))])
        .output()
        .unwrap();
    assert!(!status.status.success());
    assert!(!out.exists());
}

#[test]
fn run_bounds_and_plot() {
    let dir = tempfile::tempdir().unwrap();
    let run = dir.path().join("run");
    let args = [
        "run", "--game", "game1", "--reps", "2", "--max-iters", "3", "--samples", "50", "--seed", "9",
    ];
    tegta(&[&args[..], &["--out", s(&run)]].concat());
    for f in ["metrics.csv", "summary.csv", "bounds.json", "manifest.json", "timing.json"] {
        assert!(run.join(f).exists(), "{f} missing");
    }

    // same seed, same bytes
    let again = dir.path().join("again");
    tegta(&[&args[..], &["--out", s(&again)]].concat());
    for f in ["metrics.csv", "summary.csv", "bounds.json"] {
        assert_eq!(fs::read(run.join(f)).unwrap(), fs::read(again.join(f)).unwrap(), "{f}");
    }

    let report = String::from_utf8(tegta(&["bounds", "--run", s(&run)]).stdout).unwrap();
    assert!(report.contains("c histogram"));
    assert_eq!(report.lines().filter(|l| l.starts_with("nf\t") || l.starts_with("te\t")).count(), 4);

    let plots = dir.path().join("plots");
    tegta(&["plot", "--summary", s(&run.join("summary.csv")), "--out", s(&plots)]);
    let svg = fs::read_to_string(plots.join("regret.svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.contains(">nf") && svg.contains(">te"));
}

mod common;

use std::path::Path;

use okayplan::cli::RunManifest;

fn read(p: &Path) -> Vec<u8> {
    std::fs::read(p).unwrap_or_else(|e| panic!("{}: {e}", p.display()))
}

fn tiny_world(dir: &Path) -> String {
    let path = dir.join("tiny.json");
    std::fs::write(&path, common::TINY_WORLD).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn plan_writes_outputs_and_reruns_identically() {
    let dir = tempfile::tempdir().unwrap();
    let world = tiny_world(dir.path());
    let out = dir.path().join("plan");
    let stdout = common::okayplan(&[
        "plan", "--scenario", &world, "--seed", "3", "--particles", "10", "--iterations", "10", "--out",
        out.to_str().unwrap(),
    ]);
    assert!(stdout.contains("status:"), "{stdout}");
    for f in ["trace.jsonl", "metrics.json", "timing.json", "manifest.json"] {
        assert!(out.join(f).exists(), "missing {f}");
    }
    let manifest = RunManifest::load(&out.join("manifest.json")).unwrap();
    assert_eq!(manifest.command, "plan");
    assert_eq!(manifest.seeds, vec![3]);

    let again = dir.path().join("again");
    common::okayplan(&["rerun", out.join("manifest.json").to_str().unwrap(), "--out", again.to_str().unwrap()]);
    for f in ["trace.jsonl", "metrics.json"] {
        assert_eq!(read(&out.join(f)), read(&again.join(f)), "{f} differs");
    }
}

#[test]
fn render_leaves_the_trace_alone() {
    let dir = tempfile::tempdir().unwrap();
    let world = tiny_world(dir.path());
    let out = dir.path().join("plan");
    common::okayplan(&[
        "plan", "--scenario", &world, "--particles", "8", "--iterations", "8", "--out", out.to_str().unwrap(),
    ]);
    let trace = out.join("trace.jsonl");
    let before = read(&trace);
    let frames = dir.path().join("frames");
    let stdout = common::okayplan(&[
        "render", trace.to_str().unwrap(), "--scenario", &world, "--out", frames.to_str().unwrap(),
    ]);
    assert_eq!(read(&trace), before);
    let ticks = okayplan::environment::read_trace(&trace).unwrap().len();
    assert!(stdout.contains(&format!("wrote {ticks} frames")), "{stdout}");
    let svg = String::from_utf8(read(&frames.join("frame_0000.svg"))).unwrap();
    assert!(svg.contains("id=\"usv\"") && svg.contains("id=\"target\""));
    let summary = String::from_utf8(read(&frames.join("summary.csv"))).unwrap();
    assert_eq!(summary.lines().count(), ticks + 2);
}

#[test]
fn bench_reruns_match_outside_timing() {
    let dir = tempfile::tempdir().unwrap();
    let world = tiny_world(dir.path());
    let out = dir.path().join("bench");
    let stdout = common::okayplan(&[
        "bench", "--scenario", &world, "--seeds", "0..2", "--algos", "okayplan,astar,rrt", "--particles", "8",
        "--iterations", "8", "--out", out.to_str().unwrap(),
    ]);
    assert!(stdout.contains("astar") && stdout.contains("rrt"), "{stdout}");
    let rows = okayplan::baselines::read_comparison(&out.join("comparison.csv")).unwrap();
    assert_eq!(rows.len(), 9);

    let again = dir.path().join("again");
    common::okayplan(&["rerun", out.join("manifest.json").to_str().unwrap(), "--out", again.to_str().unwrap()]);
    let a = String::from_utf8(read(&out.join("comparison.csv"))).unwrap();
    let b = String::from_utf8(read(&again.join("comparison.csv"))).unwrap();
    assert_eq!(common::without_timing(&a), common::without_timing(&b));
}

#[test]
fn ablation_bench_has_five_variants() {
    let dir = tempfile::tempdir().unwrap();
    let world = tiny_world(dir.path());
    let out = dir.path().join("ablate");
    common::okayplan(&[
        "bench", "--scenario", &world, "--seeds", "1", "--ablations", "--particles", "6", "--iterations", "6",
        "--out", out.to_str().unwrap(),
    ]);
    let rows = okayplan::baselines::read_comparison(&out.join("comparison.csv")).unwrap();
    let labels: Vec<&str> = rows.iter().map(|r| r.algorithm.as_str()).collect();
    assert_eq!(
        labels,
        ["okayplan", "okayplan-no-okaop", "okayplan-no-dyn-norm", "okayplan-no-dpi", "okayplan-no-relax"]
    );
}

#[test]
fn evolve_and_lambda_grid_write_loadable_files() {
    let dir = tempfile::tempdir().unwrap();
    let world = tiny_world(dir.path());
    let out = dir.path().join("evolve");
    let small = ["--generations", "2", "--episodes", "1", "--h-particles", "1", "--particles", "4", "--iterations", "4"];
    let mut args = vec!["evolve", "--scenario", &world, "--lambda", "0.5", "--seed", "2", "--out", out.to_str().unwrap()];
    args.extend(small);
    common::okayplan(&args);
    okayplan::hsef::Xi::load(&out.join("params.json")).unwrap();
    let history = String::from_utf8(read(&out.join("history.csv"))).unwrap();
    assert!(history.starts_with("# schema: okayplan-history/1\n"));
    assert_eq!(history.lines().count(), 2 + 2);

    let again = dir.path().join("again");
    common::okayplan(&["rerun", out.join("manifest.json").to_str().unwrap(), "--out", again.to_str().unwrap()]);
    for f in ["params.json", "history.csv"] {
        assert_eq!(read(&out.join(f)), read(&again.join(f)), "{f} differs");
    }

    let grid = dir.path().join("grid");
    let mut args = vec!["lambda-grid", "--scenario", &world, "--lambdas", "0.5,1.0", "--seeds", "0..1", "--out", grid.to_str().unwrap()];
    args.extend(small);
    let stdout = common::okayplan(&args);
    assert_eq!(stdout.lines().count(), 2, "{stdout}");
    assert!(grid.join("curves.csv").exists());
}

#[test]
fn bad_input_exits_nonzero() {
    let run = |args: &[&str]| {
        std::process::Command::new(env!("CARGO_BIN_EXE_okayplan"))
            .args(args)
            .output()
            .unwrap()
    };
    let out = run(&["plan", "--preset", "lagoon"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
    assert!(!run(&["plan", "--gamma", "0.3"]).status.success());
    assert!(!run(&["bench", "--seeds", "9..1"]).status.success());
}

//! Run the swarm planner against grid search and tree-based baselines on a
//! few seeds and print the aggregate table.
//!
//! cargo run --release --example compare_baselines -- [simple|complex] [seeds]

use okayplan::baselines::{print_summary, run_comparison, summarize};
use okayplan::environment::{Preset, ScenarioSpec};
use okayplan::planner::PlannerConfig;

fn main() -> okayplan::Result<()> {
    let mut args = std::env::args().skip(1);
    let preset = match args.next().as_deref() {
        Some("complex") => Preset::Complex,
        _ => Preset::Simple,
    };
    let n: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(5);
    let seeds: Vec<u64> = (0..n).collect();

    let rows = run_comparison(
        &["okayplan", "astar", "dijkstra", "rrt", "rrt_star"],
        &ScenarioSpec::preset(preset),
        &seeds,
        &PlannerConfig::default(),
    )?;
    for r in &rows {
        println!(
            "{:<10} seed {:>2}  arrived {:<5} travel {:>6.0} m  plan {:.4} s",
            r.algorithm, r.seed, r.arrived, r.travel_distance_m, r.mean_plan_time_s
        );
    }
    println!();
    print_summary(&mut std::io::stdout(), &summarize(&rows)).expect("stdout");
    Ok(())
}

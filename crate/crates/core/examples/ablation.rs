//! Switch off one planner component at a time and compare arrival rates.
//!
//! cargo run --release --example ablation -- [seeds]

use okayplan::baselines::{run_entries, summarize};
use okayplan::cli::{ablation_entries, NO_RELAX_JSON};
use okayplan::environment::{Preset, ScenarioSpec};
use okayplan::hsef::Xi;
use okayplan::planner::PlannerConfig;

fn main() -> okayplan::Result<()> {
    let n: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(10);
    let seeds: Vec<u64> = (0..n).collect();

    let base = PlannerConfig::default();
    let no_relax = Xi::from_json(NO_RELAX_JSON)?.apply(&base);

    let rows = run_entries(
        &ablation_entries(&base, &no_relax, 0.3, 20.0),
        &ScenarioSpec::preset(Preset::Complex),
        &seeds,
    )?;
    for s in summarize(&rows) {
        println!(
            "{:<22} arrival {:>5.1}%  fitness {:.6}",
            s.algorithm,
            s.arrival_rate * 100.0,
            s.fitness_mean
        );
    }
    Ok(())
}

//! Tune the planner hyperparameters with a small upper-level swarm and print
//! the per-generation population fitness.
//!
//! cargo run --release --example evolve_params -- [generations] [lambda]

use okayplan::hsef::{evolve, EvolutionConfig};
use okayplan::planner::PlannerConfig;

fn main() -> okayplan::Result<()> {
    let mut args = std::env::args().skip(1);
    let generations: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(5);
    let lambda: f64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(0.4);

    let mut cfg = EvolutionConfig {
        h_groups: 4,
        h_particles: 2,
        lambda,
        generations,
        episodes: 2,
        max_ticks: Some(150),
        planner: PlannerConfig {
            particles: 10,
            max_iterations: 10,
            ..PlannerConfig::default()
        },
        ..EvolutionConfig::default()
    };
    cfg.h_search_params.truncate(cfg.h_groups);

    let result = evolve(&cfg, 0)?;
    for g in &result.history {
        println!(
            "generation {:>3}  mean {:.6}  best {:.6}",
            g.generation, g.mean_fitness, g.best_fitness
        );
    }
    println!("\n{}", serde_json::to_string_pretty(&result.best_xi).expect("serializable"));
    Ok(())
}

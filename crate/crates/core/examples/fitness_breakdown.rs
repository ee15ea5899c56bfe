//! Score a handful of candidate routes in a preset world and show how the
//! objective splits into length, collision and forecast terms.
//!
//! cargo run --release --example fitness_breakdown -- [simple|complex] [seed]

use okayplan::environment::make_scenario;
use okayplan::fitness::{score_path, FitnessContext, GppParams, Normalization};
use okayplan::geometry::{Path, Point};
use okayplan::planner::{plan_once, PlannerConfig};

fn main() -> okayplan::Result<()> {
    let mut args = std::env::args().skip(1);
    let preset = args.next().unwrap_or_else(|| "complex".into());
    let seed: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(0);

    let scenario = make_scenario(&preset, seed)?;
    let obs = scenario.initial_state().observe(&scenario);
    let gpp = GppParams::PUBLISHED;
    let ctx = FitnessContext::from_observation(&obs, gpp.iota, Normalization::Dynamic, None);

    let cfg = PlannerConfig::default();
    let waypoints = cfg.dims / 2;
    let mid = Point::new((obs.start.x + obs.target.x) / 2.0, (obs.start.y + obs.target.y) / 2.0);
    let detour = |dx: f64| Path::new(vec![Point::new(mid.x + dx, mid.y)]).padded(waypoints, obs.start, obs.target);
    let planned = plan_once(&obs, None, &cfg, None, seed)?;

    println!("eta = {:.2} (start-target distance)", ctx.eta);
    println!("{:<14} {:>9} {:>4} {:>4} {:>12}", "route", "length", "Q", "P", "F");
    for (name, path) in [
        ("straight", Path::straight(obs.start, obs.target, waypoints)),
        ("left detour", detour(-120.0)),
        ("right detour", detour(120.0)),
        ("planned", planned.best_path),
    ] {
        let s = score_path(&path, &ctx, &gpp);
        println!(
            "{name:<14} {:>9.1} {:>4} {:>4} {:>12.1}",
            s.length, s.collisions, s.kinematic_hits, s.fitness
        );
    }
    Ok(())
}

//! Drive one navigation episode with the swarm planner and print a summary.
//!
//! cargo run --release --example plan_episode -- [simple|complex] [seed]

use okayplan::environment::make_scenario;
use okayplan::planner::{run_episode, OkayPlanner, PlannerConfig};

fn main() -> okayplan::Result<()> {
    let mut args = std::env::args().skip(1);
    let preset = args.next().unwrap_or_else(|| "simple".into());
    let seed: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(0);

    let scenario = make_scenario(&preset, seed)?;
    let mut planner = OkayPlanner::new(PlannerConfig::default())?;
    let (m, trace) = run_episode(&scenario, &mut planner, 0, true)?;

    for rec in trace.iter().step_by(10) {
        println!(
            "tick {:>3}  usv ({:6.1}, {:6.1})  F = {:.2}",
            rec.tick,
            rec.usv.x,
            rec.usv.y,
            rec.fitness.unwrap_or(f64::NAN)
        );
    }
    println!(
        "{preset} seed {seed}: {:?} after {} ticks, {:.0} m, score {:.6}, plan {:.1} ms ± {:.1}",
        m.status,
        m.ticks,
        m.travel_distance,
        m.fitness,
        m.mean_plan_time() * 1e3,
        m.std_plan_time() * 1e3
    );
    Ok(())
}

//! Plan one episode and write an SVG frame per tick.
//!
//! cargo run --release --example render_episode -- [simple|complex] [seed] [out_dir]

use okayplan::environment::make_scenario;
use okayplan::planner::{run_episode, OkayPlanner, PlannerConfig};
use okayplan::render::{render_trace, Viewport};

fn main() -> okayplan::Result<()> {
    let mut args = std::env::args().skip(1);
    let preset = args.next().unwrap_or_else(|| "complex".into());
    let seed: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(3);
    let out = args.next().unwrap_or_else(|| "frames".into());

    let scenario = make_scenario(&preset, seed)?;
    let mut planner = OkayPlanner::new(PlannerConfig::default())?;
    let (m, trace) = run_episode(&scenario, &mut planner, seed, true)?;

    let frames = render_trace(&trace, &Viewport::new(scenario.width, scenario.height), out.as_ref())?;
    println!("{:?} after {} ticks; {} frames in {out}/", m.status, m.ticks, frames.len());
    Ok(())
}

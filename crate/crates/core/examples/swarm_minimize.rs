//! Use the multi-group swarm on its own to minimize the Rastrigin function.
//!
//! cargo run --release --example swarm_minimize -- [dims] [iterations]

use okayplan::swarm::{Swarm, PUBLISHED_GROUPS};

fn rastrigin(x: &[f64]) -> f64 {
    let tau = std::f64::consts::TAU;
    10.0 * x.len() as f64 + x.iter().map(|v| v * v - 10.0 * (tau * v).cos()).sum::<f64>()
}

fn main() -> okayplan::Result<()> {
    let mut args = std::env::args().skip(1);
    let dims: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(10);
    let iterations: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(300);

    let groups = PUBLISHED_GROUPS.len();
    let mut swarm = Swarm::new(groups, 40, vec![-5.12; dims], vec![5.12; dims])?;
    let mut seed_positions = Vec::with_capacity(swarm.population() * dims);
    for i in 0..swarm.population() * dims {
        seed_positions.push(-5.12 + 10.24 * ((i as f64 * 0.618_033_988_75).fract()));
    }
    swarm.reset(seed_positions)?;

    for it in 0..iterations {
        let fitness: Vec<f64> = swarm.x.chunks(dims).map(rastrigin).collect();
        swarm.update_bests_standard(&fitness)?;
        if it % 50 == 0 {
            println!("iteration {it:>4}  best {:.6}", swarm.tbest_f);
        }
        swarm.update(&PUBLISHED_GROUPS, iterations, 7)?;
    }
    let fitness: Vec<f64> = swarm.x.chunks(dims).map(rastrigin).collect();
    swarm.update_bests_standard(&fitness)?;
    println!("final best {:.6} at {:?}", swarm.tbest_f, swarm.tbest_x);
    Ok(())
}

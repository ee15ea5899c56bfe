//! Oracles shared by the integration tests. Nothing here calls into the
//! library's intersection code.
#![allow(dead_code)]

use okayplan::geometry::{Point, Segment};
use rand::Rng;

/// Exact turn direction for integer-valued coordinates.
fn turn_exact(a: (i64, i64), b: (i64, i64), c: (i64, i64)) -> i128 {
    let v = (b.0 - a.0) as i128 * (c.1 - a.1) as i128 - (b.1 - a.1) as i128 * (c.0 - a.0) as i128;
    v.signum()
}

fn on_box(a: (i64, i64), b: (i64, i64), c: (i64, i64)) -> bool {
    c.0 >= a.0.min(b.0) && c.0 <= a.0.max(b.0) && c.1 >= a.1.min(b.1) && c.1 <= a.1.max(b.1)
}

/// Closed-segment intersection on integer coordinates, exact.
pub fn crosses_exact(s: &Segment, t: &Segment) -> bool {
    let q = |p: Point| (p.x as i64, p.y as i64);
    let (a, b, c, d) = (q(s.a), q(s.b), q(t.a), q(t.b));
    if a == b || c == d {
        return false;
    }
    let d1 = turn_exact(a, b, c);
    let d2 = turn_exact(a, b, d);
    let d3 = turn_exact(c, d, a);
    let d4 = turn_exact(c, d, b);
    if d1 * d2 < 0 && d3 * d4 < 0 {
        return true;
    }
    (d1 == 0 && on_box(a, b, c))
        || (d2 == 0 && on_box(a, b, d))
        || (d3 == 0 && on_box(c, d, a))
        || (d4 == 0 && on_box(c, d, b))
}

/// Parametric intersection for general-position float segments: solve
/// a + t(b - a) = c + u(d - c) and accept t, u in [0, 1].
pub fn crosses_parametric(s: &Segment, t: &Segment) -> bool {
    let r = (s.b.x - s.a.x, s.b.y - s.a.y);
    let q = (t.b.x - t.a.x, t.b.y - t.a.y);
    let den = r.0 * q.1 - r.1 * q.0;
    if den == 0.0 {
        return false;
    }
    let w = (t.a.x - s.a.x, t.a.y - s.a.y);
    let tt = (w.0 * q.1 - w.1 * q.0) / den;
    let uu = (w.0 * r.1 - w.1 * r.0) / den;
    (0.0..=1.0).contains(&tt) && (0.0..=1.0).contains(&uu)
}

/// All-pairs count with no pruning.
pub fn brute_hits(path: &[Segment], obstacles: &[Segment], exact: bool) -> usize {
    let mut n = 0;
    for p in path {
        for o in obstacles {
            let hit = if exact { crosses_exact(p, o) } else { crosses_parametric(p, o) };
            if hit {
                n += 1;
            }
        }
    }
    n
}

/// Random segment lists of 1..=100 entries per side. Integer instances
/// sit on a coarse lattice so touching and collinear cases are common.
pub fn random_instance(r: &mut impl Rng, integer: bool) -> (Vec<Segment>, Vec<Segment>) {
    fn point(r: &mut impl Rng, integer: bool) -> Point {
        if integer {
            Point::new(r.gen_range(0..25) as f64, r.gen_range(0..25) as f64)
        } else {
            Point::new(r.gen_range(0.0..366.0), r.gen_range(0.0..366.0))
        }
    }
    let np = r.gen_range(1..=100);
    let no = r.gen_range(1..=100);
    let path = (0..np).map(|_| Segment::new(point(r, integer), point(r, integer))).collect();
    let obs = (0..no).map(|_| Segment::new(point(r, integer), point(r, integer))).collect();
    (path, obs)
}

use okayplan::swarm::{GroupParams, Swarm};

/// Random valid group parameters.
pub fn random_params(r: &mut impl Rng, groups: usize) -> Vec<GroupParams> {
    (0..groups)
        .map(|_| GroupParams {
            c1: r.gen_range(0.5..2.5),
            c2: r.gen_range(0.5..2.5),
            c3: r.gen_range(0.5..2.5),
            omega_init: r.gen_range(0.1..0.9),
            omega_end: r.gen_range(0.1..0.9),
            v_limit: r.gen_range(0.05..1.0),
        })
        .collect()
}

/// Fitness values with ties, both signs and the odd infinity.
pub fn random_fitness(r: &mut impl Rng, n: usize) -> Vec<f64> {
    (0..n)
        .map(|_| match r.gen_range(0..10) {
            0 => f64::INFINITY,
            1 => 0.0,
            2 => -1.0,
            _ => r.gen_range(-10.0..10.0),
        })
        .collect()
}

pub fn bits(v: &[f64]) -> Vec<u64> {
    v.iter().map(|x| x.to_bits()).collect()
}

/// Bitwise equality of every buffer in two swarms.
pub fn same_swarm(a: &Swarm, b: &Swarm) -> bool {
    bits(&a.x) == bits(&b.x)
        && bits(&a.v) == bits(&b.v)
        && bits(&a.pbest_x) == bits(&b.pbest_x)
        && bits(&a.pbest_f) == bits(&b.pbest_f)
        && bits(&a.gbest_x) == bits(&b.gbest_x)
        && bits(&a.gbest_f) == bits(&b.gbest_f)
        && bits(&a.tbest_x) == bits(&b.tbest_x)
        && a.tbest_f.to_bits() == b.tbest_f.to_bits()
        && a.k == b.k
}

/// A small random swarm with random bounds and positions.
pub fn random_swarm(r: &mut impl Rng) -> (Swarm, Vec<GroupParams>) {
    let groups = r.gen_range(1..5);
    let particles = r.gen_range(1..8);
    let dims = 2 * r.gen_range(1..5);
    let lower: Vec<f64> = (0..dims).map(|_| r.gen_range(-50.0..0.0)).collect();
    let upper: Vec<f64> = lower.iter().map(|l| l + r.gen_range(1.0..100.0)).collect();
    let mut s = Swarm::new(groups, particles, lower.clone(), upper.clone()).unwrap();
    let init = (0..s.population() * dims)
        .map(|i| r.gen_range(lower[i % dims]..=upper[i % dims]))
        .collect();
    s.reset(init).unwrap();
    (s, random_params(r, groups))
}

/// Runs `iterations` rounds of (random fitness, best update, move) and
/// checks best monotonicity, the standard-rule hierarchy and bounds after
/// every step. `lambda = None` uses the standard rule.
pub fn swarm_run(seed: u64, iterations: usize, lambda: Option<f64>) -> Result<(), String> {
    use rand::SeedableRng;
    let mut r = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let (mut s, params) = random_swarm(&mut r);
    let g = s.groups();
    let n = s.particles();
    for it in 0..iterations {
        let f = random_fitness(&mut r, s.population());
        let before = (s.pbest_f.clone(), s.gbest_f.clone(), s.tbest_f);
        match lambda {
            None => s.update_bests_standard(&f).unwrap(),
            Some(l) => s.update_bests_relaxed(&f, l, &mut r).unwrap(),
        }
        if s.pbest_f.iter().zip(&before.0).any(|(a, b)| a > b)
            || s.gbest_f.iter().zip(&before.1).any(|(a, b)| a > b)
            || s.tbest_f > before.2
        {
            return Err(format!("seed {seed} iteration {it}: a best value increased"));
        }
        if lambda.is_none() {
            let min_p = s.pbest_f.iter().copied().fold(f64::INFINITY, f64::min);
            let min_g = s.gbest_f.iter().copied().fold(f64::INFINITY, f64::min);
            if s.tbest_f != min_g || s.tbest_f != min_p {
                return Err(format!("seed {seed} iteration {it}: tbest is not the minimum"));
            }
            for gi in 0..g {
                for ni in 0..n {
                    if s.pbest_f[gi * n + ni] < s.gbest_f[gi] {
                        return Err(format!("seed {seed} iteration {it}: pbest below its gbest"));
                    }
                }
            }
        }
        s.update(&params, iterations, seed).unwrap();
        if !s.within_bounds(&params) {
            return Err(format!("seed {seed} iteration {it}: state left its bounds"));
        }
    }
    Ok(())
}

/// Relaxed updating with lambda = 1 against the standard rule on one
/// random state, bit for bit.
pub fn relaxed_one_matches_standard(seed: u64) -> bool {
    use rand::SeedableRng;
    let mut r = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let (mut s, params) = random_swarm(&mut r);
    // Give the state some history first.
    for _ in 0..r.gen_range(0..4) {
        let f = random_fitness(&mut r, s.population());
        s.update_bests_standard(&f).unwrap();
        s.update(&params, 10, seed).unwrap();
    }
    let f = random_fitness(&mut r, s.population());
    let mut a = s.clone();
    let mut b = s;
    a.update_bests_standard(&f).unwrap();
    b.update_bests_relaxed(&f, 1.0, &mut r).unwrap();
    same_swarm(&a, &b)
}

use okayplan::environment::{Observation, Preset, ScenarioSpec};
use okayplan::geometry::Path;
use okayplan::planner::{dpi_initialize, PlannerConfig};

/// Observation of a preset world with the vehicle and target moved to
/// random spots.
pub fn random_observation(r: &mut impl Rng, complex: bool) -> Observation {
    let preset = if complex { Preset::Complex } else { Preset::Simple };
    let scenario = ScenarioSpec::preset(preset).realize(r.gen());
    let mut state = scenario.initial_state();
    state.usv = Point::new(r.gen_range(0.0..366.0), r.gen_range(0.0..366.0));
    state.target = Point::new(r.gen_range(0.0..366.0), r.gen_range(0.0..366.0));
    state.observe(&scenario)
}

fn random_path(r: &mut impl Rng, w: usize) -> Path {
    Path::new((0..w).map(|_| Point::new(r.gen_range(0.0..366.0), r.gen_range(0.0..366.0))).collect())
}

/// Disk containment, inheritance and first-tick initialization for one
/// random draw.
pub fn dpi_check(seed: u64) -> Result<(), String> {
    use rand::SeedableRng;
    let mut r = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let groups = r.gen_range(1..9);
    let cfg = PlannerConfig {
        groups,
        particles: r.gen_range(2..40),
        dims: 2 * r.gen_range(1..10),
        group_params: random_params(&mut r, groups),
        ..PlannerConfig::default()
    };
    let w = cfg.waypoints();
    let d = cfg.dims;
    let start = Point::new(r.gen_range(0.0..366.0), r.gen_range(0.0..366.0));
    let target = Point::new(r.gen_range(0.0..366.0), r.gen_range(0.0..366.0));
    let center = Point::new((start.x + target.x) / 2.0, (start.y + target.y) / 2.0);
    let radius = ((start.x - target.x).powi(2) + (start.y - target.y).powi(2)).sqrt() / 2.0;
    let prev = random_path(&mut r, w);

    let x = dpi_initialize(Some(&prev), start, target, &cfg, seed).map_err(|e| e.to_string())?;
    if x.len() != cfg.groups * cfg.particles * d {
        return Err(format!("seed {seed}: wrong population size"));
    }
    let want = prev.to_decision();
    let mut inherited = 0;
    for (i, particle) in x.chunks(d).enumerate() {
        if bits(particle) == bits(&want) {
            inherited += 1;
            if i % cfg.particles != 0 {
                return Err(format!("seed {seed}: particle {i} copies the previous path"));
            }
            continue;
        }
        for k in 0..w {
            let dist = ((particle[k] - center.x).powi(2) + (particle[w + k] - center.y).powi(2)).sqrt();
            if dist > radius + 1e-9 * radius.max(1.0) {
                return Err(format!("seed {seed}: particle {i} waypoint {k} is {dist} from center, radius {radius}"));
            }
        }
    }
    if inherited != cfg.groups {
        return Err(format!("seed {seed}: {inherited} inherited particles, expected {}", cfg.groups));
    }

    let first = dpi_initialize(None, start, target, &cfg, seed).map_err(|e| e.to_string())?;
    let line: Vec<f64> = {
        let n = (w + 1) as f64;
        let pts: Vec<Point> = (1..=w)
            .map(|i| {
                let t = i as f64 / n;
                Point::new(start.x + (target.x - start.x) * t, start.y + (target.y - start.y) * t)
            })
            .collect();
        Path::new(pts).to_decision()
    };
    for g in 0..cfg.groups {
        let p = &first[g * cfg.particles * d..g * cfg.particles * d + d];
        if bits(p) != bits(&line) {
            return Err(format!("seed {seed}: group {g} first-tick path is not the straight line"));
        }
    }
    Ok(())
}

use okayplan::baselines::GridMap;

/// Shortest 8-connected cost by repeated relaxation sweeps until nothing
/// changes. Diagonal moves need both side cells free; start and goal count
/// as free. `None` when the goal is unreachable.
pub fn relaxation_cost(grid: &GridMap, start: (usize, usize), goal: (usize, usize)) -> Option<f64> {
    let (w, h) = (grid.cols, grid.rows);
    let free = |i: usize, j: usize| (i, j) == start || (i, j) == goal || !grid.occupied(i, j);
    let r = grid.resolution;
    let mut dist = vec![vec![f64::INFINITY; w]; h];
    dist[start.1][start.0] = 0.0;
    loop {
        let mut changed = false;
        for j in 0..h {
            for i in 0..w {
                if !free(i, j) || dist[j][i].is_infinite() {
                    continue;
                }
                for (di, dj) in [(-1i64, -1i64), (0, -1), (1, -1), (-1, 0), (1, 0), (-1, 1), (0, 1), (1, 1)] {
                    let (ni, nj) = (i as i64 + di, j as i64 + dj);
                    if ni < 0 || nj < 0 || ni >= w as i64 || nj >= h as i64 {
                        continue;
                    }
                    let (ni, nj) = (ni as usize, nj as usize);
                    if !free(ni, nj) {
                        continue;
                    }
                    let step = if di != 0 && dj != 0 {
                        if !free(i, nj) || !free(ni, j) {
                            continue;
                        }
                        r * 2f64.sqrt()
                    } else {
                        r
                    };
                    if dist[j][i] + step < dist[nj][ni] - 1e-12 {
                        dist[nj][ni] = dist[j][i] + step;
                        changed = true;
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }
    let d = dist[goal.1][goal.0];
    d.is_finite().then_some(d)
}

pub fn random_grid(r: &mut impl Rng, cols: usize, rows: usize) -> GridMap {
    let density = r.gen_range(0.05..0.4);
    let cells = (0..cols * rows).map(|_| r.gen_bool(density)).collect();
    GridMap::from_cells(cols, rows, r.gen_range(0.5..3.0), cells).unwrap()
}

/// Small world for end-to-end command runs.
pub const TINY_WORLD: &str = r#"{
  "name": "tiny",
  "width": 120.0,
  "height": 120.0,
  "start": [60.0, 5.0],
  "target": [60.0, 100.0],
  "usv_velocity": 6.0,
  "target_velocity": 1.0,
  "max_ticks": 60,
  "arrival_radius": 6.0,
  "obstacles": [
    { "vertices": [[40, 40], [80, 40], [80, 55], [40, 55]], "speed_range": [0.0, 0.0], "motion_mode": "static" },
    { "vertices": [[20, 70], [35, 70], [35, 85], [20, 85]], "speed_range": [0.0, 3.0], "motion_mode": "random" }
  ]
}"#;

/// Runs the command-line binary, returning stdout. Panics with stderr on a
/// nonzero exit.
pub fn okayplan(args: &[&str]) -> String {
    let out = std::process::Command::new(env!("CARGO_BIN_EXE_okayplan"))
        .args(args)
        .env("OKAYPLAN_THREADS", "1")
        .output()
        .expect("binary runs");
    assert!(
        out.status.success(),
        "okayplan {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

/// Comparison CSV text with the two timing columns removed.
pub fn without_timing(csv_text: &str) -> String {
    csv_text
        .lines()
        .map(|l| {
            if l.starts_with('#') {
                l.to_string()
            } else {
                l.split(',').take(5).collect::<Vec<_>>().join(",")
            }
        })
        .collect::<Vec<_>>()
        .join("\n")
}

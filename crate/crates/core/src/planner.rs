//! Per-tick planning loop and the episode driver.
//!
//! Every tick the swarm is re-initialized around the previous plan, run for
//! at most `max_iterations` evaluate/update rounds, and its population best
//! is handed to the vehicle. The loop stops early once the best path is
//! both collision-free and clear of kinematic segments, provided
//! `min_iterations` rounds have run.

use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::environment::{Observation, Scenario, Status, TraceRecord};
use crate::error::{Error, Result};
use crate::fitness::{score_decision, FitnessContext, GppParams, Normalization, PathScore};
use crate::geometry::{Path, Point, Segment};
use crate::rng;
use crate::swarm::{GroupParams, Swarm, PUBLISHED_GROUPS};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum InitMode {
    /// One particle per group inherits the previous plan; the rest are
    /// scattered in the disk spanned by start and target.
    Dpi,
    /// A fraction `gamma` of each group is scattered within `rho` meters of
    /// the previous plan; the rest cover the whole world.
    Pi { gamma: f64, rho: f64 },
    /// Everything uniform over the world.
    Random,
}

impl InitMode {
    /// Defaults for the legacy scheme. Not published values.
    pub const PI_DEFAULT: InitMode = InitMode::Pi {
        gamma: 0.3,
        rho: 20.0,
    };
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PlannerConfig {
    pub groups: usize,
    pub particles: usize,
    /// Decision vector length; the path has `dims / 2` waypoints.
    pub dims: usize,
    pub max_iterations: usize,
    /// Rounds that always run before the early exit may trigger.
    pub min_iterations: usize,
    pub gpp: GppParams,
    pub group_params: Vec<GroupParams>,
    pub init: InitMode,
    pub normalization: Normalization,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        PlannerConfig {
            groups: 8,
            particles: 170,
            dims: 16,
            max_iterations: 50,
            min_iterations: 10,
            gpp: GppParams::PUBLISHED,
            group_params: PUBLISHED_GROUPS.to_vec(),
            init: InitMode::Dpi,
            normalization: Normalization::Dynamic,
        }
    }
}

impl PlannerConfig {
    pub fn waypoints(&self) -> usize {
        self.dims / 2
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.dims < 2 || self.dims % 2 != 0 {
            return bad(format!("dims must be even and >= 2, got {}", self.dims));
        }
        if self.groups == 0 || self.particles == 0 || self.max_iterations == 0 {
            return bad("groups, particles and max_iterations must be positive".into());
        }
        if self.group_params.len() != self.groups {
            return bad(format!(
                "{} group parameter sets for {} groups",
                self.group_params.len(),
                self.groups
            ));
        }
        for g in &self.group_params {
            g.validate()?;
        }
        self.gpp.validate()?;
        if let InitMode::Pi { gamma, rho } = self.init {
            check_pi(gamma, rho)?;
        }
        Ok(())
    }

    /// Search bounds: the whole world for every waypoint.
    pub fn bounds(&self, width: f64, height: f64) -> (Vec<f64>, Vec<f64>) {
        let w = self.waypoints();
        let lower = vec![0.0; self.dims];
        let mut upper = vec![width; w];
        upper.extend(std::iter::repeat(height).take(w));
        (lower, upper)
    }
}

fn check_pi(gamma: f64, rho: f64) -> Result<()> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::InvalidConfig(format!("gamma must lie in (0, 1), got {gamma}")));
    }
    if !(rho >= 0.0) {
        return Err(Error::InvalidConfig(format!("rho must be nonnegative, got {rho}")));
    }
    Ok(())
}

fn write_path(dst: &mut [f64], path: &Path) {
    let w = dst.len() / 2;
    for (i, p) in path.waypoints.iter().take(w).enumerate() {
        dst[i] = p.x;
        dst[w + i] = p.y;
    }
}

fn uniform_in_disk(r: &mut impl Rng, center: Point, radius: f64) -> Point {
    let rad = radius * r.gen::<f64>().sqrt();
    let theta = r.gen_range(0.0..std::f64::consts::TAU);
    Point::new(center.x + rad * theta.cos(), center.y + rad * theta.sin())
}

fn check_prev(prev: Option<&Path>, cfg: &PlannerConfig) -> Result<()> {
    match prev {
        Some(p) if p.len() != cfg.waypoints() => Err(Error::ShapeMismatch(format!(
            "previous path has {} waypoints, expected {}",
            p.len(),
            cfg.waypoints()
        ))),
        _ => Ok(()),
    }
}

/// Initial positions for the disk-based scheme, `G × N × D` flat.
///
/// Particle 0 of every group is `prev_best` (or the straight start→target
/// line when there is none); every other waypoint is uniform in the disk
/// whose diameter is the start–target segment.
pub fn dpi_initialize(
    prev_best: Option<&Path>,
    start: Point,
    target: Point,
    cfg: &PlannerConfig,
    seed: u64,
) -> Result<Vec<f64>> {
    check_prev(prev_best, cfg)?;
    let d = cfg.dims;
    let w = cfg.waypoints();
    let center = start.lerp(target, 0.5);
    let radius = start.dist(target) / 2.0;
    let inherited = prev_best
        .cloned()
        .unwrap_or_else(|| Path::straight(start, target, w));

    let mut x = vec![0.0; cfg.groups * cfg.particles * d];
    for (g, group) in x.chunks_mut(cfg.particles * d).enumerate() {
        let mut r = rng::stream(&[rng::TAG_PLAN, seed, g as u64]);
        write_path(&mut group[..d], &inherited);
        for particle in group.chunks_mut(d).skip(1) {
            for i in 0..w {
                let p = uniform_in_disk(&mut r, center, radius);
                particle[i] = p.x;
                particle[w + i] = p.y;
            }
        }
    }
    Ok(x)
}

/// Initial positions for the legacy band scheme. `floor(gamma * N)`
/// particles per group lie within `rho` of `prev_best` per coordinate; the
/// rest, or all of them when there is no previous plan, are uniform over
/// the world.
pub fn pi_initialize(
    prev_best: Option<&Path>,
    gamma: f64,
    rho: f64,
    cfg: &PlannerConfig,
    width: f64,
    height: f64,
    seed: u64,
) -> Result<Vec<f64>> {
    check_pi(gamma, rho)?;
    check_prev(prev_best, cfg)?;
    let d = cfg.dims;
    let w = cfg.waypoints();
    let prioritized = if prev_best.is_some() {
        (gamma * cfg.particles as f64).floor() as usize
    } else {
        0
    };
    let mut x = vec![0.0; cfg.groups * cfg.particles * d];
    for (g, group) in x.chunks_mut(cfg.particles * d).enumerate() {
        let mut r = rng::stream(&[rng::TAG_PLAN, seed, g as u64]);
        for (n, particle) in group.chunks_mut(d).enumerate() {
            for i in 0..w {
                let (px, py) = match prev_best {
                    Some(prev) if n < prioritized => {
                        let c = prev.waypoints[i];
                        let jx = if rho > 0.0 { r.gen_range(-rho..=rho) } else { 0.0 };
                        let jy = if rho > 0.0 { r.gen_range(-rho..=rho) } else { 0.0 };
                        ((c.x + jx).clamp(0.0, width), (c.y + jy).clamp(0.0, height))
                    }
                    _ => (r.gen_range(0.0..=width), r.gen_range(0.0..=height)),
                };
                particle[i] = px;
                particle[w + i] = py;
            }
        }
    }
    Ok(x)
}

fn random_initialize(cfg: &PlannerConfig, width: f64, height: f64, seed: u64) -> Vec<f64> {
    let d = cfg.dims;
    let w = cfg.waypoints();
    let mut x = vec![0.0; cfg.groups * cfg.particles * d];
    for (g, group) in x.chunks_mut(cfg.particles * d).enumerate() {
        let mut r = rng::stream(&[rng::TAG_PLAN, seed, g as u64]);
        for particle in group.chunks_mut(d) {
            for i in 0..w {
                particle[i] = r.gen_range(0.0..=width);
                particle[w + i] = r.gen_range(0.0..=height);
            }
        }
    }
    x
}

#[derive(Clone, Debug, PartialEq)]
pub struct PlanResult {
    pub best_path: Path,
    pub best_fitness: f64,
    pub score: PathScore,
    pub iterations_used: usize,
    /// Seconds spent inside the call.
    pub wall_time: f64,
    /// Population-best objective after each round.
    pub convergence: Vec<f64>,
    /// Whether the loop stopped before `max_iterations`.
    pub early_exit: bool,
}

/// Plans one tick.
///
/// `initial_eta` is the start–target distance of the first planning tick of
/// the episode; it only matters for [`Normalization::FixedInitial`].
pub fn plan_once(
    obs: &Observation,
    prev_best: Option<&Path>,
    cfg: &PlannerConfig,
    initial_eta: Option<f64>,
    seed: u64,
) -> Result<PlanResult> {
    let started = Instant::now();
    cfg.validate()?;
    let ctx = FitnessContext::from_observation(obs, cfg.gpp.iota, cfg.normalization, initial_eta);

    let init = match cfg.init {
        InitMode::Dpi => dpi_initialize(prev_best, obs.start, obs.target, cfg, seed)?,
        InitMode::Pi { gamma, rho } => {
            pi_initialize(prev_best, gamma, rho, cfg, obs.width, obs.height, seed)?
        }
        InitMode::Random => random_initialize(cfg, obs.width, obs.height, seed),
    };
    let (lower, upper) = cfg.bounds(obs.width, obs.height);
    let mut swarm = Swarm::new(cfg.groups, cfg.particles, lower, upper)?;
    swarm.reset(init)?;

    let update_seed = rng::derive(&[rng::TAG_SWARM, seed]);
    let mut fitness = vec![0.0; swarm.population()];
    let mut convergence = Vec::with_capacity(cfg.max_iterations);
    let mut best_score = None;
    let mut early_exit = false;

    for it in 0..cfg.max_iterations {
        swarm
            .x
            .par_chunks(cfg.dims)
            .zip(fitness.par_iter_mut())
            .for_each(|(z, f)| *f = score_decision(z, &ctx, &cfg.gpp).fitness);
        swarm.update_bests_standard(&fitness)?;
        convergence.push(swarm.tbest_f);

        let score = score_decision(&swarm.tbest_x, &ctx, &cfg.gpp);
        best_score = Some(score);
        if it + 1 >= cfg.min_iterations && score.is_clear() && it + 1 < cfg.max_iterations {
            early_exit = true;
            break;
        }
        if it + 1 < cfg.max_iterations {
            swarm.update(&cfg.group_params, cfg.max_iterations, update_seed)?;
        }
    }

    let score = best_score.expect("at least one iteration");
    Ok(PlanResult {
        best_path: Path::from_decision(&swarm.tbest_x),
        best_fitness: swarm.tbest_f,
        score,
        iterations_used: convergence.len(),
        wall_time: started.elapsed().as_secs_f64(),
        convergence,
        early_exit,
    })
}

/// What a planner hands back for one tick.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PlanOutcome {
    /// `None` when planning failed; the vehicle then keeps following what is
    /// left of its previous path.
    pub path: Option<Path>,
    pub fitness: Option<f64>,
    pub kinematic: Vec<Segment>,
}

/// A global planner that replans from scratch every tick.
pub trait Planner: Send {
    fn name(&self) -> &str;

    /// Forget any per-episode state.
    fn reset(&mut self);

    fn plan(&mut self, obs: &Observation, seed: u64) -> Result<PlanOutcome>;
}

/// The swarm planner with inheritance of the previous tick's best path.
#[derive(Clone, Debug)]
pub struct OkayPlanner {
    pub config: PlannerConfig,
    /// Previous plan and the vehicle position it was planned from.
    prev_best: Option<(Point, Path)>,
    initial_eta: Option<f64>,
    pub last: Option<PlanResult>,
}

impl OkayPlanner {
    pub fn new(config: PlannerConfig) -> Result<Self> {
        config.validate()?;
        Ok(OkayPlanner {
            config,
            prev_best: None,
            initial_eta: None,
            last: None,
        })
    }
}

impl Planner for OkayPlanner {
    fn name(&self) -> &str {
        "okayplan"
    }

    fn reset(&mut self) {
        self.prev_best = None;
        self.initial_eta = None;
        self.last = None;
    }

    fn plan(&mut self, obs: &Observation, seed: u64) -> Result<PlanOutcome> {
        let eta0 = *self.initial_eta.get_or_insert(obs.start.dist(obs.target));
        let inherited = self
            .prev_best
            .as_ref()
            .map(|(from, path)| path.resume(*from, obs.start, obs.target));
        let result = plan_once(obs, inherited.as_ref(), &self.config, Some(eta0), seed)?;
        self.prev_best = Some((obs.start, result.best_path.clone()));
        let kinematic = if self.config.gpp.mu != 0.0 {
            obs.kinematic_segments(self.config.gpp.iota)
        } else {
            Vec::new()
        };
        let outcome = PlanOutcome {
            path: Some(result.best_path.clone()),
            fitness: Some(result.best_fitness),
            kinematic,
        };
        self.last = Some(result);
        Ok(outcome)
    }
}

/// Per-episode navigation score: `-1 / travel` on arrival, `0` otherwise
/// (collision and timeout alike).
pub fn navigation_score(status: Status, travel_distance: f64) -> f64 {
    match status {
        Status::Arrived => -1.0 / travel_distance,
        _ => 0.0,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpisodeMetrics {
    pub seed: u64,
    pub status: Status,
    pub arrived: bool,
    pub ticks: u32,
    pub travel_distance: f64,
    pub fitness: f64,
    pub plan_times: Vec<f64>,
    /// Ticks on which the planner failed and the previous path was reused.
    pub failed_plans: u32,
}

impl EpisodeMetrics {
    pub fn mean_plan_time(&self) -> f64 {
        mean(&self.plan_times)
    }

    pub fn std_plan_time(&self) -> f64 {
        std_dev(&self.plan_times)
    }
}

pub fn mean(v: &[f64]) -> f64 {
    if v.is_empty() {
        0.0
    } else {
        v.iter().sum::<f64>() / v.len() as f64
    }
}

/// Population standard deviation.
pub fn std_dev(v: &[f64]) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    let m = mean(v);
    (v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / v.len() as f64).sqrt()
}

/// Seed handed to the planner on a given tick.
pub fn tick_seed(planner_seed: u64, scenario_seed: u64, tick: u32) -> u64 {
    rng::derive(&[rng::TAG_PLAN, planner_seed, scenario_seed, tick as u64])
}

/// Observe → plan → step until the episode ends.
///
/// `planner_seed` separates planner randomness from the scenario seed so the
/// same world can be replayed with different planner streams.
pub fn run_episode(
    scenario: &Scenario,
    planner: &mut dyn Planner,
    planner_seed: u64,
    keep_trace: bool,
) -> Result<(EpisodeMetrics, Vec<TraceRecord>)> {
    planner.reset();
    let mut state = scenario.initial_state();
    let mut remaining: Option<Path> = None;
    let mut trace = Vec::new();
    let mut plan_times = Vec::new();
    let mut failed = 0;

    while !state.status.is_terminal() {
        let obs = state.observe(scenario);
        let started = Instant::now();
        let outcome = planner.plan(&obs, tick_seed(planner_seed, scenario.seed, state.tick))?;
        plan_times.push(started.elapsed().as_secs_f64());

        let path = match outcome.path {
            Some(p) => p,
            None => {
                failed += 1;
                remaining.take().unwrap_or_default()
            }
        };
        let step = state.step(scenario, &path)?;
        if keep_trace {
            trace.push(TraceRecord {
                tick: state.tick,
                usv: obs.start,
                target: obs.target,
                path: path.polyline(obs.start, obs.target),
                obstacles: obs.obstacles,
                kinematic: outcome.kinematic,
                fitness: outcome.fitness,
                status: step.state.status,
            });
        }
        remaining = Some(step.remaining);
        state = step.state;
    }

    let metrics = EpisodeMetrics {
        seed: scenario.seed,
        status: state.status,
        arrived: state.status == Status::Arrived,
        ticks: state.tick,
        travel_distance: state.travel_distance,
        fitness: navigation_score(state.status, state.travel_distance),
        plan_times,
        failed_plans: failed,
    };
    Ok((metrics, trace))
}

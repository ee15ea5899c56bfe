//! Path objective: length plus normalized penalties for crossing obstacle
//! edges and for crossing kinematic segments.
//!
//! ```text
//! F(Z) = L(Z) + eta * (alpha * Q(Z)^beta + mu * P(Z)^nu)
//! ```
//!
//! `Q` counts (path segment, obstacle edge) intersections and `P` counts
//! (path segment, kinematic segment) intersections. `eta` is the current
//! start-to-target distance, so the penalties shrink together with the
//! length term as the vehicle closes in.

use serde::{Deserialize, Serialize};

use crate::environment::Observation;
use crate::error::{Error, Result};
use crate::geometry::{Path, Point, Segment, SegmentSet};

/// Smallest normalization factor used when start and target coincide.
pub const ETA_FLOOR: f64 = 1e-6;
/// Intersection counts are saturated here before exponentiation.
pub const COUNT_CAP: f64 = 1e6;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GppParams {
    pub alpha: f64,
    pub beta: f64,
    pub mu: f64,
    pub nu: f64,
    pub iota: f64,
}

impl GppParams {
    /// The evolved values published with the method.
    pub const PUBLISHED: GppParams = GppParams {
        alpha: 4.0,
        beta: 1.0,
        mu: 3.9827,
        nu: 6.0,
        iota: 5.2032,
    };

    pub fn validate(&self) -> Result<()> {
        let all = [self.alpha, self.beta, self.mu, self.nu, self.iota];
        if all.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidConfig(format!(
                "GPP parameters must be finite and nonnegative: {self:?}"
            )));
        }
        if self.beta < 1.0 || self.nu < 1.0 {
            return Err(Error::InvalidConfig(format!(
                "beta and nu must be >= 1: {self:?}"
            )));
        }
        Ok(())
    }

    /// Drops the kinematic term.
    pub fn without_kinematics(self) -> Self {
        GppParams { mu: 0.0, ..self }
    }
}

impl Default for GppParams {
    fn default() -> Self {
        Self::PUBLISHED
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Normalization {
    /// `eta` tracks the current start-to-target distance.
    #[default]
    Dynamic,
    /// `eta` is frozen at the distance seen on the first planning tick.
    FixedInitial,
    /// `eta = 1`.
    None,
}

/// Everything the objective needs for one planning tick, precomputed once.
#[derive(Clone, Debug)]
pub struct FitnessContext {
    pub start: Point,
    pub target: Point,
    pub obstacles: SegmentSet,
    pub kinematic: SegmentSet,
    pub eta: f64,
    pub normalization: Normalization,
}

impl FitnessContext {
    /// `initial_eta` is only consulted in [`Normalization::FixedInitial`] mode.
    pub fn new(
        start: Point,
        target: Point,
        obstacles: SegmentSet,
        kinematic: SegmentSet,
        normalization: Normalization,
        initial_eta: Option<f64>,
    ) -> Self {
        let current = start.dist(target);
        let eta = match normalization {
            Normalization::Dynamic => current,
            Normalization::FixedInitial => initial_eta.unwrap_or(current),
            Normalization::None => 1.0,
        };
        FitnessContext {
            start,
            target,
            obstacles,
            kinematic,
            eta: eta.max(ETA_FLOOR),
            normalization,
        }
    }

    pub fn from_observation(
        obs: &Observation,
        iota: f64,
        normalization: Normalization,
        initial_eta: Option<f64>,
    ) -> Self {
        Self::new(
            obs.start,
            obs.target,
            obs.obstacle_set(),
            obs.kinematic_set(iota),
            normalization,
            initial_eta,
        )
    }

    /// Context from flat segment lists, one group per segment list.
    pub fn from_segments(
        start: Point,
        target: Point,
        obstacles: &[Segment],
        kinematic: &[Segment],
        eta: f64,
    ) -> Self {
        let mut o = SegmentSet::new();
        o.push_group(obstacles.iter().copied());
        let mut k = SegmentSet::new();
        k.push_group(kinematic.iter().copied());
        FitnessContext {
            start,
            target,
            obstacles: o,
            kinematic: k,
            eta: eta.max(ETA_FLOOR),
            normalization: Normalization::Dynamic,
        }
    }
}

/// Breakdown of one path evaluation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PathScore {
    pub length: f64,
    pub collisions: usize,
    pub kinematic_hits: usize,
    pub fitness: f64,
}

impl PathScore {
    const INVALID: PathScore = PathScore {
        length: f64::INFINITY,
        collisions: usize::MAX,
        kinematic_hits: usize::MAX,
        fitness: f64::INFINITY,
    };

    /// Collision-free and clear of every kinematic segment.
    pub fn is_clear(&self) -> bool {
        self.collisions == 0 && self.kinematic_hits == 0
    }
}

/// The objective from its parts.
pub fn objective(length: f64, collisions: usize, kinematic_hits: usize, eta: f64, p: &GppParams) -> f64 {
    let q = (collisions as f64).min(COUNT_CAP);
    let mut penalty = p.alpha * q.powf(p.beta);
    if p.mu != 0.0 {
        let k = (kinematic_hits as f64).min(COUNT_CAP);
        penalty += p.mu * k.powf(p.nu);
    }
    length + eta * penalty
}

/// Scores a decision vector (`D/2` xs followed by `D/2` ys). Kinematic hits
/// are not counted when `mu == 0`.
pub fn score_decision(z: &[f64], ctx: &FitnessContext, params: &GppParams) -> PathScore {
    if z.iter().any(|v| !v.is_finite()) {
        return PathScore::INVALID;
    }
    let half = z.len() / 2;
    let count_kinematic = params.mu != 0.0 && !ctx.kinematic.is_empty();
    let mut prev = ctx.start;
    let mut length = 0.0;
    let mut q = 0;
    let mut k = 0;
    for i in 0..=half {
        let next = if i < half {
            Point::new(z[i], z[half + i])
        } else {
            ctx.target
        };
        let seg = Segment::new(prev, next);
        length += prev.dist(next);
        q += ctx.obstacles.hits(&seg);
        if count_kinematic {
            k += ctx.kinematic.hits(&seg);
        }
        prev = next;
    }
    PathScore {
        length,
        collisions: q,
        kinematic_hits: k,
        fitness: objective(length, q, k, ctx.eta, params),
    }
}

pub fn score_path(path: &Path, ctx: &FitnessContext, params: &GppParams) -> PathScore {
    score_decision(&path.to_decision(), ctx, params)
}

/// Objective values for a batch of paths. Non-finite paths score `+inf`.
pub fn evaluate_batch(paths: &[Path], ctx: &FitnessContext, params: &GppParams) -> Result<Vec<f64>> {
    if let Some(first) = paths.first() {
        if paths.iter().any(|p| p.len() != first.len()) {
            return Err(Error::ShapeMismatch(
                "all paths in a batch must have the same waypoint count".into(),
            ));
        }
    }
    Ok(paths
        .iter()
        .map(|p| score_path(p, ctx, params).fitness)
        .collect())
}

/// The objective without the kinematic term.
pub fn evaluate_static(paths: &[Path], ctx: &FitnessContext, params: &GppParams) -> Result<Vec<f64>> {
    evaluate_batch(paths, ctx, &params.without_kinematics())
}

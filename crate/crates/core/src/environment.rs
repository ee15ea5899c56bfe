//! Block-based dynamic environment: a point vehicle tracking a planned path
//! at constant speed toward a wandering target, among static and moving
//! rectangular obstacles.
//!
//! One tick is one second, so every speed is in meters per tick. All
//! randomness (obstacle headings, random-mode velocity changes, target
//! wandering) is drawn from streams keyed by the scenario seed and the tick,
//! which makes obstacle motion independent of whichever planner drives the
//! vehicle.

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{
    advance_along, kinematic_segments, point_in_polygon, polygon_edges, Aabb, Path, Point,
    Segment, SegmentSet, Velocity,
};
use crate::rng;

pub const SIMPLE_SCENARIO_JSON: &str = include_str!("../scenarios/simple.json");
pub const COMPLEX_SCENARIO_JSON: &str = include_str!("../scenarios/complex.json");

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    Simple,
    Complex,
}

impl Preset {
    pub fn file_contents(self) -> &'static str {
        match self {
            Preset::Simple => SIMPLE_SCENARIO_JSON,
            Preset::Complex => COMPLEX_SCENARIO_JSON,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Preset::Simple => "simple",
            Preset::Complex => "complex",
        }
    }
}

impl FromStr for Preset {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "simple" => Ok(Preset::Simple),
            "complex" => Ok(Preset::Complex),
            _ => Err(Error::UnknownPreset(s.to_string())),
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MotionMode {
    Static,
    /// Fixed velocity, reflected at the region bounds.
    Consistent,
    /// Speed re-drawn every tick within the speed range and heading turned
    /// by a uniform angle within `turn_range`.
    Random,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub min: Point,
    pub max: Point,
}

impl Region {
    pub fn world(width: f64, height: f64) -> Self {
        Region {
            min: Point::new(0.0, 0.0),
            max: Point::new(width, height),
        }
    }

    pub fn contains(&self, p: Point) -> bool {
        p.x >= self.min.x && p.x <= self.max.x && p.y >= self.min.y && p.y <= self.max.y
    }

    fn contains_box(&self, b: &Aabb) -> bool {
        self.contains(b.min) && self.contains(b.max)
    }

    /// Distance from `p` to the closest point of the region.
    pub fn distance_to(&self, p: Point) -> f64 {
        let cx = p.x.clamp(self.min.x, self.max.x);
        let cy = p.y.clamp(self.min.y, self.max.y);
        p.dist(Point::new(cx, cy))
    }
}

fn default_turn_range() -> f64 {
    std::f64::consts::FRAC_PI_4
}

fn default_target_turn() -> f64 {
    0.3
}

fn default_max_ticks() -> u32 {
    500
}

fn default_arrival_radius() -> f64 {
    6.0
}

/// One obstacle entry of a scenario file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObstacleSpec {
    pub vertices: Vec<Point>,
    pub speed_range: [f64; 2],
    pub motion_mode: MotionMode,
    /// Fixed initial heading in radians; drawn from the seed when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub heading: Option<f64>,
    #[serde(default = "default_turn_range")]
    pub turn_range: f64,
}

/// Scenario file contents.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    #[serde(default)]
    pub name: String,
    pub width: f64,
    pub height: f64,
    pub obstacles: Vec<ObstacleSpec>,
    pub start: Point,
    pub target: Point,
    pub usv_velocity: f64,
    pub target_velocity: f64,
    #[serde(default = "default_max_ticks")]
    pub max_ticks: u32,
    #[serde(default = "default_arrival_radius")]
    pub arrival_radius: f64,
    /// Where the target wanders; the whole world when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_region: Option<Region>,
    /// Where moving obstacles are confined; the whole world when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub obstacle_region: Option<Region>,
    #[serde(default = "default_target_turn")]
    pub target_turn_range: f64,
}

impl ScenarioSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        let spec: ScenarioSpec = serde_json::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn preset(preset: Preset) -> Self {
        Self::from_json(preset.file_contents()).expect("shipped scenario file is valid")
    }

    pub fn world(&self) -> Region {
        Region::world(self.width, self.height)
    }

    pub fn target_region(&self) -> Region {
        self.target_region.unwrap_or_else(|| self.world())
    }

    pub fn obstacle_region(&self) -> Region {
        self.obstacle_region.unwrap_or_else(|| self.world())
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if !(self.width > 0.0 && self.height > 0.0) {
            return bad(format!("world size {}x{}", self.width, self.height));
        }
        if !(self.usv_velocity > 0.0) {
            return bad(format!("usv_velocity must be positive, got {}", self.usv_velocity));
        }
        if !(self.target_velocity >= 0.0) || !(self.arrival_radius > 0.0) {
            return bad("target_velocity must be >= 0 and arrival_radius > 0".into());
        }
        let world = self.world();
        if !world.contains(self.start) || !world.contains(self.target) {
            return bad("start and target must lie inside the world".into());
        }
        for (name, r) in [
            ("target_region", self.target_region()),
            ("obstacle_region", self.obstacle_region()),
        ] {
            if !(world.contains(r.min) && world.contains(r.max)) || r.min.x > r.max.x || r.min.y > r.max.y {
                return bad(format!("{name} must be a box inside the world"));
            }
        }
        if !self.target_region().contains(self.target) {
            return bad("target must start inside target_region".into());
        }
        for (i, o) in self.obstacles.iter().enumerate() {
            if o.vertices.len() < 3 || o.vertices.iter().any(|p| !p.is_finite()) {
                return bad(format!("obstacle {i}: need at least 3 finite vertices"));
            }
            let [lo, hi] = o.speed_range;
            if !(lo >= 0.0 && hi >= lo) {
                return bad(format!("obstacle {i}: speed_range [{lo}, {hi}]"));
            }
            if o.motion_mode == MotionMode::Static && hi != 0.0 {
                return bad(format!("obstacle {i}: static obstacles must have zero speed"));
            }
            let bbox = Aabb::of_points(&o.vertices);
            let region = if o.motion_mode == MotionMode::Static {
                world
            } else {
                self.obstacle_region()
            };
            if !region.contains_box(&bbox) {
                return bad(format!("obstacle {i}: initial polygon outside its region"));
            }
        }
        Ok(())
    }

    /// Draws the seed-dependent initial state: obstacle velocities and the
    /// target heading.
    pub fn realize(&self, seed: u64) -> Scenario {
        let obstacles = self
            .obstacles
            .iter()
            .enumerate()
            .map(|(i, spec)| {
                let mut r = rng::stream(&[rng::TAG_ENV, seed, u64::MAX, i as u64]);
                let velocity = if spec.motion_mode == MotionMode::Static {
                    Point::default()
                } else {
                    let speed = draw_speed(&mut r, spec.speed_range);
                    let heading = spec.heading.unwrap_or_else(|| r.gen_range(0.0..TAU));
                    polar(speed, heading)
                };
                Obstacle {
                    vertices: spec.vertices.clone(),
                    velocity,
                    motion_mode: spec.motion_mode,
                    speed_range: spec.speed_range,
                    turn_range: spec.turn_range,
                }
            })
            .collect();
        let mut r = rng::stream(&[rng::TAG_TARGET, seed, u64::MAX]);
        Scenario {
            name: self.name.clone(),
            seed,
            width: self.width,
            height: self.height,
            start: self.start,
            target: self.target,
            target_heading: r.gen_range(0.0..TAU),
            usv_velocity: self.usv_velocity,
            target_velocity: self.target_velocity,
            max_ticks: self.max_ticks,
            arrival_radius: self.arrival_radius,
            target_region: self.target_region(),
            obstacle_region: self.obstacle_region(),
            target_turn_range: self.target_turn_range,
            obstacles,
        }
    }
}

fn draw_speed(r: &mut impl Rng, [lo, hi]: [f64; 2]) -> f64 {
    if hi > lo {
        r.gen_range(lo..=hi)
    } else {
        lo
    }
}

fn polar(speed: f64, heading: f64) -> Velocity {
    Point::new(speed * heading.cos(), speed * heading.sin())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Obstacle {
    pub vertices: Vec<Point>,
    pub velocity: Velocity,
    pub motion_mode: MotionMode,
    pub speed_range: [f64; 2],
    pub turn_range: f64,
}

impl Obstacle {
    pub fn is_dynamic(&self) -> bool {
        self.motion_mode != MotionMode::Static
    }

    pub fn edges(&self) -> impl Iterator<Item = Segment> + '_ {
        polygon_edges(&self.vertices)
    }

    pub fn contains(&self, p: Point) -> bool {
        point_in_polygon(p, &self.vertices)
    }

    fn translate(&mut self, d: Point) {
        for v in &mut self.vertices {
            *v = *v + d;
        }
    }

    /// Moves by the current velocity, mirroring off the region walls.
    fn advance(&mut self, region: &Region) {
        self.translate(self.velocity);
        let b = Aabb::of_points(&self.vertices);
        let mut shift = Point::default();
        if b.min.x < region.min.x {
            shift.x = 2.0 * (region.min.x - b.min.x);
            self.velocity.x = self.velocity.x.abs();
        } else if b.max.x > region.max.x {
            shift.x = 2.0 * (region.max.x - b.max.x);
            self.velocity.x = -self.velocity.x.abs();
        }
        if b.min.y < region.min.y {
            shift.y = 2.0 * (region.min.y - b.min.y);
            self.velocity.y = self.velocity.y.abs();
        } else if b.max.y > region.max.y {
            shift.y = 2.0 * (region.max.y - b.max.y);
            self.velocity.y = -self.velocity.y.abs();
        }
        self.translate(shift);
    }
}

/// A scenario file realized for one seed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    pub seed: u64,
    pub width: f64,
    pub height: f64,
    pub obstacles: Vec<Obstacle>,
    pub start: Point,
    pub target: Point,
    pub target_heading: f64,
    pub usv_velocity: f64,
    pub target_velocity: f64,
    pub max_ticks: u32,
    pub arrival_radius: f64,
    pub target_region: Region,
    pub obstacle_region: Region,
    pub target_turn_range: f64,
}

pub fn make_scenario(preset: &str, seed: u64) -> Result<Scenario> {
    let preset: Preset = preset.parse()?;
    Ok(ScenarioSpec::preset(preset).realize(seed))
}

impl Scenario {
    /// Lower bound on the distance any arriving episode travels: the target
    /// can never be closer than its region, and arrival is declared within
    /// `arrival_radius`. Travel is accounted in whole ticks.
    pub fn min_travel_distance(&self) -> f64 {
        let reach = self.target_region.distance_to(self.start) - self.arrival_radius;
        let ticks = (reach / self.usv_velocity).ceil().max(1.0);
        ticks * self.usv_velocity
    }

    pub fn initial_state(&self) -> EpisodeState {
        EpisodeState {
            seed: self.seed,
            usv: self.start,
            target: self.target,
            target_heading: self.target_heading,
            obstacles: self.obstacles.clone(),
            tick: 0,
            travel_distance: 0.0,
            status: Status::Running,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Running,
    Arrived,
    Collided,
    Timeout,
}

impl Status {
    pub fn is_terminal(self) -> bool {
        self != Status::Running
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpisodeState {
    pub seed: u64,
    pub usv: Point,
    pub target: Point,
    pub target_heading: f64,
    pub obstacles: Vec<Obstacle>,
    pub tick: u32,
    pub travel_distance: f64,
    pub status: Status,
}

/// What a planner sees at the start of a tick.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub tick: u32,
    pub start: Point,
    pub target: Point,
    pub width: f64,
    pub height: f64,
    pub obstacles: Vec<ObstacleView>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObstacleView {
    pub vertices: Vec<Point>,
    pub velocity: Velocity,
}

impl Observation {
    pub fn obstacle_segments(&self) -> Vec<Segment> {
        self.obstacles
            .iter()
            .flat_map(|o| polygon_edges(&o.vertices))
            .collect()
    }

    /// Obstacle edges grouped per obstacle.
    pub fn obstacle_set(&self) -> SegmentSet {
        let mut set = SegmentSet::new();
        for o in &self.obstacles {
            set.push_group(polygon_edges(&o.vertices));
        }
        set
    }

    pub fn kinematic_segments(&self, iota: f64) -> Vec<Segment> {
        kinematic_segments(
            self.obstacles
                .iter()
                .map(|o| (o.vertices.as_slice(), o.velocity)),
            iota,
        )
    }

    /// Kinematic segments grouped per obstacle.
    pub fn kinematic_set(&self, iota: f64) -> SegmentSet {
        let mut set = SegmentSet::new();
        for o in &self.obstacles {
            set.push_group(kinematic_segments([(o.vertices.as_slice(), o.velocity)], iota));
        }
        set
    }

    pub fn inside_obstacle(&self, p: Point) -> bool {
        self.obstacles
            .iter()
            .any(|o| point_in_polygon(p, &o.vertices))
    }
}

/// Result of one simulation tick.
#[derive(Clone, Debug, PartialEq)]
pub struct StepOutcome {
    pub state: EpisodeState,
    /// Waypoints of the followed path not yet reached.
    pub remaining: Path,
}

impl EpisodeState {
    pub fn observe(&self, scenario: &Scenario) -> Observation {
        Observation {
            tick: self.tick,
            start: self.usv,
            target: self.target,
            width: scenario.width,
            height: scenario.height,
            obstacles: self
                .obstacles
                .iter()
                .map(|o| ObstacleView {
                    vertices: o.vertices.clone(),
                    velocity: o.velocity,
                })
                .collect(),
        }
    }

    /// Advances the world by one tick with the vehicle following `path`
    /// (current position → waypoints → target as observed this tick).
    pub fn step(&self, scenario: &Scenario, path: &Path) -> Result<StepOutcome> {
        if self.status.is_terminal() {
            return Err(Error::EpisodeTerminated(self.status));
        }
        let mut next = self.clone();

        let route = path.polyline(self.usv, self.target);
        let (usv, ahead) = advance_along(&route, scenario.usv_velocity);
        next.usv = usv;
        next.travel_distance += scenario.usv_velocity;
        // Route index 0 is the vehicle itself, the last one the target.
        let first = ahead.clamp(1, route.len() - 1);
        let remaining = Path::new(route[first..route.len() - 1].to_vec());

        let mut r = rng::stream(&[rng::TAG_TARGET, self.seed, self.tick as u64]);
        next.target_heading += r.gen_range(-1.0..=1.0) * scenario.target_turn_range;
        let mut target = self.target + polar(scenario.target_velocity, next.target_heading);
        let region = scenario.target_region;
        let (mut hx, mut hy) = (next.target_heading.cos(), next.target_heading.sin());
        if target.x < region.min.x || target.x > region.max.x {
            target.x = reflect(target.x, region.min.x, region.max.x);
            hx = -hx;
        }
        if target.y < region.min.y || target.y > region.max.y {
            target.y = reflect(target.y, region.min.y, region.max.y);
            hy = -hy;
        }
        next.target_heading = hy.atan2(hx);
        next.target = target;

        let mut r = rng::stream(&[rng::TAG_ENV, self.seed, self.tick as u64]);
        for o in &mut next.obstacles {
            match o.motion_mode {
                MotionMode::Static => continue,
                MotionMode::Consistent => {}
                MotionMode::Random => {
                    let speed = draw_speed(&mut r, o.speed_range);
                    let turn = r.gen_range(-1.0..=1.0) * o.turn_range;
                    let heading = o.velocity.y.atan2(o.velocity.x) + turn;
                    o.velocity = polar(speed, heading);
                }
            }
            o.advance(&scenario.obstacle_region);
        }

        next.tick += 1;
        next.status = if next.obstacles.iter().any(|o| o.contains(next.usv)) {
            Status::Collided
        } else if next.usv.dist(next.target) <= scenario.arrival_radius {
            Status::Arrived
        } else if next.tick >= scenario.max_ticks {
            Status::Timeout
        } else {
            Status::Running
        };
        Ok(StepOutcome {
            state: next,
            remaining,
        })
    }
}

fn reflect(v: f64, lo: f64, hi: f64) -> f64 {
    let r = if v < lo {
        2.0 * lo - v
    } else if v > hi {
        2.0 * hi - v
    } else {
        v
    };
    r.clamp(lo, hi)
}

/// One line of an episode trace.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub tick: u32,
    pub usv: Point,
    pub target: Point,
    /// Planned polyline, from the vehicle to the target.
    pub path: Vec<Point>,
    pub obstacles: Vec<ObstacleView>,
    /// Kinematic segments the planner saw; empty for planners without them.
    #[serde(default)]
    pub kinematic: Vec<Segment>,
    /// Objective value of the planned path, when the planner has one.
    #[serde(default)]
    pub fitness: Option<f64>,
    /// Status after executing this tick.
    pub status: Status,
}

pub fn write_trace(path: &std::path::Path, records: &[TraceRecord]) -> Result<()> {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r)?);
        out.push('\n');
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

pub fn read_trace(path: &std::path::Path) -> Result<Vec<TraceRecord>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_trace(&text)
}

pub fn parse_trace(text: &str) -> Result<Vec<TraceRecord>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| Error::MalformedTrace {
                line: i + 1,
                reason: e.to_string(),
            })
        })
        .collect()
}

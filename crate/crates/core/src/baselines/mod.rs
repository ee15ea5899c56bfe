//! Reference planners and the comparison sweep.

pub mod grid;
pub mod rrt;

use std::io::Write;
use std::path::Path as FsPath;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::environment::ScenarioSpec;
use crate::error::{Error, Result};
use crate::geometry::{Point, Segment, SegmentSet};
use crate::planner::{mean, run_episode, std_dev, EpisodeMetrics, OkayPlanner, Planner, PlannerConfig};

pub use grid::{astar, dijkstra, grid_plan, GridMap, GridPlanner, Heuristic};
pub use rrt::{rrt_plan, RrtParams, RrtPlanner, Variant};

pub const ALGORITHMS: [&str; 5] = ["okayplan", "astar", "dijkstra", "rrt", "rrt_star"];

/// Greedy line-of-sight pruning: from each kept vertex jump to the furthest
/// later vertex reachable without crossing an obstacle edge. Fails when even
/// the next vertex is blocked.
pub fn shortcut(points: &[Point], obstacles: &SegmentSet) -> Result<Vec<Point>> {
    let mut kept = vec![points[0]];
    let mut i = 0;
    while i + 1 < points.len() {
        let j = (i + 1..points.len())
            .rev()
            .find(|&j| obstacles.hits(&Segment::new(points[i], points[j])) == 0)
            .ok_or_else(|| Error::NoPath("grid path leaves free space".into()))?;
        kept.push(points[j]);
        i = j;
    }
    Ok(kept)
}

/// Builds a planner by name. `config` supplies the swarm settings and the
/// waypoint count shared by every planner.
pub fn make_planner(name: &str, config: &PlannerConfig) -> Result<Box<dyn Planner>> {
    let w = config.waypoints();
    Ok(match name {
        "okayplan" => Box::new(OkayPlanner::new(config.clone())?),
        "astar" => Box::new(GridPlanner::astar(w)),
        "dijkstra" => Box::new(GridPlanner::dijkstra(w)),
        "rrt" => Box::new(RrtPlanner::new(Variant::Rrt, w)),
        "rrt_star" | "rrt*" => Box::new(RrtPlanner::new(Variant::RrtStar, w)),
        other => return Err(Error::UnknownAlgorithm(other.to_string())),
    })
}

/// One episode of the comparison sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub algorithm: String,
    pub seed: u64,
    pub fitness: f64,
    pub arrived: bool,
    pub travel_distance_m: f64,
    pub mean_plan_time_s: f64,
    pub std_plan_time_s: f64,
}

impl ComparisonRow {
    pub fn from_metrics(algorithm: &str, m: &EpisodeMetrics) -> Self {
        ComparisonRow {
            algorithm: algorithm.to_string(),
            seed: m.seed,
            fitness: m.fitness,
            arrived: m.arrived,
            travel_distance_m: m.travel_distance,
            mean_plan_time_s: m.mean_plan_time(),
            std_plan_time_s: m.std_plan_time(),
        }
    }
}

pub const COMPARISON_SCHEMA: &str = "# schema: okayplan-comparison/1";

/// A labelled planner setup for a sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct Entry {
    pub label: String,
    pub algorithm: String,
    pub config: PlannerConfig,
}

impl Entry {
    pub fn new(algorithm: &str, config: &PlannerConfig) -> Self {
        Entry {
            label: algorithm.to_string(),
            algorithm: algorithm.to_string(),
            config: config.clone(),
        }
    }
}

/// Runs every (algorithm, seed) pair. Rows come back grouped by algorithm
/// in the order given, then by seed.
pub fn run_comparison(
    algorithms: &[&str],
    scenario: &ScenarioSpec,
    seeds: &[u64],
    config: &PlannerConfig,
) -> Result<Vec<ComparisonRow>> {
    let entries: Vec<Entry> = algorithms.iter().map(|a| Entry::new(a, config)).collect();
    run_entries(&entries, scenario, seeds)
}

/// Like [`run_comparison`] with an explicit configuration per row label.
pub fn run_entries(entries: &[Entry], scenario: &ScenarioSpec, seeds: &[u64]) -> Result<Vec<ComparisonRow>> {
    for e in entries {
        make_planner(&e.algorithm, &e.config)?;
    }
    let jobs: Vec<(&Entry, u64)> = entries
        .iter()
        .flat_map(|e| seeds.iter().map(move |s| (e, *s)))
        .collect();
    jobs.par_iter()
        .map(|&(entry, seed)| {
            let mut planner = make_planner(&entry.algorithm, &entry.config)?;
            let world = scenario.realize(seed);
            let (m, _) = run_episode(&world, planner.as_mut(), seed, false)?;
            Ok(ComparisonRow::from_metrics(&entry.label, &m))
        })
        .collect()
}

pub fn write_comparison(path: &FsPath, rows: &[ComparisonRow]) -> Result<()> {
    let mut buf = format!("{COMPARISON_SCHEMA}\n").into_bytes();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        for r in rows {
            w.serialize(r)?;
        }
        w.flush().map_err(|e| Error::io(path, e))?;
    }
    std::fs::write(path, buf).map_err(|e| Error::io(path, e))
}

pub fn read_comparison(path: &FsPath) -> Result<Vec<ComparisonRow>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let body: String = text.lines().filter(|l| !l.starts_with('#')).collect::<Vec<_>>().join("\n");
    let mut r = csv::Reader::from_reader(body.as_bytes());
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}

/// Per-algorithm aggregate over a set of episodes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub algorithm: String,
    pub episodes: usize,
    pub fitness_mean: f64,
    pub fitness_std: f64,
    /// Mean and spread of travel distance over arrived episodes only.
    pub arrived_travel_mean: f64,
    pub arrived_travel_std: f64,
    pub arrival_rate: f64,
    pub plan_time_mean: f64,
    pub plan_time_std: f64,
}

/// Folds rows into one summary per algorithm, in first-seen order.
pub fn summarize(rows: &[ComparisonRow]) -> Vec<Summary> {
    let mut names: Vec<&str> = Vec::new();
    for r in rows {
        if !names.contains(&r.algorithm.as_str()) {
            names.push(&r.algorithm);
        }
    }
    names
        .into_iter()
        .map(|name| {
            let sel: Vec<&ComparisonRow> = rows.iter().filter(|r| r.algorithm == name).collect();
            let fit: Vec<f64> = sel.iter().map(|r| r.fitness).collect();
            let travel: Vec<f64> = sel.iter().filter(|r| r.arrived).map(|r| r.travel_distance_m).collect();
            let times: Vec<f64> = sel.iter().map(|r| r.mean_plan_time_s).collect();
            Summary {
                algorithm: name.to_string(),
                episodes: sel.len(),
                fitness_mean: mean(&fit),
                fitness_std: std_dev(&fit),
                arrived_travel_mean: mean(&travel),
                arrived_travel_std: std_dev(&travel),
                arrival_rate: travel.len() as f64 / sel.len() as f64,
                plan_time_mean: mean(&times),
                plan_time_std: std_dev(&times),
            }
        })
        .collect()
}

/// Fixed-width table of summaries.
pub fn print_summary(out: &mut dyn Write, summaries: &[Summary]) -> std::io::Result<()> {
    writeln!(
        out,
        "{:<22} {:>8} {:>22} {:>20} {:>8} {:>18}",
        "algorithm", "episodes", "fitness", "arrived travel (m)", "arrival", "time/plan (s)"
    )?;
    for s in summaries {
        writeln!(
            out,
            "{:<22} {:>8} {:>10.6} ± {:<9.6} {:>8.1} ± {:<9.1} {:>7.0}% {:>8.4} ± {:<7.4}",
            s.algorithm,
            s.episodes,
            s.fitness_mean,
            s.fitness_std,
            s.arrived_travel_mean,
            s.arrived_travel_std,
            s.arrival_rate * 100.0,
            s.plan_time_mean,
            s.plan_time_std
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_algorithm() {
        assert!(matches!(
            make_planner("jps", &PlannerConfig::default()),
            Err(Error::UnknownAlgorithm(_))
        ));
    }

    #[test]
    fn shortcut_skips_visible_vertices() {
        let pts = [Point::new(0.0, 0.0), Point::new(1.0, 1.0), Point::new(2.0, 0.0)];
        let kept = shortcut(&pts, &SegmentSet::new()).unwrap();
        assert_eq!(kept, vec![pts[0], pts[2]]);
    }

    #[test]
    fn summary_is_a_fold() {
        let row = |seed, arrived, travel: f64| ComparisonRow {
            algorithm: "x".into(),
            seed,
            fitness: if arrived { -1.0 / travel } else { 0.0 },
            arrived,
            travel_distance_m: travel,
            mean_plan_time_s: 0.01,
            std_plan_time_s: 0.0,
        };
        let s = &summarize(&[row(0, true, 400.0), row(1, false, 90.0), row(2, true, 500.0)])[0];
        assert_eq!(s.episodes, 3);
        assert!((s.arrival_rate - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(s.arrived_travel_mean, 450.0);
    }
}

//! Occupancy-grid search: A* with the octile heuristic, and Dijkstra as A*
//! without a heuristic.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::environment::Observation;
use crate::error::{Error, Result};
use crate::geometry::{point_in_polygon, segments_intersect, Aabb, Path, Point, Segment};
use crate::planner::{PlanOutcome, Planner};

use super::shortcut;

/// Boolean occupancy over square cells. Cell `(i, j)` covers
/// `[i*res, (i+1)*res] x [j*res, (j+1)*res]`.
#[derive(Clone, Debug, PartialEq)]
pub struct GridMap {
    pub resolution: f64,
    pub cols: usize,
    pub rows: usize,
    occupied: Vec<bool>,
}

impl GridMap {
    pub fn new(cols: usize, rows: usize, resolution: f64) -> Self {
        GridMap {
            resolution,
            cols,
            rows,
            occupied: vec![false; cols * rows],
        }
    }

    pub fn from_cells(cols: usize, rows: usize, resolution: f64, occupied: Vec<bool>) -> Result<Self> {
        if occupied.len() != cols * rows {
            return Err(Error::ShapeMismatch(format!(
                "{} cells for a {cols}x{rows} grid",
                occupied.len()
            )));
        }
        Ok(GridMap {
            resolution,
            cols,
            rows,
            occupied,
        })
    }

    /// Marks every cell that touches an obstacle polygon.
    pub fn rasterize(obs: &Observation, resolution: f64) -> Self {
        let cols = (obs.width / resolution).ceil() as usize;
        let rows = (obs.height / resolution).ceil() as usize;
        let mut grid = GridMap::new(cols, rows, resolution);
        for o in &obs.obstacles {
            let bb = Aabb::of_points(&o.vertices);
            let i0 = grid.clamp_col((bb.min.x / resolution).floor());
            let i1 = grid.clamp_col((bb.max.x / resolution).floor());
            let j0 = grid.clamp_row((bb.min.y / resolution).floor());
            let j1 = grid.clamp_row((bb.max.y / resolution).floor());
            for j in j0..=j1 {
                for i in i0..=i1 {
                    if !grid.occupied(i, j) && cell_touches_polygon(grid.cell_box(i, j), &o.vertices) {
                        grid.set(i, j, true);
                    }
                }
            }
        }
        grid
    }

    fn clamp_col(&self, v: f64) -> usize {
        (v.max(0.0) as usize).min(self.cols.saturating_sub(1))
    }

    fn clamp_row(&self, v: f64) -> usize {
        (v.max(0.0) as usize).min(self.rows.saturating_sub(1))
    }

    pub fn occupied(&self, i: usize, j: usize) -> bool {
        self.occupied[j * self.cols + i]
    }

    pub fn set(&mut self, i: usize, j: usize, value: bool) {
        self.occupied[j * self.cols + i] = value;
    }

    pub fn cell_of(&self, p: Point) -> (usize, usize) {
        (
            self.clamp_col((p.x / self.resolution).floor()),
            self.clamp_row((p.y / self.resolution).floor()),
        )
    }

    pub fn center(&self, i: usize, j: usize) -> Point {
        Point::new(
            (i as f64 + 0.5) * self.resolution,
            (j as f64 + 0.5) * self.resolution,
        )
    }

    fn cell_box(&self, i: usize, j: usize) -> Aabb {
        let r = self.resolution;
        Aabb {
            min: Point::new(i as f64 * r, j as f64 * r),
            max: Point::new((i + 1) as f64 * r, (j + 1) as f64 * r),
        }
    }
}

fn cell_touches_polygon(cell: Aabb, poly: &[Point]) -> bool {
    if poly.iter().any(|v| cell.contains(*v)) {
        return true;
    }
    let corners = [
        cell.min,
        Point::new(cell.max.x, cell.min.y),
        cell.max,
        Point::new(cell.min.x, cell.max.y),
    ];
    if corners.iter().any(|c| point_in_polygon(*c, poly)) {
        return true;
    }
    let cell_edges = [
        Segment::new(corners[0], corners[1]),
        Segment::new(corners[1], corners[2]),
        Segment::new(corners[2], corners[3]),
        Segment::new(corners[3], corners[0]),
    ];
    crate::geometry::polygon_edges(poly).any(|e| cell_edges.iter().any(|c| segments_intersect(&e, c)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Heuristic {
    Octile,
    Zero,
}

#[derive(Clone, Copy, PartialEq)]
struct Open {
    f: f64,
    g: f64,
    cell: usize,
}

impl Eq for Open {}

impl Ord for Open {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .f
            .total_cmp(&self.f)
            .then_with(|| self.g.total_cmp(&other.g))
            .then_with(|| other.cell.cmp(&self.cell))
    }
}

impl PartialOrd for Open {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Result of a grid search: visited cells from start to goal and the path
/// cost in meters.
#[derive(Clone, Debug, PartialEq)]
pub struct GridPath {
    pub cells: Vec<(usize, usize)>,
    pub cost: f64,
    pub expanded: usize,
}

/// Shortest 8-connected path between two cells. Diagonal steps need both
/// orthogonal neighbours free. The start and goal cells are searched even
/// when occupied.
pub fn grid_search(
    grid: &GridMap,
    start: (usize, usize),
    goal: (usize, usize),
    heuristic: Heuristic,
) -> Result<GridPath> {
    let (cols, rows) = (grid.cols, grid.rows);
    if start.0 >= cols || start.1 >= rows || goal.0 >= cols || goal.1 >= rows {
        return Err(Error::NoPath("start or goal outside the grid".into()));
    }
    let idx = |i: usize, j: usize| j * cols + i;
    let r = grid.resolution;
    let diag = std::f64::consts::SQRT_2 * r;
    let h = |i: usize, j: usize| match heuristic {
        Heuristic::Zero => 0.0,
        Heuristic::Octile => {
            let dx = i.abs_diff(goal.0) as f64;
            let dy = j.abs_diff(goal.1) as f64;
            r * (dx.max(dy) - dx.min(dy)) + diag * dx.min(dy)
        }
    };
    let s = idx(start.0, start.1);
    let t = idx(goal.0, goal.1);
    let free = |i: usize, j: usize| {
        let c = idx(i, j);
        c == s || c == t || !grid.occupied(i, j)
    };

    let mut g = vec![f64::INFINITY; cols * rows];
    let mut parent = vec![usize::MAX; cols * rows];
    let mut closed = vec![false; cols * rows];
    let mut open = BinaryHeap::new();
    g[s] = 0.0;
    open.push(Open {
        f: h(start.0, start.1),
        g: 0.0,
        cell: s,
    });
    let mut expanded = 0;

    while let Some(Open { g: gc, cell, .. }) = open.pop() {
        if closed[cell] {
            continue;
        }
        closed[cell] = true;
        expanded += 1;
        if cell == t {
            let mut cells = vec![(t % cols, t / cols)];
            let mut c = t;
            while c != s {
                c = parent[c];
                cells.push((c % cols, c / cols));
            }
            cells.reverse();
            // Recount from the moves so equal-cost paths report bit-equal costs.
            let diagonal = cells.windows(2).filter(|w| w[0].0 != w[1].0 && w[0].1 != w[1].1).count();
            let straight = cells.len() - 1 - diagonal;
            debug_assert!((gc - (r * straight as f64 + diag * diagonal as f64)).abs() < 1e-6);
            return Ok(GridPath {
                cells,
                cost: r * straight as f64 + diag * diagonal as f64,
                expanded,
            });
        }
        let (ci, cj) = ((cell % cols) as isize, (cell / cols) as isize);
        for dj in -1isize..=1 {
            for di in -1isize..=1 {
                if di == 0 && dj == 0 {
                    continue;
                }
                let (ni, nj) = (ci + di, cj + dj);
                if ni < 0 || nj < 0 || ni >= cols as isize || nj >= rows as isize {
                    continue;
                }
                let (ni, nj) = (ni as usize, nj as usize);
                if !free(ni, nj) {
                    continue;
                }
                let step = if di != 0 && dj != 0 {
                    if !free(ci as usize, nj) || !free(ni, cj as usize) {
                        continue;
                    }
                    diag
                } else {
                    r
                };
                let n = idx(ni, nj);
                let ng = gc + step;
                if ng < g[n] {
                    g[n] = ng;
                    parent[n] = cell;
                    open.push(Open {
                        f: ng + h(ni, nj),
                        g: ng,
                        cell: n,
                    });
                }
            }
        }
    }
    Err(Error::NoPath("goal unreachable on the occupancy grid".into()))
}

pub fn astar(grid: &GridMap, start: (usize, usize), goal: (usize, usize)) -> Result<GridPath> {
    grid_search(grid, start, goal, Heuristic::Octile)
}

pub fn dijkstra(grid: &GridMap, start: (usize, usize), goal: (usize, usize)) -> Result<GridPath> {
    grid_search(grid, start, goal, Heuristic::Zero)
}

/// Plans on the current snapshot: grid search, then line-of-sight shortcut
/// against the true obstacle edges, then padding to `waypoints`.
pub fn grid_plan(obs: &Observation, resolution: f64, heuristic: Heuristic, waypoints: usize) -> Result<Path> {
    let grid = GridMap::rasterize(obs, resolution);
    let found = grid_search(&grid, grid.cell_of(obs.start), grid.cell_of(obs.target), heuristic)?;
    let mut pts = Vec::with_capacity(found.cells.len() + 2);
    pts.push(obs.start);
    pts.extend(found.cells.iter().map(|&(i, j)| grid.center(i, j)));
    pts.push(obs.target);
    let obstacles = obs.obstacle_set();
    let kept = shortcut(&pts, &obstacles)?;
    Ok(Path::new(kept[1..kept.len() - 1].to_vec()).padded(waypoints, obs.start, obs.target))
}

#[derive(Clone, Debug)]
pub struct GridPlanner {
    pub heuristic: Heuristic,
    pub resolution: f64,
    pub waypoints: usize,
}

impl GridPlanner {
    pub fn astar(waypoints: usize) -> Self {
        GridPlanner {
            heuristic: Heuristic::Octile,
            resolution: 2.0,
            waypoints,
        }
    }

    pub fn dijkstra(waypoints: usize) -> Self {
        GridPlanner {
            heuristic: Heuristic::Zero,
            ..Self::astar(waypoints)
        }
    }
}

impl Planner for GridPlanner {
    fn name(&self) -> &str {
        match self.heuristic {
            Heuristic::Octile => "astar",
            Heuristic::Zero => "dijkstra",
        }
    }

    fn reset(&mut self) {}

    fn plan(&mut self, obs: &Observation, _seed: u64) -> Result<PlanOutcome> {
        Ok(match grid_plan(obs, self.resolution, self.heuristic, self.waypoints) {
            Ok(path) => PlanOutcome {
                path: Some(path),
                ..PlanOutcome::default()
            },
            Err(Error::NoPath(_)) => PlanOutcome::default(),
            Err(e) => return Err(e),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::environment::ObstacleView;

    fn p(x: f64, y: f64) -> Point {
        Point::new(x, y)
    }

    #[test]
    fn straight_corridor_cost() {
        let grid = GridMap::new(11, 1, 1.0);
        let a = astar(&grid, (0, 0), (10, 0)).unwrap();
        assert_eq!(a.cost, 10.0);
        assert_eq!(a.cells.len(), 11);
    }

    #[test]
    fn walled_target_fails() {
        let mut grid = GridMap::new(5, 5, 1.0);
        for (i, j) in [(1, 1), (2, 1), (3, 1), (1, 2), (3, 2), (1, 3), (2, 3), (3, 3)] {
            grid.set(i, j, true);
        }
        assert!(matches!(astar(&grid, (0, 0), (2, 2)), Err(Error::NoPath(_))));
        assert!(matches!(dijkstra(&grid, (0, 0), (2, 2)), Err(Error::NoPath(_))));
    }

    #[test]
    fn no_corner_cutting() {
        let mut grid = GridMap::new(2, 2, 1.0);
        grid.set(1, 0, true);
        let a = astar(&grid, (0, 0), (1, 1)).unwrap();
        assert_eq!(a.cost, 2.0);
    }

    #[test]
    fn rasterized_box_blocks_direct_line() {
        let obs = Observation {
            tick: 0,
            start: p(5.0, 50.0),
            target: p(95.0, 50.0),
            width: 100.0,
            height: 100.0,
            obstacles: vec![ObstacleView {
                vertices: vec![p(40.0, 20.0), p(60.0, 20.0), p(60.0, 80.0), p(40.0, 80.0)],
                velocity: p(0.0, 0.0),
            }],
        };
        let grid = GridMap::rasterize(&obs, 2.0);
        assert!(grid.occupied(25, 25));
        assert!(!grid.occupied(5, 5));
        let path = grid_plan(&obs, 2.0, Heuristic::Octile, 8).unwrap();
        assert_eq!(path.len(), 8);
        let hits = obs.obstacle_set().count_hits(&path.segments(obs.start, obs.target));
        assert_eq!(hits, 0);
    }
}

//! Sampling-based planners on the continuous map.
//!
//! Both variants consume the same sample stream and grow trees with the
//! same node positions; RRT* only differs in parent choice and rewiring, so
//! every node's cost-to-come is no larger than under plain RRT.

use rand::Rng;

use crate::environment::Observation;
use crate::error::{Error, Result};
use crate::geometry::{Path, Point, Segment, SegmentSet};
use crate::planner::{PlanOutcome, Planner};
use crate::rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Variant {
    Rrt,
    RrtStar,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RrtParams {
    pub step: f64,
    pub goal_bias: f64,
    pub samples: usize,
    /// Neighbourhood searched for parents and rewiring (RRT* only).
    pub radius: f64,
}

impl Default for RrtParams {
    fn default() -> Self {
        RrtParams {
            step: 10.0,
            goal_bias: 0.1,
            samples: 2000,
            radius: 20.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Node {
    pub pos: Point,
    pub parent: Option<usize>,
    pub cost: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Tree {
    pub nodes: Vec<Node>,
    children: Vec<Vec<usize>>,
}

impl Tree {
    fn new(root: Point) -> Self {
        Tree {
            nodes: vec![Node {
                pos: root,
                parent: None,
                cost: 0.0,
            }],
            children: vec![Vec::new()],
        }
    }

    fn nearest(&self, p: Point) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (i, n) in self.nodes.iter().enumerate() {
            let d = n.pos.dist(p);
            if d < best_d {
                best_d = d;
                best = i;
            }
        }
        best
    }

    fn push(&mut self, pos: Point, parent: usize, cost: f64) -> usize {
        self.nodes.push(Node {
            pos,
            parent: Some(parent),
            cost,
        });
        self.children.push(Vec::new());
        self.children[parent].push(self.nodes.len() - 1);
        self.nodes.len() - 1
    }

    fn reparent(&mut self, node: usize, parent: usize, cost: f64) {
        if let Some(old) = self.nodes[node].parent {
            self.children[old].retain(|&c| c != node);
        }
        self.children[parent].push(node);
        self.nodes[node].parent = Some(parent);
        let delta = self.nodes[node].cost - cost;
        let mut stack = vec![node];
        while let Some(n) = stack.pop() {
            self.nodes[n].cost -= delta;
            stack.extend(self.children[n].iter().copied());
        }
    }

    /// Root-to-node positions.
    pub fn branch(&self, mut node: usize) -> Vec<Point> {
        let mut pts = vec![self.nodes[node].pos];
        while let Some(p) = self.nodes[node].parent {
            pts.push(self.nodes[p].pos);
            node = p;
        }
        pts.reverse();
        pts
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RrtResult {
    pub tree: Tree,
    /// Polyline from start to target.
    pub points: Vec<Point>,
    pub cost: f64,
}

fn clear(obstacles: &SegmentSet, a: Point, b: Point) -> bool {
    obstacles.hits(&Segment::new(a, b)) == 0
}

/// Grows a tree from `obs.start` until the target is connected (RRT) or the
/// budget is spent (RRT*, keeping the cheapest connection).
pub fn rrt_plan(obs: &Observation, variant: Variant, params: &RrtParams, seed: u64) -> Result<RrtResult> {
    let obstacles = obs.obstacle_set();
    let (start, target) = (obs.start, obs.target);
    let mut tree = Tree::new(start);
    let mut r = rng::stream(&[rng::TAG_BASELINE, seed]);
    let mut goal: Option<(usize, f64)> = None;

    let try_goal = |tree: &Tree, i: usize, goal: &mut Option<(usize, f64)>| {
        let n = &tree.nodes[i];
        let d = n.pos.dist(target);
        if d <= params.step && clear(&obstacles, n.pos, target) && goal.map_or(true, |(_, c)| n.cost + d < c) {
            *goal = Some((i, n.cost + d));
        }
    };
    try_goal(&tree, 0, &mut goal);

    for _ in 0..params.samples {
        if variant == Variant::Rrt && goal.is_some() {
            break;
        }
        let sample = if r.gen::<f64>() < params.goal_bias {
            target
        } else {
            Point::new(r.gen_range(0.0..=obs.width), r.gen_range(0.0..=obs.height))
        };
        let near = tree.nearest(sample);
        let from = tree.nodes[near].pos;
        let d = from.dist(sample);
        if d == 0.0 {
            continue;
        }
        let new = if d <= params.step {
            sample
        } else {
            from.lerp(sample, params.step / d)
        };
        if !clear(&obstacles, from, new) {
            continue;
        }

        let id = match variant {
            Variant::Rrt => tree.push(new, near, tree.nodes[near].cost + from.dist(new)),
            Variant::RrtStar => {
                let neighbours: Vec<usize> = (0..tree.nodes.len())
                    .filter(|&i| tree.nodes[i].pos.dist(new) <= params.radius)
                    .collect();
                let mut parent = near;
                let mut cost = tree.nodes[near].cost + from.dist(new);
                for &i in &neighbours {
                    let c = tree.nodes[i].cost + tree.nodes[i].pos.dist(new);
                    if c < cost && clear(&obstacles, tree.nodes[i].pos, new) {
                        parent = i;
                        cost = c;
                    }
                }
                let id = tree.push(new, parent, cost);
                for &i in &neighbours {
                    let c = cost + new.dist(tree.nodes[i].pos);
                    if c < tree.nodes[i].cost && clear(&obstacles, new, tree.nodes[i].pos) {
                        tree.reparent(i, id, c);
                    }
                }
                id
            }
        };
        try_goal(&tree, id, &mut goal);
    }

    if variant == Variant::RrtStar {
        // Rewiring may have lowered costs of earlier connections.
        goal = None;
        for i in 0..tree.nodes.len() {
            try_goal(&tree, i, &mut goal);
        }
    }

    let (node, cost) = goal.ok_or_else(|| Error::NoPath(format!("no connection after {} samples", params.samples)))?;
    let mut points = tree.branch(node);
    if points.len() == 1 || points.last() != Some(&target) {
        points.push(target);
    }
    Ok(RrtResult { tree, points, cost })
}

#[derive(Clone, Debug)]
pub struct RrtPlanner {
    pub variant: Variant,
    pub params: RrtParams,
    pub waypoints: usize,
}

impl RrtPlanner {
    pub fn new(variant: Variant, waypoints: usize) -> Self {
        RrtPlanner {
            variant,
            params: RrtParams::default(),
            waypoints,
        }
    }
}

impl Planner for RrtPlanner {
    fn name(&self) -> &str {
        match self.variant {
            Variant::Rrt => "rrt",
            Variant::RrtStar => "rrt_star",
        }
    }

    fn reset(&mut self) {}

    fn plan(&mut self, obs: &Observation, seed: u64) -> Result<PlanOutcome> {
        match rrt_plan(obs, self.variant, &self.params, seed) {
            Ok(res) => {
                let inner = res.points[1..res.points.len() - 1].to_vec();
                Ok(PlanOutcome {
                    path: Some(Path::new(inner).padded(self.waypoints, obs.start, obs.target)),
                    ..PlanOutcome::default()
                })
            }
            Err(Error::NoPath(_)) => Ok(PlanOutcome::default()),
            Err(e) => Err(e),
        }
    }
}

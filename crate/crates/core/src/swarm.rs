//! Multi-group particle swarm with whole-population updates.
//!
//! Particles are stored as flat `G × N × D` buffers so a single update pass
//! touches every particle of every group. Each group has its own search
//! parameters; all groups share the population-wide best (`tbest`).

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

/// Search parameters of one group.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupParams {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub omega_init: f64,
    pub omega_end: f64,
    pub v_limit: f64,
}

const fn gp(omega_init: f64, omega_end: f64, v_limit: f64, c1: f64, c2: f64, c3: f64) -> GroupParams {
    GroupParams {
        c1,
        c2,
        c3,
        omega_init,
        omega_end,
        v_limit,
    }
}

/// Published evolved search parameters for eight groups.
pub const PUBLISHED_GROUPS: [GroupParams; 8] = [
    gp(0.9000, 0.9000, 0.1000, 1.0000, 2.0000, 1.0000),
    gp(0.2000, 0.1000, 0.1000, 1.4853, 1.0000, 1.0000),
    gp(0.7434, 0.9000, 0.1389, 1.0000, 1.0000, 2.0000),
    gp(0.9000, 0.9000, 0.1000, 1.0756, 1.0000, 1.2968),
    gp(0.2000, 0.9000, 0.8000, 2.0000, 2.0000, 2.0000),
    gp(0.6094, 0.1000, 0.1000, 1.0000, 1.3316, 2.0000),
    gp(0.8271, 0.1000, 0.8000, 2.0000, 2.0000, 1.0000),
    gp(0.9000, 0.7743, 0.8000, 1.9968, 1.9253, 1.0000),
];

impl GroupParams {
    pub fn validate(&self) -> Result<()> {
        let ok = self.c1 > 0.0
            && self.c2 > 0.0
            && self.c3 > 0.0
            && self.v_limit > 0.0
            && self.v_limit <= 1.0
            && self.omega_init.is_finite()
            && self.omega_end.is_finite();
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!("invalid group parameters {self:?}")))
        }
    }

    pub fn to_array(&self) -> [f64; 6] {
        [self.c1, self.c2, self.c3, self.omega_init, self.omega_end, self.v_limit]
    }

    pub fn from_array(a: [f64; 6]) -> Self {
        GroupParams {
            c1: a[0],
            c2: a[1],
            c3: a[2],
            omega_init: a[3],
            omega_end: a[4],
            v_limit: a[5],
        }
    }
}

/// Linearly decaying inertia weight at iteration `k` of `t`.
pub fn inertia(gp: &GroupParams, k: usize, t: usize) -> Result<f64> {
    if t == 0 {
        return Err(Error::InvalidConfig("maximum iteration count must be positive".into()));
    }
    if k > t {
        return Err(Error::InvalidConfig(format!("iteration {k} beyond maximum {t}")));
    }
    Ok(gp.omega_init - (gp.omega_init - gp.omega_end) * k as f64 / t as f64)
}

/// Population state. Lower fitness is better.
#[derive(Clone, Debug, PartialEq)]
pub struct Swarm {
    groups: usize,
    particles: usize,
    dims: usize,
    lower: Vec<f64>,
    upper: Vec<f64>,
    pub x: Vec<f64>,
    pub v: Vec<f64>,
    pub pbest_x: Vec<f64>,
    pub pbest_f: Vec<f64>,
    pub gbest_x: Vec<f64>,
    pub gbest_f: Vec<f64>,
    pub tbest_x: Vec<f64>,
    pub tbest_f: f64,
    /// Iterations performed since the last reset.
    pub k: usize,
}

impl Swarm {
    /// An all-zero population; call [`Swarm::reset`] with real positions.
    pub fn new(groups: usize, particles: usize, lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        let dims = lower.len();
        if groups == 0 || particles == 0 || dims == 0 || upper.len() != dims {
            return Err(Error::ShapeMismatch(format!(
                "swarm {groups}x{particles} with bounds of length {}/{}",
                lower.len(),
                upper.len()
            )));
        }
        if lower.iter().zip(&upper).any(|(l, u)| !(l <= u)) {
            return Err(Error::InvalidConfig("lower bound above upper bound".into()));
        }
        let n = groups * particles * dims;
        let start: Vec<f64> = lower.clone();
        let x: Vec<f64> = start.iter().copied().cycle().take(n).collect();
        Ok(Swarm {
            groups,
            particles,
            dims,
            lower,
            upper,
            v: vec![0.0; n],
            pbest_x: x.clone(),
            pbest_f: vec![f64::INFINITY; groups * particles],
            gbest_x: start.iter().copied().cycle().take(groups * dims).collect(),
            gbest_f: vec![f64::INFINITY; groups],
            tbest_x: start,
            tbest_f: f64::INFINITY,
            x,
            k: 0,
        })
    }

    pub fn groups(&self) -> usize {
        self.groups
    }

    pub fn particles(&self) -> usize {
        self.particles
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn population(&self) -> usize {
        self.groups * self.particles
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn particle(&self, g: usize, n: usize) -> &[f64] {
        let i = (g * self.particles + n) * self.dims;
        &self.x[i..i + self.dims]
    }

    pub fn gbest(&self, g: usize) -> &[f64] {
        &self.gbest_x[g * self.dims..(g + 1) * self.dims]
    }

    /// Installs new positions (clamped to the bounds), zeroes velocities and
    /// forgets all bests.
    pub fn reset(&mut self, positions: Vec<f64>) -> Result<()> {
        if positions.len() != self.x.len() {
            return Err(Error::ShapeMismatch(format!(
                "expected {} coordinates, got {}",
                self.x.len(),
                positions.len()
            )));
        }
        self.x = positions;
        let d = self.dims;
        for (i, v) in self.x.iter_mut().enumerate() {
            *v = v.clamp(self.lower[i % d], self.upper[i % d]);
        }
        self.v.fill(0.0);
        self.pbest_x.copy_from_slice(&self.x);
        self.pbest_f.fill(f64::INFINITY);
        for g in 0..self.groups {
            let src = g * self.particles * d;
            self.gbest_x[g * d..(g + 1) * d].copy_from_slice(&self.x[src..src + d]);
        }
        self.gbest_f.fill(f64::INFINITY);
        self.tbest_x.copy_from_slice(&self.x[..d]);
        self.tbest_f = f64::INFINITY;
        self.k = 0;
        Ok(())
    }

    fn check_fitness(&self, fitness: &[f64]) -> Result<()> {
        if fitness.len() != self.population() {
            return Err(Error::ShapeMismatch(format!(
                "expected {} fitness values, got {}",
                self.population(),
                fitness.len()
            )));
        }
        Ok(())
    }

    /// Strict-improvement best updating, visiting particles in group-major
    /// order.
    pub fn update_bests_standard(&mut self, fitness: &[f64]) -> Result<()> {
        self.check_fitness(fitness)?;
        let d = self.dims;
        for g in 0..self.groups {
            for n in 0..self.particles {
                let i = g * self.particles + n;
                let f = fitness[i];
                let xi = &self.x[i * d..(i + 1) * d];
                if f < self.pbest_f[i] {
                    self.pbest_f[i] = f;
                    self.pbest_x[i * d..(i + 1) * d].copy_from_slice(xi);
                }
                if f < self.gbest_f[g] {
                    self.gbest_f[g] = f;
                    self.gbest_x[g * d..(g + 1) * d].copy_from_slice(xi);
                }
                if f < self.tbest_f {
                    self.tbest_f = f;
                    self.tbest_x.copy_from_slice(xi);
                }
            }
        }
        Ok(())
    }

    /// Relaxed best updating with the relaxation factor drawn uniformly
    /// between `lambda` and 1 for every comparison.
    pub fn update_bests_relaxed(&mut self, fitness: &[f64], lambda: f64, rng: &mut impl Rng) -> Result<()> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "relaxation parameter must be positive, got {lambda}"
            )));
        }
        self.update_bests_relaxed_with(fitness, || {
            let u: f64 = rng.gen();
            lambda + (1.0 - lambda) * u
        })
    }

    /// Relaxed best updating with caller-supplied relaxation factors, one
    /// call per comparison (pbest, gbest, tbest for each particle in turn).
    ///
    /// Positions move when `f < factor * best`; best values still only move
    /// on strict improvement, so they never increase.
    pub fn update_bests_relaxed_with(&mut self, fitness: &[f64], mut factor: impl FnMut() -> f64) -> Result<()> {
        self.check_fitness(fitness)?;
        let d = self.dims;
        for g in 0..self.groups {
            for n in 0..self.particles {
                let i = g * self.particles + n;
                let f = fitness[i];
                let xi = &self.x[i * d..(i + 1) * d];

                if f < factor() * self.pbest_f[i] {
                    self.pbest_x[i * d..(i + 1) * d].copy_from_slice(xi);
                }
                if f < self.pbest_f[i] {
                    self.pbest_f[i] = f;
                }
                if f < factor() * self.gbest_f[g] {
                    self.gbest_x[g * d..(g + 1) * d].copy_from_slice(xi);
                }
                if f < self.gbest_f[g] {
                    self.gbest_f[g] = f;
                }
                if f < factor() * self.tbest_f {
                    self.tbest_x.copy_from_slice(xi);
                }
                if f < self.tbest_f {
                    self.tbest_f = f;
                }
            }
        }
        Ok(())
    }

    /// One velocity/position update with random coefficients drawn from a
    /// stream per (seed, group, iteration).
    pub fn update(&mut self, params: &[GroupParams], max_iterations: usize, seed: u64) -> Result<()> {
        let k = self.k as u64;
        self.update_with(params, max_iterations, |g| {
            let mut r = rng::stream(&[rng::TAG_SWARM, seed, g as u64, k]);
            move || (r.gen::<f64>(), r.gen::<f64>(), r.gen::<f64>())
        })
    }

    /// One velocity/position update with coefficient triples from `draws`,
    /// which builds one generator per group. Each generator is called once
    /// per particle per dimension.
    pub fn update_with<F, D>(&mut self, params: &[GroupParams], max_iterations: usize, draws: F) -> Result<()>
    where
        F: Fn(usize) -> D + Sync,
        D: FnMut() -> (f64, f64, f64),
    {
        if params.len() != self.groups {
            return Err(Error::ShapeMismatch(format!(
                "{} group parameter sets for {} groups",
                params.len(),
                self.groups
            )));
        }
        let omegas = params
            .iter()
            .map(|p| inertia(p, self.k, max_iterations))
            .collect::<Result<Vec<f64>>>()?;

        let d = self.dims;
        let chunk = self.particles * d;
        let lower = &self.lower;
        let upper = &self.upper;
        let tbest = &self.tbest_x;
        let gbest = &self.gbest_x;

        self.x
            .par_chunks_mut(chunk)
            .zip(self.v.par_chunks_mut(chunk))
            .zip(self.pbest_x.par_chunks(chunk))
            .enumerate()
            .for_each(|(g, ((xg, vg), pg))| {
                let gp = &params[g];
                let omega = omegas[g];
                let gb = &gbest[g * d..(g + 1) * d];
                let mut draw = draws(g);
                for ((x, v), pb) in xg.chunks_mut(d).zip(vg.chunks_mut(d)).zip(pg.chunks(d)) {
                    for j in 0..d {
                        let (r1, r2, r3) = draw();
                        let vmax = gp.v_limit * (upper[j] - lower[j]);
                        let nv = omega * v[j]
                            + gp.c1 * r1 * (pb[j] - x[j])
                            + gp.c2 * r2 * (gb[j] - x[j])
                            + gp.c3 * r3 * (tbest[j] - x[j]);
                        v[j] = nv.clamp(-vmax, vmax);
                        x[j] = (x[j] + v[j]).clamp(lower[j], upper[j]);
                    }
                }
            });
        self.k += 1;
        Ok(())
    }

    /// Bounds and velocity-cap check used by tests and debug assertions.
    pub fn within_bounds(&self, params: &[GroupParams]) -> bool {
        let d = self.dims;
        let chunk = self.particles * d;
        self.x.iter().enumerate().all(|(i, &x)| {
            let j = i % d;
            x >= self.lower[j] && x <= self.upper[j]
        }) && self.v.iter().enumerate().all(|(i, &v)| {
            let j = i % d;
            let g = i / chunk;
            v.abs() <= params[g].v_limit * (self.upper[j] - self.lower[j])
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn one_particle(x: f64) -> Swarm {
        let mut s = Swarm::new(1, 1, vec![-100.0], vec![100.0]).unwrap();
        s.reset(vec![x]).unwrap();
        s
    }

    #[test]
    fn inertia_schedule() {
        let g = gp(0.9, 0.1, 0.5, 1.0, 1.0, 1.0);
        assert_eq!(inertia(&g, 0, 50).unwrap(), 0.9);
        assert!((inertia(&g, 50, 50).unwrap() - 0.1).abs() < 1e-15);
        assert!((inertia(&g, 25, 50).unwrap() - 0.5).abs() < 1e-15);
        assert!(inertia(&g, 0, 0).is_err());
        assert!(inertia(&g, 51, 50).is_err());
    }

    #[test]
    fn published_groups_match_table_rows() {
        assert_eq!(PUBLISHED_GROUPS[1].c1, 1.4853);
        assert_eq!(PUBLISHED_GROUPS[2].omega_init, 0.7434);
        assert_eq!(PUBLISHED_GROUPS[2].v_limit, 0.1389);
        assert_eq!(PUBLISHED_GROUPS[3].c3, 1.2968);
        assert_eq!(PUBLISHED_GROUPS[5].c2, 1.3316);
        assert_eq!(PUBLISHED_GROUPS[7].omega_end, 0.7743);
        assert_eq!(PUBLISHED_GROUPS[7].to_array(), [1.9968, 1.9253, 1.0, 0.9, 0.7743, 0.8]);
        for g in &PUBLISHED_GROUPS {
            g.validate().unwrap();
        }
    }

    #[test]
    fn fixed_point_particle_does_not_move() {
        let mut s = one_particle(3.0);
        s.update_bests_standard(&[1.0]).unwrap();
        s.update(&[PUBLISHED_GROUPS[4]], 50, 7).unwrap();
        assert_eq!(s.x, vec![3.0]);
        assert_eq!(s.v, vec![0.0]);
    }

    #[test]
    fn hand_computed_step() {
        // x=0, v=2, pbest=4, gbest=6, tbest=10, halves for every draw.
        let g = gp(0.9, 0.1, 0.5, 1.0, 1.5, 2.0);
        let mut s = Swarm::new(1, 1, vec![-100.0], vec![100.0]).unwrap();
        s.reset(vec![0.0]).unwrap();
        s.v = vec![2.0];
        s.pbest_x = vec![4.0];
        s.gbest_x = vec![6.0];
        s.tbest_x = vec![10.0];
        s.k = 25;
        s.update_with(&[g], 50, |_| || (0.5, 0.5, 0.5)).unwrap();
        // omega = 0.5; v = 0.5*2 + 1*0.5*4 + 1.5*0.5*6 + 2*0.5*10 = 1 + 2 + 4.5 + 10
        assert!((s.v[0] - 17.5).abs() < 1e-12);
        assert!((s.x[0] - 17.5).abs() < 1e-12);
        assert_eq!(s.k, 26);
    }

    #[test]
    fn velocity_and_position_saturate() {
        let g = gp(0.9, 0.9, 0.1, 2.0, 2.0, 2.0);
        let mut s = Swarm::new(1, 1, vec![0.0], vec![10.0]).unwrap();
        s.reset(vec![9.5]).unwrap();
        s.tbest_x = vec![10.0];
        s.pbest_x = vec![10.0];
        s.gbest_x = vec![10.0];
        s.v = vec![5.0];
        s.update_with(&[g], 50, |_| || (1.0, 1.0, 1.0)).unwrap();
        assert_eq!(s.v[0], 1.0);
        assert_eq!(s.x[0], 10.0);
    }

    #[test]
    fn shape_mismatch_is_reported() {
        let mut s = Swarm::new(2, 3, vec![0.0; 4], vec![1.0; 4]).unwrap();
        assert!(matches!(
            s.update(&PUBLISHED_GROUPS[..1], 50, 0),
            Err(Error::ShapeMismatch(_))
        ));
        assert!(matches!(
            s.update_bests_standard(&[0.0; 5]),
            Err(Error::ShapeMismatch(_))
        ));
        assert!(s.reset(vec![0.0; 3]).is_err());
    }

    #[test]
    fn all_infinite_fitness_changes_nothing() {
        let mut s = Swarm::new(2, 3, vec![0.0; 2], vec![1.0; 2]).unwrap();
        s.reset((0..12).map(|i| i as f64 / 12.0).collect()).unwrap();
        let before = s.clone();
        s.update_bests_standard(&[f64::INFINITY; 6]).unwrap();
        assert_eq!(s, before);
    }

    #[test]
    fn global_minimum_becomes_tbest() {
        let mut s = Swarm::new(2, 3, vec![0.0; 2], vec![1.0; 2]).unwrap();
        s.reset((0..12).map(|i| i as f64 / 12.0).collect()).unwrap();
        s.update_bests_standard(&[5.0, 4.0, 3.0, 9.0, -1.0, 2.0]).unwrap();
        assert_eq!(s.tbest_f, -1.0);
        assert_eq!(s.tbest_x, s.particle(1, 1).to_vec());
        assert_eq!(s.gbest_f, vec![3.0, -1.0]);
    }

    #[test]
    fn relaxed_positive_regime_trace() {
        let mut s = one_particle(1.0);
        s.pbest_f = vec![10.0];
        s.gbest_f = vec![10.0];
        s.tbest_f = 10.0;
        s.tbest_x = vec![-5.0];
        s.update_bests_relaxed_with(&[11.0], || 1.2).unwrap();
        assert_eq!(s.tbest_x, vec![1.0]);
        assert_eq!(s.tbest_f, 10.0);
        assert_eq!(s.pbest_f, vec![10.0]);
    }

    #[test]
    fn relaxed_negative_regime_trace() {
        let mut s = one_particle(1.0);
        s.pbest_f = vec![-0.002];
        s.gbest_f = vec![-0.002];
        s.tbest_f = -0.002;
        s.tbest_x = vec![-5.0];
        s.update_bests_relaxed_with(&[-0.001], || 0.9).unwrap();
        assert_eq!(s.tbest_x, vec![-5.0]);
        assert_eq!(s.tbest_f, -0.002);
    }

    #[test]
    fn relaxed_rejects_nonpositive_lambda() {
        let mut s = one_particle(1.0);
        let mut r = ChaCha8Rng::seed_from_u64(0);
        assert!(s.update_bests_relaxed(&[1.0], 0.0, &mut r).is_err());
        assert!(s.update_bests_relaxed(&[1.0], -0.5, &mut r).is_err());
    }

    #[test]
    fn seeded_updates_reproduce() {
        let run = || {
            let mut s = Swarm::new(3, 5, vec![0.0; 4], vec![10.0; 4]).unwrap();
            s.reset((0..60).map(|i| (i * 7 % 11) as f64).collect()).unwrap();
            for it in 0..10 {
                let f: Vec<f64> = (0..15).map(|i| ((i * 13 + it * 5) % 17) as f64).collect();
                s.update_bests_standard(&f).unwrap();
                s.update(&PUBLISHED_GROUPS[..3], 10, 99).unwrap();
            }
            s
        };
        assert_eq!(run(), run());
    }
}

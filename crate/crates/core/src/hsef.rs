//! Offline hyperparameter evolution.
//!
//! A small upper-level swarm searches over the 53-component vector ξ (five
//! objective weights plus six search parameters for each of the eight
//! planner groups). Each ξ is scored by running full navigation episodes
//! with it; because episodes are noisy, best positions are updated with the
//! relaxed rule.

use std::path::Path as FsPath;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::environment::ScenarioSpec;
use crate::error::{Error, Result};
use crate::fitness::GppParams;
use crate::planner::{run_episode, OkayPlanner, PlannerConfig};
use crate::rng;
use crate::swarm::{GroupParams, Swarm, PUBLISHED_GROUPS};

pub const GPP_LEN: usize = 5;
pub const GROUP_LEN: usize = 6;
pub const XI_GROUPS: usize = 8;
pub const XI_LEN: usize = GPP_LEN + XI_GROUPS * GROUP_LEN;

/// Identifier written into every hyperparameter file.
pub const PARAMS_SCHEMA: &str = "okayplan-params/1";

/// Objective weights plus per-group search parameters for the planner.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Xi {
    pub gpp: GppParams,
    pub groups: Vec<GroupParams>,
}

#[derive(Serialize, Deserialize)]
struct ParamsFile {
    schema: String,
    #[serde(flatten)]
    xi: Xi,
}

impl Xi {
    pub fn published() -> Self {
        Xi {
            gpp: GppParams::PUBLISHED,
            groups: PUBLISHED_GROUPS.to_vec(),
        }
    }

    /// Flat layout: `[alpha, beta, mu, nu, iota]` then, per group,
    /// `[omega_init, omega_end, v_limit, c1, c2, c3]`.
    pub fn to_vec(&self) -> Vec<f64> {
        let g = &self.gpp;
        let mut v = vec![g.alpha, g.beta, g.mu, g.nu, g.iota];
        for p in &self.groups {
            v.extend([p.omega_init, p.omega_end, p.v_limit, p.c1, p.c2, p.c3]);
        }
        v
    }

    pub fn from_slice(v: &[f64]) -> Result<Self> {
        if v.len() != XI_LEN {
            return Err(Error::ShapeMismatch(format!(
                "hyperparameter vector has {} components, expected {XI_LEN}",
                v.len()
            )));
        }
        let gpp = GppParams {
            alpha: v[0],
            beta: v[1],
            mu: v[2],
            nu: v[3],
            iota: v[4],
        };
        let groups = v[GPP_LEN..]
            .chunks(GROUP_LEN)
            .map(|c| GroupParams {
                omega_init: c[0],
                omega_end: c[1],
                v_limit: c[2],
                c1: c[3],
                c2: c[4],
                c3: c[5],
            })
            .collect();
        Ok(Xi { gpp, groups })
    }

    pub fn validate(&self) -> Result<()> {
        if self.groups.len() != XI_GROUPS {
            return Err(Error::ShapeMismatch(format!(
                "{} groups in hyperparameters, expected {XI_GROUPS}",
                self.groups.len()
            )));
        }
        self.gpp.validate()?;
        for g in &self.groups {
            g.validate()?;
        }
        Ok(())
    }

    /// Planner configuration using these hyperparameters on top of `base`.
    #[must_use]
    pub fn apply(&self, base: &PlannerConfig) -> PlannerConfig {
        PlannerConfig {
            groups: self.groups.len(),
            gpp: self.gpp,
            group_params: self.groups.clone(),
            ..base.clone()
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let file = ParamsFile {
            schema: PARAMS_SCHEMA.into(),
            xi: self.clone(),
        };
        Ok(serde_json::to_string_pretty(&file)? + "\n")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ParamsFile = serde_json::from_str(text)?;
        if file.schema != PARAMS_SCHEMA {
            return Err(Error::InvalidConfig(format!(
                "unsupported params schema {:?}, expected {PARAMS_SCHEMA:?}",
                file.schema
            )));
        }
        file.xi.validate()?;
        Ok(file.xi)
    }

    pub fn load(path: &FsPath) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn save(&self, path: &FsPath) -> Result<()> {
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }
}

/// Per-component search box for ξ.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct XiBounds {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Default for XiBounds {
    fn default() -> Self {
        let mut lower = vec![0.0, 1.0, 0.0, 1.0, 0.0];
        let mut upper = vec![10.0, 8.0, 10.0, 8.0, 10.0];
        for _ in 0..XI_GROUPS {
            lower.extend([0.1, 0.1, 0.1, 1.0, 1.0, 1.0]);
            upper.extend([0.9, 0.9, 0.8, 2.0, 2.0, 2.0]);
        }
        XiBounds { lower, upper }
    }
}

impl XiBounds {
    pub fn contains(&self, xi: &Xi) -> bool {
        xi.to_vec()
            .iter()
            .zip(self.lower.iter().zip(&self.upper))
            .all(|(v, (lo, hi))| v >= lo && v <= hi)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "lowercase")]
pub enum UpdateRule {
    Standard,
    Relaxed { lambda: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvolutionConfig {
    pub h_groups: usize,
    pub h_particles: usize,
    pub lambda: f64,
    pub generations: usize,
    /// Episodes per ξ evaluation; their scenario seeds are fresh for every
    /// (generation, particle) pair.
    pub episodes: usize,
    pub scenario: ScenarioSpec,
    /// Overrides the scenario's tick budget when set.
    pub max_ticks: Option<u32>,
    pub bounds: XiBounds,
    /// Search parameters of the upper-level swarm itself.
    pub h_search_params: Vec<GroupParams>,
    /// Planner sizes used inside each episode; its weights and group
    /// parameters are replaced by the ξ under evaluation.
    pub planner: PlannerConfig,
}

impl Default for EvolutionConfig {
    fn default() -> Self {
        EvolutionConfig {
            h_groups: 8,
            h_particles: 10,
            lambda: 0.4,
            generations: 300,
            episodes: 3,
            scenario: ScenarioSpec::preset(crate::environment::Preset::Simple),
            max_ticks: None,
            bounds: XiBounds::default(),
            h_search_params: PUBLISHED_GROUPS.to_vec(),
            planner: PlannerConfig::default(),
        }
    }
}

impl EvolutionConfig {
    pub fn validate(&self) -> Result<()> {
        check_lambda(self.lambda)?;
        if self.h_groups == 0 || self.h_particles == 0 || self.generations == 0 || self.episodes == 0 {
            return Err(Error::InvalidConfig(
                "h_groups, h_particles, generations and episodes must be positive".into(),
            ));
        }
        if self.h_search_params.len() != self.h_groups {
            return Err(Error::InvalidConfig(format!(
                "{} search parameter sets for {} upper-level groups",
                self.h_search_params.len(),
                self.h_groups
            )));
        }
        if self.bounds.lower.len() != XI_LEN || self.bounds.upper.len() != XI_LEN {
            return Err(Error::ShapeMismatch(format!("ξ bounds must have {XI_LEN} components")));
        }
        if self.planner.groups != XI_GROUPS {
            return Err(Error::InvalidConfig(format!(
                "planner must have {XI_GROUPS} groups to take ξ"
            )));
        }
        self.scenario.validate()
    }
}

pub fn check_lambda(lambda: f64) -> Result<()> {
    if lambda > 0.0 && lambda <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidConfig(format!("lambda must lie in (0, 1], got {lambda}")))
    }
}

/// Mean navigation score of `xi` over one episode per scenario seed. Lies in
/// `[-1/d, 0]` where `d` is the shortest travel any episode could need.
pub fn score_xi(xi: &Xi, scenario: &ScenarioSpec, seeds: &[u64], base: &PlannerConfig) -> Result<f64> {
    if seeds.is_empty() {
        return Ok(0.0);
    }
    let cfg = xi.apply(base);
    let mut total = 0.0;
    for &seed in seeds {
        let world = scenario.realize(seed);
        let mut planner = OkayPlanner::new(cfg.clone())?;
        let (m, _) = run_episode(&world, &mut planner, seed, false)?;
        total += m.fitness;
    }
    Ok(total / seeds.len() as f64)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenerationStats {
    pub generation: usize,
    /// Mean score over the whole upper-level population this generation.
    pub mean_fitness: f64,
    /// Best recorded value so far.
    pub best_fitness: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvolutionResult {
    pub best_xi: Xi,
    pub best_fitness: f64,
    pub history: Vec<GenerationStats>,
}

/// Runs the evolution with the relaxed rule at `cfg.lambda`.
pub fn evolve(cfg: &EvolutionConfig, seed: u64) -> Result<EvolutionResult> {
    evolve_with_rule(cfg, UpdateRule::Relaxed { lambda: cfg.lambda }, seed)
}

pub fn evolve_with_rule(cfg: &EvolutionConfig, rule: UpdateRule, seed: u64) -> Result<EvolutionResult> {
    cfg.validate()?;
    if let UpdateRule::Relaxed { lambda } = rule {
        check_lambda(lambda)?;
    }
    let mut scenario = cfg.scenario.clone();
    if let Some(t) = cfg.max_ticks {
        scenario.max_ticks = t;
    }

    let lower = cfg.bounds.lower.clone();
    let upper = cfg.bounds.upper.clone();
    let mut swarm = Swarm::new(cfg.h_groups, cfg.h_particles, lower.clone(), upper.clone())?;
    let mut init_rng = rng::stream(&[rng::TAG_EVOLVE, seed]);
    let init = (0..swarm.population())
        .flat_map(|_| (0..XI_LEN).map(|d| (d, init_rng.gen::<f64>())).collect::<Vec<_>>())
        .map(|(d, u)| lower[d] + u * (upper[d] - lower[d]))
        .collect();
    swarm.reset(init)?;
    let update_seed = rng::derive(&[rng::TAG_EVOLVE, seed, 1]);

    let mut history = Vec::with_capacity(cfg.generations);
    for gen in 0..cfg.generations {
        let scores = swarm
            .x
            .par_chunks(XI_LEN)
            .enumerate()
            .map(|(i, z)| {
                let seeds: Vec<u64> = (0..cfg.episodes)
                    .map(|e| rng::derive(&[rng::TAG_EVOLVE, seed, gen as u64, i as u64, e as u64]))
                    .collect();
                score_xi(&Xi::from_slice(z)?, &scenario, &seeds, &cfg.planner)
            })
            .collect::<Result<Vec<f64>>>()?;

        match rule {
            UpdateRule::Standard => swarm.update_bests_standard(&scores)?,
            UpdateRule::Relaxed { lambda } => {
                let mut r = rng::stream(&[rng::TAG_BESTS, seed, gen as u64]);
                swarm.update_bests_relaxed(&scores, lambda, &mut r)?
            }
        }
        history.push(GenerationStats {
            generation: gen,
            mean_fitness: crate::planner::mean(&scores),
            best_fitness: swarm.tbest_f,
        });
        if gen + 1 < cfg.generations {
            swarm.update(&cfg.h_search_params, cfg.generations, update_seed)?;
        }
    }

    Ok(EvolutionResult {
        best_xi: Xi::from_slice(&swarm.tbest_x)?,
        best_fitness: swarm.tbest_f,
        history,
    })
}

/// One row of `history.csv`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HistoryRow {
    pub lambda: f64,
    pub seed: u64,
    pub generation: usize,
    pub mean_fitness: f64,
    pub best_fitness: f64,
}

pub const HISTORY_SCHEMA: &str = "# schema: okayplan-history/1";

/// Evolves once per (λ, seed) pair.
pub fn lambda_grid_search(lambdas: &[f64], seeds: &[u64], cfg: &EvolutionConfig) -> Result<Vec<HistoryRow>> {
    let mut rows = Vec::new();
    for &lambda in lambdas {
        check_lambda(lambda)?;
        for &seed in seeds {
            let cfg = EvolutionConfig {
                lambda,
                ..cfg.clone()
            };
            rows.extend(history_rows(lambda, seed, &evolve(&cfg, seed)?.history));
        }
    }
    Ok(rows)
}

pub fn history_rows(lambda: f64, seed: u64, history: &[GenerationStats]) -> Vec<HistoryRow> {
    history
        .iter()
        .map(|h| HistoryRow {
            lambda,
            seed,
            generation: h.generation,
            mean_fitness: h.mean_fitness,
            best_fitness: h.best_fitness,
        })
        .collect()
}

/// Per-λ curves averaged over seeds: one row per (λ, generation).
pub fn average_curves(rows: &[HistoryRow]) -> Vec<HistoryRow> {
    let mut keys: Vec<(f64, usize)> = rows.iter().map(|r| (r.lambda, r.generation)).collect();
    keys.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    keys.dedup();
    keys.into_iter()
        .map(|(lambda, generation)| {
            let sel: Vec<&HistoryRow> = rows
                .iter()
                .filter(|r| r.lambda == lambda && r.generation == generation)
                .collect();
            let n = sel.len() as f64;
            HistoryRow {
                lambda,
                seed: 0,
                generation,
                mean_fitness: sel.iter().map(|r| r.mean_fitness).sum::<f64>() / n,
                best_fitness: sel.iter().map(|r| r.best_fitness).sum::<f64>() / n,
            }
        })
        .collect()
}

pub fn write_history(path: &FsPath, rows: &[HistoryRow]) -> Result<()> {
    let mut buf = format!("{HISTORY_SCHEMA}\n").into_bytes();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        for r in rows {
            w.serialize(r)?;
        }
        w.flush().map_err(|e| Error::io(path, e))?;
    }
    std::fs::write(path, buf).map_err(|e| Error::io(path, e))
}

/// λ values of the default grid: 0.2 to 1.0 in steps of 0.1.
pub fn default_lambda_grid() -> Vec<f64> {
    (2..=10).map(|i| i as f64 / 10.0).collect()
}

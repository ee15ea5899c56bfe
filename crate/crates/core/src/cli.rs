//! Command-line front end. `main.rs` only parses and forwards here, so the
//! commands are callable from tests.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path as FsPath, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::baselines::{print_summary, run_entries, summarize, write_comparison, Entry};
use crate::environment::{write_trace, Preset, ScenarioSpec};
use crate::error::{Error, Result};
use crate::fitness::Normalization;
use crate::hsef::{
    average_curves, default_lambda_grid, evolve, history_rows, lambda_grid_search, write_history, EvolutionConfig,
    Xi,
};
use crate::planner::{run_episode, InitMode, OkayPlanner, PlannerConfig};
use crate::render::{render_trace, Viewport};

pub const TABLES34_JSON: &str = include_str!("../params/tables34.json");
pub const NO_RELAX_JSON: &str = include_str!("../params/no_relax.json");

#[derive(Parser, Debug)]
#[command(name = "okayplan", version, about = "Swarm-based global path planning among moving obstacles")]
pub struct Cli {
    /// Worker threads; OKAYPLAN_THREADS takes precedence.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run one navigation episode and write its trace.
    Plan(PlanArgs),
    /// Compare planners, or run the ablation matrix, over a seed range.
    Bench(BenchArgs),
    /// Evolve planner hyperparameters.
    Evolve(EvolveArgs),
    /// Evolve once per (lambda, seed) and write the fitness curves.
    LambdaGrid(LambdaGridArgs),
    /// Turn a trace into SVG frames and a summary CSV.
    Render(RenderArgs),
    /// Repeat the invocation recorded in a manifest.
    Rerun(RerunArgs),
}

#[derive(Args, Debug, Clone)]
pub struct WorldArgs {
    #[arg(long, default_value = "simple")]
    pub preset: String,
    /// Scenario JSON file; overrides --preset.
    #[arg(long)]
    pub scenario: Option<PathBuf>,
}

impl WorldArgs {
    pub fn spec(&self) -> Result<ScenarioSpec> {
        match &self.scenario {
            Some(path) => ScenarioSpec::load(path),
            None => Ok(ScenarioSpec::preset(self.preset.parse::<Preset>()?)),
        }
    }
}

#[derive(Args, Debug, Clone, Default)]
pub struct PlannerArgs {
    /// Hyperparameter file (objective weights and group parameters).
    #[arg(long)]
    pub params: Option<PathBuf>,
    /// Drop the kinematic-segment penalty.
    #[arg(long)]
    pub no_okaop: bool,
    /// Freeze the normalization factor at its first-tick value.
    #[arg(long)]
    pub no_dyn_norm: bool,
    /// Use band initialization around the previous path instead.
    #[arg(long)]
    pub no_dpi: bool,
    /// Share of particles seeded near the previous path (with --no-dpi).
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Half-width in meters of that band (with --no-dpi).
    #[arg(long)]
    pub rho: Option<f64>,
    /// Particles per group.
    #[arg(long)]
    pub particles: Option<usize>,
    /// Iteration cap per planning tick.
    #[arg(long)]
    pub iterations: Option<usize>,
}

impl PlannerArgs {
    pub fn config(&self) -> Result<PlannerConfig> {
        let mut cfg = PlannerConfig::default();
        if let Some(path) = &self.params {
            cfg = Xi::load(path)?.apply(&cfg);
        }
        if let Some(n) = self.particles {
            cfg.particles = n;
        }
        if let Some(t) = self.iterations {
            cfg.max_iterations = t;
            cfg.min_iterations = cfg.min_iterations.min(t);
        }
        if self.no_okaop {
            cfg.gpp = cfg.gpp.without_kinematics();
        }
        if self.no_dyn_norm {
            cfg.normalization = Normalization::FixedInitial;
        }
        if self.no_dpi {
            let InitMode::Pi { gamma, rho } = InitMode::PI_DEFAULT else {
                unreachable!()
            };
            cfg.init = InitMode::Pi {
                gamma: self.gamma.unwrap_or(gamma),
                rho: self.rho.unwrap_or(rho),
            };
        } else if self.gamma.is_some() || self.rho.is_some() {
            return Err(Error::InvalidConfig("--gamma and --rho only apply with --no-dpi".into()));
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Args, Debug, Clone)]
pub struct PlanArgs {
    #[command(flatten)]
    pub world: WorldArgs,
    #[command(flatten)]
    pub planner: PlannerArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "okayplan-out/plan")]
    pub out: PathBuf,
}

#[derive(Args, Debug, Clone)]
pub struct BenchArgs {
    #[command(flatten)]
    pub world: WorldArgs,
    #[command(flatten)]
    pub planner: PlannerArgs,
    /// Inclusive range `a..b`, a single seed, or a comma list.
    #[arg(long, default_value = "0..99")]
    pub seeds: String,
    #[arg(long, default_value = "okayplan,astar,rrt,rrt_star", value_delimiter = ',')]
    pub algos: Vec<String>,
    /// Run the full planner and its four ablations instead of --algos.
    #[arg(long)]
    pub ablations: bool,
    /// Hyperparameters evolved without relaxation, for the ablation row.
    #[arg(long)]
    pub no_relax_params: Option<PathBuf>,
    #[arg(long, default_value = "okayplan-out/bench")]
    pub out: PathBuf,
}

#[derive(Args, Debug, Clone)]
pub struct EvolveShared {
    #[command(flatten)]
    pub world: WorldArgs,
    #[arg(long, default_value_t = 300)]
    pub generations: usize,
    /// Episodes per hyperparameter evaluation.
    #[arg(long, default_value_t = 3)]
    pub episodes: usize,
    /// Upper-level particles per group.
    #[arg(long, default_value_t = 10)]
    pub h_particles: usize,
    /// Planner particles per group inside each episode.
    #[arg(long)]
    pub particles: Option<usize>,
    /// Planner iteration cap inside each episode.
    #[arg(long)]
    pub iterations: Option<usize>,
    #[arg(long)]
    pub max_ticks: Option<u32>,
}

impl EvolveShared {
    pub fn config(&self, lambda: f64) -> Result<EvolutionConfig> {
        let mut planner = PlannerConfig::default();
        if let Some(n) = self.particles {
            planner.particles = n;
        }
        if let Some(t) = self.iterations {
            planner.max_iterations = t;
            planner.min_iterations = planner.min_iterations.min(t);
        }
        let cfg = EvolutionConfig {
            h_particles: self.h_particles,
            lambda,
            generations: self.generations,
            episodes: self.episodes,
            scenario: self.world.spec()?,
            max_ticks: self.max_ticks,
            planner,
            ..EvolutionConfig::default()
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Args, Debug, Clone)]
pub struct EvolveArgs {
    #[command(flatten)]
    pub shared: EvolveShared,
    #[arg(long, default_value_t = 0.4)]
    pub lambda: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "okayplan-out/evolve")]
    pub out: PathBuf,
}

#[derive(Args, Debug, Clone)]
pub struct LambdaGridArgs {
    #[command(flatten)]
    pub shared: EvolveShared,
    /// Comma list; defaults to 0.2, 0.3, ..., 1.0.
    #[arg(long, value_delimiter = ',')]
    pub lambdas: Vec<f64>,
    #[arg(long, default_value = "0..4")]
    pub seeds: String,
    #[arg(long, default_value = "okayplan-out/lambda-grid")]
    pub out: PathBuf,
}

#[derive(Args, Debug, Clone)]
pub struct RenderArgs {
    /// Trace file written by `plan`.
    pub trace: PathBuf,
    /// World the trace was recorded in, for the viewport size.
    #[command(flatten)]
    pub world: WorldArgs,
    #[arg(long, default_value = "okayplan-out/frames")]
    pub out: PathBuf,
}

#[derive(Args, Debug, Clone)]
pub struct RerunArgs {
    pub manifest: PathBuf,
    /// Write to this directory instead of the recorded one.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Written next to every command's outputs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    /// Arguments after the program name, enough to repeat the run.
    pub argv: Vec<String>,
    pub config_paths: Vec<PathBuf>,
    pub seeds: Vec<u64>,
    pub out: PathBuf,
    pub version: String,
    /// Seconds since the Unix epoch.
    pub timestamp: u64,
}

pub const MANIFEST_FILE: &str = "manifest.json";

impl RunManifest {
    pub fn load(path: &FsPath) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }
}

fn version_string() -> String {
    let describe = std::process::Command::new("git")
        .args(["describe", "--always", "--dirty"])
        .output()
        .ok()
        .filter(|o| o.status.success())
        .map(|o| String::from_utf8_lossy(&o.stdout).trim().to_string());
    match describe {
        Some(d) if !d.is_empty() => format!("{} ({d})", env!("CARGO_PKG_VERSION")),
        _ => env!("CARGO_PKG_VERSION").to_string(),
    }
}

fn write_manifest(out: &FsPath, command: &str, argv: &[String], configs: Vec<PathBuf>, seeds: Vec<u64>) -> Result<()> {
    let manifest = RunManifest {
        command: command.to_string(),
        argv: argv.to_vec(),
        config_paths: configs,
        seeds,
        out: out.to_path_buf(),
        version: version_string(),
        timestamp: std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0),
    };
    let path = out.join(MANIFEST_FILE);
    let text = serde_json::to_string_pretty(&manifest)? + "\n";
    std::fs::write(&path, text).map_err(|e| Error::io(&path, e))
}

fn write_json(path: &FsPath, value: &impl Serialize) -> Result<()> {
    let text = serde_json::to_string_pretty(value)? + "\n";
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn create_dir(dir: &FsPath) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

/// Parses `a..b` (inclusive), `a`, or `a,b,c`.
pub fn parse_seeds(text: &str) -> Result<Vec<u64>> {
    let bad = || Error::InvalidConfig(format!("bad seed list {text:?}; expected a..b, a, or a,b,c"));
    let text = text.trim();
    if let Some((a, b)) = text.split_once("..") {
        let a: u64 = a.trim().parse().map_err(|_| bad())?;
        let b: u64 = b.trim().trim_start_matches('=').parse().map_err(|_| bad())?;
        if b < a {
            return Err(bad());
        }
        return Ok((a..=b).collect());
    }
    text.split(',').map(|s| s.trim().parse().map_err(|_| bad())).collect()
}

fn configure_threads(jobs: Option<usize>) {
    let from_env = std::env::var("OKAYPLAN_THREADS").ok().and_then(|v| v.parse().ok());
    if let Some(n) = from_env.or(jobs) {
        // Only the first call in a process can size the global pool.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run_from<I, T>(args: I, out: &mut dyn Write) -> Result<()>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = Cli::try_parse_from(&args).map_err(|e| Error::InvalidConfig(e.to_string()))?;
    let argv: Vec<String> = args.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect();
    run(cli, &argv, out)
}

pub fn run(cli: Cli, argv: &[String], out: &mut dyn Write) -> Result<()> {
    configure_threads(cli.jobs);
    match cli.command {
        Command::Plan(a) => cmd_plan(&a, argv, out),
        Command::Bench(a) => cmd_bench(&a, argv, out),
        Command::Evolve(a) => cmd_evolve(&a, argv, out),
        Command::LambdaGrid(a) => cmd_lambda_grid(&a, argv, out),
        Command::Render(a) => cmd_render(&a, out),
        Command::Rerun(a) => cmd_rerun(&a, out),
    }
}

fn io_out(e: std::io::Error) -> Error {
    Error::io(FsPath::new("<stdout>"), e)
}

fn config_paths(world: &WorldArgs, extra: &[&Option<PathBuf>]) -> Vec<PathBuf> {
    world
        .scenario
        .iter()
        .chain(extra.iter().filter_map(|p| p.as_ref()))
        .cloned()
        .collect()
}

pub fn cmd_plan(a: &PlanArgs, argv: &[String], out: &mut dyn Write) -> Result<()> {
    let spec = a.world.spec()?;
    let cfg = a.planner.config()?;
    let scenario = spec.realize(a.seed);
    let mut planner = OkayPlanner::new(cfg)?;
    let (m, trace) = run_episode(&scenario, &mut planner, a.seed, true)?;

    create_dir(&a.out)?;
    write_trace(&a.out.join("trace.jsonl"), &trace)?;
    write_json(
        &a.out.join("metrics.json"),
        &serde_json::json!({
            "seed": m.seed,
            "status": m.status,
            "arrived": m.arrived,
            "ticks": m.ticks,
            "travel_distance_m": m.travel_distance,
            "fitness": m.fitness,
        }),
    )?;
    write_json(
        &a.out.join("timing.json"),
        &serde_json::json!({
            "mean_plan_time_s": m.mean_plan_time(),
            "std_plan_time_s": m.std_plan_time(),
            "plan_times_s": m.plan_times,
        }),
    )?;
    write_manifest(&a.out, "plan", argv, config_paths(&a.world, &[&a.planner.params]), vec![a.seed])?;

    writeln!(out, "status:            {:?} after {} ticks", m.status, m.ticks).map_err(io_out)?;
    writeln!(out, "fitness:           {:.6}", m.fitness).map_err(io_out)?;
    writeln!(out, "travel distance:   {:.1} m", m.travel_distance).map_err(io_out)?;
    writeln!(out, "arrival:           {}", if m.arrived { "yes" } else { "no" }).map_err(io_out)?;
    writeln!(
        out,
        "time per planning: {:.4} ± {:.4} s",
        m.mean_plan_time(),
        m.std_plan_time()
    )
    .map_err(io_out)?;
    Ok(())
}

/// The full planner plus its four ablations.
pub fn ablation_entries(base: &PlannerConfig, no_relax: &PlannerConfig, gamma: f64, rho: f64) -> Vec<Entry> {
    let variant = |label: &str, config: PlannerConfig| Entry {
        label: label.to_string(),
        algorithm: "okayplan".into(),
        config,
    };
    vec![
        variant("okayplan", base.clone()),
        variant(
            "okayplan-no-okaop",
            PlannerConfig {
                gpp: base.gpp.without_kinematics(),
                ..base.clone()
            },
        ),
        variant(
            "okayplan-no-dyn-norm",
            PlannerConfig {
                normalization: Normalization::FixedInitial,
                ..base.clone()
            },
        ),
        variant(
            "okayplan-no-dpi",
            PlannerConfig {
                init: InitMode::Pi { gamma, rho },
                ..base.clone()
            },
        ),
        variant("okayplan-no-relax", no_relax.clone()),
    ]
}

pub fn cmd_bench(a: &BenchArgs, argv: &[String], out: &mut dyn Write) -> Result<()> {
    let spec = a.world.spec()?;
    let seeds = parse_seeds(&a.seeds)?;
    let entries = if a.ablations {
        let base = PlannerArgs {
            no_dpi: false,
            gamma: None,
            rho: None,
            ..a.planner.clone()
        }
        .config()?;
        let no_relax_xi = match &a.no_relax_params {
            Some(p) => Xi::load(p)?,
            None => Xi::from_json(NO_RELAX_JSON)?,
        };
        let InitMode::Pi { gamma, rho } = InitMode::PI_DEFAULT else {
            unreachable!()
        };
        ablation_entries(
            &base,
            &no_relax_xi.apply(&base),
            a.planner.gamma.unwrap_or(gamma),
            a.planner.rho.unwrap_or(rho),
        )
    } else {
        let cfg = a.planner.config()?;
        a.algos.iter().map(|name| Entry::new(name.trim(), &cfg)).collect()
    };
    let rows = run_entries(&entries, &spec, &seeds)?;

    create_dir(&a.out)?;
    write_comparison(&a.out.join("comparison.csv"), &rows)?;
    let summaries = summarize(&rows);
    let mut table = Vec::new();
    print_summary(&mut table, &summaries).map_err(io_out)?;
    std::fs::write(a.out.join("summary.txt"), &table).map_err(|e| Error::io(&a.out, e))?;
    write_manifest(
        &a.out,
        "bench",
        argv,
        config_paths(&a.world, &[&a.planner.params, &a.no_relax_params]),
        seeds,
    )?;
    out.write_all(&table).map_err(io_out)
}

pub fn cmd_evolve(a: &EvolveArgs, argv: &[String], out: &mut dyn Write) -> Result<()> {
    let cfg = a.shared.config(a.lambda)?;
    let result = evolve(&cfg, a.seed)?;
    create_dir(&a.out)?;
    result.best_xi.save(&a.out.join("params.json"))?;
    write_history(
        &a.out.join("history.csv"),
        &history_rows(a.lambda, a.seed, &result.history),
    )?;
    write_manifest(&a.out, "evolve", argv, config_paths(&a.shared.world, &[]), vec![a.seed])?;
    writeln!(
        out,
        "best score {:.6} after {} generations; wrote {}",
        result.best_fitness,
        result.history.len(),
        a.out.join("params.json").display()
    )
    .map_err(io_out)
}

pub fn cmd_lambda_grid(a: &LambdaGridArgs, argv: &[String], out: &mut dyn Write) -> Result<()> {
    let lambdas = if a.lambdas.is_empty() {
        default_lambda_grid()
    } else {
        a.lambdas.clone()
    };
    let seeds = parse_seeds(&a.seeds)?;
    let cfg = a.shared.config(lambdas[0])?;
    let rows = lambda_grid_search(&lambdas, &seeds, &cfg)?;
    create_dir(&a.out)?;
    write_history(&a.out.join("history.csv"), &rows)?;
    let curves = average_curves(&rows);
    write_history(&a.out.join("curves.csv"), &curves)?;
    write_manifest(&a.out, "lambda-grid", argv, config_paths(&a.shared.world, &[]), seeds)?;
    for l in &lambdas {
        if let Some(last) = curves.iter().filter(|r| r.lambda == *l).last() {
            writeln!(out, "lambda {l:.1}: final mean fitness {:.6}", last.mean_fitness).map_err(io_out)?;
        }
    }
    Ok(())
}

pub fn cmd_render(a: &RenderArgs, out: &mut dyn Write) -> Result<()> {
    let trace = crate::environment::read_trace(&a.trace)?;
    let spec = a.world.spec()?;
    let frames = render_trace(&trace, &Viewport::new(spec.width, spec.height), &a.out)?;
    writeln!(out, "wrote {} frames to {}", frames.len(), a.out.display()).map_err(io_out)
}

pub fn cmd_rerun(a: &RerunArgs, out: &mut dyn Write) -> Result<()> {
    let manifest = RunManifest::load(&a.manifest)?;
    let mut argv = manifest.argv.clone();
    if let Some(dir) = &a.out {
        let dir = dir.to_string_lossy().into_owned();
        match argv.iter().position(|s| s == "--out") {
            Some(i) if i + 1 < argv.len() => argv[i + 1] = dir,
            _ => {
                if let Some(i) = argv.iter().position(|s| s.starts_with("--out=")) {
                    argv[i] = format!("--out={dir}");
                } else {
                    argv.extend(["--out".to_string(), dir]);
                }
            }
        }
    }
    let mut full = vec!["okayplan".to_string()];
    full.extend(argv);
    run_from(full, out)
}

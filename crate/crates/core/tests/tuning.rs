use okayplan::environment::{ScenarioSpec, Status};
use okayplan::hsef::{
    average_curves, default_lambda_grid, evolve, evolve_with_rule, lambda_grid_search, score_xi, EvolutionConfig,
    UpdateRule, Xi, XiBounds, XI_LEN,
};
use okayplan::planner::{navigation_score, PlannerConfig};
use okayplan::swarm::PUBLISHED_GROUPS;
use proptest::prelude::*;

/// 100 m world with one moving box between start and a drifting target.
const SMALL_WORLD: &str = r#"{
  "name": "small",
  "width": 100.0,
  "height": 100.0,
  "start": [50.0, 5.0],
  "target": [50.0, 70.0],
  "usv_velocity": 6.0,
  "target_velocity": 1.0,
  "max_ticks": 40,
  "arrival_radius": 6.0,
  "obstacles": [
    { "vertices": [[40, 35], [60, 35], [60, 45], [40, 45]], "speed_range": [0.0, 3.0], "motion_mode": "random" }
  ]
}"#;

fn small_world() -> ScenarioSpec {
    ScenarioSpec::from_json(SMALL_WORLD).unwrap()
}

fn small_planner() -> PlannerConfig {
    PlannerConfig {
        particles: 6,
        max_iterations: 8,
        min_iterations: 4,
        ..PlannerConfig::default()
    }
}

fn small_evolution(lambda: f64, generations: usize) -> EvolutionConfig {
    EvolutionConfig {
        h_groups: 2,
        h_particles: 2,
        lambda,
        generations,
        episodes: 1,
        scenario: small_world(),
        h_search_params: PUBLISHED_GROUPS[..2].to_vec(),
        planner: small_planner(),
        ..EvolutionConfig::default()
    }
}

fn uniform_xi(u: &[f64]) -> Xi {
    let b = XiBounds::default();
    let v: Vec<f64> = (0..XI_LEN).map(|i| b.lower[i] + u[i] * (b.upper[i] - b.lower[i])).collect();
    Xi::from_slice(&v).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn score_lies_between_best_travel_and_zero(
        u in prop::collection::vec(0.0..=1.0f64, XI_LEN),
        seed in any::<u64>(),
    ) {
        let spec = small_world();
        let s = score_xi(&uniform_xi(&u), &spec, &[seed, seed ^ 1], &small_planner()).unwrap();
        let floor = -1.0 / spec.realize(seed).min_travel_distance().min(spec.realize(seed ^ 1).min_travel_distance());
        prop_assert!(s <= 0.0 && s >= floor, "{} outside [{}, 0]", s, floor);
    }
}

#[test]
fn enclosed_start_scores_zero() {
    let mut spec = small_world();
    spec.obstacles.push(okayplan::environment::ObstacleSpec {
        vertices: vec![[30.0, 0.0], [70.0, 0.0], [70.0, 20.0], [30.0, 20.0]]
            .into_iter()
            .map(|[x, y]| okayplan::geometry::Point::new(x, y))
            .collect(),
        speed_range: [0.0, 0.0],
        motion_mode: okayplan::environment::MotionMode::Static,
        heading: None,
        turn_range: 0.0,
    });
    assert_eq!(score_xi(&Xi::published(), &spec, &[0, 1, 2], &small_planner()).unwrap(), 0.0);
}

#[test]
fn arrival_scores_inverse_travel() {
    assert_eq!(navigation_score(Status::Arrived, 500.0), -0.002);
    assert_eq!(navigation_score(Status::Collided, 500.0), 0.0);
    assert_eq!(navigation_score(Status::Timeout, 500.0), 0.0);
}

#[test]
fn unit_lambda_reduces_to_the_standard_rule() {
    for seed in 0..3 {
        let cfg = small_evolution(1.0, 4);
        let relaxed = evolve(&cfg, seed).unwrap();
        let standard = evolve_with_rule(&cfg, UpdateRule::Standard, seed).unwrap();
        assert_eq!(relaxed, standard, "seed {seed}");
    }
}

#[test]
fn best_is_monotone_and_inside_bounds() {
    for lambda in [0.3, 1.0] {
        let cfg = small_evolution(lambda, 5);
        let res = evolve(&cfg, 7).unwrap();
        assert_eq!(res.history.len(), 5);
        assert!(res.history.windows(2).all(|w| w[1].best_fitness <= w[0].best_fitness));
        assert!(cfg.bounds.contains(&res.best_xi));
        assert_eq!(res.best_fitness, res.history.last().unwrap().best_fitness);
    }
}

#[test]
fn evolution_replays() {
    let cfg = small_evolution(0.4, 3);
    assert_eq!(evolve(&cfg, 11).unwrap(), evolve(&cfg, 11).unwrap());
}

#[test]
fn grid_has_nine_lambdas_and_averages_per_generation() {
    let grid = default_lambda_grid();
    assert_eq!(grid.len(), 9);
    assert!((grid[0] - 0.2).abs() < 1e-12 && (grid[8] - 1.0).abs() < 1e-12);

    let rows = lambda_grid_search(&[0.5, 1.0], &[0, 1], &small_evolution(0.5, 2)).unwrap();
    assert_eq!(rows.len(), 2 * 2 * 2);
    let curves = average_curves(&rows);
    assert_eq!(curves.len(), 2 * 2);
    let by_hand = (rows[0].mean_fitness + rows[2].mean_fitness) / 2.0;
    assert_eq!(curves[0].mean_fitness, by_hand);
}

#[test]
fn lambda_outside_unit_interval_is_rejected() {
    assert!(evolve(&small_evolution(1.5, 1), 0).is_err());
    assert!(evolve(&small_evolution(0.0, 1), 0).is_err());
}

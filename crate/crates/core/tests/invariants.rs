use sparse_flock::config::{mean_field_1d, preset, validate, BatchMode, Budget, Preset};
use sparse_flock::cost::evaluate;
use sparse_flock::tos::{run, Problem};
use sparse_flock::ControlField;

fn objective_drop(cfg: sparse_flock::ScenarioConfig) -> (f64, f64) {
    let cfg = validate(cfg).unwrap();
    let result = run(&cfg, None).unwrap();
    let first = result.history[0];
    let last = result.history.last().unwrap();
    (first.j1 + first.j2, last.j1 + last.j2)
}

#[test]
fn objective_decreases_on_every_preset() {
    let mut t1 = Preset::Test1.config();
    t1.max_iters = 100;

    let mut t2 = mean_field_1d(400);
    t2.max_iters = 30;

    let mut t3 = Preset::Test3.config();
    t3.n_particles = 400;
    t3.max_iters = 30;

    for (name, cfg) in [("test1", t1), ("test2", t2), ("test3", t3)] {
        let (first, last) = objective_drop(cfg);
        assert!(last < first, "{name}: {last} !< {first}");
    }
}

#[test]
fn reported_cost_matches_reported_control() {
    let mut c = preset("test1").unwrap();
    c.max_iters = 30;
    let cfg = validate(c).unwrap();
    let result = run(&cfg, None).unwrap();
    let problem = Problem::new(cfg.clone());
    let traj = problem.simulate(&result.feasible_control).unwrap();
    assert_eq!(traj, result.final_trajectory);
    let cost = evaluate(&traj, &result.feasible_control, &cfg).unwrap();
    assert_eq!(cost, result.final_cost);
    let last = result.history.last().unwrap();
    assert_eq!((last.j1, last.j2), (cost.j1, cost.j2));
}

#[test]
fn results_do_not_depend_on_worker_count() {
    let mut c = mean_field_1d(1500);
    c.n_steps = 12;
    c.horizon = None;
    let cfg = validate(c).unwrap();
    let problem = Problem::new(cfg.clone());
    let u = ControlField::from_vec(
        cfg.n_steps,
        cfg.n_particles,
        cfg.dim,
        (0..cfg.control_len())
            .map(|k| ((k * 7919) % 13) as f64 / 13.0 - 0.5)
            .collect(),
    );
    let with_threads = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| problem.gradient(&u).unwrap())
    };
    let (t1, g1) = with_threads(1);
    let (t3, g3) = with_threads(3);
    assert_eq!(t1, t3);
    assert_eq!(g1.as_slice(), g3.as_slice());
}

#[test]
fn per_particle_batches_and_redraws_run() {
    let mut c = preset("test1").unwrap();
    c.batch_size = 5;
    c.batch_mode = BatchMode::PerParticle;
    c.redraw_batches = true;
    c.max_iters = 20;
    let cfg = validate(c).unwrap();
    let a = run(&cfg, None).unwrap();
    let b = run(&cfg, None).unwrap();
    assert_eq!(a.history, b.history);
    assert!(a.final_cost.j1 + a.final_cost.j2 < a.history[0].j1 + a.history[0].j2);
}

#[test]
fn unbounded_budget_never_projects() {
    let mut c = preset("test1").unwrap();
    c.budget = Budget::Unbounded;
    let cfg = validate(c).unwrap();
    let problem = Problem::new(cfg.clone());
    let u = ControlField::from_vec(
        cfg.n_steps,
        cfg.n_particles,
        cfg.dim,
        vec![3.0; cfg.control_len()],
    );
    assert!(u.l1_norm() > 120.0);
    assert_eq!(problem.step(&u, 0).unwrap().feasible, u);
}

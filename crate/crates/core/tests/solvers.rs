mod common;

use halpern_vr::counter::EvalCounter;
use halpern_vr::halpern_coco::{self, CocoHalpernConfig};
use halpern_vr::inexact_halpern::{
    self, inner_iteration_count, InnerSchedule, MonotoneHalpernConfig, MonotoneHalpernState, SubproblemOperator,
};
use halpern_vr::problems::{
    exact_resolvent_affine, synthetic_cocoercive, synthetic_monotone, synthetic_strongly_monotone, AffineProblem,
    Constraint, MatrixGame, SamplingMode,
};
use halpern_vr::vr_forb::{self, forb_params, forb_step, run_forb, ForbConfig, ForbState, ProblemSplit, SplitOperator};
use halpern_vr::{FiniteSumProblem, Point, RngStream};

use common::gaussian;

#[test]
fn potential_decreases_on_average() {
    let p = synthetic_cocoercive(8, 4, 1.0, 3).unwrap();
    let u0 = p.initial_point();
    let cfg = CocoHalpernConfig::new(1.0, 31, 0);
    let seeds = 60;
    let mut paths = Vec::new();
    for seed in 0..seeds {
        let cfg = CocoHalpernConfig { seed, ..cfg.clone() };
        let mut state = halpern_coco::initial_step(&p, &u0, &cfg).unwrap();
        let mut path = vec![halpern_coco::potential(&state, &p, &cfg).unwrap()];
        for _ in 1..=30 {
            halpern_coco::step(&mut state, &p, &cfg).unwrap();
            path.push(halpern_coco::potential(&state, &p, &cfg).unwrap());
        }
        paths.push(path);
    }
    for k in 1..=30 {
        let lambda = halpern_coco::lambda_schedule(k).unwrap();
        let diffs: Vec<f64> = paths.iter().map(|c| c[k] - (1.0 - lambda) * c[k - 1]).collect();
        let mean = diffs.iter().sum::<f64>() / seeds as f64;
        let var = diffs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (seeds as f64 - 1.0);
        let se = (var / seeds as f64).sqrt();
        assert!(mean <= 3.0 * se + 1e-12, "k = {k}: mean excess {mean:e}, se {se:e}");
    }
}

#[test]
fn first_potential_is_nonpositive_on_cocoercive_instances() {
    let base = synthetic_cocoercive(5, 4, 1.0, 4).unwrap();
    let mut rng = RngStream::new(6);
    let offsets = (0..5).map(|_| gaussian(4, &mut rng)).collect();
    let orthant = AffineProblem::new(base.matrices().to_vec(), offsets, Constraint::NonnegativeOrthant)
        .unwrap()
        .with_lipschitz(1.0);
    let problems: Vec<Box<dyn FiniteSumProblem>> = vec![
        Box::new(synthetic_cocoercive(8, 4, 1.0, 1).unwrap()),
        Box::new(synthetic_cocoercive(1, 3, 2.0, 2).unwrap()),
        Box::new(orthant),
    ];
    for p in &problems {
        let cfg = CocoHalpernConfig::new(p.constants().lipschitz, 5, 0);
        let state = halpern_coco::initial_step(p.as_ref(), &p.initial_point(), &cfg).unwrap();
        assert!(halpern_coco::potential(&state, p.as_ref(), &cfg).unwrap() <= 1e-9, "{}", p.name());
    }
}

#[test]
fn game_iterates_stay_feasible_and_certify_g() {
    let game = MatrixGame::policeman_burglar(12, 0.8, 5, SamplingMode::Importance).unwrap();
    let blocks = Constraint::SimplexBlocks(vec![12, 12]);
    let cfg = CocoHalpernConfig::new(game.constants().lipschitz, 40, 1);
    let eta = cfg.eta();
    let mut state = halpern_coco::initial_step(&game, &game.initial_point(), &cfg).unwrap();
    for _ in 0..40 {
        halpern_coco::step(&mut state, &game, &cfg).unwrap();
        assert!(blocks.contains(&state.u, 1e-12));
        let back = game.resolvent(eta, &(&state.u + &state.g * eta));
        assert!((back - &state.u).norm() <= 1e-10);
    }
}

#[test]
fn runs_are_reproducible_per_seed() {
    let p = synthetic_monotone(6, 4, 8).unwrap();
    let u0 = p.initial_point();
    let strip = |t: Vec<halpern_vr::TraceRecord>| {
        t.into_iter().map(|r| (r.iter, r.oracle_epochs, r.residual)).collect::<Vec<_>>()
    };
    for seed in [0, 9] {
        let coco = CocoHalpernConfig::new(p.constants().lipschitz, 60, seed);
        assert_eq!(
            strip(halpern_coco::run(&p, &u0, &coco).unwrap().1),
            strip(halpern_coco::run(&p, &u0, &coco).unwrap().1)
        );
        let forb = ForbConfig::new(60, seed);
        assert_eq!(strip(vr_forb::run(&p, &u0, &forb).unwrap().1), strip(vr_forb::run(&p, &u0, &forb).unwrap().1));
        let halpern = MonotoneHalpernConfig::new(p.constants().lipschitz, 8, seed);
        assert_eq!(
            strip(inexact_halpern::run(&p, &u0, &halpern).unwrap().1),
            strip(inexact_halpern::run(&p, &u0, &halpern).unwrap().1)
        );
    }
    let a = vr_forb::run(&p, &u0, &ForbConfig::new(60, 1)).unwrap().0;
    let b = vr_forb::run(&p, &u0, &ForbConfig::new(60, 2)).unwrap().0;
    assert_ne!(a, b);
}

#[test]
fn rng_streams_with_equal_seeds_agree() {
    let (mut a, mut b) = (RngStream::new(42), RngStream::new(42));
    for _ in 0..10_000 {
        assert_eq!(a.uniform().to_bits(), b.uniform().to_bits());
    }
}

#[test]
fn counters_add_across_phases() {
    let mut total = EvalCounter::new(0.25);
    total.charge_full();
    total.charge_components(3);
    let mut phase = EvalCounter::new(0.25);
    phase.charge_full();
    phase.charge_components(5);
    phase.charge_resolvent();
    let expected = total.epochs() + phase.epochs();
    total.absorb(&phase);
    assert_eq!(total.epochs(), expected);
    assert_eq!(total.resolvent_calls(), 1);
}

#[test]
fn forb_keeps_the_solution_fixed() {
    let p = synthetic_strongly_monotone(4, 5, 1.0, 2).unwrap();
    let solution = p.known_solution().unwrap().clone();
    let op = ProblemSplit { problem: &p, mu: 1.0 };
    let params = forb_params(4, p.constants().lipschitz).unwrap();
    let mut rng = RngStream::new(3);
    let mut counter = EvalCounter::new(0.25);
    let mut state = ForbState::new(&op, &solution, &mut counter).unwrap();
    for _ in 0..200 {
        forb_step(&mut state, &op, &params, &mut rng, &mut counter).unwrap();
        assert!((&state.v - &solution).norm() <= 1e-10);
    }
}

#[test]
fn forb_forward_term_is_unbiased() {
    let p = synthetic_monotone(5, 4, 6).unwrap();
    let op = ProblemSplit { problem: &p, mu: 0.0 };
    let mut rng = RngStream::new(1);
    for _ in 0..20 {
        let x = gaussian(4, &mut rng);
        let mean = (0..5).fold(Point::zeros(4), |acc, i| acc + op.eval_sampled(i, &x) * op.sampling().prob(i));
        assert!((mean - op.eval_full(&x)).norm() <= 1e-12 * op.eval_full(&x).norm().max(1.0));
    }
}

#[test]
fn forb_component_calls_average_pn_plus_two() {
    let p = synthetic_strongly_monotone(8, 3, 1.0, 4).unwrap();
    let op = ProblemSplit { problem: &p, mu: 1.0 };
    let params = forb_params(8, p.constants().lipschitz).unwrap();
    let mut rng = RngStream::new(5);
    let mut counter = EvalCounter::new(1.0 / 8.0);
    let steps = 40_000;
    run_forb(&p.initial_point(), steps, &op, &params, &mut rng, &mut counter).unwrap();
    // Each refresh of A(w) counts as n component calls.
    let per_step = (counter.component_calls() as f64 + 8.0 * (counter.full_evals() - 1) as f64) / steps as f64;
    assert!((per_step - 3.0).abs() < 0.1, "{per_step}");
}

#[test]
fn inner_solves_meet_the_inexactness_target() {
    let p = synthetic_monotone(4, 6, 12).unwrap();
    let lipschitz = p.constants().lipschitz;
    let mut cfg = MonotoneHalpernConfig::new(lipschitz, 6, 0);
    cfg.inner_schedule = InnerSchedule::Theoretical;
    let eta = cfg.eta_for(4);
    let mut state = MonotoneHalpernState::new(&p, &p.initial_point(), &cfg).unwrap();
    for k in 0..=5 {
        let exact = exact_resolvent_affine(&p, eta, &state.u).unwrap();
        let target = (&state.u - &exact).norm_squared() / (k as f64 + 2.0).powi(8);
        let op = SubproblemOperator { problem: &p, eta, anchor: state.u.clone() };
        let params = forb_params(4, op.lipschitz()).unwrap();
        let iters = inner_iteration_count(k, 4, eta, lipschitz, InnerSchedule::Theoretical);
        let seeds = 30;
        let mean_err = (0..seeds)
            .map(|s| {
                let mut rng = RngStream::new(1000 + s);
                let mut counter = EvalCounter::new(0.25);
                let v = run_forb(&state.u, iters, &op, &params, &mut rng, &mut counter).unwrap();
                (v - &exact).norm_squared()
            })
            .sum::<f64>()
            / seeds as f64;
        assert!(mean_err <= target * 1.5, "k = {k}: {mean_err:e} vs {target:e}");
        inexact_halpern::outer_step(&mut state, &p, &cfg).unwrap();
    }
}

#[test]
fn outer_iterates_stay_bounded() {
    let p = synthetic_monotone(4, 6, 13).unwrap();
    let solution = p.known_solution().unwrap().clone();
    let u0 = p.initial_point();
    let d0 = (&u0 - &solution).norm_squared();
    let mut cfg = MonotoneHalpernConfig::new(p.constants().lipschitz, 15, 0);
    cfg.inner_schedule = InnerSchedule::Practical { c0: 0.5 };
    let seeds = 20;
    let mut sums = vec![0.0; 16];
    for seed in 0..seeds {
        cfg.seed = seed;
        let mut state = MonotoneHalpernState::new(&p, &u0, &cfg).unwrap();
        while state.k < 15 {
            inexact_halpern::outer_step(&mut state, &p, &cfg).unwrap();
            sums[state.k] += (&state.u - &solution).norm_squared() / seeds as f64;
        }
    }
    assert!(sums[1..].iter().all(|&m| m <= 2.0 * d0 * 1.1), "{sums:?} vs {d0}");
}

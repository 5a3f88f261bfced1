//! Inexact Halpern iteration on the resolvent of `η(F + G)` for monotone,
//! Lipschitz-in-expectation problems.
//!
//! ```text
//! u_{k+1} = λ_k u₀ + (1 − λ_k) J̃_{η(F+G)}(u_k),    λ_k = 1/(k+2)
//! ```
//!
//! where `J̃` runs `M_k` steps of VR-FoRB on the 1-strongly monotone
//! subproblem `0 ∈ ηF(v) + v − u_k + ηG(v)`.

use crate::counter::EvalCounter;
use crate::error::{check_dim, Error, Result};
use crate::problem::{FiniteSumProblem, Point};
use crate::rng::RngStream;
use crate::sampling::SamplingDistribution;
use crate::trace::{RunControl, TraceMetric, TraceRecord, Tracer};
use crate::vr_forb::{forb_params, run_forb, run_forb_certified, ForbParams, SplitOperator};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InnerSchedule {
    /// `M_k = ⌈56 max{n, √n(ηL+1)} ln(1.252(k+2))⌉`.
    Theoretical,
    /// `M_k = max(1, ⌊c₀ n ln(k+2)⌋)`.
    Practical { c0: f64 },
}

impl Default for InnerSchedule {
    fn default() -> Self {
        InnerSchedule::Practical { c0: 0.05 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonotoneHalpernConfig {
    /// Expected Lipschitz constant `L` of the sampled oracle.
    pub lipschitz: f64,
    /// Resolvent step; `√n/L` when unset.
    pub eta: Option<f64>,
    pub max_outer: usize,
    pub seed: u64,
    pub inner_schedule: InnerSchedule,
    /// Replaces the inner step `√(p(1−p))/(2(ηL+1))`.
    pub tau_override: Option<f64>,
    pub control: RunControl,
}

impl MonotoneHalpernConfig {
    pub fn new(lipschitz: f64, max_outer: usize, seed: u64) -> Self {
        Self {
            lipschitz,
            eta: None,
            max_outer,
            seed,
            inner_schedule: InnerSchedule::default(),
            tau_override: None,
            control: RunControl::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lipschitz > 0.0 && self.lipschitz.is_finite()) {
            return Err(Error::InvalidArgument(format!("L = {} must be positive", self.lipschitz)));
        }
        if self.max_outer < 1 {
            return Err(Error::InvalidArgument("max_outer must be at least 1".into()));
        }
        for (name, v) in [("eta", self.eta), ("tau", self.tau_override)] {
            if let Some(x) = v {
                if !(x > 0.0 && x.is_finite()) {
                    return Err(Error::InvalidArgument(format!("{name} = {x} must be positive")));
                }
            }
        }
        if let InnerSchedule::Practical { c0 } = self.inner_schedule {
            if !(c0 > 0.0 && c0.is_finite()) {
                return Err(Error::InvalidArgument(format!("c0 = {c0} must be positive")));
            }
        }
        Ok(())
    }

    pub fn eta_for(&self, n: usize) -> f64 {
        self.eta.unwrap_or((n as f64).sqrt() / self.lipschitz)
    }
}

/// `A(v) = ηF(v) + v − u⁺` and `B = ηG` for a fixed anchor `u⁺`.
pub struct SubproblemOperator<'a> {
    pub problem: &'a dyn FiniteSumProblem,
    pub eta: f64,
    pub anchor: Point,
}

impl SplitOperator for SubproblemOperator<'_> {
    fn dim(&self) -> usize {
        self.problem.dim()
    }

    fn num_components(&self) -> usize {
        self.problem.num_components()
    }

    fn eval_full(&self, u: &Point) -> Point {
        self.problem.eval_full(u) * self.eta + u - &self.anchor
    }

    fn eval_component(&self, i: usize, u: &Point) -> Point {
        self.problem.eval_component(i, u) * self.eta + u - &self.anchor
    }

    fn eval_sampled(&self, i: usize, u: &Point) -> Point {
        self.problem.eval_sampled(i, u) * self.eta + u - &self.anchor
    }

    fn resolvent(&self, tau: f64, u: &Point) -> Point {
        self.problem.resolvent(tau * self.eta, u)
    }

    fn sampling(&self) -> &SamplingDistribution {
        self.problem.sampling()
    }

    fn lipschitz(&self) -> f64 {
        self.eta * self.problem.constants().lipschitz + 1.0
    }

    fn mu(&self) -> f64 {
        1.0
    }

    fn component_cost(&self) -> f64 {
        self.problem.constants().component_cost
    }

    fn effective_components(&self) -> usize {
        self.problem.effective_components()
    }
}

/// `λ_k = 1/(k+2)`.
pub fn outer_lambda(k: usize) -> f64 {
    1.0 / (k as f64 + 2.0)
}

pub fn inner_iteration_count(k: usize, n: usize, eta: f64, lipschitz: f64, schedule: InnerSchedule) -> usize {
    let log = (k as f64 + 2.0).ln();
    match schedule {
        InnerSchedule::Theoretical => {
            let n = n as f64;
            let factor = n.max(n.sqrt() * (eta * lipschitz + 1.0));
            (56.0 * factor * (1.252 * (k as f64 + 2.0)).ln()).ceil() as usize
        }
        InnerSchedule::Practical { c0 } => ((c0 * n as f64 * log).floor() as usize).max(1),
    }
}

/// `‖P^η(u)‖ = ‖u − J_{η(F+G)}(u)‖` given (an approximation of) the resolvent.
pub fn p_eta_norm(u: &Point, resolvent_value: &Point) -> f64 {
    (u - resolvent_value).norm()
}

/// The resolvent point `ū` and its residual `‖F(ū) + ḡ‖` with
/// `ḡ = (u − ū)/η − F(ū)`, which lies in `G(ū)` when `ū` is the exact resolvent.
pub fn convert_to_residual_point(
    problem: &dyn FiniteSumProblem,
    eta: f64,
    u: &Point,
    resolvent_value: &Point,
) -> (Point, f64) {
    let f = problem.eval_full(resolvent_value);
    let g = (u - resolvent_value) / eta - &f;
    let res = (f + g).norm();
    (resolvent_value.clone(), res)
}

#[derive(Debug, Clone)]
pub struct MonotoneHalpernState {
    pub k: usize,
    pub u0: Point,
    pub u: Point,
    /// Last subsolver output and its element of `ηG`.
    pub inner: Option<(Point, Point)>,
    pub counter: EvalCounter,
    pub rng: RngStream,
}

impl MonotoneHalpernState {
    pub fn new(problem: &dyn FiniteSumProblem, u0: &Point, config: &MonotoneHalpernConfig) -> Result<Self> {
        config.validate()?;
        check_dim(problem.dim(), u0.len())?;
        Ok(Self {
            k: 0,
            u0: u0.clone(),
            u: u0.clone(),
            inner: None,
            counter: EvalCounter::new(problem.constants().component_cost),
            rng: RngStream::new(config.seed),
        })
    }
}

fn inner_params(op: &SubproblemOperator<'_>, config: &MonotoneHalpernConfig) -> Result<ForbParams> {
    let mut params = forb_params(op.effective_components(), op.lipschitz())?;
    if let Some(tau) = config.tau_override {
        params.tau = tau;
    }
    Ok(params)
}

pub fn outer_step(
    state: &mut MonotoneHalpernState,
    problem: &dyn FiniteSumProblem,
    config: &MonotoneHalpernConfig,
) -> Result<()> {
    let n = problem.effective_components();
    let eta = config.eta_for(n);
    let op = SubproblemOperator { problem, eta, anchor: state.u.clone() };
    let params = inner_params(&op, config)?;
    let iters = inner_iteration_count(state.k, n, eta, config.lipschitz, config.inner_schedule);
    let (v, b) =
        run_forb_certified(&state.u, iters, &op, &params, &mut state.rng, &mut state.counter).map_err(|e| match e {
            Error::Divergence { detail, .. } => Error::Divergence { iter: state.k + 1, detail },
            other => other,
        })?;
    let lambda = outer_lambda(state.k);
    state.u = &state.u0 * lambda + &v * (1.0 - lambda);
    state.inner = Some((v, b));
    state.k += 1;
    Ok(())
}

/// Runs `⌈42(n+√n) ln(19n)⌉` subsolver steps on the subproblem anchored at
/// `u_k` and returns the result, whose residual is at most twice the target
/// in expectation when `‖P^η(u_k)‖ ≤ ηε`.
pub fn post_process(
    problem: &dyn FiniteSumProblem,
    u_k: &Point,
    config: &MonotoneHalpernConfig,
    rng: &mut RngStream,
    counter: &mut EvalCounter,
) -> Result<Point> {
    let n = problem.effective_components();
    let eta = config.eta_for(n);
    let op = SubproblemOperator { problem, eta, anchor: u_k.clone() };
    let params = inner_params(&op, config)?;
    run_forb(u_k, post_process_iterations(n), &op, &params, rng, counter)
}

pub fn post_process_iterations(n: usize) -> usize {
    let n = n as f64;
    (42.0 * (n + n.sqrt()) * (19.0 * n).ln()).ceil() as usize
}

fn logged_residual(problem: &dyn FiniteSumProblem, state: &MonotoneHalpernState, metric: TraceMetric, eta: f64) -> f64 {
    match (metric, &state.inner) {
        (TraceMetric::Certified, Some((v, b))) => (problem.eval_full(v) + b / eta).norm(),
        _ => problem.natural_residual(&state.u),
    }
}

/// Runs `max_outer` outer steps or until the epoch budget is hit. The trace
/// starts with `u₀` at zero cost. Under the certified metric, each outer step
/// logs `‖F(v) + g‖` at the subsolver output `v`; otherwise the natural
/// residual at `u_k`.
pub fn run(
    problem: &dyn FiniteSumProblem,
    u0: &Point,
    config: &MonotoneHalpernConfig,
) -> Result<(MonotoneHalpernState, Vec<TraceRecord>)> {
    let mut state = MonotoneHalpernState::new(problem, u0, config)?;
    let eta = config.eta_for(problem.effective_components());
    let metric = config.control.metric;
    let mut tracer = Tracer::new(config.control);
    tracer.log(0, 0.0, problem.natural_residual(u0))?;
    while state.k < config.max_outer {
        let previous = state.clone();
        outer_step(&mut state, problem, config)?;
        if tracer.control().over_budget(state.counter.epochs()) {
            state = previous;
            break;
        }
        if tracer.control().should_log(state.k) || state.k == config.max_outer {
            tracer.log(state.k, state.counter.epochs(), logged_residual(problem, &state, metric, eta))?;
        }
    }
    if tracer.last_iter() != Some(state.k) {
        tracer.log(state.k, state.counter.epochs(), logged_residual(problem, &state, metric, eta))?;
    }
    Ok((state, tracer.finish()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::finite_sum_gap;
    use crate::problems::{exact_resolvent_affine, synthetic_monotone, AffineProblem, Constraint};
    use nalgebra::{dvector, DMatrix};

    #[test]
    fn schedules() {
        assert_eq!(outer_lambda(0), 0.5);
        assert!((outer_lambda(8) - 0.1).abs() < 1e-15);
        assert!((0..50).all(|k| outer_lambda(k + 1) < outer_lambda(k)));
        assert_eq!(inner_iteration_count(0, 4, 2.0, 1.0, InnerSchedule::Theoretical), 309);
        assert_eq!(inner_iteration_count(0, 100, 1.0, 1.0, InnerSchedule::Practical { c0: 0.05 }), 3);
        assert_eq!(inner_iteration_count(0, 2, 1.0, 1.0, InnerSchedule::Practical { c0: 0.05 }), 1);
        assert_eq!(post_process_iterations(4), 1092);
    }

    #[test]
    fn subproblem_is_consistent_and_strongly_monotone() {
        let p = synthetic_monotone(4, 5, 2).unwrap();
        let mut rng = RngStream::new(3);
        let anchor = Point::from_fn(5, |_, _| rng.standard_normal());
        let op = SubproblemOperator { problem: &p, eta: 2.0, anchor };
        for _ in 0..50 {
            let a = Point::from_fn(5, |_, _| rng.standard_normal());
            let b = Point::from_fn(5, |_, _| rng.standard_normal());
            let mean = (0..4).fold(Point::zeros(5), |acc, i| acc + op.eval_component(i, &a)) / 4.0;
            assert!((mean - op.eval_full(&a)).norm() < 1e-10);
            let lhs = (op.eval_full(&a) - op.eval_full(&b)).dot(&(&a - &b));
            assert!(lhs >= (&a - &b).norm_squared() - 1e-8);
        }
        assert!(finite_sum_gap(&p, &Point::zeros(5)) < 1e-12);
        assert_eq!(op.lipschitz(), 3.0);
    }

    #[test]
    fn zero_operator_keeps_anchor() {
        let p =
            AffineProblem::new(vec![DMatrix::zeros(2, 2)], vec![Point::zeros(2)], Constraint::Unconstrained).unwrap();
        let cfg = MonotoneHalpernConfig::new(1.0, 5, 0);
        let u0 = dvector![1.0, 2.0];
        let (s, trace) = run(&p, &u0, &cfg).unwrap();
        assert!((s.u - u0).norm() < 1e-15);
        assert_eq!(trace.len(), 6);
    }

    #[test]
    fn p_eta_and_prop1_identity() {
        assert!((p_eta_norm(&dvector![1.0, 1.0], &dvector![0.0, 0.0]) - 2f64.sqrt()).abs() < 1e-15);
        let p = synthetic_monotone(3, 4, 9).unwrap();
        let u = dvector![0.3, -0.2, 1.0, 0.5];
        let eta = 2.0;
        let v = exact_resolvent_affine(&p, eta, &u).unwrap();
        let (_, res) = convert_to_residual_point(&p, eta, &u, &v);
        assert!((res - p_eta_norm(&u, &v) / eta).abs() < 1e-12);
    }

    #[test]
    fn long_inner_run_matches_exact_resolvent() {
        let p = synthetic_monotone(4, 3, 5).unwrap();
        let mut cfg = MonotoneHalpernConfig::new(1.0, 1, 7);
        cfg.inner_schedule = InnerSchedule::Practical { c0: 3000.0 };
        let u0 = dvector![1.0, -1.0, 0.5];
        let mut state = MonotoneHalpernState::new(&p, &u0, &cfg).unwrap();
        outer_step(&mut state, &p, &cfg).unwrap();
        let exact = exact_resolvent_affine(&p, cfg.eta_for(4), &u0).unwrap();
        let expected = &u0 * 0.5 + exact * 0.5;
        assert!((state.u - expected).norm() < 1e-6);
    }

    #[test]
    fn solution_is_fixed() {
        let p = synthetic_monotone(4, 3, 1).unwrap();
        let star = p.known_solution().unwrap().clone();
        let (s, _) = run(&p, &star, &MonotoneHalpernConfig::new(1.0, 5, 2)).unwrap();
        assert!((s.u - star).norm() < 1e-10);
    }

    #[test]
    fn post_process_at_solution() {
        let p = synthetic_monotone(4, 3, 1).unwrap();
        let star = p.known_solution().unwrap().clone();
        let cfg = MonotoneHalpernConfig::new(1.0, 1, 0);
        let mut counter = EvalCounter::new(0.25);
        let out = post_process(&p, &star, &cfg, &mut RngStream::new(4), &mut counter).unwrap();
        assert!((out - star).norm() < 1e-8);
    }

    #[test]
    fn invalid_configs() {
        let p = synthetic_monotone(2, 2, 1).unwrap();
        let mut cfg = MonotoneHalpernConfig::new(1.0, 0, 0);
        assert!(run(&p, &Point::zeros(2), &cfg).is_err());
        cfg.max_outer = 1;
        cfg.eta = Some(-1.0);
        assert!(run(&p, &Point::zeros(2), &cfg).is_err());
    }
}

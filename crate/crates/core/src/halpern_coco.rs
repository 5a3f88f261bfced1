//! Halpern iteration with a PAGE estimator for problems whose components are
//! cocoercive on average.
//!
//! With `η = 1/(4L)`, `λ_k = 2/(k+4)` and `b = ⌈√n⌉`:
//!
//! ```text
//! u₁      = J_{(5η/4)G}(u₀ − (5η/4) F(u₀)),   F̃(u₁) = F(u₁)
//! u_{k+1} = J_{ηG}(λ_k u₀ + (1−λ_k) u_k − η F̃(u_k))
//! ```
//!
//! and `F̃(u_{k+1})` is a PAGE update with snapshot probability `p_{k+1}`.

use crate::counter::EvalCounter;
use crate::error::{check_dim, Error, Result};
use crate::page::PageState;
use crate::problem::{FiniteSumProblem, Point};
use crate::rng::RngStream;
use crate::trace::{metric_value, RunControl, TraceRecord, Tracer};

#[derive(Debug, Clone, PartialEq)]
pub struct CocoHalpernConfig {
    /// Average cocoercivity modulus `L`.
    pub lipschitz: f64,
    pub max_iters: usize,
    pub seed: u64,
    /// Replaces the default step `1/(4L)`.
    pub eta_override: Option<f64>,
    /// Replaces the default minibatch size `⌈√n⌉`.
    pub batch_override: Option<usize>,
    pub control: RunControl,
}

impl CocoHalpernConfig {
    pub fn new(lipschitz: f64, max_iters: usize, seed: u64) -> Self {
        Self { lipschitz, max_iters, seed, eta_override: None, batch_override: None, control: RunControl::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lipschitz > 0.0 && self.lipschitz.is_finite()) {
            return Err(Error::InvalidArgument(format!("L = {} must be positive", self.lipschitz)));
        }
        if self.max_iters < 1 {
            return Err(Error::InvalidArgument("max_iters must be at least 1".into()));
        }
        if let Some(eta) = self.eta_override {
            if !(eta > 0.0 && eta.is_finite()) {
                return Err(Error::InvalidArgument(format!("step {eta} must be positive")));
            }
        }
        Ok(())
    }

    pub fn eta(&self) -> f64 {
        self.eta_override.unwrap_or(1.0 / (4.0 * self.lipschitz))
    }
}

#[derive(Debug, Clone)]
pub struct CocoHalpernState {
    pub k: usize,
    pub u0: Point,
    pub u: Point,
    /// Element of `G(u)` recovered from the resolvent step that produced `u`.
    pub g: Point,
    pub page: PageState,
    pub counter: EvalCounter,
    pub rng: RngStream,
}

/// `λ_k = 2/(k+4)` for `k ≥ 1`.
pub fn lambda_schedule(k: usize) -> Result<f64> {
    if k < 1 {
        return Err(Error::InvalidArgument("λ_k is defined for k ≥ 1".into()));
    }
    Ok(2.0 / (k as f64 + 4.0))
}

/// Snapshot probability `p_{k+1}`: `4/(k+5)` while `k ≤ √n`, then `4/(√n+5)`.
pub fn p_schedule(k: usize, n: usize) -> f64 {
    let root = (n as f64).sqrt();
    if k as f64 <= root {
        4.0 / (k as f64 + 5.0)
    } else {
        4.0 / (root + 5.0)
    }
}

fn resolvent_step(problem: &dyn FiniteSumProblem, step: f64, input: &Point, k: usize) -> Result<(Point, Point)> {
    let out = problem.resolvent(step, input);
    if !out.iter().all(|x| x.is_finite()) {
        return Err(Error::Divergence { iter: k, detail: "non-finite iterate".into() });
    }
    let g = (input - &out) / step;
    Ok((out, g))
}

/// Computes `u₁` and seeds the estimator with `F(u₁)`.
pub fn initial_step(
    problem: &dyn FiniteSumProblem,
    u0: &Point,
    config: &CocoHalpernConfig,
) -> Result<CocoHalpernState> {
    config.validate()?;
    check_dim(problem.dim(), u0.len())?;
    let mut counter = EvalCounter::new(problem.constants().component_cost);
    let step = config.eta() / (2.0 * lambda_schedule(1)?);
    counter.charge_full();
    let input = u0 - problem.eval_full(u0) * step;
    counter.charge_resolvent();
    let (u1, g1) = resolvent_step(problem, step, &input, 1)?;
    let mut page = PageState::init_full(problem, &u1, &mut counter)?;
    if let Some(b) = config.batch_override {
        page = page.with_batch_size(b);
    }
    Ok(CocoHalpernState { k: 1, u0: u0.clone(), u: u1, g: g1, page, counter, rng: RngStream::new(config.seed) })
}

/// One iteration `u_k → u_{k+1}`, including the estimator update.
pub fn step(state: &mut CocoHalpernState, problem: &dyn FiniteSumProblem, config: &CocoHalpernConfig) -> Result<()> {
    let k = state.k;
    let lambda = lambda_schedule(k)?;
    let eta = config.eta();
    let input = &state.u0 * lambda + &state.u * (1.0 - lambda) - &state.page.estimate * eta;
    state.counter.charge_resolvent();
    let (next, g) = resolvent_step(problem, eta, &input, k + 1)?;
    let p = p_schedule(k, problem.effective_components());
    state.page.update(problem, &next, p, &mut state.rng, &mut state.counter)?;
    state.u = next;
    state.g = g;
    state.k = k + 1;
    Ok(())
}

/// `c_k = (√n + 2)(k + 4)/(4L)`.
pub fn potential_weight(k: usize, n: usize, lipschitz: f64) -> f64 {
    ((n as f64).sqrt() + 2.0) * (k as f64 + 4.0) / (4.0 * lipschitz)
}

/// `C_k = (η/(2λ_k))‖F(u_k)+g_k‖² + ⟨F(u_k)+g_k, u_k−u₀⟩ + c_k‖F(u_k)−F̃(u_k)‖²`.
/// Uses one uncounted full evaluation.
pub fn potential(state: &CocoHalpernState, problem: &dyn FiniteSumProblem, config: &CocoHalpernConfig) -> Result<f64> {
    let f = problem.eval_full(&state.u);
    let r = &f + &state.g;
    let lambda = lambda_schedule(state.k)?;
    let c = potential_weight(state.k, problem.effective_components(), config.lipschitz);
    Ok(config.eta() / (2.0 * lambda) * r.norm_squared()
        + r.dot(&(&state.u - &state.u0))
        + c * (&f - &state.page.estimate).norm_squared())
}

/// Runs `max_iters` iterates (`u₁` included) or until the epoch budget is hit.
pub fn run(
    problem: &dyn FiniteSumProblem,
    u0: &Point,
    config: &CocoHalpernConfig,
) -> Result<(CocoHalpernState, Vec<TraceRecord>)> {
    let mut tracer = Tracer::new(config.control);
    let metric = config.control.metric;
    let mut state = initial_step(problem, u0, config)?;
    tracer.log(1, state.counter.epochs(), metric_value(problem, metric, &state.u, Some(&state.g)))?;
    while state.k < config.max_iters {
        let previous = state.clone();
        step(&mut state, problem, config)?;
        if tracer.control().over_budget(state.counter.epochs()) {
            state = previous;
            break;
        }
        if tracer.control().should_log(state.k) || state.k == config.max_iters {
            tracer.log(state.k, state.counter.epochs(), metric_value(problem, metric, &state.u, Some(&state.g)))?;
        }
    }
    if tracer.last_iter() != Some(state.k) {
        tracer.log(state.k, state.counter.epochs(), metric_value(problem, metric, &state.u, Some(&state.g)))?;
    }
    Ok((state, tracer.finish()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{synthetic_cocoercive, AffineProblem, Constraint, MatrixGame, SamplingMode};
    use nalgebra::{dvector, DMatrix};

    fn identity_scalar() -> AffineProblem {
        AffineProblem::new(vec![DMatrix::identity(1, 1)], vec![dvector![0.0]], Constraint::Unconstrained).unwrap()
    }

    #[test]
    fn schedules() {
        assert_eq!(lambda_schedule(1).unwrap(), 0.4);
        assert!((lambda_schedule(6).unwrap() - 0.2).abs() < 1e-15);
        assert!(lambda_schedule(0).is_err());
        assert!((p_schedule(2, 16) - 4.0 / 7.0).abs() < 1e-15);
        assert!((p_schedule(10, 16) - 4.0 / 9.0).abs() < 1e-15);
        assert!((p_schedule(4, 16) - 4.0 / 9.0).abs() < 1e-15);
        assert!((p_schedule(1, 1) - 4.0 / 6.0).abs() < 1e-15);
        assert!((p_schedule(7, 1) - 4.0 / 6.0).abs() < 1e-15);
        assert_eq!(potential_weight(1, 4, 1.0), 5.0);
    }

    #[test]
    fn scalar_recursion() {
        let p = identity_scalar();
        let cfg = CocoHalpernConfig::new(1.0, 3, 0);
        let mut s = initial_step(&p, &dvector![1.0], &cfg).unwrap();
        assert!((s.u[0] - 0.6875).abs() < 1e-15);
        assert_eq!(s.counter.full_evals(), 2);
        assert_eq!(s.counter.resolvent_calls(), 1);
        step(&mut s, &p, &cfg).unwrap();
        assert!((s.u[0] - 0.640625).abs() < 1e-15);
    }

    #[test]
    fn zero_operator_is_convex_combination() {
        let p =
            AffineProblem::new(vec![DMatrix::zeros(2, 2)], vec![Point::zeros(2)], Constraint::Unconstrained).unwrap();
        let cfg = CocoHalpernConfig::new(1.0, 5, 0);
        let u0 = dvector![1.0, -2.0];
        let mut s = initial_step(&p, &u0, &cfg).unwrap();
        assert_eq!(s.u, u0);
        s.u = dvector![0.0, 0.0];
        step(&mut s, &p, &cfg).unwrap();
        assert!((s.u.clone() - &u0 * 0.4).norm() < 1e-15);
    }

    #[test]
    fn solution_is_fixed() {
        let p = synthetic_cocoercive(4, 3, 1.0, 2).unwrap();
        let star = p.known_solution().unwrap().clone();
        let (s, _) = run(&p, &star, &CocoHalpernConfig::new(1.0, 20, 3)).unwrap();
        assert!((s.u - star).norm() < 1e-12);
    }

    #[test]
    fn g_is_certified_by_resolvent() {
        let game = MatrixGame::policeman_burglar(5, 0.8, 4, SamplingMode::Uniform).unwrap();
        let cfg = CocoHalpernConfig::new(game.constants().lipschitz, 10, 1);
        let mut s = initial_step(&game, &game.initial_point(), &cfg).unwrap();
        for _ in 0..9 {
            step(&mut s, &game, &cfg).unwrap();
            let back = game.resolvent(cfg.eta(), &(&s.u + &s.g * cfg.eta()));
            assert!((back - &s.u).norm() < 1e-10);
            let blocks = [&s.u.as_slice()[..5], &s.u.as_slice()[5..]];
            for b in blocks {
                assert!((b.iter().sum::<f64>() - 1.0).abs() < 1e-12);
                assert!(b.iter().all(|&x| x >= 0.0));
            }
        }
    }

    #[test]
    fn single_iteration_trace() {
        let p = identity_scalar();
        let (_, trace) = run(&p, &dvector![1.0], &CocoHalpernConfig::new(1.0, 1, 0)).unwrap();
        assert_eq!(trace.len(), 1);
        assert_eq!(trace[0].iter, 1);
        assert_eq!(trace[0].oracle_epochs, 2.0);
    }

    #[test]
    fn deterministic_instance_ignores_seed() {
        let p = identity_scalar();
        // Only the coin flips depend on the seed, and with one component both
        // branches give F(u) exactly; the charged cost still differs.
        let strip = |t: Vec<TraceRecord>| t.iter().map(|r| (r.iter, r.residual)).collect::<Vec<_>>();
        let a = run(&p, &dvector![1.0], &CocoHalpernConfig::new(1.0, 30, 1)).unwrap().1;
        let b = run(&p, &dvector![1.0], &CocoHalpernConfig::new(1.0, 30, 2)).unwrap().1;
        assert_eq!(strip(a), strip(b));
    }

    #[test]
    fn budget_stops_before_overrun() {
        let p = synthetic_cocoercive(16, 3, 1.0, 1).unwrap();
        let mut cfg = CocoHalpernConfig::new(1.0, 10_000, 5);
        cfg.control.epoch_budget = Some(6.0);
        let (s, trace) = run(&p, &Point::zeros(3), &cfg).unwrap();
        assert!(trace.iter().all(|r| r.oracle_epochs <= 6.0));
        assert!(s.counter.epochs() <= 6.0);
        assert!(trace.windows(2).all(|w| w[0].oracle_epochs <= w[1].oracle_epochs));
    }

    #[test]
    fn divergence_is_reported() {
        let p = identity_scalar();
        let mut cfg = CocoHalpernConfig::new(1.0, 200, 0);
        cfg.eta_override = Some(5.0);
        let err = run(&p, &dvector![1.0], &cfg).unwrap_err();
        assert!(matches!(err, Error::Divergence { .. }));
    }
}

//! Variance-reduced forward-reflected-backward method for `0 ∈ A(v) + B(v)`
//! with `A + B` strongly monotone.
//!
//! ```text
//! v̂_k     = α v_k + (1−α) w_k
//! v_{k+1} = J_{τB}(v̂_k − τ[A(w_k) − A_ξ(w_{k−1}) + A_ξ(v_k)]),   ξ ~ Q
//! w_{k+1} = v_{k+1} with probability p, else w_k
//! ```
//!
//! `A_ξ` is the reweighted draw `(n q_ξ)⁻¹ A_ξ`, so `E_ξ A_ξ = A`.

use crate::counter::EvalCounter;
use crate::error::{check_dim, Error, Result};
use crate::problem::{FiniteSumProblem, Point};
use crate::rng::RngStream;
use crate::sampling::SamplingDistribution;
use crate::trace::{metric_value, RunControl, TraceRecord, Tracer};

/// The split `A + B` seen by the method.
pub trait SplitOperator {
    fn dim(&self) -> usize;

    fn num_components(&self) -> usize;

    /// `A(u)`.
    fn eval_full(&self, u: &Point) -> Point;

    /// Raw summand `A_i(u)`; the plain average over `i` is `A(u)`.
    fn eval_component(&self, i: usize, u: &Point) -> Point;

    /// Unbiased draw of `A(u)` for `i ~ Q`.
    fn eval_sampled(&self, i: usize, u: &Point) -> Point;

    /// `J_{τB}(u)`.
    fn resolvent(&self, tau: f64, u: &Point) -> Point;

    fn sampling(&self) -> &SamplingDistribution;

    /// Expected Lipschitz constant `L_A` of the sampled oracle.
    fn lipschitz(&self) -> f64;

    /// Strong monotonicity modulus of `A + B`.
    fn mu(&self) -> f64;

    fn component_cost(&self) -> f64;

    /// Component calls per full evaluation of `A`; sets `p = 1/n`.
    fn effective_components(&self) -> usize {
        ((1.0 / self.component_cost()).round() as usize).max(1)
    }
}

/// A problem used directly as `A = F`, `B = G`.
pub struct ProblemSplit<'a> {
    pub problem: &'a dyn FiniteSumProblem,
    pub mu: f64,
}

impl SplitOperator for ProblemSplit<'_> {
    fn dim(&self) -> usize {
        self.problem.dim()
    }

    fn num_components(&self) -> usize {
        self.problem.num_components()
    }

    fn eval_full(&self, u: &Point) -> Point {
        self.problem.eval_full(u)
    }

    fn eval_component(&self, i: usize, u: &Point) -> Point {
        self.problem.eval_component(i, u)
    }

    fn eval_sampled(&self, i: usize, u: &Point) -> Point {
        self.problem.eval_sampled(i, u)
    }

    fn resolvent(&self, tau: f64, u: &Point) -> Point {
        self.problem.resolvent(tau, u)
    }

    fn sampling(&self) -> &SamplingDistribution {
        self.problem.sampling()
    }

    fn lipschitz(&self) -> f64 {
        self.problem.constants().lipschitz
    }

    fn mu(&self) -> f64 {
        self.mu
    }

    fn component_cost(&self) -> f64 {
        self.problem.constants().component_cost
    }

    fn effective_components(&self) -> usize {
        self.problem.effective_components()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForbParams {
    pub p: f64,
    pub alpha: f64,
    pub tau: f64,
}

/// `p = 1/n`, `α = 1 − p`, `τ = √(p(1−p))/(2L_A)`. For `n = 1` the step would
/// vanish, so the deterministic method `p = 1`, `α = 0`, `τ = 1/(2L_A)` is
/// used instead.
pub fn forb_params(n: usize, lipschitz: f64) -> Result<ForbParams> {
    if n < 1 {
        return Err(Error::InvalidArgument("need at least one component".into()));
    }
    if !(lipschitz > 0.0 && lipschitz.is_finite()) {
        return Err(Error::InvalidArgument(format!("L_A = {lipschitz} must be positive")));
    }
    if n == 1 {
        return Ok(ForbParams { p: 1.0, alpha: 0.0, tau: 1.0 / (2.0 * lipschitz) });
    }
    let p = 1.0 / n as f64;
    Ok(ForbParams { p, alpha: 1.0 - p, tau: (p * (1.0 - p)).sqrt() / (2.0 * lipschitz) })
}

/// `⌈14 max{n, √n L_A/μ} ln(√6 dist0/ε̄)⌉`, or 1 when the logarithm is not
/// positive.
pub fn iterations_for_accuracy(n: usize, lipschitz: f64, mu: f64, dist0: f64, eps_bar: f64) -> Result<usize> {
    if n < 1 || !(lipschitz > 0.0) || !(mu > 0.0) || !(dist0 >= 0.0) || !(eps_bar > 0.0) {
        return Err(Error::InvalidArgument("iteration bound needs positive inputs".into()));
    }
    let log = (6f64.sqrt() * dist0 / eps_bar).ln();
    if log <= 0.0 {
        return Ok(1);
    }
    let factor = (n as f64).max((n as f64).sqrt() * lipschitz / mu);
    Ok((14.0 * factor * log).ceil() as usize)
}

/// `6 exp(−r k) ‖v₀ − v*‖²` with `r = min{τμ/(1+4τμ), p/7, τμ/2}`.
pub fn decay_envelope(params: &ForbParams, mu: f64, k: usize, dist0_sq: f64) -> f64 {
    let tm = params.tau * mu;
    let rate = (tm / (1.0 + 4.0 * tm)).min(params.p / 7.0).min(tm / 2.0);
    6.0 * (-rate * k as f64).exp() * dist0_sq
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForbState {
    pub v: Point,
    pub w: Point,
    pub w_prev: Point,
    /// `A(w)`, refreshed whenever `w` moves.
    pub a_w: Point,
    /// Element of `B(v)` recovered from the last resolvent step.
    pub b_elem: Point,
}

impl ForbState {
    /// `v₀ = w₀ = w₋₁ = u`; charges the full evaluation `A(w₀)`.
    pub fn new(op: &dyn SplitOperator, u: &Point, counter: &mut EvalCounter) -> Result<Self> {
        check_dim(op.dim(), u.len())?;
        counter.charge_full();
        Ok(Self { v: u.clone(), w: u.clone(), w_prev: u.clone(), a_w: op.eval_full(u), b_elem: Point::zeros(u.len()) })
    }
}

pub fn forb_step(
    state: &mut ForbState,
    op: &dyn SplitOperator,
    params: &ForbParams,
    rng: &mut RngStream,
    counter: &mut EvalCounter,
) -> Result<()> {
    let v_hat = &state.v * params.alpha + &state.w * (1.0 - params.alpha);
    let i = op.sampling().sample(rng);
    counter.charge_components(2);
    let direction = &state.a_w - op.eval_sampled(i, &state.w_prev) + op.eval_sampled(i, &state.v);
    let input = v_hat - direction * params.tau;
    counter.charge_resolvent();
    let next = op.resolvent(params.tau, &input);
    if !next.iter().all(|x| x.is_finite()) {
        return Err(Error::Divergence { iter: 0, detail: "non-finite inner iterate".into() });
    }
    state.b_elem = (input - &next) / params.tau;
    state.w_prev.copy_from(&state.w);
    if rng.bernoulli(params.p)? {
        counter.charge_full();
        state.a_w = op.eval_full(&next);
        state.w.copy_from(&next);
    }
    state.v = next;
    Ok(())
}

/// `M` steps from `u_init`; returns `v_M` together with its `B`-element.
pub fn run_forb_certified(
    u_init: &Point,
    iters: usize,
    op: &dyn SplitOperator,
    params: &ForbParams,
    rng: &mut RngStream,
    counter: &mut EvalCounter,
) -> Result<(Point, Point)> {
    let mut state = ForbState::new(op, u_init, counter)?;
    for _ in 0..iters {
        forb_step(&mut state, op, params, rng, counter)?;
    }
    Ok((state.v, state.b_elem))
}

/// `M` steps from `u_init`, returning `v_M`.
pub fn run_forb(
    u_init: &Point,
    iters: usize,
    op: &dyn SplitOperator,
    params: &ForbParams,
    rng: &mut RngStream,
    counter: &mut EvalCounter,
) -> Result<Point> {
    if iters == 0 {
        check_dim(op.dim(), u_init.len())?;
        return Ok(u_init.clone());
    }
    Ok(run_forb_certified(u_init, iters, op, params, rng, counter)?.0)
}

/// Settings for running the method directly on a problem.
#[derive(Debug, Clone, PartialEq)]
pub struct ForbConfig {
    pub mu: f64,
    pub max_iters: usize,
    pub seed: u64,
    pub tau_override: Option<f64>,
    pub control: RunControl,
}

impl ForbConfig {
    pub fn new(max_iters: usize, seed: u64) -> Self {
        Self { mu: 0.0, max_iters, seed, tau_override: None, control: RunControl::default() }
    }
}

/// Runs on `A = F`, `B = G`, logging `u₀` and then every iterate.
pub fn run(problem: &dyn FiniteSumProblem, u0: &Point, config: &ForbConfig) -> Result<(Point, Vec<TraceRecord>)> {
    let op = ProblemSplit { problem, mu: config.mu };
    let mut params = forb_params(op.effective_components(), op.lipschitz())?;
    if let Some(tau) = config.tau_override {
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(Error::InvalidArgument(format!("step {tau} must be positive")));
        }
        params.tau = tau;
    }
    let metric = config.control.metric;
    let mut tracer = Tracer::new(config.control);
    let mut rng = RngStream::new(config.seed);
    let mut counter = EvalCounter::new(op.component_cost());
    tracer.log(0, 0.0, problem.natural_residual(u0))?;
    let mut state = ForbState::new(&op, u0, &mut counter)?;
    let mut k = 0;
    while k < config.max_iters {
        let previous = (state.clone(), counter.clone());
        forb_step(&mut state, &op, &params, &mut rng, &mut counter).map_err(|e| at_iter(e, k + 1))?;
        if tracer.control().over_budget(counter.epochs()) {
            (state, counter) = previous;
            break;
        }
        k += 1;
        if tracer.control().should_log(k) || k == config.max_iters {
            tracer.log(k, counter.epochs(), metric_value(problem, metric, &state.v, Some(&state.b_elem)))?;
        }
    }
    if tracer.last_iter() != Some(k) {
        tracer.log(k, counter.epochs(), metric_value(problem, metric, &state.v, Some(&state.b_elem)))?;
    }
    Ok((state.v, tracer.finish()))
}

fn at_iter(e: Error, iter: usize) -> Error {
    match e {
        Error::Divergence { detail, .. } => Error::Divergence { iter, detail },
        other => other,
    }
}

//! Deterministic extragradient baseline:
//! `u½ = J_{τG}(u − τF(u))`, `u⁺ = J_{τG}(u − τF(u½))`.

use crate::counter::EvalCounter;
use crate::error::{check_dim, Error, Result};
use crate::problem::{FiniteSumProblem, Point};
use crate::trace::{metric_value, RunControl, TraceRecord, Tracer};

/// One extragradient step; returns `u⁺` and the element of `G(u⁺)` from the
/// second resolvent.
pub fn eg_step(problem: &dyn FiniteSumProblem, u: &Point, tau: f64, counter: &mut EvalCounter) -> (Point, Point) {
    counter.charge_full();
    counter.charge_resolvent();
    let half = problem.resolvent(tau, &(u - problem.eval_full(u) * tau));
    counter.charge_full();
    counter.charge_resolvent();
    let input = u - problem.eval_full(&half) * tau;
    let next = problem.resolvent(tau, &input);
    let g = (input - &next) / tau;
    (next, g)
}

/// Default step `1/(2 L_F)`.
pub fn default_tau(problem: &dyn FiniteSumProblem) -> f64 {
    1.0 / (2.0 * problem.constants().lipschitz_full)
}

/// Runs until `max_iters` or the epoch budget; the trace starts with `u₀` at
/// zero cost.
pub fn eg_baseline(
    problem: &dyn FiniteSumProblem,
    u0: &Point,
    tau: f64,
    max_iters: usize,
    control: RunControl,
) -> Result<(Point, Vec<TraceRecord>)> {
    check_dim(problem.dim(), u0.len())?;
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::InvalidArgument(format!("step {tau} must be positive")));
    }
    let mut tracer = Tracer::new(control);
    let mut counter = EvalCounter::new(problem.constants().component_cost);
    tracer.log(0, 0.0, problem.natural_residual(u0))?;
    let mut u = u0.clone();
    let mut g = None;
    let mut k = 0;
    while k < max_iters {
        let mut trial = counter.clone();
        let (next, g_next) = eg_step(problem, &u, tau, &mut trial);
        if control.over_budget(trial.epochs()) {
            break;
        }
        if !next.iter().all(|x| x.is_finite()) {
            return Err(Error::Divergence { iter: k + 1, detail: "non-finite iterate".into() });
        }
        counter = trial;
        u = next;
        g = Some(g_next);
        k += 1;
        if control.should_log(k) || k == max_iters {
            tracer.log(k, counter.epochs(), metric_value(problem, control.metric, &u, g.as_ref()))?;
        }
    }
    if tracer.last_iter() != Some(k) {
        tracer.log(k, counter.epochs(), metric_value(problem, control.metric, &u, g.as_ref()))?;
    }
    Ok((u, tracer.finish()))
}

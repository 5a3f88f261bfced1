//! Recursive variance-reduced (PAGE) estimate of `F`.
//!
//! With probability `p` the estimate is refreshed by a full evaluation;
//! otherwise it is moved by a minibatch of component differences
//! `(1/b) Σ_{i∈S} (F_i(u_next) − F_i(anchor))`, `S` drawn uniformly without
//! replacement. Both component values are recomputed, so the minibatch branch
//! costs `2b` component calls.

use itertools::Itertools;

use crate::counter::EvalCounter;
use crate::error::{check_dim, check_probability, Error, Result};
use crate::problem::{FiniteSumProblem, Point};
use crate::rng::RngStream;

#[derive(Debug, Clone, PartialEq)]
pub struct PageState {
    pub estimate: Point,
    pub anchor: Point,
    pub batch_size: usize,
}

/// `⌈√n⌉` in exact integer arithmetic.
pub fn ceil_sqrt(n: usize) -> usize {
    let mut r = (n as f64).sqrt() as usize;
    while r * r < n {
        r += 1;
    }
    while r > 0 && (r - 1) * (r - 1) >= n {
        r -= 1;
    }
    r
}

/// Default minibatch size `⌈√n⌉`, with `n` the problem's effective count and
/// capped at the number of components.
pub fn default_batch_size(problem: &dyn FiniteSumProblem) -> usize {
    ceil_sqrt(problem.effective_components()).clamp(1, problem.num_components())
}

impl PageState {
    /// Starts from the exact value `F(u)`, charging one full evaluation.
    pub fn init_full(problem: &dyn FiniteSumProblem, u: &Point, counter: &mut EvalCounter) -> Result<Self> {
        check_dim(problem.dim(), u.len())?;
        counter.charge_full();
        Ok(Self { estimate: problem.eval_full(u), anchor: u.clone(), batch_size: default_batch_size(problem) })
    }

    pub fn with_batch_size(mut self, b: usize) -> Self {
        self.batch_size = b;
        self
    }

    /// Moves the estimate to `u_next` and makes it the new anchor.
    pub fn update(
        &mut self,
        problem: &dyn FiniteSumProblem,
        u_next: &Point,
        p: f64,
        rng: &mut RngStream,
        counter: &mut EvalCounter,
    ) -> Result<()> {
        check_probability(p)?;
        check_dim(self.anchor.len(), u_next.len())?;
        if rng.bernoulli(p)? {
            counter.charge_full();
            self.estimate = problem.eval_full(u_next);
        } else {
            let batch = rng.sample_without_replacement(problem.num_components(), self.batch_size)?;
            counter.charge_components(2 * batch.len() as u64);
            self.estimate += batch_increment(problem, &batch, u_next, &self.anchor);
        }
        self.anchor.copy_from(u_next);
        Ok(())
    }
}

fn batch_increment(problem: &dyn FiniteSumProblem, batch: &[usize], next: &Point, anchor: &Point) -> Point {
    let mut delta = Point::zeros(next.len());
    for &i in batch {
        delta += problem.eval_component(i, next) - problem.eval_component(i, anchor);
    }
    delta / batch.len() as f64
}

const MAX_ENUM_COMPONENTS: usize = 8;
const MAX_ENUM_BATCHES: usize = 70;

fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

/// Exact mean of the updated estimate and `E‖F̃_new − F(u_next)‖²`, by
/// enumerating the coin and every batch. Test oracle only.
pub fn enumerate_update_expectation(
    state: &PageState,
    problem: &dyn FiniteSumProblem,
    u_next: &Point,
    p: f64,
) -> Result<(Point, f64)> {
    check_probability(p)?;
    check_dim(state.anchor.len(), u_next.len())?;
    let n = problem.num_components();
    let b = state.batch_size;
    if b < 1 || b > n {
        return Err(Error::InvalidArgument(format!("batch size {b} must lie in 1..={n}")));
    }
    if n > MAX_ENUM_COMPONENTS || binomial(n, b) > MAX_ENUM_BATCHES {
        return Err(Error::TooLarge(format!("n = {n}, b = {b}")));
    }
    let target = problem.eval_full(u_next);
    let batches: Vec<Vec<usize>> = (0..n).combinations(b).collect();
    let weight = (1.0 - p) / batches.len() as f64;
    let mut mean = &target * p;
    let mut second = 0.0;
    for batch in &batches {
        let est = &state.estimate + batch_increment(problem, batch, u_next, &state.anchor);
        second += weight * (&est - &target).norm_squared();
        mean += est * weight;
    }
    Ok((mean, second))
}

/// Right side of the one-step variance recursion:
/// `(1−p)‖F̃ − F(anchor)‖² + (1−p)(n−b)/(b(n−1)) · (1/n) Σ ‖F_i(u_next) − F_i(anchor)‖²`,
/// with the sampling factor taken as zero when `n = 1`.
pub fn variance_bound(state: &PageState, problem: &dyn FiniteSumProblem, u_next: &Point, p: f64) -> f64 {
    let n = problem.num_components();
    let b = state.batch_size;
    let carried = (&state.estimate - problem.eval_full(&state.anchor)).norm_squared();
    let factor = if n == 1 { 0.0 } else { (n - b) as f64 / (b * (n - 1)) as f64 };
    let spread = (0..n)
        .map(|i| (problem.eval_component(i, u_next) - problem.eval_component(i, &state.anchor)).norm_squared())
        .sum::<f64>()
        / n as f64;
    (1.0 - p) * carried + (1.0 - p) * factor * spread
}

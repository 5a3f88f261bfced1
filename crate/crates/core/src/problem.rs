//! The finite-sum problem model shared by every solver.

use nalgebra::{DMatrix, DVector};

use crate::error::{check_dim, Result};
use crate::sampling::SamplingDistribution;

/// Iterates, operator values and resolvent outputs all live in `R^d`.
pub type Point = DVector<f64>;

/// Problem constants consumed by the default step sizes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProblemConstants {
    /// Average cocoercivity modulus or expected Lipschitz constant `L` of the
    /// component oracle under the problem's sampling law.
    pub lipschitz: f64,
    /// Lipschitz constant `L_F` of the full operator.
    pub lipschitz_full: f64,
    /// Cost of one component call relative to one full evaluation.
    pub component_cost: f64,
}

/// A monotone inclusion `0 ∈ F(u) + G(u)` with `F = (1/n) Σ_i F_i`.
///
/// `eval_component(i, ·)` is the raw summand `F_i`, so the plain average over
/// all `i` reproduces `F`. Stochastic methods sampling `i ~ Q` reweight it by
/// `(n q_i)⁻¹` (see [`FiniteSumProblem::eval_sampled`]).
pub trait FiniteSumProblem: Send + Sync {
    fn name(&self) -> &str;

    fn dim(&self) -> usize;

    fn num_components(&self) -> usize;

    fn eval_full(&self, u: &Point) -> Point;

    fn eval_component(&self, i: usize, u: &Point) -> Point;

    /// `J_{ηG}(u)`.
    fn resolvent(&self, eta: f64, u: &Point) -> Point;

    fn constants(&self) -> ProblemConstants;

    fn sampling(&self) -> &SamplingDistribution;

    fn known_solution(&self) -> Option<&Point> {
        None
    }

    /// Default starting point for experiments.
    fn initial_point(&self) -> Point {
        Point::zeros(self.dim())
    }

    /// `(n q_i)⁻¹ F_i(u)`, an unbiased draw of `F(u)` when `i ~ Q`.
    fn eval_sampled(&self, i: usize, u: &Point) -> Point {
        self.eval_component(i, u) * self.sampling().importance_weight(i)
    }

    /// `‖u − J_G(u − F(u))‖`; zero exactly at solutions.
    fn natural_residual(&self, u: &Point) -> f64 {
        let step = u - self.eval_full(u);
        (u - self.resolvent(1.0, &step)).norm()
    }

    /// Number of component calls that cost as much as one full evaluation.
    /// Equals `n` under the default pricing; schedules that depend on `n`
    /// (batch size, snapshot probability) use this value.
    fn effective_components(&self) -> usize {
        let c = self.constants().component_cost;
        ((1.0 / c).round() as usize).max(1)
    }
}

/// `‖F_value + g_value‖`.
pub fn residual_norm(f_value: &Point, g_value: &Point) -> Result<f64> {
    check_dim(f_value.len(), g_value.len())?;
    Ok((f_value + g_value).norm())
}

/// `‖(1/n) Σ F_i(u) − F(u)‖`.
pub fn finite_sum_gap(problem: &dyn FiniteSumProblem, u: &Point) -> f64 {
    let n = problem.num_components();
    let mut mean = Point::zeros(problem.dim());
    for i in 0..n {
        mean += problem.eval_component(i, u);
    }
    mean /= n as f64;
    (mean - problem.eval_full(u)).norm()
}

/// Largest eigenvalue of a symmetric positive semidefinite matrix.
pub(crate) fn largest_eigenvalue(sym: &DMatrix<f64>) -> f64 {
    if sym.nrows() == 0 {
        return 0.0;
    }
    sym.clone().symmetric_eigen().eigenvalues.max().max(0.0)
}

pub(crate) fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    largest_eigenvalue(&(m.transpose() * m)).sqrt()
}

/// Power iteration for `sqrt(λ_max(T))` of a PSD linear map `T`.
pub(crate) fn power_iteration(apply: impl Fn(&Point) -> Point, dim: usize, iters: usize) -> f64 {
    let mut v = Point::from_fn(dim, |i, _| 1.0 + (i as f64 + 1.0) / dim as f64);
    v /= v.norm();
    let mut estimate = 0.0;
    for _ in 0..iters {
        let w = apply(&v);
        let norm = w.norm();
        if norm == 0.0 {
            return 0.0;
        }
        estimate = v.dot(&w);
        v = w / norm;
    }
    estimate.max(0.0).sqrt()
}

/// Expected Lipschitz constant of the reweighted oracle of an affine-linear
/// problem, `sqrt(λ_max(Σ_i q_i (n q_i)⁻² J_iᵀ J_i))`, from the component
/// Jacobians `J_i`.
pub(crate) fn expected_lipschitz<'a>(
    jacobians: impl Iterator<Item = &'a DMatrix<f64>>,
    q: &SamplingDistribution,
    dim: usize,
) -> f64 {
    let mut gram = DMatrix::<f64>::zeros(dim, dim);
    for (i, j) in jacobians.enumerate() {
        let w = q.importance_weight(i);
        let scale = q.prob(i) * w * w;
        if scale > 0.0 {
            gram += j.transpose() * j * scale;
        }
    }
    largest_eigenvalue(&gram).sqrt()
}

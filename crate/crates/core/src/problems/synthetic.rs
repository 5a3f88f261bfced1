//! Random affine instances with a planted solution, used to check the
//! convergence envelopes.

use nalgebra::DMatrix;

use super::{AffineProblem, Constraint};
use crate::error::{Error, Result};
use crate::problem::{largest_eigenvalue, FiniteSumProblem, Point};
use crate::rng::RngStream;

fn gaussian_matrix(rows: usize, cols: usize, rng: &mut RngStream) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.standard_normal())
}

fn gaussian_point(d: usize, rng: &mut RngStream) -> Point {
    Point::from_fn(d, |_, _| rng.standard_normal())
}

fn skew(rows: usize, rng: &mut RngStream) -> DMatrix<f64> {
    let c = gaussian_matrix(rows, rows, rng);
    (&c - c.transpose()) * 0.5
}

fn check_sizes(n: usize, d: usize) -> Result<()> {
    if n == 0 || d == 0 {
        return Err(Error::InvalidArgument(format!("need n, d ≥ 1, got n={n}, d={d}")));
    }
    Ok(())
}

fn planted(matrices: Vec<DMatrix<f64>>, solution: Point) -> Result<AffineProblem> {
    let offsets = matrices.iter().map(|m| -(m * &solution)).collect();
    Ok(AffineProblem::new(matrices, offsets, Constraint::Unconstrained)?.with_known_solution(solution))
}

/// `F_i(u) = Q_i (u − u*)` with `Q_i = B_iᵀ B_i` scaled so that
/// `max_i λ_max(Q_i) = L`. Each `F_i` is `1/L`-cocoercive, so `F` is
/// `1/L`-cocoercive on average.
pub fn synthetic_cocoercive(n: usize, d: usize, lipschitz: f64, seed: u64) -> Result<AffineProblem> {
    check_sizes(n, d)?;
    if !(lipschitz > 0.0) {
        return Err(Error::InvalidArgument(format!("L = {lipschitz} must be positive")));
    }
    let mut rng = RngStream::new(seed);
    let mut qs: Vec<DMatrix<f64>> = (0..n)
        .map(|_| {
            let b = gaussian_matrix(d, d, &mut rng);
            b.transpose() * b
        })
        .collect();
    let top = qs.iter().map(largest_eigenvalue).fold(0.0, f64::max);
    for q in &mut qs {
        *q *= lipschitz / top;
    }
    let solution = gaussian_point(d, &mut rng);
    Ok(planted(qs, solution)?.with_lipschitz(lipschitz).with_name("synthetic-cocoercive"))
}

/// `F_i(u) = (μ I + K_i)(u − u*)` with random skew `K_i`; the mean is
/// exactly `μ`-strongly monotone.
pub fn synthetic_strongly_monotone(n: usize, d: usize, mu: f64, seed: u64) -> Result<AffineProblem> {
    check_sizes(n, d)?;
    if !(mu > 0.0) {
        return Err(Error::InvalidArgument(format!("μ = {mu} must be positive")));
    }
    let mut rng = RngStream::new(seed);
    let ms = (0..n).map(|_| DMatrix::identity(d, d) * mu + skew(d, &mut rng) * mu).collect();
    let solution = gaussian_point(d, &mut rng);
    Ok(planted(ms, solution)?.with_name("synthetic-strongly-monotone"))
}

/// Merely monotone affine instance: rank-one PSD plus skew components,
/// rescaled so that the expected Lipschitz constant under uniform sampling
/// is exactly one.
pub fn synthetic_monotone(n: usize, d: usize, seed: u64) -> Result<AffineProblem> {
    check_sizes(n, d)?;
    let mut rng = RngStream::new(seed);
    let ms: Vec<DMatrix<f64>> = (0..n)
        .map(|_| {
            let b = gaussian_matrix(1, d, &mut rng);
            b.transpose() * b + skew(d, &mut rng)
        })
        .collect();
    let solution = gaussian_point(d, &mut rng);
    let raw = planted(ms, solution.clone())?;
    let scale = raw.constants().lipschitz;
    let ms = raw.matrices().iter().map(|m| m / scale).collect();
    Ok(planted(ms, solution)?.with_name("synthetic-monotone"))
}

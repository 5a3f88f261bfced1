//! Benchmark and verification instances.

mod affine;
mod matrix_game;
pub mod matrix_io;
mod quadratic;
mod simplex;
mod synthetic;

pub use affine::{exact_resolvent_affine, AffineProblem};
pub use matrix_game::{gradient_mapping_norm, policeman_burglar_matrix, MatrixGame, SamplingMode};
pub use quadratic::QuadraticProgram;
pub use simplex::{project_simplex, project_simplex_point};
pub use synthetic::{synthetic_cocoercive, synthetic_monotone, synthetic_strongly_monotone};

use crate::problem::Point;

/// The set constraint behind `G = ∂δ_C`; its resolvent is the projection onto
/// `C` for every step size.
#[derive(Debug, Clone, PartialEq)]
pub enum Constraint {
    /// `G ≡ 0`.
    Unconstrained,
    NonnegativeOrthant,
    /// Consecutive blocks of the given lengths, each constrained to a simplex.
    SimplexBlocks(Vec<usize>),
}

impl Constraint {
    pub fn project(&self, u: &Point) -> Point {
        match self {
            Constraint::Unconstrained => u.clone(),
            Constraint::NonnegativeOrthant => u.map(|x| x.max(0.0)),
            Constraint::SimplexBlocks(sizes) => {
                debug_assert_eq!(sizes.iter().sum::<usize>(), u.len());
                let mut out = Vec::with_capacity(u.len());
                let mut start = 0;
                for &len in sizes {
                    out.extend(project_simplex(&u.as_slice()[start..start + len]));
                    start += len;
                }
                Point::from_vec(out)
            }
        }
    }

    pub fn contains(&self, u: &Point, tol: f64) -> bool {
        match self {
            Constraint::Unconstrained => true,
            Constraint::NonnegativeOrthant => u.iter().all(|&x| x >= -tol),
            Constraint::SimplexBlocks(sizes) => {
                let mut start = 0;
                sizes.iter().all(|&len| {
                    let block = &u.as_slice()[start..start + len];
                    start += len;
                    block.iter().all(|&x| x >= -tol) && (block.iter().sum::<f64>() - 1.0).abs() <= tol
                })
            }
        }
    }

    /// A feasible starting point: the origin, or block barycentres.
    pub fn barycenter(&self, dim: usize) -> Point {
        match self {
            Constraint::SimplexBlocks(sizes) => {
                Point::from_iterator(dim, sizes.iter().flat_map(|&len| std::iter::repeat_n(1.0 / len as f64, len)))
            }
            _ => Point::zeros(dim),
        }
    }
}

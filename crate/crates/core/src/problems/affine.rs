use nalgebra::DMatrix;

use super::Constraint;
use crate::error::{check_dim, Error, Result};
use crate::problem::{expected_lipschitz, spectral_norm, FiniteSumProblem, Point, ProblemConstants};
use crate::sampling::SamplingDistribution;

/// `F_i(u) = M_i u + c_i` with a set constraint for `G`.
#[derive(Debug, Clone)]
pub struct AffineProblem {
    name: String,
    matrices: Vec<DMatrix<f64>>,
    offsets: Vec<Point>,
    mean_matrix: DMatrix<f64>,
    mean_offset: Point,
    constraint: Constraint,
    sampling: SamplingDistribution,
    constants: ProblemConstants,
    known_solution: Option<Point>,
}

impl AffineProblem {
    /// Builds the instance with uniform sampling. `L` defaults to the expected
    /// Lipschitz constant of the components and `L_F` to `‖(1/n) Σ M_i‖₂`.
    pub fn new(matrices: Vec<DMatrix<f64>>, offsets: Vec<Point>, constraint: Constraint) -> Result<Self> {
        let n = matrices.len();
        if n == 0 || offsets.len() != n {
            return Err(Error::InvalidArgument(format!(
                "need matching nonempty component lists, got {} matrices and {} offsets",
                n,
                offsets.len()
            )));
        }
        let d = matrices[0].nrows();
        for (m, c) in matrices.iter().zip(&offsets) {
            check_dim(d, m.nrows())?;
            check_dim(d, m.ncols())?;
            check_dim(d, c.len())?;
        }
        let mean_matrix = matrices.iter().fold(DMatrix::zeros(d, d), |acc, m| acc + m) / n as f64;
        let mean_offset = offsets.iter().fold(Point::zeros(d), |acc, c| acc + c) / n as f64;
        let sampling = SamplingDistribution::uniform(n)?;
        let constants = ProblemConstants {
            lipschitz: expected_lipschitz(matrices.iter(), &sampling, d),
            lipschitz_full: spectral_norm(&mean_matrix),
            component_cost: 1.0 / n as f64,
        };
        Ok(Self {
            name: "affine".into(),
            matrices,
            offsets,
            mean_matrix,
            mean_offset,
            constraint,
            sampling,
            constants,
            known_solution: None,
        })
    }

    /// Switches the sampling law and recomputes the expected Lipschitz constant.
    pub fn with_sampling(mut self, sampling: SamplingDistribution) -> Result<Self> {
        check_dim(self.matrices.len(), sampling.len())?;
        self.constants.lipschitz = expected_lipschitz(self.matrices.iter(), &sampling, self.dim());
        self.sampling = sampling;
        Ok(self)
    }

    /// Overrides `L`, e.g. with an average cocoercivity modulus.
    pub fn with_lipschitz(mut self, lipschitz: f64) -> Self {
        self.constants.lipschitz = lipschitz;
        self
    }

    pub fn with_known_solution(mut self, solution: Point) -> Self {
        self.known_solution = Some(solution);
        self
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn matrices(&self) -> &[DMatrix<f64>] {
        &self.matrices
    }

    pub fn offsets(&self) -> &[Point] {
        &self.offsets
    }

    pub fn mean_matrix(&self) -> &DMatrix<f64> {
        &self.mean_matrix
    }

    pub fn mean_offset(&self) -> &Point {
        &self.mean_offset
    }

    pub fn constraint(&self) -> &Constraint {
        &self.constraint
    }
}

impl FiniteSumProblem for AffineProblem {
    fn name(&self) -> &str {
        &self.name
    }

    fn dim(&self) -> usize {
        self.mean_offset.len()
    }

    fn num_components(&self) -> usize {
        self.matrices.len()
    }

    fn eval_full(&self, u: &Point) -> Point {
        &self.mean_matrix * u + &self.mean_offset
    }

    fn eval_component(&self, i: usize, u: &Point) -> Point {
        &self.matrices[i] * u + &self.offsets[i]
    }

    fn resolvent(&self, _eta: f64, u: &Point) -> Point {
        self.constraint.project(u)
    }

    fn constants(&self) -> ProblemConstants {
        self.constants
    }

    fn sampling(&self) -> &SamplingDistribution {
        &self.sampling
    }

    fn known_solution(&self) -> Option<&Point> {
        self.known_solution.as_ref()
    }

    fn initial_point(&self) -> Point {
        self.constraint.barycenter(self.dim())
    }
}

/// `J_{ηF}(u)` for affine `F(u) = M u + c` and `G ≡ 0`, by solving
/// `(I + ηM) v = u − ηc` densely.
pub fn exact_resolvent_affine(problem: &AffineProblem, eta: f64, u: &Point) -> Result<Point> {
    if problem.constraint != Constraint::Unconstrained {
        return Err(Error::InvalidArgument("exact affine resolvent needs an unconstrained problem".into()));
    }
    if !(eta > 0.0) {
        return Err(Error::InvalidArgument(format!("step {eta} must be positive")));
    }
    let d = problem.dim();
    check_dim(d, u.len())?;
    let system = DMatrix::identity(d, d) + &problem.mean_matrix * eta;
    let rhs = u - &problem.mean_offset * eta;
    let v = system.lu().solve(&rhs).ok_or(Error::Singular)?;
    if v.iter().all(|x| x.is_finite()) {
        Ok(v)
    } else {
        Err(Error::Singular)
    }
}

//! Bilinear matrix games `min_{x ∈ Δ} max_{y ∈ Δ} ⟨Ax, y⟩`.

use nalgebra::DMatrix;

use super::Constraint;
use crate::error::{check_dim, Error, Result};
use crate::problem::{power_iteration, FiniteSumProblem, Point, ProblemConstants};
use crate::rng::RngStream;
use crate::sampling::SamplingDistribution;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SamplingMode {
    #[default]
    Uniform,
    /// Rows and columns drawn proportionally to their squared norms.
    Importance,
}

/// The game with payoff `A ∈ R^{m₁×m₂}`, written as the inclusion with
/// `u = (x; y)`, `x ∈ Δ^{m₂}`, `y ∈ Δ^{m₁}` and `F(u) = (Aᵀy; −Ax)`.
///
/// Component `ξ = i·m₂ + j` pairs row `i` with column `j` and is drawn with
/// probability `q_i q_j`. The reweighted draw is
/// `((1/q_i) A_{i:}ᵀ y_i; −(1/q_j) A_{:j} x_j)`.
#[derive(Debug, Clone)]
pub struct MatrixGame {
    name: String,
    a: DMatrix<f64>,
    mode: SamplingMode,
    row_probs: Vec<f64>,
    col_probs: Vec<f64>,
    sampling: SamplingDistribution,
    constraint: Constraint,
    constants: ProblemConstants,
}

const POWER_ITERS: usize = 100;

impl MatrixGame {
    pub fn new(a: DMatrix<f64>, mode: SamplingMode) -> Result<Self> {
        let (rows, cols) = a.shape();
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidArgument("empty payoff matrix".into()));
        }
        if a.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument("payoff matrix has non-finite entries".into()));
        }
        let row_sq: Vec<f64> = a.row_iter().map(|r| r.norm_squared()).collect();
        let col_sq: Vec<f64> = a.column_iter().map(|c| c.norm_squared()).collect();
        let frob_sq: f64 = row_sq.iter().sum();

        let (row_probs, col_probs, lipschitz) = match mode {
            SamplingMode::Uniform => {
                let max_row = row_sq.iter().cloned().fold(0.0, f64::max);
                let max_col = col_sq.iter().cloned().fold(0.0, f64::max);
                (
                    vec![1.0 / rows as f64; rows],
                    vec![1.0 / cols as f64; cols],
                    (rows as f64 * max_row).max(cols as f64 * max_col).sqrt(),
                )
            }
            SamplingMode::Importance => {
                if let Some(i) = row_sq.iter().position(|&s| s == 0.0) {
                    return Err(Error::InvalidArgument(format!(
                        "importance sampling needs nonzero rows, row {i} is zero"
                    )));
                }
                if let Some(j) = col_sq.iter().position(|&s| s == 0.0) {
                    return Err(Error::InvalidArgument(format!(
                        "importance sampling needs nonzero columns, column {j} is zero"
                    )));
                }
                (
                    row_sq.iter().map(|s| s / frob_sq).collect(),
                    col_sq.iter().map(|s| s / frob_sq).collect(),
                    frob_sq.sqrt(),
                )
            }
        };
        let sampling = match mode {
            SamplingMode::Uniform => SamplingDistribution::product(
                SamplingDistribution::uniform(rows)?,
                SamplingDistribution::uniform(cols)?,
            ),
            SamplingMode::Importance => SamplingDistribution::product(
                SamplingDistribution::from_unnormalized(&row_sq)?,
                SamplingDistribution::from_unnormalized(&col_sq)?,
            ),
        };
        let ata = a.transpose() * &a;
        let lipschitz_full = power_iteration(|v| &ata * v, cols, POWER_ITERS);
        let constants = ProblemConstants {
            lipschitz,
            lipschitz_full,
            component_cost: (rows + cols) as f64 / (2 * rows * cols) as f64,
        };
        Ok(Self {
            name: "matrix-game".into(),
            a,
            mode,
            row_probs,
            col_probs,
            sampling,
            constraint: Constraint::SimplexBlocks(vec![cols, rows]),
            constants,
        })
    }

    /// The policeman–burglar game of size `m` drawn from `seed`.
    pub fn policeman_burglar(m: usize, theta: f64, seed: u64, mode: SamplingMode) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidArgument("matrix size must be positive".into()));
        }
        let mut rng = RngStream::new(seed);
        Self::new(policeman_burglar_matrix(m, theta, &mut rng), mode)
    }

    pub fn payoff(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn mode(&self) -> SamplingMode {
        self.mode
    }

    pub fn row_probs(&self) -> &[f64] {
        &self.row_probs
    }

    pub fn col_probs(&self) -> &[f64] {
        &self.col_probs
    }

    /// Lengths of the `x` and `y` blocks.
    pub fn blocks(&self) -> (usize, usize) {
        (self.a.ncols(), self.a.nrows())
    }

    fn split<'a>(&self, u: &'a Point) -> (&'a [f64], &'a [f64]) {
        u.as_slice().split_at(self.a.ncols())
    }

    /// `(scale_x · A_{i:}ᵀ y_i ; −scale_y · A_{:j} x_j)`.
    fn component_with(&self, xi: usize, u: &Point, scale_x: f64, scale_y: f64) -> Point {
        let cols = self.a.ncols();
        let (i, j) = (xi / cols, xi % cols);
        let (x, y) = self.split(u);
        let mut out = Point::zeros(u.len());
        let yi = y[i] * scale_x;
        for (k, a) in self.a.row(i).iter().enumerate() {
            out[k] = a * yi;
        }
        let xj = x[j] * scale_y;
        for (k, a) in self.a.column(j).iter().enumerate() {
            out[cols + k] = -a * xj;
        }
        out
    }
}

impl FiniteSumProblem for MatrixGame {
    fn name(&self) -> &str {
        &self.name
    }

    fn dim(&self) -> usize {
        self.a.nrows() + self.a.ncols()
    }

    fn num_components(&self) -> usize {
        self.a.nrows() * self.a.ncols()
    }

    fn eval_full(&self, u: &Point) -> Point {
        let cols = self.a.ncols();
        let x = u.rows(0, cols);
        let y = u.rows(cols, self.a.nrows());
        let mut out = Point::zeros(u.len());
        out.rows_mut(0, cols).copy_from(&(self.a.tr_mul(&y)));
        out.rows_mut(cols, self.a.nrows()).copy_from(&(-(&self.a * x)));
        out
    }

    fn eval_component(&self, xi: usize, u: &Point) -> Point {
        let cols = self.a.ncols();
        let n = self.num_components() as f64;
        let (i, j) = (xi / cols, xi % cols);
        self.component_with(xi, u, n * self.col_probs[j], n * self.row_probs[i])
    }

    fn eval_sampled(&self, xi: usize, u: &Point) -> Point {
        let cols = self.a.ncols();
        let (i, j) = (xi / cols, xi % cols);
        self.component_with(xi, u, 1.0 / self.row_probs[i], 1.0 / self.col_probs[j])
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

    fn initial_point(&self) -> Point {
        self.constraint.barycenter(self.dim())
    }
}

/// `A_ij = z_i (1 − exp(−θ|i − j|))` with `z ~ N(0, I)` drawn from `rng`.
pub fn policeman_burglar_matrix(m: usize, theta: f64, rng: &mut RngStream) -> DMatrix<f64> {
    let z: Vec<f64> = (0..m).map(|_| rng.standard_normal()).collect();
    DMatrix::from_fn(m, m, |i, j| z[i] * (1.0 - (-theta * (i as f64 - j as f64).abs()).exp()))
}

/// `sqrt(‖x − P_Δ(x − Aᵀy)‖² + ‖y − P_Δ(y + Ax)‖²)`.
pub fn gradient_mapping_norm(game: &MatrixGame, u: &Point) -> Result<f64> {
    check_dim(game.dim(), u.len())?;
    Ok(game.natural_residual(u))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::project_simplex;
    use nalgebra::dvector;

    fn random_feasible(game: &MatrixGame, rng: &mut RngStream) -> Point {
        let raw = Point::from_fn(game.dim(), |_, _| rng.uniform());
        game.resolvent(1.0, &raw)
    }

    #[test]
    fn identity_game_has_uniform_importance_weights() {
        let g = MatrixGame::new(DMatrix::identity(2, 2), SamplingMode::Importance).unwrap();
        assert_eq!(g.row_probs(), &[0.5, 0.5]);
        assert_eq!(g.col_probs(), &[0.5, 0.5]);
    }

    #[test]
    fn importance_lipschitz_is_frobenius() {
        let a = DMatrix::from_diagonal(&dvector![3.0, 4.0]);
        let g = MatrixGame::new(a, SamplingMode::Importance).unwrap();
        assert!((g.constants().lipschitz - 5.0).abs() < 1e-12);
        assert!((g.constants().lipschitz_full - 4.0).abs() < 1e-6);
    }

    #[test]
    fn zero_row_rejected_under_importance() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]);
        assert!(MatrixGame::new(a.clone(), SamplingMode::Importance).is_err());
        assert!(MatrixGame::new(a, SamplingMode::Uniform).is_ok());
    }

    #[test]
    fn operator_matches_block_formula() {
        let a = DMatrix::from_row_slice(2, 3, &[1.0, 2.0, 3.0, -1.0, 0.5, 2.0]);
        let g = MatrixGame::new(a.clone(), SamplingMode::Uniform).unwrap();
        let u = dvector![0.2, 0.3, 0.5, 0.6, 0.4];
        let x = dvector![0.2, 0.3, 0.5];
        let y = dvector![0.6, 0.4];
        let expected_x = a.transpose() * &y;
        let expected_y = -(&a * &x);
        let f = g.eval_full(&u);
        for k in 0..3 {
            assert!((f[k] - expected_x[k]).abs() < 1e-15);
        }
        for k in 0..2 {
            assert!((f[3 + k] - expected_y[k]).abs() < 1e-15);
        }
    }

    #[test]
    fn sampled_component_is_reweighted_raw_component() {
        let mut rng = RngStream::new(5);
        let a = policeman_burglar_matrix(4, 0.8, &mut rng);
        let g = MatrixGame::new(a, SamplingMode::Importance).unwrap();
        let u = random_feasible(&g, &mut rng);
        for xi in 0..g.num_components() {
            let via_weight = g.eval_component(xi, &u) * g.sampling().importance_weight(xi);
            assert!((via_weight - g.eval_sampled(xi, &u)).norm() < 1e-12);
        }
    }

    #[test]
    fn policeman_burglar_structure() {
        let mut rng = RngStream::new(9);
        let a = policeman_burglar_matrix(6, 0.8, &mut rng);
        assert!((0..6).all(|i| a[(i, i)] == 0.0));
        let zero = policeman_burglar_matrix(4, 0.0, &mut rng);
        assert!(zero.iter().all(|&x| x == 0.0));
        let b = policeman_burglar_matrix(5, 0.8, &mut RngStream::new(3));
        let c = policeman_burglar_matrix(5, 0.8, &mut RngStream::new(3));
        assert_eq!(b, c);
    }

    #[test]
    fn gradient_mapping_matches_straight_line_formula() {
        let mut rng = RngStream::new(21);
        let a = DMatrix::from_fn(3, 3, |_, _| rng.standard_normal());
        let g = MatrixGame::new(a.clone(), SamplingMode::Uniform).unwrap();
        for _ in 0..20 {
            let u = random_feasible(&g, &mut rng);
            let x: Vec<f64> = u.as_slice()[..3].to_vec();
            let y: Vec<f64> = u.as_slice()[3..].to_vec();
            let mut sq = 0.0;
            let step_x: Vec<f64> = (0..3).map(|j| x[j] - (0..3).map(|i| a[(i, j)] * y[i]).sum::<f64>()).collect();
            let step_y: Vec<f64> = (0..3).map(|i| y[i] + (0..3).map(|j| a[(i, j)] * x[j]).sum::<f64>()).collect();
            for (v, p) in x.iter().zip(project_simplex(&step_x)) {
                sq += (v - p) * (v - p);
            }
            for (v, p) in y.iter().zip(project_simplex(&step_y)) {
                sq += (v - p) * (v - p);
            }
            assert!((gradient_mapping_norm(&g, &u).unwrap() - sq.sqrt()).abs() < 1e-14);
        }
    }

    #[test]
    fn zero_game_has_zero_gradient_mapping() {
        let g = MatrixGame::new(DMatrix::zeros(3, 2), SamplingMode::Uniform).unwrap();
        let u = g.initial_point();
        assert_eq!(gradient_mapping_norm(&g, &u).unwrap(), 0.0);
    }

    #[test]
    fn matching_pennies_saddle_point() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, -1.0, -1.0, 1.0]);
        let g = MatrixGame::new(a, SamplingMode::Importance).unwrap();
        let u = dvector![0.5, 0.5, 0.5, 0.5];
        assert!(gradient_mapping_norm(&g, &u).unwrap() < 1e-15);
        assert!(gradient_mapping_norm(&g, &dvector![1.0]).is_err());
    }

    #[test]
    fn component_cost_and_effective_count() {
        let g = MatrixGame::policeman_burglar(10, 0.8, 1, SamplingMode::Uniform).unwrap();
        assert!((g.constants().component_cost - 0.1).abs() < 1e-15);
        assert_eq!(g.effective_components(), 10);
        assert_eq!(g.num_components(), 100);
    }
}

//! The unconstrained quadratic saddle problem
//! `min_x max_y ½xᵀHx − hᵀx − ⟨Ax − b, y⟩` with the anti-bidiagonal `A` used
//! in lower-bound constructions.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::problem::{largest_eigenvalue, spectral_norm, FiniteSumProblem, Point, ProblemConstants};
use crate::sampling::SamplingDistribution;

/// `F(u) = (Hx − h − Aᵀy; Ax − b)` with `H = 2AᵀA`, split by rows of `A`:
/// `F_i(u) = (2n a_i(a_iᵀx) − h − n a_i y_i; n e_i(a_iᵀx) − b)`.
#[derive(Debug, Clone)]
pub struct QuadraticProgram {
    name: String,
    m: usize,
    a: DMatrix<f64>,
    h_mat: DMatrix<f64>,
    b: Point,
    h: Point,
    /// Nonzero columns of each row of `A`.
    supports: Vec<Vec<usize>>,
    sampling: SamplingDistribution,
    constants: ProblemConstants,
    solution: Point,
}

impl QuadraticProgram {
    pub fn new(m: usize) -> Result<Self> {
        if m < 2 {
            return Err(Error::InvalidArgument(format!("size m = {m} must be at least 2")));
        }
        let mut a = DMatrix::zeros(m, m);
        for r in 0..m - 1 {
            a[(r, m - 2 - r)] = -0.25;
            a[(r, m - 1 - r)] = 0.25;
        }
        a[(m - 1, 0)] = 0.25;
        let supports = (0..m).map(|r| (0..m).filter(|&c| a[(r, c)] != 0.0).collect()).collect();
        let h_mat = a.transpose() * &a * 2.0;
        let b = Point::from_element(m, 0.25);
        let mut h = Point::zeros(m);
        h[m - 1] = 0.25;

        let lu = a.clone().lu();
        let x = lu.solve(&b).ok_or(Error::Singular)?;
        let y = a.transpose().lu().solve(&(&h_mat * &x - &h)).ok_or(Error::Singular)?;
        let solution = Point::from_iterator(2 * m, x.iter().chain(y.iter()).copied());

        let mut jac = DMatrix::zeros(2 * m, 2 * m);
        jac.view_mut((0, 0), (m, m)).copy_from(&h_mat);
        jac.view_mut((0, m), (m, m)).copy_from(&(-a.transpose()));
        jac.view_mut((m, 0), (m, m)).copy_from(&a);

        let mut problem = Self {
            name: "ouyang-xu".into(),
            m,
            a,
            h_mat,
            b,
            h,
            supports,
            sampling: SamplingDistribution::uniform(m)?,
            constants: ProblemConstants {
                lipschitz: 0.0,
                lipschitz_full: spectral_norm(&jac),
                component_cost: 1.0 / m as f64,
            },
            solution,
        };
        problem.constants.lipschitz = problem.expected_lipschitz();
        Ok(problem)
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn hessian(&self) -> &DMatrix<f64> {
        &self.h_mat
    }

    /// Jacobian of `F_i` restricted to its support: the `x`-coordinates of
    /// row `i` followed by `y_i`. It is zero elsewhere.
    fn local_jacobian(&self, i: usize) -> (Vec<usize>, DMatrix<f64>) {
        let n = self.m as f64;
        let sup = &self.supports[i];
        let mut idx: Vec<usize> = sup.clone();
        idx.push(self.m + i);
        let k = idx.len();
        let mut j = DMatrix::zeros(k, k);
        for (r, &cr) in sup.iter().enumerate() {
            for (c, &cc) in sup.iter().enumerate() {
                j[(r, c)] = 2.0 * n * self.a[(i, cr)] * self.a[(i, cc)];
            }
            j[(r, k - 1)] = -n * self.a[(i, cr)];
            j[(k - 1, r)] = n * self.a[(i, cr)];
        }
        (idx, j)
    }

    /// `sqrt(λ_max((1/n) Σ J_iᵀ J_i))` under uniform sampling.
    fn expected_lipschitz(&self) -> f64 {
        let dim = 2 * self.m;
        let mut gram = DMatrix::<f64>::zeros(dim, dim);
        for i in 0..self.m {
            let (idx, j) = self.local_jacobian(i);
            let local = j.transpose() * &j / self.m as f64;
            for (r, &gr) in idx.iter().enumerate() {
                for (c, &gc) in idx.iter().enumerate() {
                    gram[(gr, gc)] += local[(r, c)];
                }
            }
        }
        largest_eigenvalue(&gram).sqrt()
    }
}

impl FiniteSumProblem for QuadraticProgram {
    fn name(&self) -> &str {
        &self.name
    }

    fn dim(&self) -> usize {
        2 * self.m
    }

    fn num_components(&self) -> usize {
        self.m
    }

    fn eval_full(&self, u: &Point) -> Point {
        let m = self.m;
        let x = u.rows(0, m);
        let y = u.rows(m, m);
        let mut out = Point::zeros(2 * m);
        out.rows_mut(0, m).copy_from(&(&self.h_mat * x - &self.h - self.a.tr_mul(&y)));
        out.rows_mut(m, m).copy_from(&(&self.a * x - &self.b));
        out
    }

    fn eval_component(&self, i: usize, u: &Point) -> Point {
        let m = self.m;
        let n = m as f64;
        let ax: f64 = self.supports[i].iter().map(|&c| self.a[(i, c)] * u[c]).sum();
        let yi = u[m + i];
        let mut out = Point::zeros(2 * m);
        for k in 0..m {
            out[k] = -self.h[k];
            out[m + k] = -self.b[k];
        }
        for &c in &self.supports[i] {
            out[c] += 2.0 * n * self.a[(i, c)] * ax - n * self.a[(i, c)] * yi;
        }
        out[m + i] += n * ax;
        out
    }

    fn resolvent(&self, _eta: f64, u: &Point) -> Point {
        u.clone()
    }

    fn constants(&self) -> ProblemConstants {
        self.constants
    }

    fn sampling(&self) -> &SamplingDistribution {
        &self.sampling
    }

    fn known_solution(&self) -> Option<&Point> {
        Some(&self.solution)
    }
}

//! Direct solver for the cell-centred pressure Poisson equation.
//!
//! The five-point Laplacian is the Kronecker sum of two 1D operators, so it is
//! diagonalised along y once with a symmetric eigendecomposition. Each y-mode is then a
//! tridiagonal system in x (Thomas algorithm), or is also diagonalised when x is periodic.

use nalgebra::{DMatrix, SymmetricEigen};
use ndarray::Array2;

use super::grid::{Boundary, FlowGrid};
use crate::error::{Error, Result};

/// 1D second-difference operator for `n` cells of width `h` with the given ends.
///
/// Prescribed-velocity ends are homogeneous Neumann, outflow ends put φ = 0 on the face.
pub(crate) fn operator_1d(n: usize, h: f64, lo: Boundary, hi: Boundary) -> DMatrix<f64> {
    let mut a = DMatrix::zeros(n, n);
    let inv = 1.0 / (h * h);
    for i in 0..n {
        a[(i, i)] = -2.0 * inv;
        if i > 0 {
            a[(i, i - 1)] = inv;
        }
        if i + 1 < n {
            a[(i, i + 1)] = inv;
        }
    }
    let end = |b: Boundary| match b {
        Boundary::Outflow => -3.0 * inv,
        Boundary::Periodic => -2.0 * inv,
        Boundary::Inflow(_) | Boundary::Slip => -inv,
    };
    a[(0, 0)] = end(lo);
    a[(n - 1, n - 1)] = end(hi);
    if lo == Boundary::Periodic {
        a[(0, n - 1)] += inv;
        a[(n - 1, 0)] += inv;
    }
    a
}

fn is_singular(lo: Boundary, hi: Boundary) -> bool {
    lo != Boundary::Outflow && hi != Boundary::Outflow
}

#[derive(Clone, Debug)]
enum XSolve {
    /// Tridiagonal coefficients of the x operator.
    Thomas { lower: Vec<f64>, diag: Vec<f64>, upper: Vec<f64> },
    /// Eigenvectors (columns) and eigenvalues of the periodic x operator.
    Modes { vectors: Array2<f64>, values: Vec<f64> },
}

#[derive(Clone, Debug)]
pub struct PoissonSolver {
    nx: usize,
    ny: usize,
    /// Orthonormal eigenvectors of the y operator as columns.
    qy: Array2<f64>,
    qy_t: Array2<f64>,
    lambda_y: Vec<f64>,
    x: XSolve,
    /// y-mode index of the global null space, if any.
    null_mode: Option<usize>,
}

fn eigen(a: DMatrix<f64>) -> (Array2<f64>, Vec<f64>) {
    let n = a.nrows();
    let e = SymmetricEigen::new(a);
    let q = Array2::from_shape_fn((n, n), |(i, k)| e.eigenvectors[(i, k)]);
    (q, e.eigenvalues.iter().copied().collect())
}

impl PoissonSolver {
    pub fn new(grid: &FlowGrid) -> Self {
        let (nx, ny) = (grid.nx, grid.ny);
        let (qy, mut lambda_y) = eigen(operator_1d(ny, grid.dy, grid.south, grid.north));
        let lx = operator_1d(nx, grid.dx, grid.west, grid.east);
        let null_mode = if is_singular(grid.south, grid.north) && is_singular(grid.west, grid.east) {
            let k = (0..ny)
                .min_by(|&a, &b| lambda_y[a].abs().total_cmp(&lambda_y[b].abs()))
                .expect("ny ≥ 4");
            lambda_y[k] = 0.0;
            Some(k)
        } else {
            None
        };
        let x = if grid.periodic_x() {
            let (vectors, mut values) = eigen(lx);
            if null_mode.is_some() {
                let k = (0..nx)
                    .min_by(|&a, &b| values[a].abs().total_cmp(&values[b].abs()))
                    .expect("nx ≥ 4");
                values[k] = 0.0;
            }
            XSolve::Modes { vectors, values }
        } else {
            XSolve::Thomas {
                lower: (0..nx).map(|i| if i > 0 { lx[(i, i - 1)] } else { 0.0 }).collect(),
                diag: (0..nx).map(|i| lx[(i, i)]).collect(),
                upper: (0..nx).map(|i| if i + 1 < nx { lx[(i, i + 1)] } else { 0.0 }).collect(),
            }
        };
        PoissonSolver {
            nx,
            ny,
            qy_t: qy.t().to_owned(),
            qy,
            lambda_y,
            x,
            null_mode,
        }
    }

    /// Whether the operator has a constant null space (pinned to zero mean).
    pub fn is_singular(&self) -> bool {
        self.null_mode.is_some()
    }

    /// Solve `L φ = rhs`. In the singular case the mean of `rhs` is discarded and the
    /// returned φ has no component along the null space.
    pub fn solve(&self, rhs: &Array2<f64>) -> Result<Array2<f64>> {
        if rhs.dim() != (self.nx, self.ny) {
            return Err(Error::Argument(format!(
                "rhs has shape {:?}, expected {:?}",
                rhs.dim(),
                (self.nx, self.ny)
            )));
        }
        let mut hat = rhs.dot(&self.qy);
        match &self.x {
            XSolve::Thomas { lower, diag, upper } => {
                let mut c = vec![0.0; self.nx];
                let mut d = vec![0.0; self.nx];
                for k in 0..self.ny {
                    let lam = self.lambda_y[k];
                    let pinned = self.null_mode == Some(k);
                    // the pinned mode fixes its last unknown at zero
                    let n = if pinned { self.nx - 1 } else { self.nx };
                    let mut col = hat.column_mut(k);
                    let mut beta = diag[0] + lam;
                    c[0] = upper[0] / beta;
                    d[0] = col[0] / beta;
                    for i in 1..n {
                        beta = diag[i] + lam - lower[i] * c[i - 1];
                        c[i] = upper[i] / beta;
                        d[i] = (col[i] - lower[i] * d[i - 1]) / beta;
                    }
                    col[n - 1] = d[n - 1];
                    for i in (0..n - 1).rev() {
                        col[i] = d[i] - c[i] * col[i + 1];
                    }
                    if pinned {
                        col[self.nx - 1] = 0.0;
                        let mean = col.sum() / self.nx as f64;
                        col.mapv_inplace(|x| x - mean);
                    }
                }
            }
            XSolve::Modes { vectors, values } => {
                let mut full = vectors.t().dot(&hat);
                for ((i, k), x) in full.indexed_iter_mut() {
                    let denom = values[i] + self.lambda_y[k];
                    *x = if denom == 0.0 { 0.0 } else { *x / denom };
                }
                hat = vectors.dot(&full);
            }
        }
        Ok(hat.dot(&self.qy_t))
    }
}

/// Apply the 2D operator directly, for residual checks.
#[cfg(test)]
pub(crate) fn apply_laplacian(grid: &FlowGrid, phi: &Array2<f64>) -> Array2<f64> {
    let lx = operator_1d(grid.nx, grid.dx, grid.west, grid.east);
    let ly = operator_1d(grid.ny, grid.dy, grid.south, grid.north);
    let to_nd = |m: &DMatrix<f64>| Array2::from_shape_fn((m.nrows(), m.ncols()), |(i, j)| m[(i, j)]);
    to_nd(&lx).dot(phi) + phi.dot(&to_nd(&ly).t())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vec2::Vec2;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_field(nx: usize, ny: usize, seed: u64) -> Array2<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Array2::from_shape_fn((nx, ny), |_| rng.gen_range(-1.0..1.0))
    }

    fn residual(grid: &FlowGrid, rhs: &Array2<f64>) -> f64 {
        let solver = PoissonSolver::new(grid);
        let mut rhs = rhs.clone();
        if solver.is_singular() {
            let mean = rhs.mean().unwrap();
            rhs.mapv_inplace(|x| x - mean);
        }
        let phi = solver.solve(&rhs).unwrap();
        let r = apply_laplacian(grid, &phi) - &rhs;
        r.iter().fold(0.0f64, |m, &x| m.max(x.abs())) / rhs.iter().fold(0.0f64, |m, &x| m.max(x.abs()))
    }

    #[test]
    fn channel_operator_is_solved_to_roundoff() {
        let g = FlowGrid::new(
            24,
            12,
            0.3,
            0.2,
            Vec2::ZERO,
            [Boundary::Inflow(Vec2::new(1.0, 0.0)), Boundary::Outflow, Boundary::Slip, Boundary::Slip],
        )
        .unwrap();
        assert!(!PoissonSolver::new(&g).is_singular());
        assert!(residual(&g, &random_field(24, 12, 1)) < 1e-11);
    }

    #[test]
    fn periodic_operator_is_solved_up_to_the_mean() {
        let g = FlowGrid::periodic(16, 12, 0.1, 0.15, Vec2::ZERO).unwrap();
        assert!(PoissonSolver::new(&g).is_singular());
        assert!(residual(&g, &random_field(16, 12, 2)) < 1e-11);
    }

    #[test]
    fn closed_box_is_pinned() {
        let g = FlowGrid::new(10, 8, 1.0, 1.0, Vec2::ZERO, [Boundary::Slip; 4]).unwrap();
        assert!(residual(&g, &random_field(10, 8, 3)) < 1e-11);
    }

    #[test]
    fn periodic_y_with_outflow_x() {
        let g = FlowGrid::new(
            12,
            8,
            0.5,
            0.5,
            Vec2::ZERO,
            [Boundary::Inflow(Vec2::new(1.0, 0.0)), Boundary::Outflow, Boundary::Periodic, Boundary::Periodic],
        )
        .unwrap();
        assert!(residual(&g, &random_field(12, 8, 4)) < 1e-11);
    }

    #[test]
    fn shape_mismatch_is_an_argument_error() {
        let g = FlowGrid::periodic(8, 8, 1.0, 1.0, Vec2::ZERO).unwrap();
        let r = PoissonSolver::new(&g).solve(&Array2::zeros((4, 4)));
        assert!(matches!(r, Err(Error::Argument(_))));
    }
}

//! Cell-centred velocity gradients, Smagorinsky eddy viscosity and vorticity.

use ndarray::Array2;

use super::grid::FlowGrid;
use super::state::{pad_u, pad_v, FlowState, G};
use crate::error::{Error, Result};

/// Velocity gradient tensor at cell centres.
#[derive(Clone, Debug)]
pub struct CellGradients {
    pub dudx: Array2<f64>,
    pub dudy: Array2<f64>,
    pub dvdx: Array2<f64>,
    pub dvdy: Array2<f64>,
}

/// Normal derivatives from the two faces of each cell; cross derivatives by central
/// differences of the cell-averaged components over neighbouring cells (ghosts at edges).
pub fn cell_gradients(state: &FlowState, grid: &FlowGrid) -> CellGradients {
    let (nx, ny) = (grid.nx, grid.ny);
    let pu = pad_u(grid, &state.u);
    let pv = pad_v(grid, &state.v);
    // padded index of cell (i, j) is (i + G, j + G); u face i of that cell is pu[i + G]
    let uc = |i: usize, j: usize| 0.5 * (pu[[i, j]] + pu[[i + 1, j]]);
    let vc = |i: usize, j: usize| 0.5 * (pv[[i, j]] + pv[[i, j + 1]]);
    let mut g = CellGradients {
        dudx: Array2::zeros((nx, ny)),
        dudy: Array2::zeros((nx, ny)),
        dvdx: Array2::zeros((nx, ny)),
        dvdy: Array2::zeros((nx, ny)),
    };
    for i in 0..nx {
        for j in 0..ny {
            let (pi, pj) = (i + G, j + G);
            g.dudx[[i, j]] = (pu[[pi + 1, pj]] - pu[[pi, pj]]) / grid.dx;
            g.dvdy[[i, j]] = (pv[[pi, pj + 1]] - pv[[pi, pj]]) / grid.dy;
            g.dudy[[i, j]] = (uc(pi, pj + 1) - uc(pi, pj - 1)) / (2.0 * grid.dy);
            g.dvdx[[i, j]] = (vc(pi + 1, pj) - vc(pi - 1, pj)) / (2.0 * grid.dx);
        }
    }
    g
}

/// Smagorinsky eddy viscosity `(c_s·Δ)²·sqrt(2·S_ij·S_ij)` with `Δ = sqrt(dx·dy)`.
pub fn smagorinsky(state: &FlowState, grid: &FlowGrid, c_s: f64) -> Result<Array2<f64>> {
    if !(c_s >= 0.0 && c_s.is_finite()) {
        return Err(Error::Argument(format!("Smagorinsky coefficient must be ≥ 0, got {c_s}")));
    }
    if c_s == 0.0 {
        return Ok(Array2::zeros((grid.nx, grid.ny)));
    }
    let g = cell_gradients(state, grid);
    let scale = (c_s * c_s) * grid.dx * grid.dy;
    Ok(Array2::from_shape_fn((grid.nx, grid.ny), |ix| {
        let s11 = g.dudx[ix];
        let s22 = g.dvdy[ix];
        let s12 = 0.5 * (g.dudy[ix] + g.dvdx[ix]);
        scale * (2.0 * (s11 * s11 + s22 * s22 + 2.0 * s12 * s12)).sqrt()
    }))
}

/// Cell-centred vorticity `∂v/∂x − ∂u/∂y`.
pub fn curl(state: &FlowState, grid: &FlowGrid) -> Array2<f64> {
    let g = cell_gradients(state, grid);
    g.dvdx - g.dudy
}

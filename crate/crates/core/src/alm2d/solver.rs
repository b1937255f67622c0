//! Projection-method time stepping of the filtered incompressible equations.
//!
//! Advection is in conservative flux form with upwind-biased quadratic (QUICK) face
//! interpolation, diffusion uses `ν + ν_sgs` with the eddy viscosity frozen over a step,
//! and time integration is three-stage SSP Runge–Kutta with a projection after each stage.

use ndarray::{Array2, Zip};

use super::forcing::BodyForce;
use super::grid::{Boundary, FlowGrid};
use super::les::smagorinsky;
use super::poisson::PoissonSolver;
use super::state::{pad_cells, pad_u, pad_v, FlowState, G};
use crate::error::{Error, Result};

/// Largest normalised divergence accepted after a step.
pub const DIVERGENCE_TOLERANCE: f64 = 1e-8;
/// Advective stability bound: `dt·max|u|/h ≤ 0.5`.
pub const ADVECTIVE_LIMIT: f64 = 0.5;
/// Diffusive stability bound: `dt·ν/h² ≤ 0.25`.
pub const DIFFUSIVE_LIMIT: f64 = 0.25;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FlowParams {
    /// Kinematic viscosity, m²/s.
    pub nu: f64,
    pub c_s: f64,
    /// Density, kg/m³. Body forces are divided by it and pressure is multiplied by it.
    pub rho: f64,
}

impl FlowParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.nu >= 0.0 && self.nu.is_finite()) {
            return Err(Error::Config(format!("viscosity must be ≥ 0, got {}", self.nu)));
        }
        if !(self.c_s >= 0.0 && self.c_s.is_finite()) {
            return Err(Error::Config(format!("Smagorinsky coefficient must be ≥ 0, got {}", self.c_s)));
        }
        if !(self.rho > 0.0 && self.rho.is_finite()) {
            return Err(Error::Config(format!("density must be positive, got {}", self.rho)));
        }
        Ok(())
    }
}

/// Diagnostics of one completed step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepStats {
    pub dt: f64,
    pub normalized_divergence: f64,
    pub max_nu_sgs: f64,
}

#[derive(Clone, Debug)]
pub struct FlowSolver {
    pub grid: FlowGrid,
    pub params: FlowParams,
    poisson: PoissonSolver,
}

#[inline]
fn quick(m1: f64, p0: f64, p1: f64, p2: f64, a: f64) -> f64 {
    if a >= 0.0 {
        (6.0 * p0 + 3.0 * p1 - m1) * 0.125
    } else {
        (6.0 * p1 + 3.0 * p0 - p2) * 0.125
    }
}

impl FlowSolver {
    pub fn new(grid: FlowGrid, params: FlowParams) -> Result<Self> {
        grid.validate()?;
        params.validate()?;
        Ok(FlowSolver {
            poisson: PoissonSolver::new(&grid),
            grid,
            params,
        })
    }

    fn min_spacing(&self) -> f64 {
        self.grid.dx.min(self.grid.dy)
    }

    /// Largest step allowed by the advective and diffusive limits, with the name of the
    /// binding one.
    pub fn stability_limit(&self, max_velocity: f64, max_nu_sgs: f64) -> (f64, &'static str) {
        let h = self.min_spacing();
        let adv = if max_velocity > 0.0 { ADVECTIVE_LIMIT * h / max_velocity } else { f64::INFINITY };
        let nu = self.params.nu + max_nu_sgs;
        let diff = if nu > 0.0 { DIFFUSIVE_LIMIT * h * h / nu } else { f64::INFINITY };
        if adv <= diff {
            (adv, "advective")
        } else {
            (diff, "diffusive")
        }
    }

    /// Stability limit for `state` using its stored eddy viscosity.
    pub fn max_stable_dt(&self, state: &FlowState) -> f64 {
        let nu_max = state.nu_sgs.iter().fold(0.0f64, |m, &x| m.max(x));
        self.stability_limit(state.max_velocity(), nu_max).0
    }

    /// Advance `state` by `dt` under the body force `force` (N/m³).
    ///
    /// On error `state` is left unchanged.
    pub fn advance(&self, state: &mut FlowState, dt: f64, force: &BodyForce) -> Result<StepStats> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::Argument(format!("time step must be positive, got {dt}")));
        }
        let grid = &self.grid;
        let nu_sgs = smagorinsky(state, grid, self.params.c_s)?;
        let max_nu_sgs = nu_sgs.iter().fold(0.0f64, |m, &x| m.max(x));
        let (limit, which) = self.stability_limit(state.max_velocity(), max_nu_sgs);
        if dt > limit {
            return Err(Error::Cfl { dt, suggested: limit, limit: which });
        }
        let nu_eff = pad_cells(grid, &nu_sgs.mapv(|x| x + self.params.nu));

        let (u0, v0) = (&state.u, &state.v);
        // stage 1
        let (ru, rv) = self.tendency(u0, v0, &nu_eff, force);
        let mut u1 = u0 + &(&ru * dt);
        let mut v1 = v0 + &(&rv * dt);
        self.project(&mut u1, &mut v1)?;
        // stage 2
        let (ru, rv) = self.tendency(&u1, &v1, &nu_eff, force);
        let mut u2 = Array2::zeros(u0.raw_dim());
        let mut v2 = Array2::zeros(v0.raw_dim());
        Zip::from(&mut u2).and(u0).and(&u1).and(&ru).for_each(|o, &a, &b, &r| *o = 0.75 * a + 0.25 * (b + dt * r));
        Zip::from(&mut v2).and(v0).and(&v1).and(&rv).for_each(|o, &a, &b, &r| *o = 0.75 * a + 0.25 * (b + dt * r));
        self.project(&mut u2, &mut v2)?;
        // stage 3
        let (ru, rv) = self.tendency(&u2, &v2, &nu_eff, force);
        let (third, two_thirds) = (1.0 / 3.0, 2.0 / 3.0);
        let mut u3 = Array2::zeros(u0.raw_dim());
        let mut v3 = Array2::zeros(v0.raw_dim());
        Zip::from(&mut u3).and(u0).and(&u2).and(&ru).for_each(|o, &a, &b, &r| *o = third * a + two_thirds * (b + dt * r));
        Zip::from(&mut v3).and(v0).and(&v2).and(&rv).for_each(|o, &a, &b, &r| *o = third * a + two_thirds * (b + dt * r));
        let phi = self.project(&mut u3, &mut v3)?;

        let mut next = FlowState {
            u: u3,
            v: v3,
            p: phi.mapv(|x| x * self.params.rho / (two_thirds * dt)),
            nu_sgs,
            t: state.t + dt,
        };
        next.enforce_boundaries(grid);
        let div = next.normalized_divergence(grid);
        if !(div <= DIVERGENCE_TOLERANCE) {
            return Err(Error::Solver(format!(
                "normalised divergence {div:.3e} exceeds {DIVERGENCE_TOLERANCE:e} at t = {:.6} s",
                next.t
            )));
        }
        if !next.u.iter().chain(next.v.iter()).all(|x| x.is_finite()) {
            return Err(Error::Solver(format!("non-finite velocity at t = {:.6} s", next.t)));
        }
        *state = next;
        Ok(StepStats { dt, normalized_divergence: div, max_nu_sgs })
    }

    /// Make `(u, v)` discretely divergence-free; returns the potential φ with
    /// `u ← u − ∇φ`.
    pub fn project(&self, u: &mut Array2<f64>, v: &mut Array2<f64>) -> Result<Array2<f64>> {
        let grid = &self.grid;
        let (nx, ny) = (grid.nx, grid.ny);
        {
            // prescribed faces first, so the divergence sees them
            let mut tmp = FlowState {
                u: std::mem::take(u),
                v: std::mem::take(v),
                p: Array2::zeros((0, 0)),
                nu_sgs: Array2::zeros((0, 0)),
                t: 0.0,
            };
            tmp.enforce_boundaries(grid);
            *u = tmp.u;
            *v = tmp.v;
        }
        let mut rhs = Array2::from_shape_fn((nx, ny), |(i, j)| {
            (u[[i + 1, j]] - u[[i, j]]) / grid.dx + (v[[i, j + 1]] - v[[i, j]]) / grid.dy
        });
        if self.poisson.is_singular() {
            let mean = rhs.mean().unwrap_or(0.0);
            rhs.mapv_inplace(|x| x - mean);
        }
        let phi = self.poisson.solve(&rhs)?;

        for j in 0..ny {
            for i in 1..nx {
                u[[i, j]] -= (phi[[i, j]] - phi[[i - 1, j]]) / grid.dx;
            }
            match grid.west {
                Boundary::Periodic => u[[0, j]] -= (phi[[0, j]] - phi[[nx - 1, j]]) / grid.dx,
                Boundary::Outflow => u[[0, j]] -= 2.0 * phi[[0, j]] / grid.dx,
                _ => {}
            }
            match grid.east {
                Boundary::Periodic => u[[nx, j]] = u[[0, j]],
                Boundary::Outflow => u[[nx, j]] += 2.0 * phi[[nx - 1, j]] / grid.dx,
                _ => {}
            }
        }
        for i in 0..nx {
            for j in 1..ny {
                v[[i, j]] -= (phi[[i, j]] - phi[[i, j - 1]]) / grid.dy;
            }
            match grid.south {
                Boundary::Periodic => v[[i, 0]] -= (phi[[i, 0]] - phi[[i, ny - 1]]) / grid.dy,
                Boundary::Outflow => v[[i, 0]] -= 2.0 * phi[[i, 0]] / grid.dy,
                _ => {}
            }
            match grid.north {
                Boundary::Periodic => v[[i, ny]] = v[[i, 0]],
                Boundary::Outflow => v[[i, ny]] += 2.0 * phi[[i, ny - 1]] / grid.dy,
                _ => {}
            }
        }
        Ok(phi)
    }

    /// Momentum tendency on active faces (zero elsewhere): −advection + diffusion + f/ρ.
    fn tendency(
        &self,
        u: &Array2<f64>,
        v: &Array2<f64>,
        nu: &Array2<f64>,
        force: &BodyForce,
    ) -> (Array2<f64>, Array2<f64>) {
        let grid = &self.grid;
        let (nx, ny) = (grid.nx, grid.ny);
        let pu = pad_u(grid, u);
        let pv = pad_v(grid, v);
        let (idx, idy) = (1.0 / grid.dx, 1.0 / grid.dy);
        let (idx2, idy2) = (idx * idx, idy * idy);
        let inv_rho = 1.0 / self.params.rho;

        let mut ru = Array2::zeros((nx + 1, ny));
        let (a0, a1) = grid.active_u();
        // x-flux of u through the cell whose west face is padded column `c`
        let fxu = |c: usize, j: usize| {
            let a = 0.5 * (pu[[c, j]] + pu[[c + 1, j]]);
            a * quick(pu[[c - 1, j]], pu[[c, j]], pu[[c + 1, j]], pu[[c + 2, j]], a)
        };
        // y-flux of u through the corner above padded (i, j)
        let fyu = |i: usize, j: usize| {
            let b = 0.5 * (pv[[i - 1, j + 1]] + pv[[i, j + 1]]);
            b * quick(pu[[i, j - 1]], pu[[i, j]], pu[[i, j + 1]], pu[[i, j + 2]], b)
        };
        for i in a0..a1 {
            let pi = i + G;
            for j in 0..ny {
                let pj = j + G;
                let adv = (fxu(pi, pj) - fxu(pi - 1, pj)) * idx + (fyu(pi, pj) - fyu(pi, pj - 1)) * idy;
                let c = pu[[pi, pj]];
                let ne = 0.25 * (nu[[pi - 1, pj]] + nu[[pi, pj]] + nu[[pi - 1, pj + 1]] + nu[[pi, pj + 1]]);
                let se = 0.25 * (nu[[pi - 1, pj - 1]] + nu[[pi, pj - 1]] + nu[[pi - 1, pj]] + nu[[pi, pj]]);
                let diff = (nu[[pi, pj]] * (pu[[pi + 1, pj]] - c) - nu[[pi - 1, pj]] * (c - pu[[pi - 1, pj]])) * idx2
                    + (ne * (pu[[pi, pj + 1]] - c) - se * (c - pu[[pi, pj - 1]])) * idy2;
                ru[[i, j]] = diff - adv + force.fx[[i, j]] * inv_rho;
            }
        }

        let mut rv = Array2::zeros((nx, ny + 1));
        let (b0, b1) = grid.active_v();
        let fyv = |i: usize, c: usize| {
            let a = 0.5 * (pv[[i, c]] + pv[[i, c + 1]]);
            a * quick(pv[[i, c - 1]], pv[[i, c]], pv[[i, c + 1]], pv[[i, c + 2]], a)
        };
        let fxv = |i: usize, j: usize| {
            let b = 0.5 * (pu[[i + 1, j - 1]] + pu[[i + 1, j]]);
            b * quick(pv[[i - 1, j]], pv[[i, j]], pv[[i + 1, j]], pv[[i + 2, j]], b)
        };
        for i in 0..nx {
            let pi = i + G;
            for j in b0..b1 {
                let pj = j + G;
                let adv = (fyv(pi, pj) - fyv(pi, pj - 1)) * idy + (fxv(pi, pj) - fxv(pi - 1, pj)) * idx;
                let c = pv[[pi, pj]];
                let en = 0.25 * (nu[[pi, pj - 1]] + nu[[pi, pj]] + nu[[pi + 1, pj - 1]] + nu[[pi + 1, pj]]);
                let wn = 0.25 * (nu[[pi - 1, pj - 1]] + nu[[pi - 1, pj]] + nu[[pi, pj - 1]] + nu[[pi, pj]]);
                let diff = (nu[[pi, pj]] * (pv[[pi, pj + 1]] - c) - nu[[pi, pj - 1]] * (c - pv[[pi, pj - 1]])) * idy2
                    + (en * (pv[[pi + 1, pj]] - c) - wn * (c - pv[[pi - 1, pj]])) * idx2;
                rv[[i, j]] = diff - adv + force.fy[[i, j]] * inv_rho;
            }
        }
        (ru, rv)
    }
}

//! Gaussian projection of blade forces onto the staggered grid.

use std::f64::consts::PI;

use ndarray::Array2;

use super::grid::FlowGrid;
use crate::error::{Error, Result};
use crate::vec2::Vec2;

/// Kernel support radius in units of ε; the truncated mass is `exp(−16)`.
pub const SUPPORT_EPSILONS: f64 = 4.0;
/// Required clearance between a source and the domain edge, in units of ε.
pub const MARGIN_EPSILONS: f64 = 3.0;

/// Force that a blade element exerts on the fluid's surroundings, per unit span.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ActuatorSource {
    pub position: Vec2,
    /// Aerodynamic force on the blade, N/m. The fluid receives the opposite.
    pub force: Vec2,
    pub epsilon: f64,
}

impl ActuatorSource {
    pub fn validate(&self, grid: &FlowGrid) -> Result<()> {
        if !(self.epsilon >= 2.0 * grid.dx.max(grid.dy)) {
            return Err(Error::Config(format!(
                "smoothing width {} m is below twice the cell size {} m",
                self.epsilon,
                grid.dx.max(grid.dy)
            )));
        }
        if !self.position.is_finite() || !self.force.is_finite() {
            return Err(Error::Config("actuator source must be finite".into()));
        }
        let clearance = grid.edge_clearance(self.position);
        if clearance < MARGIN_EPSILONS * self.epsilon {
            return Err(Error::Config(format!(
                "actuator source at ({:.3}, {:.3}) is {clearance:.3} m from the domain edge, needs {:.3} m",
                self.position.x,
                self.position.y,
                MARGIN_EPSILONS * self.epsilon
            )));
        }
        Ok(())
    }
}

/// `exp(−r²/ε²)/(π ε²)`, unit integral over the plane.
pub fn gaussian_kernel(r2: f64, epsilon: f64) -> f64 {
    let e2 = epsilon * epsilon;
    (-r2 / e2).exp() / (PI * e2)
}

/// Body force per unit volume (per unit span), N/m³, on u and v faces.
#[derive(Clone, Debug, PartialEq)]
pub struct BodyForce {
    pub fx: Array2<f64>,
    pub fy: Array2<f64>,
}

impl BodyForce {
    pub fn zeros(grid: &FlowGrid) -> Self {
        BodyForce {
            fx: Array2::zeros((grid.nx + 1, grid.ny)),
            fy: Array2::zeros((grid.nx, grid.ny + 1)),
        }
    }

    /// Riemann-sum integral over the domain, N/m. Duplicate periodic faces are skipped.
    pub fn integral(&self, grid: &FlowGrid) -> Vec2 {
        let nfx = if grid.periodic_x() { grid.nx } else { grid.nx + 1 };
        let nfy = if grid.periodic_y() { grid.ny } else { grid.ny + 1 };
        let sx: f64 = self.fx.rows().into_iter().take(nfx).map(|r| r.sum()).sum();
        let sy: f64 = self.fy.columns().into_iter().take(nfy).map(|c| c.sum()).sum();
        Vec2::new(sx, sy) * grid.cell_area()
    }
}

/// Spread the reaction of every source onto the faces within `SUPPORT_EPSILONS·ε`.
pub fn project_forces(sources: &[ActuatorSource], grid: &FlowGrid) -> Result<BodyForce> {
    let mut out = BodyForce::zeros(grid);
    for src in sources {
        src.validate(grid)?;
        if src.force == Vec2::ZERO {
            continue;
        }
        let reach = SUPPORT_EPSILONS * src.epsilon;
        let reach2 = reach * reach;
        let q = src.position - grid.origin;
        let range = |c: f64, h: f64, shift: f64, n: usize| {
            let lo = ((c - reach) / h - shift).floor().max(0.0) as usize;
            let hi = (((c + reach) / h - shift).ceil().max(0.0) as usize).min(n - 1);
            lo..=hi
        };
        for i in range(q.x, grid.dx, 0.0, grid.nx + 1) {
            for j in range(q.y, grid.dy, 0.5, grid.ny) {
                let r2 = (grid.u_point(i, j) - src.position).norm_sq();
                if r2 <= reach2 {
                    out.fx[[i, j]] -= src.force.x * gaussian_kernel(r2, src.epsilon);
                }
            }
        }
        for i in range(q.x, grid.dx, 0.5, grid.nx) {
            for j in range(q.y, grid.dy, 0.0, grid.ny + 1) {
                let r2 = (grid.v_point(i, j) - src.position).norm_sq();
                if r2 <= reach2 {
                    out.fy[[i, j]] -= src.force.y * gaussian_kernel(r2, src.epsilon);
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alm2d::grid::Boundary;
    use proptest::prelude::*;

    fn grid() -> FlowGrid {
        FlowGrid::new(
            60,
            50,
            0.1,
            0.1,
            Vec2::new(-3.0, -2.5),
            [Boundary::Inflow(Vec2::new(1.0, 0.0)), Boundary::Outflow, Boundary::Slip, Boundary::Slip],
        )
        .unwrap()
    }

    #[test]
    fn integral_equals_reaction() {
        let g = grid();
        for eps in [0.2, 0.25, 0.4] {
            let src = ActuatorSource { position: Vec2::new(0.137, -0.213), force: Vec2::new(40.0, -25.0), epsilon: eps };
            let total = project_forces(&[src], &g).unwrap().integral(&g);
            let expected = -src.force;
            assert!((total - expected).norm() <= 1e-3 * expected.norm(), "ε = {eps}: {total:?}");
        }
    }

    #[test]
    fn zero_force_gives_zero_field() {
        let g = grid();
        let src = ActuatorSource { position: Vec2::ZERO, force: Vec2::ZERO, epsilon: 0.25 };
        assert_eq!(project_forces(&[src], &g).unwrap(), BodyForce::zeros(&g));
    }

    #[test]
    fn mirrored_sources_give_mirrored_field() {
        // the grid is symmetric about y = 0
        let g = grid();
        let f = Vec2::new(10.0, 0.0);
        let a = ActuatorSource { position: Vec2::new(0.3, 0.77), force: f, epsilon: 0.25 };
        let b = ActuatorSource { position: Vec2::new(0.3, -0.77), force: f, epsilon: 0.25 };
        let field = project_forces(&[a, b], &g).unwrap();
        let ny = g.ny;
        let scale = field.fx.iter().fold(0.0f64, |m, &x| m.max(x.abs()));
        for i in 0..=g.nx {
            for j in 0..ny {
                assert!((field.fx[[i, j]] - field.fx[[i, ny - 1 - j]]).abs() <= 1e-12 * scale);
            }
        }
    }

    #[test]
    fn sources_near_edges_or_too_narrow_are_rejected() {
        let g = grid();
        let near = ActuatorSource { position: Vec2::new(-2.5, 0.0), force: Vec2::new(1.0, 0.0), epsilon: 0.25 };
        assert!(matches!(project_forces(&[near], &g), Err(Error::Config(_))));
        let narrow = ActuatorSource { position: Vec2::ZERO, force: Vec2::new(1.0, 0.0), epsilon: 0.15 };
        assert!(matches!(project_forces(&[narrow], &g), Err(Error::Config(_))));
    }

    proptest! {
        #[test]
        fn projection_is_linear(
            fx1 in -50.0..50.0f64, fy1 in -50.0..50.0f64,
            fx2 in -50.0..50.0f64, fy2 in -50.0..50.0f64,
            x in -1.5..1.5f64, y in -1.0..1.0f64,
        ) {
            let g = grid();
            let src = |f: Vec2| ActuatorSource { position: Vec2::new(x, y), force: f, epsilon: 0.25 };
            let (f1, f2) = (Vec2::new(fx1, fy1), Vec2::new(fx2, fy2));
            let a = project_forces(&[src(f1)], &g).unwrap();
            let b = project_forces(&[src(f2)], &g).unwrap();
            let ab = project_forces(&[src(f1 + f2)], &g).unwrap();
            let scale = 1.0 + (f1.norm() + f2.norm()) * gaussian_kernel(0.0, 0.25);
            for (s, (p, q)) in ab.fx.iter().zip(a.fx.iter().zip(&b.fx)) {
                prop_assert!((s - (p + q)).abs() <= 1e-12 * scale);
            }
            for (s, (p, q)) in ab.fy.iter().zip(a.fy.iter().zip(&b.fy)) {
                prop_assert!((s - (p + q)).abs() <= 1e-12 * scale);
            }
        }
    }
}

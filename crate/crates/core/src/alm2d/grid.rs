use crate::error::{Error, Result};
use crate::vec2::Vec2;

/// Condition on one side of the rectangular domain.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Boundary {
    /// Dirichlet velocity.
    Inflow(Vec2),
    /// Zero pressure, zero normal gradient of velocity.
    Outflow,
    /// Impermeable free-slip wall.
    Slip,
    /// Must be paired with the opposite side.
    Periodic,
}

impl Boundary {
    /// Whether the normal velocity on this side is prescribed.
    pub fn fixes_normal_velocity(self) -> bool {
        matches!(self, Boundary::Inflow(_) | Boundary::Slip)
    }
}

/// Uniform staggered (MAC) grid.
///
/// Cell `(i, j)` spans `[x0 + i·dx, x0 + (i+1)·dx] × [y0 + j·dy, y0 + (j+1)·dy]`.
/// `u[i, j]` lives on the west face of cell `(i, j)`, `v[i, j]` on its south face.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FlowGrid {
    pub nx: usize,
    pub ny: usize,
    pub dx: f64,
    pub dy: f64,
    pub origin: Vec2,
    pub west: Boundary,
    pub east: Boundary,
    pub south: Boundary,
    pub north: Boundary,
}

impl FlowGrid {
    pub fn new(
        nx: usize,
        ny: usize,
        dx: f64,
        dy: f64,
        origin: Vec2,
        [west, east, south, north]: [Boundary; 4],
    ) -> Result<Self> {
        let g = FlowGrid { nx, ny, dx, dy, origin, west, east, south, north };
        g.validate()?;
        Ok(g)
    }

    /// Doubly periodic box `[x0, x0 + nx·dx] × [y0, y0 + ny·dy]`.
    pub fn periodic(nx: usize, ny: usize, dx: f64, dy: f64, origin: Vec2) -> Result<Self> {
        Self::new(nx, ny, dx, dy, origin, [Boundary::Periodic; 4])
    }

    pub fn validate(&self) -> Result<()> {
        if self.nx < 4 || self.ny < 4 {
            return Err(Error::Config(format!("grid needs at least 4×4 cells, got {}×{}", self.nx, self.ny)));
        }
        if !(self.dx > 0.0 && self.dy > 0.0 && self.dx.is_finite() && self.dy.is_finite()) {
            return Err(Error::Config(format!("cell size must be positive, got {}×{}", self.dx, self.dy)));
        }
        if !self.origin.is_finite() {
            return Err(Error::Config("grid origin must be finite".into()));
        }
        let paired = |a: Boundary, b: Boundary| (a == Boundary::Periodic) == (b == Boundary::Periodic);
        if !paired(self.west, self.east) || !paired(self.south, self.north) {
            return Err(Error::Config("periodic boundaries must come in opposite pairs".into()));
        }
        for b in [self.west, self.east, self.south, self.north] {
            if let Boundary::Inflow(u) = b {
                if !u.is_finite() {
                    return Err(Error::Config("inflow velocity must be finite".into()));
                }
            }
        }
        Ok(())
    }

    pub fn periodic_x(&self) -> bool {
        self.west == Boundary::Periodic
    }

    pub fn periodic_y(&self) -> bool {
        self.south == Boundary::Periodic
    }

    pub fn width(&self) -> f64 {
        self.nx as f64 * self.dx
    }

    pub fn height(&self) -> f64 {
        self.ny as f64 * self.dy
    }

    pub fn cell_area(&self) -> f64 {
        self.dx * self.dy
    }

    pub fn cell_center(&self, i: usize, j: usize) -> Vec2 {
        self.origin + Vec2::new((i as f64 + 0.5) * self.dx, (j as f64 + 0.5) * self.dy)
    }

    pub fn u_point(&self, i: usize, j: usize) -> Vec2 {
        self.origin + Vec2::new(i as f64 * self.dx, (j as f64 + 0.5) * self.dy)
    }

    pub fn v_point(&self, i: usize, j: usize) -> Vec2 {
        self.origin + Vec2::new((i as f64 + 0.5) * self.dx, j as f64 * self.dy)
    }

    /// Distance from `p` to the nearest domain edge; negative outside.
    pub fn edge_clearance(&self, p: Vec2) -> f64 {
        let q = p - self.origin;
        q.x.min(self.width() - q.x).min(q.y).min(self.height() - q.y)
    }

    /// Range of u-face columns advanced by the momentum equation.
    pub(crate) fn active_u(&self) -> (usize, usize) {
        active_range(self.nx, self.west, self.east)
    }

    /// Range of v-face rows advanced by the momentum equation.
    pub(crate) fn active_v(&self) -> (usize, usize) {
        active_range(self.ny, self.south, self.north)
    }
}

/// Half-open range of face indices along an axis with `n` cells that are unknowns.
fn active_range(n: usize, lo: Boundary, hi: Boundary) -> (usize, usize) {
    let start = if lo.fixes_normal_velocity() { 1 } else { 0 };
    let end = match hi {
        Boundary::Outflow => n + 1,
        _ => n,
    };
    (start, end)
}

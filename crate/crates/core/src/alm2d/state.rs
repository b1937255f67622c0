use ndarray::{s, Array2, ArrayViewMut2};

use super::grid::{Boundary, FlowGrid};
use crate::vec2::Vec2;

/// Ghost layers around every padded field; enough for the upwind-biased stencils.
pub(crate) const G: usize = 2;

/// Velocity, pressure and eddy viscosity on a [`FlowGrid`].
#[derive(Clone, Debug, PartialEq)]
pub struct FlowState {
    /// x-velocity on west faces, shape `(nx + 1, ny)`.
    pub u: Array2<f64>,
    /// y-velocity on south faces, shape `(nx, ny + 1)`.
    pub v: Array2<f64>,
    /// Cell pressure, Pa, shape `(nx, ny)`.
    pub p: Array2<f64>,
    /// Cell eddy viscosity from the last step, m²/s.
    pub nu_sgs: Array2<f64>,
    pub t: f64,
}

impl FlowState {
    pub fn uniform(grid: &FlowGrid, velocity: Vec2) -> Self {
        let mut s = FlowState {
            u: Array2::from_elem((grid.nx + 1, grid.ny), velocity.x),
            v: Array2::from_elem((grid.nx, grid.ny + 1), velocity.y),
            p: Array2::zeros((grid.nx, grid.ny)),
            nu_sgs: Array2::zeros((grid.nx, grid.ny)),
            t: 0.0,
        };
        s.enforce_boundaries(grid);
        s
    }

    /// Sample velocity components from functions of position at their face points.
    pub fn from_fn(grid: &FlowGrid, fu: impl Fn(Vec2) -> f64, fv: impl Fn(Vec2) -> f64) -> Self {
        let mut s = FlowState::uniform(grid, Vec2::ZERO);
        for ((i, j), u) in s.u.indexed_iter_mut() {
            *u = fu(grid.u_point(i, j));
        }
        for ((i, j), v) in s.v.indexed_iter_mut() {
            *v = fv(grid.v_point(i, j));
        }
        s.enforce_boundaries(grid);
        s
    }

    /// Impose prescribed boundary-face velocities and periodic face copies.
    pub fn enforce_boundaries(&mut self, grid: &FlowGrid) {
        let (nx, ny) = (grid.nx, grid.ny);
        set_normal_faces(self.u.view_mut(), nx, grid.west, grid.east, |w| w.x);
        set_normal_faces(self.v.view_mut().reversed_axes(), ny, grid.south, grid.north, |w| w.y);
    }

    /// Cell divergence `∂u/∂x + ∂v/∂y`, 1/s.
    pub fn divergence(&self, grid: &FlowGrid) -> Array2<f64> {
        Array2::from_shape_fn((grid.nx, grid.ny), |(i, j)| {
            (self.u[[i + 1, j]] - self.u[[i, j]]) / grid.dx + (self.v[[i, j + 1]] - self.v[[i, j]]) / grid.dy
        })
    }

    /// Largest cell net outflux divided by the largest face flux.
    pub fn normalized_divergence(&self, grid: &FlowGrid) -> f64 {
        let max_flux = (max_abs(&self.u) * grid.dy).max(max_abs(&self.v) * grid.dx);
        let mut worst: f64 = 0.0;
        for i in 0..grid.nx {
            for j in 0..grid.ny {
                let net = (self.u[[i + 1, j]] - self.u[[i, j]]) * grid.dy
                    + (self.v[[i, j + 1]] - self.v[[i, j]]) * grid.dx;
                worst = worst.max(net.abs());
            }
        }
        if max_flux > 0.0 {
            worst / max_flux
        } else {
            worst
        }
    }

    /// Largest velocity component magnitude on any face.
    pub fn max_velocity(&self) -> f64 {
        max_abs(&self.u).max(max_abs(&self.v))
    }

    /// `½ ∫ |u|² dA` per unit span and unit density, trapezoidal over boundary faces.
    pub fn kinetic_energy(&self, grid: &FlowGrid) -> f64 {
        let eu = face_sum(&self.u, grid.nx, grid.periodic_x(), |x| x * x);
        let ev = face_sum(&self.v.t().to_owned(), grid.ny, grid.periodic_y(), |x| x * x);
        0.5 * (eu + ev) * grid.cell_area()
    }

    /// Area-mean velocity over the domain.
    pub fn mean_velocity(&self, grid: &FlowGrid) -> Vec2 {
        let area = grid.width() * grid.height();
        let mu = face_sum(&self.u, grid.nx, grid.periodic_x(), |x| x) * grid.cell_area() / area;
        let mv = face_sum(&self.v.t().to_owned(), grid.ny, grid.periodic_y(), |x| x) * grid.cell_area() / area;
        Vec2::new(mu, mv)
    }

    /// Bilinear interpolation of both staggered components at `p`, clamped to the
    /// grid's sample points.
    pub fn sample_velocity(&self, grid: &FlowGrid, p: Vec2) -> Vec2 {
        let q = p - grid.origin;
        let u = bilinear(&self.u, q.x / grid.dx, q.y / grid.dy - 0.5);
        let v = bilinear(&self.v, q.x / grid.dx - 0.5, q.y / grid.dy);
        Vec2::new(u, v)
    }
}

fn max_abs(a: &Array2<f64>) -> f64 {
    a.iter().fold(0.0, |m, &x| m.max(x.abs()))
}

/// Sum of `f(face)` over an array whose axis 0 holds `n + 1` faces; the duplicate face
/// is skipped for periodic axes and boundary faces get half weight otherwise.
fn face_sum(a: &Array2<f64>, n: usize, periodic: bool, f: impl Fn(f64) -> f64) -> f64 {
    let mut total = 0.0;
    for (i, row) in a.outer_iter().enumerate() {
        let w = if periodic {
            if i == n {
                0.0
            } else {
                1.0
            }
        } else if i == 0 || i == n {
            0.5
        } else {
            1.0
        };
        if w > 0.0 {
            total += w * row.iter().map(|&x| f(x)).sum::<f64>();
        }
    }
    total
}

/// Bilinear lookup in index space, clamped to the array.
fn bilinear(a: &Array2<f64>, fi: f64, fj: f64) -> f64 {
    let (n0, n1) = a.dim();
    let clamp = |f: f64, n: usize| -> (usize, f64) {
        let f = f.clamp(0.0, (n - 1) as f64);
        let i = (f.floor() as usize).min(n - 2);
        (i, f - i as f64)
    };
    let (i, wx) = clamp(fi, n0);
    let (j, wy) = clamp(fj, n1);
    (1.0 - wx) * ((1.0 - wy) * a[[i, j]] + wy * a[[i, j + 1]])
        + wx * ((1.0 - wy) * a[[i + 1, j]] + wy * a[[i + 1, j + 1]])
}

/// `a` has faces along axis 0 (`n + 1` of them).
fn set_normal_faces(mut a: ArrayViewMut2<f64>, n: usize, lo: Boundary, hi: Boundary, comp: fn(Vec2) -> f64) {
    match lo {
        Boundary::Inflow(w) => a.row_mut(0).fill(comp(w)),
        Boundary::Slip => a.row_mut(0).fill(0.0),
        _ => {}
    }
    match hi {
        Boundary::Inflow(w) => a.row_mut(n).fill(comp(w)),
        Boundary::Slip => a.row_mut(n).fill(0.0),
        Boundary::Periodic => {
            let first = a.row(0).to_owned();
            a.row_mut(n).assign(&first);
        }
        Boundary::Outflow => {}
    }
}

/// Copy `u` into a ghost-padded array of shape `(nx + 1 + 2G, ny + 2G)`.
pub(crate) fn pad_u(grid: &FlowGrid, u: &Array2<f64>) -> Array2<f64> {
    let mut a = Array2::zeros((grid.nx + 1 + 2 * G, grid.ny + 2 * G));
    a.slice_mut(s![G..G + grid.nx + 1, G..G + grid.ny]).assign(u);
    let sides = [grid.west, grid.east, grid.south, grid.north];
    fill_face_ghosts(a.view_mut(), grid.nx, grid.ny, sides, |w| w.x);
    a
}

/// Copy `v` into a ghost-padded array of shape `(nx + 2G, ny + 1 + 2G)`.
pub(crate) fn pad_v(grid: &FlowGrid, v: &Array2<f64>) -> Array2<f64> {
    let mut a = Array2::zeros((grid.nx + 2 * G, grid.ny + 1 + 2 * G));
    a.slice_mut(s![G..G + grid.nx, G..G + grid.ny + 1]).assign(v);
    let sides = [grid.south, grid.north, grid.west, grid.east];
    fill_face_ghosts(a.view_mut().reversed_axes(), grid.ny, grid.nx, sides, |w| w.y);
    a
}

/// Copy a cell field into a padded array of shape `(nx + 2G, ny + 2G)` with periodic
/// wrap or even reflection.
pub(crate) fn pad_cells(grid: &FlowGrid, c: &Array2<f64>) -> Array2<f64> {
    let (nx, ny) = (grid.nx, grid.ny);
    let mut a = Array2::zeros((nx + 2 * G, ny + 2 * G));
    a.slice_mut(s![G..G + nx, G..G + ny]).assign(c);
    for j in G..G + ny {
        for k in 0..G {
            let (lo, hi) = if grid.periodic_x() {
                (a[[G + nx - 1 - k, j]], a[[G + k, j]])
            } else {
                (a[[G + k, j]], a[[G + nx - 1 - k, j]])
            };
            a[[G - 1 - k, j]] = lo;
            a[[G + nx + k, j]] = hi;
        }
    }
    for i in 0..nx + 2 * G {
        for k in 0..G {
            let (lo, hi) = if grid.periodic_y() {
                (a[[i, G + ny - 1 - k]], a[[i, G + k]])
            } else {
                (a[[i, G + k]], a[[i, G + ny - 1 - k]])
            };
            a[[i, G - 1 - k]] = lo;
            a[[i, G + ny + k]] = hi;
        }
    }
    a
}

/// Fill ghosts of a padded face array laid out as (normal faces, tangential cells):
/// `n + 1` faces along axis 0, `m` cells along axis 1. `sides` is
/// `[normal lo, normal hi, tangential lo, tangential hi]`.
fn fill_face_ghosts(
    mut a: ArrayViewMut2<f64>,
    n: usize,
    m: usize,
    [lo, hi, tlo, thi]: [Boundary; 4],
    comp: fn(Vec2) -> f64,
) {
    let top = G + n;
    for j in G..G + m {
        match lo {
            Boundary::Inflow(w) => {
                let c = comp(w);
                for k in 0..=G {
                    a[[G - k, j]] = c;
                }
            }
            Boundary::Slip => {
                a[[G, j]] = 0.0;
                for k in 1..=G {
                    a[[G - k, j]] = -a[[G + k, j]];
                }
            }
            Boundary::Outflow => {
                for k in 1..=G {
                    a[[G - k, j]] = a[[G, j]];
                }
            }
            Boundary::Periodic => {
                for k in 1..=G {
                    a[[G - k, j]] = a[[top - k, j]];
                }
            }
        }
        match hi {
            Boundary::Inflow(w) => {
                let c = comp(w);
                for k in 0..=G {
                    a[[top + k, j]] = c;
                }
            }
            Boundary::Slip => {
                a[[top, j]] = 0.0;
                for k in 1..=G {
                    a[[top + k, j]] = -a[[top - k, j]];
                }
            }
            Boundary::Outflow => {
                for k in 1..=G {
                    a[[top + k, j]] = a[[top, j]];
                }
            }
            Boundary::Periodic => {
                a[[top, j]] = a[[G, j]];
                for k in 1..=G {
                    a[[top + k, j]] = a[[G + k, j]];
                }
            }
        }
    }
    for i in 0..n + 1 + 2 * G {
        for k in 0..G {
            let first = a[[i, G + k]];
            let last = a[[i, G + m - 1 - k]];
            a[[i, G - 1 - k]] = match tlo {
                Boundary::Inflow(w) => 2.0 * comp(w) - first,
                Boundary::Periodic => a[[i, G + m - 1 - k]],
                Boundary::Slip | Boundary::Outflow => first,
            };
            a[[i, G + m + k]] = match thi {
                Boundary::Inflow(w) => 2.0 * comp(w) - last,
                Boundary::Periodic => a[[i, G + k]],
                Boundary::Slip | Boundary::Outflow => last,
            };
        }
    }
}

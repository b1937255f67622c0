//! Regularized 2D Biot–Savart kernel.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::vec2::Vec2;

/// Point vortex with a Lamb–Oseen style core.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointVortex {
    pub position: Vec2,
    /// Circulation, m²/s, positive counter-clockwise.
    pub gamma: f64,
    pub core_radius: f64,
}

impl PointVortex {
    pub fn new(position: Vec2, gamma: f64, core_radius: f64) -> Self {
        debug_assert!(core_radius > 0.0);
        PointVortex {
            position,
            gamma,
            core_radius,
        }
    }

    /// Velocity this vortex induces at `target`.
    #[inline]
    pub fn velocity_at(&self, target: Vec2) -> Vec2 {
        induced_by(target, self.position, self.gamma, self.core_radius)
    }
}

/// Velocity at `target` induced by circulation `gamma` at `source`:
/// `Γ/(2π) · (−r_y, r_x)/|r|² · (1 − exp(−|r|²/σ²))` with `r = target − source`.
/// Zero at zero separation.
#[inline]
pub fn induced_by(target: Vec2, source: Vec2, gamma: f64, core_radius: f64) -> Vec2 {
    let r = target - source;
    let r2 = r.norm_sq();
    if r2 == 0.0 {
        return Vec2::ZERO;
    }
    let x = r2 / (core_radius * core_radius);
    // 1 - exp(-x) without cancellation for small x
    let core = -(-x).exp_m1();
    r.perp() * (gamma * core / (TAU * r2))
}

/// Direct O(N) summation over `vortices`, compensated so the result does not depend on
/// slice order beyond the last bit or two.
pub fn direct_sum(vortices: &[PointVortex], target: Vec2) -> Vec2 {
    let mut u = CompensatedSum::default();
    for v in vortices {
        u.add(v.velocity_at(target));
    }
    u.total()
}

/// Neumaier summation of 2D vectors.
#[derive(Clone, Copy, Debug, Default)]
pub(crate) struct CompensatedSum {
    sum: Vec2,
    carry: Vec2,
}

impl CompensatedSum {
    #[inline]
    pub(crate) fn add(&mut self, v: Vec2) {
        let (sx, cx) = two_sum(self.sum.x, v.x);
        let (sy, cy) = two_sum(self.sum.y, v.y);
        self.sum = Vec2::new(sx, sy);
        self.carry.x += cx;
        self.carry.y += cy;
    }

    pub(crate) fn total(&self) -> Vec2 {
        self.sum + self.carry
    }
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let err = if a.abs() >= b.abs() { (a - s) + b } else { (b - s) + a };
    (s, err)
}

//! Rotor geometry, rigid-body blade kinematics and operating-point arithmetic.
//!
//! Conventions used throughout the crate:
//!
//! * The rotor axis sits at the origin and the free stream blows along +x.
//! * Positive `omega` turns the rotor counter-clockwise seen from above.
//! * Azimuth θ = 0 puts a blade at the most-upwind point `(-r, 0)`, and θ grows in the
//!   rotation direction. `azimuth_offset` shifts this origin.
//! * The chord direction points from trailing edge to leading edge. Positive pitch
//!   rotates the leading edge outward.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::vec2::Vec2;

/// rpm → rad/s
pub fn rpm_to_rad_per_s(rpm: f64) -> f64 {
    rpm * TAU / 60.0
}

pub fn rad_per_s_to_rpm(omega: f64) -> f64 {
    omega * 60.0 / TAU
}

/// Wrap an angle into `[0, 2π)`.
pub fn wrap_two_pi(angle: f64) -> f64 {
    let a = angle.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs
    if a >= TAU {
        0.0
    } else {
        a
    }
}

/// Wrap an angle into `(-π, π]`.
pub fn wrap_pi(angle: f64) -> f64 {
    let a = wrap_two_pi(angle);
    if a > PI {
        a - TAU
    } else {
        a
    }
}

/// Relative tolerance accepted between the listed swept area and `2·r·L`.
pub const SWEPT_AREA_TOLERANCE: f64 = 0.02;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TurbineGeometry {
    pub radius: f64,
    pub blade_count: usize,
    pub blade_length: f64,
    pub chord_mid: f64,
    pub tip_chord: f64,
    pub taper_length: f64,
    /// Blade pitch in radians, positive outward.
    pub pitch_angle: f64,
    pub hub_height: f64,
    pub swept_area: f64,
    /// Azimuth of blade 0 at t = 0, radians.
    pub azimuth_offset: f64,
}

impl TurbineGeometry {
    /// The 12 kW three-bladed H-rotor used for the reference operating points.
    pub fn h_rotor_12kw() -> Self {
        TurbineGeometry {
            radius: 3.24,
            blade_count: 3,
            blade_length: 5.0,
            chord_mid: 0.25,
            tip_chord: 0.15,
            taper_length: 1.0,
            pitch_angle: 2.0_f64.to_radians(),
            hub_height: 6.0,
            swept_area: 32.0,
            azimuth_offset: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let pos = |field: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::invariant(field, format!("must be positive and finite, got {v}")))
            }
        };
        pos("radius", self.radius)?;
        pos("blade_length", self.blade_length)?;
        pos("chord_mid", self.chord_mid)?;
        pos("tip_chord", self.tip_chord)?;
        pos("swept_area", self.swept_area)?;
        if self.blade_count == 0 {
            return Err(Error::invariant("blade_count", "must be at least 1"));
        }
        if self.tip_chord > self.chord_mid {
            return Err(Error::invariant(
                "tip_chord",
                format!("{} exceeds chord_mid {}", self.tip_chord, self.chord_mid),
            ));
        }
        if !(0.0..=self.blade_length / 2.0).contains(&self.taper_length) {
            return Err(Error::invariant(
                "taper_length",
                format!("must lie in [0, blade_length/2], got {}", self.taper_length),
            ));
        }
        if !self.pitch_angle.is_finite() || self.pitch_angle.abs() >= PI / 2.0 {
            return Err(Error::invariant("pitch_angle", "must be finite and below 90 degrees"));
        }
        if !self.hub_height.is_finite() || self.hub_height < 0.0 {
            return Err(Error::invariant("hub_height", "must be non-negative"));
        }
        if !self.azimuth_offset.is_finite() {
            return Err(Error::invariant("azimuth_offset", "must be finite"));
        }
        let mismatch = self.swept_area_mismatch();
        if mismatch > SWEPT_AREA_TOLERANCE {
            return Err(Error::invariant(
                "swept_area",
                format!(
                    "{} m² differs from 2·radius·blade_length = {} m² by {:.2}% (limit {:.0}%)",
                    self.swept_area,
                    self.frontal_area(),
                    mismatch * 100.0,
                    SWEPT_AREA_TOLERANCE * 100.0
                ),
            ));
        }
        Ok(())
    }

    /// Projected rotor area `2·r·L`.
    pub fn frontal_area(&self) -> f64 {
        2.0 * self.radius * self.blade_length
    }

    /// Relative difference between the declared swept area and `2·r·L`.
    pub fn swept_area_mismatch(&self) -> f64 {
        (self.swept_area - self.frontal_area()).abs() / self.swept_area
    }

    /// Chord at spanwise station `s`, measured from a blade tip.
    ///
    /// The blade tapers linearly over `taper_length` at both ends, so stations past
    /// mid-span mirror those before it.
    pub fn chord_at_span(&self, s: f64) -> Result<f64> {
        if !(0.0..=self.blade_length).contains(&s) {
            return Err(Error::Argument(format!(
                "span station {s} m outside [0, {}] m",
                self.blade_length
            )));
        }
        let from_tip = s.min(self.blade_length - s);
        if from_tip >= self.taper_length {
            return Ok(self.chord_mid);
        }
        let frac = from_tip / self.taper_length;
        Ok(self.tip_chord + frac * (self.chord_mid - self.tip_chord))
    }

    /// Angular spacing between consecutive blades.
    pub fn blade_spacing(&self) -> f64 {
        TAU / self.blade_count as f64
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OperatingPoint {
    /// Rotor speed, rad/s.
    pub omega: f64,
    /// Free-stream speed, m/s.
    pub u_inf: f64,
    /// Air density, kg/m³.
    pub rho: f64,
}

impl OperatingPoint {
    pub const AIR_DENSITY: f64 = 1.225;

    pub fn from_rpm(rpm: f64, u_inf: f64) -> Self {
        OperatingPoint {
            omega: rpm_to_rad_per_s(rpm),
            u_inf,
            rho: Self::AIR_DENSITY,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega.is_finite() && self.omega >= 0.0) {
            return Err(Error::invariant("omega", format!("must be >= 0, got {}", self.omega)));
        }
        if !(self.u_inf.is_finite() && self.u_inf > 0.0) {
            return Err(Error::invariant("u_inf", format!("must be > 0, got {}", self.u_inf)));
        }
        if !(self.rho.is_finite() && self.rho > 0.0) {
            return Err(Error::invariant("rho", format!("must be > 0, got {}", self.rho)));
        }
        Ok(())
    }

    /// Rotation period in seconds, `None` for a parked rotor.
    pub fn period(&self) -> Option<f64> {
        (self.omega > 0.0).then(|| TAU / self.omega)
    }
}

/// Tip speed ratio λ = Ω·r / U∞.
pub fn tip_speed_ratio(op: &OperatingPoint, geom: &TurbineGeometry) -> Result<f64> {
    if op.u_inf == 0.0 || !op.u_inf.is_finite() {
        return Err(Error::Domain(format!(
            "tip speed ratio undefined for free-stream speed {}",
            op.u_inf
        )));
    }
    Ok(op.omega * geom.radius / op.u_inf)
}

/// Instantaneous kinematic state of one blade.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BladeState {
    pub blade_index: usize,
    /// Azimuth in `[0, 2π)`.
    pub azimuth: f64,
    /// Blade reference point (quarter chord), relative to the rotor axis.
    pub position: Vec2,
    pub velocity: Vec2,
    /// Unit vector from trailing edge to leading edge.
    pub chord_direction: Vec2,
}

impl BladeState {
    /// Outward radial unit vector.
    pub fn radial(&self) -> Vec2 {
        radial_at(self.azimuth)
    }

    /// Unit normal to the chord on the outward side.
    pub fn chord_normal(&self) -> Vec2 {
        let n = self.chord_direction.perp();
        if n.dot(self.radial()) >= 0.0 {
            n
        } else {
            -n
        }
    }

    /// Point at fraction `x_c` of the chord aft of the leading edge, given the reference
    /// point sits at quarter chord.
    pub fn chord_point(&self, chord: f64, x_c: f64) -> Vec2 {
        self.position - self.chord_direction * ((x_c - 0.25) * chord)
    }
}

fn radial_at(azimuth: f64) -> Vec2 {
    -Vec2::from_angle(azimuth)
}

/// Azimuth of `blade_index` at time `t`, in `[0, 2π)`.
pub fn blade_azimuth(geom: &TurbineGeometry, op: &OperatingPoint, t: f64, blade_index: usize) -> f64 {
    let rotation = (op.omega * t).rem_euclid(TAU);
    wrap_two_pi(geom.azimuth_offset + rotation + blade_index as f64 * geom.blade_spacing())
}

/// Rigid-rotation state of one blade at time `t`.
pub fn blade_state(
    geom: &TurbineGeometry,
    op: &OperatingPoint,
    t: f64,
    blade_index: usize,
) -> Result<BladeState> {
    if blade_index >= geom.blade_count {
        return Err(Error::Argument(format!(
            "blade index {blade_index} out of range for {} blades",
            geom.blade_count
        )));
    }
    Ok(blade_state_at_azimuth(
        geom,
        op,
        blade_azimuth(geom, op, t, blade_index),
        blade_index,
    ))
}

pub(crate) fn blade_state_at_azimuth(
    geom: &TurbineGeometry,
    op: &OperatingPoint,
    azimuth: f64,
    blade_index: usize,
) -> BladeState {
    let radial = radial_at(azimuth);
    let tangent = radial.perp();
    let (sp, cp) = geom.pitch_angle.sin_cos();
    BladeState {
        blade_index,
        azimuth,
        position: radial * geom.radius,
        velocity: tangent * (op.omega * geom.radius),
        chord_direction: tangent * cp + radial * sp,
    }
}

/// States of every blade at time `t`.
pub fn rotor_state(geom: &TurbineGeometry, op: &OperatingPoint, t: f64) -> Vec<BladeState> {
    (0..geom.blade_count)
        .map(|i| blade_state_at_azimuth(geom, op, blade_azimuth(geom, op, t, i), i))
        .collect()
}

/// Azimuth label in degrees after `k` of `spr` steps in the current revolution, computed
/// from integers so labels repeat exactly from one revolution to the next.
pub(crate) fn sample_azimuth_deg(geom: &TurbineGeometry, k: usize, spr: usize, blade: usize) -> f64 {
    let rotation = 360.0 * (k % spr) as f64 / spr as f64;
    let spacing = 360.0 * blade as f64 / geom.blade_count as f64;
    let az = (geom.azimuth_offset.to_degrees() + rotation + spacing).rem_euclid(360.0);
    if az >= 360.0 {
        0.0
    } else {
        az
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn geom() -> TurbineGeometry {
        TurbineGeometry::h_rotor_12kw()
    }

    #[test]
    fn tip_speed_ratios_of_reference_operating_points() {
        let g = geom();
        for (rpm, u, lambda) in [(49.89, 6.64, 2.55), (64.81, 6.39, 3.44), (65.05, 5.39, 4.09)] {
            let op = OperatingPoint::from_rpm(rpm, u);
            let tsr = tip_speed_ratio(&op, &g).unwrap();
            assert!((tsr - lambda).abs() <= 0.01, "rpm {rpm}: λ = {tsr}");
        }
    }

    #[test]
    fn parked_rotor_has_zero_tsr() {
        let op = OperatingPoint { omega: 0.0, u_inf: 4.2, rho: 1.2 };
        assert_eq!(tip_speed_ratio(&op, &geom()).unwrap(), 0.0);
    }

    #[test]
    fn zero_wind_is_a_domain_error() {
        let op = OperatingPoint { omega: 1.0, u_inf: 0.0, rho: 1.2 };
        assert!(matches!(tip_speed_ratio(&op, &geom()), Err(Error::Domain(_))));
    }

    #[test]
    fn reference_geometry_is_valid_and_area_mismatch_is_documented() {
        let g = geom();
        g.validate().unwrap();
        assert_abs_diff_eq!(g.frontal_area(), 32.4, epsilon = 1e-12);
        let m = g.swept_area_mismatch();
        assert!(m > 0.01 && m < SWEPT_AREA_TOLERANCE, "{m}");
    }

    #[test]
    fn validation_rejects_bad_fields() {
        let mut g = geom();
        g.blade_count = 0;
        assert!(matches!(g.validate(), Err(Error::Invariant { field, .. }) if field == "blade_count"));
        let mut g = geom();
        g.tip_chord = 0.3;
        assert!(g.validate().is_err());
        let mut g = geom();
        g.swept_area = 30.0;
        assert!(matches!(g.validate(), Err(Error::Invariant { field, .. }) if field == "swept_area"));
        let mut g = geom();
        g.taper_length = 3.0;
        assert!(g.validate().is_err());
    }

    #[test]
    fn chord_taper() {
        let g = geom();
        assert_abs_diff_eq!(g.chord_at_span(2.5).unwrap(), 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(g.chord_at_span(0.0).unwrap(), 0.15, epsilon = 1e-15);
        assert_abs_diff_eq!(g.chord_at_span(0.5).unwrap(), 0.20, epsilon = 1e-15);
        assert_abs_diff_eq!(g.chord_at_span(4.5).unwrap(), 0.20, epsilon = 1e-15);
        assert!(matches!(g.chord_at_span(-0.1), Err(Error::Argument(_))));
        assert!(g.chord_at_span(5.01).is_err());
    }

    #[test]
    fn blade_state_basics() {
        let g = geom();
        let op = OperatingPoint::from_rpm(64.81, 6.39);
        let b0 = blade_state(&g, &op, 0.0, 0).unwrap();
        assert_eq!(b0.azimuth, 0.0);
        assert_abs_diff_eq!(b0.position.x, -g.radius, epsilon = 1e-15);
        assert_abs_diff_eq!(b0.velocity.norm(), op.omega * g.radius, epsilon = 1e-12);
        let b1 = blade_state(&g, &op, 0.0, 1).unwrap();
        assert_abs_diff_eq!(b1.azimuth, TAU / 3.0, epsilon = 1e-15);
        assert!(matches!(blade_state(&g, &op, 0.0, 3), Err(Error::Argument(_))));
    }

    #[test]
    fn chord_is_pitched_outward() {
        let g = geom();
        let op = OperatingPoint::from_rpm(60.0, 6.0);
        let b = blade_state(&g, &op, 0.37, 2).unwrap();
        let tangent = b.velocity.normalized();
        assert_abs_diff_eq!(b.chord_direction.norm(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(b.chord_direction.dot(tangent), g.pitch_angle.cos(), epsilon = 1e-14);
        assert!(b.chord_direction.dot(b.radial()) > 0.0);
        assert!(b.chord_normal().dot(b.radial()) > 0.0);
    }

    #[test]
    fn one_period_later_is_the_same_state() {
        let g = geom();
        let op = OperatingPoint::from_rpm(64.81, 6.39);
        let period = op.period().unwrap();
        for k in [1.0, 3.0, 10.0] {
            let a = blade_state(&g, &op, 0.0, 0).unwrap();
            let b = blade_state(&g, &op, k * period, 0).unwrap();
            let d = wrap_pi(a.azimuth - b.azimuth).abs();
            assert!(d <= 1e-12, "k = {k}: {d}");
            assert!((a.position - b.position).norm() <= 1e-11);
        }
    }

    proptest! {
        #[test]
        fn position_is_orthogonal_to_velocity(t in 0.0..100.0f64, blade in 0usize..3, rpm in 1.0..120.0f64) {
            let g = geom();
            let op = OperatingPoint::from_rpm(rpm, 5.0);
            let b = blade_state(&g, &op, t, blade).unwrap();
            let scale = b.position.norm() * b.velocity.norm();
            prop_assert!(b.position.dot(b.velocity).abs() <= 1e-12 * scale);
            prop_assert!((b.position.norm() - g.radius).abs() <= 1e-12 * g.radius);
            prop_assert!((b.velocity.norm() - op.omega * g.radius).abs() <= 1e-12 * op.omega * g.radius);
        }

        #[test]
        fn tsr_is_scale_invariant(omega in 0.1..10.0f64, u in 0.5..20.0f64, k in 0.1..10.0f64) {
            let g = geom();
            let a = tip_speed_ratio(&OperatingPoint { omega, u_inf: u, rho: 1.2 }, &g).unwrap();
            let b = tip_speed_ratio(&OperatingPoint { omega: k * omega, u_inf: k * u, rho: 1.2 }, &g).unwrap();
            prop_assert!((a - b).abs() <= 1e-12 * a.max(1.0));
        }

        #[test]
        fn azimuth_advances_by_omega_dt(t in 0.0..50.0f64, dt in 1e-4..0.1f64) {
            let g = geom();
            let op = OperatingPoint::from_rpm(64.81, 6.39);
            let a = blade_azimuth(&g, &op, t, 0);
            let b = blade_azimuth(&g, &op, t + dt, 0);
            prop_assert!((wrap_pi(b - a) - op.omega * dt).abs() <= 1e-12);
        }
    }
}

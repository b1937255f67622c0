//! Two-dimensional aerodynamics of H-rotor vertical-axis wind turbines.
//!
//! Two solver backends produce the same output, the chord-normal blade force as a
//! function of azimuth ([`harness::ForceSeries`]):
//!
//! * [`vortex2d`]: a free-vortex method with Kutta–Joukowski bound vortices and point
//!   vortex wakes, optionally accelerated by the quadtree summation in [`fastsum`].
//! * [`alm2d`]: an actuator-line method on a staggered finite-volume grid with a
//!   Smagorinsky subgrid model.
//!
//! [`harness`] ties both to configuration files, CSV persistence, comparison reports
//! and SVG plots.

pub mod airfoil;
pub mod alm2d;
pub mod error;
pub mod fastsum;
pub mod harness;
pub mod turbine;
pub mod vec2;
pub mod vortex2d;

pub use error::{Error, Result};
pub use vec2::Vec2;

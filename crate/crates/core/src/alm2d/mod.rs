//! Actuator-line model: 2D incompressible LES on a staggered grid with blade forces
//! applied as smoothed body forces.

pub mod forcing;
pub mod grid;
pub mod les;
pub mod poisson;
pub mod run;
pub mod solver;
pub mod state;

pub use forcing::{project_forces, ActuatorSource, BodyForce};
pub use grid::{Boundary, FlowGrid};
pub use les::{curl, smagorinsky};
pub use poisson::PoissonSolver;
pub use solver::{FlowParams, FlowSolver, StepStats};
pub use state::FlowState;
pub use run::{rotor_grid, run_alm, run_alm_traced, AlmRun, AlmSimulation, BladeEval};

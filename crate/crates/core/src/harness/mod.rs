//! Scenario configuration, run orchestration, result persistence, comparison and plots.

pub mod compare;
pub mod config;
pub mod plot;
pub mod series;

pub use compare::{compare, ComparisonReport};
pub use config::{load_config, parse_config, Model, Scenario};
pub use plot::emit_plot;
pub use series::{ForceSample, ForceSeries, Quantity, SeriesMetadata};

use crate::error::Result;

/// The three reference operating points: (name, Ω in rpm, U∞ in m/s).
pub const REFERENCE_POINTS: [(&str, f64, f64); 3] = [
    ("tsr_2p55", 49.89, 6.64),
    ("tsr_3p44", 64.81, 6.39),
    ("tsr_4p09", 65.05, 5.39),
];

pub fn reference_scenarios(model: Model) -> Vec<Scenario> {
    REFERENCE_POINTS
        .iter()
        .map(|&(name, rpm, u)| Scenario::reference(name, rpm, u, model))
        .collect()
}

/// Run `scenario` with the solver its `model` names.
pub fn run_scenario(scenario: &Scenario) -> Result<ForceSeries> {
    match scenario.model {
        Model::Vortex => crate::vortex2d::run(scenario),
        Model::Alm => crate::alm2d::run_alm(scenario),
    }
}

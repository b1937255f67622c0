//! Free-vortex model of the rotor.
//!
//! Each blade carries a bound vortex at its quarter-chord point whose strength follows
//! Kutta–Joukowski from the local relative wind and the airfoil polar. When a bound
//! circulation changes, the difference is shed as a point vortex at the trailing edge,
//! so bound plus wake circulation stays at its initial value of zero. Wake vortices are
//! advected with the local velocity (free stream plus Biot–Savart induction of the wake
//! and the bound vortices) by classical RK4. The viscous term is neglected.
//!
//! One time step runs:
//!
//! 1. advance rotor kinematics to `t + dt`,
//! 2. update bound circulations and blade loads ([`update_bound_circulation`]),
//! 3. shed the circulation change ([`shed`]),
//! 4. advect the wake over `dt` ([`advect`]),
//! 5. drop wake vortices beyond the truncation distance, logging their circulation.

pub mod kernel;

use std::f64::consts::TAU;

use crate::airfoil::{blade_load, relative_flow, AeroSample, BladeLoad, PolarTable};
use crate::error::{Error, Result};
use crate::fastsum::VortexTree;
use crate::harness::config::{Model, Scenario, VortexParams};
use crate::harness::series::{ForceSample, ForceSeries, SeriesMetadata};
use crate::turbine::{rotor_state, sample_azimuth_deg, tip_speed_ratio, BladeState, OperatingPoint, TurbineGeometry};
use crate::vec2::Vec2;

pub use kernel::{direct_sum, induced_by, PointVortex};

/// How the Biot–Savart sum is evaluated.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Summation {
    pub theta_open: f64,
    pub leaf_capacity: usize,
    /// Ensembles with at least this many vortices use the quadtree.
    pub tree_threshold: usize,
}

impl Summation {
    pub const DIRECT: Summation = Summation {
        theta_open: 0.0,
        leaf_capacity: 16,
        tree_threshold: usize::MAX,
    };
}

impl From<&VortexParams> for Summation {
    fn from(p: &VortexParams) -> Self {
        Summation {
            theta_open: p.theta_open,
            leaf_capacity: p.leaf_capacity,
            tree_threshold: p.fastsum_threshold,
        }
    }
}

/// The discretized vorticity field: free vortices in insertion (shedding) order.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct VortexEnsemble {
    pub vortices: Vec<PointVortex>,
    pub free_stream: Vec2,
}

impl VortexEnsemble {
    pub fn new(free_stream: Vec2) -> Self {
        VortexEnsemble {
            vortices: Vec::new(),
            free_stream,
        }
    }

    pub fn len(&self) -> usize {
        self.vortices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vortices.is_empty()
    }

    pub fn total_circulation(&self) -> f64 {
        self.vortices.iter().map(|v| v.gamma).sum()
    }

    /// Free stream plus the direct Biot–Savart sum at `point`.
    pub fn induced_velocity(&self, point: Vec2) -> Vec2 {
        self.free_stream + direct_sum(&self.vortices, point)
    }

    /// Velocities at many points, switching to the quadtree for large ensembles.
    pub fn velocities(&self, points: &[Vec2], summation: &Summation) -> Vec<Vec2> {
        field_velocities(&self.vortices, self.free_stream, points, summation)
    }
}

fn field_velocities(
    sources: &[PointVortex],
    free_stream: Vec2,
    points: &[Vec2],
    summation: &Summation,
) -> Vec<Vec2> {
    if sources.len() >= summation.tree_threshold {
        // leaf_capacity was validated when the summation was configured
        let tree = VortexTree::build(sources, summation.leaf_capacity.max(1))
            .expect("leaf capacity is positive");
        tree.eval_many(points, summation.theta_open)
            .into_iter()
            .map(|u| free_stream + u)
            .collect()
    } else {
        points
            .iter()
            .map(|&p| free_stream + direct_sum(sources, p))
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundVortex {
    pub blade_index: usize,
    pub gamma: f64,
    /// Quarter-chord point, tracking the blade.
    pub anchor: Vec2,
}

#[derive(Clone, Debug, PartialEq)]
pub struct VortexSimState {
    pub ensemble: VortexEnsemble,
    pub bound: Vec<BoundVortex>,
    pub t: f64,
    pub step_index: u64,
    /// Σ of circulation released into the wake so far.
    pub total_shed_circulation: f64,
    /// Σ of circulation removed by wake truncation.
    pub truncated_circulation: f64,
    pub truncated_count: usize,
}

impl VortexSimState {
    /// Quiescent start: no wake, zero bound circulation, blades at their t = 0 positions.
    pub fn new(geom: &TurbineGeometry, op: &OperatingPoint) -> Self {
        let bound = rotor_state(geom, op, 0.0)
            .into_iter()
            .map(|b| BoundVortex {
                blade_index: b.blade_index,
                gamma: 0.0,
                anchor: b.position,
            })
            .collect();
        VortexSimState {
            ensemble: VortexEnsemble::new(Vec2::new(op.u_inf, 0.0)),
            bound,
            t: 0.0,
            step_index: 0,
            total_shed_circulation: 0.0,
            truncated_circulation: 0.0,
            truncated_count: 0,
        }
    }

    pub fn bound_circulation(&self) -> f64 {
        self.bound.iter().map(|b| b.gamma).sum()
    }

    /// `|Σ bound + Σ wake + Σ truncated| / Σ|Γ|`, zero for an empty field.
    pub fn kelvin_residual(&self) -> f64 {
        let net = self.bound_circulation() + self.ensemble.total_circulation() + self.truncated_circulation;
        let scale: f64 = self.bound.iter().map(|b| b.gamma.abs()).sum::<f64>()
            + self.ensemble.vortices.iter().map(|v| v.gamma.abs()).sum::<f64>()
            + self.truncated_circulation.abs();
        if scale == 0.0 {
            net.abs()
        } else {
            net.abs() / scale
        }
    }
}

/// Model parameters resolved to physical units.
#[derive(Clone, Debug)]
pub struct VortexModel {
    pub geometry: TurbineGeometry,
    pub operating: OperatingPoint,
    pub table: PolarTable,
    pub chord: f64,
    pub core_radius: f64,
    /// Downstream x beyond which wake vortices are dropped.
    pub truncation_x: f64,
    pub summation: Summation,
}

impl VortexModel {
    pub fn new(
        geometry: TurbineGeometry,
        operating: OperatingPoint,
        table: PolarTable,
        params: &VortexParams,
    ) -> Result<Self> {
        geometry.validate()?;
        if !(operating.omega >= 0.0 && operating.rho > 0.0 && operating.u_inf >= 0.0) {
            return Err(Error::Config(format!("invalid operating point {operating:?}")));
        }
        if params.leaf_capacity == 0 || !(params.core_radius_chords > 0.0) || !(params.theta_open >= 0.0) {
            return Err(Error::Config(format!("invalid vortex parameters {params:?}")));
        }
        let chord = geometry.chord_mid;
        Ok(VortexModel {
            core_radius: params.core_radius_chords * chord,
            truncation_x: params.truncation_radii * geometry.radius,
            summation: Summation::from(params),
            geometry,
            operating,
            table,
            chord,
        })
    }

    pub fn bound_vortices(&self, bound: &[BoundVortex]) -> Vec<PointVortex> {
        bound
            .iter()
            .map(|b| PointVortex::new(b.anchor, b.gamma, self.core_radius))
            .collect()
    }
}

/// Outcome of the blade-element update for one blade.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BladeUpdate {
    pub blade: BladeState,
    pub sample: AeroSample,
    pub gamma: f64,
    pub load: BladeLoad,
}

/// Kutta–Joukowski bound circulation for a blade element.
///
/// The magnitude is `½·chord·|v_rel|·cl`; the sign makes `ρ·Γ·(v_y, −v_x)` equal to the
/// lift vector, with Γ positive counter-clockwise.
pub fn bound_circulation(sample: &AeroSample, cl: f64, chord: f64) -> f64 {
    let speed = sample.v_rel.norm();
    if speed == 0.0 {
        return 0.0;
    }
    let v_hat = sample.v_rel / speed;
    let orientation = -sample.lift_direction().dot(v_hat.perp());
    orientation * 0.5 * chord * speed * cl
}

/// Blade-element evaluation of one blade given the local flow velocity at its quarter
/// chord (with the blade's own bound vortex excluded).
pub fn blade_update(
    blade: &BladeState,
    local_u: Vec2,
    rho: f64,
    table: &PolarTable,
    chord: f64,
) -> Result<BladeUpdate> {
    let sample = relative_flow(blade, local_u, rho);
    let load = blade_load(&sample, table, chord)?;
    Ok(BladeUpdate {
        blade: *blade,
        sample,
        gamma: bound_circulation(&sample, load.cl, chord),
        load,
    })
}

/// Sample the flow at each blade (free stream, wake and the other blades' bound vortices)
/// and evaluate new bound circulations and loads. Bound anchors must already sit at the
/// blade positions; `state` is not modified.
pub fn update_bound_circulation(
    state: &VortexSimState,
    model: &VortexModel,
    blades: &[BladeState],
) -> Result<Vec<BladeUpdate>> {
    let points: Vec<Vec2> = blades.iter().map(|b| b.position).collect();
    let wake = state.ensemble.velocities(&points, &model.summation);
    blades
        .iter()
        .zip(wake)
        .map(|(blade, mut u)| {
            for other in state.bound.iter().filter(|b| b.blade_index != blade.blade_index) {
                u += induced_by(blade.position, other.anchor, other.gamma, model.core_radius);
            }
            blade_update(blade, u, model.operating.rho, &model.table, model.chord)
        })
        .collect()
}

/// Commit new bound circulations, shedding `old − new` for each blade at its trailing
/// edge. Returns the number of vortices appended.
pub fn shed(state: &mut VortexSimState, model: &VortexModel, updates: &[BladeUpdate]) -> usize {
    let mut appended = 0;
    for up in updates {
        let bound = &mut state.bound[up.blade.blade_index];
        let released = bound.gamma - up.gamma;
        bound.gamma = up.gamma;
        bound.anchor = up.blade.position;
        if released != 0.0 {
            let te = up.blade.chord_point(model.chord, 1.0);
            state
                .ensemble
                .vortices
                .push(PointVortex::new(te, released, model.core_radius));
            state.total_shed_circulation += released;
            appended += 1;
        }
    }
    appended
}

/// RK4 advection of every wake vortex in the field of the wake, the fixed `bound`
/// vortices and the free stream. Circulations are not touched.
pub fn advect(ensemble: &mut VortexEnsemble, bound: &[PointVortex], dt: f64, summation: &Summation) -> Result<()> {
    if !(dt > 0.0) {
        return Err(Error::Argument(format!("time step must be positive, got {dt}")));
    }
    let n = ensemble.vortices.len();
    if n == 0 {
        return Ok(());
    }
    let x0: Vec<Vec2> = ensemble.vortices.iter().map(|v| v.position).collect();
    let mut stage = ensemble.vortices.clone();
    let velocity = |stage: &[PointVortex]| -> Vec<Vec2> {
        let points: Vec<Vec2> = stage.iter().map(|v| v.position).collect();
        let mut u = field_velocities(stage, ensemble.free_stream, &points, summation);
        if !bound.is_empty() {
            for (ui, &p) in u.iter_mut().zip(&points) {
                *ui += direct_sum(bound, p);
            }
        }
        u
    };

    let k1 = velocity(&stage);
    for (s, (&x, &k)) in stage.iter_mut().zip(x0.iter().zip(&k1)) {
        s.position = x + k * (0.5 * dt);
    }
    let k2 = velocity(&stage);
    for (s, (&x, &k)) in stage.iter_mut().zip(x0.iter().zip(&k2)) {
        s.position = x + k * (0.5 * dt);
    }
    let k3 = velocity(&stage);
    for (s, (&x, &k)) in stage.iter_mut().zip(x0.iter().zip(&k3)) {
        s.position = x + k * dt;
    }
    let k4 = velocity(&stage);
    for (i, v) in ensemble.vortices.iter_mut().enumerate() {
        v.position = x0[i] + (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * (dt / 6.0);
    }
    Ok(())
}

/// Drop wake vortices downstream of `x_max`, returning how many were removed.
pub fn truncate_wake(state: &mut VortexSimState, x_max: f64) -> usize {
    let before = state.ensemble.vortices.len();
    let mut dropped = 0.0;
    state.ensemble.vortices.retain(|v| {
        let keep = v.position.x <= x_max;
        if !keep {
            dropped += v.gamma;
        }
        keep
    });
    let removed = before - state.ensemble.vortices.len();
    if removed > 0 {
        state.truncated_circulation += dropped;
        state.truncated_count += removed;
        log::debug!("truncated {removed} wake vortices carrying {dropped:.3e} m²/s");
    }
    removed
}

/// Per-step diagnostics.
#[derive(Clone, Debug, PartialEq)]
pub struct StepReport {
    pub updates: Vec<BladeUpdate>,
    pub shed_count: usize,
    pub truncated: usize,
    pub kelvin_residual: f64,
}

/// One full time step of the free-vortex model.
pub fn step(state: &mut VortexSimState, model: &VortexModel, dt: f64) -> Result<StepReport> {
    if !(dt > 0.0) {
        return Err(Error::Argument(format!("time step must be positive, got {dt}")));
    }
    let t = state.t + dt;
    let blades = rotor_state(&model.geometry, &model.operating, t);
    for (b, blade) in state.bound.iter_mut().zip(&blades) {
        b.anchor = blade.position;
    }
    let updates = update_bound_circulation(state, model, &blades)?;
    let shed_count = shed(state, model, &updates);
    let bound = model.bound_vortices(&state.bound);
    advect(&mut state.ensemble, &bound, dt, &model.summation)?;
    let truncated = truncate_wake(state, model.truncation_x);
    state.t = t;
    state.step_index += 1;
    Ok(StepReport {
        updates,
        shed_count,
        truncated,
        kelvin_residual: state.kelvin_residual(),
    })
}

/// Result of a full run with per-step diagnostics.
#[derive(Clone, Debug)]
pub struct VortexRun {
    pub series: ForceSeries,
    pub kelvin_residuals: Vec<f64>,
    pub final_state: VortexSimState,
}

/// Run a vortex scenario for `scenario.revolutions` revolutions.
pub fn run(scenario: &Scenario) -> Result<ForceSeries> {
    run_traced(scenario).map(|r| r.series)
}

pub fn run_traced(scenario: &Scenario) -> Result<VortexRun> {
    scenario.validate()?;
    let table = scenario.polar.load()?;
    let hash = scenario.hash_with(&table);
    let model = VortexModel::new(
        scenario.geometry.clone(),
        scenario.operating,
        table,
        &scenario.vortex,
    )?;
    let period = scenario
        .operating
        .period()
        .ok_or_else(|| Error::Config("a rotating run needs omega > 0".into()))?;
    let spr = scenario.steps_per_rev;
    let dt = period / spr as f64;
    let geom = &scenario.geometry;
    let mut series = ForceSeries::new(SeriesMetadata {
        model: Model::Vortex.name().into(),
        tsr: Some(tip_speed_ratio(&scenario.operating, geom)?),
        scenario_hash: Some(hash),
    });
    series.samples.reserve(scenario.revolutions * spr * geom.blade_count);
    let mut state = VortexSimState::new(geom, &scenario.operating);
    let mut residuals = Vec::with_capacity(scenario.revolutions * spr);
    for rev in 1..=scenario.revolutions {
        for k in 1..=spr {
            let report = step(&mut state, &model, dt)?;
            residuals.push(report.kelvin_residual);
            for up in &report.updates {
                series.samples.push(ForceSample {
                    revolution: rev as u32,
                    azimuth_deg: sample_azimuth_deg(geom, k, spr, up.blade.blade_index),
                    blade: up.blade.blade_index as u32,
                    fn_per_span: up.load.normal,
                    fn_total: up.load.normal * geom.blade_length,
                });
            }
        }
        log::info!(
            "vortex rev {rev}/{}: {} wake vortices",
            scenario.revolutions,
            state.ensemble.len()
        );
    }
    Ok(VortexRun {
        series,
        kelvin_residuals: residuals,
        final_state: state,
    })
}

/// Analytic co-rotation period of two equal point vortices Γ a distance d apart.
pub fn co_rotation_period(gamma: f64, separation: f64) -> f64 {
    TAU * std::f64::consts::PI * separation * separation / gamma
}

//! Rotor-in-a-channel driver: blade kinematics, load sampling, force projection and
//! sub-stepped flow advancement.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::forcing::{project_forces, ActuatorSource, MARGIN_EPSILONS};
use super::grid::{Boundary, FlowGrid};
use super::les::curl;
use super::solver::{FlowParams, FlowSolver};
use super::state::FlowState;
use crate::airfoil::{blade_load, relative_flow, AeroSample, BladeLoad, PolarTable};
use crate::error::{Error, Result};
use crate::harness::config::{AlmParams, Model, Scenario};
use crate::harness::series::{write_atomic, ForceSample, ForceSeries, SeriesMetadata};
use crate::turbine::{rotor_state, sample_azimuth_deg, tip_speed_ratio, BladeState, OperatingPoint, TurbineGeometry};
use crate::vec2::Vec2;

/// Minimum grid resolution of the rotor radius.
pub const MIN_CELLS_PER_RADIUS: usize = 20;

/// Blade element evaluated against the resolved flow.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BladeEval {
    pub blade: BladeState,
    /// Bilinearly interpolated grid velocity at the blade point.
    pub local_velocity: Vec2,
    pub sample: AeroSample,
    pub load: BladeLoad,
}

/// A rotor embedded in a flow solver, advanced under caller control.
#[derive(Clone, Debug)]
pub struct AlmSimulation {
    pub geometry: TurbineGeometry,
    pub operating: OperatingPoint,
    pub table: PolarTable,
    pub params: AlmParams,
    pub solver: FlowSolver,
    pub state: FlowState,
    pub epsilon: f64,
    /// Flow sub-steps taken so far.
    pub substeps: usize,
    /// Largest normalised divergence seen after any sub-step.
    pub max_divergence: f64,
    cached: Option<(f64, Vec<BladeEval>)>,
}

/// Domain and grid implied by the parameters: the rotor axis at the origin, inflow on
/// the west side, outflow on the east, slip walls north and south.
pub fn rotor_grid(geometry: &TurbineGeometry, operating: &OperatingPoint, params: &AlmParams) -> Result<FlowGrid> {
    if params.cells_per_radius < MIN_CELLS_PER_RADIUS {
        return Err(Error::Config(format!(
            "ALM needs at least {MIN_CELLS_PER_RADIUS} cells per rotor radius, got {}",
            params.cells_per_radius
        )));
    }
    if !(params.epsilon_cells >= 2.0) {
        return Err(Error::Config(format!(
            "smoothing width must be at least 2 cells, got {}",
            params.epsilon_cells
        )));
    }
    if !(params.cfl_target > 0.0 && params.cfl_target <= 1.0) {
        return Err(Error::Config(format!("cfl_target must lie in (0, 1], got {}", params.cfl_target)));
    }
    let r = geometry.radius;
    let h = r / params.cells_per_radius as f64;
    let cells = |radii: f64| (radii * params.cells_per_radius as f64).round() as usize;
    let (up, down, half) = (cells(params.upstream_radii), cells(params.downstream_radii), cells(params.half_width_radii));
    // the rotor circle plus the kernel margin must sit inside the domain
    let needed = params.cells_per_radius as f64 + MARGIN_EPSILONS * params.epsilon_cells;
    for (name, n) in [("upstream", up), ("downstream", down), ("half_width", half)] {
        if (n as f64) < needed {
            return Err(Error::Config(format!(
                "{name} extent of {n} cells leaves no room for the rotor and its force kernel ({needed:.1} cells)"
            )));
        }
    }
    FlowGrid::new(
        up + down,
        2 * half,
        h,
        h,
        Vec2::new(-(up as f64) * h, -(half as f64) * h),
        [
            Boundary::Inflow(Vec2::new(operating.u_inf, 0.0)),
            Boundary::Outflow,
            Boundary::Slip,
            Boundary::Slip,
        ],
    )
}

impl AlmSimulation {
    pub fn new(
        geometry: TurbineGeometry,
        operating: OperatingPoint,
        table: PolarTable,
        params: AlmParams,
    ) -> Result<Self> {
        geometry.validate()?;
        operating.validate()?;
        let grid = rotor_grid(&geometry, &operating, &params)?;
        let solver = FlowSolver::new(
            grid,
            FlowParams {
                nu: params.nu,
                c_s: params.c_s,
                rho: operating.rho,
            },
        )?;
        let state = FlowState::uniform(&grid, Vec2::new(operating.u_inf, 0.0));
        Ok(AlmSimulation {
            epsilon: params.epsilon_cells * grid.dx,
            geometry,
            operating,
            table,
            params,
            solver,
            state,
            substeps: 0,
            max_divergence: 0.0,
            cached: None,
        })
    }

    pub fn from_scenario(scenario: &Scenario) -> Result<Self> {
        scenario.validate()?;
        Self::new(
            scenario.geometry.clone(),
            scenario.operating,
            scenario.polar.load()?,
            scenario.alm.clone(),
        )
    }

    pub fn grid(&self) -> &FlowGrid {
        &self.solver.grid
    }

    pub fn time(&self) -> f64 {
        self.state.t
    }

    /// Blade loads at the current time against the current flow.
    pub fn blade_evals(&mut self) -> Result<Vec<BladeEval>> {
        if let Some((t, evals)) = &self.cached {
            if *t == self.state.t {
                return Ok(evals.clone());
            }
        }
        let grid = *self.grid();
        let chord = self.geometry.chord_mid;
        let evals = rotor_state(&self.geometry, &self.operating, self.state.t)
            .into_iter()
            .map(|blade| {
                let local_velocity = self.state.sample_velocity(&grid, blade.position);
                let sample = relative_flow(&blade, local_velocity, self.operating.rho);
                let load = blade_load(&sample, &self.table, chord)?;
                Ok(BladeEval { blade, local_velocity, sample, load })
            })
            .collect::<Result<Vec<_>>>()?;
        self.cached = Some((self.state.t, evals.clone()));
        Ok(evals)
    }

    /// Actuator sources for the current loads.
    pub fn sources(&mut self) -> Result<Vec<ActuatorSource>> {
        let eps = self.epsilon;
        Ok(self
            .blade_evals()?
            .iter()
            .map(|e| ActuatorSource {
                position: e.blade.position,
                force: e.load.force_vector(&e.sample),
                epsilon: eps,
            })
            .collect())
    }

    /// Largest sub-step: a fraction of the stability limit, and no more than one cell
    /// of blade travel.
    pub fn max_substep(&self) -> f64 {
        let speed = self.state.max_velocity().max(self.operating.u_inf);
        let nu_max = self.state.nu_sgs.iter().fold(0.0f64, |m, &x| m.max(x));
        let (limit, _) = self.solver.stability_limit(speed, nu_max);
        let mut dt = self.params.cfl_target * limit;
        let blade_speed = self.operating.omega * self.geometry.radius;
        if blade_speed > 0.0 {
            dt = dt.min(self.grid().dx.min(self.grid().dy) / blade_speed);
        }
        dt
    }

    /// One flow step of length `dt` with blade forces frozen at their start-of-step values.
    pub fn substep(&mut self, dt: f64) -> Result<()> {
        let sources = self.sources()?;
        let force = project_forces(&sources, self.grid())?;
        let stats = self.solver.advance(&mut self.state, dt, &force)?;
        self.substeps += 1;
        self.max_divergence = self.max_divergence.max(stats.normalized_divergence);
        Ok(())
    }

    /// Sub-step until the flow time reaches `t_target`.
    pub fn advance_to(&mut self, t_target: f64) -> Result<()> {
        let mut retries = 0;
        while self.state.t < t_target {
            let remaining = t_target - self.state.t;
            if remaining <= 1e-12 * t_target.abs().max(1.0) {
                break;
            }
            let n = (remaining / self.max_substep()).ceil().max(1.0);
            let dt = remaining / n;
            let t_before = self.state.t;
            match self.substep(dt) {
                Ok(()) => {
                    retries = 0;
                    if n == 1.0 {
                        // land exactly on the target so sample times do not drift
                        self.state.t = t_target;
                    }
                }
                Err(Error::Cfl { suggested, .. }) if retries < 4 => {
                    retries += 1;
                    // eddy viscosity or velocity grew since the estimate; retry shorter
                    let dt = 0.9 * suggested;
                    log::debug!("retrying sub-step at t = {t_before:.6} s with dt = {dt:.3e} s");
                    self.substep(dt.min(remaining))?;
                }
                Err(e) => return Err(e),
            }
        }
        Ok(())
    }

    /// Rotor-averaged streamwise velocity deficit `1 − ⟨u⟩/U∞` on the line
    /// `x = x_over_radius·R`, averaged over `|y| ≤ R`.
    pub fn rotor_deficit(&self, x_over_radius: f64) -> f64 {
        let g = self.grid();
        let r = self.geometry.radius;
        let i = (((x_over_radius * r) - g.origin.x) / g.dx).round().clamp(0.0, g.nx as f64) as usize;
        let (mut sum, mut n) = (0.0, 0usize);
        for j in 0..g.ny {
            if g.u_point(i, j).y.abs() <= r {
                sum += self.state.u[[i, j]];
                n += 1;
            }
        }
        1.0 - sum / n.max(1) as f64 / self.operating.u_inf
    }

    /// Cell-centred snapshot text with columns `x,y,u,v,p,omega`.
    pub fn snapshot_csv(&self) -> String {
        let g = self.grid();
        let w = curl(&self.state, g);
        let mut out = String::with_capacity(g.nx * g.ny * 96);
        let _ = writeln!(out, "# t: {:.9e}", self.state.t);
        out.push_str("x,y,u,v,p,omega\n");
        for j in 0..g.ny {
            for i in 0..g.nx {
                let c = g.cell_center(i, j);
                let u = 0.5 * (self.state.u[[i, j]] + self.state.u[[i + 1, j]]);
                let v = 0.5 * (self.state.v[[i, j]] + self.state.v[[i, j + 1]]);
                let _ = writeln!(
                    out,
                    "{:.9e},{:.9e},{:.9e},{:.9e},{:.9e},{:.9e}",
                    c.x, c.y, u, v, self.state.p[[i, j]], w[[i, j]]
                );
            }
        }
        out
    }
}

/// Result of a full ALM run.
#[derive(Clone, Debug)]
pub struct AlmRun {
    pub series: ForceSeries,
    pub max_divergence: f64,
    pub substeps: usize,
    pub snapshots: Vec<PathBuf>,
    pub simulation: AlmSimulation,
}

pub fn run_alm(scenario: &Scenario) -> Result<ForceSeries> {
    run_alm_traced(scenario, None).map(|r| r.series)
}

/// Run the actuator-line model, writing field snapshots into `snapshot_dir` every
/// `alm.snapshot_every` samples when both are set.
pub fn run_alm_traced(scenario: &Scenario, snapshot_dir: Option<&Path>) -> Result<AlmRun> {
    let mut sim = AlmSimulation::from_scenario(scenario)?;
    let hash = scenario.hash_with(&sim.table);
    let period = scenario
        .operating
        .period()
        .ok_or_else(|| Error::Config("a rotating run needs omega > 0".into()))?;
    let spr = scenario.steps_per_rev;
    let geom = scenario.geometry.clone();
    let mut series = ForceSeries::new(SeriesMetadata {
        model: Model::Alm.name().into(),
        tsr: Some(tip_speed_ratio(&scenario.operating, &geom)?),
        scenario_hash: Some(hash),
    });
    series.samples.reserve(scenario.revolutions * spr * geom.blade_count);
    let mut snapshots = Vec::new();
    let every = scenario.alm.snapshot_every;
    let mut sample_index = 0usize;
    for rev in 1..=scenario.revolutions {
        for k in 1..=spr {
            sample_index += 1;
            let t_target = period * sample_index as f64 / spr as f64;
            sim.advance_to(t_target)?;
            for e in sim.blade_evals()? {
                series.samples.push(ForceSample {
                    revolution: rev as u32,
                    azimuth_deg: sample_azimuth_deg(&geom, k, spr, e.blade.blade_index),
                    blade: e.blade.blade_index as u32,
                    fn_per_span: e.load.normal,
                    fn_total: e.load.normal * geom.blade_length,
                });
            }
            if let Some(dir) = snapshot_dir {
                if every > 0 && sample_index % every == 0 {
                    let path = dir.join(format!("{}_snapshot_{sample_index:06}.csv", scenario.name));
                    write_atomic(&path, sim.snapshot_csv().as_bytes())?;
                    snapshots.push(path);
                }
            }
        }
        log::info!(
            "alm rev {rev}/{}: {} flow steps, max divergence {:.2e}",
            scenario.revolutions,
            sim.substeps,
            sim.max_divergence
        );
    }
    Ok(AlmRun {
        series,
        max_divergence: sim.max_divergence,
        substeps: sim.substeps,
        snapshots,
        simulation: sim,
    })
}

//! Scenario files: TOML with one section per concern and units in key names.
//!
//! ```toml
//! [scenario]
//! name = "tsr_3p44"
//! model = "vortex"        # or "alm"
//! steps_per_rev = 72
//! revolutions = 10
//!
//! [turbine]
//! radius_m = 3.24
//! blade_count = 3
//! # ...
//!
//! [operating]
//! omega_rpm = 64.81
//! u_inf_mps = 6.39
//! ```
//!
//! Angles are given in degrees and rotor speed in rpm; both are converted to radians on
//! load. Unknown keys are rejected.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use sha2::{Digest, Sha256};

use crate::airfoil::PolarTable;
use crate::error::{Error, Result};
use crate::turbine::{rad_per_s_to_rpm, rpm_to_rad_per_s, tip_speed_ratio, OperatingPoint, TurbineGeometry};

pub const MIN_STEPS_PER_REV: usize = 36;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    Vortex,
    Alm,
}

impl Model {
    pub fn name(self) -> &'static str {
        match self {
            Model::Vortex => "vortex",
            Model::Alm => "alm",
        }
    }
}

impl std::str::FromStr for Model {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "vortex" => Ok(Model::Vortex),
            "alm" => Ok(Model::Alm),
            _ => Err(Error::Argument(format!("unknown model `{s}` (expected vortex|alm)"))),
        }
    }
}

/// Free-vortex model settings.
#[derive(Clone, Debug, PartialEq)]
pub struct VortexParams {
    /// Core radius of bound and shed vortices as a fraction of the chord.
    pub core_radius_chords: f64,
    /// Wake vortices further downstream than this many rotor radii are dropped.
    pub truncation_radii: f64,
    pub theta_open: f64,
    pub leaf_capacity: usize,
    /// Wake size from which the quadtree replaces direct summation.
    pub fastsum_threshold: usize,
}

impl Default for VortexParams {
    fn default() -> Self {
        VortexParams {
            core_radius_chords: 0.5,
            truncation_radii: 25.0,
            theta_open: 0.5,
            leaf_capacity: 16,
            fastsum_threshold: 256,
        }
    }
}

/// Actuator-line model settings.
#[derive(Clone, Debug, PartialEq)]
pub struct AlmParams {
    pub cells_per_radius: usize,
    /// Distance from the inflow boundary to the rotor axis, in rotor radii.
    pub upstream_radii: f64,
    /// Distance from the rotor axis to the outflow boundary, in rotor radii.
    pub downstream_radii: f64,
    /// Distance from the rotor axis to each slip wall, in rotor radii.
    pub half_width_radii: f64,
    pub c_s: f64,
    /// Gaussian smoothing width in cells.
    pub epsilon_cells: f64,
    /// Kinematic viscosity, m²/s.
    pub nu: f64,
    /// Fraction of the advective stability limit used when sub-stepping.
    pub cfl_target: f64,
    /// Write a field snapshot every this many samples (0 disables).
    pub snapshot_every: usize,
}

impl Default for AlmParams {
    fn default() -> Self {
        AlmParams {
            cells_per_radius: 20,
            upstream_radii: 5.0,
            downstream_radii: 15.0,
            half_width_radii: 5.0,
            c_s: 0.17,
            epsilon_cells: 2.5,
            nu: 1.5e-5,
            cfl_target: 0.8,
            snapshot_every: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum PolarSource {
    Bundled,
    File(PathBuf),
}

impl PolarSource {
    pub fn load(&self) -> Result<PolarTable> {
        match self {
            PolarSource::Bundled => Ok(PolarTable::naca0021()),
            PolarSource::File(p) => PolarTable::load(p),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub geometry: TurbineGeometry,
    pub operating: OperatingPoint,
    pub model: Model,
    pub steps_per_rev: usize,
    pub revolutions: usize,
    pub vortex: VortexParams,
    pub alm: AlmParams,
    pub polar: PolarSource,
    pub seed: u64,
}

impl Scenario {
    /// Reference rotor at the given operating point with default numerics.
    pub fn reference(name: &str, omega_rpm: f64, u_inf: f64, model: Model) -> Self {
        Scenario {
            name: name.to_string(),
            geometry: TurbineGeometry::h_rotor_12kw(),
            operating: OperatingPoint::from_rpm(omega_rpm, u_inf),
            model,
            steps_per_rev: 72,
            revolutions: 10,
            vortex: VortexParams::default(),
            alm: AlmParams::default(),
            polar: PolarSource::Bundled,
            seed: 0,
        }
    }

    pub fn tip_speed_ratio(&self) -> Result<f64> {
        tip_speed_ratio(&self.operating, &self.geometry)
    }

    pub fn validate(&self) -> Result<()> {
        self.geometry.validate()?;
        self.operating.validate()?;
        if self.steps_per_rev < MIN_STEPS_PER_REV {
            return Err(Error::invariant(
                "steps_per_rev",
                format!("must be at least {MIN_STEPS_PER_REV}, got {}", self.steps_per_rev),
            ));
        }
        if self.revolutions < 1 {
            return Err(Error::invariant("revolutions", "must be at least 1"));
        }
        let v = &self.vortex;
        if !(v.core_radius_chords > 0.0) {
            return Err(Error::invariant("vortex.core_radius_chords", "must be positive"));
        }
        if !(v.truncation_radii > 1.0) {
            return Err(Error::invariant("vortex.truncation_radii", "must exceed 1"));
        }
        if !(v.theta_open >= 0.0) {
            return Err(Error::invariant("vortex.theta_open", "must be non-negative"));
        }
        if v.leaf_capacity == 0 {
            return Err(Error::invariant("vortex.leaf_capacity", "must be at least 1"));
        }
        let a = &self.alm;
        if a.cells_per_radius < 20 {
            return Err(Error::invariant("alm.cells_per_radius", "must be at least 20"));
        }
        if !(a.epsilon_cells >= 2.0) {
            return Err(Error::invariant("alm.epsilon_cells", "smoothing width must be at least 2 cells"));
        }
        for (field, value) in [
            ("alm.upstream_radii", a.upstream_radii),
            ("alm.downstream_radii", a.downstream_radii),
            ("alm.half_width_radii", a.half_width_radii),
        ] {
            if !(value > 1.0) {
                return Err(Error::invariant(field, "domain must extend beyond the rotor"));
            }
        }
        if !(a.c_s >= 0.0) {
            return Err(Error::invariant("alm.c_s", "must be non-negative"));
        }
        if !(a.nu >= 0.0) {
            return Err(Error::invariant("alm.nu", "must be non-negative"));
        }
        if !(a.cfl_target > 0.0 && a.cfl_target <= 1.0) {
            return Err(Error::invariant("alm.cfl_target", "must lie in (0, 1]"));
        }
        Ok(())
    }

    /// Hash over every physical and numerical parameter plus the polar data. The scenario
    /// name and the polar file location do not enter.
    pub fn hash(&self) -> Result<String> {
        let table = self.polar.load()?;
        Ok(self.hash_with(&table))
    }

    pub fn hash_with(&self, table: &PolarTable) -> String {
        let mut canonical = String::new();
        let g = &self.geometry;
        let o = &self.operating;
        let v = &self.vortex;
        let a = &self.alm;
        let _ = write!(
            canonical,
            "geometry:{:?},{},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?};",
            g.radius,
            g.blade_count,
            g.blade_length,
            g.chord_mid,
            g.tip_chord,
            g.taper_length,
            g.pitch_angle,
            g.hub_height,
            g.swept_area,
            g.azimuth_offset
        );
        let _ = write!(canonical, "operating:{:?},{:?},{:?};", o.omega, o.u_inf, o.rho);
        let _ = write!(
            canonical,
            "run:{},{},{},{};",
            self.model.name(),
            self.steps_per_rev,
            self.revolutions,
            self.seed
        );
        let _ = write!(
            canonical,
            "vortex:{:?},{:?},{:?},{},{};",
            v.core_radius_chords, v.truncation_radii, v.theta_open, v.leaf_capacity, v.fastsum_threshold
        );
        let _ = write!(
            canonical,
            "alm:{},{:?},{:?},{:?},{:?},{:?},{:?},{:?};",
            a.cells_per_radius,
            a.upstream_radii,
            a.downstream_radii,
            a.half_width_radii,
            a.c_s,
            a.epsilon_cells,
            a.nu,
            a.cfl_target
        );
        canonical.push_str("polar:");
        canonical.push_str(&table.to_text());
        let digest = Sha256::digest(canonical.as_bytes());
        digest.iter().take(8).fold(String::new(), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(default)]
    scenario: RawScenario,
    turbine: RawTurbine,
    operating: RawOperating,
    #[serde(default)]
    airfoil: RawAirfoil,
    #[serde(default)]
    vortex: RawVortex,
    #[serde(default)]
    alm: RawAlm,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawScenario {
    name: String,
    model: Model,
    steps_per_rev: usize,
    revolutions: usize,
    seed: u64,
}

impl Default for RawScenario {
    fn default() -> Self {
        RawScenario {
            name: String::from("scenario"),
            model: Model::Vortex,
            steps_per_rev: 72,
            revolutions: 10,
            seed: 0,
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTurbine {
    radius_m: f64,
    blade_count: usize,
    blade_length_m: f64,
    chord_mid_m: f64,
    tip_chord_m: f64,
    taper_length_m: f64,
    pitch_deg: f64,
    hub_height_m: f64,
    swept_area_m2: f64,
    #[serde(default)]
    azimuth_offset_deg: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOperating {
    omega_rpm: f64,
    u_inf_mps: f64,
    #[serde(default = "default_rho")]
    rho_kgpm3: f64,
}

fn default_rho() -> f64 {
    OperatingPoint::AIR_DENSITY
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAirfoil {
    polar: String,
}

impl Default for RawAirfoil {
    fn default() -> Self {
        RawAirfoil {
            polar: "bundled".into(),
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawVortex {
    core_radius_chords: f64,
    truncation_radii: f64,
    theta_open: f64,
    leaf_capacity: usize,
    fastsum_threshold: usize,
}

impl Default for RawVortex {
    fn default() -> Self {
        let d = VortexParams::default();
        RawVortex {
            core_radius_chords: d.core_radius_chords,
            truncation_radii: d.truncation_radii,
            theta_open: d.theta_open,
            leaf_capacity: d.leaf_capacity,
            fastsum_threshold: d.fastsum_threshold,
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawAlm {
    cells_per_radius: usize,
    upstream_radii: f64,
    downstream_radii: f64,
    half_width_radii: f64,
    c_s: f64,
    epsilon_cells: f64,
    nu_m2ps: f64,
    cfl_target: f64,
    snapshot_every: usize,
}

impl Default for RawAlm {
    fn default() -> Self {
        let d = AlmParams::default();
        RawAlm {
            cells_per_radius: d.cells_per_radius,
            upstream_radii: d.upstream_radii,
            downstream_radii: d.downstream_radii,
            half_width_radii: d.half_width_radii,
            c_s: d.c_s,
            epsilon_cells: d.epsilon_cells,
            nu_m2ps: d.nu,
            cfl_target: d.cfl_target,
            snapshot_every: d.snapshot_every,
        }
    }
}

/// Parse scenario text. Relative polar paths resolve against `base_dir`.
pub fn parse_config(text: &str, source_name: &str, base_dir: &Path) -> Result<Scenario> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| {
        let line = e
            .span()
            .map(|span| text[..span.start.min(text.len())].matches('\n').count() + 1)
            .unwrap_or(0);
        Error::Format {
            source_name: source_name.to_string(),
            line,
            message: e.message().to_string(),
        }
    })?;
    let t = raw.turbine;
    let polar = match raw.airfoil.polar.as_str() {
        "bundled" => PolarSource::Bundled,
        p => PolarSource::File(base_dir.join(p)),
    };
    let scenario = Scenario {
        name: raw.scenario.name,
        geometry: TurbineGeometry {
            radius: t.radius_m,
            blade_count: t.blade_count,
            blade_length: t.blade_length_m,
            chord_mid: t.chord_mid_m,
            tip_chord: t.tip_chord_m,
            taper_length: t.taper_length_m,
            pitch_angle: t.pitch_deg.to_radians(),
            hub_height: t.hub_height_m,
            swept_area: t.swept_area_m2,
            azimuth_offset: t.azimuth_offset_deg.to_radians(),
        },
        operating: OperatingPoint {
            omega: rpm_to_rad_per_s(raw.operating.omega_rpm),
            u_inf: raw.operating.u_inf_mps,
            rho: raw.operating.rho_kgpm3,
        },
        model: raw.scenario.model,
        steps_per_rev: raw.scenario.steps_per_rev,
        revolutions: raw.scenario.revolutions,
        vortex: VortexParams {
            core_radius_chords: raw.vortex.core_radius_chords,
            truncation_radii: raw.vortex.truncation_radii,
            theta_open: raw.vortex.theta_open,
            leaf_capacity: raw.vortex.leaf_capacity,
            fastsum_threshold: raw.vortex.fastsum_threshold,
        },
        alm: AlmParams {
            cells_per_radius: raw.alm.cells_per_radius,
            upstream_radii: raw.alm.upstream_radii,
            downstream_radii: raw.alm.downstream_radii,
            half_width_radii: raw.alm.half_width_radii,
            c_s: raw.alm.c_s,
            epsilon_cells: raw.alm.epsilon_cells,
            nu: raw.alm.nu_m2ps,
            cfl_target: raw.alm.cfl_target,
            snapshot_every: raw.alm.snapshot_every,
        },
        polar,
        seed: raw.scenario.seed,
    };
    scenario.validate()?;
    Ok(scenario)
}

pub fn load_config(path: impl AsRef<Path>) -> Result<Scenario> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let base = path.parent().unwrap_or(Path::new("."));
    parse_config(&text, &path.display().to_string(), base)
}

/// Render a scenario back into config text.
pub fn to_config_text(s: &Scenario) -> String {
    let g = &s.geometry;
    let polar = match &s.polar {
        PolarSource::Bundled => "bundled".to_string(),
        PolarSource::File(p) => p.display().to_string(),
    };
    format!(
        "[scenario]\nname = {:?}\nmodel = {:?}\nsteps_per_rev = {}\nrevolutions = {}\nseed = {}\n\n\
         [turbine]\nradius_m = {:?}\nblade_count = {}\nblade_length_m = {:?}\nchord_mid_m = {:?}\n\
         tip_chord_m = {:?}\ntaper_length_m = {:?}\npitch_deg = {:?}\nhub_height_m = {:?}\n\
         swept_area_m2 = {:?}\nazimuth_offset_deg = {:?}\n\n\
         [operating]\nomega_rpm = {:?}\nu_inf_mps = {:?}\nrho_kgpm3 = {:?}\n\n\
         [airfoil]\npolar = {:?}\n\n\
         [vortex]\ncore_radius_chords = {:?}\ntruncation_radii = {:?}\ntheta_open = {:?}\n\
         leaf_capacity = {}\nfastsum_threshold = {}\n\n\
         [alm]\ncells_per_radius = {}\nupstream_radii = {:?}\ndownstream_radii = {:?}\n\
         half_width_radii = {:?}\nc_s = {:?}\nepsilon_cells = {:?}\nnu_m2ps = {:?}\ncfl_target = {:?}\n\
         snapshot_every = {}\n",
        s.name,
        s.model.name(),
        s.steps_per_rev,
        s.revolutions,
        s.seed,
        g.radius,
        g.blade_count,
        g.blade_length,
        g.chord_mid,
        g.tip_chord,
        g.taper_length,
        g.pitch_angle.to_degrees(),
        g.hub_height,
        g.swept_area,
        g.azimuth_offset.to_degrees(),
        rad_per_s_to_rpm(s.operating.omega),
        s.operating.u_inf,
        s.operating.rho,
        polar,
        s.vortex.core_radius_chords,
        s.vortex.truncation_radii,
        s.vortex.theta_open,
        s.vortex.leaf_capacity,
        s.vortex.fastsum_threshold,
        s.alm.cells_per_radius,
        s.alm.upstream_radii,
        s.alm.downstream_radii,
        s.alm.half_width_radii,
        s.alm.c_s,
        s.alm.epsilon_cells,
        s.alm.nu,
        s.alm.cfl_target,
        s.alm.snapshot_every,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
[scenario]
name = "t"
model = "vortex"
steps_per_rev = 72
revolutions = 3

[turbine]
radius_m = 3.24
blade_count = 3
blade_length_m = 5.0
chord_mid_m = 0.25
tip_chord_m = 0.15
taper_length_m = 1.0
pitch_deg = 2.0
hub_height_m = 6.0
swept_area_m2 = 32.0

[operating]
omega_rpm = 64.81
u_inf_mps = 6.39
"#;

    fn parse(text: &str) -> Result<Scenario> {
        parse_config(text, "test.toml", Path::new("."))
    }

    #[test]
    fn minimal_config_parses_with_unit_conversion() {
        let s = parse(MINIMAL).unwrap();
        assert!((s.operating.omega - 64.81 * std::f64::consts::TAU / 60.0).abs() < 1e-12);
        assert!((s.geometry.pitch_angle - 2f64.to_radians()).abs() < 1e-15);
        assert!((s.tip_speed_ratio().unwrap() - 3.44).abs() <= 0.01);
        assert_eq!(s.operating.rho, 1.225);
        assert_eq!(s.vortex, VortexParams::default());
    }

    #[test]
    fn unknown_keys_are_rejected_with_line() {
        let text = MINIMAL.replace("revolutions = 3", "revolutions = 3\nrevolutionz = 4");
        match parse(&text) {
            Err(Error::Format { line, message, .. }) => {
                assert_eq!(line, 7, "{message}");
                assert!(message.contains("revolutionz"), "{message}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn syntax_errors_carry_line_numbers() {
        let text = MINIMAL.replace("u_inf_mps = 6.39", "u_inf_mps = = 6.39");
        let line = MINIMAL.lines().position(|l| l.starts_with("u_inf_mps")).unwrap() + 1;
        assert!(matches!(parse(&text), Err(Error::Format { line: l, .. }) if l == line));
    }

    #[test]
    fn invariant_violations_name_the_field() {
        let text = MINIMAL.replace("blade_count = 3", "blade_count = 0");
        assert!(matches!(parse(&text), Err(Error::Invariant { field, .. }) if field == "blade_count"));
        let text = MINIMAL.replace("steps_per_rev = 72", "steps_per_rev = 12");
        assert!(matches!(parse(&text), Err(Error::Invariant { field, .. }) if field == "steps_per_rev"));
        let text = MINIMAL.replace("u_inf_mps = 6.39", "u_inf_mps = -1.0");
        assert!(matches!(parse(&text), Err(Error::Invariant { field, .. }) if field == "u_inf"));
    }

    #[test]
    fn config_text_round_trips() {
        let s = parse(MINIMAL).unwrap();
        let again = parse(&to_config_text(&s)).unwrap();
        assert_eq!(again.hash().unwrap(), s.hash().unwrap());
        assert_eq!(again.steps_per_rev, s.steps_per_rev);
        assert!((again.operating.omega - s.operating.omega).abs() < 1e-12);
    }

    #[test]
    fn hash_tracks_every_numerical_parameter() {
        let base = parse(MINIMAL).unwrap();
        let h0 = base.hash().unwrap();
        let mut renamed = base.clone();
        renamed.name = "other".into();
        assert_eq!(renamed.hash().unwrap(), h0);

        let edits: Vec<Box<dyn Fn(&mut Scenario)>> = vec![
            Box::new(|s| s.geometry.radius += 1e-9),
            Box::new(|s| s.geometry.blade_count = 2),
            Box::new(|s| s.geometry.pitch_angle = 0.0),
            Box::new(|s| s.geometry.azimuth_offset = 0.1),
            Box::new(|s| s.operating.u_inf = 6.4),
            Box::new(|s| s.operating.omega *= 1.0 + 1e-15),
            Box::new(|s| s.operating.rho = 1.2),
            Box::new(|s| s.model = Model::Alm),
            Box::new(|s| s.steps_per_rev = 73),
            Box::new(|s| s.revolutions = 4),
            Box::new(|s| s.seed = 1),
            Box::new(|s| s.vortex.theta_open = 0.4),
            Box::new(|s| s.vortex.core_radius_chords = 0.4),
            Box::new(|s| s.vortex.leaf_capacity = 8),
            Box::new(|s| s.alm.c_s = 0.1),
            Box::new(|s| s.alm.epsilon_cells = 3.0),
            Box::new(|s| s.alm.cells_per_radius = 24),
        ];
        let mut seen = std::collections::HashSet::new();
        seen.insert(h0.clone());
        for edit in &edits {
            let mut s = base.clone();
            edit(&mut s);
            let h = s.hash().unwrap();
            assert!(seen.insert(h), "hash collision after an edit");
        }
    }

    #[test]
    fn model_names_parse() {
        assert_eq!("alm".parse::<Model>().unwrap(), Model::Alm);
        assert!("lbm".parse::<Model>().is_err());
    }
}

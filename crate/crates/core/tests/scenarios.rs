use std::path::PathBuf;

use vawt::alm2d::AlmSimulation;
use vawt::harness::{load_config, parse_config, run_scenario, Model, Quantity, Scenario};
use vawt::Error;

fn scenario_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(format!("{name}.toml"))
}

fn scenario(name: &str) -> Scenario {
    load_config(scenario_path(name)).expect("shipped scenario loads")
}

#[test]
fn shipped_scenarios_load_and_validate() {
    for name in ["tsr_2p55", "tsr_3p44", "tsr_4p09"] {
        let s = scenario(name);
        assert_eq!(s.name, name);
        assert_eq!(s.model, Model::Vortex);
        s.validate().unwrap();
        assert_eq!(s.hash().unwrap(), scenario(name).hash().unwrap());
    }
    assert_ne!(scenario("tsr_2p55").hash().unwrap(), scenario("tsr_3p44").hash().unwrap());
}

#[test]
fn zero_blades_is_an_invariant_violation() {
    let path = scenario_path("tsr_3p44");
    let text = std::fs::read_to_string(&path).unwrap().replace("blade_count = 3", "blade_count = 0");
    let r = parse_config(&text, "zero_blades", path.parent().unwrap());
    assert!(matches!(r, Err(Error::Invariant { .. })), "{r:?}");
}

#[test]
fn converged_vortex_curve_closes_on_itself() {
    let series = run_scenario(&scenario("tsr_3p44")).unwrap();
    let rev = series.last_revolution().unwrap();
    let curve = series.curve(rev, 0, Quantity::Total);
    let peak = curve.iter().map(|p| p.1.abs()).fold(0.0, f64::max);
    let (first, last) = (curve[0], curve[curve.len() - 1]);
    assert!(first.0 < 10.0 && last.0 > 350.0, "{first:?} {last:?}");
    assert!((first.1 - last.1).abs() <= 0.05 * peak, "{first:?} {last:?} peak {peak}");
}

#[test]
fn alm_wake_deficit_grows_with_tip_speed_ratio() {
    let deficit = |name: &str| {
        let mut s = scenario(name);
        s.model = Model::Alm;
        let mut sim = AlmSimulation::from_scenario(&s).unwrap();
        sim.advance_to(2.0 * s.operating.period().unwrap()).unwrap();
        sim.rotor_deficit(1.5)
    };
    let (low, high) = (deficit("tsr_2p55"), deficit("tsr_3p44"));
    assert!(low > 0.0, "{low}");
    assert!(high > low, "{low} {high}");
}

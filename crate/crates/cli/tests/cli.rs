use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn vawt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vawt"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(format!("{name}.toml"))
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn simulate(out: &Path) -> Output {
    let cfg = scenario("tsr_3p44");
    vawt(&["simulate", "--model", "vortex", "--config", s(&cfg), "--revs", "1", "--steps-per-rev", "36", "--out", s(out)])
}

#[test]
fn simulate_compare_plot_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    assert!(simulate(&a).status.success());
    assert!(simulate(&b).status.success());
    let text_a = std::fs::read(&a).unwrap();
    assert_eq!(text_a, std::fs::read(&b).unwrap());
    let text = String::from_utf8(text_a).unwrap();
    assert!(text.lines().any(|l| l == "rev,azimuth_deg,blade,fn_per_span,fn_total"));
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 1 + 36 * 3);

    let report = dir.path().join("report.txt");
    let out = vawt(&["compare", s(&a), s(&b), "--bins", "36", "--out", s(&report)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report = std::fs::read_to_string(report).unwrap();
    assert!(report.contains("# rms_difference: 0.000000e0"));

    let svg = dir.path().join("plot.svg");
    let out = vawt(&["plot", s(&a), s(&b), "--out", s(&svg)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(std::fs::read_to_string(&svg).unwrap().matches("<polyline").count(), 2);
    assert!(svg.with_extension("csv").exists());
}

#[test]
fn errors_exit_nonzero_with_one_line() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.toml");
    let out = vawt(&["simulate", "--config", s(&missing), "--out", s(&dir.path().join("x.csv"))]);
    assert!(!out.status.success());
    let err = String::from_utf8(out.stderr).unwrap();
    assert_eq!(err.trim_end().lines().count(), 1, "{err}");
    assert!(err.starts_with("error:"));

    let bad = dir.path().join("bad.toml");
    let text = std::fs::read_to_string(scenario("tsr_3p44")).unwrap().replace("blade_count = 3", "blade_count = 0");
    std::fs::write(&bad, text).unwrap();
    let out = vawt(&["simulate", "--config", s(&bad), "--out", s(&dir.path().join("x.csv"))]);
    assert!(!out.status.success());
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("blade_count"), "{err}");
    assert_eq!(err.trim_end().lines().count(), 1);
}

#[test]
fn compare_rejects_too_few_bins() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    assert!(simulate(&a).status.success());
    let out = vawt(&["compare", s(&a), s(&a), "--bins", "6", "--out", s(&dir.path().join("r.txt"))]);
    assert!(!out.status.success());
    assert!(String::from_utf8(out.stderr).unwrap().contains("bins"));
}

#[test]
fn steps_per_rev_below_minimum_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = scenario("tsr_2p55");
    let out = vawt(&["simulate", "--config", s(&cfg), "--steps-per-rev", "10", "--out", s(&dir.path().join("x.csv"))]);
    assert!(!out.status.success());
}

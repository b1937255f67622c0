//! Blade normal-force samples and their CSV form.
//!
//! ```text
//! # model: vortex
//! # tsr: 3.44119...
//! # scenario: 5f0c...
//! rev,azimuth_deg,blade,fn_per_span,fn_total
//! 1,5.00000000000000e0,0,-1.52340000000000e2,-7.61700000000000e2
//! ```
//!
//! Metadata comment lines are optional on input. Values are written with 15 significant
//! digits, LF line endings.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

pub const CSV_HEADER: &str = "rev,azimuth_deg,blade,fn_per_span,fn_total";

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ForceSample {
    /// 1-based revolution.
    pub revolution: u32,
    /// Azimuth in `[0, 360)`.
    pub azimuth_deg: f64,
    pub blade: u32,
    /// Chord-normal force per unit span, positive outward, N/m.
    pub fn_per_span: f64,
    /// `fn_per_span × blade_length`: a 2D strip estimate of the whole-blade force, N.
    pub fn_total: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SeriesMetadata {
    pub model: String,
    pub tsr: Option<f64>,
    pub scenario_hash: Option<String>,
}

impl SeriesMetadata {
    pub fn label(&self) -> String {
        match self.tsr {
            Some(tsr) => format!("{} (λ = {:.2})", self.model, tsr),
            None => self.model.clone(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ForceSeries {
    pub metadata: SeriesMetadata,
    pub samples: Vec<ForceSample>,
}

/// Which force column to analyse.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Quantity {
    PerSpan,
    #[default]
    Total,
}

impl Quantity {
    pub fn of(self, s: &ForceSample) -> f64 {
        match self {
            Quantity::PerSpan => s.fn_per_span,
            Quantity::Total => s.fn_total,
        }
    }
}

fn fmt_value(out: &mut String, v: f64) {
    let _ = write!(out, "{v:.14e}");
}

/// Integer key for an azimuth, robust to last-digit noise.
pub(crate) fn azimuth_key(azimuth_deg: f64) -> i64 {
    (azimuth_deg * 1e6).round() as i64
}

impl ForceSeries {
    pub fn new(metadata: SeriesMetadata) -> Self {
        ForceSeries {
            metadata,
            samples: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn last_revolution(&self) -> Option<u32> {
        self.samples.iter().map(|s| s.revolution).max()
    }

    pub fn blades(&self) -> Vec<u32> {
        let mut b: Vec<u32> = self.samples.iter().map(|s| s.blade).collect();
        b.sort_unstable();
        b.dedup();
        b
    }

    pub fn revolution(&self, rev: u32) -> impl Iterator<Item = &ForceSample> {
        self.samples.iter().filter(move |s| s.revolution == rev)
    }

    /// `(azimuth_deg, value)` for one blade and revolution, sorted by azimuth.
    pub fn curve(&self, rev: u32, blade: u32, quantity: Quantity) -> Vec<(f64, f64)> {
        let mut c: Vec<(f64, f64)> = self
            .revolution(rev)
            .filter(|s| s.blade == blade)
            .map(|s| (s.azimuth_deg, quantity.of(s)))
            .collect();
        c.sort_by(|a, b| a.0.total_cmp(&b.0));
        c
    }

    /// Largest |F_N| per unit span within a revolution.
    pub fn peak_abs(&self, rev: u32) -> f64 {
        self.revolution(rev).map(|s| s.fn_per_span.abs()).fold(0.0, f64::max)
    }

    /// RMS over all blades of `F_N(rev) − F_N(rev − 1)` at matching azimuths, per unit span.
    pub fn revolution_rms_change(&self, rev: u32) -> Option<f64> {
        if rev < 2 {
            return None;
        }
        let prev: BTreeMap<(u32, i64), f64> = self
            .revolution(rev - 1)
            .map(|s| ((s.blade, azimuth_key(s.azimuth_deg)), s.fn_per_span))
            .collect();
        let (mut sum, mut n) = (0.0, 0usize);
        for s in self.revolution(rev) {
            if let Some(p) = prev.get(&(s.blade, azimuth_key(s.azimuth_deg))) {
                sum += (s.fn_per_span - p).powi(2);
                n += 1;
            }
        }
        (n > 0).then(|| (sum / n as f64).sqrt())
    }

    /// Largest RMS difference, over blades, between a blade's curve and blade 0's curve
    /// at matching azimuths within `rev`.
    pub fn blade_curve_mismatch(&self, rev: u32) -> Option<f64> {
        let blades = self.blades();
        let reference: BTreeMap<i64, f64> = self
            .revolution(rev)
            .filter(|s| s.blade == blades[0])
            .map(|s| (azimuth_key(s.azimuth_deg), s.fn_per_span))
            .collect();
        let mut worst: Option<f64> = None;
        for &b in &blades[1..] {
            let (mut sum, mut n) = (0.0, 0usize);
            for s in self.revolution(rev).filter(|s| s.blade == b) {
                if let Some(r) = reference.get(&azimuth_key(s.azimuth_deg)) {
                    sum += (s.fn_per_span - r).powi(2);
                    n += 1;
                }
            }
            if n > 0 {
                let rms = (sum / n as f64).sqrt();
                worst = Some(worst.map_or(rms, |w: f64| w.max(rms)));
            }
        }
        worst
    }

    /// Mean F_N per unit span of each blade over a revolution.
    pub fn blade_means(&self, rev: u32) -> Vec<(u32, f64)> {
        self.blades()
            .into_iter()
            .map(|b| {
                let v: Vec<f64> = self
                    .revolution(rev)
                    .filter(|s| s.blade == b)
                    .map(|s| s.fn_per_span)
                    .collect();
                (b, v.iter().sum::<f64>() / v.len().max(1) as f64)
            })
            .collect()
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = String::with_capacity(64 * (self.samples.len() + 4));
        if !self.metadata.model.is_empty() {
            let _ = writeln!(out, "# model: {}", self.metadata.model);
        }
        if let Some(tsr) = self.metadata.tsr {
            out.push_str("# tsr: ");
            fmt_value(&mut out, tsr);
            out.push('\n');
        }
        if let Some(h) = &self.metadata.scenario_hash {
            let _ = writeln!(out, "# scenario: {h}");
        }
        out.push_str(CSV_HEADER);
        out.push('\n');
        for s in &self.samples {
            let _ = write!(out, "{},", s.revolution);
            fmt_value(&mut out, s.azimuth_deg);
            let _ = write!(out, ",{},", s.blade);
            fmt_value(&mut out, s.fn_per_span);
            out.push(',');
            fmt_value(&mut out, s.fn_total);
            out.push('\n');
        }
        out
    }

    pub fn from_csv_str(text: &str, source_name: &str) -> Result<Self> {
        let err = |line: usize, message: String| Error::Format {
            source_name: source_name.to_string(),
            line,
            message,
        };
        let mut metadata = SeriesMetadata::default();
        let mut samples = Vec::new();
        let mut seen_header = false;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim_end_matches('\r');
            if line.trim().is_empty() {
                continue;
            }
            if let Some(comment) = line.strip_prefix('#') {
                if let Some((key, value)) = comment.split_once(':') {
                    let value = value.trim();
                    match key.trim() {
                        "model" => metadata.model = value.to_string(),
                        "tsr" => {
                            metadata.tsr = Some(
                                value
                                    .parse()
                                    .map_err(|_| err(line_no, format!("bad tsr `{value}`")))?,
                            )
                        }
                        "scenario" => metadata.scenario_hash = Some(value.to_string()),
                        _ => {}
                    }
                }
                continue;
            }
            if !seen_header {
                if line.trim() != CSV_HEADER {
                    return Err(err(line_no, format!("expected header `{CSV_HEADER}`")));
                }
                seen_header = true;
                continue;
            }
            let f: Vec<&str> = line.split(',').map(str::trim).collect();
            if f.len() != 5 {
                return Err(err(line_no, format!("expected 5 fields, found {}", f.len())));
            }
            let int = |s: &str, what: &str| {
                s.parse::<u32>()
                    .map_err(|_| err(line_no, format!("bad {what} `{s}`")))
            };
            let float = |s: &str, what: &str| {
                s.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| err(line_no, format!("bad {what} `{s}`")))
            };
            let sample = ForceSample {
                revolution: int(f[0], "rev")?,
                azimuth_deg: float(f[1], "azimuth_deg")?,
                blade: int(f[2], "blade")?,
                fn_per_span: float(f[3], "fn_per_span")?,
                fn_total: float(f[4], "fn_total")?,
            };
            if !(0.0..360.0).contains(&sample.azimuth_deg) {
                return Err(err(line_no, format!("azimuth {} outside [0, 360)", sample.azimuth_deg)));
            }
            if let Some(prev) = samples.last() {
                let prev: &ForceSample = prev;
                if sample.revolution < prev.revolution {
                    return Err(err(line_no, "samples not sorted by revolution".into()));
                }
            }
            samples.push(sample);
        }
        if !seen_header {
            return Err(err(0, "missing CSV header".into()));
        }
        if metadata.model.is_empty() {
            metadata.model = Path::new(source_name)
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "external".into());
        }
        Ok(ForceSeries { metadata, samples })
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_csv_str(&text, &path.display().to_string())
    }

    /// Write atomically (temp file in the target directory, then rename).
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        write_atomic(path.as_ref(), self.to_csv_string().as_bytes())
    }
}

pub(crate) fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(path, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sample_series() -> ForceSeries {
        let mut s = ForceSeries::new(SeriesMetadata {
            model: "vortex".into(),
            tsr: Some(3.441),
            scenario_hash: Some("abc123".into()),
        });
        for rev in 1..=2 {
            for step in 1..=4u32 {
                for blade in 0..2u32 {
                    let az = ((step * 90 + blade * 180) % 360) as f64;
                    let f = (az.to_radians()).sin() * 100.0 + rev as f64;
                    s.samples.push(ForceSample {
                        revolution: rev,
                        azimuth_deg: az,
                        blade,
                        fn_per_span: f,
                        fn_total: 5.0 * f,
                    });
                }
            }
        }
        s
    }

    #[test]
    fn csv_layout() {
        let text = sample_series().to_csv_string();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "# model: vortex");
        assert_eq!(lines[3], CSV_HEADER);
        assert!(lines[4].starts_with("1,9.00000000000000e1,0,"));
        assert!(!text.contains('\r'));
        assert!(text.ends_with('\n'));
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let s = sample_series();
        let text = s.to_csv_string();
        let back = ForceSeries::from_csv_str(&text, "x.csv").unwrap();
        assert_eq!(back.to_csv_string(), text);
        assert_eq!(back.metadata, s.metadata);
    }

    #[test]
    fn external_csv_without_metadata_uses_file_stem() {
        let text = format!("{CSV_HEADER}\n1,10,0,1.5,7.5\n");
        let s = ForceSeries::from_csv_str(&text, "data/experiment.csv").unwrap();
        assert_eq!(s.metadata.model, "experiment");
        assert_eq!(s.len(), 1);
    }

    #[test]
    fn malformed_csv_reports_line() {
        let text = format!("{CSV_HEADER}\n1,10,0,1.5,7.5\n1,370,0,1,1\n");
        assert!(matches!(
            ForceSeries::from_csv_str(&text, "x"),
            Err(Error::Format { line: 3, .. })
        ));
        assert!(matches!(
            ForceSeries::from_csv_str("rev,az\n", "x"),
            Err(Error::Format { line: 1, .. })
        ));
        let text = format!("{CSV_HEADER}\n2,10,0,1.5,7.5\n1,20,0,1,1\n");
        assert!(ForceSeries::from_csv_str(&text, "x").is_err());
    }

    #[test]
    fn convergence_metrics() {
        let s = sample_series();
        // revolutions differ by a constant 1 N/m
        assert!((s.revolution_rms_change(2).unwrap() - 1.0).abs() < 1e-12);
        assert!(s.revolution_rms_change(1).is_none());
        // blade 1 sits at the same azimuths with the same formula
        assert!(s.blade_curve_mismatch(2).unwrap() < 1e-12);
        assert_eq!(s.curve(1, 0, Quantity::PerSpan).len(), 4);
    }

    #[test]
    fn atomic_write_and_read() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.csv");
        let s = sample_series();
        s.write_csv(&path).unwrap();
        let back = ForceSeries::read_csv(&path).unwrap();
        assert_eq!(back.metadata, s.metadata);
        assert_eq!(back.to_csv_string(), s.to_csv_string());
        for (a, b) in s.samples.iter().zip(&back.samples) {
            assert!((a.fn_per_span - b.fn_per_span).abs() <= 5e-15 * a.fn_per_span.abs());
        }
        assert!(matches!(
            s.write_csv(dir.path().join("missing/dir/s.csv")),
            Err(Error::Io { .. })
        ));
    }

    proptest! {
        #[test]
        fn round_trip_is_lossless_at_15_digits(
            values in proptest::collection::vec((0.0..360.0f64, -1e6..1e6f64, -1e-3..1e-3f64), 1..50)
        ) {
            let mut s = ForceSeries::new(SeriesMetadata { model: "m".into(), tsr: Some(2.55), scenario_hash: None });
            for (i, &(az, a, b)) in values.iter().enumerate() {
                s.samples.push(ForceSample { revolution: 1 + i as u32 / 10, azimuth_deg: az, blade: (i % 3) as u32, fn_per_span: a, fn_total: b });
            }
            let text = s.to_csv_string();
            let back = ForceSeries::from_csv_str(&text, "p").unwrap();
            prop_assert_eq!(back.to_csv_string(), text);
            for (x, y) in s.samples.iter().zip(&back.samples) {
                for (p, q) in [(x.azimuth_deg, y.azimuth_deg), (x.fn_per_span, y.fn_per_span), (x.fn_total, y.fn_total)] {
                    prop_assert!((p - q).abs() <= 5e-15 * p.abs());
                }
                prop_assert_eq!(x.revolution, y.revolution);
                prop_assert_eq!(x.blade, y.blade);
            }
        }
    }
}

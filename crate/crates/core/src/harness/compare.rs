use std::fmt::Write as _;
use std::path::Path;

use super::series::{write_atomic, ForceSeries, Quantity};
use crate::error::{Error, Result};

pub const MIN_BINS: usize = 12;

/// Statistics of one azimuth bin.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BinStat {
    pub mean: f64,
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

/// One series reduced to azimuth bins over blade 0 of its final revolution.
#[derive(Clone, Debug, PartialEq)]
pub struct BinnedSeries {
    pub label: String,
    pub revolution: u32,
    pub bins: Vec<Option<BinStat>>,
    /// Azimuth, degrees, of the largest and smallest sample.
    pub peak_max_azimuth: f64,
    pub peak_min_azimuth: f64,
    pub peak_max: f64,
    pub peak_min: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ComparisonReport {
    pub bin_count: usize,
    pub quantity: Quantity,
    pub a: BinnedSeries,
    pub b: BinnedSeries,
    /// RMS of `mean_a − mean_b` over bins populated in both series.
    pub rms_difference: f64,
    pub shared_bins: usize,
}

/// Bin index of an azimuth in `[0, 360)` for `bins` equal bins.
pub fn bin_index(azimuth_deg: f64, bins: usize) -> usize {
    let k = (azimuth_deg * bins as f64 / 360.0).floor();
    (k.max(0.0) as usize).min(bins - 1)
}

fn bin_series(series: &ForceSeries, bins: usize, quantity: Quantity, name: &str) -> Result<BinnedSeries> {
    let rev = series
        .last_revolution()
        .ok_or_else(|| Error::Argument(format!("series `{name}` is empty")))?;
    let curve = series.curve(rev, 0, quantity);
    if curve.is_empty() {
        return Err(Error::Argument(format!("series `{name}` has no blade-0 samples in revolution {rev}")));
    }
    let mut acc: Vec<Option<BinStat>> = vec![None; bins];
    let mut sums = vec![0.0; bins];
    for &(az, f) in &curve {
        let k = bin_index(az, bins);
        sums[k] += f;
        acc[k] = Some(match acc[k] {
            None => BinStat { mean: 0.0, min: f, max: f, count: 1 },
            Some(s) => BinStat { mean: 0.0, min: s.min.min(f), max: s.max.max(f), count: s.count + 1 },
        });
    }
    for (slot, sum) in acc.iter_mut().zip(sums) {
        if let Some(s) = slot {
            s.mean = sum / s.count as f64;
        }
    }
    let (mut hi, mut lo) = (curve[0], curve[0]);
    for &p in &curve {
        if p.1 > hi.1 {
            hi = p;
        }
        if p.1 < lo.1 {
            lo = p;
        }
    }
    Ok(BinnedSeries {
        label: series.metadata.label(),
        revolution: rev,
        bins: acc,
        peak_max_azimuth: hi.0,
        peak_min_azimuth: lo.0,
        peak_max: hi.1,
        peak_min: lo.1,
    })
}

/// Bin blade 0 of each series' final revolution and compare the bin means.
pub fn compare(a: &ForceSeries, b: &ForceSeries, bins: usize, quantity: Quantity) -> Result<ComparisonReport> {
    if bins < MIN_BINS {
        return Err(Error::Argument(format!("need at least {MIN_BINS} bins, got {bins}")));
    }
    let ba = bin_series(a, bins, quantity, "a")?;
    let bb = bin_series(b, bins, quantity, "b")?;
    let (mut sum, mut n) = (0.0, 0usize);
    for (x, y) in ba.bins.iter().zip(&bb.bins) {
        if let (Some(x), Some(y)) = (x, y) {
            let d = x.mean - y.mean;
            sum += d * d;
            n += 1;
        }
    }
    if n == 0 {
        return Err(Error::Argument("the two series share no populated azimuth bin".into()));
    }
    Ok(ComparisonReport {
        bin_count: bins,
        quantity,
        a: ba,
        b: bb,
        rms_difference: (sum / n as f64).sqrt(),
        shared_bins: n,
    })
}

impl ComparisonReport {
    pub fn bin_width(&self) -> f64 {
        360.0 / self.bin_count as f64
    }

    /// Plain-text report: `#` summary lines, then one CSV row per bin.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let q = match self.quantity {
            Quantity::PerSpan => "fn_per_span",
            Quantity::Total => "fn_total",
        };
        let _ = writeln!(out, "# quantity: {q}");
        let _ = writeln!(out, "# bins: {}", self.bin_count);
        for (tag, s) in [("a", &self.a), ("b", &self.b)] {
            let _ = writeln!(out, "# {tag}: {} (revolution {})", s.label, s.revolution);
            let _ = writeln!(
                out,
                "# {tag}_peak_max: {:.6e} at {:.3} deg",
                s.peak_max, s.peak_max_azimuth
            );
            let _ = writeln!(
                out,
                "# {tag}_peak_min: {:.6e} at {:.3} deg",
                s.peak_min, s.peak_min_azimuth
            );
        }
        let _ = writeln!(out, "# rms_difference: {:.6e}", self.rms_difference);
        let _ = writeln!(out, "# shared_bins: {}", self.shared_bins);
        out.push_str("bin_start_deg,bin_end_deg,a_mean,a_min,a_max,b_mean,b_min,b_max\n");
        let w = self.bin_width();
        let cell = |s: &Option<BinStat>| match s {
            Some(s) => format!("{:.6e},{:.6e},{:.6e}", s.mean, s.min, s.max),
            None => ",,".to_string(),
        };
        for k in 0..self.bin_count {
            let _ = writeln!(
                out,
                "{:.6},{:.6},{},{}",
                k as f64 * w,
                (k + 1) as f64 * w,
                cell(&self.a.bins[k]),
                cell(&self.b.bins[k])
            );
        }
        out
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        write_atomic(path.as_ref(), self.to_text().as_bytes())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::series::{ForceSample, SeriesMetadata};
    use proptest::prelude::*;

    fn synthetic(scale: f64, shift_deg: f64, samples: usize) -> ForceSeries {
        let mut s = ForceSeries::new(SeriesMetadata { model: "syn".into(), tsr: Some(3.44), scenario_hash: None });
        for rev in 1..=2u32 {
            for k in 0..samples {
                let az0 = 360.0 * k as f64 / samples as f64;
                let f = scale * (100.0 * az0.to_radians().sin() + 20.0 * (3.0 * az0.to_radians()).cos() + rev as f64);
                let az = (az0 + shift_deg) % 360.0;
                s.samples.push(ForceSample { revolution: rev, azimuth_deg: az, blade: 0, fn_per_span: f, fn_total: 5.0 * f });
            }
        }
        s
    }

    #[test]
    fn identical_series_have_zero_difference() {
        let a = synthetic(1.0, 0.0, 144);
        let r = compare(&a, &a, 72, Quantity::Total).unwrap();
        assert_eq!(r.rms_difference, 0.0);
        assert_eq!(r.shared_bins, 72);
        let last: Vec<_> = a.samples.iter().filter(|s| s.revolution == 2).collect();
        let top = last.iter().max_by(|x, y| x.fn_total.total_cmp(&y.fn_total)).unwrap();
        assert_eq!((r.a.peak_max_azimuth, r.a.peak_max), (top.azimuth_deg, top.fn_total));
    }

    #[test]
    fn scaling_by_two_gives_rms_of_the_bin_means() {
        let a = synthetic(1.0, 0.0, 144);
        let b = synthetic(2.0, 0.0, 144);
        let r = compare(&a, &b, 36, Quantity::PerSpan).unwrap();
        let oracle = (r.a.bins.iter().map(|s| s.unwrap().mean.powi(2)).sum::<f64>() / 36.0).sqrt();
        assert!((r.rms_difference - oracle).abs() <= 1e-12 * oracle);
    }

    #[test]
    fn shifting_by_one_bin_permutes_the_means() {
        let bins = 72;
        let a = synthetic(1.0, 0.0, 144);
        let b = synthetic(1.0, 5.0, 144);
        let r = compare(&a, &b, bins, Quantity::Total).unwrap();
        for k in 0..bins {
            let ma = r.a.bins[k].unwrap().mean;
            let mb = r.b.bins[(k + 1) % bins].unwrap().mean;
            assert!((ma - mb).abs() <= 1e-12 * ma.abs().max(1.0), "bin {k}");
        }
    }

    #[test]
    fn bins_partition_the_circle() {
        assert_eq!(bin_index(0.0, 72), 0);
        assert_eq!(bin_index(4.999_999, 72), 0);
        assert_eq!(bin_index(5.0, 72), 1);
        assert_eq!(bin_index(359.999_999, 72), 71);
    }

    #[test]
    fn argument_errors() {
        let a = synthetic(1.0, 0.0, 72);
        let empty = ForceSeries::default();
        assert!(matches!(compare(&a, &empty, 72, Quantity::Total), Err(Error::Argument(_))));
        assert!(matches!(compare(&a, &a, 11, Quantity::Total), Err(Error::Argument(_))));
    }

    #[test]
    fn report_text_has_one_row_per_bin() {
        let a = synthetic(1.0, 0.0, 72);
        let text = compare(&a, &a, 24, Quantity::Total).unwrap().to_text();
        let rows = text.lines().filter(|l| !l.starts_with('#')).count();
        assert_eq!(rows, 25);
        assert!(text.contains("# rms_difference: 0.000000e0"));
    }

    proptest! {
        #[test]
        fn rms_is_symmetric(scale in 0.1..5.0f64, shift in 0.0..360.0f64, bins in 12usize..100) {
            let a = synthetic(1.0, 0.0, 90);
            let b = synthetic(scale, shift, 90);
            let ab = compare(&a, &b, bins, Quantity::Total).unwrap();
            let ba = compare(&b, &a, bins, Quantity::Total).unwrap();
            prop_assert_eq!(ab.rms_difference, ba.rms_difference);
        }
    }
}

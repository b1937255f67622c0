//! `vawt` command-line front end: run scenarios, compare force series, plot them.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use log::info;
use vawt::harness::{self, compare, emit_plot, load_config, ForceSeries, Model, Quantity};

#[derive(Parser, Debug)]
#[command(name = "vawt", version, about = "2D aerodynamics of H-rotor vertical-axis wind turbines")]
struct Cli {
    /// Log progress to stderr (repeat for more detail).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a scenario and write its force series as CSV.
    Simulate {
        /// Scenario file.
        #[arg(long)]
        config: PathBuf,
        /// Solver; defaults to the one named in the scenario.
        #[arg(long, value_enum)]
        model: Option<ModelArg>,
        /// Number of revolutions.
        #[arg(long)]
        revs: Option<usize>,
        /// Azimuth samples per revolution.
        #[arg(long)]
        steps_per_rev: Option<usize>,
        /// Tree opening parameter of the vortex model (0 = direct summation).
        #[arg(long)]
        theta_open: Option<f64>,
        /// Directory for ALM field snapshots (written every `snapshot_every` samples).
        #[arg(long)]
        snapshots: Option<PathBuf>,
        /// Output CSV.
        #[arg(long)]
        out: PathBuf,
    },
    /// Bin two force series by azimuth and report their differences.
    Compare {
        /// First series CSV.
        a: PathBuf,
        /// Second series CSV.
        b: PathBuf,
        /// Number of equal azimuth bins (at least 12).
        #[arg(long, default_value_t = 72)]
        bins: usize,
        /// Quantity to bin.
        #[arg(long, value_enum, default_value_t = QuantityArg::Total)]
        quantity: QuantityArg,
        /// Output report.
        #[arg(long)]
        out: PathBuf,
    },
    /// Plot F_N against azimuth for one or more series as SVG (plus the plotted data as CSV).
    Plot {
        /// Series CSV files, one curve each.
        #[arg(required = true)]
        csv: Vec<PathBuf>,
        /// Quantity to plot.
        #[arg(long, value_enum, default_value_t = QuantityArg::Total)]
        quantity: QuantityArg,
        /// Output SVG; the plotted data goes next to it with a .csv extension.
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModelArg {
    Vortex,
    Alm,
}

impl From<ModelArg> for Model {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::Vortex => Model::Vortex,
            ModelArg::Alm => Model::Alm,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum QuantityArg {
    Total,
    PerSpan,
}

impl From<QuantityArg> for Quantity {
    fn from(q: QuantityArg) -> Self {
        match q {
            QuantityArg::Total => Quantity::Total,
            QuantityArg::PerSpan => Quantity::PerSpan,
        }
    }
}

fn read_series(path: &PathBuf) -> Result<ForceSeries> {
    ForceSeries::read_csv(path).with_context(|| format!("reading {}", path.display()))
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate { config, model, revs, steps_per_rev, theta_open, snapshots, out } => {
            let mut scenario = load_config(&config)?;
            if let Some(m) = model {
                scenario.model = m.into();
            }
            if let Some(n) = revs {
                scenario.revolutions = n;
            }
            if let Some(n) = steps_per_rev {
                scenario.steps_per_rev = n;
            }
            if let Some(t) = theta_open {
                scenario.vortex.theta_open = t;
            }
            scenario.validate()?;
            info!(
                "{}: {} model, λ = {:.3}, {} revolutions × {} steps",
                scenario.name,
                scenario.model.name(),
                scenario.tip_speed_ratio()?,
                scenario.revolutions,
                scenario.steps_per_rev
            );
            let series = match (scenario.model, snapshots) {
                (Model::Alm, Some(dir)) => vawt::alm2d::run_alm_traced(&scenario, Some(&dir))?.series,
                _ => harness::run_scenario(&scenario)?,
            };
            series.write_csv(&out)?;
            info!("wrote {} samples to {}", series.len(), out.display());
        }
        Command::Compare { a, b, bins, quantity, out } => {
            let report = compare(&read_series(&a)?, &read_series(&b)?, bins, quantity.into())?;
            report.write(&out)?;
            info!("RMS difference {:.4e} over {} bins", report.rms_difference, report.shared_bins);
        }
        Command::Plot { csv, quantity, out } => {
            let series = csv.iter().map(read_series).collect::<Result<Vec<_>>>()?;
            let data = emit_plot(&series, &out, quantity.into())?;
            info!("wrote {} and {}", out.display(), data.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new().filter_level(level).format_timestamp(None).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let msg = format!("{e:#}").replace('\n', " ");
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}

//! `biphoton`: delay scans, parameter sweeps and the verification suite.

mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use biphoton::oracle::oracle_rate;
use biphoton::pathsum::{enumerate_paths, incoherent_rate};
use biphoton::presets::{run_sweep, SweepAxis, SweepSpec};
use biphoton::scan::{scan_delay, VisibilityEstimator};
use biphoton::verify::{self, relative_delta, VerifyOptions};
use biphoton::{preset, Error, ExperimentConfig, ScanSettings};
use clap::{Args, Parser, Subcommand, ValueEnum};

/// Forces the frequency grid to this many points per axis (testing only).
const GRID_ENV: &str = "BIPHOTON_GRID_N";

/// Rates below this fraction of the incoherent rate count as zero when
/// comparing with the closed form.
const ORACLE_FLOOR: f64 = 1e-6;

#[derive(Parser)]
#[command(
    name = "biphoton",
    version,
    about = "Two-photon polarization interferometer simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Scan the trombone delay and write the coincidence rate curve.
    Run {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        scan: ScanArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Repeat the delay scan over values of one parameter.
    Sweep {
        #[command(flatten)]
        source: Source,
        /// Parameter to vary (a numeric config key, or `rho` / `tau_p`).
        #[arg(long)]
        axis: String,
        /// Comma-separated values.
        #[arg(
            long,
            value_delimiter = ',',
            required = true,
            allow_negative_numbers = true
        )]
        values: Vec<f64>,
        #[command(flatten)]
        scan: ScanArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Run the invariant suite and print a JSON report.
    Verify,
}

#[derive(Args)]
struct Source {
    /// Preset name (fig3a_dip, fig3a_peak, fig3b_dip, fig3b_peak, fig4c).
    #[arg(conflicts_with = "config", required_unless_present = "config")]
    preset: Option<String>,
    /// Key-value config file.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct ScanArgs {
    /// First delay (fs).
    #[arg(long, default_value_t = -1500.0, allow_negative_numbers = true)]
    d_min: f64,
    /// Last delay (fs).
    #[arg(long, default_value_t = 1500.0, allow_negative_numbers = true)]
    d_max: f64,
    /// Number of delay points.
    #[arg(long, default_value_t = 151)]
    steps: usize,
    /// Delays with |d| above this (fs) define the baseline; estimated from the scan if absent.
    #[arg(long)]
    wing_threshold: Option<f64>,
    #[arg(long, value_enum, default_value_t = Estimator::Baseline)]
    estimator: Estimator,
}

#[derive(Clone, Copy, ValueEnum)]
enum Estimator {
    /// Depth or height relative to the baseline.
    Baseline,
    /// (max − min)/(max + min).
    MaxMin,
}

#[derive(Args)]
struct OutputArgs {
    /// CSV destination; standard output if absent.
    #[arg(long, short)]
    output: Option<PathBuf>,
    /// Also write an SVG plot of the CSV data.
    #[arg(long)]
    svg: Option<PathBuf>,
}

enum Failure {
    Sim(Error),
    Io(String),
    Verification(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Sim(e)
    }
}

impl ScanArgs {
    fn settings(&self) -> ScanSettings {
        ScanSettings {
            d_min: self.d_min,
            d_max: self.d_max,
            steps: self.steps,
            wing_threshold: self.wing_threshold,
            estimator: match self.estimator {
                Estimator::Baseline => VisibilityEstimator::BaselineReferenced,
                Estimator::MaxMin => VisibilityEstimator::MaxMin,
            },
            ..ScanSettings::default()
        }
    }
}

fn grid_override() -> Result<Option<usize>, Failure> {
    match std::env::var(GRID_ENV) {
        Ok(v) => v.trim().parse().map(Some).map_err(|_| {
            Failure::Sim(Error::Config(format!(
                "{GRID_ENV} must be an integer, got `{v}`"
            )))
        }),
        Err(_) => Ok(None),
    }
}

fn load(source: &Source) -> Result<ExperimentConfig, Failure> {
    let mut config = match (&source.preset, &source.config) {
        (Some(name), _) => preset(name)?,
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
            ExperimentConfig::parse(&text).map_err(|e| {
                Failure::Sim(match e {
                    Error::Parse { line, message } => Error::Parse {
                        line,
                        message: format!("{}: {message}", path.display()),
                    },
                    other => other,
                })
            })?
        }
        (None, None) => unreachable!("clap requires a preset or --config"),
    };
    if let Some(n) = grid_override()? {
        config.grid.n = n;
        config.grid.fixed = true;
    }
    config.validate()?;
    Ok(config)
}

fn write(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => {
            std::fs::write(p, text).map_err(|e| Failure::Io(format!("{}: {e}", p.display())))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cmd_run(source: &Source, scan: &ScanArgs, out: &OutputArgs) -> Result<(), Failure> {
    let config = load(source)?;
    let result = scan_delay(&config, &scan.settings())?;
    let floor = ORACLE_FLOOR * incoherent_rate(&enumerate_paths(&config)?);
    let mut oracle_delta: f64 = 0.0;
    for (&d, &r) in result.delays.iter().zip(&result.rates) {
        oracle_delta = oracle_delta.max(relative_delta(r, oracle_rate(&config, d)?, floor));
    }
    write(out.output.as_deref(), &output::scan_csv(&result))?;
    if let Some(path) = &out.svg {
        let points: Vec<(f64, f64)> = result
            .delays
            .iter()
            .zip(&result.rates)
            .map(|(d, r)| (*d, r / result.baseline))
            .collect();
        let title = source.preset.as_deref().unwrap_or("coincidence rate");
        write(
            Some(path),
            &output::svg_plot(title, "delay (fs)", "rate / baseline", &points),
        )?;
    }
    eprintln!("kind: {}", result.kind.as_str());
    eprintln!("visibility: {}", output::format_g(result.visibility));
    eprintln!("baseline: {}", output::format_g(result.baseline));
    eprintln!("extremum: {}", output::format_g(result.extremum));
    eprintln!(
        "oracle max relative delta: {}",
        output::format_g(oracle_delta)
    );
    Ok(())
}

fn cmd_sweep(
    source: &Source,
    axis: &str,
    values: &[f64],
    scan: &ScanArgs,
    out: &OutputArgs,
) -> Result<(), Failure> {
    let axis = SweepAxis::parse(axis)?;
    let spec = SweepSpec {
        base: load(source)?,
        axis,
        values: values.to_vec(),
        scan: scan.settings(),
    };
    let rows = run_sweep(&spec)?;
    write(out.output.as_deref(), &output::sweep_csv(&rows))?;
    if let Some(path) = &out.svg {
        let points: Vec<(f64, f64)> = rows.iter().map(|r| (r.value, r.visibility)).collect();
        write(
            Some(path),
            &output::svg_plot("visibility", spec.axis.name(), "visibility", &points),
        )?;
    }
    Ok(())
}

fn cmd_verify() -> Result<(), Failure> {
    let report = verify::run(&VerifyOptions {
        grid_override: grid_override()?,
    });
    let json = serde_json::to_string_pretty(&report).expect("report serializes");
    println!("{json}");
    match report.first_failure {
        None => Ok(()),
        Some(name) => Err(Failure::Verification(name.to_string())),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Run { source, scan, out } => cmd_run(source, scan, out),
        Command::Sweep {
            source,
            axis,
            values,
            scan,
            out,
        } => cmd_sweep(source, axis, values, scan, out),
        Command::Verify => cmd_verify(),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verification(name)) => {
            eprintln!("verification failed: {name}");
            ExitCode::from(1)
        }
        Err(Failure::Io(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
        Err(Failure::Sim(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_usage() { 2 } else { 3 })
        }
    }
}

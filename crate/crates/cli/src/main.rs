use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use seqrac::certification::{compute_witnesses, WitnessPair};
use seqrac::projective::{projective_optimum, ProjectiveOptions};
use seqrac::protocol::{Event, ProtocolSpec};
use seqrac::report::{
    self, round_sig, run_certify, run_sweep, witness_plane, Format, Mode, RunConfig, DEFAULT_CURVE_POINTS,
    SEED_ENV,
};
use seqrac::sampling::sample_counts;
use seqrac::tomography::{sharpness_error_curve, write_curve_csv, TomographyOptions, MIN_STARTS};

#[derive(Parser)]
#[command(name = "seqrac", version, about = "Sequential qubit random-access-code simulation and certification")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// JSON run configuration; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Write here instead of stdout.
    #[arg(short, long, global = true)]
    output: Option<PathBuf>,

    #[arg(long, global = true, value_enum)]
    format: Option<FormatArg>,

    /// Master seed for sampling and optimizer restarts.
    #[arg(long, global = true, env = SEED_ENV)]
    seed: Option<u64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Witnesses, certified interval and incompatibility bounds over a θ grid.
    Sweep(SweepArgs),
    /// Sample a count table for one sharpness.
    Simulate(SimulateArgs),
    /// Certify the sharpness interval and incompatibility for a witness pair.
    Certify(WitnessArgs),
    /// Incompatibility lower bounds for a witness pair.
    Incompat(WitnessArgs),
    /// Worst-case detector tomography with imperfect tetrahedron states.
    Tomo(TomoArgs),
    /// Optimal and projective-simulation boundaries of the witness plane.
    ProjectiveBound(ProjectiveArgs),
}

#[derive(Args)]
struct SharpnessArgs {
    #[arg(long, conflicts_with = "theta")]
    eta: Option<f64>,
    /// Half-wave-plate angle in degrees, η = cos 4θ.
    #[arg(long)]
    theta: Option<f64>,
}

#[derive(Args)]
struct SweepArgs {
    /// Comma-separated θ values in degrees (default: the twelve measured settings).
    #[arg(long, value_delimiter = ',')]
    thetas: Option<Vec<f64>>,
    #[arg(long)]
    visibility: Option<f64>,
    /// Sample this many events per block instead of using exact statistics.
    #[arg(long)]
    events: Option<u64>,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    sharpness: SharpnessArgs,
    #[arg(long)]
    visibility: Option<f64>,
    #[arg(long)]
    events: Option<u64>,
}

#[derive(Args)]
struct WitnessArgs {
    #[arg(long)]
    w_ab: Option<f64>,
    #[arg(long)]
    w_ac: Option<f64>,
    #[arg(long)]
    sigma_ab: Option<f64>,
    #[arg(long)]
    sigma_ac: Option<f64>,
}

#[derive(Args)]
struct TomoArgs {
    #[arg(long)]
    epsilon: Option<f64>,
    /// Single sharpness of E_lab = η σz.
    #[arg(long, conflicts_with = "etas")]
    eta: Option<f64>,
    /// Comma-separated sharpness grid.
    #[arg(long, value_delimiter = ',')]
    etas: Option<Vec<f64>>,
    #[arg(long)]
    starts: Option<usize>,
}

#[derive(Args)]
struct ProjectiveArgs {
    /// Points per boundary curve.
    #[arg(long)]
    points: Option<usize>,
    /// Report the maximizing strategy at this W_AB only.
    #[arg(long)]
    w_ab: Option<f64>,
}

impl Cli {
    fn config(&self) -> Result<RunConfig> {
        let base = match &self.config {
            Some(path) => RunConfig::from_json_file(path)?,
            None => RunConfig::default(),
        };
        let mut flags = RunConfig {
            seed: self.seed,
            output_path: self.output.clone(),
            format: self.format.map(|f| match f {
                FormatArg::Csv => Format::Csv,
                FormatArg::Json => Format::Json,
            }),
            ..Default::default()
        };
        match &self.command {
            Command::Sweep(a) => {
                flags.mode = Some(Mode::Sweep);
                flags.thetas = a.thetas.clone();
                flags.visibility = a.visibility;
                flags.events_per_setting = a.events;
            }
            Command::Simulate(a) => {
                flags.mode = Some(Mode::Simulate);
                flags.eta = a.sharpness.eta;
                flags.theta_degrees = a.sharpness.theta;
                flags.visibility = a.visibility;
                flags.events_per_setting = a.events;
            }
            Command::Certify(a) | Command::Incompat(a) => {
                flags.mode = Some(if matches!(self.command, Command::Certify(_)) {
                    Mode::Certify
                } else {
                    Mode::Incompat
                });
                flags.w_ab = a.w_ab;
                flags.w_ac = a.w_ac;
                flags.sigma_ab = a.sigma_ab;
                flags.sigma_ac = a.sigma_ac;
            }
            Command::Tomo(a) => {
                flags.mode = Some(Mode::Tomo);
                flags.epsilon = a.epsilon;
                flags.etas = a.etas.clone().or(a.eta.map(|e| vec![e]));
                flags.starts = a.starts;
            }
            Command::ProjectiveBound(a) => {
                flags.mode = Some(Mode::ProjectiveBound);
                flags.points = a.points;
                flags.w_ab = a.w_ab;
            }
        }
        let file_mode = base.mode;
        let merged = base.overlay(flags);
        if let (Some(file_mode), Some(cmd_mode)) = (file_mode, merged.mode) {
            if file_mode != cmd_mode {
                bail!("config file is for mode {file_mode:?}, command is {cmd_mode:?}");
            }
        }
        Ok(merged)
    }
}

fn sink(config: &RunConfig) -> Result<Box<dyn Write>> {
    Ok(match &config.output_path {
        Some(path) => Box::new(BufWriter::new(
            File::create(path).with_context(|| format!("cannot write {}", path.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn write_json<T: Serialize>(value: &T, out: &mut dyn Write) -> Result<()> {
    serde_json::to_writer_pretty(&mut *out, value)?;
    writeln!(out)?;
    Ok(())
}

fn write_csv_rows<T: Serialize>(rows: &[T], out: &mut dyn Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

fn warn(warnings: &[String]) {
    for w in warnings {
        eprintln!("warning: {w}");
    }
}

#[derive(Serialize)]
struct CertifyRow {
    w_ab: f64,
    w_ac: f64,
    sigma_ab: f64,
    sigma_ac: f64,
    eta_min: f64,
    eta_max: f64,
    sigma_min: f64,
    sigma_max: f64,
    interval_width: f64,
    consistent: bool,
    d_bob: f64,
    d_charlie: f64,
    eta_argmin: f64,
}

#[derive(Serialize)]
struct IncompatReport {
    d_bob: f64,
    d_charlie: f64,
    eta_argmin: f64,
    assumptions: Vec<String>,
    warnings: Vec<String>,
}

#[derive(Serialize)]
struct SimulationReport {
    eta: f64,
    visibility: f64,
    events_per_setting: u64,
    seed: u64,
    counts: BTreeMap<String, u64>,
    witnesses: WitnessPair<f64>,
}

fn run(cli: &Cli) -> Result<()> {
    let config = cli.config()?;
    let format = config.format();
    match config.mode.expect("every subcommand sets a mode") {
        Mode::Sweep => {
            let report = run_sweep(&config)?;
            warn(&report.warnings);
            let mut out = sink(&config)?;
            match format {
                Format::Csv => report::write_rows_csv(&report.rows, &mut out)?,
                Format::Json => write_json(&report, &mut out)?,
            }
        }
        Mode::Simulate => {
            let eta = config.require_sharpness()?;
            let visibility = config.visibility()?;
            let Some(events) = config.events()? else {
                bail!("simulate needs --events");
            };
            let spec = ProtocolSpec::optimal(eta, visibility)?;
            let table = sample_counts(&spec, events, config.seed())?;
            let mut out = sink(&config)?;
            match format {
                Format::Csv => table.write_csv(&mut out)?,
                Format::Json => {
                    let w = compute_witnesses(&table)?;
                    let counts = Event::all()
                        .map(|e| (e.to_string(), table.get(e)))
                        .collect();
                    write_json(
                        &SimulationReport {
                            eta: round_sig(eta),
                            visibility,
                            events_per_setting: events,
                            seed: config.seed(),
                            counts,
                            witnesses: WitnessPair::new(
                                round_sig(w.w_ab),
                                round_sig(w.w_ac),
                                round_sig(w.sigma_ab),
                                round_sig(w.sigma_ac),
                            ),
                        },
                        &mut out,
                    )?
                }
            }
        }
        Mode::Certify => {
            let report = run_certify(&config.witness_pair()?)?;
            warn(&report.warnings);
            let mut out = sink(&config)?;
            match format {
                Format::Json => write_json(&report, &mut out)?,
                Format::Csv => {
                    let c = &report.certification;
                    let i = &report.incompatibility;
                    write_csv_rows(
                        &[CertifyRow {
                            w_ab: c.w_ab,
                            w_ac: c.w_ac,
                            sigma_ab: c.sigma_ab,
                            sigma_ac: c.sigma_ac,
                            eta_min: c.eta_min,
                            eta_max: c.eta_max,
                            sigma_min: report.sigma_min,
                            sigma_max: report.sigma_max,
                            interval_width: report.interval_width,
                            consistent: c.consistent,
                            d_bob: i.d_bob,
                            d_charlie: i.d_charlie,
                            eta_argmin: i.eta_argmin,
                        }],
                        &mut out,
                    )?
                }
            }
        }
        Mode::Incompat => {
            let report = run_certify(&config.witness_pair()?)?;
            warn(&report.warnings);
            let i = report.incompatibility;
            let inc = IncompatReport {
                d_bob: i.d_bob,
                d_charlie: i.d_charlie,
                eta_argmin: i.eta_argmin,
                assumptions: i.assumptions,
                warnings: report.warnings,
            };
            let mut out = sink(&config)?;
            match format {
                Format::Json => write_json(&inc, &mut out)?,
                Format::Csv => {
                    writeln!(out, "d_bob,d_charlie,eta_argmin")?;
                    writeln!(out, "{},{},{}", inc.d_bob, inc.d_charlie, inc.eta_argmin)?;
                }
            }
        }
        Mode::Tomo => {
            let epsilon = config.epsilon()?;
            let grid = config
                .etas
                .clone()
                .unwrap_or_else(|| (0..=10).map(|k| k as f64 / 10.0).collect());
            let opts = TomographyOptions {
                starts: config.starts.unwrap_or(MIN_STARTS),
                seed: config.seed(),
                ..Default::default()
            };
            let results = sharpness_error_curve(epsilon, &grid, &opts)?;
            let mut out = sink(&config)?;
            match format {
                Format::Csv => {
                    let points: Vec<_> = results.iter().map(|r| r.curve_point()).collect();
                    write_curve_csv(&points, &mut out)?
                }
                Format::Json => write_json(&results, &mut out)?,
            }
        }
        Mode::ProjectiveBound => {
            let opts = ProjectiveOptions::default();
            let mut out = sink(&config)?;
            if let Some(w) = config.w_ab {
                let o = projective_optimum(w, &opts)?;
                match format {
                    Format::Json => write_json(&o, &mut out)?,
                    Format::Csv => write_csv_rows(&[o], &mut out)?,
                }
            } else {
                let rows = witness_plane(config.points.unwrap_or(DEFAULT_CURVE_POINTS), &opts)?;
                match format {
                    Format::Csv => report::write_plane_csv(&rows, &mut out)?,
                    Format::Json => write_json(&rows, &mut out)?,
                }
            }
        }
    }
    Ok(())
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(&cli) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}

//! Command-line front end: configuration loading, dispatch and output.

pub mod config;
pub mod emit;

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;
use unruh_core::kinematics::{EventKm, RindlerFrame};
use unruh_core::scenarios::{
    run_scenario, run_spectrum, sweep, OutputFormat, PotentialKind, ScenarioConfig, ScenarioReport, SweepAxis,
};

pub use config::{parse_config, parse_config_str, CliError};
use emit::{Emitter, RunManifest};

const DEFAULT_OUT: &str = "unruh-lab-out";

#[derive(Debug, Parser)]
#[command(name = "unruh-lab", version, about = "Numerical laboratory for extended Unruh spin thermometers")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Lapse, local temperature and inertial coordinates at given heights.
    Kinematics(KinematicsArgs),
    /// Solve the spatial problem and write its levels.
    Spectrum(RunArgs),
    /// Reduced spin state of the configured scenario, without relaxation.
    SpinState(RunArgs),
    /// Master-equation relaxation towards the Gibbs state.
    Relax(RunArgs),
    /// Full scenario run with report.
    Scenario {
        #[arg(value_enum)]
        kind: ScenarioName,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Repeat a scenario over values of one parameter.
    Sweep {
        /// Parameter to vary.
        #[arg(long, value_parser = parse_axis)]
        axis: SweepAxis,
        /// Comma-separated values, SI units.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true, required = true)]
        values: Vec<f64>,
        #[command(flatten)]
        run: RunArgs,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ScenarioName {
    ExtendedWell,
    DoubleWell,
    Tabulated,
}

impl ScenarioName {
    fn kind(self) -> PotentialKind {
        match self {
            Self::ExtendedWell => PotentialKind::InfiniteWell,
            Self::DoubleWell => PotentialKind::DoubleWell,
            Self::Tabulated => PotentialKind::Tabulated,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

impl From<Format> for OutputFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Csv => OutputFormat::Csv,
            Format::Json => OutputFormat::Json,
        }
    }
}

fn parse_axis(s: &str) -> Result<SweepAxis, String> {
    s.parse().map_err(|e: unruh_core::Error| e.to_string())
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Output directory.
    #[arg(long, env = "UNRUH_LAB_OUT")]
    pub out: Option<PathBuf>,
    /// Output format; overrides the configuration.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Reserved; every pipeline is deterministic.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// TOML configuration file.
    #[arg(long)]
    pub config: PathBuf,
    /// Treat regime warnings as errors.
    #[arg(long)]
    pub strict_regime: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct KinematicsArgs {
    /// Proper acceleration (m/s²); taken from --config when absent.
    #[arg(long)]
    pub a: Option<f64>,
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Comma-separated heights (m).
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true, default_value = "0")]
    pub z: Vec<f64>,
    /// Coordinate time (s) for the inertial image.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub t: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

/// Loaded configuration with command-line overrides applied.
struct Prepared {
    config: ScenarioConfig,
    out: PathBuf,
    format: OutputFormat,
    seed: Option<u64>,
}

fn out_dir(args: &OutputArgs, config: Option<&ScenarioConfig>) -> PathBuf {
    args.out
        .clone()
        .or_else(|| config.and_then(|c| c.output.dir.clone()))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
}

fn prepare(run: &RunArgs) -> Result<Prepared, CliError> {
    let mut config = parse_config(&run.config)?;
    if run.strict_regime {
        config.regime.strict = true;
    }
    if let Some(f) = run.output.format {
        config.output.format = f.into();
    }
    Ok(Prepared {
        out: out_dir(&run.output, Some(&config)),
        format: config.output.format,
        seed: run.output.seed,
        config,
    })
}

/// Parses arguments, runs the command and maps failures to exit codes.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code().clamp(0, 255) as u8);
        }
    };
    match dispatch(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

pub fn dispatch(command: &Command) -> Result<(), CliError> {
    match command {
        Command::Kinematics(args) => kinematics(args),
        Command::Spectrum(run) => spectrum(run),
        Command::SpinState(run) => {
            let mut p = prepare(run)?;
            p.config.relaxation.enabled = false;
            scenario("spin-state", p)
        }
        Command::Relax(run) => {
            let mut p = prepare(run)?;
            p.config.relaxation.enabled = true;
            scenario("relax", p)
        }
        Command::Scenario { kind, run } => {
            let p = prepare(run)?;
            if p.config.potential.kind != kind.kind() {
                return Err(CliError::Validation(format!(
                    "scenario {} needs potential.kind = {}",
                    kind.to_possible_value().map(|v| v.get_name().to_string()).unwrap_or_default(),
                    serde_json::to_value(kind.kind())
                        .ok()
                        .and_then(|v| v.as_str().map(str::to_string))
                        .unwrap_or_default()
                )));
            }
            scenario("scenario", p)
        }
        Command::Sweep { axis, values, run } => sweep_command(*axis, values, run),
    }
}

fn kinematics(args: &KinematicsArgs) -> Result<(), CliError> {
    let config = args.config.as_deref().map(parse_config).transpose()?;
    let a = match (args.a, &config) {
        (Some(a), _) => a,
        (None, Some(c)) => c.a,
        (None, None) => return Err(CliError::Usage("kinematics needs --a or --config".into())),
    };
    let frame = RindlerFrame::new(a)?;
    let mut rows = Vec::with_capacity(args.z.len());
    for &z in &args.z {
        let inertial = frame.km_to_minkowski(EventKm {
            t: args.t,
            x: 0.0,
            y: 0.0,
            z,
        })?;
        rows.push(json!({
            "z_m": z,
            "t_s": args.t,
            "lapse": frame.lapse(z),
            "beta_local_per_joule": frame.local_inverse_temperature(z)?,
            "temperature_local_kelvin": frame.unruh_temperature() / frame.lapse(z),
            "acceleration_local": frame.local_acceleration(z)?,
            "T_inertial_s": inertial.t,
            "Z_inertial_m": inertial.z,
        }));
    }
    const COLUMNS: [&str; 8] = [
        "z_m",
        "t_s",
        "lapse",
        "beta_local_per_joule",
        "temperature_local_kelvin",
        "acceleration_local",
        "T_inertial_s",
        "Z_inertial_m",
    ];
    let out = out_dir(&args.output, config.as_ref());
    let format = args
        .output
        .format
        .map(OutputFormat::from)
        .or(config.as_ref().map(|c| c.output.format))
        .unwrap_or(OutputFormat::Csv);
    let mut e = Emitter::new(&out)?;
    match format {
        OutputFormat::Csv => e.csv(
            "kinematics.csv",
            &COLUMNS,
            rows.iter()
                .map(|r| COLUMNS.iter().map(|k| emit::float(r[k].as_f64().unwrap_or(f64::NAN))).collect()),
        )?,
        OutputFormat::Json => e.json(
            "kinematics.json",
            &json!({
                "acceleration": a,
                "unruh_temperature_kelvin": frame.unruh_temperature(),
                "unruh_beta_per_joule": frame.unruh_beta(),
                "horizon_distance_m": frame.horizon_distance(),
                "points": rows,
            }),
        )?,
    }
    println!(
        "a = {a:e} m/s^2: T_a = {:.6e} K, c^2/a = {:.6e} m",
        frame.unruh_temperature(),
        frame.horizon_distance()
    );
    RunManifest::new("kinematics".into(), args.output.seed, config.as_ref(), &[]).write(&mut e)?;
    report_files(&e);
    Ok(())
}

fn spectrum(run: &RunArgs) -> Result<(), CliError> {
    let p = prepare(run)?;
    let result = run_spectrum(&p.config)?;
    let mut e = Emitter::new(&p.out)?;
    match p.format {
        OutputFormat::Csv => {
            emit::spectrum(&mut e, &result.levels)?;
            if p.config.potential.kind == PotentialKind::DoubleWell {
                emit::wells(&mut e, &result.levels)?;
            }
        }
        OutputFormat::Json => e.json("spectrum.json", &result)?,
    }
    if p.config.output.states {
        emit::states(&mut e, &result.wavefunctions, &result.scales)?;
    }
    for l in &result.levels {
        println!(
            "n = {}: E = {:.10e} (ε*) = {:.6e} J, zbar = {:.6e} (ℓ*)",
            l.n, l.energy_dimless, l.energy_joule, l.mean_position_dimless
        );
    }
    RunManifest::new("spectrum".into(), p.seed, Some(&p.config), &[]).write(&mut e)?;
    report_files(&e);
    Ok(())
}

fn write_report(e: &mut Emitter, report: &ScenarioReport, format: OutputFormat) -> anyhow::Result<()> {
    match format {
        OutputFormat::Csv => emit::report_csv(e, report)?,
        OutputFormat::Json => e.json("report.json", report)?,
    }
    if report.config.relaxation.enabled {
        emit::trajectory(e, report.trajectory.as_ref(), report.config.output.trajectory_stride)?;
    }
    if report.config.output.states {
        emit::states(e, &report.wavefunctions, &report.scales)?;
    }
    Ok(())
}

fn scenario(command: &str, p: Prepared) -> Result<(), CliError> {
    let report = run_scenario(&p.config)?;
    let mut e = Emitter::new(&p.out)?;
    write_report(&mut e, &report, p.format)?;
    print_summary(&report);
    RunManifest::new(command.into(), p.seed, Some(&p.config), &report.checks).write(&mut e)?;
    report_files(&e);
    Ok(())
}

fn print_summary(r: &ScenarioReport) {
    println!("regime: {}", r.regime.summary());
    if let Some(t) = r.t_eff_kelvin {
        println!(
            "T_eff = {t:.10e} K (T_a = {:.10e} K), exact-sector T_eff = {}",
            r.frame.unruh_temperature_kelvin,
            r.t_eff_exact_kelvin.map(|x| format!("{x:.10e} K")).unwrap_or_else(|| "n/a".into())
        );
    } else {
        println!("zero spin coupling: spin state is maximally mixed");
    }
    println!("p+ = {:.10e}, p- = {:.10e}", r.perturbative.p_plus, r.perturbative.p_minus);
    if let Some(dw) = &r.double_well {
        println!(
            "double well: β_R/β_L = {:.10e}, suppression exponent = {:.6e}",
            dw.beta_ratio, dw.suppression_exponent
        );
    }
    for c in &r.checks {
        println!(
            "check {}: {} ({:.3e} <= {:.1e})",
            c.name,
            if c.passed { "PASS" } else { "FAIL" },
            c.value,
            c.limit
        );
    }
}

fn sweep_command(axis: SweepAxis, values: &[f64], run: &RunArgs) -> Result<(), CliError> {
    let p = prepare(run)?;
    let points = sweep(&p.config, axis, values);
    let mut e = Emitter::new(&p.out)?;
    match p.format {
        OutputFormat::Csv => {
            let rows = points.iter().map(|pt| match &pt.result {
                Ok(r) => vec![
                    emit::float(pt.value),
                    "ok".into(),
                    r.beta_eff_per_joule().map(emit::float).unwrap_or_default(),
                    r.t_eff_kelvin.map(emit::float).unwrap_or_default(),
                    r.t_eff_exact_kelvin.map(emit::float).unwrap_or_default(),
                    r.log_weight_gap.map(emit::float).unwrap_or_default(),
                    emit::float(r.ground_lapse_offset),
                    String::new(),
                ],
                Err(err) => vec![
                    emit::float(pt.value),
                    "error".into(),
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                    err.to_string(),
                ],
            });
            e.csv(
                "sweep.csv",
                &[
                    axis.name(),
                    "status",
                    "beta_eff_per_joule",
                    "t_eff_kelvin",
                    "t_eff_exact_kelvin",
                    "log_weight_gap",
                    "ground_lapse_offset",
                    "error",
                ],
                rows,
            )?;
        }
        OutputFormat::Json => {
            let list: Vec<_> = points
                .iter()
                .map(|pt| match &pt.result {
                    Ok(r) => json!({ "value": pt.value, "report": r }),
                    Err(err) => json!({ "value": pt.value, "error": err.to_string() }),
                })
                .collect();
            e.json("sweep.json", &json!({ "axis": axis, "points": list }))?;
        }
    }
    let failed = points.iter().filter(|p| p.result.is_err()).count();
    println!("sweep over {}: {} points, {failed} failed", axis.name(), points.len());
    for pt in points.iter().filter_map(|p| p.result.as_ref().err().map(|e| (p.value, e))) {
        eprintln!("  {} = {:e}: {}", axis.name(), pt.0, pt.1);
    }
    RunManifest::new(format!("sweep {}", axis.name()), p.seed, Some(&p.config), &[]).write(&mut e)?;
    report_files(&e);
    Ok(())
}

fn report_files(e: &Emitter) {
    println!("wrote {} file(s) to {}", e.files().len(), display(e.dir()));
}

fn display(p: &Path) -> String {
    p.display().to_string()
}

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use cavisteady::scan::{
    run_scan, write_csv, write_json, ObservableName, OutputFormat, ScanAxis, ScanConfig, ScanRow,
};
use cavisteady::steady::Method;
use cavisteady::system::{assemble_system, AssemblyOptions};
use cavisteady::{validate_params, RawParams};
use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

const EXIT_INVALID: u8 = 2;
const EXIT_SOLVER: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "cavisteady", version, about = "Steady states of driven-dissipative Kerr cavity rings")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve a single parameter point.
    Solve(CommonArgs),
    /// Sweep one parameter and tabulate every method at each point.
    Scan(CommonArgs),
}

#[derive(Args, Debug, Default)]
struct CommonArgs {
    /// JSON file with the same keys as the flags; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Number of cavities in the ring.
    #[arg(long)]
    n: Option<usize>,
    /// Fock-space truncation per cavity.
    #[arg(long)]
    nmax: Option<usize>,
    #[arg(long, allow_negative_numbers = true)]
    delta: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    u: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    j: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    omega: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    gamma0: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    nthermal: Option<f64>,
    /// Comma-separated subset of exact,pert0,pert1,pert2,oracle.
    #[arg(long, alias = "method", value_delimiter = ',')]
    methods: Option<Vec<String>>,
    /// Scan axis as name:from:to:steps (j, delta, laser_offset, omega, n_thermal).
    #[arg(long, allow_hyphen_values = true)]
    scan: Option<String>,
    /// Comma-separated subset of n_a,g2,nn.
    #[arg(long, value_delimiter = ',')]
    observables: Option<Vec<String>>,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    format: Option<String>,
    /// Use the uncorrected diagonal coefficient (no pump term).
    #[arg(long)]
    appendix_verbatim: bool,
    /// Fock cutoff of the density-matrix oracle.
    #[arg(long)]
    oracle_cut: Option<usize>,
    /// Write the reduced linear system as `row col re im origin` lines.
    #[arg(long)]
    dump_system: Option<PathBuf>,
}

#[derive(Deserialize, Debug, Default)]
#[serde(default, deny_unknown_fields)]
struct FileConfig {
    n: Option<usize>,
    nmax: Option<usize>,
    delta: Option<f64>,
    u: Option<f64>,
    j: Option<f64>,
    omega: Option<f64>,
    gamma0: Option<f64>,
    nthermal: Option<f64>,
    #[serde(alias = "method")]
    methods: Option<Vec<String>>,
    scan: Option<String>,
    observables: Option<Vec<String>>,
    out: Option<PathBuf>,
    format: Option<String>,
    appendix_verbatim: Option<bool>,
    oracle_cut: Option<usize>,
    dump_system: Option<PathBuf>,
}

/// Configuration after merging file and flags.
#[derive(Debug)]
struct Resolved {
    scan: ScanConfig,
    out: Option<PathBuf>,
    format: OutputFormat,
    dump_system: Option<PathBuf>,
}

#[derive(Debug)]
enum Failure {
    Invalid(String),
    Solver(String),
    Other(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Other(e)
    }
}

fn invalid(e: impl std::fmt::Display) -> Failure {
    Failure::Invalid(e.to_string())
}

fn load_file(path: &Path) -> Result<FileConfig, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| invalid(format!("cannot read config {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| invalid(format!("config {}: {e}", path.display())))
}

fn resolve(args: CommonArgs, is_scan: bool) -> Result<Resolved, Failure> {
    let file = match &args.config {
        Some(p) => load_file(p)?,
        None => FileConfig::default(),
    };
    let defaults = RawParams::default();
    let base = RawParams {
        n_cavities: args.n.or(file.n).unwrap_or(defaults.n_cavities),
        n_max: args.nmax.or(file.nmax).unwrap_or(defaults.n_max),
        delta: args.delta.or(file.delta).unwrap_or(defaults.delta),
        u: args.u.or(file.u).unwrap_or(defaults.u),
        j: args.j.or(file.j).unwrap_or(defaults.j),
        omega: args.omega.or(file.omega).unwrap_or(defaults.omega),
        gamma0: args.gamma0.or(file.gamma0).unwrap_or(defaults.gamma0),
        n_thermal: args.nthermal.or(file.nthermal).unwrap_or(defaults.n_thermal),
    };

    let methods = match args.methods.or(file.methods) {
        Some(list) => list
            .iter()
            .map(|s| s.trim().parse::<Method>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(invalid)?,
        None => vec![Method::Exact],
    };
    let axis = match args.scan.or(file.scan) {
        Some(s) => Some(ScanAxis::parse(&s).map_err(invalid)?),
        None => None,
    };
    if is_scan && axis.is_none() {
        return Err(invalid("scan requires --scan name:from:to:steps"));
    }
    if !is_scan && axis.is_some() {
        return Err(invalid("--scan is only valid with the scan subcommand"));
    }

    let mut scan = ScanConfig::new(base, axis, methods);
    if let Some(list) = args.observables.or(file.observables) {
        scan.observables = list
            .iter()
            .map(|s| s.trim().parse::<ObservableName>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(invalid)?;
    }
    scan.appendix_verbatim = args.appendix_verbatim || file.appendix_verbatim.unwrap_or(false);
    scan.oracle_cut = args.oracle_cut.or(file.oracle_cut);
    scan.validate().map_err(invalid)?;

    let format = match args.format.or(file.format) {
        Some(f) => f.parse::<OutputFormat>().map_err(invalid)?,
        None => OutputFormat::Csv,
    };
    Ok(Resolved {
        scan,
        out: args.out.or(file.out),
        format,
        dump_system: args.dump_system.or(file.dump_system),
    })
}

fn write_rows(rows: &[ScanRow], cfg: &Resolved) -> anyhow::Result<()> {
    let sink: Box<dyn Write> = match &cfg.out {
        Some(p) => Box::new(File::create(p).with_context(|| format!("cannot create {}", p.display()))?),
        None => Box::new(io::stdout().lock()),
    };
    let mut w = BufWriter::new(sink);
    match cfg.format {
        OutputFormat::Csv => write_csv(rows, &cfg.scan, &mut w)?,
        OutputFormat::Json => write_json(rows, &mut w)?,
    }
    w.flush()?;
    Ok(())
}

fn dump_system(cfg: &Resolved, path: &Path) -> Result<(), Failure> {
    let params = validate_params(&cfg.scan.base).map_err(invalid)?;
    let mut opts = AssemblyOptions::default();
    opts.eom.appendix_verbatim = cfg.scan.appendix_verbatim;
    let system = assemble_system(&params, opts).map_err(|e| Failure::Solver(e.to_string()))?;
    let file = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    let mut w = BufWriter::new(file);
    system.write_debug(&mut w).context("writing system dump")?;
    w.flush().context("writing system dump")?;
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    let (args, is_scan) = match cli.command {
        Command::Solve(a) => (a, false),
        Command::Scan(a) => (a, true),
    };
    let cfg = resolve(args, is_scan)?;
    if let Some(path) = &cfg.dump_system {
        dump_system(&cfg, path)?;
    }
    let rows = run_scan(&cfg.scan).map_err(invalid)?;
    write_rows(&rows, &cfg)?;

    let failures: Vec<String> = rows
        .iter()
        .filter_map(|r| r.error.as_ref().map(|e| format!("{}: {e}", r.method)))
        .collect();
    for f in &failures {
        log::warn!("{f}");
    }
    if !is_scan && !failures.is_empty() {
        return Err(Failure::Solver(failures.join("; ")));
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Invalid(msg)) => {
            eprintln!("error: invalid configuration: {msg}");
            ExitCode::from(EXIT_INVALID)
        }
        Err(Failure::Solver(msg)) => {
            eprintln!("error: solver failed: {msg}");
            ExitCode::from(EXIT_SOLVER)
        }
        Err(Failure::Other(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

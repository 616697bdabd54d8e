use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qtransduce_cli::{run, run_preset, CliError, Command, Overrides, Preset, RunConfig};

/// Coupled-mode input-output simulator for optical-microwave converters.
#[derive(Parser)]
#[command(name = "qtransduce", version, args_conflicts_with_subcommands = true)]
struct Cli {
    /// Write one of the figure data sets.
    #[arg(long, value_enum)]
    preset: Option<Preset>,
    /// Directory for preset outputs.
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
    #[command(subcommand)]
    command: Option<Cmd>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Efficiency curve over an omega window (CSV `omega,eta`).
    Sweep(RunArgs),
    /// High-efficiency intervals above a threshold (JSON).
    Bandwidth(RunArgs),
    /// Efficiency over a kappa x omega grid (CSV `kappa,omega,eta`).
    Map(RunArgs),
    /// Damping rate that maximizes the bandwidth (JSON).
    Optimize(RunArgs),
    /// Compare the atomic ensemble with its eliminated three-mode model (JSON).
    Eliminate(RunArgs),
    /// Integrate the Langevin equation and compare with S(omega) (JSON + trace CSV).
    Timedomain(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Config file; standard input when omitted or `-`.
    config: Option<PathBuf>,
    #[arg(long, allow_negative_numbers = true)]
    kappa: Option<f64>,
    #[arg(long)]
    threshold: Option<f64>,
    /// Single frequency (timedomain).
    #[arg(long, allow_negative_numbers = true)]
    omega: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    omega_min: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    omega_max: Option<f64>,
    #[arg(long)]
    omega_points: Option<usize>,
    /// Output file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Trace CSV destination (timedomain).
    #[arg(long)]
    trace: Option<PathBuf>,
}

impl RunArgs {
    fn overrides(&self) -> Overrides {
        Overrides {
            kappa: self.kappa,
            threshold: self.threshold,
            omega: self.omega,
            omega_min: self.omega_min,
            omega_max: self.omega_max,
            omega_points: self.omega_points,
            out: self.out.clone(),
            trace: self.trace.clone(),
        }
    }
}

fn read_config(path: Option<&Path>) -> Result<String, CliError> {
    match path {
        Some(p) if p != Path::new("-") => {
            fs::read_to_string(p).map_err(|e| CliError::Config(format!("cannot read {}: {e}", p.display())))
        }
        _ => {
            let mut s = String::new();
            io::stdin()
                .read_to_string(&mut s)
                .map_err(|e| CliError::Config(format!("cannot read standard input: {e}")))?;
            Ok(s)
        }
    }
}

fn emit(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| CliError::Io(format!("{}: {e}", p.display()))),
        None => {
            let mut out = io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
            Ok(())
        }
    }
}

fn execute(cmd: Command, args: &RunArgs) -> Result<(), CliError> {
    let mut cfg = RunConfig::from_json(&read_config(args.config.as_deref())?)?;
    cfg.apply(&args.overrides())?;
    let output = run(cmd, &cfg)?;
    if let (Some(trace), Some(path)) = (&output.trace, &cfg.trace) {
        emit(Some(path), trace)?;
    }
    emit(cfg.out.as_deref(), &output.text)
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match (cli.preset, cli.command) {
        (Some(preset), None) => {
            for path in run_preset(preset, &cli.out_dir)? {
                println!("{}", path.display());
            }
            Ok(())
        }
        (None, Some(cmd)) => {
            let (kind, args) = match &cmd {
                Cmd::Sweep(a) => (Command::Sweep, a),
                Cmd::Bandwidth(a) => (Command::Bandwidth, a),
                Cmd::Map(a) => (Command::Map, a),
                Cmd::Optimize(a) => (Command::Optimize, a),
                Cmd::Eliminate(a) => (Command::Eliminate, a),
                Cmd::Timedomain(a) => (Command::Timedomain, a),
            };
            execute(kind, args)
        }
        _ => Err(CliError::Config("give a subcommand or --preset (see --help)".into())),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qtransduce: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

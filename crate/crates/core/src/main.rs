use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use pt_oligomer::config::{CommandName, Format, RunConfig};
use pt_oligomer::run::{error_json, execute, exit_code, write_outputs};
use pt_oligomer::{OligomerError, Result};

#[derive(Parser)]
#[command(name = "pt-oligomer", version, about = "Stationary states, stability and dynamics of gain/loss dimers and trimers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Continue branches over `params.gamma_range` and locate bifurcations.
    Sweep(Args),
    /// Eigenvalues of one stationary state at `params.gamma`.
    Spectrum(Args),
    /// Perturb a stationary state and integrate it.
    Evolve(Args),
    /// Closed-form dimer critical points.
    Critical(Args),
    /// Run the built-in reference checks.
    Validate(Args),
}

#[derive(clap::Args)]
struct Args {
    /// TOML run configuration (optional for `validate`).
    config: Option<PathBuf>,
    /// Output directory, overriding `output.directory`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Perturbation seed, overriding `numerics.seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Table formats, overriding `output.formats`.
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
    Both,
}

fn run(name: CommandName, args: Args) -> Result<i32> {
    let mut cfg = match &args.config {
        Some(path) => RunConfig::load(path)?,
        None if name == CommandName::Validate => RunConfig::parse("")?,
        None => return Err(OligomerError::Config(format!("`{}` needs a configuration file", name.as_str()))),
    };
    if let Some(out) = args.out {
        cfg.output.directory = out;
    }
    if let Some(seed) = args.seed {
        cfg.numerics.seed = seed;
    }
    if let Some(f) = args.format {
        cfg.output.formats = match f {
            FormatArg::Csv => vec![Format::Csv],
            FormatArg::Json => vec![Format::Json],
            FormatArg::Both => vec![Format::Csv, Format::Json],
        };
    }
    let report = execute(name, &cfg)?;
    let written = write_outputs(&cfg.output.directory, &report.outputs)?;
    for line in &report.summary {
        println!("{line}");
    }
    for path in written {
        println!("wrote {}", path.display());
    }
    Ok(report.exit_code)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, args) = match cli.command {
        Command::Sweep(a) => (CommandName::Sweep, a),
        Command::Spectrum(a) => (CommandName::Spectrum, a),
        Command::Evolve(a) => (CommandName::Evolve, a),
        Command::Critical(a) => (CommandName::Critical, a),
        Command::Validate(a) => (CommandName::Validate, a),
    };
    match run(name, args) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("{}", error_json(&e));
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}

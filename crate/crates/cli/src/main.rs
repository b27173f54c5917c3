use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use giantwg_cli::{emit, frame_phase_points, parse_config, run_sweep, Config, Format, Target};

#[derive(Parser)]
#[command(name = "giantwg", version, about = "Photon scattering and driven-dissipative tables for a two-point-coupled Kerr cavity")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Single-photon r, t, Σ and G at k_i.
    Single(IoArgs),
    /// Transmitted two-photon g²(τ) at k_i.
    Two(IoArgs),
    /// Master-equation steady state: photon number and g²(0).
    Steady(IoArgs),
    /// Liouvillian gap.
    Gap(IoArgs),
    /// Reflected photon density at the configured separation.
    Reflected(IoArgs),
    /// Full grid sweep as described by the config.
    Sweep(IoArgs),
}

#[derive(Args)]
struct IoArgs {
    /// Flat TOML configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (args, point_target) = match &cli.command {
        Command::Single(a) => (a, Some(Target::SinglePhoton)),
        Command::Two(a) => (a, Some(Target::G2Map)),
        Command::Steady(a) => (a, Some(Target::SteadyCurve)),
        Command::Gap(a) => (a, Some(Target::GapCurve)),
        Command::Reflected(a) => (a, Some(Target::ReflectedCurve)),
        Command::Sweep(a) => (a, None),
    };
    let text = match std::fs::read_to_string(&args.config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", args.config.display());
            return ExitCode::from(2);
        }
    };
    let mut config = match parse_config(&text) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {}: {e}", args.config.display());
            return ExitCode::from(2);
        }
    };
    if let Some(target) = point_target {
        single_point(&mut config, target);
    }
    if let Some(f) = args.format {
        config.sweep.format = match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        };
    }
    if let Some(out) = &args.out {
        config.sweep.output = Some(out.clone());
    }

    let skewed = frame_phase_points(&config);
    if skewed > 0 {
        eprintln!(
            "warning: k_i·d is not a multiple of 2π at {skewed} point(s); the lab-frame correlator carries the phase e^(i k_i d)"
        );
    }

    let start = Instant::now();
    let result = run_sweep(&config);
    let failed = result.records.iter().filter(|r| r.flag != "ok").count();
    eprintln!(
        "{} records ({failed} flagged) in {:.3} s",
        result.records.len(),
        start.elapsed().as_secs_f64()
    );

    let written = match &config.sweep.output {
        Some(path) => File::create(path)
            .map_err(|e| format!("cannot write {}: {e}", path.display()))
            .and_then(|f| {
                let mut w = BufWriter::new(f);
                emit(&result, config.sweep.format, &mut w)
                    .map_err(|e| e.to_string())
                    .and_then(|_| w.flush().map_err(|e| e.to_string()))
            }),
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            emit(&result, config.sweep.format, &mut lock).map_err(|e| e.to_string())
        }
    };
    match written {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

/// Point subcommands evaluate the configured base point only.
fn single_point(config: &mut Config, target: Target) {
    if config.sweep.target != target
        || config
            .sweep
            .observables
            .iter()
            .any(|o| !target.observables().contains(&o.as_str()))
    {
        config.sweep.observables = target.default_observables();
    }
    config.sweep.target = target;
    config.sweep.axes.clear();
}

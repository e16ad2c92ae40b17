use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use gpsplit::{scenarios, HarnessError, RunConfig};

#[derive(Parser)]
#[command(name = "gpsplit", version, about = "Split-step Gross–Pitaevskii experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a single configuration (trajectory, vortex case or conservation run).
    Run(Args),
    /// Run a step-size convergence sweep.
    Sweep(Args),
    /// Compute a ground state with the potential frozen at t = 0.
    Groundstate(Args),
}

#[derive(clap::Args)]
struct Args {
    /// JSON run configuration.
    config: PathBuf,
    /// Output directory (overrides the configuration).
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn execute(command: Command) -> Result<(), HarnessError> {
    if let Ok(n) = std::env::var("GPSPLIT_THREADS") {
        let n: usize = n
            .parse()
            .map_err(|_| HarnessError::Config(format!("GPSPLIT_THREADS must be a positive integer, got {n:?}")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| HarnessError::Config(e.to_string()))?;
    }
    let (args, verb) = match &command {
        Command::Run(a) => (a, "run"),
        Command::Sweep(a) => (a, "sweep"),
        Command::Groundstate(a) => (a, "groundstate"),
    };
    let cfg = RunConfig::from_path(&args.config)?.resolve()?;
    let out = args.out.clone().unwrap_or_else(|| cfg.output.clone());
    match verb {
        "sweep" if !cfg.scenario.is_sweep() => {
            return Err(HarnessError::Config("`sweep` needs a convergence scenario".into()))
        }
        "run" if cfg.scenario.is_sweep() => {
            return Err(HarnessError::Config("convergence scenarios run with `sweep`".into()))
        }
        "groundstate" => {
            let (_, report) = scenarios::run_groundstate(&cfg, Some(&out))?;
            eprintln!(
                "ground state: converged={} iterations={} energy={:.12e} |grad|={:.3e}",
                report.converged, report.iterations, report.final_energy, report.final_grad_norm
            );
            return Ok(());
        }
        _ => {}
    }
    let summary = gpsplit::run(&cfg, &out)?;
    if let gpsplit::RunSummary::Convergence(rep) = &summary {
        for s in &rep.slopes {
            eprintln!("{}: X2 slope {:.3}, energy slope {:.3}", s.scheme.name(), s.x2_slope, s.energy_slope);
        }
    }
    eprintln!("wrote {}", out.display());
    Ok(())
}

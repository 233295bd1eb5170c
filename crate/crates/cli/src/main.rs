use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use dirac_hartree_cli::commands::format_number;
use dirac_hartree_cli::{cmd_convergence, cmd_run, cmd_verify, Failure, RunConfig, VerifyConfig};

#[derive(Parser)]
#[command(name = "dhl", version, about = "Dirac-Hartree pseudo-spectral simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve initial data and write diagnostics.csv and summary.json.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory; overrides `output_dir` in the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run verifier sweeps and write verify_report.json.
    Verify {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Self-convergence study over `evolution.dt_ladder`.
    Convergence {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(value) = std::env::var("DHL_THREADS") else {
        return Ok(());
    };
    let threads: usize = value
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::Config(anyhow::anyhow!("DHL_THREADS must be a positive integer, got {value:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Failure::Io(e.into()))
}

fn base_dir(config: &Path) -> PathBuf {
    config.parent().map(Path::to_path_buf).unwrap_or_default()
}

fn execute(cli: Cli) -> Result<(), Failure> {
    configure_threads()?;
    match cli.command {
        Command::Run { config, out } => {
            let cfg = RunConfig::load(&config).map_err(Failure::Config)?;
            let result = cmd_run(&cfg, &base_dir(&config), out.as_deref())?;
            let s = &result.summary;
            println!("wrote {} ({} samples to t = {})", result.dir.display(), s.samples, s.final_time);
            println!("mass drift (relative) {}", format_number(s.mass_drift.max_relative));
            println!("energy drift (relative) {}", format_number(s.energy_drift.max_relative));
            if let Some(err) = s.linear_vs_exact_error {
                println!("linear vs exact flow {}", format_number(err));
            }
            Ok(())
        }
        Command::Verify { config, out } => {
            let cfg = VerifyConfig::load(&config).map_err(Failure::Config)?;
            let result = cmd_verify(&cfg, &base_dir(&config), out.as_deref());
            if let Ok(report) = &result {
                for check in &report.checks {
                    println!("{:?}: max ratio {} pass", check.check, format_number(check.max_ratio));
                }
            }
            result.map(|_| ())
        }
        Command::Convergence { config, out } => {
            let cfg = RunConfig::load(&config).map_err(Failure::Config)?;
            let report = cmd_convergence(&cfg, &base_dir(&config), out.as_deref())?;
            println!("{:>12}  {:>24}", "dt", "error");
            for (dt, err) in &report.rows {
                println!("{dt:>12}  {:>24}", format_number(*err));
            }
            match report.order {
                Some(order) => println!("fitted order {order:.4}"),
                None => println!("exact (all errors <= 1e-12)"),
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("dhl: {failure}");
            ExitCode::from(failure.exit_code() as u8)
        }
    }
}

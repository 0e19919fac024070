use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use surfns::checkpoint::load_checkpoint;
use surfns::config::Config;
use surfns::runner::{self, with_threads, RunOptions};
use surfns::scenarios;
use surfns::{HarnessError, Result};

#[derive(Parser)]
#[command(name = "surfns", version, about = "Surface Navier-Stokes spectral simulator and verification harness")]
struct Cli {
    /// Output directory for CSV, report and checkpoint files.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Override the configured seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads.
    #[arg(long, global = true, env = "SURFNS_THREADS")]
    threads: Option<usize>,
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a configuration file and its checks.
    Run { config: PathBuf },
    /// Run a built-in scenario.
    Scenario { name: String },
    /// List built-in scenarios.
    Scenarios {
        /// Print the full configuration of each scenario.
        #[arg(long)]
        dump: bool,
    },
    /// Unit-viscosity eigenvalues per degree, then the assembled spectrum.
    Spectrum { config: PathBuf },
    /// Korn constant per truncation.
    Korn { config: PathBuf },
    /// Killing coordinates and block norms of a checkpoint.
    Decompose { checkpoint: PathBuf },
    /// Run a configuration as an ensemble.
    Ensemble {
        config: PathBuf,
        #[arg(long)]
        members: usize,
    },
}

fn load(path: &PathBuf, seed: Option<u64>) -> Result<Config> {
    let mut cfg = Config::from_file(path)?;
    if let Some(s) = seed {
        cfg.set_seed(s);
    }
    Ok(cfg)
}

fn execute(cli: &Cli, mut cfg: Config) -> Result<i32> {
    if let Some(s) = cli.seed {
        cfg.set_seed(s);
    }
    let opts = RunOptions {
        threads: cli.threads,
        out_dir: cli.out.clone(),
    };
    let exec = runner::execute(&cfg, &opts)?;
    if !cli.quiet {
        print!("{}", exec.report.summary());
        if let Some(e) = &exec.ensemble {
            let failed = e.members.iter().filter(|m| m.error.is_some()).count();
            println!(
                "  ensemble: {} members ({failed} failed), omega_hat={:.6e}, entry time={}",
                e.members.len(),
                e.omega_hat,
                e.entry_time.map_or("never".to_string(), |t| format!("{t}"))
            );
        }
    }
    Ok(exec.report.exit_code())
}

fn dispatch(cli: &Cli) -> Result<i32> {
    match &cli.command {
        Command::Run { config } => execute(cli, load(config, None)?),
        Command::Scenario { name } => execute(cli, scenarios::builtin(name)?),
        Command::Ensemble { config, members } => {
            if *members < 2 {
                return Err(HarnessError::Unsupported("an ensemble needs at least 2 members".into()));
            }
            let mut cfg = load(config, None)?;
            cfg.set_members(*members);
            execute(cli, cfg)
        }
        Command::Scenarios { dump } => {
            for name in scenarios::list_scenarios() {
                let cfg = scenarios::builtin(name)?;
                if *dump {
                    println!("# {name}\n{}", scenarios::scenario_text(name)?.trim());
                    println!();
                } else {
                    println!("{name:<30} {}", cfg.claims);
                }
            }
            Ok(0)
        }
        Command::Spectrum { config } => {
            let cfg = load(config, cli.seed)?;
            let (per_degree, full) = with_threads(cli.threads, || runner::spectrum(&cfg))??;
            for (l, lam) in per_degree {
                println!("{l} {lam:.16e}");
            }
            println!("# assembled spectrum ({} eigenvalues)", full.len());
            for ev in full {
                println!("{ev:.16e}");
            }
            Ok(0)
        }
        Command::Korn { config } => {
            let cfg = load(config, cli.seed)?;
            let est = with_threads(cli.threads, || runner::korn(&cfg))??;
            for e in est {
                println!("{} {:.16e} {}", e.truncation, e.constant, e.dimension);
            }
            Ok(0)
        }
        Command::Decompose { checkpoint } => {
            let ck = load_checkpoint(checkpoint)?;
            let d = runner::decompose(&ck)?;
            println!("t {:.16e}", d.time);
            for (i, a) in d.alpha.iter().enumerate() {
                println!("alpha_{} {a:.16e}", i + 1);
            }
            println!("norm_uK {:.16e}", d.norm_uk);
            println!("norm_uNK {:.16e}", d.norm_unk);
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

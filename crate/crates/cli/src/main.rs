use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use layerscat_cli::{cmd_forward, cmd_invert, exit_code, parse_config, RunConfig};

#[derive(Parser)]
#[command(
    name = "layerscat",
    version,
    about = "Phase shifts of layered radial potentials and their inversion"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate phase shifts of the configured potential.
    Forward(Common),
    /// Recover the potential from synthetic phase shifts by random search.
    Invert {
        #[command(flatten)]
        common: Common,
        /// Worker threads for the local minimizations (default: all cores).
        #[arg(long)]
        workers: Option<usize>,
    },
}

#[derive(Args)]
struct Common {
    /// TOML run configuration; defaults apply to missing keys.
    #[arg(long, short)]
    config: Option<PathBuf>,
    /// Overrides the configured master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the configured output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Common {
    fn load(&self) -> anyhow::Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => parse_config(path)?,
            None => RunConfig::default(),
        };
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(out) = &self.out {
            cfg.output_dir = out.clone();
        }
        Ok(cfg)
    }
}

fn run(cli: Cli) -> anyhow::Result<i32> {
    match cli.command {
        Command::Forward(common) => {
            let cfg = common.load()?;
            cmd_forward(&cfg, &cfg.output_dir)?;
            Ok(0)
        }
        Command::Invert { common, workers } => {
            let cfg = common.load()?;
            if workers == Some(0) {
                anyhow::bail!("--workers must be at least 1");
            }
            let out = cmd_invert(&cfg, &cfg.output_dir, workers)?;
            for r in &out.runs {
                println!(
                    "k={} h={} {} iterations={} D={:.6} phi={:e}",
                    r.k,
                    r.h,
                    r.report.verdict,
                    r.report.iterations(),
                    r.report.final_index(),
                    r.report.best.phi
                );
            }
            Ok(exit_code(out.overall_verdict()))
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

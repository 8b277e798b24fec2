use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mtrd::cli::{cmd_dpi, cmd_feasible, cmd_region, cmd_validate, Overrides, RunConfig, EXIT_CONFIG};
use mtrd::feasibility::SetId;

#[derive(Parser)]
#[command(name = "mtrd", version, about = "Bounds on the multi-terminal rate-distortion region")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Trace the configured sets and check that they nest.
    Region(Common),
    /// Check the spectral data-processing inequality on a three-variable joint.
    Dpi(Common),
    /// Test a channel against the configured sets.
    Feasible(Common),
    /// Check induced multi-letter channels against the single-letter conditions.
    Validate {
        #[command(flatten)]
        common: Common,
        /// Slip a channel with common information into the suite; it must be caught.
        #[arg(long)]
        self_test: bool,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    budget: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long = "set")]
    sets: Vec<SetId>,
}

impl Common {
    fn config(&self) -> mtrd::Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        cfg.apply(&Overrides {
            seed: self.seed,
            budget: self.budget,
            out: self.out.clone(),
            sets: self.sets.clone(),
        });
        Ok(cfg)
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    if let Some(n) = std::env::var("MTRD_THREADS").ok().and_then(|s| s.parse::<usize>().ok()) {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            log::warn!("could not size the thread pool: {e}");
        }
    }
    let cli = Cli::parse();
    let (common, self_test) = match &cli.command {
        Command::Region(c) | Command::Dpi(c) | Command::Feasible(c) => (c, false),
        Command::Validate { common, self_test } => (common, *self_test),
    };
    let cfg = match common.config() {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_CONFIG as u8);
        }
    };
    let (mut out, mut err) = (std::io::stdout(), std::io::stderr());
    let code = match cli.command {
        Command::Region(_) => cmd_region(&cfg, &mut out, &mut err),
        Command::Dpi(_) => cmd_dpi(&cfg, &mut out, &mut err),
        Command::Feasible(_) => cmd_feasible(&cfg, &mut out, &mut err),
        Command::Validate { .. } => cmd_validate(&cfg, self_test, &mut out, &mut err),
    };
    ExitCode::from(code as u8)
}

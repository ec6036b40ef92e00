use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use seqgan_cli::{config, run, CliError, Mode, Overrides};

/// Adversarial sequence generation experiments.
#[derive(Parser, Debug)]
#[command(name = "seqgan", version)]
struct Args {
    /// TOML experiment config; omitted keys take their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    mode: Option<Mode>,
    /// Comma-separated subset of random,mle,ss,pg_bleu,seqgan.
    #[arg(long, value_delimiter = ',')]
    algorithms: Option<Vec<String>>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Grid file of [[run]] tables, each merged over the base config.
    #[arg(long)]
    grid: Option<PathBuf>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let args = Args::parse();
    let overrides = Overrides {
        mode: args.mode,
        algorithms: args.algorithms,
        seed: args.seed,
        out: args.out,
    };
    match execute(&args.config, args.grid.as_ref(), &overrides) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            log::error!("{e}");
            if let CliError::Core(seqgan_core::Error::Diverged {
                last_good_checkpoint: Some(p),
                ..
            }) = &e
            {
                log::error!("last good checkpoint: {p}");
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn execute(cfg_path: &Option<PathBuf>, grid: Option<&PathBuf>, overrides: &Overrides) -> Result<(), CliError> {
    let configs = match grid {
        Some(g) => config::load_grid(cfg_path.as_deref(), g, overrides)?,
        None => vec![config::load(cfg_path.as_deref(), overrides)?],
    };
    for cfg in &configs {
        log::info!("run {} (seed {})", cfg.out.display(), cfg.seed);
        run(cfg)?;
    }
    Ok(())
}

//! `finsurr` command-line front end.
//!
//! Every subcommand takes its settings from an optional JSON config file
//! (`--config`), overridden by flags, and writes its artifacts plus a
//! `manifest.json` into `--out`. A manifest can be passed back as `--config`
//! to repeat the run exactly.
//!
//! Exit codes: 0 success, 1 internal failure, 2 usage or unreadable input,
//! 3 invalid input data or a failed check.

mod commands;
mod context;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::Serialize;

use commands::compare::{CompareArgs, CompareConfig};
use commands::eval::{EvalArgs, EvalConfig};
use commands::featurize::{FeaturizeArgs, FeaturizeConfig};
use commands::fit_pca::{FitPcaArgs, FitPcaConfig};
use commands::gen_data::{GenDataArgs, GenDataConfig};
use commands::gen_test::{GenTestArgs, GenTestConfig};
use commands::noise::{NoiseArgs, NoiseCmdConfig};
use commands::train::{TrainArgs, TrainConfig};
use context::{load_config, CliResult, Failure, Run};

#[derive(Debug, Parser)]
#[command(
    name = "finsurr",
    version,
    about = "Fin-shape parameterization and surrogate thrust prediction"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Global {
    /// JSON config for the subcommand, or a manifest of an earlier run.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed; every random stream is derived from it.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, default_value = "finsurr-out")]
    out: PathBuf,
    /// Maximum worker threads.
    #[arg(long, global = true)]
    jobs: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    Featurize(FeaturizeArgs),
    GenData(GenDataArgs),
    FitPca(FitPcaArgs),
    Train(TrainArgs),
    Eval(EvalArgs),
    GenTest(GenTestArgs),
    Compare(CompareArgs),
    Noise(NoiseArgs),
}

/// Loads the config, applies flag overrides, runs `body` and writes the
/// manifest. A failed check still leaves its artifacts and manifest behind.
fn execute<C, F, B>(global: &Global, name: &'static str, apply: F, body: B) -> CliResult<()>
where
    C: DeserializeOwned + Default + Serialize,
    F: FnOnce(&mut C),
    B: FnOnce(&C, &mut Run) -> CliResult<()>,
{
    let (mut config, file_seed) = load_config::<C>(global.config.as_deref(), name)?;
    apply(&mut config);
    let seed = global.seed.or(file_seed).unwrap_or(0);
    let mut run = Run::new(name, seed, &global.out)?;
    log::info!("{name}: seed {seed}, output {}", global.out.display());
    let result = body(&config, &mut run);
    match result {
        Ok(()) => run.finish(&config),
        Err(Failure::Check(msg)) => {
            run.finish(&config)?;
            Err(Failure::Check(msg))
        }
        Err(e) => Err(e),
    }
}

fn dispatch(cli: Cli) -> CliResult<()> {
    let g = &cli.global;
    if let Some(n) = g.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global()
            .map_err(|e| context::config_error(format!("cannot size the worker pool: {e}")))?;
    }
    match cli.command {
        Command::Featurize(a) => execute::<FeaturizeConfig, _, _>(
            g,
            "featurize",
            |c| a.apply(c),
            commands::featurize::run,
        ),
        Command::GenData(a) => {
            execute::<GenDataConfig, _, _>(g, "gen-data", |c| a.apply(c), commands::gen_data::run)
        }
        Command::FitPca(a) => {
            execute::<FitPcaConfig, _, _>(g, "fit-pca", |c| a.apply(c), commands::fit_pca::run)
        }
        Command::Train(a) => {
            execute::<TrainConfig, _, _>(g, "train", |c| a.apply(c), commands::train::run)
        }
        Command::Eval(a) => {
            execute::<EvalConfig, _, _>(g, "eval", |c| a.apply(c), commands::eval::run)
        }
        Command::GenTest(a) => {
            execute::<GenTestConfig, _, _>(g, "gen-test", |c| a.apply(c), commands::gen_test::run)
        }
        Command::Compare(a) => {
            execute::<CompareConfig, _, _>(g, "compare", |c| a.apply(c), commands::compare::run)
        }
        Command::Noise(a) => {
            execute::<NoiseCmdConfig, _, _>(g, "noise", |c| a.apply(c), commands::noise::run)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

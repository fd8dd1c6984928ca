//! `eigshrink` command-line front end.
//!
//! Exit codes: 0 success, 2 configuration error, 3 runtime failure.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use eigshrink::harness::output::{self, RHO_SWEEP_COLUMNS, SNR_SWEEP_COLUMNS};
use eigshrink::harness::{
    planned_evaluations, run_eig_bias, run_rho_sweep, run_snr_sweep, Manifest, RunOptions, ScenarioConfig,
};
use eigshrink::{BetaCache, Error};

const BETA_CACHE_ENV: &str = "EIGSHRINK_BETA_CACHE";
const DEFAULT_BETA_CACHE: &str = ".beta_cache";

#[derive(Parser, Debug)]
#[command(name = "eigshrink", version = env!("EIGSHRINK_VERSION"), about = "Minimum-eigenvalue covariance shrinkage experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Mean extreme eigenvalues of white sample covariances.
    EigBias(Common),
    /// Mutual information versus a fixed shrinkage weight.
    RhoSweep(Common),
    /// Mutual information versus SNR for each estimator.
    SnrSweep(Common),
    /// Calibrate and cache the small-sample eigenvalue scale.
    CalibrateBeta(Common),
}

#[derive(Args, Debug)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    /// Overrides the config seed; recorded in the manifest.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value = "results")]
    out: PathBuf,
    /// Worker threads (0 = one per core).
    #[arg(long, default_value_t = 0)]
    workers: usize,
    /// Validate and print the planned work without running.
    #[arg(long)]
    dry_run: bool,
}

enum Failure {
    Config(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::ConfigInvalid(_) => Failure::Config(e.to_string()),
            other => Failure::Runtime(other.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}

fn beta_cache_path() -> PathBuf {
    std::env::var_os(BETA_CACHE_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(DEFAULT_BETA_CACHE))
}

fn run(command: Command) -> Result<(), Failure> {
    let (name, args) = match &command {
        Command::EigBias(a) => ("eig-bias", a),
        Command::RhoSweep(a) => ("rho-sweep", a),
        Command::SnrSweep(a) => ("snr-sweep", a),
        Command::CalibrateBeta(a) => ("calibrate-beta", a),
    };
    if !args.config.is_file() {
        return Err(Failure::Config(format!(
            "config file not found: {}",
            args.config.display()
        )));
    }
    let mut cfg = ScenarioConfig::load(&args.config)?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }

    if args.dry_run {
        let evals = planned_evaluations(&cfg, name)?;
        println!(
            "{name}: scenario {} valid; {} trials, {} planned evaluations",
            cfg.scenario_id, cfg.trials, evals
        );
        return Ok(());
    }

    let opts = RunOptions {
        workers: args.workers,
        beta_cache: Some(beta_cache_path()),
    };
    let id = cfg.scenario_id.clone();
    let written = match command {
        Command::EigBias(_) => {
            let rows = run_eig_bias(cfg.n_r, &cfg.m_samples, cfg.trials, cfg.seed, opts.workers)?;
            vec![output::write_table(
                &args.out,
                &id,
                name,
                &output::eig_bias_table(&id, &rows),
            )?]
        }
        Command::RhoSweep(_) => {
            let sweep = run_rho_sweep(&cfg, &opts)?;
            write_sweep(&args.out, &cfg, name, &sweep, &RHO_SWEEP_COLUMNS)?
        }
        Command::SnrSweep(_) => {
            let sweep = run_snr_sweep(&cfg, &opts)?;
            write_sweep(&args.out, &cfg, name, &sweep, &SNR_SWEEP_COLUMNS)?
        }
        Command::CalibrateBeta(_) => {
            let mut cache = BetaCache::open(beta_cache_path())?;
            let rows = cfg
                .m_samples
                .iter()
                .map(|&m| cache.get_or_calibrate(cfg.n_r, m, cfg.beta_trials, cfg.seed))
                .collect::<Result<Vec<_>, _>>()?;
            vec![output::write_table(
                &args.out,
                &id,
                name,
                &output::beta_table(&id, &rows),
            )?]
        }
    };

    let manifest = Manifest {
        subcommand: name.to_string(),
        version: env!("EIGSHRINK_VERSION").to_string(),
        seed: cfg.seed,
        seed_override: args.seed.is_some(),
        workers: args.workers,
        config_path: args.config.display().to_string(),
        config_echo: cfg.to_toml_string(),
    };
    manifest.write(&args.out, &id)?;
    for path in written {
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn write_sweep(
    out: &Path,
    cfg: &ScenarioConfig,
    name: &str,
    sweep: &eigshrink::harness::SweepOutput,
    columns: &[&str],
) -> Result<Vec<PathBuf>, Failure> {
    let id = &cfg.scenario_id;
    let summary = output::write_table(out, id, name, &output::mi_table(&sweep.results, columns))?;
    let trials = output::write_table(
        out,
        id,
        &format!("{name}_trials"),
        &output::trial_table(id, cfg.seed, &sweep.trials),
    )?;
    Ok(vec![summary, trials])
}

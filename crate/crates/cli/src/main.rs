use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use frl_cli::{commands, exit, exit_code, Overrides, RunConfig, UsageError, VERSION};

/// Fairness-relevant-loss experiments on discrete Bayesian network
/// classifiers.
#[derive(Parser)]
#[command(name = "frl", version = VERSION)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Discretise a raw CSV and assign stratified folds.
    Discretise(Common),
    /// Cross-validated experiment: learn, score FRL, summarise.
    Run(Common),
    /// Time the ratio field against brute force as private features grow.
    OracleSweep(Common),
    /// Summarise a per-instance CSV written by `run`.
    Summarise {
        records: PathBuf,
        /// Number of positive-FRL decile bins.
        #[arg(long, default_value_t = 10)]
        deciles: usize,
        #[arg(long, default_value_t = 10)]
        brier_bins: usize,
    },
}

#[derive(Args)]
struct Common {
    /// TOML configuration; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    folds: Option<usize>,
    /// Equivalent sample size of the smoothing prior.
    #[arg(long)]
    ess: Option<f64>,
    /// Quantile bins for continuous columns.
    #[arg(long)]
    bins: Option<usize>,
    /// Positive-FRL decile bins in the summary.
    #[arg(long)]
    deciles: Option<usize>,
    /// Worker threads (1 runs sequentially).
    #[arg(long)]
    jobs: Option<usize>,
    /// Force an arc from the target to every feature.
    #[arg(long)]
    force_target_arcs: bool,
    /// Check every instance against brute force.
    #[arg(long)]
    oracle: bool,
    /// Record wall-clock timings (output is then not reproducible).
    #[arg(long)]
    timings: bool,
}

impl Common {
    fn resolve(&self) -> anyhow::Result<RunConfig> {
        let mut config = match &self.config {
            Some(p) => RunConfig::from_file(p)?,
            None => RunConfig::default(),
        };
        config.apply(&Overrides {
            input: self.input.clone(),
            out: self.out.clone(),
            seed: self.seed,
            folds: self.folds,
            ess: self.ess,
            bins: self.bins,
            jobs: self.jobs,
            deciles: self.deciles,
            force_target_arcs: self.force_target_arcs,
            oracle: self.oracle,
            timings: self.timings,
        });
        if let Some(n) = config.jobs {
            if n == 0 {
                return Err(UsageError("--jobs must be positive".into()).into());
            }
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()?;
        }
        Ok(config)
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Discretise(c) => {
            c.resolve()
                .and_then(|cfg| commands::discretise(&cfg))
                .map(|dir| {
                    println!("{}", dir.display());
                })
        }
        Command::Run(c) => c.resolve().and_then(|cfg| commands::run(&cfg)).map(|out| {
            println!("{}", out.dir.display());
        }),
        Command::OracleSweep(c) => c
            .resolve()
            .and_then(|cfg| commands::sweep(&cfg))
            .map(|dir| {
                println!("{}", dir.display());
            }),
        Command::Summarise {
            records,
            deciles,
            brier_bins,
        } => commands::summarise(&records, deciles, brier_bins).map(|text| print!("{text}")),
    };
    match result {
        Ok(()) => ExitCode::from(exit::OK),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use hnbss::eval::GroupMode;

mod commands;
mod config;
mod error;
mod ingest;

use config::{BaselineKind, RunConfig, SeasonalConfig};
use error::Result;

#[derive(Debug, Parser)]
#[command(
    name = "hnbss",
    version,
    about = "Hierarchical negative-binomial state-space forecasting for count series"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Long-format CSV: series_id, period, value, covariates...
    #[arg(long, global = true)]
    input: Option<PathBuf>,
    /// TOML run configuration; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    output_dir: Option<PathBuf>,
    /// Trailing periods to forecast.
    #[arg(long, global = true)]
    horizon: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, value_enum)]
    group_mode: Option<ModeArg>,
    /// Comma-separated baselines to evaluate.
    #[arg(long, global = true, value_enum, value_delimiter = ',')]
    baselines: Option<Vec<BaselineKind>>,
    /// Adds seasonal covariate columns with this period.
    #[arg(long, global = true)]
    seasonal_period: Option<usize>,
    #[arg(long, global = true)]
    workers: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fit the model and write posterior summaries.
    Fit,
    /// Fit and write predictive distributions for the horizon.
    Forecast,
    /// Rolling-origin evaluation against the baselines.
    Evaluate,
    /// Draw a synthetic group from the generative model.
    Simulate,
    /// Demand summaries and classification.
    Stats,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    Hierarchical,
    Independent,
}

impl Cli {
    fn run_config(&self) -> Result<RunConfig> {
        let mut c = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        if let Some(v) = &self.input {
            c.input = Some(v.clone());
        }
        if let Some(v) = &self.output_dir {
            c.output_dir = v.clone();
        }
        if let Some(v) = self.horizon {
            c.horizon = v;
        }
        if let Some(v) = self.seed {
            c.seed = v;
        }
        if let Some(v) = self.group_mode {
            c.group_mode = match v {
                ModeArg::Hierarchical => GroupMode::Hierarchical,
                ModeArg::Independent => GroupMode::Independent,
            };
        }
        if let Some(v) = &self.baselines {
            c.baselines.enabled = v.clone();
        }
        if let Some(period) = self.seasonal_period {
            let encoding = c
                .seasonal
                .map_or(SeasonalConfig::default_encoding(), |s| s.encoding);
            c.seasonal = Some(SeasonalConfig { period, encoding });
        }
        if let Some(v) = self.workers {
            c.workers = v;
        }
        c.validate()?;
        Ok(c)
    }
}

fn run(cli: &Cli) -> Result<()> {
    let config = cli.run_config()?;
    commands::write_config(&config)?;
    match cli.command {
        Command::Fit => commands::run_fit(&config),
        Command::Forecast => commands::run_forecast(&config),
        Command::Evaluate => commands::run_evaluate(&config),
        Command::Simulate => commands::run_simulate(&config),
        Command::Stats => commands::run_stats(&config),
    }
}

fn report(kind: &str, message: &str) {
    let line = message.split_whitespace().collect::<Vec<_>>().join(" ");
    eprintln!("error: kind={kind} message={line}");
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let text = e.to_string();
            let first = text
                .lines()
                .next()
                .unwrap_or_default()
                .trim_start_matches("error: ");
            report("usage", first);
            return ExitCode::from(2);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            report(e.kind(), &e.to_string());
            ExitCode::FAILURE
        }
    }
}

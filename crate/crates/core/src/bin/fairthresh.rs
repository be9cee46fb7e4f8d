use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use fairthresh::cli::{
    self, config::parse_criteria, CliError, CommandOutput, Format, ProblemConfig, RunOptions, EXIT_OK,
    EXIT_VERIFY_FAILED,
};

#[derive(Parser)]
#[command(
    name = "fairthresh",
    version,
    about = "Fairness-constrained threshold policies and their effect on group scores"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Optimal policies, special rates, regimes and checks per criterion.
    Solve(Common),
    /// Outcome and utility curves with criterion-rate markers.
    Curve(Common),
    /// Solve across a parameter grid from the [sweep] section.
    Sweep(Common),
    /// Brute-force and property checks; exit code 1 on any failure.
    Verify {
        #[command(flatten)]
        common: Common,
        /// Allowed shortfall of the analytic objective below the oracle's.
        #[arg(long, allow_hyphen_values = true)]
        tolerance: Option<f64>,
    },
    /// Validate a score,group,pmf,repay_prob CSV and echo it normalized.
    IngestCheck {
        /// CSV to check; defaults to the config's [data] csv.
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = OutFormat::Text)]
        format: OutFormat,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    /// Directory for CSV outputs (overrides [output] dir).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Comma-separated criteria overriding the config list.
    #[arg(long, value_delimiter = ',')]
    criterion: Vec<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum, default_value_t = OutFormat::Text)]
    format: OutFormat,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutFormat {
    Text,
    Csv,
}

impl From<OutFormat> for Format {
    fn from(f: OutFormat) -> Self {
        match f {
            OutFormat::Text => Format::Text,
            OutFormat::Csv => Format::Csv,
        }
    }
}

type Runner = fn(&ProblemConfig, &RunOptions) -> Result<CommandOutput, CliError>;

fn run_common(common: &Common, runner: Runner, tolerance: Option<f64>) -> Result<u8, CliError> {
    let cfg = ProblemConfig::load(&common.config)?;
    let criteria = if common.criterion.is_empty() { None } else { Some(parse_criteria(&common.criterion)?) };
    let opts = RunOptions { criteria, seed: common.seed, tolerance };
    let out = runner(&cfg, &opts)?;
    emit(&out, common.out.clone().or_else(|| cfg.output_dir()), common.format.into())
}

fn emit(out: &CommandOutput, dir: Option<PathBuf>, format: Format) -> Result<u8, CliError> {
    if let Some(dir) = dir {
        cli::write_outputs(&dir, out)?;
    }
    print!("{}", out.stdout(format));
    Ok(if out.failed { EXIT_VERIFY_FAILED } else { EXIT_OK })
}

fn run(cli: Cli) -> Result<u8, CliError> {
    match cli.command {
        Command::Solve(c) => run_common(&c, cli::run_solve, None),
        Command::Curve(c) => run_common(&c, cli::run_curve, None),
        Command::Sweep(c) => run_common(&c, cli::run_sweep, None),
        Command::Verify { common, tolerance } => run_common(&common, cli::run_verify, tolerance),
        Command::IngestCheck { csv, config, out, format } => {
            let path = match (csv, config) {
                (Some(p), _) => p,
                (None, Some(c)) => {
                    let cfg = ProblemConfig::load(&c)?;
                    let data = cfg.data.as_ref().ok_or_else(|| CliError::Config("config has no [data] csv".into()))?;
                    if data.csv.is_absolute() {
                        data.csv.clone()
                    } else {
                        cfg.base_dir.join(&data.csv)
                    }
                }
                (None, None) => return Err(CliError::Config("ingest-check needs --csv or --config".into())),
            };
            let result = cli::run_ingest_check(&path)?;
            emit(&result, out, format.into())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

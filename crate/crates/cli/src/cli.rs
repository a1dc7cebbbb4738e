use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::commands::{cmd_audit, cmd_plot, cmd_simulate, cmd_space, CommandOutput};
use crate::{style, CliError, EXIT_OK};

#[derive(Debug, Parser)]
#[command(name = "metaudit", version, about = "Audit the reliability of a meta-analysis and its base studies")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute per-study analysis search spaces and their summary.
    Space(SpaceArgs),
    /// Convert effects to p-values and run the p-value plot diagnostics.
    Audit(AuditArgs),
    /// Render the p-value plot as SVG.
    Plot(PlotArgs),
    /// Simulate an analyst reporting selected results from many tests.
    Simulate(SimulateArgs),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    #[default]
    Md,
}

#[derive(Debug, Clone, Args)]
pub struct SpaceArgs {
    /// Counts CSV: study_id,outcomes,predictors,lags,covariates[,covariate_names]
    #[arg(long)]
    pub input: PathBuf,
    /// Output directory for spaces.csv and space_summary.json.
    #[arg(long)]
    pub output: PathBuf,
    /// What to print on stdout.
    #[arg(long, value_enum, default_value_t = Format::Md)]
    pub format: Format,
}

#[derive(Debug, Clone, Args)]
pub struct AuditArgs {
    /// Effects CSV: study_id,label,ratio,ci_low,ci_high,level,ns
    #[arg(long)]
    pub input: PathBuf,
    /// Optional counts CSV; its median space 3 sets the Bonferroni divisor.
    #[arg(long)]
    pub counts: Option<PathBuf>,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    /// Output directory for report.json, plot.csv and report.md.
    #[arg(long)]
    pub output: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Md)]
    pub format: Format,
}

#[derive(Debug, Clone, Args)]
pub struct PlotArgs {
    /// Effects CSV.
    #[arg(long)]
    pub input: PathBuf,
    /// SVG file to write.
    #[arg(long)]
    pub output: PathBuf,
}

/// Flags override values from `--config`, which override the defaults.
#[derive(Debug, Clone, Default, Args)]
pub struct SimulateArgs {
    /// Flat `key = value` file with any of the settings below.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Studies in the simulated meta-analysis written to effects.csv [default: 14]
    #[arg(long)]
    pub n_studies: Option<usize>,
    /// Tests available per study [default: 1]
    #[arg(long)]
    pub k: Option<usize>,
    /// Equicorrelation among a study's tests, in [0, 1) [default: 0]
    #[arg(long, allow_negative_numbers = true)]
    pub correlation: Option<f64>,
    /// True effect as a mean shift on the z scale [default: 0]
    #[arg(long, allow_negative_numbers = true)]
    pub effect: Option<f64>,
    /// report-min-p | report-first-significant | report-random [default: report-min-p]
    #[arg(long)]
    pub selection: Option<String>,
    /// Publication screen [default: 0.05]
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    /// Publish only studies whose selected p is below alpha.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub censor: Option<bool>,
    /// Number of simulated studies [default: 1000]
    #[arg(long)]
    pub replicates: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Log-scale standard error used to express z as a ratio [default: 0.1]
    #[arg(long)]
    pub log_se: Option<f64>,
    /// Prefix for simulated study ids [default: sim]
    #[arg(long)]
    pub id_prefix: Option<String>,
    /// Output directory for simulation.csv, summary.json and effects.csv.
    #[arg(long)]
    pub output: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Md)]
    pub format: Format,
}

fn dispatch(command: &Command) -> Result<CommandOutput, CliError> {
    match command {
        Command::Space(args) => cmd_space(args),
        Command::Audit(args) => cmd_audit(args),
        Command::Plot(args) => cmd_plot(args),
        Command::Simulate(args) => cmd_simulate(args),
    }
}

/// Runs a parsed command, printing its summary or error. Returns the exit code.
pub fn run(cli: &Cli) -> i32 {
    match dispatch(&cli.command) {
        Ok(out) => {
            if style::enabled(&std::io::stdout()) {
                print!("{}", style::highlight_verdicts(&out.stdout));
            } else {
                print!("{}", out.stdout);
            }
            EXIT_OK
        }
        Err(e) => {
            let label = if style::enabled(&std::io::stderr()) {
                style::paint("error:", style::Tone::Bad)
            } else {
                "error:".to_owned()
            };
            eprintln!("{label} {e}");
            e.exit_code()
        }
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(&cli),
        Err(e) => {
            let _ = e.print();
            e.exit_code()
        }
    }
}

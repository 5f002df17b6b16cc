mod files;
mod run;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Data-driven truss analysis: solves for member states that satisfy
/// compatibility and equilibrium while staying as close as possible to a
/// measured stress-strain dataset, with no fitted material law in between.
#[derive(Parser)]
#[command(name = "ddtruss", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a single load case and write solution + phase-space files
    Analyze(AnalyzeArgs),
    /// Run a load-multiplier sweep and write table + path files
    Sweep(SweepArgs),
    /// Generate a synthetic material dataset CSV
    GenData(GenDataArgs),
}

#[derive(Args)]
struct ModelOpts {
    /// Truss model JSON file; omit for the builtin ten-bar benchmark
    #[arg(long)]
    model: Option<PathBuf>,

    /// Cross-section area for the builtin ten-bar members, m^2
    #[arg(long, default_value_t = 1e-3)]
    area: f64,

    /// Material dataset CSV with strain,stress rows
    #[arg(long)]
    data: PathBuf,

    /// Weighting constant c in Pa; default is the mean stress/strain
    /// ratio of the dataset
    #[arg(long)]
    weighting: Option<f64>,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum SolverKind {
    /// Alternating state-solve / nearest-point reassignment
    Heuristic,
    /// Branch-and-bound, globally optimal at gap tolerance zero
    Exact,
    /// Brute-force enumeration of every assignment
    Oracle,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Timing {
    /// Report measured wall-clock times
    Wall,
    /// Report zeros, making output files byte-stable across runs
    Off,
}

#[derive(Args)]
struct SolverOpts {
    #[arg(long, value_enum, default_value_t = SolverKind::Exact)]
    solver: SolverKind,

    /// Relative optimality gap at which the exact search stops
    #[arg(long, default_value_t = 0.0)]
    gap_tol: f64,

    /// Wall-clock limit per exact solve, seconds
    #[arg(long)]
    time_limit: Option<f64>,

    /// Node limit per exact solve
    #[arg(long, default_value_t = 10_000_000)]
    node_limit: u64,

    /// Iteration cap for the heuristic
    #[arg(long, default_value_t = 10_000)]
    heur_cap: usize,

    /// Bound node relaxations with the interval-confined dual instead of
    /// the plain free-member relaxation; tighter, a little costlier
    #[arg(long)]
    strong_bound: bool,

    /// Assignment count above which the oracle refuses to enumerate
    #[arg(long, default_value_t = 1_000_000)]
    enum_limit: u128,
}

#[derive(Args)]
struct OutputOpts {
    /// Directory receiving output files, created if missing
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,

    #[arg(long, value_enum, default_value_t = Timing::Wall)]
    timing: Timing,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    model: ModelOpts,

    /// Load multiplier
    #[arg(long, default_value_t = 1.0)]
    lambda: f64,

    #[command(flatten)]
    solver: SolverOpts,

    #[command(flatten)]
    output: OutputOpts,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    model: ModelOpts,

    /// Comma-separated load multipliers
    #[arg(long, default_value = "0,1,2,3,4,5,6,7,8,9,10,11")]
    lambda_list: String,

    #[command(flatten)]
    solver: SolverOpts,

    /// Index into the free displacement vector whose value is tracked in
    /// the path file; default is the last free DOF, which for the builtin
    /// ten-bar is the bottom-right node's vertical displacement
    #[arg(long)]
    monitor_dof: Option<usize>,

    #[command(flatten)]
    output: OutputOpts,
}

#[derive(Args)]
struct GenDataArgs {
    /// Generating curve: "linear:MODULUS" or "cubic:MODULUS,BETA"
    /// (sigma = E eps - beta eps^3), Pa
    #[arg(long)]
    curve: String,

    /// Number of data points
    #[arg(long, default_value_t = 300)]
    d: usize,

    /// Standard deviation of Gaussian stress noise, Pa
    #[arg(long, default_value_t = 0.0)]
    noise: f64,

    /// Sampled strain interval "LO,HI"
    #[arg(long, default_value = "-5e-3,5e-3")]
    strain_range: String,

    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Output CSV path
    #[arg(long, default_value = "dataset.csv")]
    out: PathBuf,
}

#[derive(Debug)]
enum CliError {
    Core(ddtruss::Error),
    Flag(String),
}

impl From<ddtruss::Error> for CliError {
    fn from(err: ddtruss::Error) -> Self {
        CliError::Core(err)
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Core(err) => err.fmt(f),
            CliError::Flag(message) => message.fmt(f),
        }
    }
}

/// 2 for anything wrong with inputs or flags, 4 for numerical failure
/// inside the solver. Solver limits (exit 3) are not errors and are
/// handled on the success path.
fn exit_code(err: &CliError) -> u8 {
    match err {
        CliError::Flag(_) => 2,
        CliError::Core(ddtruss::Error::NotPositiveDefinite) => 4,
        CliError::Core(_) => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Analyze(args) => run::analyze(&args),
        Command::Sweep(args) => run::sweep(&args),
        Command::GenData(args) => run::gen_data(&args),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}

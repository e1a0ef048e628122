mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Simulate, analyze and compile the two-party quantum gambling protocol.
#[derive(Parser, Debug)]
#[command(name = "qgamble", version, about, propagate_version = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Exact branch probabilities and Bob's expected gain for one strategy pair.
    Payoff {
        #[command(flatten)]
        alice: AliceArgs,
        #[command(flatten)]
        bob: BobArgs,
        #[command(flatten)]
        rules: RulesArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Monte Carlo play of many rounds (or one at a time with --interactive).
    Play {
        #[command(flatten)]
        alice: AliceArgs,
        #[command(flatten)]
        bob: BobArgs,
        #[command(flatten)]
        rules: RulesArgs,
        /// Number of rounds (upper bound in interactive mode).
        #[arg(long, default_value_t = 100_000)]
        rounds: u64,
        #[command(flatten)]
        seed: SeedArgs,
        #[command(flatten)]
        jobs: JobsArgs,
        /// Prompt before each round and print every outcome.
        #[arg(long)]
        interactive: bool,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Bob's guaranteed gain at prize R, or Alice's best response at a fixed angle.
    Optimize {
        #[command(flatten)]
        bob: BobArgs,
        #[command(flatten)]
        rules: RulesArgs,
        #[command(flatten)]
        search: SearchArgs,
        #[command(flatten)]
        jobs: JobsArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Equilibria over a list of prizes with a log-log fit of |G| against R.
    Sweep {
        /// Comma-separated prizes, each > 1.
        #[arg(long = "R", value_name = "R1,R2,...", value_delimiter = ',', default_value = "100,1000,10000")]
        r_values: Vec<f64>,
        #[command(flatten)]
        search: SearchArgs,
        #[command(flatten)]
        jobs: JobsArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Gate circuit for Bob's rotation (--theta/--s) or Alice's preparation.
    Decompose {
        #[command(flatten)]
        alice: AliceArgs,
        #[command(flatten)]
        bob: BobArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Two-level reduction and time evolution of a mesoscopic ring.
    Flux {
        /// Ring document: {"E": [...], "omega": [[...]], "hbar": 1}.
        #[arg(long, value_name = "FILE")]
        spec: PathBuf,
        /// Minimum gap-to-coupling ratio for the reduction.
        #[arg(long, default_value_t = qgamble_core::fluxmodel::DEFAULT_GAP_RATIO)]
        gap_ratio: f64,
        /// Comma-separated times at which to report the flip probability from |0⟩.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        t: Vec<f64>,
        #[command(flatten)]
        out: OutputArgs,
    },
}

#[derive(Args, Debug, Default)]
struct AliceArgs {
    /// Honest preparation (|01⟩ + |10⟩)/√2.
    #[arg(long, conflicts_with_all = ["eta", "strategies"])]
    honest: bool,
    /// Preparation √η|01⟩ + √(1−η)|10⟩.
    #[arg(long, conflicts_with = "strategies")]
    eta: Option<f64>,
    /// JSON strategy document; explicit flags take precedence over its fields.
    #[arg(long, value_name = "FILE")]
    strategies: Option<PathBuf>,
}

#[derive(Args, Debug, Default)]
struct BobArgs {
    /// Bob's rotation angle in radians, in [0, π/2].
    #[arg(long, allow_negative_numbers = true)]
    theta: Option<f64>,
    /// Sets θ = asin(√s).
    #[arg(long = "s", conflicts_with = "theta", allow_negative_numbers = true)]
    s: Option<f64>,
}

#[derive(Args, Debug, Default)]
struct RulesArgs {
    /// Prize paid to Bob when verification fails.
    #[arg(long = "R", allow_negative_numbers = true)]
    r: Option<f64>,
}

#[derive(Args, Debug)]
struct SeedArgs {
    #[arg(long, env = "QGAMBLE_SEED", default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Debug)]
struct JobsArgs {
    /// Worker threads (0 = all cores). Results do not depend on this.
    #[arg(long, default_value_t = 0)]
    jobs: usize,
}

#[derive(Args, Debug)]
struct SearchArgs {
    /// Local searches per best response (one starts from honest play).
    #[arg(long, default_value_t = 16)]
    starts: usize,
    /// Value tolerance of each local search.
    #[arg(long, default_value_t = 1e-9)]
    tolerance: f64,
}

#[derive(Args, Debug)]
struct OutputArgs {
    /// Output format (sweep defaults to csv, everything else to json).
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Write to FILE instead of standard output.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Text,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        // --help and --version exit 0, usage errors 2
        Err(e) => e.exit(),
    };
    match commands::run(cli.command) {
        Ok(status) => ExitCode::from(status.code()),
        Err(failure) => {
            eprintln!("qgamble: {failure}");
            ExitCode::from(failure.code())
        }
    }
}

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use ghostspin::config::Format;
use ghostspin::{run, Command, Overrides};

const GRID_HELP: &str = "Grid points are listed with x0 varying slowest and x3 fastest.";

#[derive(Parser)]
#[command(
    name = "ghostspin",
    version,
    about = "Dirac field checks, ghost spinor classification and two-slit intensity profiles",
    after_help = "Exit status: 0 success, 1 check failed, 2 usage or config error."
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Args)]
struct Common {
    /// Scenario file (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output file, or directory for interfere and sweep-shadows.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Data file format.
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Overrides the config's kappa = mc/hbar.
    #[arg(long)]
    kappa: Option<f64>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Largest Dirac residual |i gamma^k d_k psi - kappa psi| over the grid; fails above 1e-8.
    CheckDirac(Common),
    /// Structural and numeric ghost verdicts with diagnostics.
    Classify(Common),
    /// Energy-momentum tensor on the grid.
    #[command(after_help = format!(
        "Columns: x0,x1,x2,x3,T00,T01,T02,T03,T11,T12,T13,T22,T23,T33 (lower indices, \
         symmetric so only i <= k is written). {GRID_HELP}"
    ))]
    Tensor(Common),
    /// Dirac current on the grid.
    #[command(after_help = format!("Columns: x0,x1,x2,x3,j0,j1,j2,j3. {GRID_HELP}"))]
    Current(Common),
    /// Intensity profiles for the two-slit model or the ghost/real superposition.
    #[command(
        after_help = "Writes into the --out directory: real, shadow_<m> (m = 1..n), combined and \
         whichway profiles (columns x,value), or ghostreal (columns x3,value as x,value) in ghostreal \
         mode, plus report.json."
    )]
    Interfere {
        #[command(flatten)]
        common: Common,
        /// Number of shadow particles.
        #[arg(long)]
        n: Option<usize>,
    },
    /// Combined profiles for several shadow counts and a table of adjacent-maxima differences.
    #[command(
        after_help = "Writes combined_n<n> profiles (columns x,value), summary with columns \
         n,k,x_left,x_right,value_left,value_right,difference, and report.json into --out."
    )]
    SweepShadows {
        #[command(flatten)]
        common: Common,
        /// Comma-separated shadow counts, e.g. 0,1,4.
        #[arg(long, value_delimiter = ',')]
        n: Vec<usize>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, common, n) = match cli.command {
        Cmd::CheckDirac(c) => (Command::CheckDirac, c, Vec::new()),
        Cmd::Classify(c) => (Command::Classify, c, Vec::new()),
        Cmd::Tensor(c) => (Command::Tensor, c, Vec::new()),
        Cmd::Current(c) => (Command::Current, c, Vec::new()),
        Cmd::Interfere { common, n } => (Command::Interfere, common, n.into_iter().collect()),
        Cmd::SweepShadows { common, n } => (Command::SweepShadows, common, n),
    };
    let overrides = Overrides {
        kappa: common.kappa,
        n,
        out: common.out,
        format: common.format,
    };
    match run(command, &common.config, overrides) {
        Ok(outcome) => {
            match serde_json::to_string_pretty(&outcome.report) {
                Ok(text) => {
                    // a closed pipe (e.g. `| head`) is not an error for the run
                    let _ = writeln!(std::io::stdout().lock(), "{text}");
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(2);
                }
            }
            if outcome.passed {
                ExitCode::SUCCESS
            } else {
                eprintln!("check failed");
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

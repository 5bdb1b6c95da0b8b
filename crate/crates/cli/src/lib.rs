//! The `ssp` command line. [`run`] parses arguments, executes one subcommand
//! and reports an exit code, the artifacts it wrote and a one-line summary.
//!
//! Exit codes: 0 success, 1 validation failure (including a failed
//! `verify`), 2 value iteration did not converge, 3 bad parameters or an
//! infeasible request, 4 internal contract violation.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use ssp_core::SspError;

mod commands;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_NON_CONVERGENCE: i32 = 2;
pub const EXIT_PARAMETER: i32 = 3;
pub const EXIT_CONTRACT: i32 = 4;

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CommandResult {
    pub exit_code: i32,
    /// Files written, primary artifact first.
    pub artifacts: Vec<PathBuf>,
    pub summary: String,
    /// Primary artifact text when no `--out` path was given.
    pub stdout: Option<String>,
}

pub fn exit_code(err: &SspError) -> i32 {
    match err {
        SspError::Validation(_) => EXIT_VALIDATION,
        SspError::NonConvergence { .. } => EXIT_NON_CONVERGENCE,
        SspError::Contract(_) => EXIT_CONTRACT,
        SspError::Parameter(_)
        | SspError::Infeasible { .. }
        | SspError::UnknownState(_)
        | SspError::Generator { .. }
        | SspError::Io(_)
        | SspError::Json(_)
        | SspError::Csv(_) => EXIT_PARAMETER,
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "ssp",
    version,
    about = "Stochastic shortest path solver and fixed-point analysis"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Out {
    /// Where to write the primary artifact (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check a model file against the model invariants
    Validate {
        model: PathBuf,
        #[command(flatten)]
        out: Out,
    },
    /// Value iteration from a chosen starting function
    Solve {
        model: PathBuf,
        /// `zero`, `perturbed:<δ>` or `file:<path>`
        #[arg(long, default_value = "zero")]
        init: String,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[arg(long, default_value_t = 100_000)]
        max_sweeps: usize,
        /// Per-sweep convergence trace (CSV)
        #[arg(long)]
        trace: Option<PathBuf>,
        #[command(flatten)]
        out: Out,
    },
    /// Cost of a stationary policy
    Evaluate {
        model: PathBuf,
        #[arg(long)]
        policy: PathBuf,
        #[command(flatten)]
        out: Out,
    },
    /// Per-state properness of a stationary policy
    Classify {
        model: PathBuf,
        #[arg(long)]
        policy: PathBuf,
        #[command(flatten)]
        out: Out,
    },
    /// Solve the δ-perturbed problems and extrapolate δ → 0 (CSV)
    Sweep {
        model: PathBuf,
        /// Strictly decreasing, comma separated
        #[arg(
            long,
            value_delimiter = ',',
            default_value = "1,0.3,0.1,0.03,0.01,0.003,0.001"
        )]
        deltas: Vec<f64>,
        /// Full sweep result (JSON)
        #[arg(long)]
        json: Option<PathBuf>,
        #[command(flatten)]
        out: Out,
    },
    /// Check that a value function solves Bellman's equation
    Verify {
        model: PathBuf,
        #[arg(long)]
        values: PathBuf,
        #[arg(long, value_enum, default_value_t = Domain::All)]
        domain: Domain,
        #[arg(long, default_value_t = ssp_core::analysis::FIXED_POINT_TOL)]
        tol: f64,
        #[command(flatten)]
        out: Out,
    },
    /// Optimal cost J* against the proper-policy optimum Ĵ
    Gap {
        model: PathBuf,
        /// Extra value functions to verify and classify
        #[arg(long)]
        candidate: Vec<PathBuf>,
        /// Stage at which expected values must have vanished (decay check)
        #[arg(long, default_value_t = 50)]
        horizon: usize,
        #[command(flatten)]
        out: Out,
    },
    /// Merge the states with zero optimal cost into the termination state
    Lump {
        model: PathBuf,
        #[command(flatten)]
        out: Out,
    },
    /// Discounted problems for an increasing sequence of factors (CSV)
    Homotopy {
        model: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        alphas: Vec<f64>,
        #[command(flatten)]
        out: Out,
    },
    /// Seeded Monte Carlo rollouts of a policy
    Rollout {
        model: PathBuf,
        #[arg(long)]
        policy: PathBuf,
        /// State label
        #[arg(long)]
        start: String,
        #[arg(long, default_value_t = 10_000)]
        runs: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        horizon: usize,
        /// Also estimate `E{J(x_k)}` for this value function
        #[arg(long)]
        values: Option<PathBuf>,
        /// Exact and estimated `r_k` table (CSV)
        #[arg(long)]
        csv: Option<PathBuf>,
        #[command(flatten)]
        out: Out,
    },
    /// Write a reference instance as a model file
    Fixture {
        #[command(subcommand)]
        fixture: Fixture,
    },
}

#[derive(clap::ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Domain {
    All,
    /// The `interior` states listed in the model file
    Interior,
}

#[derive(Subcommand, Debug)]
enum Fixture {
    /// Two states; stop at cost 1 or stay for free
    Cycle(Out),
    /// Deterministic countdown `x → x − 1` at cost 1
    Countdown {
        #[arg(long, default_value_t = 10)]
        n: usize,
        #[command(flatten)]
        out: Out,
    },
    /// Stop at cost `u ∈ {1/m, …, 1}` or stay for free
    StoppingGrid {
        #[arg(long, default_value_t = 10)]
        m: usize,
        #[command(flatten)]
        out: Out,
    },
    /// Window of the multiplicative chain `x → x/α`
    Example1 {
        #[arg(long, default_value_t = 0.5)]
        alpha: f64,
        #[arg(long, default_value_t = 1.0)]
        x0: f64,
        #[arg(long, default_value_t = 30)]
        depth: usize,
        /// Also write `γ|x|` as a value file
        #[arg(long)]
        values_out: Option<PathBuf>,
        #[arg(long, default_value_t = 1.0)]
        gamma: f64,
        #[command(flatten)]
        out: Out,
    },
    /// A free hop to `t` behind a cost-1 hop
    LumpExample(Out),
    /// The cycle plus a state with no way out
    Trap(Out),
    /// Seeded random model
    Random {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// States besides `t`
        #[arg(long, default_value_t = 5)]
        states: usize,
        #[arg(long, default_value_t = 2)]
        controls: usize,
        #[arg(long, default_value_t = 3)]
        branches: usize,
        #[arg(long, default_value_t = 0.5)]
        p_exit: f64,
        #[arg(long, default_value_t = 2.0)]
        cost_max: f64,
        #[command(flatten)]
        out: Out,
    },
}

/// Collects artifacts as a command runs.
#[derive(Default)]
struct Artifacts {
    written: Vec<PathBuf>,
    stdout: Option<String>,
}

impl Artifacts {
    /// Writes the primary artifact to `path`, or keeps it for stdout.
    fn primary(&mut self, path: Option<&Path>, text: String) -> ssp_core::Result<()> {
        match path {
            Some(p) => self.extra(p, &text),
            None => {
                self.stdout = Some(text);
                Ok(())
            }
        }
    }

    fn extra(&mut self, path: &Path, text: &str) -> ssp_core::Result<()> {
        ssp_core::io::write_text(path, text)?;
        self.written.push(path.to_path_buf());
        Ok(())
    }
}

/// Parses `argv` (including the program name) and runs the subcommand.
pub fn run<I, T>(argv: I) -> CommandResult
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() {
                EXIT_PARAMETER
            } else {
                EXIT_OK
            };
            return CommandResult {
                exit_code: code,
                summary: e.render().to_string().trim_end().to_string(),
                ..Default::default()
            };
        }
    };
    let mut artifacts = Artifacts::default();
    let (exit_code, summary) = match commands::execute(cli.command, &mut artifacts) {
        Ok(outcome) => outcome,
        Err(e) => (exit_code(&e), format!("error: {e}")),
    };
    CommandResult {
        exit_code,
        artifacts: artifacts.written,
        summary,
        stdout: artifacts.stdout,
    }
}

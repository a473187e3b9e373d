//! Command-line front end for `posprod`: matrix files in, reports out.

pub mod commands;
pub mod error;
pub mod matrix_file;
pub mod regression;
pub mod report;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use posprod::DecomposeConfig;

pub use error::CliError;
pub use matrix_file::{parse_matrix, read_matrix, MatrixFile};
pub use report::{RunReport, Status};

/// Process exit codes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Exit {
    /// Decomposed, feasible, or every check passed.
    Success = 0,
    /// I/O, parse, or numerical error.
    Error = 1,
    /// Rejected, stalled, infeasible, or a failed check.
    Negative = 2,
}

impl Exit {
    pub fn code(self) -> u8 {
        self as u8
    }
}

#[derive(Debug, Parser)]
#[command(name = "posprod", version, about = "Factor a square matrix as a product of two positive semidefinite contractions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decide whether A = PQ and construct certified factors.
    Decompose(DecomposeArgs),
    /// Closed-form test for [[a, p], [0, b]].
    Bound2x2(Bound2x2Args),
    /// Check given factors P and Q of A.
    Verify(VerifyArgs),
    /// Run the embedded worked examples against their expected outcomes.
    PaperExamples(PaperExamplesArgs),
}

#[derive(Clone, Debug, Args)]
pub struct SolverFlags {
    /// Target for the feasibility error.
    #[arg(long, default_value_t = 1e-12)]
    pub tol_feas: f64,
    /// Eigenvalue tolerance (also used for PSD clipping).
    #[arg(long, default_value_t = 1e-10)]
    pub tol_eig: f64,
    #[arg(long, default_value_t = 100_000)]
    pub max_iter: usize,
    /// Iterations over which the error must change before a stall is declared.
    #[arg(long, default_value_t = 500)]
    pub stall_window: usize,
    #[arg(long, default_value_t = 1e-6)]
    pub stall_rel_change: f64,
}

impl SolverFlags {
    pub fn config(&self) -> DecomposeConfig<f64> {
        let mut config = DecomposeConfig::default();
        config.solver.feas_tol = self.tol_feas;
        config.solver.max_iter = self.max_iter;
        config.solver.stall_window = self.stall_window;
        config.solver.stall_rel_change = self.stall_rel_change;
        config.tol.eig_tol = self.tol_eig;
        config.tol.psd_tol = self.tol_eig;
        config
    }
}

#[derive(Debug, Args)]
pub struct DecomposeArgs {
    /// Matrix file (JSON or CSV).
    pub input: PathBuf,
    #[command(flatten)]
    pub solver: SolverFlags,
    /// Print the report as JSON.
    #[arg(long)]
    pub json: bool,
    /// Write the full feasibility error history as CSV.
    #[arg(long, value_name = "PATH")]
    pub trace: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct Bound2x2Args {
    pub a: f64,
    pub b: f64,
    #[arg(allow_hyphen_values = true)]
    pub p: f64,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    pub a: PathBuf,
    pub p: PathBuf,
    pub q: PathBuf,
    /// Also dilate P and Q to projections and check their product.
    #[arg(long)]
    pub cross_validate: bool,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct PaperExamplesArgs {
    #[command(flatten)]
    pub solver: SolverFlags,
    #[arg(long)]
    pub json: bool,
}

/// Runs a parsed command, writing the report to `out`.
pub fn run(cli: &Cli, out: &mut dyn std::io::Write) -> Result<Exit, CliError> {
    match &cli.command {
        Command::Decompose(args) => commands::decompose(args, out),
        Command::Bound2x2(args) => commands::bound2x2(args, out),
        Command::Verify(args) => commands::verify(args, out),
        Command::PaperExamples(args) => regression::paper_examples(args, out),
    }
}

/// Whether the command asked for JSON output.
pub fn wants_json(cli: &Cli) -> bool {
    match &cli.command {
        Command::Decompose(a) => a.json,
        Command::Verify(a) => a.json,
        Command::PaperExamples(a) => a.json,
        Command::Bound2x2(_) => true,
    }
}

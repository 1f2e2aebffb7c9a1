//! maclab: achievable-rate and capacity regions for state-dependent
//! multiple-access channels with strictly causal state information, plus
//! Monte Carlo validation of the Gaussian feedback scheme.
//!
//! Subcommands emit plot-ready CSV data (no plotting here); every output
//! directory gets a `manifest.json` making reruns verifiable. Exit codes:
//! 0 success, 1 assertion/property failure, 2 input error.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

mod commands;
mod error;
mod manifest;
mod output;
mod spec_file;

#[derive(Parser)]
#[command(name = "maclab", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Trace an achievable-rate region for a channel spec file.
    ///
    /// Emits bounds.csv (direction_index,subset_mask,bound_bits) and, for
    /// two users, boundary.csv (region,angle_deg,r1,r2); otherwise
    /// directions.csv (direction_index,w_k...,support_bits). With --trace,
    /// trace.csv (direction_index,restart,sweep,objective).
    Region(RegionArgs),
    /// Binary modulo-additive channel: capacity with vs without strictly
    /// causal state at encoder 1 (p1 = p2 = 1/3, ps = 1/4).
    ///
    /// Emits fig2_corners.csv (region,quantity,value_bits), fig2_bounds.csv
    /// (region,subset_mask,bound_bits), fig2_boundary.csv
    /// (region,angle_deg,r1,r2). Fails (exit 1) unless the no-state region
    /// is strictly contained in the with-state region.
    Fig2(Fig2Args),
    /// Gaussian channel comparison at P1 = P2 = 2, sigma^2 = 1: state at
    /// encoder 1 only, state plus output feedback, state at both encoders.
    ///
    /// Emits fig4_bounds.csv (region,subset_mask,bound_bits),
    /// fig4_feedback_polytopes.csv (rho,subset_mask,bound_bits),
    /// fig4_boundary.csv (region,angle_deg,r1,r2). Fails (exit 1) unless
    /// the three regions nest strictly.
    Fig4(Fig4Args),
    /// Certify the rate pair (1, 1/2) for the example channel with output
    /// (X1 xor T_{X2}, X2), and report the state-only search at R1 = 1.
    ///
    /// Emits example1.csv (quantity,value). Exit 0 iff membership holds.
    Example1(Example1Args),
    /// Monte Carlo simulation of the Gaussian feedback scheme.
    ///
    /// Emits feedback_mse.csv (use_index,predicted_mse,empirical_mse,stderr),
    /// feedback_gains.csv (use_index,gamma1,gamma2), feedback_power.csv
    /// (use_index,mean_power1,mean_power2), feedback_summary.csv
    /// (p_e2,r1_max,r2_max,alpha).
    Feedback(FeedbackArgs),
    /// Run the randomized invariant suites and print a pass/fail matrix.
    ///
    /// Emits check_report.csv (suite,cases,failures,worst,verdict). Exit 0
    /// iff all suites pass.
    Check(CheckArgs),
}

#[derive(Args)]
pub struct RegionArgs {
    /// Channel spec file (JSON).
    #[arg(long, value_name = "PATH")]
    pub spec: PathBuf,
    /// Region family: lapidoth|proposed|m-user|deterministic.
    #[arg(long)]
    pub kind: String,
    /// Test-channel alphabet sizes per user, comma separated
    /// (default |S_k|*|X_k|+1).
    #[arg(long = "aux-card", value_delimiter = ',')]
    pub aux_card: Option<Vec<usize>>,
    /// Local-ascent restarts per direction.
    #[arg(long, default_value_t = 4)]
    pub restarts: usize,
    /// Directions sampled on the quarter circle (or orthant).
    #[arg(long, default_value_t = 181)]
    pub directions: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Cap on coordinate sweeps per restart.
    #[arg(long = "max-sweeps", default_value_t = 200)]
    pub max_sweeps: usize,
    /// Keep a strict margin below the cost budgets instead of closure.
    #[arg(long = "strict-cost")]
    pub strict_cost: bool,
    /// Emit per-restart search traces.
    #[arg(long)]
    pub trace: bool,
    /// Output directory for CSV files and manifest; stdout when absent.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct Fig2Args {
    #[arg(long, default_value_t = 181)]
    pub directions: usize,
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct Fig4Args {
    #[arg(long, default_value_t = 181)]
    pub directions: usize,
    /// Grid size for the feedback correlation coefficient.
    #[arg(long = "rho-grid", default_value_t = 101)]
    pub rho_grid: usize,
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct Example1Args {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Restarts of the state-only search.
    #[arg(long, default_value_t = 2)]
    pub restarts: usize,
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct FeedbackArgs {
    #[arg(long, default_value_t = 2.0)]
    pub p1: f64,
    #[arg(long, default_value_t = 2.0)]
    pub p2: f64,
    /// State variance sigma_s^2.
    #[arg(long, default_value_t = 1.0)]
    pub sigma2: f64,
    /// Fraction of user 1's power spent on its own message.
    #[arg(long, default_value_t = 0.5)]
    pub alpha: f64,
    /// Channel uses after the initial message-point transmission.
    #[arg(long, default_value_t = 40)]
    pub uses: usize,
    /// Rate of user 2 in bits per use.
    #[arg(long, default_value_t = 0.5)]
    pub rate2: f64,
    #[arg(long, default_value_t = 10_000)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct CheckArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Random instances per randomized suite.
    #[arg(long, default_value_t = 200)]
    pub instances: usize,
    /// Tolerance on the sum-rate equality check.
    #[arg(long = "sum-tol", default_value_t = 1e-9)]
    pub sum_tol: f64,
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

fn init_thread_pool() {
    if let Ok(value) = std::env::var("MACLAB_THREADS") {
        match value.parse::<usize>() {
            Ok(n) if n >= 1 => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            _ => eprintln!("warning: ignoring invalid MACLAB_THREADS value `{value}`"),
        }
    }
}

fn main() {
    init_thread_pool();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Region(args) => commands::cmd_region(args),
        Command::Fig2(args) => commands::cmd_fig2(args),
        Command::Fig4(args) => commands::cmd_fig4(args),
        Command::Example1(args) => commands::cmd_example1(args),
        Command::Feedback(args) => commands::cmd_feedback(args),
        Command::Check(args) => commands::cmd_check(args),
    };
    if let Err(e) = result {
        eprintln!("{e}");
        std::process::exit(e.exit_code());
    }
}

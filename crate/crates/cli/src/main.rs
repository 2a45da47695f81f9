mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use config::GridSpec;

#[derive(Parser)]
#[command(
    name = "acclyap",
    version,
    about = "Lyapunov rate certificates for accelerated methods"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    opts: Opts,
}

#[derive(Subcommand)]
enum Command {
    /// Certified discrete rate and PSD baseline over a grid of b.
    RateCurve,
    /// Certified continuous rate over a grid of b̄, with baselines.
    RateCurveContinuous,
    /// Run the iteration and report the certificate along the way.
    Simulate,
    /// Integrate the damped oscillator and evaluate both Lyapunov candidates.
    Ode,
    /// Check that one ARK step equals one Nesterov step on random quadratics.
    ArkCheck,
    /// Assemble and check a single certificate.
    Certify,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum ObjectiveKind {
    Fun1,
    Quadratic,
}

#[derive(Args, Default)]
pub struct Opts {
    #[arg(long, global = true)]
    pub m: Option<f64>,
    #[arg(long = "L", global = true)]
    pub l: Option<f64>,
    #[arg(long, global = true)]
    pub kappa: Option<f64>,
    #[arg(long, global = true)]
    pub b: Option<f64>,
    /// MIN:MAX:N
    #[arg(long, global = true)]
    pub b_grid: Option<GridSpec>,
    #[arg(long, global = true)]
    pub delta: Option<f64>,
    #[arg(long, global = true)]
    pub alpha: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub gamma: Option<f64>,
    #[arg(long, global = true)]
    pub r: Option<f64>,
    #[arg(long, global = true)]
    pub steps: Option<usize>,
    #[arg(long, global = true)]
    pub t_end: Option<f64>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    #[arg(long, global = true, value_enum)]
    pub objective: Option<ObjectiveKind>,
    /// Initial point, broadcast to every coordinate.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub x0: Option<f64>,
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub perturb_beta: Option<f64>,
    #[arg(long, global = true)]
    pub h_ref: Option<f64>,
    #[arg(long, global = true)]
    pub every: Option<f64>,
    /// Certify the ODE instead of the iteration.
    #[arg(long, global = true)]
    pub continuous: bool,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let usage = e.use_stderr();
            let _ = e.print();
            return ExitCode::from(if usage { 2 } else { 0 });
        }
    };
    let res = match cli.command {
        Command::RateCurve => commands::rate_curve(&cli.opts),
        Command::RateCurveContinuous => commands::rate_curve_continuous(&cli.opts),
        Command::Simulate => commands::simulate(&cli.opts),
        Command::Ode => commands::ode(&cli.opts),
        Command::ArkCheck => commands::ark_check(&cli.opts),
        Command::Certify => commands::certify(&cli.opts),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("acclyap: {e}");
            e.exit_code()
        }
    }
}

//! Command-line front end for single-photon triggered state transfer.
//!
//! Exit codes: 0 success, 1 invalid input, 2 numeric failure,
//! 3 infeasible matching or a failed check.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use qtransfer::params::ScenarioKind;
use qtransfer::pulses::PulseKind;

use commands::CheckFailed;

#[derive(Parser)]
#[command(
    name = "qtransfer",
    version,
    about = "Photon-triggered s -> f transfer: efficiencies, dynamics and sweeps"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Scenario and rates, in units of a common reference rate.
#[derive(Args, Debug, Clone)]
pub struct ScenarioArgs {
    /// cavity, waveguide (or free-space)
    #[arg(long, default_value = "cavity")]
    pub scenario: ScenarioKind,
    /// Vacuum Rabi frequency of e <-> s
    #[arg(long)]
    pub g_es: Option<f64>,
    /// Vacuum Rabi frequency of e <-> f
    #[arg(long)]
    pub g_ef: Option<f64>,
    /// Loss rate of the input cavity mode
    #[arg(long)]
    pub kappa_es: Option<f64>,
    /// Loss rate of the output cavity mode
    #[arg(long)]
    pub kappa_ef: Option<f64>,
    /// Background decay e -> s
    #[arg(long)]
    pub gamma_es: Option<f64>,
    /// Background decay e -> f
    #[arg(long)]
    pub gamma_ef: Option<f64>,
    /// Decay e -> other levels
    #[arg(long)]
    pub gamma_eo: Option<f64>,
    /// Emission e -> s into the guided mode
    #[arg(long = "Gamma-es")]
    pub guided_es: Option<f64>,
    /// Emission e -> f into the guided mode
    #[arg(long = "Gamma-ef")]
    pub guided_ef: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form transfer efficiency and the conditions for unit efficiency
    Efficiency {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Required margin for the strong-coupling condition
        #[arg(long, default_value_t = qtransfer::analytics::DEFAULT_STRENGTH_FACTOR)]
        factor: f64,
        /// Relative tolerance of the matching condition
        #[arg(long, default_value_t = qtransfer::analytics::DEFAULT_MATCHING_TOL)]
        matching_tol: f64,
    },
    /// Integrate one photon arrival and write the trajectory as CSV
    Simulate {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[arg(long, default_value = "gaussian")]
        envelope: PulseKind,
        /// Bandwidth of an analytic envelope
        #[arg(long, default_value_t = 0.1)]
        delta_omega: f64,
        /// Tabulated envelope: CSV of t,re[,im]
        #[arg(long)]
        input: Option<PathBuf>,
        /// Integration step (default: coarsest allowed)
        #[arg(long)]
        step: Option<f64>,
        /// Keep every n-th point
        #[arg(long, default_value_t = 1)]
        stride: usize,
        /// Trajectory CSV (default: standard output)
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Sweep the photon bandwidth as described by a config file
    Sweep {
        #[arg(long, short)]
        config: PathBuf,
        /// CSV path, overriding the config file
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Solve the matching condition for one free parameter
    Match {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Parameter to solve for, e.g. g-ef or Gamma-es
        #[arg(long)]
        free: String,
    },
    /// Check the conditions for a polarisation-insensitive memory
    MemoryCheck {
        #[arg(long, default_value = "cavity")]
        scenario: ScenarioKind,
        /// sigma+ branch rates, e.g. g-es=1,g-ef=1,kappa-es=1,kappa-ef=1
        #[arg(long)]
        plus: String,
        /// sigma- branch rates
        #[arg(long)]
        minus: String,
        #[arg(long, default_value_t = qtransfer::applications::DEFAULT_MEMORY_REL_TOL)]
        rel_tol: f64,
    },
    /// Check the conditions for a deterministic frequency converter
    ConvertCheck {
        #[arg(long, default_value = "cavity")]
        scenario: ScenarioKind,
        /// Branch rates, g=..,kappa=..,gamma=.. (cavity) or Gamma=..,gamma=.. (waveguide)
        #[arg(long)]
        high_plus: String,
        #[arg(long)]
        high_minus: String,
        #[arg(long)]
        low_plus: String,
        #[arg(long)]
        low_minus: String,
        #[arg(long, default_value_t = qtransfer::applications::DEFAULT_CONVERTER_FACTOR)]
        factor: f64,
    },
    /// Rates the photon bandwidth must stay below
    Thresholds {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Also report bandwidth / threshold for this bandwidth
        #[arg(long)]
        delta_omega: Option<f64>,
    },
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Efficiency {
            scenario,
            factor,
            matching_tol,
        } => commands::efficiency(&scenario, factor, matching_tol),
        Command::Simulate {
            scenario,
            envelope,
            delta_omega,
            input,
            step,
            stride,
            output,
        } => commands::simulate(&commands::SimulateArgs {
            scenario,
            envelope,
            delta_omega,
            input,
            step,
            stride,
            output,
        }),
        Command::Sweep { config, output } => commands::sweep(&config, output.as_deref()),
        Command::Match { scenario, free } => commands::solve(&scenario, &free),
        Command::MemoryCheck {
            scenario,
            plus,
            minus,
            rel_tol,
        } => commands::memory(scenario, &plus, &minus, rel_tol),
        Command::ConvertCheck {
            scenario,
            high_plus,
            high_minus,
            low_plus,
            low_minus,
            factor,
        } => commands::convert(
            scenario,
            [&high_plus, &high_minus, &low_plus, &low_minus],
            factor,
        ),
        Command::Thresholds {
            scenario,
            delta_omega,
        } => commands::thresholds(&scenario, delta_omega),
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<CheckFailed>().is_some() {
        return 3;
    }
    match err.downcast_ref::<qtransfer::Error>().map(|e| e.root()) {
        Some(qtransfer::Error::NumericFailure(_)) => 2,
        Some(qtransfer::Error::InfeasibleMatching { .. }) => 3,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

//! `fracspde`: command-line access to the special functions, kernels,
//! renewal blow-up times, the Monte-Carlo simulator and the acceptance suite.
//!
//! Exit codes: 0 success, 1 verification failure, 2 invalid arguments or
//! configuration, 3 numerical-tolerance failure, 4 covariance factorization
//! failure.

mod output;
mod renewal;
mod run;
mod tables;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "fracspde", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Mittag-Leffler function E_β(x)
    Ml(tables::MlArgs),
    /// density of the β-stable subordinator at time 1
    Gbeta(tables::GbetaArgs),
    /// density of the inverse subordinator E_t
    Fet(tables::FetArgs),
    /// isotropic α-stable density
    Stable(tables::StableArgs),
    /// fractional kernel G_t(x)
    Green(tables::GreenArgs),
    /// C* and ‖G_t‖²
    L2norm(tables::L2Args),
    /// kernel against its calibrated two-sided bounds
    Bounds(tables::BoundsArgs),
    /// renewal blow-up times, formula against the Volterra solver
    Renewal(renewal::RenewalArgs),
    /// Monte-Carlo run from a configuration or run record
    Simulate(run::SimArgs),
    /// noiseless run from a configuration or run record
    SimulateDet(run::SimArgs),
    /// acceptance suite
    Verify(run::VerifyArgs),
}

#[derive(Debug)]
pub enum Failure {
    Lib(fracspde::Error),
    Usage(String),
    Io(std::io::Error),
    Verify,
}

impl From<fracspde::Error> for Failure {
    fn from(e: fracspde::Error) -> Self {
        Failure::Lib(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e)
    }
}

impl Failure {
    fn code(&self) -> u8 {
        use fracspde::Error;
        match self {
            Failure::Verify => 1,
            Failure::Usage(_) => 2,
            Failure::Io(_) => 1,
            Failure::Lib(Error::Covariance(_)) => 4,
            Failure::Lib(e) if e.is_numerical() => 3,
            Failure::Lib(Error::Io(_) | Error::Csv(_)) => 1,
            Failure::Lib(_) => 2,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Ml(a) => tables::ml(a),
        Command::Gbeta(a) => tables::gbeta(a),
        Command::Fet(a) => tables::fet(a),
        Command::Stable(a) => tables::stable(a),
        Command::Green(a) => tables::green(a),
        Command::L2norm(a) => tables::l2norm(a),
        Command::Bounds(a) => tables::bounds(a),
        Command::Renewal(a) => renewal::renewal(a),
        Command::Simulate(a) => run::simulate_cmd(a),
        Command::SimulateDet(a) => run::simulate_det_cmd(a),
        Command::Verify(a) => run::verify(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Lib(e) => eprintln!("error: {e}"),
                Failure::Usage(m) => eprintln!("error: {m}"),
                Failure::Io(e) => eprintln!("error: {e}"),
                Failure::Verify => eprintln!("verification failed"),
            }
            ExitCode::from(f.code())
        }
    }
}

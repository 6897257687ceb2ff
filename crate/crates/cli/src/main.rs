//! `eband`: link budgets, LoS-MIMO eigenvalue sweeps, frame numerology
//! checks, channel plans and user-cooperation coverage runs.
//!
//! Exit codes: 0 ok, 2 usage, 3 schema, 4 policy (including channel
//! aggregation), 5 numerical, 6 i/o.

mod chanplan;
mod coopsim;
mod eigencurves;
mod error;
mod linkbudget;
mod numerology;
mod output;

use clap::{Parser, Subcommand, ValueEnum};

use crate::error::{exit, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "eband", version, about = "E-band link and network analysis toolkit")]
struct Cli {
    /// Output format. Reports default to a text table, sweeps to CSV, plans
    /// and simulations to JSON.
    #[arg(long, global = true)]
    format: Option<Format>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Itemized link budget for one link.
    Linkbudget(linkbudget::LinkBudgetArgs),
    /// Gram eigenvalues of an aligned ULA pair over a distance sweep.
    Eigencurves(eigencurves::EigenCurvesArgs),
    /// Check an OFDM numerology against the five design constraints.
    Numerology(numerology::NumerologyArgs),
    /// Regional channel plan and channel aggregation.
    Chanplan(chanplan::ChanPlanArgs),
    /// Monte-Carlo coverage of the user-cooperation protocol.
    Coopsim(coopsim::CoopSimArgs),
}

fn run(cli: &Cli) -> CliResult<()> {
    match &cli.command {
        Command::Linkbudget(a) => linkbudget::run(a, cli.format),
        Command::Eigencurves(a) => eigencurves::run(a, cli.format),
        Command::Numerology(a) => numerology::run(a, cli.format),
        Command::Chanplan(a) => chanplan::run(a, cli.format),
        Command::Coopsim(a) => coopsim::run(a, cli.format),
    }
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let code = match run(&cli) {
        Ok(()) => exit::OK,
        Err(e) => {
            eprintln!("eband: {e}");
            e.exit_code()
        }
    };
    std::process::exit(code);
}

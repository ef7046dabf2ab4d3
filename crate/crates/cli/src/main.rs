//! `sicore` — batch CLI for SIC construction, state/probability
//! conversion, and urgleichung checking.
//!
//! Exit codes: 0 success, 1 validation or check failure, 2 usage error,
//! 3 search convergence failure.

mod commands;
mod output;

use clap::{Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Emit {
    Json,
    Text,
}

#[derive(Debug, Parser)]
#[command(
    name = "sicore",
    about = "SIC measurements and the probabilistic Born rule",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Search for a SIC fiducial by frame-potential minimization.
    #[command(name = "find-sic")]
    FindSic {
        /// Hilbert-space dimension.
        #[arg(long)]
        d: usize,
        /// Random seed; the result is a pure function of it.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Maximum random restarts.
        #[arg(long, default_value_t = 64)]
        restarts: usize,
        /// Target orbit deviation |tr(Π_i Π_k) - 1/(d+1)|.
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        /// Where to write the SIC file.
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = Emit::Text)]
        emit: Emit,
    },
    /// Regenerate the orbit of a stored fiducial and verify the SIC
    /// conditions.
    #[command(name = "verify-sic")]
    VerifySic {
        /// SIC file to verify.
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[arg(long, value_enum, default_value_t = Emit::Text)]
        emit: Emit,
    },
    /// Convert a density operator to its SIC probability vector.
    #[command(name = "rho2p")]
    RhoToP {
        #[arg(long)]
        sic: PathBuf,
        #[arg(long)]
        rho: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = Emit::Text)]
        emit: Emit,
    },
    /// Reconstruct the operator of a probability vector. The output is
    /// tagged "density" when positive semidefinite, "hermitian" otherwise
    /// (with exit code 1).
    #[command(name = "p2rho")]
    PToRho {
        /// SIC file; defaults to the sic_ref recorded in the p file.
        #[arg(long)]
        sic: Option<PathBuf>,
        #[arg(long)]
        p: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = Emit::Text)]
        emit: Emit,
    },
    /// Check a claimed or derived outcome distribution against the
    /// urgleichung prediction.
    Check {
        /// Check-request JSON; file references resolve relative to it.
        #[arg(long, conflicts_with_all = ["sic", "rho", "p", "povm"])]
        request: Option<PathBuf>,
        #[arg(long, requires = "povm")]
        sic: Option<PathBuf>,
        /// State as an operator file (enables the Born-rule oracle).
        #[arg(long, conflicts_with = "p")]
        rho: Option<PathBuf>,
        /// State as a probability-vector file.
        #[arg(long)]
        p: Option<PathBuf>,
        #[arg(long)]
        povm: Option<PathBuf>,
        /// Override the state coefficient (defaults to d+1).
        #[arg(long)]
        alpha: Option<f64>,
        /// Override the subtracted constant (defaults to 1/d).
        #[arg(long)]
        beta: Option<f64>,
        /// Residual bound for a pass.
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[arg(long, value_enum, default_value_t = Emit::Text)]
        emit: Emit,
    },
    /// Project a probability vector onto the quantum region.
    Repair {
        /// SIC file; defaults to the sic_ref recorded in the p file.
        #[arg(long)]
        sic: Option<PathBuf>,
        #[arg(long)]
        p: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = Emit::Text)]
        emit: Emit,
    },
    /// Human-readable summary of a SIC, a state, and their agreement.
    Report {
        #[arg(long)]
        sic: PathBuf,
        #[arg(long, conflicts_with = "p")]
        rho: Option<PathBuf>,
        #[arg(long)]
        p: Option<PathBuf>,
        #[arg(long)]
        povm: Option<PathBuf>,
    },
}

fn init_thread_pool() {
    if let Ok(raw) = std::env::var("SICORE_THREADS") {
        if let Ok(n) = raw.parse::<usize>() {
            if n >= 1 {
                rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build_global()
                    .ok();
            }
        }
    }
}

fn main() -> ExitCode {
    init_thread_pool();
    let cli = Cli::parse();
    let code = match cli.command {
        Command::FindSic {
            d,
            seed,
            restarts,
            tol,
            out,
            emit,
        } => commands::find_sic(d, seed, restarts, tol, &out, emit),
        Command::VerifySic { input, tol, emit } => commands::verify_sic(&input, tol, emit),
        Command::RhoToP { sic, rho, out, emit } => commands::rho_to_p(&sic, &rho, &out, emit),
        Command::PToRho { sic, p, out, emit } => commands::p_to_rho(sic.as_deref(), &p, &out, emit),
        Command::Check {
            request,
            sic,
            rho,
            p,
            povm,
            alpha,
            beta,
            tol,
            emit,
        } => commands::check(
            commands::CheckArgs {
                request,
                sic,
                rho,
                p,
                povm,
                alpha,
                beta,
                tol,
            },
            emit,
        ),
        Command::Repair { sic, p, out, emit } => commands::repair(sic.as_deref(), &p, &out, emit),
        Command::Report { sic, rho, p, povm } => {
            commands::report(&sic, rho.as_deref(), p.as_deref(), povm.as_deref())
        }
    };
    match code {
        Ok(c) => ExitCode::from(c),
        Err(failure) => {
            eprintln!("sicore: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}

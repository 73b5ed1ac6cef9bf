//! Command-line front end for the binomial option toolkit.
//!
//! Every command returns an [`Outcome`] rather than printing directly, so the
//! binary and the tests share one code path. Exit codes are a stable
//! contract: 0 success, 2 input error, 3 arbitrage model, 4 failed checks.

pub mod commands;
pub mod input;
pub mod output;

use binopt::{ArbitrageWitness, ModelParams};
use thiserror::Error;

pub use commands::{run, Cli, Command, Format};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_ARBITRAGE: i32 = 3;
pub const EXIT_CHECKS: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{file}: {message}")]
    Input { file: String, message: String },

    #[error("{0}")]
    Usage(String),

    #[error("{}", arbitrage_message(.params, .witness))]
    Arbitrage {
        params: ModelParams,
        witness: ArbitrageWitness,
    },

    #[error(transparent)]
    Core(#[from] binopt::Error),

    #[error("{0}")]
    ChecksFailed(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input { .. } | CliError::Usage(_) => EXIT_INPUT,
            CliError::Arbitrage { .. } => EXIT_ARBITRAGE,
            CliError::Core(binopt::Error::ArbitrageModel { .. }) => EXIT_ARBITRAGE,
            CliError::Core(_) => EXIT_INPUT,
            CliError::ChecksFailed(_) => EXIT_CHECKS,
        }
    }
}

fn arbitrage_message(params: &ModelParams, w: &ArbitrageWitness) -> String {
    let g = params.growth();
    let violated = if params.d() >= g {
        format!("d = {} is not below 1+r = {}", params.d(), g)
    } else {
        format!("u = {} is not above 1+r = {}", params.u(), g)
    };
    format!(
        "model admits arbitrage: no-arbitrage requires 0 < d < 1+r < u, but {violated}\n\
         witness: a = {} shares, b = {} in the bank (cost {}), pays {} after an up move and {} after a down move",
        w.shares,
        w.bank,
        w.initial_cost(params.s0()),
        w.up_value,
        w.down_value
    )
}

/// What a command printed and how the process should exit.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Outcome {
    pub stdout: String,
    pub stderr: String,
    pub code: i32,
}

impl Outcome {
    pub fn success(stdout: String) -> Self {
        Self {
            stdout,
            stderr: String::new(),
            code: EXIT_OK,
        }
    }

    pub fn failure(err: &CliError) -> Self {
        Self {
            stdout: String::new(),
            stderr: format!("error: {err}\n"),
            code: err.exit_code(),
        }
    }
}

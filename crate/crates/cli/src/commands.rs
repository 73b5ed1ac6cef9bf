//! Subcommand definitions and dispatch.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use binopt::analytics::{CheckReport, Checker, DEFAULT_TOLERANCE};
use binopt::optimization::{optimize, OptimizationProblem};
use binopt::oracle::{
    oracle_american, oracle_european, oracle_hedge_replay, oracle_superhedge, MAX_PATH_DEPTH,
    MAX_STOPPING_DEPTH,
};
use binopt::pricing::{advise_exercise, fair_value, hedge_option, price, price_european};
use binopt::{find_arbitrage, ExerciseStyle, ModelParams, OptionSpec};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::input::{parse_model, parse_number, parse_option, parse_path, read_file};
use crate::output::{
    advice_json, advice_text, portfolio_json, portfolio_text, render_tree, reports_json,
    reports_text, HedgeDocument, LatticeDocument, ReplaySummary,
};
use crate::{CliError, Outcome};

/// Shortfall allowed when replaying a hedge, and the gap allowed between a
/// lattice price and its oracle.
const ORACLE_TOLERANCE: f64 = 1e-10;
/// Amount removed from the initial wealth by the minimality probe.
const MINIMALITY_PROBE: f64 = 1e-3;

#[derive(Debug, Parser)]
#[command(
    name = "binopt",
    version,
    about = "Binomial option pricing, hedging and auditing"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Format {
    /// Comma-separated rows with `#` header lines.
    #[default]
    Table,
    /// Pretty-printed JSON.
    Structured,
    /// ASCII tree for lattices of at most five periods.
    Tree,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Price an option and print its value lattice.
    Price {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        option: PathBuf,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
        /// Real-world up-probability; adds a fair-value summary.
        #[arg(long)]
        p: Option<String>,
    },
    /// Print the superhedging portfolio at every node.
    Hedge {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        option: PathBuf,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
    },
    /// Exercise advice for an American option after a path of moves.
    Advise {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        option: PathBuf,
        /// Comma-separated moves such as `u,d,u`.
        #[arg(long, default_value = "", allow_hyphen_values = true)]
        path: String,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
    },
    /// Run the no-arbitrage consistency checks on vanilla calls and puts.
    Check {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        strike: String,
        /// Maturity; defaults to the model's period count.
        #[arg(long)]
        periods: Option<usize>,
        #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
        tolerance: f64,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
        /// Perturbs the European call lattice before the parity check.
        #[arg(long, hide = true)]
        inject_fault: Option<f64>,
    },
    /// One-period portfolio maximising expected terminal wealth.
    Optimize {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        v0: String,
        #[arg(long)]
        p: String,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
    },
    /// Compare lattice results against brute-force path enumeration.
    Oracle {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        option: PathBuf,
        #[arg(long, default_value_t = ORACLE_TOLERANCE)]
        tolerance: f64,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
    },
}

/// Runs a parsed command line.
pub fn run(cli: Cli) -> Outcome {
    let result = match cli.command {
        Command::Price {
            model,
            option,
            format,
            p,
        } => cmd_price(&model, &option, format, p.as_deref()),
        Command::Hedge {
            model,
            option,
            format,
        } => cmd_hedge(&model, &option, format),
        Command::Advise {
            model,
            option,
            path,
            format,
        } => cmd_advise(&model, &option, &path, format),
        Command::Check {
            model,
            strike,
            periods,
            tolerance,
            format,
            inject_fault,
        } => {
            return cmd_check(&model, &strike, periods, tolerance, format, inject_fault);
        }
        Command::Optimize {
            model,
            v0,
            p,
            format,
        } => cmd_optimize(&model, &v0, &p, format),
        Command::Oracle {
            model,
            option,
            tolerance,
            format,
        } => {
            return cmd_oracle(&model, &option, tolerance, format);
        }
    };
    match result {
        Ok(stdout) => Outcome::success(stdout),
        Err(err) => Outcome::failure(&err),
    }
}

fn label(path: &Path) -> String {
    path.display().to_string()
}

/// Loads a model and refuses arbitrage before anything else runs.
fn load_model(path: &Path) -> Result<ModelParams, CliError> {
    let params = parse_model(&read_file(path)?, &label(path))?;
    ensure_arbitrage_free(&params)?;
    Ok(params)
}

fn ensure_arbitrage_free(params: &ModelParams) -> Result<(), CliError> {
    match find_arbitrage(params) {
        Some(witness) => Err(CliError::Arbitrage {
            params: *params,
            witness,
        }),
        None => Ok(()),
    }
}

fn load_option(path: &Path, params: &ModelParams) -> Result<OptionSpec, CliError> {
    parse_option(&read_file(path)?, &label(path), params.n_periods())
}

fn flag_number(flag: &str, text: &str) -> Result<f64, CliError> {
    parse_number(text).map_err(|e| CliError::Usage(format!("--{flag}: {e}")))
}

fn cmd_price(
    model: &Path,
    option: &Path,
    format: Format,
    p: Option<&str>,
) -> Result<String, CliError> {
    let params = load_model(model)?;
    let spec = load_option(option, &params)?;
    let lattice = price(&params, &spec)?;
    let mut doc = LatticeDocument::new(&params, &lattice);
    if let Some(p) = p {
        let p = flag_number("p", p)?;
        doc.fair_value = Some(fair_value(&params, &spec, p)?.into());
    }
    Ok(match format {
        Format::Table => doc.to_table(),
        Format::Structured => doc.to_json(),
        Format::Tree => doc.to_tree(),
    })
}

fn cmd_hedge(model: &Path, option: &Path, format: Format) -> Result<String, CliError> {
    let params = load_model(model)?;
    let spec = load_option(option, &params)?;
    let plan = hedge_option(&params, &spec)?;
    let replay = if params.n_periods() <= MAX_PATH_DEPTH {
        Some(ReplaySummary {
            paths: 1u64 << params.n_periods(),
            worst_shortfall: oracle_hedge_replay(&params, &plan, &spec)?,
        })
    } else {
        None
    };
    let doc = HedgeDocument::new(&plan, replay);
    Ok(match format {
        Format::Table => doc.to_table(),
        Format::Structured => doc.to_json(),
        Format::Tree if params.n_periods() <= crate::output::MAX_TREE_PERIODS => {
            format!(
                "root value {}\n{}",
                doc.root_value,
                render_tree(plan.value_lattice())
            )
        }
        Format::Tree => doc.to_table(),
    })
}

fn cmd_advise(model: &Path, option: &Path, path: &str, format: Format) -> Result<String, CliError> {
    let moves = parse_path(path)?;
    let params = load_model(model)?;
    let spec = load_option(option, &params)?;
    let advice = advise_exercise(&params, &spec, &moves)?;
    Ok(match format {
        Format::Structured => advice_json(&advice),
        Format::Table | Format::Tree => advice_text(&advice),
    })
}

fn cmd_check(
    model: &Path,
    strike: &str,
    periods: Option<usize>,
    tolerance: f64,
    format: Format,
    inject_fault: Option<f64>,
) -> Outcome {
    let reports = (|| -> Result<Vec<CheckReport>, CliError> {
        let strike = flag_number("strike", strike)?;
        if tolerance.is_nan() || tolerance < 0.0 {
            return Err(CliError::Usage(format!(
                "--tolerance must be non-negative, got {tolerance}"
            )));
        }
        let params = load_model(model)?;
        let maturity = periods.unwrap_or(params.n_periods());
        let checker = Checker::new(tolerance);
        let mut reports = checker.all(&params, strike, maturity)?;
        if let Some(delta) = inject_fault {
            let model = params.with_periods(maturity);
            let mut call = price_european(
                &model,
                &OptionSpec::call(ExerciseStyle::European, strike, maturity)?,
            )?;
            let put = price_european(
                &model,
                &OptionSpec::put(ExerciseStyle::European, strike, maturity)?,
            )?;
            call.values[binopt::NodeId::ROOT] += delta;
            reports[0] = checker.parity_report(&model, strike, &call, &put);
        }
        Ok(reports)
    })();
    let reports = match reports {
        Ok(r) => r,
        Err(err) => return Outcome::failure(&err),
    };
    let stdout = match format {
        Format::Structured => reports_json(&reports),
        Format::Table | Format::Tree => reports_text(&reports),
    };
    let failing: Vec<_> = reports.iter().filter(|r| !r.passed).collect();
    if failing.is_empty() {
        return Outcome::success(stdout);
    }
    let mut listing = String::from("failed checks:");
    for r in failing {
        write!(
            listing,
            "\n  {} worst violation {:e} at node {}",
            r.name, r.worst_violation, r.worst_node
        )
        .unwrap();
    }
    let err = CliError::ChecksFailed(listing);
    Outcome {
        stdout,
        ..Outcome::failure(&err)
    }
}

fn cmd_optimize(model: &Path, v0: &str, p: &str, format: Format) -> Result<String, CliError> {
    let v0 = flag_number("v0", v0)?;
    let p = flag_number("p", p)?;
    let params = load_model(model)?.with_periods(1);
    let problem = OptimizationProblem::new(params, v0, p)?;
    let portfolio = optimize(&problem);
    Ok(match format {
        Format::Structured => portfolio_json(&portfolio),
        Format::Table | Format::Tree => portfolio_text(&portfolio),
    })
}

#[derive(Debug, Serialize)]
struct OracleCheck {
    name: &'static str,
    /// `None` when the model is too deep to enumerate.
    passed: Option<bool>,
    lattice: Option<f64>,
    oracle: Option<f64>,
    detail: String,
}

impl OracleCheck {
    fn skipped(name: &'static str, depth: usize, limit: usize) -> Self {
        Self {
            name,
            passed: None,
            lattice: None,
            oracle: None,
            detail: format!("skipped: {depth} periods exceeds the limit of {limit}"),
        }
    }

    fn compare(name: &'static str, lattice: f64, oracle: f64, tolerance: f64) -> Self {
        let gap = (lattice - oracle).abs();
        Self {
            name,
            passed: Some(gap <= tolerance),
            lattice: Some(lattice),
            oracle: Some(oracle),
            detail: format!("gap {gap:e}"),
        }
    }
}

fn oracle_checks(
    params: &ModelParams,
    spec: &OptionSpec,
    tolerance: f64,
) -> Result<Vec<OracleCheck>, CliError> {
    let n = params.n_periods();
    let root = price(params, spec)?.root();
    let mut checks = Vec::new();

    let (name, limit) = match spec.style() {
        ExerciseStyle::European => ("price-vs-paths", MAX_PATH_DEPTH),
        ExerciseStyle::American => ("price-vs-stopping-rules", MAX_STOPPING_DEPTH),
    };
    if n <= limit {
        let oracle = match spec.style() {
            ExerciseStyle::European => oracle_european(params, spec)?,
            ExerciseStyle::American => oracle_american(params, spec)?,
        };
        checks.push(OracleCheck::compare(name, root, oracle, tolerance));
    } else {
        checks.push(OracleCheck::skipped(name, n, limit));
    }

    if n > MAX_PATH_DEPTH {
        for name in [
            "superhedge-vs-full-tree",
            "hedge-replay",
            "minimality-probe",
        ] {
            checks.push(OracleCheck::skipped(name, n, MAX_PATH_DEPTH));
        }
        return Ok(checks);
    }
    let plan = hedge_option(params, spec)?;
    let full_tree = oracle_superhedge(params, &spec.floors(params)?)?;
    checks.push(OracleCheck::compare(
        "superhedge-vs-full-tree",
        plan.root_value(),
        full_tree,
        tolerance,
    ));

    let shortfall = oracle_hedge_replay(params, &plan, spec)?;
    checks.push(OracleCheck {
        name: "hedge-replay",
        passed: Some(shortfall >= -tolerance),
        lattice: Some(plan.root_value()),
        oracle: Some(shortfall),
        detail: format!("worst shortfall {shortfall:e} over {} paths", 1u64 << n),
    });

    let reduced = oracle_hedge_replay(params, &plan.reduced_by(MINIMALITY_PROBE), spec)?;
    checks.push(OracleCheck {
        name: "minimality-probe",
        passed: Some(reduced < 0.0),
        lattice: Some(plan.root_value() - MINIMALITY_PROBE),
        oracle: Some(reduced),
        detail: format!(
            "worst shortfall {reduced:e} after removing {MINIMALITY_PROBE:e} from the start"
        ),
    });
    Ok(checks)
}

fn cmd_oracle(model: &Path, option: &Path, tolerance: f64, format: Format) -> Outcome {
    let checks = (|| {
        let params = load_model(model)?;
        let spec = load_option(option, &params)?;
        oracle_checks(&params, &spec, tolerance)
    })();
    let checks = match checks {
        Ok(c) => c,
        Err(err) => return Outcome::failure(&err),
    };
    let stdout = match format {
        Format::Structured => serde_json::to_string_pretty(&checks).unwrap() + "\n",
        Format::Table | Format::Tree => checks
            .iter()
            .map(|c| {
                let status = match c.passed {
                    Some(true) => "PASS",
                    Some(false) => "FAIL",
                    None => "SKIP",
                };
                format!("{:<24} {status} {}\n", c.name, c.detail)
            })
            .collect(),
    };
    let failing: Vec<_> = checks
        .iter()
        .filter(|c| c.passed == Some(false))
        .map(|c| c.name)
        .collect();
    if failing.is_empty() {
        Outcome::success(stdout)
    } else {
        let err = CliError::ChecksFailed(format!("oracle mismatch: {}", failing.join(", ")));
        Outcome {
            stdout,
            ..Outcome::failure(&err)
        }
    }
}

//! Executable checks for put-call parity, European/American relations and
//! value bounds.
//!
//! Every check evaluates a signed violation at each node: positive means the
//! relation is broken by that amount, zero or negative means it holds. A
//! report passes when the worst violation is within the tolerance.

use crate::error::{Error, Result};
use crate::model::{Lattice, ModelParams, NodeId};
use crate::pricing::{
    price_american, price_european, ExerciseStyle, OptionKind, OptionSpec, ValueLattice,
};

pub const DEFAULT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    pub name: String,
    pub tolerance: f64,
    /// Signed violation at every node.
    pub violations: Lattice<f64>,
    pub worst_violation: f64,
    pub worst_node: NodeId,
    pub passed: bool,
}

impl CheckReport {
    pub fn from_violations(
        name: impl Into<String>,
        tolerance: f64,
        violations: Lattice<f64>,
    ) -> Self {
        let (worst_node, worst_violation) =
            violations
                .iter()
                .fold((NodeId::ROOT, f64::NEG_INFINITY), |(bn, bv), (node, &v)| {
                    // NaN counts as the worst possible outcome
                    if v > bv || v.is_nan() && !bv.is_nan() {
                        (node, v)
                    } else {
                        (bn, bv)
                    }
                });
        let passed = worst_violation <= tolerance;
        Self {
            name: name.into(),
            tolerance,
            violations,
            worst_violation,
            worst_node,
            passed,
        }
    }
}

/// Runs the checks at a fixed tolerance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Checker {
    pub tolerance: f64,
}

impl Default for Checker {
    fn default() -> Self {
        Self {
            tolerance: DEFAULT_TOLERANCE,
        }
    }
}

/// Call and put values over the same lattice and strike.
struct Priced {
    model: ModelParams,
    strike: f64,
    prices: Lattice<f64>,
    euro_call: ValueLattice,
    euro_put: ValueLattice,
    amer_call: ValueLattice,
    amer_put: ValueLattice,
}

impl Priced {
    /// `K / (1 + r)^(N - n)`
    fn discounted_strike(&self, node: NodeId) -> f64 {
        self.strike / self.model.compound(self.model.n_periods() - node.time)
    }
}

fn gate(params: &ModelParams) -> Result<()> {
    if params.r() < 0.0 {
        return Err(Error::RequiresNonnegativeRate(params.r()));
    }
    params.risk_neutral().map(|_| ())
}

fn price_vanillas(params: &ModelParams, strike: f64, maturity: usize) -> Result<Priced> {
    let model = params.with_periods(maturity);
    gate(&model)?;
    if !(strike >= 0.0 && strike.is_finite()) {
        return Err(Error::InvalidOption(format!(
            "strike must be non-negative, got {strike}"
        )));
    }
    let spec = |kind, style| OptionSpec::vanilla_unchecked(kind, style, strike, maturity);
    use ExerciseStyle::{American, European};
    Ok(Priced {
        model,
        strike,
        prices: model.price_lattice(),
        euro_call: price_european(&model, &spec(OptionKind::Call, European))?,
        euro_put: price_european(&model, &spec(OptionKind::Put, European))?,
        amer_call: price_american(&model, &spec(OptionKind::Call, American))?,
        amer_put: price_american(&model, &spec(OptionKind::Put, American))?,
    })
}

impl Checker {
    pub fn new(tolerance: f64) -> Self {
        Self { tolerance }
    }

    /// `C_n - P_n = S_n - K / (1 + r)^(N - n)` for European options.
    pub fn european_parity(
        &self,
        params: &ModelParams,
        strike: f64,
        maturity: usize,
    ) -> Result<CheckReport> {
        let p = price_vanillas(params, strike, maturity)?;
        Ok(self.parity_report(&p.model, strike, &p.euro_call, &p.euro_put))
    }

    /// Parity check on caller-supplied lattices.
    pub fn parity_report(
        &self,
        params: &ModelParams,
        strike: f64,
        call: &ValueLattice,
        put: &ValueLattice,
    ) -> CheckReport {
        let last = params.n_periods();
        let violations = Lattice::from_fn(last, |node| {
            let lhs = call.values[node] - put.values[node];
            let rhs = params.price_unchecked(node) - strike / params.compound(last - node.time);
            (lhs - rhs).abs()
        });
        CheckReport::from_violations("european-parity", self.tolerance, violations)
    }

    /// European value never exceeds American value. Calls coincide when
    /// `r >= 0`; puts coincide when `r = 0`.
    pub fn e_vs_a(&self, params: &ModelParams, spec: &OptionSpec) -> Result<CheckReport> {
        gate(params)?;
        let euro = price_european(params, &spec.with_style(ExerciseStyle::European))?;
        let amer = price_american(params, &spec.with_style(ExerciseStyle::American))?;
        let coincide = match spec.kind() {
            OptionKind::Call => params.r() >= 0.0,
            OptionKind::Put => params.r() == 0.0,
            OptionKind::Custom(_) => false,
        };
        let violations = euro.values.map(|node, &e| {
            let a = amer.values[node];
            if coincide {
                (e - a).abs()
            } else {
                e - a
            }
        });
        let kind = match spec.kind() {
            OptionKind::Call => "call",
            OptionKind::Put => "put",
            OptionKind::Custom(_) => "custom",
        };
        Ok(CheckReport::from_violations(
            format!("e-vs-a-{kind}"),
            self.tolerance,
            violations,
        ))
    }

    /// `S_n - K <= H^call_n - H^put_n <= S_n - K / (1 + r)^(N - n)`.
    pub fn american_parity(
        &self,
        params: &ModelParams,
        strike: f64,
        maturity: usize,
    ) -> Result<CheckReport> {
        let p = price_vanillas(params, strike, maturity)?;
        let violations = p.prices.map(|node, &s| {
            let diff = p.amer_call.values[node] - p.amer_put.values[node];
            let lower = (s - strike) - diff;
            let upper = diff - (s - p.discounted_strike(node));
            lower.max(upper)
        });
        Ok(CheckReport::from_violations(
            "american-parity",
            self.tolerance,
            violations,
        ))
    }

    /// Bounds on calls, European puts and American puts:
    ///
    /// - `S_n - K/(1+r)^(N-n) <= C^E_n = C^A_n <= S_n`
    /// - `K/(1+r)^(N-n) - S_n <= P^E_n <= K/(1+r)^(N-n)`
    /// - `(K - S_n)^+ <= P^A_n <= K`
    pub fn bounds(
        &self,
        params: &ModelParams,
        strike: f64,
        maturity: usize,
    ) -> Result<CheckReport> {
        let p = price_vanillas(params, strike, maturity)?;
        let violations = p.prices.map(|node, &s| {
            let disc_k = p.discounted_strike(node);
            let call_e = p.euro_call.values[node];
            let call_a = p.amer_call.values[node];
            let put_e = p.euro_put.values[node];
            let put_a = p.amer_put.values[node];
            [
                (s - disc_k) - call_e,
                call_e - s,
                (call_e - call_a).abs(),
                (disc_k - s) - put_e,
                put_e - disc_k,
                (strike - s).max(0.0) - put_a,
                put_a - strike,
            ]
            .into_iter()
            .fold(f64::NEG_INFINITY, f64::max)
        });
        Ok(CheckReport::from_violations(
            "bounds",
            self.tolerance,
            violations,
        ))
    }

    /// Every check for a call/put pair at `strike`.
    pub fn all(
        &self,
        params: &ModelParams,
        strike: f64,
        maturity: usize,
    ) -> Result<Vec<CheckReport>> {
        let model = params.with_periods(maturity);
        gate(&model)?;
        let call = OptionSpec::vanilla_unchecked(
            OptionKind::Call,
            ExerciseStyle::European,
            strike,
            maturity,
        );
        let put = OptionSpec::vanilla_unchecked(
            OptionKind::Put,
            ExerciseStyle::European,
            strike,
            maturity,
        );
        Ok(vec![
            self.european_parity(params, strike, maturity)?,
            self.e_vs_a(&model, &call)?,
            self.e_vs_a(&model, &put)?,
            self.american_parity(params, strike, maturity)?,
            self.bounds(params, strike, maturity)?,
        ])
    }
}

pub fn check_european_parity(
    params: &ModelParams,
    strike: f64,
    maturity: usize,
) -> Result<CheckReport> {
    Checker::default().european_parity(params, strike, maturity)
}

pub fn check_e_vs_a(params: &ModelParams, spec: &OptionSpec) -> Result<CheckReport> {
    Checker::default().e_vs_a(params, spec)
}

pub fn check_american_parity(
    params: &ModelParams,
    strike: f64,
    maturity: usize,
) -> Result<CheckReport> {
    Checker::default().american_parity(params, strike, maturity)
}

pub fn check_bounds(params: &ModelParams, strike: f64, maturity: usize) -> Result<CheckReport> {
    Checker::default().bounds(params, strike, maturity)
}

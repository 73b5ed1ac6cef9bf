//! One-period portfolio choice: maximise the expected terminal value under
//! a real-world up-probability `p` while keeping wealth non-negative in both
//! states.
//!
//! The objective `p*V_up + (1-p)*V_down` equals
//! `a*s0*(p*u + (1-p)*d - (1+r)) + v0*(1+r)`, linear in the share count, so
//! the optimum sits at whichever end of the feasible interval the drift
//! points to.

use crate::error::{Error, Result};
use crate::model::ModelParams;

/// Relative tolerance for treating the drift as equal to `1 + r`.
const DRIFT_TIE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizationProblem {
    params: ModelParams,
    v0: f64,
    p: f64,
}

impl OptimizationProblem {
    pub fn new(params: ModelParams, v0: f64, p: f64) -> Result<Self> {
        params.risk_neutral()?;
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::InvalidProbability(p));
        }
        if v0.is_nan() || v0 < 0.0 || !v0.is_finite() {
            return Err(Error::NegativeWealth(v0));
        }
        Ok(Self { params, v0, p })
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn v0(&self) -> f64 {
        self.v0
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// `p*u + (1-p)*d`
    pub fn drift(&self) -> f64 {
        self.p * self.params.u() + (1.0 - self.p) * self.params.d()
    }

    /// Feasible share counts `[-v0(1+r)/(s0(u-(1+r))), v0(1+r)/(s0(1+r-d))]`.
    pub fn share_bounds(&self) -> (f64, f64) {
        let m = &self.params;
        let g = m.growth();
        let lo = -self.v0 * g / (m.s0() * (m.u() - g));
        let hi = self.v0 * g / (m.s0() * (g - m.d()));
        (lo, hi)
    }

    /// Terminal values `(up, down)` for a portfolio of `shares` funded by
    /// `v0`.
    pub fn terminal_values(&self, shares: f64) -> (f64, f64) {
        let m = &self.params;
        let bank = self.v0 - shares * m.s0();
        (
            shares * m.u() * m.s0() + bank * m.growth(),
            shares * m.d() * m.s0() + bank * m.growth(),
        )
    }

    pub fn objective(&self, shares: f64) -> f64 {
        let (up, down) = self.terminal_values(shares);
        self.p * up + (1.0 - self.p) * down
    }
}

/// Which terminal wealth constraint is active at the optimum.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Binding {
    Up,
    Down,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimalPortfolio {
    pub shares: f64,
    pub bank: f64,
    pub up_value: f64,
    pub down_value: f64,
    pub objective: f64,
    pub binding: Binding,
}

pub fn optimize(problem: &OptimizationProblem) -> OptimalPortfolio {
    let m = problem.params();
    let g = m.growth();
    let drift = problem.drift();
    let (lo, hi) = problem.share_bounds();

    let (shares, binding) = if (drift - g).abs() <= DRIFT_TIE * g {
        (0.0, Binding::None)
    } else if drift > g {
        (hi, Binding::Down)
    } else {
        (lo, Binding::Up)
    };
    let bank = problem.v0() - shares * m.s0();
    let (up_value, down_value) = problem.terminal_values(shares);
    OptimalPortfolio {
        shares,
        bank,
        up_value,
        down_value,
        objective: problem.p() * up_value + (1.0 - problem.p()) * down_value,
        binding,
    }
}

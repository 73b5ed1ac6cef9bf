#![allow(dead_code)]

use binopt::{ExerciseStyle, ModelParams, OptionSpec};
use proptest::prelude::*;

/// Arbitrage-free model: d below 1+r, u above it, both by a margin.
pub fn model(
    max_periods: usize,
    rates: std::ops::Range<f64>,
) -> impl Strategy<Value = ModelParams> {
    (
        0.5f64..3.0,
        rates,
        0.2f64..0.99,
        0.01f64..2.0,
        0..=max_periods,
    )
        .prop_map(|(s0, r, down_frac, up_excess, n)| {
            let g = 1.0 + r;
            ModelParams::new(s0, g * (1.0 + up_excess), g * down_frac, r, n).unwrap()
        })
}

pub fn vanilla(
    params: &ModelParams,
    is_call: bool,
    style: ExerciseStyle,
    strike_frac: f64,
) -> OptionSpec {
    let strike = params.s0() * strike_frac;
    if is_call {
        OptionSpec::call(style, strike, params.n_periods()).unwrap()
    } else {
        OptionSpec::put(style, strike, params.n_periods()).unwrap()
    }
}

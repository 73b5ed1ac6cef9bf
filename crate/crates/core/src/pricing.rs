//! European and American option values by backward induction, the
//! exercise-timing advisor, and fair values under a real-world probability.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::model::{Lattice, ModelParams, Move, NodeId};
use crate::replication::{backward_induction, superhedge, FloorLattice, HedgePlan, Induction};

/// Intrinsic values above or below the bank benchmark by no more than this
/// are reported as a tie.
pub const ADVICE_TIE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExerciseStyle {
    European,
    American,
}

/// Holder's payoff on exercise, keyed by node.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PayoffTable(BTreeMap<NodeId, f64>);

impl PayoffTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, node: NodeId, payoff: f64) -> Option<f64> {
        self.0.insert(node, payoff)
    }

    pub fn get(&self, node: NodeId) -> Option<f64> {
        self.0.get(&node).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (NodeId, f64)> + '_ {
        self.0.iter().map(|(k, v)| (*k, *v))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl FromIterator<(NodeId, f64)> for PayoffTable {
    fn from_iter<I: IntoIterator<Item = (NodeId, f64)>>(iter: I) -> Self {
        Self(iter.into_iter().collect())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum OptionKind {
    Call,
    Put,
    Custom(PayoffTable),
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptionSpec {
    kind: OptionKind,
    style: ExerciseStyle,
    strike: Option<f64>,
    maturity: usize,
}

impl OptionSpec {
    pub fn call(style: ExerciseStyle, strike: f64, maturity: usize) -> Result<Self> {
        Self::vanilla(OptionKind::Call, style, strike, maturity)
    }

    pub fn put(style: ExerciseStyle, strike: f64, maturity: usize) -> Result<Self> {
        Self::vanilla(OptionKind::Put, style, strike, maturity)
    }

    fn vanilla(
        kind: OptionKind,
        style: ExerciseStyle,
        strike: f64,
        maturity: usize,
    ) -> Result<Self> {
        if !(strike > 0.0 && strike.is_finite()) {
            return Err(Error::InvalidOption(format!(
                "strike must be positive, got {strike}"
            )));
        }
        Ok(Self::vanilla_unchecked(kind, style, strike, maturity))
    }

    /// Call or put without the positive-strike check; the parity and bound
    /// checks are also meaningful at `K = 0`.
    pub(crate) fn vanilla_unchecked(
        kind: OptionKind,
        style: ExerciseStyle,
        strike: f64,
        maturity: usize,
    ) -> Self {
        Self {
            kind,
            style,
            strike: Some(strike),
            maturity,
        }
    }

    /// A payoff given node by node. American options need every node,
    /// European ones every leaf.
    pub fn custom(style: ExerciseStyle, table: PayoffTable, maturity: usize) -> Result<Self> {
        for node in Lattice::from_fn(maturity, |n| n).nodes() {
            if style == ExerciseStyle::European && node.time != maturity {
                continue;
            }
            match table.get(node) {
                None => return Err(Error::MissingPayoffEntry { node }),
                Some(v) if !v.is_finite() => {
                    return Err(Error::InvalidOption(format!("payoff at {node} is {v}")))
                }
                Some(_) => {}
            }
        }
        Ok(Self {
            kind: OptionKind::Custom(table),
            style,
            strike: None,
            maturity,
        })
    }

    pub fn kind(&self) -> &OptionKind {
        &self.kind
    }

    pub fn style(&self) -> ExerciseStyle {
        self.style
    }

    pub fn strike(&self) -> Option<f64> {
        self.strike
    }

    pub fn maturity(&self) -> usize {
        self.maturity
    }

    pub fn with_style(&self, style: ExerciseStyle) -> Self {
        Self {
            style,
            ..self.clone()
        }
    }

    /// Profit from exercising at `node`, where the asset trades at `price`.
    pub fn intrinsic(&self, node: NodeId, price: f64) -> Result<f64> {
        match (&self.kind, self.strike) {
            (OptionKind::Call, Some(k)) => Ok((price - k).max(0.0)),
            (OptionKind::Put, Some(k)) => Ok((k - price).max(0.0)),
            (OptionKind::Custom(table), _) => {
                table.get(node).ok_or(Error::MissingPayoffEntry { node })
            }
            _ => unreachable!("vanilla options always carry a strike"),
        }
    }

    fn check_maturity(&self, params: &ModelParams) -> Result<()> {
        if self.maturity == params.n_periods() {
            Ok(())
        } else {
            Err(Error::MaturityMismatch {
                option: self.maturity,
                model: params.n_periods(),
            })
        }
    }

    fn require_style(&self, style: ExerciseStyle) -> Result<()> {
        if self.style == style {
            Ok(())
        } else {
            Err(Error::InvalidOption(format!(
                "expected a {style:?} option, got {:?}",
                self.style
            )))
        }
    }

    /// Exercise floors: intrinsic at every node for American options, at
    /// the leaves only for European ones.
    pub fn floors(&self, params: &ModelParams) -> Result<FloorLattice> {
        self.check_maturity(params)?;
        let american = self.style == ExerciseStyle::American;
        let last = params.n_periods();
        let floors = Lattice::try_from_fn(last, |node| {
            if american || node.time == last {
                self.intrinsic(node, params.price_unchecked(node)).map(Some)
            } else {
                Ok(None)
            }
        })?;
        FloorLattice::new(floors)
    }
}

/// Intrinsic value `X_n` at every node.
pub fn intrinsic_lattice(params: &ModelParams, spec: &OptionSpec) -> Result<Lattice<f64>> {
    Lattice::try_from_fn(params.n_periods(), |node| {
        spec.intrinsic(node, params.price_unchecked(node))
    })
}

/// Option value at every node, with exercise-optimal flags for American
/// options.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueLattice {
    pub style: ExerciseStyle,
    pub values: Lattice<f64>,
    /// Set where intrinsic value is positive and at least the continuation
    /// value. `None` for European options.
    pub exercise: Option<Lattice<bool>>,
}

impl ValueLattice {
    pub fn root(&self) -> f64 {
        *self.values.root()
    }

    pub fn value(&self, node: NodeId) -> Option<f64> {
        self.values.get(node).copied()
    }

    pub fn exercise_flag(&self, node: NodeId) -> bool {
        self.exercise
            .as_ref()
            .and_then(|e| e.get(node).copied())
            .unwrap_or(false)
    }
}

fn induct(params: &ModelParams, spec: &OptionSpec) -> Result<(Induction, FloorLattice)> {
    let q = params.risk_neutral()?;
    let floors = spec.floors(params)?;
    Ok((backward_induction(params, q, &floors), floors))
}

/// Discounted risk-neutral expectation of the terminal payoff, node by node.
pub fn price_european(params: &ModelParams, spec: &OptionSpec) -> Result<ValueLattice> {
    spec.require_style(ExerciseStyle::European)?;
    let (induction, _) = induct(params, spec)?;
    Ok(ValueLattice {
        style: ExerciseStyle::European,
        values: induction.values,
        exercise: None,
    })
}

/// `H(n, j) = max(intrinsic, discounted continuation)`; the superhedge of
/// the intrinsic values.
pub fn price_american(params: &ModelParams, spec: &OptionSpec) -> Result<ValueLattice> {
    spec.require_style(ExerciseStyle::American)?;
    let (
        Induction {
            values,
            continuation,
        },
        floors,
    ) = induct(params, spec)?;
    let exercise = values.map(|node, _| {
        let intrinsic = floors.get(node).expect("american floors cover every node");
        intrinsic > 0.0 && intrinsic >= continuation[node]
    });
    Ok(ValueLattice {
        style: ExerciseStyle::American,
        values,
        exercise: Some(exercise),
    })
}

pub fn price(params: &ModelParams, spec: &OptionSpec) -> Result<ValueLattice> {
    match spec.style {
        ExerciseStyle::European => price_european(params, spec),
        ExerciseStyle::American => price_american(params, spec),
    }
}

/// Writer's hedge for the option: replicates a European payoff, or
/// superhedges every possible American exercise.
pub fn hedge_option(params: &ModelParams, spec: &OptionSpec) -> Result<HedgePlan> {
    superhedge(params, spec.floors(params)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Recommendation {
    Exercise,
    Hold,
    Indifferent,
}

/// Exercise if the intrinsic value beats the premium left in the bank,
/// `v0 * (1 + r)^n`; strictly, so a tie is `Indifferent`.
pub fn recommend(intrinsic: f64, v0: f64, r: f64, n: usize) -> Recommendation {
    let benchmark = v0 * (1.0 + r).powi(n as i32);
    let gap = intrinsic - benchmark;
    if gap.abs() <= ADVICE_TIE_TOLERANCE {
        Recommendation::Indifferent
    } else if gap > 0.0 {
        Recommendation::Exercise
    } else {
        Recommendation::Hold
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExerciseAdvice {
    pub node: NodeId,
    pub intrinsic: f64,
    /// Premium `H(0, 0)` compounded to the node's time.
    pub bank_benchmark: f64,
    /// Option value `H` at the node.
    pub option_value: f64,
    pub recommendation: Recommendation,
}

/// Advice for the holder of an American option after the asset has moved
/// along `path_prefix`.
pub fn advise_exercise(
    params: &ModelParams,
    spec: &OptionSpec,
    path_prefix: &[Move],
) -> Result<ExerciseAdvice> {
    spec.require_style(ExerciseStyle::American)?;
    if path_prefix.len() > params.n_periods() {
        return Err(Error::PathLengthMismatch {
            expected: params.n_periods(),
            got: path_prefix.len(),
        });
    }
    let lattice = price_american(params, spec)?;
    let node = NodeId::follow(path_prefix);
    let intrinsic = spec.intrinsic(node, params.price_unchecked(node))?;
    let v0 = lattice.root();
    Ok(ExerciseAdvice {
        node,
        intrinsic,
        bank_benchmark: v0 * params.compound(node.time),
        option_value: lattice.values[node],
        recommendation: recommend(intrinsic, v0, params.r(), node.time),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FairValueReport {
    /// Replication (risk-neutral) price.
    pub q_price: f64,
    /// Discounted expected profit under the real-world probability.
    pub p_price: f64,
    pub fair_value: f64,
    pub p: f64,
}

fn check_probability(p: f64) -> Result<()> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidProbability(p))
    }
}

/// `(1 + r)^-n * E^P[X_n]` with up-probability `p`.
fn discounted_p_expectation(
    params: &ModelParams,
    intrinsic: &Lattice<f64>,
    p: f64,
    n: usize,
) -> f64 {
    let mut binom = 1.0;
    let mut total = 0.0;
    for j in 0..=n {
        if j > 0 {
            binom = binom * (n - j + 1) as f64 / j as f64;
        }
        let weight = binom * p.powi(j as i32) * (1.0 - p).powi((n - j) as i32);
        total += weight * intrinsic[NodeId::new(n, j)];
    }
    total / params.compound(n)
}

/// Fair value of a European option when the holder cannot short the hedge:
/// the smaller of the replication price and the discounted real-world
/// expected payoff. Over several periods the expectation is taken at
/// maturity.
pub fn fair_value_european(
    params: &ModelParams,
    spec: &OptionSpec,
    p: f64,
) -> Result<FairValueReport> {
    check_probability(p)?;
    let q_price = price_european(params, spec)?.root();
    let payoffs = intrinsic_leaves(params, spec)?;
    let p_price = discounted_p_expectation(params, &payoffs, p, params.n_periods());
    Ok(FairValueReport {
        q_price,
        p_price,
        fair_value: q_price.min(p_price),
        p,
    })
}

fn intrinsic_leaves(params: &ModelParams, spec: &OptionSpec) -> Result<Lattice<f64>> {
    let last = params.n_periods();
    Lattice::try_from_fn(last, |node| {
        if node.time == last {
            spec.intrinsic(node, params.price_unchecked(node))
        } else {
            Ok(0.0)
        }
    })
}

/// American counterpart: `V0^p = max_n (1 + r)^-n E^P[X_n]`.
pub fn fair_value_american(
    params: &ModelParams,
    spec: &OptionSpec,
    p: f64,
) -> Result<FairValueReport> {
    check_probability(p)?;
    let q_price = price_american(params, spec)?.root();
    let intrinsic = intrinsic_lattice(params, spec)?;
    let p_price = (0..=params.n_periods())
        .map(|n| discounted_p_expectation(params, &intrinsic, p, n))
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(FairValueReport {
        q_price,
        p_price,
        fair_value: q_price.min(p_price),
        p,
    })
}

pub fn fair_value(params: &ModelParams, spec: &OptionSpec, p: f64) -> Result<FairValueReport> {
    match spec.style {
        ExerciseStyle::European => fair_value_european(params, spec, p),
        ExerciseStyle::American => fair_value_american(params, spec, p),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ExerciseStyle::{American, European};

    const PREMIUM: f64 = 352.0 / 729.0;

    fn worked_model(n: usize) -> ModelParams {
        ModelParams::new(1.0, 2.0, 0.5, 0.5, n).unwrap()
    }

    #[test]
    fn intrinsic_values() {
        let call = OptionSpec::call(European, 2.0 / 3.0, 1).unwrap();
        assert_abs_diff_eq!(
            call.intrinsic(NodeId::new(1, 1), 2.0).unwrap(),
            4.0 / 3.0,
            epsilon = 1e-15
        );
        let put = OptionSpec::put(European, 5.0, 1).unwrap();
        assert_eq!(put.intrinsic(NodeId::ROOT, 5.0).unwrap(), 0.0);
        let call = OptionSpec::call(American, 2.5, 3).unwrap();
        assert_eq!(call.intrinsic(NodeId::new(2, 2), 4.0).unwrap(), 1.5);
    }

    #[test]
    fn custom_table_must_cover_required_nodes() {
        let mut table = PayoffTable::new();
        table.insert(NodeId::new(1, 1), 1.0);
        assert!(matches!(
            OptionSpec::custom(European, table.clone(), 1),
            Err(Error::MissingPayoffEntry { node }) if node == NodeId::new(1, 0)
        ));
        table.insert(NodeId::new(1, 0), 0.0);
        assert!(OptionSpec::custom(European, table.clone(), 1).is_ok());
        assert!(matches!(
            OptionSpec::custom(American, table, 1),
            Err(Error::MissingPayoffEntry { node }) if node == NodeId::ROOT
        ));
        assert!(OptionSpec::call(European, 0.0, 1).is_err());
    }

    #[test]
    fn european_call_worked_example() {
        let m = worked_model(3);
        let v = price_european(&m, &OptionSpec::call(European, 2.5, 3).unwrap()).unwrap();
        assert_abs_diff_eq!(v.root(), PREMIUM, epsilon = 1e-14);
        assert!((v.root() - 0.48).abs() <= 5e-3);
        assert!(v.exercise.is_none());
    }

    #[test]
    fn two_period_call_and_put() {
        let m = worked_model(2);
        let call = price_european(&m, &OptionSpec::call(European, 2.5, 2).unwrap()).unwrap();
        let put = price_european(&m, &OptionSpec::put(European, 2.5, 2).unwrap()).unwrap();
        assert_abs_diff_eq!(call.root(), 8.0 / 27.0, epsilon = 1e-14);
        assert_abs_diff_eq!(put.root(), 11.0 / 27.0, epsilon = 1e-14);
    }

    #[test]
    fn zero_payoff_prices_to_zero() {
        let m = ModelParams::new(2.0, 1.3, 0.8, 0.02, 3).unwrap();
        for style in [European, American] {
            let table = Lattice::from_fn(3, |n| n)
                .nodes()
                .map(|n| (n, 0.0))
                .collect();
            let spec = OptionSpec::custom(style, table, 3).unwrap();
            let v = price(&m, &spec).unwrap();
            assert!(v.values.iter().all(|(_, v)| *v == 0.0));
            assert!(!v.values.nodes().any(|n| v.exercise_flag(n)));
        }
    }

    #[test]
    fn american_call_worked_example() {
        let m = worked_model(3);
        let v = price_american(&m, &OptionSpec::call(American, 2.5, 3).unwrap()).unwrap();
        assert_abs_diff_eq!(
            v.value(NodeId::new(2, 2)).unwrap(),
            22.0 / 9.0,
            epsilon = 1e-14
        );
        assert!((v.value(NodeId::new(2, 2)).unwrap() - 2.44).abs() <= 5e-3);
        assert_abs_diff_eq!(v.root(), PREMIUM, epsilon = 1e-14);
        assert!(!v.exercise_flag(NodeId::new(2, 2)));
        assert!(v.exercise_flag(NodeId::new(3, 3)));
    }

    #[test]
    fn american_put_exercises_at_root() {
        let m = worked_model(2);
        let v = price_american(&m, &OptionSpec::put(American, 2.5, 2).unwrap()).unwrap();
        assert_abs_diff_eq!(v.root(), 1.5, epsilon = 1e-14);
        assert!(v.exercise_flag(NodeId::ROOT));
        assert!(v.exercise_flag(NodeId::new(1, 1)));
        assert!(v.exercise_flag(NodeId::new(1, 0)));
        assert!(!v.exercise_flag(NodeId::new(2, 2)));
    }

    #[test]
    fn american_values_equal_superhedge_exactly() {
        let m = ModelParams::new(1.7, 1.25, 0.85, 0.03, 9).unwrap();
        let spec = OptionSpec::put(American, 1.9, 9).unwrap();
        let plan = hedge_option(&m, &spec).unwrap();
        let v = price_american(&m, &spec).unwrap();
        assert_eq!(plan.value_lattice(), &v.values);
    }

    #[test]
    fn style_and_maturity_are_enforced() {
        let m = worked_model(2);
        let eu = OptionSpec::call(European, 2.5, 2).unwrap();
        assert!(matches!(
            price_american(&m, &eu),
            Err(Error::InvalidOption(_))
        ));
        let wrong = OptionSpec::call(European, 2.5, 3).unwrap();
        assert!(matches!(
            price(&m, &wrong),
            Err(Error::MaturityMismatch {
                option: 3,
                model: 2
            })
        ));
        let bad = ModelParams::new(1.0, 1.2, 0.9, 0.5, 2).unwrap();
        assert!(matches!(
            price(&bad, &eu),
            Err(Error::ArbitrageModel { .. })
        ));
    }

    #[test]
    fn advisor_worked_example() {
        let m = worked_model(3);
        let spec = OptionSpec::call(American, 2.5, 3).unwrap();
        let advice = advise_exercise(&m, &spec, &[Move::Up, Move::Up]).unwrap();
        assert_eq!(advice.intrinsic, 1.5);
        assert_abs_diff_eq!(advice.bank_benchmark, PREMIUM * 2.25, epsilon = 1e-14);
        assert!((advice.bank_benchmark - 1.0865).abs() < 1e-4);
        assert_eq!(advice.recommendation, Recommendation::Exercise);

        let advice = advise_exercise(&m, &spec, &[Move::Down, Move::Down]).unwrap();
        assert_eq!(advice.intrinsic, 0.0);
        assert_eq!(advice.recommendation, Recommendation::Hold);

        let advice = advise_exercise(&m, &spec, &[]).unwrap();
        assert_eq!(advice.node, NodeId::ROOT);
        assert_abs_diff_eq!(advice.bank_benchmark, PREMIUM, epsilon = 1e-14);
        assert_eq!(advice.recommendation, Recommendation::Hold);

        assert!(matches!(
            advise_exercise(&m, &spec, &[Move::Up; 4]),
            Err(Error::PathLengthMismatch {
                expected: 3,
                got: 4
            })
        ));
    }

    #[test]
    fn advisor_tie_is_indifferent() {
        assert_eq!(recommend(2.25, 1.0, 0.5, 2), Recommendation::Indifferent);
        assert_eq!(
            recommend(2.25 + 5e-13, 1.0, 0.5, 2),
            Recommendation::Indifferent
        );
        assert_eq!(
            recommend(2.25 + 1e-9, 1.0, 0.5, 2),
            Recommendation::Exercise
        );
        assert_eq!(recommend(2.25 - 1e-9, 1.0, 0.5, 2), Recommendation::Hold);
    }

    #[test]
    fn european_fair_value_one_period() {
        let m = worked_model(1);
        let spec = OptionSpec::call(European, 2.0 / 3.0, 1).unwrap();
        let report = fair_value_european(&m, &spec, 0.5).unwrap();
        assert_abs_diff_eq!(report.q_price, 16.0 / 27.0, epsilon = 1e-14);
        assert_abs_diff_eq!(report.p_price, 4.0 / 9.0, epsilon = 1e-14);
        assert_abs_diff_eq!(report.fair_value, 4.0 / 9.0, epsilon = 1e-14);

        let report = fair_value_european(&m, &spec, m.q()).unwrap();
        assert_abs_diff_eq!(report.fair_value, report.q_price, epsilon = 1e-14);

        for p in [0.0, 1.0, -0.2, f64::NAN] {
            assert!(matches!(
                fair_value_european(&m, &spec, p),
                Err(Error::InvalidProbability(_))
            ));
        }
    }

    #[test]
    fn american_fair_value_examples() {
        let m = worked_model(2);
        let put = OptionSpec::put(American, 2.5, 2).unwrap();
        let report = fair_value_american(&m, &put, 0.5).unwrap();
        assert_abs_diff_eq!(report.p_price, 1.5, epsilon = 1e-14);
        assert_abs_diff_eq!(report.q_price, 1.5, epsilon = 1e-14);
        assert_abs_diff_eq!(report.fair_value, 1.5, epsilon = 1e-14);

        let m = worked_model(3);
        let call = OptionSpec::call(American, 2.5, 3).unwrap();
        let report = fair_value_american(&m, &call, 2.0 / 3.0).unwrap();
        assert_abs_diff_eq!(report.p_price, PREMIUM, epsilon = 1e-14);
        assert_abs_diff_eq!(report.fair_value, PREMIUM, epsilon = 1e-14);
    }
}

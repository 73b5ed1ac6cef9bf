//! Replicating and superhedging portfolios.
//!
//! A one-step hedge holds `shares` of the asset and `bank` in the bank
//! account. Given prescribed floors at every node, [`superhedge`] finds the
//! cheapest self-financing strategy whose value never drops below a floor.

use crate::error::{Error, Result};
use crate::model::{Lattice, ModelParams, Move, NodeId, RiskNeutralQ};

/// Prescribed one-period terminal values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TargetPair {
    pub up: f64,
    pub down: f64,
}

impl TargetPair {
    pub fn new(up: f64, down: f64) -> Self {
        Self { up, down }
    }
}

/// Portfolio held over one period at a node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HedgePosition {
    pub shares: f64,
    pub bank: f64,
    /// `shares * price + bank` at the node.
    pub node_value: f64,
}

impl HedgePosition {
    /// Value one period later if the asset moves from `price` to
    /// `next_price`.
    pub fn value_after(&self, next_price: f64, growth: f64) -> f64 {
        self.shares * next_price + self.bank * growth
    }
}

/// Solves `a*u*s + b*(1+r) = up`, `a*d*s + b*(1+r) = down`.
///
/// The system is solvable for any `u > d`, `r > -1`, `s > 0`; arbitrage is
/// irrelevant here.
pub fn solve_one_step(s: f64, params: &ModelParams, targets: TargetPair) -> Result<HedgePosition> {
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::InvalidModel(format!(
            "asset price must be positive, got {s}"
        )));
    }
    if !(targets.up.is_finite() && targets.down.is_finite()) {
        return Err(Error::InvalidFloors(format!(
            "targets must be finite, got ({}, {})",
            targets.up, targets.down
        )));
    }
    let (u, d) = (params.u(), params.d());
    let spread = u - d;
    let shares = (targets.up - targets.down) / (spread * s);
    let bank = (targets.down * u - targets.up * d) / (spread * params.growth());
    Ok(HedgePosition {
        shares,
        bank,
        node_value: shares * s + bank,
    })
}

/// Whether extra terminal amounts `(eps_up, eps_down)` can be bought at no
/// extra initial cost, i.e. `eps_up*(1+r-d) + eps_down*(u-(1+r)) == 0`.
///
/// Without arbitrage this holds only for `(0, 0)`, which is why the
/// replication cost is the smallest possible.
pub fn check_minimality(eps_up: f64, eps_down: f64, params: &ModelParams) -> Result<bool> {
    if eps_up < 0.0 || eps_down < 0.0 || eps_up.is_nan() || eps_down.is_nan() {
        return Err(Error::NegativePerturbation {
            up: eps_up,
            down: eps_down,
        });
    }
    let growth = params.growth();
    Ok(eps_up * (growth - params.d()) + eps_down * (params.u() - growth) == 0.0)
}

/// Lower bounds on portfolio value, one per node. `None` marks an
/// unconstrained interior node; every leaf must carry a finite floor.
#[derive(Debug, Clone, PartialEq)]
pub struct FloorLattice(Lattice<Option<f64>>);

impl FloorLattice {
    pub fn new(floors: Lattice<Option<f64>>) -> Result<Self> {
        let last = floors.last_time();
        for (node, floor) in floors.iter() {
            match floor {
                Some(v) if v.is_nan() => {
                    return Err(Error::InvalidFloors(format!("floor at {node} is NaN")))
                }
                Some(v) if node.time == last && !v.is_finite() => {
                    return Err(Error::InvalidFloors(format!("leaf floor at {node} is {v}")))
                }
                None if node.time == last => {
                    return Err(Error::InvalidFloors(format!("leaf {node} has no floor")))
                }
                _ => {}
            }
        }
        Ok(Self(floors))
    }

    /// Floors on every node.
    pub fn every_node(last_time: usize, f: impl FnMut(NodeId) -> f64) -> Result<Self> {
        let mut f = f;
        Self::new(Lattice::from_fn(last_time, |node| Some(f(node))))
    }

    /// Floors on the leaves only.
    pub fn leaves_only(last_time: usize, f: impl FnMut(NodeId) -> f64) -> Result<Self> {
        let mut f = f;
        Self::new(Lattice::from_fn(last_time, |node| {
            (node.time == last_time).then(|| f(node))
        }))
    }

    pub fn last_time(&self) -> usize {
        self.0.last_time()
    }

    pub fn get(&self, node: NodeId) -> Option<f64> {
        self.0.get(node).copied().flatten()
    }

    pub fn lattice(&self) -> &Lattice<Option<f64>> {
        &self.0
    }
}

/// Result of one backward sweep: node values and the discounted expectation
/// of the next level (zero at the leaves, where nothing follows).
#[derive(Debug, Clone)]
pub(crate) struct Induction {
    pub values: Lattice<f64>,
    pub continuation: Lattice<f64>,
}

/// `V(N, j) = floor`; `V(n, j) = max(floor, discounted q-expectation)`.
pub(crate) fn backward_induction(
    params: &ModelParams,
    q: RiskNeutralQ,
    floors: &FloorLattice,
) -> Induction {
    let last = params.n_periods();
    let growth = params.growth();
    let mut values = Lattice::from_fn(last, |_| 0.0);
    let mut continuation = Lattice::from_fn(last, |_| 0.0);
    for j in 0..=last {
        let node = NodeId::new(last, j);
        values[node] = floors.get(node).expect("leaf floors are validated");
    }
    for n in (0..last).rev() {
        for j in 0..=n {
            let node = NodeId::new(n, j);
            let cont = q.discounted_mean(values[node.up()], values[node.down()], growth);
            continuation[node] = cont;
            values[node] = match floors.get(node) {
                Some(floor) => floor.max(cont),
                None => cont,
            };
        }
    }
    Induction {
        values,
        continuation,
    }
}

/// A superhedging strategy over the whole lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct HedgePlan {
    params: ModelParams,
    floors: FloorLattice,
    values: Lattice<f64>,
    continuation: Lattice<f64>,
    positions: Vec<Vec<HedgePosition>>,
    initial_wealth: f64,
}

impl HedgePlan {
    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn floors(&self) -> &FloorLattice {
        &self.floors
    }

    /// Minimal superhedging value at each node.
    pub fn value_lattice(&self) -> &Lattice<f64> {
        &self.values
    }

    /// Discounted expectation of the next level's values; zero at leaves.
    pub fn continuation(&self) -> &Lattice<f64> {
        &self.continuation
    }

    pub fn root_value(&self) -> f64 {
        *self.values.root()
    }

    /// Position held from `node` to the next period; `None` at the leaves.
    pub fn position(&self, node: NodeId) -> Option<&HedgePosition> {
        self.positions.get(node.time)?.get(node.up_count)
    }

    /// Interior nodes with their positions, in lattice display order.
    pub fn positions(&self) -> impl Iterator<Item = (NodeId, &HedgePosition)> + '_ {
        self.positions.iter().enumerate().flat_map(|(n, level)| {
            level
                .iter()
                .enumerate()
                .rev()
                .map(move |(j, p)| (NodeId::new(n, j), p))
        })
    }

    /// Wealth the strategy starts with; equals the root value unless
    /// overridden.
    pub fn initial_wealth(&self) -> f64 {
        self.initial_wealth
    }

    pub fn with_initial_wealth(&self, wealth: f64) -> Self {
        Self {
            initial_wealth: wealth,
            ..self.clone()
        }
    }

    /// The same strategy started with `eps` less than the minimal value.
    pub fn reduced_by(&self, eps: f64) -> Self {
        self.with_initial_wealth(self.root_value() - eps)
    }
}

/// Builds the cheapest strategy whose value dominates `floors` at every node.
///
/// At node `(n, j)` the position replicates the next level's values; any
/// excess of `V(n, j)` over the continuation value sits in the bank leg.
pub fn superhedge(params: &ModelParams, floors: FloorLattice) -> Result<HedgePlan> {
    let q = params.risk_neutral()?;
    if floors.last_time() != params.n_periods() {
        return Err(Error::FloorShapeMismatch {
            floors: floors.last_time(),
            model: params.n_periods(),
        });
    }
    let Induction {
        values,
        continuation,
    } = backward_induction(params, q, &floors);
    let mut positions = Vec::with_capacity(params.n_periods());
    for n in 0..params.n_periods() {
        let mut level = Vec::with_capacity(n + 1);
        for j in 0..=n {
            let node = NodeId::new(n, j);
            let price = params.price_unchecked(node);
            let targets = TargetPair::new(values[node.up()], values[node.down()]);
            let mut pos = solve_one_step(price, params, targets)?;
            pos.bank = values[node] - pos.shares * price;
            pos.node_value = values[node];
            level.push(pos);
        }
        positions.push(level);
    }
    let initial_wealth = *values.root();
    Ok(HedgePlan {
        params: *params,
        floors,
        values,
        continuation,
        positions,
        initial_wealth,
    })
}

/// Wealth trajectory of a plan along one path.
#[derive(Debug, Clone, PartialEq)]
pub struct Rollout {
    /// Nodes visited, root first.
    pub nodes: Vec<NodeId>,
    /// Portfolio value on arrival at each node.
    pub achieved: Vec<f64>,
    /// `achieved - plan value` at each node.
    pub surplus: Vec<f64>,
}

impl Rollout {
    pub fn terminal(&self) -> f64 {
        *self.achieved.last().expect("rollout visits the root")
    }
}

/// Runs the plan forward along `path`.
///
/// At each node the plan's share count is held and whatever wealth is left
/// over (positive or negative) sits in the bank, so the strategy stays
/// self-financing.
pub fn roll_hedge(plan: &HedgePlan, path: &[Move]) -> Result<Rollout> {
    let periods = plan.params.n_periods();
    if path.len() != periods {
        return Err(Error::PathLengthMismatch {
            expected: periods,
            got: path.len(),
        });
    }
    let growth = plan.params.growth();
    let mut node = NodeId::ROOT;
    let mut wealth = plan.initial_wealth;
    let mut rollout = Rollout {
        nodes: vec![node],
        achieved: vec![wealth],
        surplus: vec![wealth - plan.values[node]],
    };
    for &mv in path {
        let pos = plan.position(node).expect("interior node has a position");
        let price = plan.params.price_unchecked(node);
        let next = node.step(mv);
        let cash = wealth - pos.shares * price;
        wealth = pos.shares * plan.params.price_unchecked(next) + cash * growth;
        node = next;
        rollout.nodes.push(node);
        rollout.achieved.push(wealth);
        rollout.surplus.push(wealth - plan.values[node]);
    }
    Ok(rollout)
}

//! The binomial market: one risky asset moving by a factor `u` or `d` each
//! period and a bank account paying `r` per period.
//!
//! Nodes live on a recombining lattice addressed by `(time, up_count)`. The
//! up-then-down and down-then-up paths reach the same asset price, so one
//! node stands for both.

use std::fmt;

use crate::error::{Error, Result};

/// One step of the asset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Move {
    Up,
    Down,
}

impl Move {
    pub fn symbol(self) -> char {
        match self {
            Move::Up => 'u',
            Move::Down => 'd',
        }
    }
}

/// Address of a node: `time` steps in, `up_count` of which were up-moves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId {
    pub time: usize,
    pub up_count: usize,
}

impl NodeId {
    pub const ROOT: NodeId = NodeId {
        time: 0,
        up_count: 0,
    };

    pub fn new(time: usize, up_count: usize) -> Self {
        Self { time, up_count }
    }

    pub fn up(self) -> Self {
        Self::new(self.time + 1, self.up_count + 1)
    }

    pub fn down(self) -> Self {
        Self::new(self.time + 1, self.up_count)
    }

    pub fn step(self, mv: Move) -> Self {
        match mv {
            Move::Up => self.up(),
            Move::Down => self.down(),
        }
    }

    /// Node reached from the root by following `path`.
    pub fn follow(path: &[Move]) -> Self {
        path.iter().fold(Self::ROOT, |node, &mv| node.step(mv))
    }

    pub fn is_valid(self) -> bool {
        self.up_count <= self.time
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.time, self.up_count)
    }
}

/// A value attached to every node of a recombining lattice with levels
/// `0..=last_time`. Level `n` holds `n + 1` entries indexed by up-count.
#[derive(Debug, Clone, PartialEq)]
pub struct Lattice<T> {
    levels: Vec<Vec<T>>,
}

impl<T> Lattice<T> {
    pub fn from_fn(last_time: usize, mut f: impl FnMut(NodeId) -> T) -> Self {
        let levels = (0..=last_time)
            .map(|n| (0..=n).map(|j| f(NodeId::new(n, j))).collect())
            .collect();
        Self { levels }
    }

    pub fn try_from_fn<E>(
        last_time: usize,
        mut f: impl FnMut(NodeId) -> std::result::Result<T, E>,
    ) -> std::result::Result<Self, E> {
        let mut levels = Vec::with_capacity(last_time + 1);
        for n in 0..=last_time {
            let mut level = Vec::with_capacity(n + 1);
            for j in 0..=n {
                level.push(f(NodeId::new(n, j))?);
            }
            levels.push(level);
        }
        Ok(Self { levels })
    }

    /// Builds a lattice from explicit levels; level `n` must have `n + 1`
    /// entries.
    pub fn from_levels(levels: Vec<Vec<T>>) -> Option<Self> {
        if levels.is_empty() || levels.iter().enumerate().any(|(n, l)| l.len() != n + 1) {
            return None;
        }
        Some(Self { levels })
    }

    pub fn last_time(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn get(&self, node: NodeId) -> Option<&T> {
        self.levels.get(node.time)?.get(node.up_count)
    }

    pub fn get_mut(&mut self, node: NodeId) -> Option<&mut T> {
        self.levels.get_mut(node.time)?.get_mut(node.up_count)
    }

    pub fn root(&self) -> &T {
        &self.levels[0][0]
    }

    pub fn level(&self, time: usize) -> &[T] {
        &self.levels[time]
    }

    /// Nodes ordered by time, then up-count descending (top-to-bottom when
    /// the tree is drawn with the root on the left).
    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.levels
            .iter()
            .enumerate()
            .flat_map(|(n, _)| (0..=n).rev().map(move |j| NodeId::new(n, j)))
    }

    pub fn iter(&self) -> impl Iterator<Item = (NodeId, &T)> + '_ {
        self.nodes().map(move |node| (node, &self[node]))
    }

    pub fn map<U>(&self, mut f: impl FnMut(NodeId, &T) -> U) -> Lattice<U> {
        Lattice::from_fn(self.last_time(), |node| f(node, &self[node]))
    }
}

impl<T> std::ops::Index<NodeId> for Lattice<T> {
    type Output = T;

    fn index(&self, node: NodeId) -> &T {
        &self.levels[node.time][node.up_count]
    }
}

impl<T> std::ops::IndexMut<NodeId> for Lattice<T> {
    fn index_mut(&mut self, node: NodeId) -> &mut T {
        &mut self.levels[node.time][node.up_count]
    }
}

/// Risk-neutral up-probability `q = (1 + r - d) / (u - d)`. Only exists for
/// arbitrage-free models, where it lies strictly inside (0, 1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiskNeutralQ(f64);

impl RiskNeutralQ {
    pub fn up(self) -> f64 {
        self.0
    }

    pub fn down(self) -> f64 {
        1.0 - self.0
    }

    /// `(q * up + (1 - q) * down) / growth`
    pub fn discounted_mean(self, up: f64, down: f64, growth: f64) -> f64 {
        (self.0 * up + (1.0 - self.0) * down) / growth
    }
}

/// A validated binomial market.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    s0: f64,
    u: f64,
    d: f64,
    r: f64,
    n_periods: usize,
    q: f64,
    arbitrage_free: bool,
}

impl ModelParams {
    /// Validates raw model fields.
    ///
    /// Rejects non-finite inputs, `s0 <= 0`, `u <= d`, `r <= -1` and
    /// `d <= 0` (a non-positive down factor drives the asset to zero or
    /// below).
    pub fn new(s0: f64, u: f64, d: f64, r: f64, n_periods: usize) -> Result<Self> {
        for (name, v) in [("s0", s0), ("u", u), ("d", d), ("r", r)] {
            if !v.is_finite() {
                return Err(Error::InvalidModel(format!(
                    "{name} must be finite, got {v}"
                )));
            }
        }
        if s0 <= 0.0 {
            return Err(Error::InvalidModel(format!(
                "s0 must be positive, got {s0}"
            )));
        }
        if r <= -1.0 {
            return Err(Error::InvalidModel(format!("r must exceed -1, got {r}")));
        }
        if u <= d {
            let detail = if u == d && d == 1.0 + r {
                " (constant asset with d = 1+r = u)"
            } else {
                ""
            };
            return Err(Error::InvalidModel(format!(
                "u must exceed d, got u={u}, d={d}{detail}"
            )));
        }
        if d <= 0.0 {
            return Err(Error::InvalidModel(format!("d must be positive, got {d}")));
        }
        let growth = 1.0 + r;
        Ok(Self {
            s0,
            u,
            d,
            r,
            n_periods,
            q: (growth - d) / (u - d),
            arbitrage_free: d < growth && growth < u,
        })
    }

    pub fn s0(&self) -> f64 {
        self.s0
    }

    pub fn u(&self) -> f64 {
        self.u
    }

    pub fn d(&self) -> f64 {
        self.d
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    /// One-period growth factor of the bank account, `1 + r`.
    pub fn growth(&self) -> f64 {
        1.0 + self.r
    }

    pub fn n_periods(&self) -> usize {
        self.n_periods
    }

    /// Raw `(1 + r - d) / (u - d)`; outside (0, 1) when the model admits
    /// arbitrage.
    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn arbitrage_free(&self) -> bool {
        self.arbitrage_free
    }

    /// Same market over a different horizon.
    pub fn with_periods(&self, n_periods: usize) -> Self {
        Self { n_periods, ..*self }
    }

    /// The risk-neutral measure, or the arbitrage witness when none exists.
    pub fn risk_neutral(&self) -> Result<RiskNeutralQ> {
        match find_arbitrage(self) {
            None => Ok(RiskNeutralQ(self.q)),
            Some(witness) => Err(Error::ArbitrageModel { witness }),
        }
    }

    pub fn contains(&self, node: NodeId) -> bool {
        node.is_valid() && node.time <= self.n_periods
    }

    pub fn check_node(&self, node: NodeId) -> Result<()> {
        if self.contains(node) {
            Ok(())
        } else {
            Err(Error::NodeOutOfRange {
                node,
                periods: self.n_periods,
            })
        }
    }

    /// `s0 * u^j * d^(n - j)` at node `(n, j)`.
    pub fn asset_price(&self, node: NodeId) -> Result<f64> {
        self.check_node(node)?;
        Ok(self.price_unchecked(node))
    }

    pub(crate) fn price_unchecked(&self, node: NodeId) -> f64 {
        self.s0
            * self.u.powi(node.up_count as i32)
            * self.d.powi((node.time - node.up_count) as i32)
    }

    /// Asset prices over the whole lattice.
    pub fn price_lattice(&self) -> Lattice<f64> {
        Lattice::from_fn(self.n_periods, |node| self.price_unchecked(node))
    }

    /// `(1 + r)^periods`
    pub fn compound(&self, periods: usize) -> f64 {
        self.growth().powi(periods as i32)
    }
}

/// A zero-cost one-period portfolio whose terminal values are both
/// non-negative and not both zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArbitrageWitness {
    pub shares: f64,
    pub bank: f64,
    pub up_value: f64,
    pub down_value: f64,
}

impl ArbitrageWitness {
    pub fn initial_cost(&self, s0: f64) -> f64 {
        self.shares * s0 + self.bank
    }

    pub fn is_valid(&self, s0: f64) -> bool {
        self.initial_cost(s0) == 0.0
            && self.up_value >= 0.0
            && self.down_value >= 0.0
            && self.up_value.max(self.down_value) > 0.0
    }
}

/// Returns `None` exactly when `0 < d < 1 + r < u`.
///
/// Otherwise buys one share on borrowed money when `d >= 1 + r`, or sells
/// one share short and banks the proceeds when `u <= 1 + r`.
pub fn find_arbitrage(params: &ModelParams) -> Option<ArbitrageWitness> {
    if params.arbitrage_free {
        return None;
    }
    let (s0, growth) = (params.s0, params.growth());
    let shares = if params.d >= growth { 1.0 } else { -1.0 };
    let bank = -shares * s0;
    Some(ArbitrageWitness {
        shares,
        bank,
        up_value: shares * params.u * s0 + bank * growth,
        down_value: shares * params.d * s0 + bank * growth,
    })
}

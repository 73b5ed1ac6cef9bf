//! Brute-force reference implementations on the full, non-recombining
//! binary tree.
//!
//! Nothing here touches the lattice recursion: prices are products of the
//! moves along each path, probabilities are products of `q` and `1 - q`,
//! and American values are maxima over explicitly enumerated stopping
//! rules. Depth is capped because the work is exponential.

use crate::error::{Error, Result};
use crate::model::{ModelParams, Move, NodeId};
use crate::pricing::{ExerciseStyle, OptionSpec};
use crate::replication::{FloorLattice, HedgePlan};

/// Deepest tree the path-enumerating oracles accept.
pub const MAX_PATH_DEPTH: usize = 14;
/// Deepest tree for stopping-rule enumeration (677 rules at depth 4, about
/// 458 000 at depth 5).
pub const MAX_STOPPING_DEPTH: usize = 4;

/// A path prefix: `depth` moves, bit `i` of `bits` set when move `i` was up.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Prefix {
    pub depth: usize,
    pub bits: u32,
}

impl Prefix {
    pub const ROOT: Prefix = Prefix { depth: 0, bits: 0 };

    pub fn child(self, mv: Move) -> Self {
        let bit = match mv {
            Move::Up => 1 << self.depth,
            Move::Down => 0,
        };
        Self {
            depth: self.depth + 1,
            bits: self.bits | bit,
        }
    }

    pub fn moves(self) -> Vec<Move> {
        (0..self.depth)
            .map(|i| {
                if self.bits >> i & 1 == 1 {
                    Move::Up
                } else {
                    Move::Down
                }
            })
            .collect()
    }

    pub fn from_moves(moves: &[Move]) -> Self {
        moves.iter().fold(Self::ROOT, |p, &mv| p.child(mv))
    }

    /// Lattice node this prefix lands on.
    pub fn node(self) -> NodeId {
        NodeId::new(self.depth, self.bits.count_ones() as usize)
    }

    pub fn is_prefix_of(self, other: Prefix) -> bool {
        self.depth <= other.depth && (other.bits & ((1u32 << self.depth) - 1)) == self.bits
    }

    /// Heap-order slot: all prefixes of depth `k` occupy `2^k - 1 .. 2^(k+1) - 1`.
    fn slot(self) -> usize {
        (1usize << self.depth) - 1 + self.bits as usize
    }
}

/// Asset price at every path prefix, `2^(N+1) - 1` entries.
#[derive(Debug, Clone, PartialEq)]
pub struct FullTree {
    depth: usize,
    prices: Vec<f64>,
}

impl FullTree {
    pub fn build(params: &ModelParams) -> Result<Self> {
        let depth = params.n_periods();
        guard(depth, MAX_PATH_DEPTH)?;
        let mut prices = vec![0.0; (1usize << (depth + 1)) - 1];
        prices[0] = params.s0();
        for prefix in prefixes(depth).filter(|p| p.depth < depth) {
            let s = prices[prefix.slot()];
            prices[prefix.child(Move::Up).slot()] = s * params.u();
            prices[prefix.child(Move::Down).slot()] = s * params.d();
        }
        Ok(Self { depth, prices })
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn len(&self) -> usize {
        self.prices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prices.is_empty()
    }

    pub fn price(&self, prefix: Prefix) -> f64 {
        self.prices[prefix.slot()]
    }
}

fn guard(depth: usize, limit: usize) -> Result<()> {
    if depth > limit {
        Err(Error::TreeTooDeep { depth, limit })
    } else {
        Ok(())
    }
}

/// Every prefix of depth `0..=depth`, shallowest first.
pub fn prefixes(depth: usize) -> impl Iterator<Item = Prefix> {
    (0..=depth).flat_map(|k| (0..1u32 << k).map(move |bits| Prefix { depth: k, bits }))
}

/// All `2^depth` complete paths.
pub fn all_paths(depth: usize) -> impl Iterator<Item = Vec<Move>> {
    (0..1u32 << depth).map(move |bits| Prefix { depth, bits }.moves())
}

/// Risk-neutral probability of reaching `prefix`, multiplied out move by move.
fn path_probability(q: f64, prefix: Prefix) -> f64 {
    prefix
        .moves()
        .iter()
        .map(|mv| match mv {
            Move::Up => q,
            Move::Down => 1.0 - q,
        })
        .product()
}

fn discount(params: &ModelParams, depth: usize) -> f64 {
    (0..depth).fold(1.0, |acc, _| acc / params.growth())
}

/// Exercise times on the full tree: an antichain of prefixes that every
/// complete path passes through exactly once.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StoppingRule {
    pub stops: Vec<Prefix>,
}

impl StoppingRule {
    pub fn is_well_formed(&self, depth: usize) -> bool {
        let antichain = self.stops.iter().enumerate().all(|(i, a)| {
            a.depth <= depth
                && self
                    .stops
                    .iter()
                    .enumerate()
                    .all(|(k, b)| i == k || !a.is_prefix_of(*b))
        });
        antichain
            && (0..1u32 << depth).all(|bits| {
                let leaf = Prefix { depth, bits };
                self.stops.iter().filter(|s| s.is_prefix_of(leaf)).count() == 1
            })
    }

    /// Discounted risk-neutral expectation of the payoff collected when the
    /// rule says stop.
    pub fn value(
        &self,
        params: &ModelParams,
        q: f64,
        tree: &FullTree,
        spec: &OptionSpec,
    ) -> Result<f64> {
        self.stops.iter().try_fold(0.0, |acc, &stop| {
            let payoff = spec.intrinsic(stop.node(), tree.price(stop))?;
            Ok(acc + path_probability(q, stop) * payoff * discount(params, stop.depth))
        })
    }
}

/// Every well-formed stopping rule on a tree of `depth` moves.
pub fn enumerate_stopping_rules(depth: usize) -> Result<Vec<StoppingRule>> {
    guard(depth, MAX_STOPPING_DEPTH)?;
    fn rules_from(prefix: Prefix, depth: usize) -> Vec<Vec<Prefix>> {
        let mut out = vec![vec![prefix]];
        if prefix.depth < depth {
            let ups = rules_from(prefix.child(Move::Up), depth);
            let downs = rules_from(prefix.child(Move::Down), depth);
            for up in &ups {
                for down in &downs {
                    out.push(up.iter().chain(down).copied().collect());
                }
            }
        }
        out
    }
    Ok(rules_from(Prefix::ROOT, depth)
        .into_iter()
        .map(|stops| StoppingRule { stops })
        .collect())
}

fn check_maturity(params: &ModelParams, spec: &OptionSpec) -> Result<()> {
    if spec.maturity() != params.n_periods() {
        return Err(Error::MaturityMismatch {
            option: spec.maturity(),
            model: params.n_periods(),
        });
    }
    Ok(())
}

/// Discounted risk-neutral expectation of the terminal payoff, summed over
/// all `2^N` paths.
pub fn oracle_european(params: &ModelParams, spec: &OptionSpec) -> Result<f64> {
    let q = params.risk_neutral()?.up();
    check_maturity(params, spec)?;
    let tree = FullTree::build(params)?;
    let depth = params.n_periods();
    let mut total = 0.0;
    for bits in 0..1u32 << depth {
        let leaf = Prefix { depth, bits };
        total += path_probability(q, leaf) * spec.intrinsic(leaf.node(), tree.price(leaf))?;
    }
    Ok(total * discount(params, depth))
}

/// Best stopping rule and its value.
pub fn oracle_american_with_rule(
    params: &ModelParams,
    spec: &OptionSpec,
) -> Result<(f64, StoppingRule)> {
    let q = params.risk_neutral()?.up();
    check_maturity(params, spec)?;
    let rules = enumerate_stopping_rules(params.n_periods())?;
    let tree = FullTree::build(params)?;
    let mut best: Option<(f64, StoppingRule)> = None;
    for rule in rules {
        let v = rule.value(params, q, &tree, spec)?;
        if best.as_ref().is_none_or(|(b, _)| v > *b) {
            best = Some((v, rule));
        }
    }
    Ok(best.expect("at least the stop-at-root rule exists"))
}

/// Maximum over every stopping rule of the discounted expected payoff.
pub fn oracle_american(params: &ModelParams, spec: &OptionSpec) -> Result<f64> {
    oracle_american_with_rule(params, spec).map(|(v, _)| v)
}

/// Minimal superhedge value at the root, recomputed on the full tree with
/// floors looked up by node.
pub fn oracle_superhedge(params: &ModelParams, floors: &FloorLattice) -> Result<f64> {
    let q = params.risk_neutral()?.up();
    let depth = params.n_periods();
    guard(depth, MAX_PATH_DEPTH)?;
    if floors.last_time() != depth {
        return Err(Error::FloorShapeMismatch {
            floors: floors.last_time(),
            model: depth,
        });
    }
    fn value(prefix: Prefix, depth: usize, q: f64, growth: f64, floors: &FloorLattice) -> f64 {
        let floor = floors.get(prefix.node());
        if prefix.depth == depth {
            return floor.expect("leaf floors are validated");
        }
        let up = value(prefix.child(Move::Up), depth, q, growth, floors);
        let down = value(prefix.child(Move::Down), depth, q, growth, floors);
        let cont = (q * up + (1.0 - q) * down) / growth;
        floor.map_or(cont, |f| f.max(cont))
    }
    Ok(value(Prefix::ROOT, depth, q, params.growth(), floors))
}

/// Runs `plan` along every path and returns the smallest gap between the
/// portfolio value and the floor reported by `floor_at` (which receives the
/// full-tree asset price).
pub fn replay_shortfall(
    params: &ModelParams,
    plan: &HedgePlan,
    mut floor_at: impl FnMut(NodeId, f64) -> Result<Option<f64>>,
) -> Result<f64> {
    let depth = params.n_periods();
    if plan.params().n_periods() != depth {
        return Err(Error::PathLengthMismatch {
            expected: plan.params().n_periods(),
            got: depth,
        });
    }
    let tree = FullTree::build(params)?;
    let growth = params.growth();
    let mut worst = f64::INFINITY;
    for bits in 0..1u32 << depth {
        let mut prefix = Prefix::ROOT;
        let mut wealth = plan.initial_wealth();
        for step in 0..=depth {
            let price = tree.price(prefix);
            if let Some(floor) = floor_at(prefix.node(), price)? {
                worst = worst.min(wealth - floor);
            }
            if step == depth {
                break;
            }
            let pos = plan
                .position(prefix.node())
                .expect("interior node has a position");
            let mv = if bits >> step & 1 == 1 {
                Move::Up
            } else {
                Move::Down
            };
            let next = prefix.child(mv);
            wealth = pos.shares * tree.price(next) + (wealth - pos.shares * price) * growth;
            prefix = next;
        }
    }
    Ok(worst)
}

/// Worst value-minus-payoff over every path and every node where the
/// holder may exercise (every node for American options, maturity for
/// European ones). A valid hedge returns a non-negative number up to
/// rounding.
pub fn oracle_hedge_replay(
    params: &ModelParams,
    plan: &HedgePlan,
    spec: &OptionSpec,
) -> Result<f64> {
    if spec.maturity() != params.n_periods() {
        return Err(Error::PathLengthMismatch {
            expected: params.n_periods(),
            got: spec.maturity(),
        });
    }
    let depth = params.n_periods();
    let american = spec.style() == ExerciseStyle::American;
    replay_shortfall(params, plan, |node, price| {
        if american || node.time == depth {
            spec.intrinsic(node, price).map(Some)
        } else {
            Ok(None)
        }
    })
}

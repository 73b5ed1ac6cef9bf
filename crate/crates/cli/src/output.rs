//! Emitted documents: JSON for machines, comma-separated tables for
//! spreadsheets, and a small ASCII tree for shallow lattices.
//!
//! Floats are written with Rust's shortest round-trip formatting, so parsing
//! an emitted document recovers the exact values.

use std::fmt::Write as _;

use binopt::analytics::CheckReport;
use binopt::optimization::{Binding, OptimalPortfolio};
use binopt::pricing::{ExerciseAdvice, FairValueReport, Recommendation};
use binopt::{HedgePlan, Lattice, ModelParams, NodeId, ValueLattice};
use serde::{Deserialize, Serialize};

/// Largest lattice drawn as a tree; deeper ones fall back to a table.
pub const MAX_TREE_PERIODS: usize = 5;

const LATTICE_HEADER: &str = "time,up_count,asset_price,value,exercise_flag";
const HEDGE_HEADER: &str = "time,up_count,asset_price,value,shares,bank";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeRow {
    pub time: usize,
    pub up_count: usize,
    pub asset_price: f64,
    pub value: f64,
    pub exercise_flag: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FairValueDocument {
    pub p: f64,
    pub q_price: f64,
    pub p_price: f64,
    pub fair_value: f64,
}

impl From<FairValueReport> for FairValueDocument {
    fn from(r: FairValueReport) -> Self {
        Self {
            p: r.p,
            q_price: r.q_price,
            p_price: r.p_price,
            fair_value: r.fair_value,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeDocument {
    pub root_price: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fair_value: Option<FairValueDocument>,
    pub nodes: Vec<LatticeRow>,
}

impl LatticeDocument {
    pub fn new(params: &ModelParams, lattice: &ValueLattice) -> Self {
        let prices = params.price_lattice();
        let nodes = lattice
            .values
            .iter()
            .map(|(node, &value)| LatticeRow {
                time: node.time,
                up_count: node.up_count,
                asset_price: prices[node],
                value,
                exercise_flag: lattice.exercise_flag(node),
            })
            .collect();
        Self {
            root_price: lattice.root(),
            fair_value: None,
            nodes,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("lattice documents serialize") + "\n"
    }

    pub fn from_json(text: &str) -> Result<Self, String> {
        serde_json::from_str(text).map_err(|e| e.to_string())
    }

    pub fn to_table(&self) -> String {
        let mut out = format!("# root_price {}\n", self.root_price);
        if let Some(fv) = &self.fair_value {
            writeln!(
                out,
                "# fair_value p={} q_price={} p_price={} fair_value={}",
                fv.p, fv.q_price, fv.p_price, fv.fair_value
            )
            .unwrap();
        }
        out.push_str(LATTICE_HEADER);
        out.push('\n');
        for row in &self.nodes {
            writeln!(
                out,
                "{},{},{},{},{}",
                row.time, row.up_count, row.asset_price, row.value, row.exercise_flag
            )
            .unwrap();
        }
        out
    }

    pub fn from_table(text: &str) -> Result<Self, String> {
        let mut root_price = None;
        let mut fair_value = None;
        let mut nodes = Vec::new();
        let mut seen_header = false;
        for (i, line) in text.lines().enumerate() {
            let line_no = i + 1;
            if let Some(rest) = line.strip_prefix("# root_price ") {
                root_price = Some(parse_f64(rest, line_no)?);
            } else if let Some(rest) = line.strip_prefix("# fair_value ") {
                let get = |key: &str| -> Result<f64, String> {
                    rest.split_whitespace()
                        .find_map(|kv| kv.strip_prefix(key).and_then(|v| v.strip_prefix('=')))
                        .ok_or_else(|| format!("line {line_no}: missing {key}"))
                        .and_then(|v| parse_f64(v, line_no))
                };
                fair_value = Some(FairValueDocument {
                    p: get("p")?,
                    q_price: get("q_price")?,
                    p_price: get("p_price")?,
                    fair_value: get("fair_value")?,
                });
            } else if line == LATTICE_HEADER {
                seen_header = true;
            } else if !line.trim().is_empty() {
                if !seen_header {
                    return Err(format!("line {line_no}: row before header"));
                }
                let cols: Vec<&str> = line.split(',').collect();
                if cols.len() != 5 {
                    return Err(format!(
                        "line {line_no}: expected 5 columns, got {}",
                        cols.len()
                    ));
                }
                nodes.push(LatticeRow {
                    time: parse_usize(cols[0], line_no)?,
                    up_count: parse_usize(cols[1], line_no)?,
                    asset_price: parse_f64(cols[2], line_no)?,
                    value: parse_f64(cols[3], line_no)?,
                    exercise_flag: cols[4]
                        .parse()
                        .map_err(|_| format!("line {line_no}: bad flag '{}'", cols[4]))?,
                });
            }
        }
        let root_price = root_price.ok_or("missing '# root_price' line")?;
        Ok(Self {
            root_price,
            fair_value,
            nodes,
        })
    }

    /// Rows as a value lattice, or `None` if rows are missing or out of
    /// order.
    pub fn values(&self) -> Option<Lattice<f64>> {
        rows_to_lattice(self.nodes.iter().map(|r| (r.time, r.up_count, r.value)))
    }

    pub fn to_tree(&self) -> String {
        match self.values() {
            Some(values) if values.last_time() <= MAX_TREE_PERIODS => {
                format!("root price {}\n{}", self.root_price, render_tree(&values))
            }
            _ => self.to_table(),
        }
    }
}

fn rows_to_lattice(rows: impl Iterator<Item = (usize, usize, f64)>) -> Option<Lattice<f64>> {
    let mut levels: Vec<Vec<Option<f64>>> = Vec::new();
    for (n, j, v) in rows {
        if levels.len() <= n {
            levels.resize_with(n + 1, Vec::new);
        }
        let level = &mut levels[n];
        if level.len() <= j {
            level.resize(j + 1, None);
        }
        level[j] = Some(v);
    }
    let levels = levels
        .into_iter()
        .map(|l| l.into_iter().collect::<Option<Vec<f64>>>())
        .collect::<Option<Vec<_>>>()?;
    Lattice::from_levels(levels)
}

fn parse_f64(s: &str, line: usize) -> Result<f64, String> {
    s.trim()
        .parse()
        .map_err(|_| format!("line {line}: bad number '{s}'"))
}

fn parse_usize(s: &str, line: usize) -> Result<usize, String> {
    s.trim()
        .parse()
        .map_err(|_| format!("line {line}: bad integer '{s}'"))
}

/// Root on the left, leaves on the right, most up-moves at the top.
pub fn render_tree(values: &Lattice<f64>) -> String {
    let last = values.last_time();
    let width = 12;
    let mut grid = vec![vec![String::new(); last + 1]; 2 * last + 1];
    for (node, v) in values.iter() {
        // vertical offset from the root row
        let row = last + node.time - 2 * node.up_count;
        grid[row][node.time] = format!("{v:.4}");
    }
    let mut out = String::new();
    for n in 0..=last {
        write!(out, "{:<width$}", format!("n={n}")).unwrap();
    }
    out.push('\n');
    for row in grid {
        let line: String = row.iter().map(|c| format!("{c:<width$}")).collect();
        out.push_str(line.trim_end());
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HedgeRow {
    pub time: usize,
    pub up_count: usize,
    pub asset_price: f64,
    pub value: f64,
    /// Absent at maturity, where nothing is held forward.
    pub shares: Option<f64>,
    pub bank: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplaySummary {
    pub paths: u64,
    pub worst_shortfall: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HedgeDocument {
    pub root_value: f64,
    pub nodes: Vec<HedgeRow>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub replay: Option<ReplaySummary>,
}

impl HedgeDocument {
    pub fn new(plan: &HedgePlan, replay: Option<ReplaySummary>) -> Self {
        let prices = plan.params().price_lattice();
        let nodes = plan
            .value_lattice()
            .iter()
            .map(|(node, &value)| {
                let pos = plan.position(node);
                HedgeRow {
                    time: node.time,
                    up_count: node.up_count,
                    asset_price: prices[node],
                    value,
                    shares: pos.map(|p| p.shares),
                    bank: pos.map(|p| p.bank),
                }
            })
            .collect();
        Self {
            root_value: plan.root_value(),
            nodes,
            replay,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("hedge documents serialize") + "\n"
    }

    pub fn from_json(text: &str) -> Result<Self, String> {
        serde_json::from_str(text).map_err(|e| e.to_string())
    }

    pub fn to_table(&self) -> String {
        let mut out = format!("# root_value {}\n", self.root_value);
        if let Some(r) = &self.replay {
            writeln!(
                out,
                "# replay paths={} worst_shortfall={}",
                r.paths, r.worst_shortfall
            )
            .unwrap();
        }
        out.push_str(HEDGE_HEADER);
        out.push('\n');
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        for row in &self.nodes {
            writeln!(
                out,
                "{},{},{},{},{},{}",
                row.time,
                row.up_count,
                row.asset_price,
                row.value,
                opt(row.shares),
                opt(row.bank)
            )
            .unwrap();
        }
        out
    }

    pub fn from_table(text: &str) -> Result<Self, String> {
        let mut root_value = None;
        let mut replay = None;
        let mut nodes = Vec::new();
        let mut seen_header = false;
        for (i, line) in text.lines().enumerate() {
            let line_no = i + 1;
            if let Some(rest) = line.strip_prefix("# root_value ") {
                root_value = Some(parse_f64(rest, line_no)?);
            } else if let Some(rest) = line.strip_prefix("# replay ") {
                let mut paths = None;
                let mut worst = None;
                for kv in rest.split_whitespace() {
                    match kv.split_once('=') {
                        Some(("paths", v)) => {
                            paths = Some(
                                v.parse()
                                    .map_err(|_| format!("line {line_no}: bad paths"))?,
                            )
                        }
                        Some(("worst_shortfall", v)) => worst = Some(parse_f64(v, line_no)?),
                        _ => return Err(format!("line {line_no}: unexpected '{kv}'")),
                    }
                }
                replay = Some(ReplaySummary {
                    paths: paths.ok_or(format!("line {line_no}: missing paths"))?,
                    worst_shortfall: worst
                        .ok_or(format!("line {line_no}: missing worst_shortfall"))?,
                });
            } else if line == HEDGE_HEADER {
                seen_header = true;
            } else if !line.trim().is_empty() {
                if !seen_header {
                    return Err(format!("line {line_no}: row before header"));
                }
                let cols: Vec<&str> = line.split(',').collect();
                if cols.len() != 6 {
                    return Err(format!(
                        "line {line_no}: expected 6 columns, got {}",
                        cols.len()
                    ));
                }
                let opt = |s: &str| -> Result<Option<f64>, String> {
                    if s.is_empty() {
                        Ok(None)
                    } else {
                        parse_f64(s, line_no).map(Some)
                    }
                };
                nodes.push(HedgeRow {
                    time: parse_usize(cols[0], line_no)?,
                    up_count: parse_usize(cols[1], line_no)?,
                    asset_price: parse_f64(cols[2], line_no)?,
                    value: parse_f64(cols[3], line_no)?,
                    shares: opt(cols[4])?,
                    bank: opt(cols[5])?,
                });
            }
        }
        let root_value = root_value.ok_or("missing '# root_value' line")?;
        Ok(Self {
            root_value,
            nodes,
            replay,
        })
    }

    pub fn values(&self) -> Option<Lattice<f64>> {
        rows_to_lattice(self.nodes.iter().map(|r| (r.time, r.up_count, r.value)))
    }
}

fn node_json(node: NodeId) -> serde_json::Value {
    serde_json::json!({ "time": node.time, "up_count": node.up_count })
}

pub fn recommendation_name(r: Recommendation) -> &'static str {
    match r {
        Recommendation::Exercise => "exercise",
        Recommendation::Hold => "hold",
        Recommendation::Indifferent => "indifferent",
    }
}

pub fn advice_json(a: &ExerciseAdvice) -> String {
    let doc = serde_json::json!({
        "node": node_json(a.node),
        "intrinsic": a.intrinsic,
        "bank_benchmark": a.bank_benchmark,
        "option_value": a.option_value,
        "recommendation": recommendation_name(a.recommendation),
    });
    serde_json::to_string_pretty(&doc).unwrap() + "\n"
}

pub fn advice_text(a: &ExerciseAdvice) -> String {
    format!(
        "node {}\nintrinsic {}\nbank_benchmark {}\noption_value {}\nrecommendation {}\n",
        a.node,
        a.intrinsic,
        a.bank_benchmark,
        a.option_value,
        recommendation_name(a.recommendation)
    )
}

fn binding_name(b: Binding) -> &'static str {
    match b {
        Binding::Up => "up",
        Binding::Down => "down",
        Binding::None => "none",
    }
}

pub fn portfolio_json(p: &OptimalPortfolio) -> String {
    let doc = serde_json::json!({
        "shares": p.shares,
        "bank": p.bank,
        "up_value": p.up_value,
        "down_value": p.down_value,
        "objective": p.objective,
        "binding_constraint": binding_name(p.binding),
    });
    serde_json::to_string_pretty(&doc).unwrap() + "\n"
}

pub fn portfolio_text(p: &OptimalPortfolio) -> String {
    format!(
        "shares {}\nbank {}\nup_value {}\ndown_value {}\nobjective {}\nbinding_constraint {}\n",
        p.shares,
        p.bank,
        p.up_value,
        p.down_value,
        p.objective,
        binding_name(p.binding)
    )
}

pub fn reports_json(reports: &[CheckReport]) -> String {
    let docs: Vec<_> = reports
        .iter()
        .map(|r| {
            let violations: Vec<_> = r
                .violations
                .iter()
                .map(|(node, v)| {
                    serde_json::json!({ "time": node.time, "up_count": node.up_count, "violation": v })
                })
                .collect();
            serde_json::json!({
                "name": r.name,
                "passed": r.passed,
                "tolerance": r.tolerance,
                "worst_violation": r.worst_violation,
                "worst_node": node_json(r.worst_node),
                "violations": violations,
            })
        })
        .collect();
    serde_json::to_string_pretty(&docs).unwrap() + "\n"
}

pub fn reports_text(reports: &[CheckReport]) -> String {
    reports
        .iter()
        .map(|r| {
            format!(
                "{:<16} {} worst_violation={:e} at {} (tolerance {:e})\n",
                r.name,
                if r.passed { "PASS" } else { "FAIL" },
                r.worst_violation,
                r.worst_node,
                r.tolerance
            )
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tree_places_root_mid_left() {
        let values = Lattice::from_fn(1, |n| n.up_count as f64 + n.time as f64);
        let tree = render_tree(&values);
        let lines: Vec<_> = tree.lines().collect();
        assert_eq!(lines.len(), 4);
        assert!(lines[1].trim_start().starts_with("2.0000"));
        assert!(lines[2].starts_with("0.0000"));
        assert!(lines[3].trim_start().starts_with("1.0000"));
    }

    #[test]
    fn table_rejects_malformed_rows() {
        let text = "# root_price 1\ntime,up_count,asset_price,value,exercise_flag\n0,0,1,1\n";
        assert!(LatticeDocument::from_table(text)
            .unwrap_err()
            .contains("line 3"));
        assert!(LatticeDocument::from_table("0,0,1,1,false\n").is_err());
    }
}

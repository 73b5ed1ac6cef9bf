//! Model and option documents (TOML). Numeric fields accept integers,
//! decimals, or fractions written as strings such as `"5/2"`.

use std::path::Path;

use binopt::{ExerciseStyle, ModelParams, Move, NodeId, OptionSpec, PayoffTable};
use serde::Deserialize;

use crate::CliError;

/// A number as written in a document.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum Number {
    Int(i64),
    Float(f64),
    Text(String),
}

impl Number {
    pub fn value(&self) -> Result<f64, String> {
        match self {
            Number::Int(i) => Ok(*i as f64),
            Number::Float(f) => Ok(*f),
            Number::Text(s) => parse_number(s),
        }
    }
}

/// Parses `"3"`, `"-0.25"`, `"1e-3"` or `"5/2"`.
pub fn parse_number(text: &str) -> Result<f64, String> {
    let text = text.trim();
    let parse = |s: &str| -> Result<f64, String> {
        let s = s.trim();
        s.parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| format!("'{s}' is not a finite number"))
    };
    match text.split_once('/') {
        Some((num, den)) => {
            let (num, den) = (parse(num)?, parse(den)?);
            if den == 0.0 {
                return Err(format!("'{text}' divides by zero"));
            }
            Ok(num / den)
        }
        None => parse(text),
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelDocument {
    pub s0: Number,
    pub u: Number,
    pub d: Number,
    pub r: Number,
    pub periods: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KindField {
    Call,
    Put,
    Custom,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StyleField {
    European,
    American,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PayoffEntry {
    pub time: usize,
    pub up_count: usize,
    pub value: Number,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptionDocument {
    pub kind: KindField,
    pub style: StyleField,
    pub strike: Option<Number>,
    #[serde(default)]
    pub payoff: Vec<PayoffEntry>,
}

fn input_error(file: &str, message: impl Into<String>) -> CliError {
    CliError::Input {
        file: file.to_string(),
        message: message.into(),
    }
}

fn field(file: &str, name: &str, n: &Number) -> Result<f64, CliError> {
    n.value()
        .map_err(|e| input_error(file, format!("field `{name}`: {e}")))
}

pub fn read_file(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path)
        .map_err(|e| input_error(&path.display().to_string(), format!("cannot read: {e}")))
}

/// Parses and validates a model document. `file` only labels errors.
pub fn parse_model(text: &str, file: &str) -> Result<ModelParams, CliError> {
    let doc: ModelDocument = toml::from_str(text).map_err(|e| input_error(file, e.to_string()))?;
    let params = ModelParams::new(
        field(file, "s0", &doc.s0)?,
        field(file, "u", &doc.u)?,
        field(file, "d", &doc.d)?,
        field(file, "r", &doc.r)?,
        doc.periods,
    );
    params.map_err(|e| input_error(file, e.to_string()))
}

/// Parses an option document maturing at `maturity`.
pub fn parse_option(text: &str, file: &str, maturity: usize) -> Result<OptionSpec, CliError> {
    let doc: OptionDocument = toml::from_str(text).map_err(|e| input_error(file, e.to_string()))?;
    let style = match doc.style {
        StyleField::European => ExerciseStyle::European,
        StyleField::American => ExerciseStyle::American,
    };
    let spec = match doc.kind {
        KindField::Call | KindField::Put => {
            if !doc.payoff.is_empty() {
                return Err(input_error(
                    file,
                    "field `payoff`: only allowed for kind = \"custom\"",
                ));
            }
            let strike = doc
                .strike
                .as_ref()
                .ok_or_else(|| input_error(file, "field `strike`: required for calls and puts"))?;
            let strike = field(file, "strike", strike)?;
            if doc.kind == KindField::Call {
                OptionSpec::call(style, strike, maturity)
            } else {
                OptionSpec::put(style, strike, maturity)
            }
        }
        KindField::Custom => {
            if doc.strike.is_some() {
                return Err(input_error(
                    file,
                    "field `strike`: not used by custom payoffs",
                ));
            }
            let mut table = PayoffTable::new();
            for (i, entry) in doc.payoff.iter().enumerate() {
                let node = NodeId::new(entry.time, entry.up_count);
                if !node.is_valid() || node.time > maturity {
                    return Err(input_error(
                        file,
                        format!("field `payoff[{i}]`: node {node} is outside a {maturity}-period lattice"),
                    ));
                }
                let value = field(file, &format!("payoff[{i}].value"), &entry.value)?;
                if table.insert(node, value).is_some() {
                    return Err(input_error(
                        file,
                        format!("field `payoff[{i}]`: duplicate node {node}"),
                    ));
                }
            }
            OptionSpec::custom(style, table, maturity)
        }
    };
    spec.map_err(|e| input_error(file, e.to_string()))
}

/// Parses `u,d,u`; an empty string is the empty path.
pub fn parse_path(text: &str) -> Result<Vec<Move>, CliError> {
    let text = text.trim();
    if text.is_empty() {
        return Ok(Vec::new());
    }
    text.split(',')
        .map(|token| match token.trim().to_ascii_lowercase().as_str() {
            "u" | "up" => Ok(Move::Up),
            "d" | "down" => Ok(Move::Down),
            other => Err(CliError::Usage(format!(
                "--path: unrecognised move '{other}' (expected u or d)"
            ))),
        })
        .collect()
}

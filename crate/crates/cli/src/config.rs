//! Market description shared by every command.
//!
//! Two file formats carry the same keys. The flat format has one
//! `key = value` pair per line, `#` starts a comment, and values use JSON
//! syntax:
//!
//! ```text
//! # asymmetric example
//! v  = 10
//! c  = 1
//! d  = 3
//! q1 = [0.45, 0.1, 0.4, 0.05]
//! q2 = [0.2, 0.2, 0.45, 0.15]
//! ```
//!
//! A list may also be written without brackets (`q1 = 0.5, 0.5`). Random
//! demand replaces `d` with `demand_weights = [[3, 0.5], [4, 0.5]]`, pairs of
//! demand and probability. A file whose first non-blank character is `{` is
//! read as a JSON object with the same keys.

use std::collections::BTreeMap;
use std::path::Path;

use duopoly_core::model::{AvailabilityDistribution, DemandModel, MarketConfig};
use duopoly_core::oligopoly::OligopolyConfig;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{CliError, CliResult};

const KEYS: [&str; 7] = ["d", "demand_weights", "v", "c", "q1", "q2", "n"];

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarketSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub demand_weights: Option<Vec<(usize, f64)>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q1: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q2: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
}

impl MarketSpec {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
        Self::parse(&text).map_err(|m| CliError::config(format!("{}: {m}", path.display())))
    }

    /// Parses either format; the error names the line and the field.
    pub fn parse(text: &str) -> Result<Self, String> {
        if text.trim_start().starts_with('{') {
            serde_json::from_str(text)
                .map_err(|e| format!("line {}, column {}: {e}", e.line(), e.column()))
        } else {
            parse_flat(text)
        }
    }

    /// Fields set in `other` replace ours.
    pub fn merge(mut self, other: MarketSpec) -> Self {
        macro_rules! take {
            ($($f:ident),*) => { $( if other.$f.is_some() { self.$f = other.$f; } )* };
        }
        take!(d, demand_weights, v, c, q1, q2, n);
        self
    }

    fn prices(&self) -> CliResult<(f64, f64)> {
        let v = self
            .v
            .ok_or_else(|| CliError::config("missing field `v`"))?;
        let c = self
            .c
            .ok_or_else(|| CliError::config("missing field `c`"))?;
        Ok((v, c))
    }

    fn availability(&self, field: &str, q: &[f64]) -> CliResult<AvailabilityDistribution<f64>> {
        AvailabilityDistribution::new(q.to_vec())
            .map_err(|e| CliError::config(format!("field `{field}`: {e}")))
    }

    fn demand(&self) -> CliResult<DemandModel<f64>> {
        match (&self.d, &self.demand_weights) {
            (Some(_), Some(_)) => Err(CliError::config(
                "fields `d` and `demand_weights` are mutually exclusive",
            )),
            (Some(d), None) => DemandModel::deterministic(*d)
                .map_err(|e| CliError::config(format!("field `d`: {e}"))),
            (None, Some(w)) => DemandModel::random(w.clone())
                .map_err(|e| CliError::config(format!("field `demand_weights`: {e}"))),
            (None, None) => Err(CliError::config("missing field `d` or `demand_weights`")),
        }
    }

    /// Two-seller market; `q2` defaults to `q1`.
    pub fn market(&self) -> CliResult<MarketConfig<f64>> {
        if self.n.is_some_and(|n| n != 2) {
            return Err(CliError::config(
                "field `n`: the duopoly commands need n = 2 (use `oligopoly` for more sellers)",
            ));
        }
        let q1 = self
            .q1
            .as_ref()
            .ok_or_else(|| CliError::config("missing field `q1`"))?;
        let a = self.availability("q1", q1)?;
        let b = match &self.q2 {
            Some(q2) => self.availability("q2", q2)?,
            None => a.clone(),
        };
        let (v, c) = self.prices()?;
        Ok(MarketConfig::new(self.demand()?, v, c, a, b)?)
    }

    /// Symmetric oligopoly; `d` defaults to `max(n, m)`.
    pub fn oligopoly(&self) -> CliResult<OligopolyConfig<f64>> {
        let n = self
            .n
            .ok_or_else(|| CliError::config("missing field `n`"))?;
        if self.demand_weights.is_some() {
            return Err(CliError::config(
                "field `demand_weights`: the oligopoly heuristic needs a fixed demand `d`",
            ));
        }
        let q1 = self
            .q1
            .as_ref()
            .ok_or_else(|| CliError::config("missing field `q1`"))?;
        if self.q2.as_ref().is_some_and(|q2| q2 != q1) {
            return Err(CliError::config(
                "field `q2`: the oligopoly heuristic assumes identical sellers",
            ));
        }
        let q = self.availability("q1", q1)?;
        let d = self.d.unwrap_or_else(|| n.max(q.max_level()));
        let (v, c) = self.prices()?;
        Ok(OligopolyConfig::new(n, q, d, v, c)?)
    }
}

fn parse_flat(text: &str) -> Result<MarketSpec, String> {
    let mut seen: BTreeMap<&str, usize> = BTreeMap::new();
    let mut spec = MarketSpec::default();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let (key, value) = body
            .split_once('=')
            .ok_or_else(|| format!("line {line}: expected `key = value`, found `{body}`"))?;
        let key = key.trim();
        let Some(&key) = KEYS.iter().find(|k| **k == key) else {
            return Err(format!(
                "line {line}: unknown field `{key}` (expected one of {})",
                KEYS.join(", ")
            ));
        };
        if let Some(first) = seen.insert(key, line) {
            return Err(format!(
                "line {line}: field `{key}` already set on line {first}"
            ));
        }
        let value = value.trim();
        let json: Value = serde_json::from_str(value)
            .or_else(|_| serde_json::from_str(&format!("[{value}]")))
            .map_err(|_| format!("line {line}: field `{key}`: cannot read value `{value}`"))?;
        let at =
            |what: &str| format!("line {line}: field `{key}`: expected {what}, found `{value}`");
        match key {
            "d" => spec.d = Some(typed(json, || at("a nonnegative integer"))?),
            "n" => spec.n = Some(typed(json, || at("a positive integer"))?),
            "v" => spec.v = Some(typed(json, || at("a number"))?),
            "c" => spec.c = Some(typed(json, || at("a number"))?),
            "q1" => spec.q1 = Some(typed(json, || at("a list of probabilities"))?),
            "q2" => spec.q2 = Some(typed(json, || at("a list of probabilities"))?),
            "demand_weights" => {
                spec.demand_weights =
                    Some(typed(json, || at("a list of [demand, probability] pairs"))?)
            }
            _ => unreachable!("key list and match arms agree"),
        }
    }
    Ok(spec)
}

fn typed<T: DeserializeOwned>(json: Value, err: impl FnOnce() -> String) -> Result<T, String> {
    serde_json::from_value(json).map_err(|_| err())
}

/// `0.2,0.3,0.5` from the command line.
pub fn parse_list(s: &str) -> Result<Vec<f64>, String> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| format!("`{}` is not a number", t.trim()))
        })
        .collect()
}

/// `3:0.5,4:0.5` from the command line.
pub fn parse_weights(s: &str) -> Result<Vec<(usize, f64)>, String> {
    s.split(',')
        .map(|t| {
            let (d, w) = t
                .split_once(':')
                .ok_or_else(|| format!("`{}` is not `demand:probability`", t.trim()))?;
            let d = d
                .trim()
                .parse()
                .map_err(|_| format!("`{}` is not a demand", d.trim()))?;
            let w = w
                .trim()
                .parse()
                .map_err(|_| format!("`{}` is not a probability", w.trim()))?;
            Ok((d, w))
        })
        .collect()
}

use std::io::Write;
use std::path::PathBuf;

use clap::ValueEnum;
use duopoly_core::model::{CdfPiece, StrategyProfile};
use duopoly_core::Seller;
use serde::Serialize;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// Where and how a command writes its result.
#[derive(Debug, Clone)]
pub struct Sink {
    pub out: Option<PathBuf>,
    pub format: Format,
    pub timestamp: bool,
}

impl Sink {
    fn emit(&self, bytes: &[u8]) -> CliResult<()> {
        match &self.out {
            Some(path) => std::fs::write(path, bytes)
                .map_err(|e| CliError::config(format!("cannot write {}: {e}", path.display()))),
            None => std::io::stdout()
                .write_all(bytes)
                .map_err(|e| CliError::config(format!("cannot write to stdout: {e}"))),
        }
    }

    pub fn json<S: Serialize>(&self, value: &S) -> CliResult<()> {
        let mut text = if self.timestamp {
            let mut v = serde_json::to_value(value).map_err(internal)?;
            if let Some(obj) = v.as_object_mut() {
                let secs = std::time::SystemTime::now()
                    .duration_since(std::time::UNIX_EPOCH)
                    .map(|d| d.as_secs())
                    .unwrap_or(0);
                obj.insert("generated_unix".into(), secs.into());
            }
            serde_json::to_string_pretty(&v)
        } else {
            serde_json::to_string_pretty(value)
        }
        .map_err(internal)?;
        text.push('\n');
        self.emit(text.as_bytes())
    }

    pub fn csv(&self, header: &[&str], rows: &[Vec<String>]) -> CliResult<()> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(header).map_err(internal)?;
        for r in rows {
            w.write_record(r).map_err(internal)?;
        }
        let bytes = w.into_inner().map_err(|e| internal(e.error()))?;
        self.emit(&bytes)
    }

    /// Writes `value` as JSON or the table as CSV, per the chosen format.
    pub fn write<S: Serialize>(
        &self,
        value: &S,
        header: &[&str],
        rows: &[Vec<String>],
    ) -> CliResult<()> {
        match self.format {
            Format::Json => self.json(value),
            Format::Csv => self.csv(header, rows),
        }
    }
}

fn internal(e: impl std::fmt::Display) -> CliError {
    CliError::Numeric(format!("serialization: {e}"))
}

/// Shortest text that reads back to the same `f64`, with an exponent for
/// very small or large magnitudes.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}

pub fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

pub fn seller(k: Seller) -> String {
    (k.index() + 1).to_string()
}

pub const PROFILE_HEADER: [&str; 11] = [
    "equilibrium",
    "seller",
    "level",
    "piece",
    "kind",
    "lo",
    "hi",
    "alpha",
    "beta",
    "gamma",
    "atom_at_v",
];

/// One row per CDF piece, or one `cap` row for a level priced at `v`.
pub fn profile_rows(eq: usize, profile: &StrategyProfile<f64>, rows: &mut Vec<Vec<String>>) {
    for k in Seller::BOTH {
        let s = profile.strategy(k);
        for l in 1..=s.max_level() {
            let level = s.level(l);
            let lead = |piece: String, kind: &str| {
                vec![
                    eq.to_string(),
                    seller(k),
                    l.to_string(),
                    piece,
                    kind.to_string(),
                ]
            };
            if level.is_at_cap() {
                let mut r = lead(String::new(), "cap");
                r.extend([
                    num(s.v),
                    num(s.v),
                    String::new(),
                    String::new(),
                    String::new(),
                ]);
                r.push(num(level.atom_at_v));
                rows.push(r);
                continue;
            }
            for (j, p) in level.pieces.iter().enumerate() {
                let mut r = match p {
                    CdfPiece::Hyperbolic(seg) => {
                        let mut r = lead(j.to_string(), "hyperbolic");
                        r.extend([seg.lo, seg.hi, seg.alpha, seg.beta, seg.gamma].map(num));
                        r
                    }
                    CdfPiece::Tabulated(_) => {
                        let mut r = lead(j.to_string(), "tabulated");
                        r.extend([
                            num(p.lo()),
                            num(p.hi()),
                            String::new(),
                            String::new(),
                            String::new(),
                        ]);
                        r
                    }
                };
                r.push(num(level.atom_at_v));
                rows.push(r);
            }
        }
    }
}

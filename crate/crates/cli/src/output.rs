use std::fs::File;
use std::io::Write;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use swipt_core::{RECurve, StrategyKind};

pub const CSV_HEADER: &str = "strategy,ebar_uW,avg_rate_bits,avg_energy_uW,feasible_fraction,trials";

/// One averaged point of one strategy's curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub strategy: StrategyKind,
    #[serde(rename = "ebar_uW")]
    pub ebar_uw: f64,
    pub avg_rate_bits: f64,
    #[serde(rename = "avg_energy_uW")]
    pub avg_energy_uw: f64,
    pub feasible_fraction: f64,
    pub trials: usize,
}

pub fn rows_from_curves(curves: &[RECurve]) -> Vec<ResultRow> {
    curves
        .iter()
        .flat_map(|c| {
            c.points.iter().map(|p| ResultRow {
                strategy: c.strategy,
                ebar_uw: p.ebar,
                avg_rate_bits: p.rate,
                avg_energy_uw: p.energy,
                feasible_fraction: p.feasible_fraction,
                trials: c.trials,
            })
        })
        .collect()
}

/// Writes the rows as CSV with LF line endings. Floats use the shortest
/// representation that parses back to the same value.
pub fn write_rows<W: Write>(rows: &[ResultRow], out: W) -> Result<()> {
    if rows.is_empty() {
        bail!("no result rows to write");
    }
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_csv(rows: &[ResultRow], path: &Path) -> Result<()> {
    if rows.is_empty() {
        bail!("no result rows to write to {}", path.display());
    }
    let file = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    write_rows(rows, file).with_context(|| format!("writing {}", path.display()))
}

//! File outputs: sweep CSV, JSON reports, and the stencil-store JSON layout.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use picmm_core::{AccumulateFormat, Grid, Kind, Order, StencilMatrix};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::config::RunConfig;
use crate::runner::{RunReport, SweepPoint};

pub const SWEEP_CSV_HEADER: &str = "axis,naive_ms,tiled_ms,speedup,max_rel_err,checks_passed";

/// Tabular sweep encoding. Times are the per-point minima; numeric fields of
/// failed points are left empty. Floats print in round-trip form so the CSV
/// and JSON encodings carry identical values.
pub fn sweep_csv_string(points: &[SweepPoint]) -> String {
    let mut out = String::from(SWEEP_CSV_HEADER);
    out.push('\n');
    for point in points {
        match &point.report {
            Some(report) => {
                let speedup = report
                    .speedup
                    .map(|s| s.to_string())
                    .unwrap_or_default();
                out.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    point.axis,
                    report.naive_min_ms,
                    report.tiled_min_ms,
                    speedup,
                    report.max_rel_err,
                    report.checks_passed
                ));
            }
            None => out.push_str(&format!("{},,,,,false\n", point.axis)),
        }
    }
    out
}

pub fn write_sweep_csv(path: &Path, points: &[SweepPoint]) -> Result<()> {
    fs::write(path, sweep_csv_string(points))
        .with_context(|| format!("writing {}", path.display()))
}

pub fn write_run_json(path: &Path, report: &RunReport) -> Result<()> {
    let text = serde_json::to_string_pretty(report)?;
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

#[derive(Debug, Serialize)]
struct SweepDocument<'a> {
    base_config: &'a RunConfig,
    points: &'a [SweepPoint],
}

pub fn write_sweep_json(path: &Path, base: &RunConfig, points: &[SweepPoint]) -> Result<()> {
    let doc = SweepDocument {
        base_config: base,
        points,
    };
    let text = serde_json::to_string_pretty(&doc)?;
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

/// Serialize a stencil store to its documented JSON layout: grid dims and
/// spacing, order, kind, storage format, the canonical offset table, and
/// values nested node -> offset -> component.
pub fn stencil_to_json(store: &StencilMatrix) -> serde_json::Value {
    let grid = store.grid();
    let d = grid.d();
    let offsets: Vec<Vec<i64>> = store
        .offsets()
        .iter()
        .map(|off| off[..d].to_vec())
        .collect();
    let values: Vec<Vec<Vec<f64>>> = (0..grid.num_nodes())
        .map(|node| {
            (0..store.num_slots())
                .map(|slot| {
                    (0..store.num_components())
                        .map(|c| store.value(node, slot, c))
                        .collect()
                })
                .collect()
        })
        .collect();
    json!({
        "dims": grid.dims(),
        "spacing": grid.spacing(),
        "order": store.order().n(),
        "kind": match store.kind() { Kind::Scalar => "scalar", Kind::Tensorial => "tensorial" },
        "format": match store.format() { AccumulateFormat::Fp64 => "fp64", AccumulateFormat::Fp32 => "fp32" },
        "offsets": offsets,
        "values": values,
    })
}

pub fn stencil_to_json_string(store: &StencilMatrix) -> String {
    serde_json::to_string_pretty(&stencil_to_json(store)).expect("stencil json")
}

pub fn stencil_from_json(text: &str) -> Result<StencilMatrix> {
    #[derive(Deserialize)]
    struct Doc {
        dims: Vec<usize>,
        spacing: Vec<f64>,
        order: usize,
        kind: String,
        format: String,
        offsets: Vec<Vec<i64>>,
        values: Vec<Vec<Vec<f64>>>,
    }
    let doc: Doc = serde_json::from_str(text).context("parsing stencil json")?;
    let grid = Grid::new(&doc.dims, &doc.spacing)?;
    let order = Order::from_n(doc.order)?;
    let kind = match doc.kind.as_str() {
        "scalar" => Kind::Scalar,
        "tensorial" => Kind::Tensorial,
        other => bail!("unknown kind {other:?}"),
    };
    let format = match doc.format.as_str() {
        "fp64" => AccumulateFormat::Fp64,
        "fp32" => AccumulateFormat::Fp32,
        other => bail!("unknown format {other:?}"),
    };
    let mut store = StencilMatrix::new(&grid, order, kind, format);

    let expected: Vec<Vec<i64>> = store
        .offsets()
        .iter()
        .map(|off| off[..grid.d()].to_vec())
        .collect();
    if doc.offsets != expected {
        bail!("offset table does not match the canonical enumeration");
    }
    let mut flat = Vec::with_capacity(store.values().len());
    for node in &doc.values {
        for slot in node {
            flat.extend_from_slice(slot);
        }
    }
    store
        .load_values(&flat)
        .map_err(|e| anyhow::anyhow!("value table mismatch: {e}"))?;
    Ok(store)
}

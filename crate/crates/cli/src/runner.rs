//! Benchmark runs: naive and tiled assembly on identical inputs, timing,
//! error metrics, and the invariant suite.

use std::ops::Range;
use std::thread;
use std::time::Instant;

use anyhow::{Context, Result};
use picmm_core::{
    assemble, assemble_cells, assemble_naive, AccumulateFormat, CellRanges, Grid, NaiveArithmetic,
    ParticleSet, StencilMatrix,
};
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::metrics::{check_invariants, compare_stores, InvariantChecks};
use crate::synth::synth;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunReport {
    pub config: RunConfig,
    pub particles: usize,
    /// Sorting is not part of the timed kernels and is reported separately.
    pub sort_ms: f64,
    pub naive_ms: Vec<f64>,
    pub tiled_ms: Vec<f64>,
    pub naive_min_ms: f64,
    pub naive_median_ms: f64,
    pub tiled_min_ms: f64,
    pub tiled_median_ms: f64,
    /// naive_min_ms / tiled_min_ms; withheld when any invariant check fails.
    pub speedup: Option<f64>,
    pub max_rel_err: f64,
    pub frobenius_rel_err: f64,
    pub checks: InvariantChecks,
    pub checks_passed: bool,
}

fn ms_since(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

fn median(samples: &[f64]) -> f64 {
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

/// Tiled assembly, multi-threaded over disjoint cell ranges with private
/// partial stores merged in thread-index order.
pub fn assemble_parallel(
    grid: &Grid,
    particles: &ParticleSet,
    ranges: &CellRanges,
    config: &RunConfig,
) -> Result<StencilMatrix> {
    let opts = config.assembly_options()?;
    if config.threads <= 1 {
        return assemble(grid, particles, ranges, &opts).context("tiled assembly failed");
    }
    let ncells = grid.num_cells();
    let per_thread = ncells.div_ceil(config.threads);
    let chunks: Vec<Range<usize>> = (0..config.threads)
        .map(|t| (t * per_thread).min(ncells)..((t + 1) * per_thread).min(ncells))
        .collect();

    let partials: Vec<picmm_core::Result<StencilMatrix>> = thread::scope(|scope| {
        let handles: Vec<_> = chunks
            .into_iter()
            .map(|cells| {
                scope.spawn(move || {
                    let mut store = StencilMatrix::new(
                        grid,
                        opts.order,
                        opts.kind,
                        opts.policy.accumulate(),
                    );
                    assemble_cells(grid, particles, ranges, cells, &opts, &mut store)
                        .map(|()| store)
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("assembly worker panicked"))
            .collect()
    });

    let mut merged: Option<StencilMatrix> = None;
    for partial in partials {
        let partial = partial.context("tiled assembly failed")?;
        match &mut merged {
            None => merged = Some(partial),
            Some(store) => store.merge(&partial).context("merging partial stores")?,
        }
    }
    Ok(merged.expect("at least one worker"))
}

/// Execute one benchmark point: synthesize, sort, time both kernels over
/// `repeats` runs, and verify.
pub fn run(config: &RunConfig) -> Result<RunReport> {
    config.validate()?;
    let grid = config.grid()?;
    let order = config.order_core()?;
    let kind = config.kind.core();
    let particles = synth(config)?;

    let t = Instant::now();
    let (sorted, ranges) = particles
        .sort_by_cell(&grid)
        .context("sorting particles by cell")?;
    let sort_ms = ms_since(t);

    // the timing baseline matches the profile's accumulate format; error
    // metrics always reference the FP64 oracle
    let naive_arith = match config.profile.policy().accumulate() {
        AccumulateFormat::Fp64 => NaiveArithmetic::Fp64,
        AccumulateFormat::Fp32 => NaiveArithmetic::Fp32,
    };

    let mut tiled_ms = Vec::with_capacity(config.repeats);
    let mut naive_ms = Vec::with_capacity(config.repeats);
    let mut tiled_store = None;
    let mut naive_store = None;
    for _ in 0..config.repeats {
        let t = Instant::now();
        tiled_store = Some(assemble_parallel(&grid, &sorted, &ranges, config)?);
        tiled_ms.push(ms_since(t));

        let t = Instant::now();
        naive_store = Some(
            assemble_naive(&grid, &sorted, order, kind, naive_arith)
                .context("naive assembly failed")?,
        );
        naive_ms.push(ms_since(t));
    }
    let tiled_store = tiled_store.expect("repeats >= 1");
    let naive_store = naive_store.expect("repeats >= 1");

    let reference = if naive_arith == NaiveArithmetic::Fp64 {
        naive_store
    } else {
        assemble_naive(&grid, &sorted, order, kind, NaiveArithmetic::Fp64)
            .context("reference assembly failed")?
    };
    let metrics = compare_stores(&tiled_store, &reference)?;
    let checks = check_invariants(&grid, &sorted, &tiled_store, order, kind, config.seed);
    let checks_passed = checks.passed();

    let naive_min = naive_ms.iter().copied().fold(f64::INFINITY, f64::min);
    let tiled_min = tiled_ms.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(RunReport {
        config: config.clone(),
        particles: sorted.len(),
        sort_ms,
        naive_min_ms: naive_min,
        naive_median_ms: median(&naive_ms),
        tiled_min_ms: tiled_min,
        tiled_median_ms: median(&tiled_ms),
        naive_ms,
        tiled_ms,
        speedup: checks_passed.then_some(naive_min / tiled_min),
        max_rel_err: metrics.max_rel_entry,
        frobenius_rel_err: metrics.frobenius_rel,
        checks,
        checks_passed,
    })
}

/// Parameter axis of a sweep.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SweepAxis {
    Ppc(Vec<usize>),
    /// Cubic grid sizes; the dimension count comes from the base config.
    Grid(Vec<usize>),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepPoint {
    pub axis: usize,
    pub report: Option<RunReport>,
    pub error: Option<String>,
}

/// One run per axis value; failing points are recorded and the sweep
/// continues.
pub fn sweep(base: &RunConfig, axis: &SweepAxis) -> Vec<SweepPoint> {
    let values: &[usize] = match axis {
        SweepAxis::Ppc(v) => v,
        SweepAxis::Grid(v) => v,
    };
    values
        .iter()
        .map(|&value| {
            let mut config = base.clone();
            match axis {
                SweepAxis::Ppc(_) => config.ppc = value,
                SweepAxis::Grid(_) => config.dims = vec![value; base.dims.len()],
            }
            match run(&config) {
                Ok(report) => SweepPoint {
                    axis: value,
                    report: Some(report),
                    error: None,
                },
                Err(e) => SweepPoint {
                    axis: value,
                    report: None,
                    error: Some(format!("{e:#}")),
                },
            }
        })
        .collect()
}

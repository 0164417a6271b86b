//! Naive per-particle scatter-loop reference for correctness testing and
//! baseline timing. Deposits run through the same stencil tables as the
//! batched path so comparisons isolate the contraction itself; the oracle
//! never reads cell-sort metadata.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::geometry::{Grid, ParticleSet};
use crate::mma::AccumulateFormat;
use crate::response::{coefficient, Kind};
use crate::shape::{group_base, group_id, weights, Order};
use crate::stencil::{build_table, DepositTable, StencilMatrix};

/// Arithmetic of the scatter loop. Fp32 computes weights in FP64, then
/// rounds weight products and every accumulation step to FP32 (the baseline
/// matching a conventional single-precision kernel).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NaiveArithmetic {
    Fp64,
    Fp32,
}

pub fn assemble_naive(
    grid: &Grid,
    particles: &ParticleSet,
    order: Order,
    kind: Kind,
    arithmetic: NaiveArithmetic,
) -> Result<StencilMatrix> {
    let d = grid.d();
    for (axis, &cells) in grid.dims().iter().enumerate() {
        if cells < order.support() {
            return Err(Error::GridTooSmall {
                axis,
                cells,
                required: order.support(),
            });
        }
    }
    let format = match arithmetic {
        NaiveArithmetic::Fp64 => AccumulateFormat::Fp64,
        NaiveArithmetic::Fp32 => AccumulateFormat::Fp32,
    };
    let mut store = StencilMatrix::new(grid, order, kind, format);
    let tables: Vec<DepositTable> = (0..order.group_count(d))
        .map(|gamma| build_table(order, d, &group_base(order, gamma, d)[..d]))
        .collect();

    let sigma = particles.sigma();
    let n_comp = kind.components();
    for p in 0..particles.len() {
        let loc = grid.locate(&particles.position(p)[..d])?;
        let w = weights(order, &loc, d);
        let s = coefficient(kind, particles.charge(p), particles.omega(p))?;
        let table = &tables[group_id(order, &loc, d)];
        for e in table.entries() {
            let node = grid.node_id(&loc.cell[..d], &e.anchor[..d]);
            let wp = w.weights()[e.a] * w.weights()[e.b];
            let wp = match arithmetic {
                NaiveArithmetic::Fp64 => wp,
                NaiveArithmetic::Fp32 => (wp as f32) as f64,
            };
            for c in 0..n_comp {
                store.add(node, e.slot, c, sigma * s.component(c) * wp);
            }
        }
    }
    Ok(store)
}

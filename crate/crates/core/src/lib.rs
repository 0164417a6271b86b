//! Cell-local, batched matrix-multiply-accumulate formulation of
//! particle-to-grid mass-matrix assembly.
//!
//! The global mass matrix couples grid-node pairs through outer products of
//! B-spline interpolation weights, scaled per particle by a charge or a 3x3
//! rotation-response tensor. This crate decomposes that reduction cell by
//! cell into fixed-shape tile products `D <- D + A*B` over an abstract MMA
//! interface with software backends (exact FP64, emulated TF32/FP32),
//! deposits the accumulated blocks into a canonical-offset sparse store, and
//! ships a naive scatter-loop reference for verification.
//!
//! The crate is `no_std` (alloc required); IO, file formats, timing, and the
//! benchmark CLI live in the companion `picmm-cli` crate.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod assembler;
pub mod error;
pub mod geometry;
pub mod mma;
pub mod oracle;
pub mod response;
pub mod shape;
pub mod stencil;

pub use assembler::{
    assemble, assemble_cell, assemble_cells, build_batch, partition_groups, AssemblyOptions,
    BatchOperands, CellAccumulator, GroupAccumulator, DEFAULT_CHUNK_SIZE,
};
pub use error::{Error, Result};
pub use geometry::{CellLocation, CellRanges, Grid, ParticleSet, MAX_DIM};
pub use mma::{
    mma, plan, truncate_tf32, AccumulateFormat, InputFormat, PrecisionPolicy, TilePlan, TileShape,
};
pub use oracle::{assemble_naive, NaiveArithmetic};
pub use response::{alpha, coefficient, cross_matrix, CoefficientTensor, Kind, SpeciesParams};
pub use shape::{bspline_1d, group_id, support_base, weights, Order, WeightStencil, MAX_SUPPORT};
pub use stencil::{
    build_table, canonical, canonical_offsets, DepositEntry, DepositTable, StencilMatrix,
    DENSE_NODE_LIMIT,
};

//! Benchmark and verification harness for the tiled mass-matrix assembler:
//! synthetic particle generation, timing of tiled versus naive assembly,
//! precision-error reports, and machine-readable outputs.

pub mod config;
pub mod io;
pub mod metrics;
pub mod runner;
pub mod synth;

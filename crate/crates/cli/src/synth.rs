//! Deterministic synthetic particle generation.
//!
//! All randomness comes from a splitmix64 counter generator so any
//! implementation can reproduce particle sets from the seed alone. The draw
//! order is fixed: cells in linear index order, `ppc` particles per cell, and
//! per particle one uniform per axis (axis 0 first) followed by three
//! uniforms in [-1, 1) for omega on tensorial runs.

use anyhow::Result;
use picmm_core::{ParticleSet, MAX_DIM};

use crate::config::{Distribution, KindArg, RunConfig};

/// Splitmix64: state advances by the golden-ratio increment and the output
/// is a bijective mix of the state, i.e. output i depends only on
/// `seed + (i+1) * 0x9E3779B97F4A7C15`.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E3779B97F4A7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
        z ^ (z >> 31)
    }

    /// Uniform in [0, 1): the top 53 bits scaled by 2^-53.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / 9007199254740992.0)
    }

    /// Uniform in [-1, 1).
    pub fn next_symmetric(&mut self) -> f64 {
        2.0 * self.next_f64() - 1.0
    }
}

/// Map a uniform draw to a fractional coordinate biased 7:1 toward the lower
/// cell half: u < 7/8 stretches over [0, 1/2), the rest over [1/2, 1).
fn clustered_frac(u: f64) -> f64 {
    if u < 0.875 {
        u * (0.5 / 0.875)
    } else {
        0.5 + (u - 0.875) * 4.0
    }
}

/// Generate exactly `ppc` particles per cell with unit charge and sigma 1.
pub fn synth(config: &RunConfig) -> Result<ParticleSet> {
    let grid = config.grid()?;
    let d = grid.d();
    let tensorial = config.kind == KindArg::Tensorial;
    let mut rng = SplitMix64::new(config.seed);

    let total = grid.num_cells() * config.ppc;
    let mut positions = Vec::with_capacity(total);
    let charges = vec![1.0f64; total];
    let mut omegas = tensorial.then(|| Vec::with_capacity(total));

    for cell in 0..grid.num_cells() {
        let coords = grid.cell_coords(cell);
        for _ in 0..config.ppc {
            let mut pos = [0.0f64; MAX_DIM];
            for axis in 0..d {
                let u = rng.next_f64();
                let frac = match config.distribution {
                    Distribution::Uniform => u,
                    Distribution::Clustered => clustered_frac(u),
                };
                let x = (coords[axis] as f64 + frac) * config.spacing;
                // keep rounding at the upper cell edge inside the domain
                pos[axis] = x.min(grid.extent(axis).next_down());
            }
            positions.push(pos);
            if let Some(w) = omegas.as_mut() {
                w.push([
                    rng.next_symmetric(),
                    rng.next_symmetric(),
                    rng.next_symmetric(),
                ]);
            }
        }
    }
    Ok(ParticleSet::new(positions, charges, omegas, 1.0))
}

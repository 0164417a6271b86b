//! Error metrics between stencil stores and per-run invariant checks.

use anyhow::{bail, Result};
use picmm_core::{
    coefficient, weights, AccumulateFormat, Grid, Kind, Order, ParticleSet, StencilMatrix,
};
use serde::{Deserialize, Serialize};

use crate::synth::SplitMix64;

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ErrorMetrics {
    /// Largest entrywise error relative to the reference entry, floored at
    /// 1% of the reference's largest magnitude so near-zero entries do not
    /// dominate.
    pub max_rel_entry: f64,
    /// Frobenius-norm relative difference; sums are multiplicity-weighted so
    /// they equal the dense-matrix norms.
    pub frobenius_rel: f64,
}

/// Compare two stores over the same grid, order, and kind against
/// `reference`. Storage formats may differ.
pub fn compare_stores(test: &StencilMatrix, reference: &StencilMatrix) -> Result<ErrorMetrics> {
    if test.grid() != reference.grid()
        || test.order() != reference.order()
        || test.kind() != reference.kind()
    {
        bail!("stores have different layouts");
    }
    let d = reference.grid().d();
    let offsets = reference.offsets();
    let max_abs = reference.max_abs();
    let floor = (1e-2 * max_abs).max(1e-300);

    let mut max_rel = 0.0f64;
    let mut diff2 = 0.0f64;
    let mut ref2 = 0.0f64;
    for node in 0..reference.grid().num_nodes() {
        for slot in 0..reference.num_slots() {
            let mult = if offsets[slot][..d].iter().all(|&v| v == 0) {
                1.0
            } else {
                2.0
            };
            for c in 0..reference.num_components() {
                let t = test.value(node, slot, c);
                let r = reference.value(node, slot, c);
                max_rel = max_rel.max((t - r).abs() / r.abs().max(floor));
                diff2 += mult * (t - r) * (t - r);
                ref2 += mult * r * r;
            }
        }
    }
    let frobenius_rel = if ref2 > 0.0 {
        (diff2 / ref2).sqrt()
    } else if diff2 > 0.0 {
        f64::INFINITY
    } else {
        0.0
    };
    Ok(ErrorMetrics {
        max_rel_entry: max_rel,
        frobenius_rel,
    })
}

/// Outcome of the per-run invariant suite.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InvariantChecks {
    pub partition_of_unity: bool,
    pub symmetry: bool,
    pub conservation: bool,
    pub messages: Vec<String>,
}

impl InvariantChecks {
    pub fn passed(&self) -> bool {
        self.partition_of_unity && self.symmetry && self.conservation
    }
}

/// Sampled partition-of-unity, node-pair symmetry, and conservation checks.
/// Conservation tolerance follows the store's accumulate format.
pub fn check_invariants(
    grid: &Grid,
    particles: &ParticleSet,
    store: &StencilMatrix,
    order: Order,
    kind: Kind,
    seed: u64,
) -> InvariantChecks {
    let d = grid.d();
    let mut rng = SplitMix64::new(seed ^ 0xC0FFEE);
    let mut messages = Vec::new();

    // partition of unity on a particle sample
    let mut partition_of_unity = true;
    let samples = particles.len().min(1000);
    for i in 0..samples {
        let p = if particles.len() <= 1000 {
            i
        } else {
            (rng.next_u64() % particles.len() as u64) as usize
        };
        let loc = match grid.locate(&particles.position(p)[..d]) {
            Ok(loc) => loc,
            Err(e) => {
                partition_of_unity = false;
                messages.push(format!("particle {p} outside domain: {e}"));
                break;
            }
        };
        let sum: f64 = weights(order, &loc, d).weights().iter().sum();
        if (sum - 1.0).abs() > 1e-14 {
            partition_of_unity = false;
            messages.push(format!("weights of particle {p} sum to {sum}"));
            break;
        }
    }

    // node-pair symmetry on a sample of stored entries
    let mut symmetry = true;
    let ng = grid.num_nodes();
    'outer: for _ in 0..2000 {
        let node = (rng.next_u64() % ng as u64) as usize;
        let slot = (rng.next_u64() % store.num_slots() as u64) as usize;
        let coords = grid.cell_coords(node);
        let other = grid.node_id(&coords[..d], &store.offsets()[slot][..d]);
        for c in 0..store.num_components() {
            let (i, j) = if kind == Kind::Tensorial {
                (c / 3, c % 3)
            } else {
                (0, 0)
            };
            let fwd = store.lookup(node, other, i, j);
            let bwd = store.lookup(other, node, i, j);
            if fwd.to_bits() != bwd.to_bits() {
                symmetry = false;
                messages.push(format!(
                    "lookup({node},{other},{i},{j}) = {fwd} but lookup({other},{node},{i},{j}) = {bwd}"
                ));
                break 'outer;
            }
        }
    }

    // conservation: sums over all node pairs equal sigma * sum of coefficients
    let mut conservation = true;
    let sums = store.component_sums();
    let mut expected = vec![0.0f64; kind.components()];
    for p in 0..particles.len() {
        match coefficient(kind, particles.charge(p), particles.omega(p)) {
            Ok(s) => {
                for (c, e) in expected.iter_mut().enumerate() {
                    *e += particles.sigma() * s.component(c);
                }
            }
            Err(e) => {
                conservation = false;
                messages.push(format!("coefficient of particle {p}: {e}"));
                break;
            }
        }
    }
    if conservation {
        let tol = match store.format() {
            AccumulateFormat::Fp64 => 1e-12,
            AccumulateFormat::Fp32 => 5e-3,
        };
        let scale = expected.iter().fold(1e-30f64, |m, &v| m.max(v.abs()));
        for c in 0..expected.len() {
            let diff = (sums[c] - expected[c]).abs();
            if diff > tol * scale {
                conservation = false;
                messages.push(format!(
                    "component {c} sums to {} but coefficients give {}",
                    sums[c], expected[c]
                ));
                break;
            }
        }
    }

    InvariantChecks {
        partition_of_unity,
        symmetry,
        conservation,
        messages,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use picmm_core::{assemble, AssemblyOptions, PrecisionPolicy, TileShape};

    #[test]
    fn identical_stores_compare_clean() {
        let grid = Grid::with_unit_spacing(&[6]).unwrap();
        let ps = ParticleSet::new(vec![[2.25, 0.0, 0.0]], vec![2.0], None, 1.0);
        let (sorted, ranges) = ps.sort_by_cell(&grid).unwrap();
        let opts = AssemblyOptions::new(
            Order::Cic,
            Kind::Scalar,
            TileShape::FP64_8X8X4,
            PrecisionPolicy::FP64,
        );
        let store = assemble(&grid, &sorted, &ranges, &opts).unwrap();
        let metrics = compare_stores(&store, &store).unwrap();
        assert_eq!(metrics.max_rel_entry, 0.0);
        assert_eq!(metrics.frobenius_rel, 0.0);

        let checks = check_invariants(&grid, &sorted, &store, Order::Cic, Kind::Scalar, 7);
        assert!(checks.passed(), "{:?}", checks.messages);
    }

    #[test]
    fn corrupted_store_fails_conservation() {
        let grid = Grid::with_unit_spacing(&[6]).unwrap();
        let ps = ParticleSet::new(vec![[2.25, 0.0, 0.0]], vec![2.0], None, 1.0);
        let (sorted, ranges) = ps.sort_by_cell(&grid).unwrap();
        let opts = AssemblyOptions::new(
            Order::Cic,
            Kind::Scalar,
            TileShape::FP64_8X8X4,
            PrecisionPolicy::FP64,
        );
        let mut store = assemble(&grid, &sorted, &ranges, &opts).unwrap();
        store.add(0, 0, 0, 0.5);
        let checks = check_invariants(&grid, &sorted, &store, Order::Cic, Kind::Scalar, 7);
        assert!(!checks.conservation);
        assert!(!checks.passed());
    }
}

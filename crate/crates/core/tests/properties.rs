//! Property tests for the geometry, shape, mma, and stencil contracts.

mod common;

use common::Rng;
use proptest::prelude::*;
use picmm_core::{
    bspline_1d, canonical, canonical_offsets, group_id, mma, plan, truncate_tf32, weights,
    CellLocation, Grid, Order, ParticleSet, PrecisionPolicy, TileShape, MAX_DIM,
};

fn loc_from(frac: [f64; MAX_DIM]) -> CellLocation {
    CellLocation {
        cell: [0; MAX_DIM],
        frac,
    }
}

#[test]
fn partition_of_unity_and_nonnegativity() {
    // 1e4 random positions per order and dimension
    for order in [Order::Cic, Order::Tsc] {
        for d in 1..=3 {
            let mut rng = Rng::new(0x50_1000 + d as u64);
            for _ in 0..10_000 {
                let frac = [rng.uniform(), rng.uniform(), rng.uniform()];
                let w = weights(order, &loc_from(frac), d);
                let sum: f64 = w.weights().iter().sum();
                assert!((sum - 1.0).abs() <= 1e-14, "sum {sum} for {frac:?}");
                assert!(w.weights().iter().all(|&v| v >= 0.0));
            }
        }
    }
}

#[test]
fn tsc_support_is_compact() {
    // weights vanish outside the 3-node window selected by the base offset
    let mut rng = Rng::new(7);
    for _ in 0..1000 {
        let xi = rng.uniform();
        let w = weights(Order::Tsc, &loc_from([xi, 0.0, 0.0]), 1);
        let b = w.base()[0];
        for k in [-2i64, 3] {
            let t = xi - (b + k) as f64;
            assert_eq!(bspline_1d(Order::Tsc, t), 0.0, "xi {xi} base {b} k {k}");
        }
    }
}

#[test]
fn weights_mirror_under_reflection() {
    // 1 - xi itself rounds, so the mirror identity holds to ulp scale
    let ulps = 4.0 * f64::EPSILON;
    let mut rng = Rng::new(11);
    for _ in 0..1000 {
        let xi = rng.uniform();
        let fwd = weights(Order::Cic, &loc_from([xi, 0.0, 0.0]), 1);
        let rev = weights(Order::Cic, &loc_from([1.0 - xi, 0.0, 0.0]), 1);
        assert!((fwd.weights()[0] - rev.weights()[1]).abs() <= ulps);
        assert!((fwd.weights()[1] - rev.weights()[0]).abs() <= ulps);

        // strictly inside one half so the bases mirror
        let xi = rng.range(1e-6, 0.5 - 1e-6);
        let fwd = weights(Order::Tsc, &loc_from([xi, 0.0, 0.0]), 1);
        let rev = weights(Order::Tsc, &loc_from([1.0 - xi, 0.0, 0.0]), 1);
        for k in 0..3 {
            assert!(
                (fwd.weights()[k] - rev.weights()[2 - k]).abs() <= ulps,
                "xi {xi} node {k}"
            );
        }
    }
}

#[test]
fn group_id_matches_support_sets() {
    let mut rng = Rng::new(23);
    for order in [Order::Cic, Order::Tsc] {
        for d in 1..=3 {
            for _ in 0..2000 {
                let la = loc_from([rng.uniform(), rng.uniform(), rng.uniform()]);
                let lb = loc_from([rng.uniform(), rng.uniform(), rng.uniform()]);
                let same_group = group_id(order, &la, d) == group_id(order, &lb, d);
                let same_support =
                    weights(order, &la, d).base() == weights(order, &lb, d).base();
                assert_eq!(same_group, same_support);
            }
        }
    }
}

#[test]
fn canonical_is_an_involution_partition() {
    for order in [Order::Cic, Order::Tsc] {
        let n = order.n() as i64;
        for dx in -n..=n {
            for dy in -n..=n {
                for dz in -n..=n {
                    let delta = [dx, dy, dz];
                    let (c1, f1) = canonical(&delta, order).unwrap();
                    let neg = [-dx, -dy, -dz];
                    let (c2, f2) = canonical(&neg, order).unwrap();
                    assert_eq!(c1, c2);
                    if delta != [0, 0, 0] {
                        assert_ne!(f1, f2);
                    }
                }
            }
        }
    }
}

#[test]
fn canonical_offset_sets_partition_all_offsets() {
    for order in [Order::Cic, Order::Tsc] {
        for d in 1..=3 {
            let offsets = canonical_offsets(order, d);
            let n = order.n() as i64;
            let width = (2 * n + 1) as usize;
            let mut hits = 0usize;
            for code in 0..width.pow(d as u32) {
                let mut delta = [0i64; MAX_DIM];
                let mut rem = code;
                for axis in (0..d).rev() {
                    delta[axis] = (rem % width) as i64 - n;
                    rem /= width;
                }
                let (canon, _) = canonical(&delta[..d], order).unwrap();
                assert!(offsets.contains(&canon));
                hits += 1;
            }
            assert_eq!(hits, width.pow(d as u32));
        }
    }
}

proptest! {
    #[test]
    fn locate_roundtrips_to_one_ulp(
        dims in 2usize..20,
        spacing in prop::sample::select(vec![0.25f64, 0.5, 1.0, 1.5, 2.0]),
        frac in 0.0f64..1.0,
        cell in 0usize..19,
    ) {
        let cell = cell % dims;
        let grid = Grid::new(&[dims], &[spacing]).unwrap();
        let x = (cell as f64 + frac) * spacing;
        prop_assume!(x < grid.extent(0));
        let loc = grid.locate(&[x]).unwrap();
        let rebuilt = (loc.cell[0] as f64 + loc.frac[0]) * spacing;
        let ulp = f64::EPSILON * x.abs().max(spacing);
        prop_assert!((rebuilt - x).abs() <= ulp, "x={x} rebuilt={rebuilt}");
    }

    #[test]
    fn sort_preserves_the_multiset(
        cells in 2usize..6,
        raw in prop::collection::vec((0.0f64..1.0, 0.0f64..1.0), 0..60),
    ) {
        let grid = Grid::with_unit_spacing(&[cells]).unwrap();
        let positions: Vec<[f64; MAX_DIM]> = raw
            .iter()
            .map(|&(u, _)| [u * cells as f64, 0.0, 0.0])
            .collect();
        let charges: Vec<f64> = raw.iter().map(|&(_, q)| q).collect();
        let set = ParticleSet::new(positions.clone(), charges.clone(), None, 1.0);
        let (sorted, ranges) = set.sort_by_cell(&grid).unwrap();

        prop_assert_eq!(ranges.total(), raw.len());
        let mut original: Vec<(u64, u64)> = (0..raw.len())
            .map(|p| (positions[p][0].to_bits(), charges[p].to_bits()))
            .collect();
        let mut permuted: Vec<(u64, u64)> = (0..raw.len())
            .map(|p| (sorted.position(p)[0].to_bits(), sorted.charge(p).to_bits()))
            .collect();
        original.sort_unstable();
        permuted.sort_unstable();
        prop_assert_eq!(original, permuted);

        // ranges are consistent: every particle locates to its claimed cell
        for c in 0..cells {
            for p in ranges.range(c) {
                let loc = grid.locate(&sorted.position(p)[..1]).unwrap();
                prop_assert_eq!(loc.cell[0], c);
            }
        }
    }

    #[test]
    fn truncate_tf32_is_idempotent(x in prop::num::f32::NORMAL) {
        let once = truncate_tf32(x);
        prop_assert_eq!(truncate_tf32(once), once);
    }

    #[test]
    fn plan_covers_every_entry_exactly_once(
        n in 1usize..40,
        m in 1usize..9,
        k in 1usize..5,
        symmetric in any::<bool>(),
    ) {
        let shape = TileShape::new(m, m, k).unwrap();
        let p = plan(n, shape, symmetric).unwrap();
        for a in 0..n {
            for b in 0..n {
                if symmetric && b < a {
                    continue;
                }
                let covering = p
                    .tiles()
                    .iter()
                    .filter(|&&(r, c)| a / m == r && b / m == c)
                    .count();
                prop_assert_eq!(covering, 1, "entry ({}, {}) covering", a, b);
            }
        }
    }

    #[test]
    fn fp64_mma_is_bit_identical_to_triple_loop(
        vals in prop::collection::vec(-100.0f64..100.0, 4 * 3 + 3 * 5 + 4 * 5),
    ) {
        let (m, n, k) = (4usize, 5usize, 3usize);
        let shape = TileShape::new(m, n, k).unwrap();
        let a = &vals[0..m * k];
        let b = &vals[m * k..m * k + k * n];
        let seed = &vals[m * k + k * n..];
        let mut d = vec![0.0f64; m * n];
        for (i, v) in d.iter_mut().enumerate() {
            *v = seed[i % seed.len()];
        }
        let mut reference = d.clone();
        mma(shape, PrecisionPolicy::FP64, &mut d, a, b).unwrap();
        for i in 0..m {
            for j in 0..n {
                for kk in 0..k {
                    reference[i * n + j] += a[i * k + kk] * b[kk * n + j];
                }
            }
        }
        prop_assert_eq!(d, reference);
    }

    #[test]
    fn tf32_mma_error_is_bounded(
        vals in prop::collection::vec(-1.0f64..1.0, 8 * 8 + 8 * 8),
    ) {
        let (m, n, k) = (8usize, 8usize, 8usize);
        let shape = TileShape::new(m, n, k).unwrap();
        let a = &vals[0..m * k];
        let b = &vals[m * k..];
        let mut lo = vec![0.0f64; m * n];
        let mut hi = vec![0.0f64; m * n];
        mma(shape, PrecisionPolicy::TF32, &mut lo, a, b).unwrap();
        mma(shape, PrecisionPolicy::FP64, &mut hi, a, b).unwrap();
        let scale = 2f64.powi(-10);
        for i in 0..m {
            for j in 0..n {
                let max_prod = (0..k)
                    .map(|kk| (a[i * k + kk] * b[kk * n + j]).abs())
                    .fold(0.0f64, f64::max);
                let bound = k as f64 * scale * max_prod + 1e-12;
                let diff = (lo[i * n + j] - hi[i * n + j]).abs();
                prop_assert!(diff <= bound, "diff {} bound {}", diff, bound);
            }
        }
    }
}

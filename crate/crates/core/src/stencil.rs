//! Compact sparse storage of the global mass matrix indexed by canonical
//! stencil offsets, deposit tables mapping local node pairs to storage
//! addresses, and dense reconstruction for testing.
//!
//! Each component block is symmetric under interchange of the two nodes, so
//! only the forward half of the node-pair displacements plus the diagonal is
//! stored. An offset is canonical iff its first nonzero component (axis 0
//! first) is positive, or it is zero; the mirrored pair resolves to the same
//! slot of the same component.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::geometry::{Grid, MAX_DIM};
use crate::mma::AccumulateFormat;
use crate::response::Kind;
use crate::shape::{node_offset_for, Order};

/// Node-count guard for dense reconstruction.
pub const DENSE_NODE_LIMIT: usize = 4096;

/// Canonicalize a node-pair displacement. Returns the canonical
/// representative and whether the pair was flipped.
pub fn canonical(delta: &[i64], order: Order) -> Result<([i64; MAX_DIM], bool)> {
    let max = 2 * order.n() as i64;
    let mut out = [0i64; MAX_DIM];
    for (axis, &v) in delta.iter().enumerate() {
        if v.abs() > max {
            return Err(Error::OffsetRange {
                axis,
                delta: v,
                max,
            });
        }
        out[axis] = v;
    }
    let flip = delta.iter().find(|&&v| v != 0).is_some_and(|&v| v < 0);
    if flip {
        for v in &mut out[..delta.len()] {
            *v = -*v;
        }
    }
    Ok((out, flip))
}

/// Canonical offsets spanning {-n..n}^d, lexicographic with axis 0 slowest.
/// The zero offset comes first; set sizes are ((2n+1)^d + 1) / 2.
pub fn canonical_offsets(order: Order, d: usize) -> Vec<[i64; MAX_DIM]> {
    let n = order.n() as i64;
    let width = (2 * n + 1) as usize;
    let total = width.pow(d as u32);
    let mut out = Vec::with_capacity(total / 2 + 1);
    for code in 0..total {
        let mut delta = [0i64; MAX_DIM];
        let mut rem = code;
        for axis in (0..d).rev() {
            delta[axis] = (rem % width) as i64 - n;
            rem /= width;
        }
        let first = delta[..d].iter().find(|&&v| v != 0);
        if first.is_none_or(|&v| v > 0) {
            out.push(delta);
        }
    }
    out
}

struct OffsetIndex {
    offsets: Vec<[i64; MAX_DIM]>,
    /// Full (2n+1)^d code table; usize::MAX marks non-canonical codes.
    code_to_slot: Vec<usize>,
}

fn offset_code(delta: &[i64], d: usize, n: i64) -> Option<usize> {
    let width = (2 * n + 1) as usize;
    let mut code = 0usize;
    for &v in delta.iter().take(d) {
        if v < -n || v > n {
            return None;
        }
        code = code * width + (v + n) as usize;
    }
    Some(code)
}

fn build_offset_index(order: Order, d: usize) -> OffsetIndex {
    let n = order.n() as i64;
    let offsets = canonical_offsets(order, d);
    let width = (2 * n + 1) as usize;
    let mut code_to_slot = vec![usize::MAX; width.pow(d as u32)];
    for (slot, delta) in offsets.iter().enumerate() {
        let code = offset_code(&delta[..d], d, n).unwrap();
        code_to_slot[code] = slot;
    }
    OffsetIndex {
        offsets,
        code_to_slot,
    }
}

/// Deposit addressing for one support group: every local node pair (a, b)
/// with a <= b maps to an anchor node offset and a canonical slot.
#[derive(Debug, Clone)]
pub struct DepositTable {
    base: [i64; MAX_DIM],
    entries: Vec<DepositEntry>,
}

#[derive(Debug, Clone, Copy)]
pub struct DepositEntry {
    pub a: usize,
    pub b: usize,
    /// Offset of the anchor node relative to the owning cell.
    pub anchor: [i64; MAX_DIM],
    /// Canonical offset slot of the displacement between the pair's nodes.
    pub slot: usize,
    /// Set when canonicalization swapped the pair's nodes.
    pub transposed: bool,
}

impl DepositTable {
    pub fn base(&self) -> &[i64] {
        &self.base
    }

    pub fn entries(&self) -> &[DepositEntry] {
        &self.entries
    }
}

/// Precompute the deposit table for a group with the given base offsets.
pub fn build_table(order: Order, d: usize, base: &[i64]) -> DepositTable {
    let index = build_offset_index(order, d);
    let n = order.n() as i64;
    let nodes = order.support_nodes(d);
    let mut base_a = [0i64; MAX_DIM];
    base_a[..d].copy_from_slice(&base[..d]);

    let mut entries = Vec::with_capacity(nodes * (nodes + 1) / 2);
    for a in 0..nodes {
        let off_a = node_offset_for(order, d, &base_a, a);
        for b in a..nodes {
            let off_b = node_offset_for(order, d, &base_a, b);
            let mut delta = [0i64; MAX_DIM];
            for axis in 0..d {
                delta[axis] = off_b[axis] - off_a[axis];
            }
            let (canon, transposed) = canonical(&delta[..d], order).unwrap();
            let slot = index.code_to_slot[offset_code(&canon[..d], d, n).unwrap()];
            debug_assert_ne!(slot, usize::MAX);
            let anchor = if transposed { off_b } else { off_a };
            entries.push(DepositEntry {
                a,
                b,
                anchor,
                slot,
                transposed,
            });
        }
    }
    DepositTable {
        base: base_a,
        entries,
    }
}

/// Global sparse mass matrix: one value per (node, canonical offset,
/// component), held in the accumulate format of the policy that built it.
#[derive(Debug, Clone, PartialEq)]
pub struct StencilMatrix {
    grid: Grid,
    order: Order,
    kind: Kind,
    format: AccumulateFormat,
    offsets: Vec<[i64; MAX_DIM]>,
    values: Vec<f64>,
}

impl StencilMatrix {
    pub fn new(grid: &Grid, order: Order, kind: Kind, format: AccumulateFormat) -> Self {
        let index = build_offset_index(order, grid.d());
        let len = grid.num_nodes() * index.offsets.len() * kind.components();
        StencilMatrix {
            grid: *grid,
            order,
            kind,
            format,
            offsets: index.offsets,
            values: vec![0.0; len],
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn order(&self) -> Order {
        self.order
    }

    pub fn kind(&self) -> Kind {
        self.kind
    }

    pub fn format(&self) -> AccumulateFormat {
        self.format
    }

    /// Canonical offset table, zero offset first.
    pub fn offsets(&self) -> &[[i64; MAX_DIM]] {
        &self.offsets
    }

    pub fn num_slots(&self) -> usize {
        self.offsets.len()
    }

    pub fn num_components(&self) -> usize {
        self.kind.components()
    }

    #[inline]
    fn index(&self, node: usize, slot: usize, comp: usize) -> usize {
        (node * self.offsets.len() + slot) * self.kind.components() + comp
    }

    /// Raw stored value at a storage location.
    pub fn value(&self, node: usize, slot: usize, comp: usize) -> f64 {
        self.values[self.index(node, slot, comp)]
    }

    /// Raw storage, node-major then slot then component.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Replace the raw storage (deserialization support).
    pub fn load_values(&mut self, values: &[f64]) -> Result<()> {
        if values.len() != self.values.len() {
            return Err(Error::StoreMismatch);
        }
        self.values.copy_from_slice(values);
        Ok(())
    }

    /// Accumulate `v` at a storage location in the store's format; FP32
    /// stores round every step.
    pub fn add(&mut self, node: usize, slot: usize, comp: usize, v: f64) {
        let i = self.index(node, slot, comp);
        match self.format {
            AccumulateFormat::Fp64 => self.values[i] += v,
            AccumulateFormat::Fp32 => {
                self.values[i] = ((self.values[i] as f32) + (v as f32)) as f64
            }
        }
    }

    pub fn is_compatible(&self, other: &Self) -> bool {
        self.grid == other.grid
            && self.order == other.order
            && self.kind == other.kind
            && self.format == other.format
    }

    /// Entrywise sum of another store into this one, in this store's format.
    pub fn merge(&mut self, other: &Self) -> Result<()> {
        if !self.is_compatible(other) {
            return Err(Error::StoreMismatch);
        }
        match self.format {
            AccumulateFormat::Fp64 => {
                for (v, &o) in self.values.iter_mut().zip(&other.values) {
                    *v += o;
                }
            }
            AccumulateFormat::Fp32 => {
                for (v, &o) in self.values.iter_mut().zip(&other.values) {
                    *v = ((*v as f32) + (o as f32)) as f64;
                }
            }
        }
        Ok(())
    }

    /// Scatter one group's accumulated block: for every table entry (a, b),
    /// a <= b, adds sigma * value(a, b, comp) at the anchored slot.
    pub fn deposit<F>(&mut self, cell: &[usize], table: &DepositTable, sigma: f64, value: F)
    where
        F: Fn(usize, usize, usize) -> f64,
    {
        let d = self.grid.d();
        let nc = self.kind.components();
        for e in table.entries() {
            let node = self.grid.node_id(cell, &e.anchor[..d]);
            for c in 0..nc {
                self.add(node, e.slot, c, sigma * value(e.a, e.b, c));
            }
        }
    }

    fn slot_is_zero(&self, slot: usize) -> bool {
        self.offsets[slot][..self.grid.d()].iter().all(|&v| v == 0)
    }

    /// Mass-matrix value for the node pair (g, g2) of component (i, j),
    /// resolving canonical storage through the per-component g <-> g2
    /// symmetry. Zero when the displacement is outside the stencil range.
    /// Scalar stores take (0, 0).
    pub fn lookup(&self, g: usize, g2: usize, i: usize, j: usize) -> f64 {
        let comp = match self.kind {
            Kind::Scalar => {
                debug_assert!(i == 0 && j == 0);
                0
            }
            Kind::Tensorial => 3 * i + j,
        };
        let d = self.grid.d();
        let (lo, hi) = if g <= g2 { (g, g2) } else { (g2, g) };
        let mut sum = 0.0;
        // Sum every slot addressing this pair; small grids can alias one
        // pair through periodic wrap onto several slots.
        let lo_coords = self.grid.cell_coords(lo);
        for slot in 0..self.offsets.len() {
            if self.grid.node_id(&lo_coords[..d], &self.offsets[slot][..d]) == hi {
                sum += self.value(lo, slot, comp);
            }
        }
        if hi != lo {
            let hi_coords = self.grid.cell_coords(hi);
            for slot in 0..self.offsets.len() {
                if !self.slot_is_zero(slot)
                    && self.grid.node_id(&hi_coords[..d], &self.offsets[slot][..d]) == lo
                {
                    sum += self.value(hi, slot, comp);
                }
            }
        }
        sum
    }

    /// Dense reconstruction, one node-by-node matrix per component. Small
    /// grids only; used by oracle comparisons.
    pub fn to_dense(&self) -> Result<Vec<Vec<f64>>> {
        let ng = self.grid.num_nodes();
        if ng > DENSE_NODE_LIMIT {
            return Err(Error::DenseTooLarge {
                nodes: ng,
                limit: DENSE_NODE_LIMIT,
            });
        }
        let d = self.grid.d();
        let nc = self.kind.components();
        let mut dense = vec![vec![0.0f64; ng * ng]; nc];
        for node in 0..ng {
            let coords = self.grid.cell_coords(node);
            for slot in 0..self.offsets.len() {
                let other = self.grid.node_id(&coords[..d], &self.offsets[slot][..d]);
                let zero = self.slot_is_zero(slot);
                for (c, block) in dense.iter_mut().enumerate() {
                    let v = self.value(node, slot, c);
                    block[node * ng + other] += v;
                    if !zero {
                        block[other * ng + node] += v;
                    }
                }
            }
        }
        Ok(dense)
    }

    /// Sum over all node pairs per component, equal to the dense sums.
    /// Off-diagonal slots count twice.
    pub fn component_sums(&self) -> Vec<f64> {
        let nc = self.kind.components();
        let mut sums = vec![0.0f64; nc];
        for node in 0..self.grid.num_nodes() {
            for slot in 0..self.offsets.len() {
                let mult = if self.slot_is_zero(slot) { 1.0 } else { 2.0 };
                for (c, s) in sums.iter_mut().enumerate() {
                    *s += mult * self.value(node, slot, c);
                }
            }
        }
        sums
    }

    /// Largest stored magnitude.
    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, &v| m.max(v.abs()))
    }
}

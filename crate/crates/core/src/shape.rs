//! One-dimensional B-splines, tensor-product weight stencils, and
//! support-group classification for first-order (CIC) and second-order (TSC)
//! interpolation.

use crate::error::{Error, Result};
use crate::geometry::{CellLocation, MAX_DIM};

/// B-spline interpolation order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Order {
    /// First order, cloud-in-cell: 2 support nodes per axis.
    Cic,
    /// Second order, triangular-shaped cloud: 3 support nodes per axis.
    Tsc,
}

impl Order {
    pub fn from_n(n: usize) -> Result<Self> {
        match n {
            1 => Ok(Order::Cic),
            2 => Ok(Order::Tsc),
            _ => Err(Error::UnsupportedOrder { n }),
        }
    }

    pub fn n(self) -> usize {
        match self {
            Order::Cic => 1,
            Order::Tsc => 2,
        }
    }

    /// Support nodes per axis, n + 1.
    pub fn support(self) -> usize {
        self.n() + 1
    }

    /// Support nodes per particle, N = (n+1)^d.
    pub fn support_nodes(self, d: usize) -> usize {
        self.support().pow(d as u32)
    }

    /// Distinct support groups per cell, G = n^d.
    pub fn group_count(self, d: usize) -> usize {
        self.n().pow(d as u32)
    }
}

/// One-dimensional B-spline of the given order at signed offset `t` in cell
/// units. Compactly supported on [-(n+1)/2, (n+1)/2].
pub fn bspline_1d(order: Order, t: f64) -> f64 {
    let a = t.abs();
    match order {
        Order::Cic => {
            if a <= 1.0 {
                1.0 - a
            } else {
                0.0
            }
        }
        Order::Tsc => {
            if a <= 0.5 {
                0.75 - t * t
            } else if a <= 1.5 {
                let u = 1.5 - a;
                0.5 * u * u
            } else {
                0.0
            }
        }
    }
}

/// Per-axis base offset of the support stencil relative to the owning cell.
/// TSC centers the stencil on the nearest node; ties at 1/2 take base 0.
pub fn support_base(order: Order, frac: f64) -> i64 {
    match order {
        Order::Cic => 0,
        Order::Tsc => {
            if frac < 0.5 {
                -1
            } else {
                0
            }
        }
    }
}

/// Largest support size, (2+1)^3.
pub const MAX_SUPPORT: usize = 27;

/// Tensor-product interpolation weights of one particle over its support
/// nodes, in lexicographic node order with axis 0 slowest.
#[derive(Debug, Clone, Copy)]
pub struct WeightStencil {
    order: Order,
    d: usize,
    base: [i64; MAX_DIM],
    weights: [f64; MAX_SUPPORT],
    len: usize,
}

impl WeightStencil {
    pub fn order(&self) -> Order {
        self.order
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Per-axis base offsets relative to the owning cell.
    pub fn base(&self) -> &[i64] {
        &self.base[..self.d]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights[..self.len]
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Offset of local node `a` relative to the owning cell.
    pub fn node_offset(&self, a: usize) -> [i64; MAX_DIM] {
        node_offset_for(self.order, self.d, &self.base, a)
    }
}

pub(crate) fn node_offset_for(
    order: Order,
    d: usize,
    base: &[i64; MAX_DIM],
    a: usize,
) -> [i64; MAX_DIM] {
    let s = order.support();
    let mut off = [0i64; MAX_DIM];
    let mut rem = a;
    for axis in (0..d).rev() {
        off[axis] = base[axis] + (rem % s) as i64;
        rem /= s;
    }
    debug_assert_eq!(rem, 0);
    off
}

/// Weights of one particle: per-axis 1D splines evaluated at the signed
/// distance to each support node, combined as a tensor product.
pub fn weights(order: Order, loc: &CellLocation, d: usize) -> WeightStencil {
    let s = order.support();
    let mut base = [0i64; MAX_DIM];
    let mut w1 = [[0.0f64; 3]; MAX_DIM];
    for axis in 0..d {
        let xi = loc.frac[axis];
        let b = support_base(order, xi);
        base[axis] = b;
        for k in 0..s {
            w1[axis][k] = bspline_1d(order, xi - (b + k as i64) as f64);
        }
    }

    let len = order.support_nodes(d);
    let mut weights = [0.0f64; MAX_SUPPORT];
    for (a, w) in weights.iter_mut().enumerate().take(len) {
        let mut rem = a;
        let mut acc = 1.0;
        for axis in (0..d).rev() {
            acc *= w1[axis][rem % s];
            rem /= s;
        }
        *w = acc;
    }

    WeightStencil {
        order,
        d,
        base,
        weights,
        len,
    }
}

/// Support-group id in [0, n^d): bit mu is set iff the axis-mu base offset is
/// 0, packed little-endian by axis. Two particles share a group iff their
/// support node sets coincide. CIC has a single group.
pub fn group_id(order: Order, loc: &CellLocation, d: usize) -> usize {
    match order {
        Order::Cic => 0,
        Order::Tsc => {
            let mut g = 0usize;
            for axis in 0..d {
                if loc.frac[axis] >= 0.5 {
                    g |= 1 << axis;
                }
            }
            g
        }
    }
}

/// Base offsets shared by every particle of group `gamma`.
pub fn group_base(order: Order, gamma: usize, d: usize) -> [i64; MAX_DIM] {
    debug_assert!(gamma < order.group_count(d));
    let mut base = [0i64; MAX_DIM];
    if order == Order::Tsc {
        for (axis, b) in base.iter_mut().enumerate().take(d) {
            *b = if gamma >> axis & 1 == 1 { 0 } else { -1 };
        }
    }
    base
}

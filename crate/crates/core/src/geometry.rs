//! Uniform periodic Cartesian grid, cell/node indexing, and cell-sorted
//! particle storage.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::Range;

use crate::error::{Error, Result};

/// Maximum supported spatial dimension.
pub const MAX_DIM: usize = 3;

/// Uniform Cartesian grid with periodic wrap on every axis.
///
/// Nodes are indexed row-major with axis 0 slowest, and the node count per
/// axis equals the cell count per axis (node-centered periodic layout). The
/// grid is immutable after construction and freely shareable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    dims: [usize; MAX_DIM],
    spacing: [f64; MAX_DIM],
    d: usize,
}

impl Grid {
    pub fn new(dims: &[usize], spacing: &[f64]) -> Result<Self> {
        let d = dims.len();
        if d == 0 || d > MAX_DIM || spacing.len() != d {
            return Err(Error::BadDimension { d });
        }
        let mut dims_a = [1usize; MAX_DIM];
        let mut spacing_a = [1.0f64; MAX_DIM];
        for axis in 0..d {
            if dims[axis] < 2 {
                return Err(Error::GridTooSmall {
                    axis,
                    cells: dims[axis],
                    required: 2,
                });
            }
            if !spacing[axis].is_finite() || spacing[axis] <= 0.0 {
                return Err(Error::BadSpacing { axis });
            }
            dims_a[axis] = dims[axis];
            spacing_a[axis] = spacing[axis];
        }
        Ok(Grid {
            dims: dims_a,
            spacing: spacing_a,
            d,
        })
    }

    pub fn with_unit_spacing(dims: &[usize]) -> Result<Self> {
        Grid::new(dims, &[1.0; MAX_DIM][..dims.len()])
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims[..self.d]
    }

    pub fn spacing(&self) -> &[f64] {
        &self.spacing[..self.d]
    }

    pub fn num_cells(&self) -> usize {
        self.dims().iter().product()
    }

    /// Node count equals cell count on a periodic node-centered grid.
    pub fn num_nodes(&self) -> usize {
        self.num_cells()
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing().iter().product()
    }

    /// Domain length along `axis`.
    pub fn extent(&self, axis: usize) -> f64 {
        self.dims[axis] as f64 * self.spacing[axis]
    }

    /// Cell index and fractional coordinate of an in-domain position.
    pub fn locate(&self, position: &[f64]) -> Result<CellLocation> {
        debug_assert_eq!(position.len(), self.d);
        let mut cell = [0usize; MAX_DIM];
        let mut frac = [0.0f64; MAX_DIM];
        for axis in 0..self.d {
            let x = position[axis];
            if !(x >= 0.0 && x < self.extent(axis)) {
                return Err(Error::OutOfDomain { axis, position: x });
            }
            let t = x / self.spacing[axis];
            // x >= 0, so truncation is floor. The division can round to
            // exactly dims for positions within one ulp of the boundary;
            // keep such positions in the last cell.
            let mut c = t as usize;
            if c >= self.dims[axis] {
                c = self.dims[axis] - 1;
            }
            cell[axis] = c;
            frac[axis] = t - c as f64;
        }
        Ok(CellLocation { cell, frac })
    }

    /// Linear node index of `cell + offset`, wrapped periodically.
    /// Row-major with axis 0 slowest.
    pub fn node_id(&self, cell: &[usize], offset: &[i64]) -> usize {
        let mut lin = 0usize;
        for axis in 0..self.d {
            let n = self.dims[axis] as i64;
            let idx = (cell[axis] as i64 + offset[axis]).rem_euclid(n) as usize;
            lin = lin * self.dims[axis] + idx;
        }
        lin
    }

    /// Linear cell index of in-range cell coordinates.
    pub fn cell_id(&self, cell: &[usize]) -> usize {
        let mut lin = 0usize;
        for axis in 0..self.d {
            debug_assert!(cell[axis] < self.dims[axis]);
            lin = lin * self.dims[axis] + cell[axis];
        }
        lin
    }

    /// Inverse of [`Grid::cell_id`] (also unravels node indices).
    pub fn cell_coords(&self, id: usize) -> [usize; MAX_DIM] {
        debug_assert!(id < self.num_cells());
        let mut coords = [0usize; MAX_DIM];
        let mut rem = id;
        for axis in (0..self.d).rev() {
            coords[axis] = rem % self.dims[axis];
            rem /= self.dims[axis];
        }
        coords
    }
}

/// Owning cell and fractional coordinate of one particle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellLocation {
    pub cell: [usize; MAX_DIM],
    pub frac: [f64; MAX_DIM],
}

/// Particle positions, charges, optional magnetization vectors, and the
/// per-set prefactor sigma.
#[derive(Debug, Clone, PartialEq)]
pub struct ParticleSet {
    positions: Vec<[f64; MAX_DIM]>,
    charges: Vec<f64>,
    omegas: Option<Vec<[f64; 3]>>,
    sigma: f64,
}

impl ParticleSet {
    /// All per-particle arrays must have matching lengths; omegas are only
    /// required for tensorial assembly.
    pub fn new(
        positions: Vec<[f64; MAX_DIM]>,
        charges: Vec<f64>,
        omegas: Option<Vec<[f64; 3]>>,
        sigma: f64,
    ) -> Self {
        assert_eq!(positions.len(), charges.len());
        if let Some(w) = &omegas {
            assert_eq!(w.len(), positions.len());
        }
        ParticleSet {
            positions,
            charges,
            omegas,
            sigma,
        }
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn position(&self, p: usize) -> &[f64; MAX_DIM] {
        &self.positions[p]
    }

    pub fn charge(&self, p: usize) -> f64 {
        self.charges[p]
    }

    pub fn omega(&self, p: usize) -> Option<[f64; 3]> {
        self.omegas.as_ref().map(|w| w[p])
    }

    pub fn has_omegas(&self) -> bool {
        self.omegas.is_some()
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// Stable counting sort by linear cell index. Returns the permuted set
    /// and the per-cell particle ranges; the permutation is applied to every
    /// per-particle array.
    pub fn sort_by_cell(&self, grid: &Grid) -> Result<(ParticleSet, CellRanges)> {
        let ncells = grid.num_cells();
        let n = self.len();
        let mut keys = Vec::with_capacity(n);
        for p in 0..n {
            let loc = grid.locate(&self.positions[p][..grid.d()])?;
            keys.push(grid.cell_id(&loc.cell[..grid.d()]));
        }

        let mut offsets = vec![0usize; ncells + 1];
        for &k in &keys {
            offsets[k + 1] += 1;
        }
        for c in 0..ncells {
            offsets[c + 1] += offsets[c];
        }

        let mut cursor = offsets.clone();
        let mut perm = vec![0usize; n];
        for p in 0..n {
            let c = keys[p];
            perm[cursor[c]] = p;
            cursor[c] += 1;
        }

        let positions = perm.iter().map(|&p| self.positions[p]).collect();
        let charges = perm.iter().map(|&p| self.charges[p]).collect();
        let omegas = self
            .omegas
            .as_ref()
            .map(|w| perm.iter().map(|&p| w[p]).collect());

        Ok((
            ParticleSet {
                positions,
                charges,
                omegas,
                sigma: self.sigma,
            },
            CellRanges { offsets },
        ))
    }
}

/// Per-cell (start, count) ranges into a cell-sorted particle set, stored as
/// an offsets array of length `num_cells + 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CellRanges {
    offsets: Vec<usize>,
}

impl CellRanges {
    /// Builds ranges from a raw offsets array, validating monotonicity.
    pub fn from_offsets(offsets: Vec<usize>) -> Result<Self> {
        if offsets.is_empty() || offsets[0] != 0 {
            return Err(Error::UnsortedInput);
        }
        if offsets.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::UnsortedInput);
        }
        Ok(CellRanges { offsets })
    }

    pub fn num_cells(&self) -> usize {
        self.offsets.len() - 1
    }

    /// Total particle count covered by the ranges.
    pub fn total(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    pub fn start(&self, cell: usize) -> usize {
        self.offsets[cell]
    }

    pub fn count(&self, cell: usize) -> usize {
        self.offsets[cell + 1] - self.offsets[cell]
    }

    pub fn range(&self, cell: usize) -> Range<usize> {
        self.offsets[cell]..self.offsets[cell + 1]
    }

    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }
}

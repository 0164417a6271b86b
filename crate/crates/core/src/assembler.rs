//! Cell-local mass-matrix assembly: support-group partitioning, particle
//! batching into K_t-wide operands, tile-loop accumulation through the MMA
//! backend, and orchestration over all cells.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::Range;

use crate::error::{Error, Result};
use crate::geometry::{CellLocation, CellRanges, Grid, ParticleSet, MAX_DIM};
use crate::mma::{mma, plan, PrecisionPolicy, TilePlan, TileShape};
use crate::response::{coefficient, CoefficientTensor, Kind};
use crate::shape::{group_base, group_id, weights, Order, WeightStencil};
use crate::stencil::{build_table, DepositTable, StencilMatrix};

/// Particles staged per cell pass; accumulators persist across chunks.
pub const DEFAULT_CHUNK_SIZE: usize = 64;

/// Everything that selects an assembly configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AssemblyOptions {
    pub order: Order,
    pub kind: Kind,
    pub tile: TileShape,
    pub policy: PrecisionPolicy,
    pub chunk_size: usize,
}

impl AssemblyOptions {
    pub fn new(order: Order, kind: Kind, tile: TileShape, policy: PrecisionPolicy) -> Self {
        AssemblyOptions {
            order,
            kind,
            tile,
            policy,
            chunk_size: DEFAULT_CHUNK_SIZE,
        }
    }

    /// Default tile/precision pairing: CIC runs FP64 (8,8,4), TSC runs
    /// TF32 (16,16,8).
    pub fn default_for(order: Order, kind: Kind) -> Self {
        match order {
            Order::Cic => Self::new(order, kind, TileShape::FP64_8X8X4, PrecisionPolicy::FP64),
            Order::Tsc => Self::new(order, kind, TileShape::TF32_16X16X8, PrecisionPolicy::TF32),
        }
    }

    pub fn with_chunk_size(mut self, chunk_size: usize) -> Self {
        assert!(chunk_size >= 1);
        self.chunk_size = chunk_size;
        self
    }

    fn plan_for(&self, d: usize) -> Result<TilePlan> {
        let n = self.order.support_nodes(d);
        // upper-triangle tiles suffice whenever the tile is square
        plan(n, self.tile, self.tile.m == self.tile.n)
    }
}

/// Zero-padded MMA operands of one particle batch.
#[derive(Debug, Clone)]
pub struct BatchOperands {
    /// One n_pad x k_t left operand per component; column k holds particle
    /// k's weights scaled by its coefficient.
    pub a: Vec<Vec<f64>>,
    /// k_t x n_pad right operand; row k holds particle k's unscaled weights.
    pub b: Vec<f64>,
    /// Particles present in the batch; trailing rows and columns stay zero.
    pub count: usize,
}

#[allow(clippy::too_many_arguments)]
fn fill_batch(
    a: &mut [f64],
    b: &mut [f64],
    pad_rows: usize,
    pad_cols: usize,
    kt: usize,
    n_comp: usize,
    weights: &[WeightStencil],
    coeffs: &[CoefficientTensor],
    beta: usize,
) -> usize {
    a.fill(0.0);
    b.fill(0.0);
    let start = beta * kt;
    let count = kt.min(weights.len() - start);
    let comp_stride = pad_rows * kt;
    for k in 0..count {
        let w = &weights[start + k];
        let s = &coeffs[start + k];
        for (node, &wv) in w.weights().iter().enumerate() {
            b[k * pad_cols + node] = wv;
            for c in 0..n_comp {
                a[c * comp_stride + node * kt + k] = wv * s.component(c);
            }
        }
    }
    count
}

/// Build the operands of batch `beta` over one group's staged particles.
pub fn build_batch(
    weights: &[WeightStencil],
    coeffs: &[CoefficientTensor],
    beta: usize,
    kt: usize,
    n_pad: usize,
    kind: Kind,
) -> BatchOperands {
    assert_eq!(weights.len(), coeffs.len());
    assert!(beta * kt < weights.len(), "batch index past the last batch");
    let n_comp = kind.components();
    let mut flat_a = vec![0.0; n_comp * n_pad * kt];
    let mut b = vec![0.0; kt * n_pad];
    let count = fill_batch(
        &mut flat_a,
        &mut b,
        n_pad,
        n_pad,
        kt,
        n_comp,
        weights,
        coeffs,
        beta,
    );
    let a = flat_a.chunks(n_pad * kt).map(|c| c.to_vec()).collect();
    BatchOperands { a, b, count }
}

/// Partition a cell's particles into support groups; the returned lists hold
/// indices into `locs` and every group index in [0, n^d) is present.
pub fn partition_groups(order: Order, d: usize, locs: &[CellLocation]) -> Vec<Vec<usize>> {
    let mut groups = vec![Vec::new(); order.group_count(d)];
    for (i, loc) in locs.iter().enumerate() {
        groups[group_id(order, loc, d)].push(i);
    }
    groups
}

/// Accumulated block of one support group, stored as the listed plan tiles.
#[derive(Debug, Clone)]
pub struct GroupAccumulator {
    gamma: usize,
    base: [i64; MAX_DIM],
    count: usize,
    plan: TilePlan,
    n_comp: usize,
    /// Listed-tile-major, then component, then the m x n tile row-major.
    tiles: Vec<f64>,
    /// (r * tile_cols + c) -> listed tile index, usize::MAX when skipped.
    tile_slot: Vec<usize>,
}

impl GroupAccumulator {
    fn new(gamma: usize, base: [i64; MAX_DIM], plan: TilePlan, n_comp: usize) -> Self {
        let shape = plan.shape();
        let tile_len = shape.m * shape.n;
        let tiles = vec![0.0; plan.tiles().len() * n_comp * tile_len];
        let mut tile_slot = vec![usize::MAX; plan.tile_rows() * plan.tile_cols()];
        for (idx, &(r, c)) in plan.tiles().iter().enumerate() {
            tile_slot[r * plan.tile_cols() + c] = idx;
        }
        GroupAccumulator {
            gamma,
            base,
            count: 0,
            plan,
            n_comp,
            tiles,
            tile_slot,
        }
    }

    pub fn gamma(&self) -> usize {
        self.gamma
    }

    /// Base offsets of the group's support nodes relative to the cell.
    pub fn base(&self) -> &[i64] {
        &self.base
    }

    /// Particles accumulated into this group.
    pub fn count(&self) -> usize {
        self.count
    }

    pub fn plan(&self) -> &TilePlan {
        &self.plan
    }

    fn tile_mut(&mut self, listed: usize, comp: usize) -> &mut [f64] {
        let shape = self.plan.shape();
        let tile_len = shape.m * shape.n;
        let start = (listed * self.n_comp + comp) * tile_len;
        &mut self.tiles[start..start + tile_len]
    }

    /// Entry (a, b) of the accumulated block for one component. Entries in
    /// tiles skipped by a symmetric plan resolve through the block's
    /// a <-> b symmetry.
    pub fn get(&self, a: usize, b: usize, comp: usize) -> f64 {
        let shape = self.plan.shape();
        let (r, c) = (a / shape.m, b / shape.n);
        let listed = self.tile_slot[r * self.plan.tile_cols() + c];
        if listed == usize::MAX {
            debug_assert!(self.plan.symmetric());
            return self.get(b, a, comp);
        }
        let tile_len = shape.m * shape.n;
        self.tiles[(listed * self.n_comp + comp) * tile_len + (a % shape.m) * shape.n + b % shape.n]
    }

    fn clear(&mut self) {
        self.count = 0;
        self.tiles.fill(0.0);
    }
}

/// Per-group accumulators of one cell.
#[derive(Debug, Clone)]
pub struct CellAccumulator {
    groups: Vec<GroupAccumulator>,
}

impl CellAccumulator {
    pub fn groups(&self) -> &[GroupAccumulator] {
        &self.groups
    }

    pub fn group(&self, gamma: usize) -> &GroupAccumulator {
        &self.groups[gamma]
    }
}

/// Reused buffers for cell-by-cell assembly.
struct Workspace {
    plan: TilePlan,
    pad_rows: usize,
    pad_cols: usize,
    n_comp: usize,
    kt: usize,
    tables: Vec<DepositTable>,
    groups: Vec<GroupAccumulator>,
    locs: Vec<CellLocation>,
    members: Vec<Vec<usize>>,
    stage_w: Vec<WeightStencil>,
    stage_s: Vec<CoefficientTensor>,
    a: Vec<f64>,
    b: Vec<f64>,
    b_tile: Vec<f64>,
}

impl Workspace {
    fn new(d: usize, opts: &AssemblyOptions) -> Result<Self> {
        let plan = opts.plan_for(d)?;
        let shape = plan.shape();
        let pad_rows = plan.n_pad();
        let pad_cols = plan.pad_cols();
        let n_comp = opts.kind.components();
        let kt = shape.k;
        let g = opts.order.group_count(d);
        let tables = (0..g)
            .map(|gamma| build_table(opts.order, d, &group_base(opts.order, gamma, d)[..d]))
            .collect();
        let groups = (0..g)
            .map(|gamma| {
                GroupAccumulator::new(
                    gamma,
                    group_base(opts.order, gamma, d),
                    plan.clone(),
                    n_comp,
                )
            })
            .collect();
        Ok(Workspace {
            pad_rows,
            pad_cols,
            n_comp,
            kt,
            tables,
            groups,
            locs: Vec::new(),
            members: vec![Vec::new(); g],
            stage_w: Vec::new(),
            stage_s: Vec::new(),
            a: vec![0.0; n_comp * pad_rows * kt],
            b: vec![0.0; kt * pad_cols],
            b_tile: vec![0.0; kt * shape.n],
            plan,
        })
    }
}

/// Accumulate one cell's particles into the workspace group accumulators.
/// Group accumulators must be clear on entry; they are left filled so the
/// caller can deposit or inspect them.
fn accumulate_cell(
    ws: &mut Workspace,
    grid: &Grid,
    particles: &ParticleSet,
    range: Range<usize>,
    cell: &[usize],
    opts: &AssemblyOptions,
) -> Result<()> {
    let d = grid.d();
    let shape = ws.plan.shape();
    let mut start = range.start;
    while start < range.end {
        let end = (start + opts.chunk_size).min(range.end);

        ws.locs.clear();
        for p in start..end {
            let loc = grid.locate(&particles.position(p)[..d])?;
            if loc.cell[..d] != cell[..d] {
                return Err(Error::UnsortedInput);
            }
            ws.locs.push(loc);
        }
        for m in &mut ws.members {
            m.clear();
        }
        for (i, loc) in ws.locs.iter().enumerate() {
            ws.members[group_id(opts.order, loc, d)].push(i);
        }

        for gamma in 0..ws.members.len() {
            if ws.members[gamma].is_empty() {
                continue;
            }
            ws.stage_w.clear();
            ws.stage_s.clear();
            for &i in &ws.members[gamma] {
                let p = start + i;
                ws.stage_w.push(weights(opts.order, &ws.locs[i], d));
                ws.stage_s.push(coefficient(
                    opts.kind,
                    particles.charge(p),
                    particles.omega(p),
                )?);
            }
            let group = &mut ws.groups[gamma];
            group.count += ws.stage_w.len();

            let batches = ws.stage_w.len().div_ceil(ws.kt);
            for beta in 0..batches {
                fill_batch(
                    &mut ws.a,
                    &mut ws.b,
                    ws.pad_rows,
                    ws.pad_cols,
                    ws.kt,
                    ws.n_comp,
                    &ws.stage_w,
                    &ws.stage_s,
                    beta,
                );
                for t in 0..ws.plan.tiles().len() {
                    let (r, c) = ws.plan.tiles()[t];
                    // the B sub-tile is strided across rows; stage it
                    for kk in 0..ws.kt {
                        let src = kk * ws.pad_cols + c * shape.n;
                        ws.b_tile[kk * shape.n..(kk + 1) * shape.n]
                            .copy_from_slice(&ws.b[src..src + shape.n]);
                    }
                    let comp_stride = ws.pad_rows * ws.kt;
                    for comp in 0..ws.n_comp {
                        let a_start = comp * comp_stride + r * shape.m * ws.kt;
                        let a_sub = &ws.a[a_start..a_start + shape.m * ws.kt];
                        mma(
                            shape,
                            opts.policy,
                            group.tile_mut(t, comp),
                            a_sub,
                            &ws.b_tile,
                        )?;
                    }
                }
            }
        }
        start = end;
    }
    Ok(())
}

fn check_grid_supports(grid: &Grid, order: Order) -> Result<()> {
    for (axis, &cells) in grid.dims().iter().enumerate() {
        if cells < order.support() {
            return Err(Error::GridTooSmall {
                axis,
                cells,
                required: order.support(),
            });
        }
    }
    Ok(())
}

/// Assemble one cell's particles and return the per-group accumulators
/// without depositing. All n^d groups are present; untouched groups hold
/// zero tiles and a zero count.
pub fn assemble_cell(
    grid: &Grid,
    particles: &ParticleSet,
    range: Range<usize>,
    opts: &AssemblyOptions,
) -> Result<CellAccumulator> {
    check_grid_supports(grid, opts.order)?;
    let mut ws = Workspace::new(grid.d(), opts)?;
    if !range.is_empty() {
        let d = grid.d();
        let cell = grid.locate(&particles.position(range.start)[..d])?.cell;
        accumulate_cell(&mut ws, grid, particles, range, &cell, opts)?;
    }
    Ok(CellAccumulator { groups: ws.groups })
}

/// Assemble a contiguous range of cells into `store`. The parallel driver
/// runs disjoint cell ranges into private stores and merges them afterward;
/// this function itself performs no shared writes.
pub fn assemble_cells(
    grid: &Grid,
    particles: &ParticleSet,
    ranges: &CellRanges,
    cells: Range<usize>,
    opts: &AssemblyOptions,
    store: &mut StencilMatrix,
) -> Result<()> {
    check_grid_supports(grid, opts.order)?;
    if ranges.num_cells() != grid.num_cells() || ranges.total() != particles.len() {
        return Err(Error::UnsortedInput);
    }
    if store.grid() != grid
        || store.order() != opts.order
        || store.kind() != opts.kind
        || store.format() != opts.policy.accumulate()
    {
        return Err(Error::StoreMismatch);
    }
    if opts.kind == Kind::Tensorial && !particles.is_empty() && !particles.has_omegas() {
        return Err(Error::MissingOmega);
    }

    let d = grid.d();
    let sigma = particles.sigma();
    let mut ws = Workspace::new(d, opts)?;
    for cell in cells {
        let range = ranges.range(cell);
        if range.is_empty() {
            continue;
        }
        let coords = grid.cell_coords(cell);
        accumulate_cell(&mut ws, grid, particles, range, &coords[..d], opts)?;
        for gamma in 0..ws.groups.len() {
            if ws.groups[gamma].count == 0 {
                continue;
            }
            let group = &ws.groups[gamma];
            store.deposit(&coords[..d], &ws.tables[gamma], sigma, |a, b, c| {
                group.get(a, b, c)
            });
            ws.groups[gamma].clear();
        }
    }
    Ok(())
}

/// Assemble the global mass matrix from a cell-sorted particle set,
/// processing cells in linear index order.
pub fn assemble(
    grid: &Grid,
    particles: &ParticleSet,
    ranges: &CellRanges,
    opts: &AssemblyOptions,
) -> Result<StencilMatrix> {
    let mut store = StencilMatrix::new(grid, opts.order, opts.kind, opts.policy.accumulate());
    assemble_cells(
        grid,
        particles,
        ranges,
        0..ranges.num_cells(),
        opts,
        &mut store,
    )?;
    Ok(store)
}

//! Shared helpers for the integration suites: a tiny deterministic RNG and
//! random assembly configurations.

// each integration target compiles this module and uses a different subset
#![allow(dead_code)]

use picmm_core::{Grid, Kind, Order, ParticleSet, MAX_DIM};

/// Splitmix64 over an incrementing counter; deterministic and seedable.
pub struct Rng {
    state: u64,
}

impl Rng {
    pub fn new(seed: u64) -> Self {
        Rng { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E3779B97F4A7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
        z ^ (z >> 31)
    }

    /// Uniform in [0, 1).
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / 9007199254740992.0)
    }

    /// Uniform in [lo, hi).
    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    pub fn below(&mut self, n: usize) -> usize {
        (self.next_u64() % n as u64) as usize
    }
}

/// Random particles filling the whole grid, `ppc` per cell on average.
/// Charges stay positive so entry magnitudes do not cancel; omegas are
/// sampled in [-1, 1]^3.
pub fn random_particles(
    rng: &mut Rng,
    grid: &Grid,
    total: usize,
    tensorial: bool,
    sigma: f64,
) -> ParticleSet {
    let mut positions = Vec::with_capacity(total);
    let mut charges = Vec::with_capacity(total);
    let mut omegas = tensorial.then(|| Vec::with_capacity(total));
    for _ in 0..total {
        let mut pos = [0.0; MAX_DIM];
        for axis in 0..grid.d() {
            pos[axis] = rng.uniform() * grid.extent(axis);
            if pos[axis] >= grid.extent(axis) {
                pos[axis] = 0.0;
            }
        }
        positions.push(pos);
        charges.push(rng.range(0.5, 1.5));
        if let Some(w) = omegas.as_mut() {
            w.push([
                rng.range(-1.0, 1.0),
                rng.range(-1.0, 1.0),
                rng.range(-1.0, 1.0),
            ]);
        }
    }
    ParticleSet::new(positions, charges, omegas, sigma)
}

/// A random (grid, order, kind, particles) configuration on a small domain.
pub struct RandomConfig {
    pub grid: Grid,
    pub order: Order,
    pub kind: Kind,
    pub particles: ParticleSet,
}

pub fn random_config(rng: &mut Rng, max_ppc: usize) -> RandomConfig {
    let d = 1 + rng.below(3);
    let order = if rng.below(2) == 0 {
        Order::Cic
    } else {
        Order::Tsc
    };
    let kind = if rng.below(2) == 0 {
        Kind::Scalar
    } else {
        Kind::Tensorial
    };
    let mut dims = [0usize; MAX_DIM];
    let mut spacing = [0.0f64; MAX_DIM];
    for axis in 0..d {
        dims[axis] = if d == 3 { 6 } else { 6 + rng.below(4) };
        spacing[axis] = [0.5, 1.0, 2.0][rng.below(3)];
    }
    let grid = Grid::new(&dims[..d], &spacing[..d]).unwrap();
    let ppc = rng.below(max_ppc + 1);
    let sigma = rng.range(0.5, 2.0);
    let particles = random_particles(
        rng,
        &grid,
        grid.num_cells() * ppc,
        kind == Kind::Tensorial,
        sigma,
    );
    RandomConfig {
        grid,
        order,
        kind,
        particles,
    }
}

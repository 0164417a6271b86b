//! Abstract MMA tile contract with software backends: exact FP64 tiles and
//! emulated TF32-input / FP32-accumulate tiles, plus tile-grid planning with
//! padding and symmetry skipping.

use alloc::vec::Vec;

use crate::error::{Error, Result};

/// MMA tile dimensions: the accumulator is m x n, the contraction depth is k.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TileShape {
    pub m: usize,
    pub n: usize,
    pub k: usize,
}

impl TileShape {
    /// FP64 profile: all operands double precision, batch size 4.
    pub const FP64_8X8X4: TileShape = TileShape { m: 8, n: 8, k: 4 };
    /// TF32 profile: TF32 inputs with FP32 accumulation, batch size 8.
    pub const TF32_16X16X8: TileShape = TileShape { m: 16, n: 16, k: 8 };

    pub fn new(m: usize, n: usize, k: usize) -> Result<Self> {
        if m == 0 || n == 0 || k == 0 {
            return Err(Error::BadTileShape { m, n, k });
        }
        Ok(TileShape { m, n, k })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InputFormat {
    Fp64,
    Tf32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AccumulateFormat {
    Fp64,
    Fp32,
}

/// Input and accumulate float formats of a tile backend. The accumulate
/// format is never narrower than the input format.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PrecisionPolicy {
    input: InputFormat,
    accumulate: AccumulateFormat,
}

impl PrecisionPolicy {
    pub const FP64: PrecisionPolicy = PrecisionPolicy {
        input: InputFormat::Fp64,
        accumulate: AccumulateFormat::Fp64,
    };
    pub const TF32: PrecisionPolicy = PrecisionPolicy {
        input: InputFormat::Tf32,
        accumulate: AccumulateFormat::Fp32,
    };

    pub fn new(input: InputFormat, accumulate: AccumulateFormat) -> Result<Self> {
        if input == InputFormat::Fp64 && accumulate == AccumulateFormat::Fp32 {
            return Err(Error::InvalidPolicy);
        }
        Ok(PrecisionPolicy { input, accumulate })
    }

    pub fn input(&self) -> InputFormat {
        self.input
    }

    pub fn accumulate(&self) -> AccumulateFormat {
        self.accumulate
    }
}

/// Round an FP32 value to TF32: round-to-nearest-even on the top 10 explicit
/// mantissa bits; the exponent range is unchanged.
pub fn truncate_tf32(x: f32) -> f32 {
    if !x.is_finite() {
        return x;
    }
    let bits = x.to_bits();
    let round = ((bits >> 13) & 1) + 0x0fff;
    f32::from_bits(bits.wrapping_add(round) & !0x1fff)
}

/// Tiled MMA update D <- D + A*B in the policy's formats.
///
/// Buffers are row-major: `d` is m x n, `a` is m x k, `b` is k x n. The inner
/// sum always runs k-ascending so results are bit-reproducible run to run.
/// Under the TF32 policy each operand entry is rounded to TF32, products are
/// formed exactly, and each accumulation step rounds to FP32.
pub fn mma(
    shape: TileShape,
    policy: PrecisionPolicy,
    d: &mut [f64],
    a: &[f64],
    b: &[f64],
) -> Result<()> {
    let TileShape { m, n, k } = shape;
    if d.len() != m * n || a.len() != m * k || b.len() != k * n {
        return Err(Error::OperandShape {
            d: d.len(),
            a: a.len(),
            b: b.len(),
        });
    }
    match (policy.input, policy.accumulate) {
        (InputFormat::Fp64, _) => {
            for i in 0..m {
                for j in 0..n {
                    let mut acc = d[i * n + j];
                    for kk in 0..k {
                        acc += a[i * k + kk] * b[kk * n + j];
                    }
                    d[i * n + j] = acc;
                }
            }
        }
        (InputFormat::Tf32, AccumulateFormat::Fp32) => {
            for i in 0..m {
                for j in 0..n {
                    let mut acc = d[i * n + j] as f32;
                    for kk in 0..k {
                        let pa = truncate_tf32(a[i * k + kk] as f32) as f64;
                        let pb = truncate_tf32(b[kk * n + j] as f32) as f64;
                        // the product of two TF32 values is exact in f64
                        acc = ((acc as f64) + pa * pb) as f32;
                    }
                    d[i * n + j] = acc as f64;
                }
            }
        }
        (InputFormat::Tf32, AccumulateFormat::Fp64) => {
            for i in 0..m {
                for j in 0..n {
                    let mut acc = d[i * n + j];
                    for kk in 0..k {
                        let pa = truncate_tf32(a[i * k + kk] as f32) as f64;
                        let pb = truncate_tf32(b[kk * n + j] as f32) as f64;
                        acc += pa * pb;
                    }
                    d[i * n + j] = acc;
                }
            }
        }
    }
    Ok(())
}

/// Tile coverage of a logical n x n accumulator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TilePlan {
    n: usize,
    n_pad: usize,
    shape: TileShape,
    tiles: Vec<(usize, usize)>,
    symmetric: bool,
}

impl TilePlan {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Row count after padding to a multiple of the tile height.
    pub fn n_pad(&self) -> usize {
        self.n_pad
    }

    /// Column count after padding to a multiple of the tile width.
    pub fn pad_cols(&self) -> usize {
        self.tile_cols() * self.shape.n
    }

    pub fn shape(&self) -> TileShape {
        self.shape
    }

    /// Tile coordinates to compute, row-major. Symmetric plans list only the
    /// upper triangle (c >= r).
    pub fn tiles(&self) -> &[(usize, usize)] {
        &self.tiles
    }

    pub fn symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn tile_rows(&self) -> usize {
        self.n.div_ceil(self.shape.m)
    }

    pub fn tile_cols(&self) -> usize {
        self.n.div_ceil(self.shape.n)
    }
}

/// Plan the tile grid covering an n x n accumulator. Symmetric plans skip
/// tiles strictly below the diagonal and require square tiles.
pub fn plan(n: usize, shape: TileShape, symmetric: bool) -> Result<TilePlan> {
    if shape.m == 0 || shape.n == 0 || shape.k == 0 {
        return Err(Error::BadTileShape {
            m: shape.m,
            n: shape.n,
            k: shape.k,
        });
    }
    if n == 0 {
        return Err(Error::EmptyPlan);
    }
    if symmetric && shape.m != shape.n {
        return Err(Error::AsymmetricTiles {
            m: shape.m,
            n: shape.n,
        });
    }
    let tr = n.div_ceil(shape.m);
    let tc = n.div_ceil(shape.n);
    let mut tiles = Vec::with_capacity(tr * tc);
    for r in 0..tr {
        for c in 0..tc {
            if !symmetric || c >= r {
                tiles.push((r, c));
            }
        }
    }
    Ok(TilePlan {
        n,
        n_pad: tr * shape.m,
        shape,
        tiles,
        symmetric,
    })
}

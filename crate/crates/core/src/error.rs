//! Error type shared by all core modules.

use core::fmt;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Error {
    /// Spatial dimension outside 1..=3.
    BadDimension { d: usize },
    /// Fewer cells on an axis than the operation requires.
    GridTooSmall {
        axis: usize,
        cells: usize,
        required: usize,
    },
    /// Non-positive or non-finite grid spacing.
    BadSpacing { axis: usize },
    /// Position outside the periodic domain; no clamping is performed.
    OutOfDomain { axis: usize, position: f64 },
    /// Only B-spline orders 1 (CIC) and 2 (TSC) are implemented.
    UnsupportedOrder { n: usize },
    /// Tile dimensions must all be at least 1.
    BadTileShape { m: usize, n: usize, k: usize },
    /// Symmetric tile plans require a square tile.
    AsymmetricTiles { m: usize, n: usize },
    /// Accumulate format narrower than the input format.
    InvalidPolicy,
    /// MMA operand buffer lengths do not match the tile shape.
    OperandShape { d: usize, a: usize, b: usize },
    /// Tile plans cover at least one logical row/column.
    EmptyPlan,
    /// Tensorial coefficients need a per-particle omega vector.
    MissingOmega,
    /// Node-pair displacement beyond the canonicalizable range.
    OffsetRange { axis: usize, delta: i64, max: i64 },
    /// Dense reconstruction refused above the node-count guard.
    DenseTooLarge { nodes: usize, limit: usize },
    /// Particle data and cell ranges are inconsistent (input not cell-sorted).
    UnsortedInput,
    /// Stencil stores with different grid, order, kind, or format.
    StoreMismatch,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Error::BadDimension { d } => write!(f, "unsupported spatial dimension {d}"),
            Error::GridTooSmall {
                axis,
                cells,
                required,
            } => write!(
                f,
                "axis {axis} has {cells} cells, at least {required} required"
            ),
            Error::BadSpacing { axis } => write!(f, "non-positive spacing on axis {axis}"),
            Error::OutOfDomain { axis, position } => {
                write!(f, "position {position} outside domain on axis {axis}")
            }
            Error::UnsupportedOrder { n } => write!(f, "unsupported interpolation order {n}"),
            Error::BadTileShape { m, n, k } => write!(f, "invalid tile shape ({m},{n},{k})"),
            Error::AsymmetricTiles { m, n } => {
                write!(f, "symmetric plan needs square tiles, got ({m},{n})")
            }
            Error::InvalidPolicy => write!(f, "accumulate format narrower than input format"),
            Error::OperandShape { d, a, b } => {
                write!(f, "operand lengths d={d} a={a} b={b} do not match tile shape")
            }
            Error::EmptyPlan => write!(f, "tile plan for an empty matrix"),
            Error::MissingOmega => write!(f, "tensorial coefficient requested without omega"),
            Error::OffsetRange { axis, delta, max } => {
                write!(f, "offset {delta} on axis {axis} exceeds |{max}|")
            }
            Error::DenseTooLarge { nodes, limit } => {
                write!(f, "dense reconstruction of {nodes} nodes exceeds guard {limit}")
            }
            Error::UnsortedInput => write!(f, "particles are not sorted consistently with ranges"),
            Error::StoreMismatch => write!(f, "incompatible stencil stores"),
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;

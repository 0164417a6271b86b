//! Per-particle coefficient tensors: the scalar charge case and the
//! magnetized rotation-response tensor.

use crate::error::{Error, Result};

pub type Mat3 = [[f64; 3]; 3];

/// Rotation-response tensor (I - C(w) + w w^T) / (1 + |w|^2), where
/// C(w) u = w x u is the skew-symmetric cross-product operator.
pub fn alpha(omega: [f64; 3]) -> Mat3 {
    let [wx, wy, wz] = omega;
    let inv = 1.0 / (1.0 + wx * wx + wy * wy + wz * wz);
    [
        [
            (1.0 + wx * wx) * inv,
            (wz + wx * wy) * inv,
            (-wy + wx * wz) * inv,
        ],
        [
            (-wz + wy * wx) * inv,
            (1.0 + wy * wy) * inv,
            (wx + wy * wz) * inv,
        ],
        [
            (wy + wz * wx) * inv,
            (-wx + wz * wy) * inv,
            (1.0 + wz * wz) * inv,
        ],
    ]
}

/// Cross-product matrix: cross_matrix(w) . u = w x u.
pub fn cross_matrix(omega: [f64; 3]) -> Mat3 {
    let [wx, wy, wz] = omega;
    [[0.0, -wz, wy], [wz, 0.0, -wx], [-wy, wx, 0.0]]
}

/// Scalar (single component per node pair) or tensorial (3x3 block) assembly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Kind {
    Scalar,
    Tensorial,
}

impl Kind {
    pub fn components(self) -> usize {
        match self {
            Kind::Scalar => 1,
            Kind::Tensorial => 9,
        }
    }

    /// Component index of the (j,i) entry. Identity for scalars.
    pub fn transpose_component(self, c: usize) -> usize {
        match self {
            Kind::Scalar => c,
            Kind::Tensorial => (c % 3) * 3 + c / 3,
        }
    }
}

/// Per-particle coefficient: q_p for scalars, q_p * alpha(w_p) for tensors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CoefficientTensor {
    Scalar(f64),
    Tensorial(Mat3),
}

impl CoefficientTensor {
    pub fn kind(&self) -> Kind {
        match self {
            CoefficientTensor::Scalar(_) => Kind::Scalar,
            CoefficientTensor::Tensorial(_) => Kind::Tensorial,
        }
    }

    /// Component by flat index; tensorial components are row-major.
    pub fn component(&self, c: usize) -> f64 {
        match self {
            CoefficientTensor::Scalar(v) => {
                debug_assert_eq!(c, 0);
                *v
            }
            CoefficientTensor::Tensorial(m) => m[c / 3][c % 3],
        }
    }
}

pub fn coefficient(kind: Kind, charge: f64, omega: Option<[f64; 3]>) -> Result<CoefficientTensor> {
    match kind {
        Kind::Scalar => Ok(CoefficientTensor::Scalar(charge)),
        Kind::Tensorial => {
            let w = omega.ok_or(Error::MissingOmega)?;
            let mut m = alpha(w);
            for row in &mut m {
                for v in row {
                    *v *= charge;
                }
            }
            Ok(CoefficientTensor::Tensorial(m))
        }
    }
}

/// Species constants feeding the collapsed deposition prefactor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpeciesParams {
    pub charge: f64,
    pub mass: f64,
    pub dt: f64,
    pub light_speed: f64,
}

impl SpeciesParams {
    /// beta = q dt / (2 m).
    pub fn beta(&self) -> f64 {
        self.charge * self.dt / (2.0 * self.mass)
    }

    /// sigma = beta / (c V_cell), applied once per deposited entry.
    pub fn sigma(&self, cell_volume: f64) -> f64 {
        self.beta() / (self.light_speed * cell_volume)
    }
}

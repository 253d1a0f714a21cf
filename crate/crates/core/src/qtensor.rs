//! Symmetric traceless 3x3 tensors and the uniaxial hedgehog ansatz.

use nalgebra::{Matrix3, Rotation3, Vector3};

use crate::error::{HedgehogError, Result};
use crate::potential::bulk_offset;

const SQRT_3_2: f64 = 1.224_744_871_391_589;
const SQRT_6: f64 = 2.449_489_742_783_178;

/// A symmetric traceless 3x3 order-parameter tensor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QTensor(Matrix3<f64>);

impl QTensor {
    pub fn zero() -> Self {
        QTensor(Matrix3::zeros())
    }

    /// Accepts `m` only if it is exactly symmetric and traceless to within
    /// `1e-12 (1 + |m|)`.
    pub fn new(m: Matrix3<f64>) -> Result<Self> {
        if m != m.transpose() {
            return Err(HedgehogError::InvalidInput("Q-tensor is not symmetric".into()));
        }
        Self::check_trace(m)?;
        Ok(QTensor(m))
    }

    /// Symmetrizes `m` before the trace check.
    pub fn from_symmetric_part(m: Matrix3<f64>) -> Result<Self> {
        let s = 0.5 * (m + m.transpose());
        Self::check_trace(s)?;
        Ok(QTensor(s))
    }

    fn check_trace(m: Matrix3<f64>) -> Result<()> {
        let tr = m.trace();
        if !(tr.abs() <= 1e-12 * (1.0 + m.norm())) {
            return Err(HedgehogError::InvalidInput(format!("Q-tensor trace {tr:e} is not zero")));
        }
        Ok(())
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.0
    }

    /// `tr(Q^2)`, equal to the squared Frobenius norm.
    pub fn tr_sq(&self) -> f64 {
        self.0.norm_squared()
    }

    /// `tr(Q^3)`.
    pub fn tr_cube(&self) -> f64 {
        (self.0 * self.0 * self.0).trace()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.norm()
    }

    /// `U Q U^T`.
    pub fn rotated(&self, u: &Rotation3<f64>) -> Self {
        let m = u.matrix() * self.0 * u.matrix().transpose();
        QTensor(0.5 * (m + m.transpose()))
    }
}

/// A unit director.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitVector(Vector3<f64>);

impl UnitVector {
    /// Rejects vectors whose norm differs from one by more than `1e-12`.
    pub fn new(v: Vector3<f64>) -> Result<Self> {
        let norm = v.norm();
        if !((norm - 1.0).abs() <= 1e-12) {
            return Err(HedgehogError::invalid("|n|", norm, "director must be a unit vector"));
        }
        Ok(UnitVector(v / norm))
    }

    pub fn normalize(v: Vector3<f64>) -> Result<Self> {
        let norm = v.norm();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(HedgehogError::invalid("|n|", norm, "cannot normalize"));
        }
        Ok(UnitVector(v / norm))
    }

    pub fn vector(&self) -> &Vector3<f64> {
        &self.0
    }

    /// `n (x) n - I/3`.
    pub fn projector(&self) -> Matrix3<f64> {
        self.0 * self.0.transpose() - Matrix3::identity() / 3.0
    }
}

impl std::ops::Neg for UnitVector {
    type Output = UnitVector;
    fn neg(self) -> UnitVector {
        UnitVector(-self.0)
    }
}

/// `sqrt(3/2) h (n (x) n - I/3)`; its squared norm is `h^2`.
pub fn uniaxial(h: f64, n: &UnitVector) -> QTensor {
    QTensor(SQRT_3_2 * h * n.projector())
}

/// Reduced bulk density `t/2 tr Q^2 - sqrt(6) tr Q^3 + (tr Q^2)^2 / 2 + C(t)`.
pub fn bulk_energy(q: &QTensor, t: f64) -> Result<f64> {
    let offset = bulk_offset(t)?;
    let tr2 = q.tr_sq();
    Ok(0.5 * t * tr2 - SQRT_6 * q.tr_cube() + 0.5 * tr2 * tr2 + offset)
}

/// Right-hand side of the tensor Euler-Lagrange equation,
/// `t Q - 3 sqrt(6) (Q^2 - tr(Q^2) I/3) + 2 Q tr(Q^2)`.
pub fn el_rhs(q: &QTensor, t: f64) -> QTensor {
    let m = q.0;
    let tr2 = q.tr_sq();
    let q2 = m * m;
    let dev = q2 - Matrix3::identity() * (tr2 / 3.0);
    let out = m * t - dev * (3.0 * SQRT_6) + m * (2.0 * tr2);
    QTensor(0.5 * (out + out.transpose()))
}

fn require_positive_r(r: f64) -> Result<()> {
    if !(r > 0.0) {
        return Err(HedgehogError::invalid("r", r, "radial formulas need r > 0"));
    }
    Ok(())
}

/// Scalar multiplying `sqrt(3/2)(n (x) n - I/3)` in the Laplacian of a
/// hedgehog: `h'' + 2h'/r - 6h/r^2`.
pub fn radial_laplacian_coefficient(h: f64, h1: f64, h2: f64, r: f64) -> Result<f64> {
    require_positive_r(r)?;
    Ok(h2 + 2.0 * h1 / r - 6.0 * h / (r * r))
}

/// `|grad Q|^2` of a hedgehog: `h'^2 + 6 h^2 / r^2`.
pub fn gradient_density(h: f64, h1: f64, r: f64) -> Result<f64> {
    require_positive_r(r)?;
    Ok(h1 * h1 + 6.0 * h * h / (r * r))
}

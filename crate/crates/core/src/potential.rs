//! Reduced bulk potential and temperature regimes.
//!
//! For a uniaxial tensor with scalar order parameter `h` the reduced bulk
//! energy density is the quartic
//!
//! ```text
//! g(h) = (t/2) h^2 - h^3 + h^4/2 + C(t)
//! ```
//!
//! where `C(t)` shifts the nematic minimum `h_plus(t)` to zero.

use serde::{Deserialize, Serialize};

use crate::error::{HedgehogError, Result};

/// Reduced temperature of the spinodal point `T*`.
pub const SPINODAL_T: f64 = 0.0;
/// Reduced temperature of the nematic-isotropic transition.
pub const TRANSITION_T: f64 = 1.0;
/// Reduced temperature above which no nematic critical point exists.
pub const SUPERHEATING_T: f64 = 9.0 / 8.0;

fn check_t(t: f64) -> Result<()> {
    if !t.is_finite() {
        return Err(HedgehogError::invalid("t", t, "must be finite"));
    }
    if t > SUPERHEATING_T {
        return Err(HedgehogError::NoNematicState { t });
    }
    Ok(())
}

/// Positive minimizer of the reduced bulk potential, `(3 + sqrt(9 - 8t)) / 4`.
pub fn h_plus(t: f64) -> Result<f64> {
    check_t(t)?;
    Ok((3.0 + (9.0 - 8.0 * t).sqrt()) / 4.0)
}

/// Local maximum of `g` separating the isotropic and nematic wells.
///
/// Exists only for `0 < t < 9/8`; for `t <= 0` the barrier has merged with
/// the isotropic state.
pub fn h_barrier(t: f64) -> Option<f64> {
    if t > 0.0 && t < SUPERHEATING_T {
        Some((3.0 - (9.0 - 8.0 * t).sqrt()) / 4.0)
    } else {
        None
    }
}

#[inline]
fn quartic(h: f64, t: f64) -> f64 {
    let h2 = h * h;
    0.5 * t * h2 - h2 * h + 0.5 * h2 * h2
}

/// Constant `C(t)` making `g(h_plus(t), t) = 0`.
pub fn bulk_offset(t: f64) -> Result<f64> {
    let hp = h_plus(t)?;
    Ok(-quartic(hp, t))
}

/// `g(h, t)`.
pub fn g(h: f64, t: f64) -> Result<f64> {
    Ok(BulkPotential::new(t)?.g(h))
}

/// `g'(h, t) = t h - 3 h^2 + 2 h^3`.
pub fn g_prime(h: f64, t: f64) -> Result<f64> {
    Ok(BulkPotential::new(t)?.g_prime(h))
}

/// `g''(h, t) = t - 6 h + 6 h^2`.
pub fn g_second(h: f64, t: f64) -> Result<f64> {
    Ok(BulkPotential::new(t)?.g_second(h))
}

/// The reduced bulk potential at a fixed temperature, with `h_plus` and
/// `C(t)` precomputed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BulkPotential {
    t: f64,
    h_plus: f64,
    offset: f64,
}

impl BulkPotential {
    pub fn new(t: f64) -> Result<Self> {
        let h_plus = h_plus(t)?;
        Ok(Self {
            t,
            h_plus,
            offset: -quartic(h_plus, t),
        })
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn h_plus(&self) -> f64 {
        self.h_plus
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    #[inline]
    pub fn g(&self, h: f64) -> f64 {
        quartic(h, self.t) + self.offset
    }

    #[inline]
    pub fn g_prime(&self, h: f64) -> f64 {
        h * (self.t - 3.0 * h + 2.0 * h * h)
    }

    #[inline]
    pub fn g_second(&self, h: f64) -> f64 {
        self.t - 6.0 * h + 6.0 * h * h
    }

    /// Coefficients of `g'` as a polynomial in `h`, lowest degree first.
    pub fn g_prime_coefficients(&self) -> [f64; 4] {
        [0.0, self.t, -3.0, 2.0]
    }
}

/// Temperature regime of the bulk potential.
///
/// Breakpoints at `t = 0, 1, 9/8`; a breakpoint belongs to the regime above it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TemperatureRegime {
    /// `t < 0`: the isotropic state is not a local minimizer.
    IsotropicUnstable,
    /// `0 <= t < 1`: isotropic metastable, nematic global minimizer.
    NematicGlobal,
    /// `1 <= t < 9/8`: nematic metastable, isotropic global minimizer.
    NematicMetastable,
    /// `t >= 9/8`: the isotropic state is the only minimizer.
    IsotropicOnly,
}

pub fn classify_regime(t: f64) -> TemperatureRegime {
    if t < SPINODAL_T {
        TemperatureRegime::IsotropicUnstable
    } else if t < TRANSITION_T {
        TemperatureRegime::NematicGlobal
    } else if t < SUPERHEATING_T {
        TemperatureRegime::NematicMetastable
    } else {
        TemperatureRegime::IsotropicOnly
    }
}

/// Dimensionless problem parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReducedParams {
    pub t: f64,
    #[serde(rename = "R")]
    pub radius: f64,
}

impl ReducedParams {
    pub fn new(t: f64, radius: f64) -> Result<Self> {
        let p = Self { t, radius };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        check_t(self.t)?;
        if !(self.radius.is_finite() && self.radius > 0.0) {
            return Err(HedgehogError::invalid("R", self.radius, "must be positive"));
        }
        Ok(())
    }

    /// Validates and additionally demands `t < 1`.
    pub fn require_nematic_global(&self, operation: &'static str) -> Result<()> {
        self.validate()?;
        if self.t >= TRANSITION_T {
            return Err(HedgehogError::NotNematicGlobal { operation, t: self.t });
        }
        Ok(())
    }

    pub fn h_plus(&self) -> Result<f64> {
        h_plus(self.t)
    }

    pub fn regime(&self) -> TemperatureRegime {
        classify_regime(self.t)
    }
}

/// Physical material constants before rescaling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaterialParams {
    /// Temperature slope of `a`, per kelvin.
    pub a0: f64,
    /// Temperature in kelvin.
    #[serde(rename = "T")]
    pub temperature: f64,
    /// Spinodal temperature in kelvin.
    #[serde(rename = "T_star")]
    pub t_star: f64,
    pub b: f64,
    pub c: f64,
    #[serde(rename = "L")]
    pub elastic: f64,
    /// Droplet radius in physical length units.
    #[serde(rename = "R_phys")]
    pub radius: f64,
}

impl MaterialParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("a0", self.a0),
            ("b", self.b),
            ("c", self.c),
            ("L", self.elastic),
            ("R_phys", self.radius),
        ];
        for (name, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(HedgehogError::invalid(name, value, "must be positive"));
            }
        }
        for (name, value) in [("T", self.temperature), ("T_star", self.t_star)] {
            if !value.is_finite() {
                return Err(HedgehogError::invalid(name, value, "must be finite"));
            }
        }
        Ok(())
    }

    /// `a = a0 (T - T*)`.
    pub fn a(&self) -> f64 {
        self.a0 * (self.temperature - self.t_star)
    }
}

/// Output of [`nondimensionalize`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RescaleResult {
    pub t: f64,
    #[serde(rename = "R")]
    pub radius: f64,
    /// Coherence length, physical length units.
    pub xi: f64,
    /// Tensor amplitude scale.
    pub q0: f64,
    /// Physical energy per unit reduced energy.
    pub energy_scale: f64,
}

impl RescaleResult {
    /// The reduced parameters. Not validated: `t` may exceed 9/8.
    pub fn reduced(&self) -> ReducedParams {
        ReducedParams {
            t: self.t,
            radius: self.radius,
        }
    }
}

/// Rescales lengths by `xi = sqrt(27 c L / b^2)` and tensors by
/// `q0 = sqrt(27 c^2 / (2 b^2))`, giving reduced temperature
/// `t = 27 a c / b^2`.
pub fn nondimensionalize(p: &MaterialParams) -> Result<RescaleResult> {
    p.validate()?;
    let b2 = p.b * p.b;
    let xi = (27.0 * p.c * p.elastic / b2).sqrt();
    let q0 = (27.0 * p.c * p.c / (2.0 * b2)).sqrt();
    let energy_scale = (4.0 * b2 * p.elastic.powi(3) / (27.0 * p.c.powi(3))).sqrt();
    Ok(RescaleResult {
        t: 27.0 * p.a() * p.c / b2,
        radius: p.radius / xi,
        xi,
        q0,
        energy_scale,
    })
}

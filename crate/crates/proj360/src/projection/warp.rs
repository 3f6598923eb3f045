//! Per-axis face warping functions for the cubemap family.
//!
//! A warp maps the coded face coordinate in [-1, 1] to the cube-surface
//! coordinate in [-1, 1]. Every family is odd, strictly monotone and fixes
//! the endpoints, so the inverse is well defined.

use crate::error::{Error, Result};

use std::f64::consts::FRAC_PI_4;

/// Default polynomial coefficients: quadratic fit of the tangent warp with
/// the endpoint constraint a + b = 1.
pub const DEFAULT_POLY_COEFFS: (f64, f64) = (0.34, 0.66);

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WarpFunction {
    /// No warping (plain cubemap).
    Identity,
    /// Equiangular law: cube = tan(s * pi/4).
    Tangent,
    /// Odd quadratic: cube = sign(s) * (a*s^2 + b*|s|).
    Polynomial { a: f64, b: f64 },
}

impl WarpFunction {
    /// Validates the polynomial invariants: a + b = 1 (endpoint fixing,
    /// within 1e-12) and strict monotonicity on [-1, 1].
    pub fn polynomial(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite()) || ((a + b) - 1.0).abs() > 1e-12 {
            return Err(Error::Domain(format!(
                "polynomial warp coefficients ({a}, {b}) must satisfy a + b = 1"
            )));
        }
        // Derivative 2a*s + b on [0, 1] must stay positive.
        if b <= 0.0 || 2.0 * a + b <= 0.0 {
            return Err(Error::Domain(format!(
                "polynomial warp ({a}, {b}) is not strictly monotone on [-1, 1]"
            )));
        }
        Ok(WarpFunction::Polynomial { a, b })
    }
}

/// Coded coordinate -> cube coordinate.
pub fn warp_eval(w: &WarpFunction, s: f64) -> Result<f64> {
    if !(-1.0..=1.0).contains(&s) {
        return Err(Error::Domain(format!("warp input {s} outside [-1, 1]")));
    }
    Ok(match *w {
        WarpFunction::Identity => s,
        WarpFunction::Tangent => (s * FRAC_PI_4).tan(),
        WarpFunction::Polynomial { a, b } => {
            let m = s.abs();
            (a * m * m + b * m).copysign(s)
        }
    })
}

/// Cube coordinate -> coded coordinate; exact inverse of [`warp_eval`].
pub fn warp_invert(w: &WarpFunction, c: f64) -> Result<f64> {
    if !(-1.0..=1.0).contains(&c) {
        return Err(Error::Domain(format!("warp input {c} outside [-1, 1]")));
    }
    Ok(match *w {
        WarpFunction::Identity => c,
        WarpFunction::Tangent => c.atan() / FRAC_PI_4,
        WarpFunction::Polynomial { a, b } => {
            // Positive root of a*x^2 + b*x - |c| = 0. With a + b = 1 the
            // discriminant equals (2a + b)^2 at |c| = 1, so it stays
            // positive for every monotone coefficient pair. The division
            // form is stable as a -> 0.
            let m = c.abs();
            let x = 2.0 * m / (b + (b * b + 4.0 * a * m).sqrt());
            x.min(1.0).copysign(c)
        }
    })
}

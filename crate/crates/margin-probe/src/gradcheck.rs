//! Central finite-difference validation of analytic gradients.
//!
//! Run in `f64`: with the default step `1e-5` the truncation error of the
//! central difference is O(1e-10), far below the tolerances asserted by the
//! test suites. Tensor-valued primitives are reduced to a scalar through a
//! fixed cotangent so their vector-Jacobian products can be checked the same
//! way as plain scalar losses.

use crate::error::{Error, Result};

pub const DEFAULT_STEP: f64 = 1e-5;

/// Relative error between an analytic and a numeric derivative component:
/// `|a - n| / max(1, |a|, |n|)`.
pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1.0)
}

/// Central finite-difference gradient of a scalar function at `point`.
pub fn central_difference<F>(f: F, point: &[f64], step: f64) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    let mut probe = point.to_vec();
    let mut grad = Vec::with_capacity(point.len());
    for i in 0..point.len() {
        let orig = probe[i];
        probe[i] = orig + step;
        let hi = f(&probe)?;
        probe[i] = orig - step;
        let lo = f(&probe)?;
        probe[i] = orig;
        if !hi.is_finite() || !lo.is_finite() {
            return Err(Error::Numeric(format!(
                "non-finite probe value while differencing coordinate {i}"
            )));
        }
        grad.push((hi - lo) / (2.0 * step));
    }
    Ok(grad)
}

/// Compares an analytic gradient of a scalar function against central
/// differences; returns the maximum relative error over all coordinates.
pub fn check_scalar<F>(f: F, point: &[f64], analytic: &[f64], step: f64) -> Result<f64>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    if analytic.len() != point.len() {
        return Err(Error::Shape {
            op: "grad_check",
            detail: format!(
                "analytic gradient has {} coordinates, point has {}",
                analytic.len(),
                point.len()
            ),
        });
    }
    if analytic.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("non-finite analytic gradient".into()));
    }
    let numeric = central_difference(f, point, step)?;
    let mut worst = 0.0f64;
    for (&a, &n) in analytic.iter().zip(&numeric) {
        worst = worst.max(relative_error(a, n));
    }
    Ok(worst)
}

/// Checks a vector-Jacobian product. `forward` maps a flat coordinate vector
/// (input and parameters concatenated however the caller likes) to the
/// primitive's flat output; `vjp` is the analytic gradient of
/// `dot(cotangent, forward(point))` w.r.t. the same coordinates.
pub fn check_vjp<F>(forward: F, point: &[f64], cotangent: &[f64], vjp: &[f64], step: f64) -> Result<f64>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let scalar = |coords: &[f64]| -> Result<f64> {
        let out = forward(coords)?;
        if out.len() != cotangent.len() {
            return Err(Error::Shape {
                op: "grad_check",
                detail: format!(
                    "forward produced {} outputs, cotangent has {}",
                    out.len(),
                    cotangent.len()
                ),
            });
        }
        Ok(out.iter().zip(cotangent).map(|(o, c)| o * c).sum())
    };
    check_scalar(scalar, point, vjp, step)
}

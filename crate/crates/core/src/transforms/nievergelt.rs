//! The planar (n = 2, k = 1) filter G_a(t) = (πa²)^{−1} w(|t|/a).

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::kernels::{w_xray_outside, XrayMethod};

/// 1/(πa²) for |t| ≤ a, and (1/(πa²))(1 − 1/√(1 − a²/t²)) beyond.
pub fn nievergelt_ga(t: f64, a: f64) -> Result<f64> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(Error::domain(format!("scale a must be positive, got {a}")));
    }
    if !t.is_finite() {
        return Err(Error::domain(format!("t must be finite, got {t}")));
    }
    let r = t.abs() / a;
    let w = if r <= 1.0 {
        1.0
    } else {
        w_xray_outside(2, r - 1.0, XrayMethod::ClosedForm)?
    };
    Ok(w / (PI * a * a))
}

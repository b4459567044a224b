//! Gauss hypergeometric function ₂F₁(a, b; c; z) on 0 ≤ z < 1.
//!
//! Power series for z ≤ 0.9. Above that the z → 1 − z connection formula is
//! used, which only needs the two series in 1 − z < 0.1. When c − a − b is an
//! integer the connection formula degenerates and we fall back to the direct
//! series with a larger term budget.

use super::gamma::{gamma_real, rgamma};
use crate::error::{Error, Result};

const SERIES_TERMS: usize = 20_000;
const DIRECT_LIMIT: f64 = 0.9;
const DEGENERATE_SERIES_TERMS: usize = 2_000_000;

/// ₂F₁(a, b; c; z) for c > 0 and z ∈ [0, 1).
pub fn gauss_2f1(a: f64, b: f64, c: f64, z: f64) -> Result<f64> {
    hyp2f1_with_complement(a, b, c, z, 1.0 - z)
}

/// Same as [`gauss_2f1`], with 1 − z supplied by the caller so that it keeps
/// full relative precision when z is within a few ulps of 1.
pub(crate) fn hyp2f1_with_complement(a: f64, b: f64, c: f64, z: f64, one_minus_z: f64) -> Result<f64> {
    if !(c > 0.0) || !c.is_finite() {
        return Err(Error::domain(format!("2F1 requires c > 0, got c = {c}")));
    }
    if !(0.0..1.0).contains(&z) || !(one_minus_z > 0.0) {
        return Err(Error::domain(format!("2F1 requires 0 <= z < 1, got z = {z}")));
    }
    if z <= DIRECT_LIMIT {
        return series(a, b, c, z, SERIES_TERMS);
    }

    let s = c - a - b;
    if (s - s.round()).abs() < 1e-9 {
        return series(a, b, c, z, DEGENERATE_SERIES_TERMS);
    }

    let w = one_minus_z;
    let gc = gamma_real(c);
    let first = gc * gamma_real(s) * rgamma(c - a) * rgamma(c - b);
    let second = gc * gamma_real(-s) * rgamma(a) * rgamma(b);
    let mut value = 0.0;
    if first != 0.0 {
        value += first * series(a, b, 1.0 - s, w, SERIES_TERMS)?;
    }
    if second != 0.0 {
        value += second * w.powf(s) * series(c - a, c - b, 1.0 + s, w, SERIES_TERMS)?;
    }
    Ok(value)
}

fn series(a: f64, b: f64, c: f64, z: f64, max_terms: usize) -> Result<f64> {
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut quiet = 0;
    for j in 0..max_terms {
        let jf = j as f64;
        term *= (a + jf) * (b + jf) / ((c + jf) * (jf + 1.0)) * z;
        sum += term;
        if term == 0.0 {
            return Ok(sum);
        }
        if term.abs() <= 1e-17 * sum.abs() {
            quiet += 1;
            if quiet >= 3 {
                return Ok(sum);
            }
        } else {
            quiet = 0;
        }
    }
    Err(Error::Accuracy {
        estimate: sum,
        error_bound: term.abs(),
        context: format!("2F1 series ({a}, {b}; {c}; {z}) did not converge in {max_terms} terms"),
    })
}

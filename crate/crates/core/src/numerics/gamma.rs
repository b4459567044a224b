//! Gamma function wrappers.
//!
//! The public entry point only accepts positive arguments; the hypergeometric
//! connection formulas also need Γ at negative non-integers and 1/Γ at the
//! poles, which live here as crate-internal helpers.

use crate::error::{Error, Result};

/// Γ(x) for x > 0.
pub fn gamma_fn(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::domain(format!("gamma_fn requires x > 0, got {x}")));
    }
    Ok(statrs::function::gamma::gamma(x))
}

/// Γ(x) for any real x that is not a pole.
pub(crate) fn gamma_real(x: f64) -> f64 {
    statrs::function::gamma::gamma(x)
}

/// 1/Γ(x), zero at the poles x = 0, −1, −2, ….
pub(crate) fn rgamma(x: f64) -> f64 {
    if x <= 0.0 && x == x.round() {
        0.0
    } else {
        1.0 / gamma_real(x)
    }
}

/// Beta function B(a, b) for a, b > 0.
pub(crate) fn beta_fn(a: f64, b: f64) -> f64 {
    (statrs::function::gamma::ln_gamma(a) + statrs::function::gamma::ln_gamma(b)
        - statrs::function::gamma::ln_gamma(a + b))
    .exp()
}

/// Γ(m/2) for m ≥ 1 by the recurrence from Γ(1) = 1 or Γ(1/2) = √π.
pub(crate) fn gamma_half(m: usize) -> f64 {
    let mut x = if m.is_multiple_of(2) {
        1.0
    } else {
        std::f64::consts::PI.sqrt()
    };
    let mut j = 2 - m % 2;
    while j + 2 <= m {
        x *= j as f64 / 2.0;
        j += 2;
    }
    x
}

/// π^{m/2}.
pub(crate) fn pi_half_power(m: usize) -> f64 {
    let pi = std::f64::consts::PI;
    let whole = pi.powi((m / 2) as i32);
    if m.is_multiple_of(2) {
        whole
    } else {
        whole * pi.sqrt()
    }
}

/// m! as a float.
pub(crate) fn factorial(m: usize) -> f64 {
    (1..=m).fold(1.0, |acc, j| acc * j as f64)
}

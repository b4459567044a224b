//! Mollifiers ψ, reconstruction kernels w, and their normalizations.

mod kernel;
mod profile;
mod terms;
mod xray;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::{gamma_half, pi_half_power};

pub use kernel::{tilde_pair, w_theorem_b_build, KernelFamily, KernelValue, PiecewiseRadialKernel, TildePair};
pub use profile::{lambda_psi, lambda_quadrature, psi_eval, ProfileFamily, RadialProfile};
pub use terms::{halfd_apply, Term};
pub use xray::{w_xray_eval, XrayMethod};

pub(crate) use xray::w_xray_outside;

/// Ambient dimension n, plane dimension k and ℓ = ⌊k/2⌋.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct Dims {
    n: usize,
    k: usize,
    ell: usize,
}

impl Dims {
    pub fn new(n: usize, k: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::domain(format!("n must be at least 2, got {n}")));
        }
        if k < 1 || k >= n {
            return Err(Error::domain(format!(
                "k must satisfy 1 <= k < n, got n = {n}, k = {k}"
            )));
        }
        let ell = k / 2;
        let dims = Dims { n, k, ell };
        let gamma_arg = if k.is_multiple_of(2) {
            n as f64 / 2.0 - ell as f64
        } else {
            (n as f64 - 1.0) / 2.0 - ell as f64
        };
        if !(gamma_arg > 0.0) {
            return Err(Error::domain(format!("invalid dimensions n = {n}, k = {k}")));
        }
        Ok(dims)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn ell(&self) -> usize {
        self.ell
    }

    /// Codimension n − k.
    pub fn m(&self) -> usize {
        self.n - self.k
    }

    pub fn k_even(&self) -> bool {
        self.k.is_multiple_of(2)
    }
}

/// Area of the unit sphere S^{m−1} ⊂ ℝ^m.
pub fn sphere_area(m: usize) -> Result<f64> {
    if m < 1 {
        return Err(Error::domain("sphere_area requires m >= 1"));
    }
    Ok(sphere_area_unchecked(m))
}

pub(crate) fn sphere_area_unchecked(m: usize) -> f64 {
    2.0 * pi_half_power(m) / gamma_half(m)
}

/// Volume of the unit ball in ℝ^m (1 for m = 0).
pub(crate) fn ball_volume(m: usize) -> f64 {
    pi_half_power(m) / gamma_half(m + 2)
}

/// c = σ_{k−1} σ_{n−k−1} / σ_{n−1}.
pub fn abel_constant(dims: Dims) -> f64 {
    sphere_area_unchecked(dims.k) * sphere_area_unchecked(dims.m()) / sphere_area_unchecked(dims.n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::gamma_real;
    use std::f64::consts::PI;

    #[test]
    fn dims_validation() {
        assert!(Dims::new(1, 1).is_err());
        assert!(Dims::new(3, 0).is_err());
        assert!(Dims::new(3, 3).is_err());
        let d = Dims::new(7, 5).unwrap();
        assert_eq!((d.n(), d.k(), d.ell(), d.m()), (7, 5, 2, 2));
        assert!(!d.k_even());
        assert_eq!(Dims::new(6, 4).unwrap().ell(), 2);
    }

    #[test]
    fn sphere_areas() {
        assert!((sphere_area(1).unwrap() - 2.0).abs() < 1e-15);
        assert!((sphere_area(2).unwrap() - 2.0 * PI).abs() < 1e-14);
        assert!((sphere_area(3).unwrap() - 4.0 * PI).abs() < 1e-14);
        assert!(sphere_area(0).is_err());
    }

    #[test]
    fn abel_constants() {
        let c = |n, k| abel_constant(Dims::new(n, k).unwrap());
        assert!((c(2, 1) - 2.0 / PI).abs() < 1e-15);
        assert!((c(3, 1) - 1.0).abs() < 1e-15);
        assert!((c(3, 2) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn normalizing_constant_is_one() {
        // 2Γ(n/2) / (c Γ(k/2) Γ((n−k)/2)) = 1
        for n in 2..=10 {
            for k in 1..n {
                let d = Dims::new(n, k).unwrap();
                let h = |x: usize| gamma_real(x as f64 / 2.0);
                let c_prime = 2.0 * h(n) / (abel_constant(d) * h(k) * h(n - k));
                assert!((c_prime - 1.0).abs() < 1e-12, "n = {n}, k = {k}: {c_prime}");
            }
        }
    }
}

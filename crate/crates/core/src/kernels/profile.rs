//! Mollifier families ψ and their integrals λ = ∫ψ(|x|)dx.

use serde::Serialize;

use super::{ball_volume, sphere_area_unchecked, Dims};
use crate::error::{Error, Result};
use crate::numerics::{factorial, gamma_half, integrate_offsets, Abscissa, QuadratureSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ProfileFamily {
    /// ψ = 1 on [0, 1], 0 beyond.
    IndicatorBall,
    /// ψ = 0 on [0, 1], (r²−1)^ℓ r^{−(n+2ℓ+1)} beyond.
    PowerTail { ell: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RadialProfile {
    pub family: ProfileFamily,
    pub dims: Dims,
    pub lambda: f64,
}

impl RadialProfile {
    pub fn new(family: ProfileFamily, dims: Dims) -> Self {
        let mut profile = RadialProfile {
            family,
            dims,
            lambda: 0.0,
        };
        profile.lambda = lambda_psi(&profile);
        profile
    }

    pub fn indicator(dims: Dims) -> Self {
        Self::new(ProfileFamily::IndicatorBall, dims)
    }

    /// The power-tail profile whose ℓ matches `dims`.
    pub fn power_tail(dims: Dims) -> Self {
        Self::new(ProfileFamily::PowerTail { ell: dims.ell() }, dims)
    }

    /// ψ on r ≤ 1.
    pub(crate) fn inside_value(&self) -> f64 {
        match self.family {
            ProfileFamily::IndicatorBall => 1.0,
            ProfileFamily::PowerTail { .. } => 0.0,
        }
    }

    /// ψ(1 + rm1) for rm1 > 0.
    pub(crate) fn eval_outside(&self, rm1: f64) -> f64 {
        match self.family {
            ProfileFamily::IndicatorBall => 0.0,
            ProfileFamily::PowerTail { ell } => {
                let r = 1.0 + rm1;
                let n = self.dims.n() as i32;
                let l = ell as i32;
                (rm1 * (2.0 + rm1)).powi(l) * r.powi(-(n + 2 * l + 1))
            }
        }
    }

    pub(crate) fn eval_unchecked(&self, r: f64) -> f64 {
        if r <= 1.0 {
            self.inside_value()
        } else {
            self.eval_outside(r - 1.0)
        }
    }
}

pub fn psi_eval(profile: &RadialProfile, r: f64) -> Result<f64> {
    if !(r >= 0.0) {
        return Err(Error::domain(format!("psi_eval requires r >= 0, got {r}")));
    }
    Ok(profile.eval_unchecked(r))
}

/// Closed-form λ.
pub fn lambda_psi(profile: &RadialProfile) -> f64 {
    let n = profile.dims.n();
    match profile.family {
        ProfileFamily::IndicatorBall => ball_volume(n),
        ProfileFamily::PowerTail { ell } => {
            sphere_area_unchecked(n) * std::f64::consts::PI.sqrt() * factorial(ell) / (2.0 * gamma_half(2 * ell + 3))
        }
    }
}

/// λ = σ_{n−1} ∫₀^∞ ψ(r) r^{n−1} dr by quadrature, used to cross-check [`lambda_psi`].
pub fn lambda_quadrature(profile: &RadialProfile, spec: &QuadratureSpec) -> Result<f64> {
    let n = profile.dims.n() as i32;
    let sigma = sphere_area_unchecked(profile.dims.n());
    let inner = if profile.inside_value() != 0.0 {
        let v = integrate_offsets(
            |s: Abscissa| Ok(profile.inside_value() * s.x.powi(n - 1)),
            0.0,
            1.0,
            spec,
        )?;
        v.value
    } else {
        0.0
    };
    let outer = match profile.family {
        ProfileFamily::IndicatorBall => 0.0,
        // r = 1/t maps the tail onto (0, 1]; ψ(1/t) t^{−n−1} is a polynomial in t.
        ProfileFamily::PowerTail { .. } => {
            let v = integrate_offsets(
                |t: Abscissa| {
                    if t.x == 0.0 {
                        return Ok(0.0);
                    }
                    let rm1 = t.to_hi / t.x;
                    Ok(profile.eval_outside(rm1) * t.x.powi(-n - 1))
                },
                0.0,
                1.0,
                spec,
            )?;
            v.value
        }
    };
    Ok(sigma * (inner + outer))
}

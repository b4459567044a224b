//! Piecewise radial kernels: a constant on [0, 1] and a term sum beyond.

use serde::Serialize;

use super::terms::{expand_integer_alpha, halfd_apply, Term};
use super::xray::{w_xray_outside, XrayMethod};
use super::{abel_constant, Dims, RadialProfile};
use crate::error::{Error, Result};
use crate::numerics::{factorial, gamma_real};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum KernelFamily {
    /// k = 1 kernel paired with the indicator mollifier.
    TheoremA,
    /// Power-tail pair for even k.
    TheoremBEven,
    /// Power-tail pair for odd k.
    TheoremBOdd,
    Custom,
}

/// Kernel value, with blow-up reported instead of a non-finite float.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelValue {
    Finite(f64),
    Unbounded,
}

impl KernelValue {
    pub fn finite(self) -> Option<f64> {
        match self {
            KernelValue::Finite(v) => Some(v),
            KernelValue::Unbounded => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PiecewiseRadialKernel {
    pub inside_value: f64,
    /// Σ coef·(r²−1)^α·r^β for r > 1. Empty for [`KernelFamily::TheoremA`],
    /// whose outside branch is not a finite sum.
    pub outside_terms: Vec<Term>,
    pub family: KernelFamily,
    pub dims: Dims,
}

impl PiecewiseRadialKernel {
    /// The X-ray kernel in ℝⁿ (k = 1).
    pub fn theorem_a(n: usize) -> Result<Self> {
        Ok(PiecewiseRadialKernel {
            inside_value: 1.0,
            outside_terms: Vec::new(),
            family: KernelFamily::TheoremA,
            dims: Dims::new(n, 1)?,
        })
    }

    pub fn theorem_b(dims: Dims) -> Self {
        w_theorem_b_build(dims)
    }

    pub fn custom(dims: Dims, inside_value: f64, outside_terms: Vec<Term>) -> Result<Self> {
        if let Some(t) = outside_terms
            .iter()
            .find(|t| !(t.alpha > -1.0) || !t.coef.is_finite() || !t.beta.is_finite())
        {
            return Err(Error::domain(format!(
                "kernel term {t:?} is not locally integrable at r = 1"
            )));
        }
        Ok(PiecewiseRadialKernel {
            inside_value,
            outside_terms,
            family: KernelFamily::Custom,
            dims,
        })
    }

    /// The mollifier this kernel is built for.
    pub fn matching_profile(&self) -> RadialProfile {
        match self.family {
            KernelFamily::TheoremA => RadialProfile::indicator(self.dims),
            _ => RadialProfile::power_tail(self.dims),
        }
    }

    pub fn eval(&self, r: f64) -> Result<KernelValue> {
        if !(r >= 0.0) {
            return Err(Error::domain(format!("kernel argument must be non-negative, got {r}")));
        }
        let v = self.eval_unchecked(r)?;
        Ok(if v.is_finite() {
            KernelValue::Finite(v)
        } else {
            KernelValue::Unbounded
        })
    }

    pub(crate) fn eval_unchecked(&self, r: f64) -> Result<f64> {
        if r <= 1.0 {
            Ok(self.inside_value)
        } else {
            self.eval_outside(r - 1.0)
        }
    }

    /// w(1 + rm1) for rm1 > 0, with r − 1 supplied exactly.
    pub(crate) fn eval_outside(&self, rm1: f64) -> Result<f64> {
        match self.family {
            KernelFamily::TheoremA => w_xray_outside(self.dims.n(), rm1, XrayMethod::default_for(self.dims.n())),
            _ => Ok(self.outside_terms.iter().map(|t| t.eval_outside(rm1)).sum()),
        }
    }
}

/// Builds the power-tail kernel from the ℓ-fold operator (1/(2r)) d/dr.
pub fn w_theorem_b_build(dims: Dims) -> PiecewiseRadialKernel {
    let n = dims.n() as f64;
    let ell = dims.ell();
    let l = ell as f64;
    let (mut terms, applications, shift, scale, family) = if dims.k_even() {
        (
            vec![Term::new(1.0, l, -2.0 * l - 3.0)],
            ell,
            2.0 + 2.0 * l - n,
            gamma_real(n / 2.0 - l) / gamma_real(n / 2.0),
            KernelFamily::TheoremBEven,
        )
    } else {
        (
            vec![Term::new(1.0, l + 0.5, -2.0 * l - 2.0)],
            ell + 1,
            3.0 + 2.0 * l - n,
            gamma_real((n - 1.0) / 2.0 - l) * factorial(ell) / (gamma_real(n / 2.0) * gamma_real(l + 1.5)),
            KernelFamily::TheoremBOdd,
        )
    };
    for _ in 0..applications {
        terms = halfd_apply(&terms);
    }
    for t in &mut terms {
        t.beta += shift;
        t.coef *= scale;
    }
    PiecewiseRadialKernel {
        inside_value: 0.0,
        outside_terms: expand_integer_alpha(&terms),
        family,
        dims,
    }
}

/// The pair w̃(u) = u^{(n−k)/2−1} w(√u), ψ̃(u) = 2u^{n/2−1} ψ(√u)/(c Γ(k/2)),
/// which satisfy I^{k/2} w̃ = ψ̃.
#[derive(Debug, Clone)]
pub struct TildePair {
    kernel: PiecewiseRadialKernel,
    profile: RadialProfile,
    psi_scale: f64,
}

pub fn tilde_pair(kernel: &PiecewiseRadialKernel, profile: &RadialProfile) -> Result<TildePair> {
    if kernel.dims != profile.dims {
        return Err(Error::domain("kernel and profile dimensions differ"));
    }
    let dims = kernel.dims;
    Ok(TildePair {
        kernel: kernel.clone(),
        profile: *profile,
        psi_scale: 2.0 / (abel_constant(dims) * gamma_real(dims.k() as f64 / 2.0)),
    })
}

impl TildePair {
    pub fn w_tilde(&self, u: f64) -> Result<f64> {
        check_u(u)?;
        self.w_tilde_split(u, u - 1.0)
    }

    pub fn psi_tilde(&self, u: f64) -> Result<f64> {
        check_u(u)?;
        self.psi_tilde_split(u, u - 1.0)
    }

    /// w̃ with u − 1 supplied separately.
    pub(crate) fn w_tilde_split(&self, u: f64, um1: f64) -> Result<f64> {
        let e = self.kernel.dims.m() as f64 / 2.0 - 1.0;
        let w = if um1 <= 0.0 {
            self.kernel.inside_value
        } else {
            self.kernel.eval_outside(um1 / (u.sqrt() + 1.0))?
        };
        Ok(pow_or_one(u, e) * w)
    }

    pub(crate) fn psi_tilde_split(&self, u: f64, um1: f64) -> Result<f64> {
        let e = self.kernel.dims.n() as f64 / 2.0 - 1.0;
        let psi = if um1 <= 0.0 {
            self.profile.inside_value()
        } else {
            self.profile.eval_outside(um1 / (u.sqrt() + 1.0))
        };
        Ok(self.psi_scale * pow_or_one(u, e) * psi)
    }

    pub fn dims(&self) -> Dims {
        self.kernel.dims
    }
}

fn pow_or_one(u: f64, e: f64) -> f64 {
    if e == 0.0 {
        1.0
    } else {
        u.powf(e)
    }
}

fn check_u(u: f64) -> Result<()> {
    if !(u > 0.0) || !u.is_finite() {
        return Err(Error::domain(format!("tilde functions need u > 0, got {u}")));
    }
    Ok(())
}

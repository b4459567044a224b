//! Numerical checks of the Abel-type equation linking w and ψ,
//!
//! c r^{2−n} ∫₀^r s^{n−k−1} w(s) (r²−s²)^{k/2−1} ds = ψ(r),
//!
//! and of its Riemann–Liouville form I^{k/2} w̃ = ψ̃ after u = r².

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernels::{abel_constant, tilde_pair, Dims, PiecewiseRadialKernel, RadialProfile, TildePair};
use crate::numerics::{gamma_real, integrate_pieces, integrate_smooth_ends, singular_quad, Abscissa, QuadratureSpec};

/// Grid points closer than this to r = 1 are moved to 1 ± GRID_OFFSET.
pub const GRID_OFFSET: f64 = 1e-3;

/// (1/Γ(α)) ∫ₐᵘ (u−v)^{α−1} g(v) dv.
pub fn riemann_liouville<G>(g: G, alpha: f64, a: f64, u: f64, spec: &QuadratureSpec) -> Result<f64>
where
    G: Fn(f64) -> f64,
{
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::domain(format!("fractional order must be positive, got {alpha}")));
    }
    if !(u > a) {
        return Err(Error::domain(format!("need u > a, got a = {a}, u = {u}")));
    }
    Ok(singular_quad(g, a, u, (alpha - 1.0, 0.0), spec)? / gamma_real(alpha))
}

/// Left side of the Abel equation at r.
pub fn abel_lhs(kernel: &PiecewiseRadialKernel, dims: Dims, r: f64, spec: &QuadratureSpec) -> Result<f64> {
    if kernel.dims != dims {
        return Err(Error::domain("kernel dimensions do not match"));
    }
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::domain(format!("abel_lhs needs r > 0, got {r}")));
    }
    let m = dims.m() as i32;
    let e = dims.k() as f64 / 2.0 - 1.0;
    let weight = |r_minus_s: f64, s: f64| {
        if e == 0.0 {
            1.0
        } else {
            (r_minus_s * (r + s)).powf(e)
        }
    };
    let est = if r <= 1.0 {
        integrate_smooth_ends(
            |s: Abscissa| Ok(s.x.powi(m - 1) * kernel.inside_value * weight(s.to_hi, s.x)),
            0.0,
            r,
            spec,
        )?
    } else {
        let rm1 = r - 1.0;
        integrate_pieces(
            |piece, s: Abscissa| {
                let (w, r_minus_s) = if piece == 0 {
                    (kernel.inside_value, rm1 + s.to_hi)
                } else {
                    (kernel.eval_outside(s.from_lo)?, s.to_hi)
                };
                Ok(s.x.powi(m - 1) * w * weight(r_minus_s, s.x))
            },
            &[0.0, 1.0, r],
            spec,
        )?
    };
    Ok(abel_constant(dims) * r.powi(2 - dims.n() as i32) * est.value)
}

/// I^{k/2} w̃ at u = 1 + um1, with the integral split at v = 1.
pub(crate) fn fractional_lhs(pair: &TildePair, u: f64, um1: f64, spec: &QuadratureSpec) -> Result<f64> {
    let dims = pair.dims();
    let order = dims.k() as f64 / 2.0;
    let e = order - 1.0;
    let weight = |u_minus_v: f64| if e == 0.0 { 1.0 } else { u_minus_v.powf(e) };
    let est = if um1 <= 0.0 {
        integrate_smooth_ends(
            |v: Abscissa| Ok(weight(v.to_hi) * pair.w_tilde_split(v.x, -(v.to_hi - um1))?),
            0.0,
            u,
            spec,
        )?
    } else {
        integrate_pieces(
            |piece, v: Abscissa| {
                if piece == 0 {
                    Ok(weight(um1 + v.to_hi) * pair.w_tilde_split(v.x, -v.to_hi)?)
                } else {
                    Ok(weight(v.to_hi) * pair.w_tilde_split(v.x, v.from_lo)?)
                }
            },
            &[0.0, 1.0, u],
            spec,
        )?
    };
    Ok(est.value / gamma_real(order))
}

/// Both sides of an equation on a grid of r values.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualReport {
    pub dims: Dims,
    pub grid: Vec<f64>,
    /// Missing where the quadrature failed.
    pub lhs: Vec<Option<f64>>,
    pub rhs: Vec<f64>,
    pub failures: Vec<Option<String>>,
    /// Over the points where lhs is available.
    pub max_abs_err: f64,
    /// Over the points where lhs is available and rhs ≠ 0.
    pub max_rel_err: f64,
}

impl ResidualReport {
    fn build(dims: Dims, grid: Vec<f64>, rows: Vec<(Result<f64>, f64)>) -> Self {
        let mut lhs = Vec::with_capacity(rows.len());
        let mut rhs = Vec::with_capacity(rows.len());
        let mut failures = Vec::with_capacity(rows.len());
        let mut max_abs_err: f64 = 0.0;
        let mut max_rel_err: f64 = 0.0;
        for (l, r) in rows {
            match l {
                Ok(v) => {
                    let err = (v - r).abs();
                    max_abs_err = max_abs_err.max(err);
                    if r != 0.0 {
                        max_rel_err = max_rel_err.max(err / r.abs());
                    }
                    lhs.push(Some(v));
                    failures.push(None);
                }
                Err(e) => {
                    lhs.push(None);
                    failures.push(Some(e.to_string()));
                }
            }
            rhs.push(r);
        }
        ResidualReport {
            dims,
            grid,
            lhs,
            rhs,
            failures,
            max_abs_err,
            max_rel_err,
        }
    }

    pub fn abs_errors(&self) -> Vec<Option<f64>> {
        self.lhs
            .iter()
            .zip(&self.rhs)
            .map(|(l, r)| l.map(|l| (l - r).abs()))
            .collect()
    }

    pub fn missing(&self) -> usize {
        self.lhs.iter().filter(|l| l.is_none()).count()
    }

    /// Every point evaluated and within `tol`.
    pub fn passes(&self, tol: f64) -> bool {
        self.missing() == 0 && self.max_abs_err <= tol
    }
}

/// Moves points within [`GRID_OFFSET`] of r = 1 to 1 ± GRID_OFFSET.
pub fn offset_grid(grid: &[f64]) -> Vec<f64> {
    grid.iter()
        .map(|&r| {
            if (r - 1.0).abs() < GRID_OFFSET {
                if r < 1.0 {
                    1.0 - GRID_OFFSET
                } else {
                    1.0 + GRID_OFFSET
                }
            } else {
                r
            }
        })
        .collect()
}

fn check_pair(kernel: &PiecewiseRadialKernel, profile: &RadialProfile, dims: Dims, grid: &[f64]) -> Result<()> {
    if kernel.dims != dims || profile.dims != dims {
        return Err(Error::domain("kernel, profile and dims disagree"));
    }
    if let Some(r) = grid.iter().find(|r| !(**r > 0.0) || !r.is_finite()) {
        return Err(Error::domain(format!("grid points must be positive, got {r}")));
    }
    Ok(())
}

/// Abel equation residuals: lhs from [`abel_lhs`], rhs = ψ(r).
pub fn residual_check(
    kernel: &PiecewiseRadialKernel,
    profile: &RadialProfile,
    dims: Dims,
    grid: &[f64],
    spec: &QuadratureSpec,
) -> Result<ResidualReport> {
    check_pair(kernel, profile, dims, grid)?;
    let grid = offset_grid(grid);
    let rows: Vec<_> = grid
        .par_iter()
        .map(|&r| (abel_lhs(kernel, dims, r, spec), profile.eval_unchecked(r)))
        .collect();
    Ok(ResidualReport::build(dims, grid, rows))
}

/// Fractional-form residuals at u = r²: lhs = I^{k/2} w̃(u), rhs = ψ̃(u).
pub fn fractional_residual_check(
    kernel: &PiecewiseRadialKernel,
    profile: &RadialProfile,
    dims: Dims,
    grid: &[f64],
    spec: &QuadratureSpec,
) -> Result<ResidualReport> {
    check_pair(kernel, profile, dims, grid)?;
    let pair = tilde_pair(kernel, profile)?;
    let grid = offset_grid(grid);
    let rows: Vec<_> = grid
        .par_iter()
        .map(|&r| {
            let u = r * r;
            let um1 = (r - 1.0) * (r + 1.0);
            let rhs = pair.psi_tilde_split(u, um1);
            match rhs {
                Ok(rhs) => (fractional_lhs(&pair, u, um1, spec), rhs),
                Err(e) => (Err(e), f64::NAN),
            }
        })
        .collect();
    Ok(ResidualReport::build(dims, grid, rows))
}

/// Limit as u → 1⁺ of the right side that an indicator mollifier would force
/// on the fractional equation when k ≥ 2:
/// −(1/Γ(k/2)) ∫₀¹ (1−v)^{k/2−1} v^{(n−k)/2−1} dv = −Γ((n−k)/2)/Γ(n/2).
/// The left side tends to 0 for any locally integrable w̃, so a nonzero value
/// rules such a kernel out.
pub fn indicator_infeasibility(dims: Dims) -> Result<f64> {
    if dims.k() < 2 {
        return Err(Error::domain("no obstruction for k = 1; the X-ray kernel exists"));
    }
    let a = dims.k() as f64 / 2.0 - 1.0;
    let b = dims.m() as f64 / 2.0 - 1.0;
    let pow = |x: f64, e: f64| if e == 0.0 { 1.0 } else { x.powf(e) };
    let spec = QuadratureSpec::kernel().tightened(1e-3);
    let integral = integrate_smooth_ends(|v: Abscissa| Ok(pow(v.to_hi, a) * pow(v.from_lo, b)), 0.0, 1.0, &spec)?;
    Ok(-integral.value / gamma_real(dims.k() as f64 / 2.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::w_theorem_b_build;
    use crate::numerics::log_spaced;
    use std::f64::consts::PI;

    fn dims(n: usize, k: usize) -> Dims {
        Dims::new(n, k).unwrap()
    }

    fn spec() -> QuadratureSpec {
        QuadratureSpec::kernel()
    }

    #[test]
    fn riemann_liouville_examples() {
        for u in [0.3, 1.0, 2.5] {
            let v = riemann_liouville(|_| 1.0, 1.0, 0.0, u, &spec()).unwrap();
            assert!((v - u).abs() < 1e-12);
            let v = riemann_liouville(|_| 1.0, 0.5, 0.0, u, &spec()).unwrap();
            assert!((v - 2.0 * (u / PI).sqrt()).abs() < 1e-12);
        }
        assert!(riemann_liouville(|_| 1.0, 0.0, 0.0, 1.0, &spec()).is_err());
        assert!(riemann_liouville(|_| 1.0, 0.5, 1.0, 1.0, &spec()).is_err());
    }

    #[test]
    fn semigroup() {
        let s = spec();
        let g = |v: f64| v;
        for (alpha, beta) in [(0.5, 0.5), (1.0, 0.5)] {
            for u in [0.5, 1.0, 2.0] {
                let inner = |t: f64| {
                    if t <= 0.0 {
                        0.0
                    } else {
                        riemann_liouville(g, beta, 0.0, t, &s).unwrap()
                    }
                };
                let composed = riemann_liouville(inner, alpha, 0.0, u, &s).unwrap();
                let direct = riemann_liouville(g, alpha + beta, 0.0, u, &s).unwrap();
                assert!(
                    (composed - direct).abs() < 1e-8,
                    "({alpha}, {beta}), u = {u}: {composed} vs {direct}"
                );
            }
        }
    }

    #[test]
    fn lhs_examples() {
        let w = PiecewiseRadialKernel::theorem_a(2).unwrap();
        assert!((abel_lhs(&w, dims(2, 1), 0.5, &spec()).unwrap() - 1.0).abs() < 1e-9);
        let w = PiecewiseRadialKernel::theorem_a(3).unwrap();
        assert!(abel_lhs(&w, dims(3, 1), 2.0, &spec()).unwrap().abs() < 1e-9);
        let w = w_theorem_b_build(dims(4, 2));
        assert!((abel_lhs(&w, dims(4, 2), 2.0, &spec()).unwrap() - 3.0 / 128.0).abs() < 1e-9);
        assert!(abel_lhs(&w, dims(4, 3), 2.0, &spec()).is_err());
    }

    #[test]
    fn odd_kernel_with_cubic_denominator_solves_the_equation() {
        let d = dims(2, 1);
        let w = w_theorem_b_build(d);
        for r in [0.5, 1.5, 2.0, 5.0] {
            let lhs = abel_lhs(&w, d, r, &spec()).unwrap();
            let psi = if r > 1.0 { r.powi(-3) } else { 0.0 };
            assert!((lhs - psi).abs() < 1e-9, "r = {r}: {lhs}");
        }
    }

    #[test]
    fn residuals_on_sample_pairs() {
        let grid = log_spaced(0.05, 20.0, 30);
        let cases = [
            PiecewiseRadialKernel::theorem_a(2).unwrap(),
            w_theorem_b_build(dims(5, 3)),
            w_theorem_b_build(dims(3, 2)),
        ];
        for w in cases {
            let report = residual_check(&w, &w.matching_profile(), w.dims, &grid, &spec()).unwrap();
            assert!(report.passes(1e-6), "{:?}: {}", w.dims, report.max_abs_err);
            let frac = fractional_residual_check(&w, &w.matching_profile(), w.dims, &grid, &spec()).unwrap();
            assert!(frac.passes(1e-6), "{:?}: {}", w.dims, frac.max_abs_err);
        }
    }

    #[test]
    fn mismatched_profile_shows_up_in_residuals() {
        let d = dims(3, 1);
        let w = PiecewiseRadialKernel::theorem_a(3).unwrap();
        let report = residual_check(&w, &RadialProfile::power_tail(d), d, &[0.5, 2.0], &spec()).unwrap();
        assert!((report.max_abs_err - 1.0).abs() < 1e-8);
        assert_eq!(report.abs_errors().len(), 2);
    }

    #[test]
    fn grid_is_moved_off_one() {
        assert_eq!(
            offset_grid(&[0.5, 0.9999, 1.0, 1.0005, 2.0]),
            vec![0.5, 0.999, 1.001, 1.001, 2.0]
        );
    }

    #[test]
    fn infeasibility_constants() {
        let expected = |n: usize, k: usize| -gamma_real((n - k) as f64 / 2.0) / gamma_real(n as f64 / 2.0);
        assert!((indicator_infeasibility(dims(4, 2)).unwrap() + 1.0).abs() < 1e-10);
        assert!((indicator_infeasibility(dims(6, 2)).unwrap() + 0.5).abs() < 1e-10);
        assert!((indicator_infeasibility(dims(5, 3)).unwrap() + 4.0 / (3.0 * PI.sqrt())).abs() < 1e-10);
        for n in 3..=10 {
            for k in 2..n {
                let v = indicator_infeasibility(dims(n, k)).unwrap();
                assert!((v - expected(n, k)).abs() < 1e-10, "n = {n}, k = {k}");
                // min over x > 0 of Γ(x) is about 0.8856
                assert!(v.abs() >= 0.8856 / gamma_real(n as f64 / 2.0));
            }
        }
        assert!(indicator_infeasibility(dims(3, 1)).is_err());
    }
}

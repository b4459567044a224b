//! The X-ray (k = 1) kernel paired with the indicator mollifier.
//!
//! For r > 1,
//! w(r) = −Γ((n−1)/2) r^{−n} F(3/2, n/2; n/2+1; 1/r²) / (2√π Γ(n/2+1))
//!      = −Γ((n−1)/2) r^{3−n} / (2√π Γ(n/2)) ∫₀¹ v^{n/2−1} (r²−v)^{−3/2} dv,
//! and w = 1 on [0, 1]. All evaluators take r − 1 separately so the
//! (r²−1)^{−1/2} blow-up at r = 1⁺ keeps full relative precision.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{gamma_real, hyp2f1_with_complement, integrate_pieces, Abscissa, QuadratureSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum XrayMethod {
    /// Elementary forms, n ∈ {2, 3, 4}.
    ClosedForm,
    Hypergeometric,
    /// Direct quadrature of the integral representation.
    Quadrature,
}

impl XrayMethod {
    pub fn default_for(n: usize) -> Self {
        if n <= 4 {
            XrayMethod::ClosedForm
        } else {
            XrayMethod::Hypergeometric
        }
    }
}

pub fn w_xray_eval(n: usize, r: f64, method: XrayMethod) -> Result<f64> {
    if n < 2 {
        return Err(Error::domain(format!("n must be at least 2, got {n}")));
    }
    if !(r >= 0.0) || !r.is_finite() {
        return Err(Error::domain(format!("r must be finite and non-negative, got {r}")));
    }
    if method == XrayMethod::ClosedForm && n > 4 {
        return Err(Error::Unsupported(format!(
            "no closed form for n = {n}; use Hypergeometric"
        )));
    }
    if r <= 1.0 {
        return Ok(1.0);
    }
    w_xray_outside(n, r - 1.0, method)
}

/// w(1 + rm1) for rm1 > 0.
pub(crate) fn w_xray_outside(n: usize, rm1: f64, method: XrayMethod) -> Result<f64> {
    let r = 1.0 + rm1;
    let r2m1 = rm1 * (2.0 + rm1);
    let s = r2m1.sqrt();
    match method {
        XrayMethod::ClosedForm => match n {
            // 1 − r/s
            2 => Ok(-1.0 / (s * (r + s))),
            // (2/π)(arcsin(1/r) − 1/s), and arcsin(1/r) = arctan(1/s)
            3 => Ok(2.0 / PI * atan_minus_identity(1.0 / s)),
            // 1 − (2r²−1)/(2rs)
            4 => Ok(-1.0 / (2.0 * r * s * (r + s) * (r + s))),
            _ => Err(Error::Unsupported(format!("no closed form for n = {n}"))),
        },
        XrayMethod::Hypergeometric => {
            let nf = n as f64;
            let r2 = r * r;
            let f = hyp2f1_with_complement(1.5, nf / 2.0, nf / 2.0 + 1.0, 1.0 / r2, r2m1 / r2)?;
            Ok(
                -gamma_real((nf - 1.0) / 2.0) * r.powi(-(n as i32)) * f
                    / (2.0 * PI.sqrt() * gamma_real(nf / 2.0 + 1.0)),
            )
        }
        XrayMethod::Quadrature => {
            let nf = n as f64;
            let prefactor = -gamma_real((nf - 1.0) / 2.0) * r.powf(3.0 - nf) / (2.0 * PI.sqrt() * gamma_real(nf / 2.0));
            // q = 1 − v; the integrand (1−q)^{n/2−1} (r²−1+q)^{−3/2} varies on the
            // scale r²−1 near q = 0, so the knots grow geometrically from there.
            let mut knots = vec![0.0];
            let mut q = r2m1;
            while q < 0.5 {
                knots.push(q);
                q *= 4.0;
            }
            knots.push(1.0);
            let last = knots.len() - 2;
            let e = nf / 2.0 - 1.0;
            let spec = QuadratureSpec::kernel()
                .tightened(1e-2)
                .with_abs_tol(1e-12 / prefactor.abs());
            let integral = integrate_pieces(
                |piece, t: Abscissa| {
                    let one_minus_q = if piece == last { t.to_hi } else { 1.0 - t.x };
                    let v_pow = if e == 0.0 { 1.0 } else { one_minus_q.powf(e) };
                    Ok(v_pow * (r2m1 + t.x).powf(-1.5))
                },
                &knots,
                &spec,
            )?;
            Ok(prefactor * integral.value)
        }
    }
}

/// arctan(u) − u, with a series for small u where the difference cancels.
fn atan_minus_identity(u: f64) -> f64 {
    if u < 1e-2 {
        let u2 = u * u;
        u * u2 * (-1.0 / 3.0 + u2 * (1.0 / 5.0 + u2 * (-1.0 / 7.0 + u2 / 9.0)))
    } else {
        u.atan() - u
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const METHODS: [XrayMethod; 3] = [
        XrayMethod::ClosedForm,
        XrayMethod::Hypergeometric,
        XrayMethod::Quadrature,
    ];

    fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
        (0..count)
            .map(|i| lo * (hi / lo).powf(i as f64 / (count - 1) as f64))
            .collect()
    }

    #[test]
    fn inside_is_one() {
        for m in METHODS {
            assert_eq!(w_xray_eval(2, 0.5, m).unwrap(), 1.0);
        }
        assert_eq!(w_xray_eval(7, 1.0, XrayMethod::Hypergeometric).unwrap(), 1.0);
    }

    #[test]
    fn closed_form_examples() {
        let r = 2f64.sqrt();
        for m in METHODS {
            let w = w_xray_eval(2, r, m).unwrap();
            assert!((w - (1.0 - 2f64.sqrt())).abs() < 1e-10, "{m:?}: {w}");
        }
        let expected = 2.0 / PI * (0.5f64.asin() - 1.0 / 3f64.sqrt());
        assert!((expected + 0.034_219_26).abs() < 1e-8);
        for m in METHODS {
            let w = w_xray_eval(3, 2.0, m).unwrap();
            assert!((w - expected).abs() < 1e-10, "{m:?}: {w}");
        }
        let expected = 1.0 - 3.0 / (2.0 * 2f64.sqrt());
        for m in METHODS {
            let w = w_xray_eval(4, r, m).unwrap();
            assert!((w - expected).abs() < 1e-10, "{m:?}: {w}");
        }
    }

    #[test]
    fn closed_form_restricted_to_small_n() {
        assert!(matches!(
            w_xray_eval(5, 2.0, XrayMethod::ClosedForm),
            Err(Error::Unsupported(_))
        ));
        assert!(w_xray_eval(3, -1.0, XrayMethod::ClosedForm).is_err());
    }

    #[test]
    fn methods_agree() {
        for n in 2..=4 {
            for r in log_grid(1.001, 50.0, 200) {
                let c = w_xray_eval(n, r, XrayMethod::ClosedForm).unwrap();
                let h = w_xray_eval(n, r, XrayMethod::Hypergeometric).unwrap();
                let q = w_xray_eval(n, r, XrayMethod::Quadrature).unwrap();
                assert!(
                    (c - h).abs() <= 1e-8 && (c - q).abs() <= 1e-8,
                    "n = {n}, r = {r}: {c} {h} {q}"
                );
            }
        }
    }

    #[test]
    fn higher_dimensions_agree() {
        for n in 5..=9 {
            for r in log_grid(1.001, 50.0, 40) {
                let h = w_xray_eval(n, r, XrayMethod::Hypergeometric).unwrap();
                let q = w_xray_eval(n, r, XrayMethod::Quadrature).unwrap();
                assert!((h - q).abs() <= 1e-9 * h.abs().max(1.0), "n = {n}, r = {r}: {h} {q}");
            }
        }
    }

    #[test]
    fn finite_just_outside_one() {
        for n in 2..=6 {
            let m = XrayMethod::default_for(n);
            for rm1 in [1e-13, 1e-15, f64::EPSILON] {
                let w = w_xray_outside(n, rm1, m).unwrap();
                assert!(w.is_finite() && w < 0.0, "n = {n}, rm1 = {rm1}: {w}");
            }
            let q = w_xray_outside(n, 1e-13, XrayMethod::Quadrature).unwrap();
            let d = w_xray_outside(n, 1e-13, m).unwrap();
            assert!(((q - d) / d).abs() < 1e-8, "n = {n}: {q} vs {d}");
        }
    }

    #[test]
    fn negative_outside_one() {
        for n in 2..=10 {
            let m = XrayMethod::default_for(n);
            for r in log_grid(1.0 + 1e-9, 1e4, 300) {
                let w = w_xray_eval(n, r, m).unwrap();
                assert!(w < 0.0, "n = {n}, r = {r}: {w}");
            }
        }
    }
}

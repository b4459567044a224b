//! The backprojection W*ₐf̂(x) = a^{−n} ∫ f̂(τ) w(|x − τ|/a) dτ over all
//! k-planes τ, and the convolution ∫ f(x − ay) ψ(|y|) dy it should equal.
//!
//! For a radial phantom, f̂ on the planes parallel to ζ is a radial function F
//! on ζ^⊥ ≅ ℝ^m (m = n − k), and the planes parallel to ζ contribute
//!
//! G(z) = ∫_{ℝ^m} F(|y|) w(|z e₁ − y|/a) dy,   z = |P_{ζ⊥} x|.
//!
//! The reduced engine averages G over ζ with the projection law
//! |P_{ζ⊥}x|²/|x|² ~ Beta(m/2, k/2); the Monte Carlo engine samples ζ.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::geometry::haar_frame_from_rng;
use super::phantom::{norm, Phantom, PhantomKind, GAUSSIAN_CUTOFF};
use crate::error::{Error, Result};
use crate::kernels::{sphere_area_unchecked, PiecewiseRadialKernel, ProfileFamily, RadialProfile};
use crate::numerics::{beta_fn, integrate_pieces, integrate_smooth_ends, Abscissa, QuadratureSpec};

/// ∫_{S^{m−1}} F(|z e₁ + ρθ|) dθ for a radial F that vanishes beyond `support`.
fn sphere_integral<F>(f: &F, support: Option<f64>, m: usize, z: f64, rho: f64, spec: &QuadratureSpec) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    if m == 1 {
        return Ok(f((z - rho).abs()) + f(z + rho));
    }
    if z == 0.0 || rho == 0.0 {
        return Ok(sphere_area_unchecked(m) * f(z + rho));
    }
    let gap = (z - rho).abs();
    let mut upper = std::f64::consts::PI;
    if let Some(radius) = support {
        if radius <= gap {
            return Ok(0.0);
        }
        if radius < z + rho {
            // d(φ) = R at sin²(φ/2) = (R² − (z−ρ)²)/(4zρ)
            let s2 = (radius - gap) * (radius + gap) / (4.0 * z * rho);
            upper = 2.0 * s2.sqrt().min(1.0).asin();
        }
    }
    let power = m as i32 - 2;
    let est = integrate_smooth_ends(
        |phi: Abscissa| {
            let half_sin = (0.5 * phi.x).sin();
            let d = (gap * gap + 4.0 * z * rho * half_sin * half_sin).sqrt();
            Ok(f(d) * phi.x.sin().powi(power))
        },
        0.0,
        upper,
        spec,
    )?;
    Ok(sphere_area_unchecked(m - 1) * est.value)
}

/// Nested tolerances for a value of size ~1 obtained as `scale` times an integral.
#[derive(Debug, Clone, Copy)]
struct Tolerances {
    outer: QuadratureSpec,
    radial: QuadratureSpec,
    angular: QuadratureSpec,
}

impl Tolerances {
    fn new(spec: &QuadratureSpec, a: f64, n: usize, k: usize) -> Self {
        let an = a.powi(n as i32);
        Tolerances {
            outer: spec.with_abs_tol(spec.abs_tol * an),
            radial: spec.tightened(0.1).with_abs_tol(0.1 * spec.abs_tol * an),
            angular: spec
                .tightened(0.01)
                .with_abs_tol(0.01 * spec.abs_tol * a.powi(k as i32)),
        }
    }
}

/// G(z) = ∫₀^∞ w(ρ/a) ρ^{m−1} ∫_{S^{m−1}} F(|z e₁ + ρθ|) dθ dρ, polar coordinates
/// centred on the kernel.
fn plane_family_integral(
    kernel: &PiecewiseRadialKernel,
    phantom: &Phantom,
    a: f64,
    z: f64,
    tol: &Tolerances,
) -> Result<f64> {
    let k = kernel.dims.k();
    let m = kernel.dims.m();
    let hat = |d: f64| phantom.hat(k, d);
    let support = phantom.compact_radius();
    let rho_max = z + phantom.support_radius();

    let mut knots = vec![0.0, rho_max];
    if a < rho_max {
        knots.push(a);
    }
    if let Some(radius) = support {
        for c in [(radius - z).abs(), radius + z] {
            if c > 0.0 && c < rho_max {
                knots.push(c);
            }
        }
    }
    knots.sort_by(f64::total_cmp);
    knots.dedup();

    let power = m as i32 - 1;
    let est = integrate_pieces(
        |piece, rho: Abscissa| {
            let lo = knots[piece];
            let w = if rho.x <= a {
                kernel.inside_value
            } else if lo == a {
                kernel.eval_outside(rho.from_lo / a)?
            } else {
                kernel.eval_outside((rho.x - a) / a)?
            };
            if w == 0.0 {
                return Ok(0.0);
            }
            let ang = sphere_integral(&hat, support, m, z, rho.x, &tol.angular)?;
            Ok(w * rho.x.powi(power) * ang)
        },
        &knots,
        &tol.radial,
    )?;
    Ok(est.value)
}

fn check_inputs(kernel: &PiecewiseRadialKernel, phantom: &Phantom, x: &[f64], a: f64) -> Result<()> {
    let n = kernel.dims.n();
    if phantom.n != n {
        return Err(Error::domain(format!(
            "phantom lives in dimension {}, kernel in {n}",
            phantom.n
        )));
    }
    if x.len() != n {
        return Err(Error::domain(format!("point has dimension {}, expected {n}", x.len())));
    }
    if !(a > 0.0) || !a.is_finite() {
        return Err(Error::domain(format!("scale a must be positive, got {a}")));
    }
    Ok(())
}

/// W*ₐf̂(x) through the projection law, as a deterministic triple integral.
pub fn backproject_reduced(
    kernel: &PiecewiseRadialKernel,
    phantom: &Phantom,
    x: &[f64],
    a: f64,
    spec: &QuadratureSpec,
) -> Result<f64> {
    check_inputs(kernel, phantom, x, a)?;
    let dims = kernel.dims;
    let (n, k, m) = (dims.n(), dims.k(), dims.m());
    let tol = Tolerances::new(spec, a, n, k);
    let scale = a.powi(-(n as i32));
    let r = norm(x);
    if r == 0.0 {
        return Ok(scale * plane_family_integral(kernel, phantom, a, 0.0, &tol)?);
    }
    let (p, q) = (m as f64 / 2.0, k as f64 / 2.0);
    let norm_const = 1.0 / beta_fn(p, q);
    let pow = |x: f64, e: f64| if e == 0.0 { 1.0 } else { x.powf(e) };
    let est = integrate_smooth_ends(
        |t: Abscissa| {
            let density = norm_const * pow(t.from_lo, p - 1.0) * pow(t.to_hi, q - 1.0);
            Ok(density * plane_family_integral(kernel, phantom, a, r * t.x.sqrt(), &tol)?)
        },
        0.0,
        1.0,
        &tol.outer,
    )?;
    Ok(scale * est.value)
}

/// Monte Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    pub estimate: f64,
    pub std_error: f64,
    pub samples: usize,
}

/// W*ₐf̂(x) by sampling ζ from the invariant measure. Sample i uses its own
/// ChaCha8 stream of `seed`, so the result does not depend on the number of
/// worker threads.
pub fn backproject_mc(
    kernel: &PiecewiseRadialKernel,
    phantom: &Phantom,
    x: &[f64],
    a: f64,
    samples: usize,
    seed: u64,
    spec: &QuadratureSpec,
) -> Result<McEstimate> {
    check_inputs(kernel, phantom, x, a)?;
    if samples < 2 {
        return Err(Error::domain("need at least two samples"));
    }
    let dims = kernel.dims;
    let (n, k) = (dims.n(), dims.k());
    let tol = Tolerances::new(spec, a, n, k);
    let scale = a.powi(-(n as i32));
    let values: Vec<f64> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let frame = haar_frame_from_rng(n, k, &mut rng)?;
            let z = frame.normal_distance(x);
            Ok(scale * plane_family_integral(kernel, phantom, a, z, &tol)?)
        })
        .collect::<Result<_>>()?;
    let count = samples as f64;
    let mean = values.iter().sum::<f64>() / count;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (count - 1.0);
    Ok(McEstimate {
        estimate: mean,
        std_error: (var / count).sqrt(),
        samples,
    })
}

/// Value of the convolution with a bound on the dropped tail.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleValue {
    pub value: f64,
    pub truncation_bound: f64,
}

/// ∫ f(x − ay) ψ(|y|) dy by radius–angle quadrature.
pub fn convolve_oracle(
    phantom: &Phantom,
    profile: &RadialProfile,
    x: &[f64],
    a: f64,
    spec: &QuadratureSpec,
) -> Result<OracleValue> {
    let n = profile.dims.n();
    if phantom.n != n || x.len() != n {
        return Err(Error::domain("phantom, profile and point dimensions differ"));
    }
    if !(a > 0.0) || !a.is_finite() {
        return Err(Error::domain(format!("scale a must be positive, got {a}")));
    }
    let r = norm(x);
    let f = |d: f64| phantom.value(d);
    let support = phantom.compact_radius();
    // f(x − ay) is negligible or zero once a s > |x| + support radius.
    let s_max = match profile.family {
        ProfileFamily::IndicatorBall => 1.0f64.min((r + phantom.support_radius()) / a),
        ProfileFamily::PowerTail { .. } => (r + phantom.support_radius()) / a,
    };
    // Beyond s_max a Gaussian is below exp(−cutoff²) of its peak, and
    // ∫_S^∞ ψ(s) s^{n−1} ds ≤ 1/S for the power tails.
    let truncation_bound = match phantom.kind {
        PhantomKind::Ball { .. } => 0.0,
        PhantomKind::Gaussian { .. } => {
            let tail = (-GAUSSIAN_CUTOFF * GAUSSIAN_CUTOFF).exp();
            match profile.family {
                ProfileFamily::IndicatorBall if s_max >= 1.0 => 0.0,
                ProfileFamily::IndicatorBall => tail * profile.lambda,
                ProfileFamily::PowerTail { .. } => tail * sphere_area_unchecked(n) / s_max.max(1.0),
            }
        }
    };

    let mut knots = vec![0.0, s_max];
    if s_max > 1.0 {
        knots.push(1.0);
    }
    if let Some(radius) = support {
        for c in [(radius - r).abs() / a, (radius + r) / a] {
            if c > 0.0 && c < s_max {
                knots.push(c);
            }
        }
    }
    knots.sort_by(f64::total_cmp);
    knots.dedup();

    let angular = spec.tightened(0.01).with_abs_tol(0.01 * spec.abs_tol);
    let radial = spec.tightened(0.1);
    let power = n as i32 - 1;
    let est = integrate_pieces(
        |piece, s: Abscissa| {
            let psi = if s.x <= 1.0 {
                profile.inside_value()
            } else if knots[piece] == 1.0 {
                profile.eval_outside(s.from_lo)
            } else {
                profile.eval_outside(s.x - 1.0)
            };
            if psi == 0.0 {
                return Ok(0.0);
            }
            Ok(psi * s.x.powi(power) * sphere_integral(&f, support, n, r, a * s.x, &angular)?)
        },
        &knots,
        &radial,
    )?;
    Ok(OracleValue {
        value: est.value,
        truncation_bound,
    })
}

//! Radial test functions with closed-form k-plane transforms.

use serde::Serialize;

use super::geometry::FlatParam;
use crate::error::{Error, Result};
use crate::kernels::ball_volume;
use crate::numerics::{integrate_smooth_ends, Abscissa, QuadratureSpec};

/// Gaussian tails below e^{−41.5} ≈ 1e−18 of the peak are dropped.
pub(crate) const GAUSSIAN_CUTOFF: f64 = 6.45;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum PhantomKind {
    /// f(x) = exp(−|x|²/σ²).
    Gaussian { sigma: f64 },
    /// f(x) = h for |x| ≤ R, 0 beyond.
    Ball { radius: f64, height: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Phantom {
    pub kind: PhantomKind,
    pub n: usize,
}

impl Phantom {
    pub fn gaussian(n: usize, sigma: f64) -> Result<Self> {
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(Error::domain(format!("sigma must be positive, got {sigma}")));
        }
        Ok(Phantom {
            kind: PhantomKind::Gaussian { sigma },
            n,
        })
    }

    pub fn ball(n: usize, radius: f64, height: f64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() || !height.is_finite() {
            return Err(Error::domain(format!(
                "invalid ball radius {radius} or height {height}"
            )));
        }
        Ok(Phantom {
            kind: PhantomKind::Ball { radius, height },
            n,
        })
    }

    /// f at a point of norm r.
    pub fn value(&self, r: f64) -> f64 {
        match self.kind {
            PhantomKind::Gaussian { sigma } => (-(r / sigma) * (r / sigma)).exp(),
            PhantomKind::Ball { radius, height } => {
                if r <= radius {
                    height
                } else {
                    0.0
                }
            }
        }
    }

    pub fn value_at(&self, x: &[f64]) -> f64 {
        self.value(norm(x))
    }

    /// k-plane transform on a plane at distance d from the origin.
    pub fn hat(&self, k: usize, d: f64) -> f64 {
        match self.kind {
            PhantomKind::Gaussian { sigma } => {
                (std::f64::consts::PI * sigma * sigma).powf(k as f64 / 2.0) * (-(d / sigma) * (d / sigma)).exp()
            }
            PhantomKind::Ball { radius, height } => {
                if d >= radius {
                    0.0
                } else {
                    let h2 = (radius - d) * (radius + d);
                    height * ball_volume(k) * h2.powf(k as f64 / 2.0)
                }
            }
        }
    }

    /// Radius beyond which f (and every transform of it) is negligible or zero.
    pub(crate) fn support_radius(&self) -> f64 {
        match self.kind {
            PhantomKind::Gaussian { sigma } => GAUSSIAN_CUTOFF * sigma,
            PhantomKind::Ball { radius, .. } => radius,
        }
    }

    /// Exact support radius, if compact.
    pub(crate) fn compact_radius(&self) -> Option<f64> {
        match self.kind {
            PhantomKind::Gaussian { .. } => None,
            PhantomKind::Ball { radius, .. } => Some(radius),
        }
    }
}

pub(crate) fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// The closed-form k-plane transform at distance d.
pub fn phantom_hat(phantom: &Phantom, k: usize, d: f64) -> f64 {
    phantom.hat(k, d)
}

/// Integrates f over the plane numerically, in Cartesian coordinates of the
/// plane's own basis, over the k-ball outside which f is negligible.
pub fn kplane_numeric(phantom: &Phantom, flat: &FlatParam, spec: &QuadratureSpec) -> Result<f64> {
    let k = flat.frame.k();
    if flat.frame.n() != phantom.n {
        return Err(Error::domain("plane and phantom dimensions differ"));
    }
    let foot = flat.foot();
    let radius = match phantom.kind {
        PhantomKind::Gaussian { sigma } => sigma * (1.0 / (1e-3 * spec.abs_tol)).ln().sqrt(),
        PhantomKind::Ball { radius, .. } => {
            let d = flat.distance_to_origin();
            if d >= radius {
                return Ok(0.0);
            }
            ((radius - d) * (radius + d)).sqrt()
        }
    };
    let inner_spec = spec.tightened(1.0 / (4.0 * k as f64));
    let mut coords = vec![0.0; k];
    let value = nested(phantom, flat, &foot, &mut coords, 0, radius * radius, &inner_spec)?;
    Ok(value)
}

fn nested(
    phantom: &Phantom,
    flat: &FlatParam,
    foot: &nalgebra::DVector<f64>,
    coords: &mut Vec<f64>,
    level: usize,
    remaining_sq: f64,
    spec: &QuadratureSpec,
) -> Result<f64> {
    let k = coords.len();
    if level == k {
        let p = foot + &flat.frame.basis * nalgebra::DVector::from_column_slice(coords);
        return Ok(phantom.value(p.norm()));
    }
    let half = remaining_sq.max(0.0).sqrt();
    if half == 0.0 {
        return Ok(0.0);
    }
    let est = integrate_smooth_ends(
        |u: Abscissa| {
            coords[level] = u.x;
            let edge = u.from_lo.min(u.to_hi);
            let left = edge * (2.0 * half - edge);
            nested(phantom, flat, foot, coords, level + 1, left, spec)
        },
        -half,
        half,
        spec,
    )?;
    Ok(est.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transforms::geometry::{haar_frame, point_flat_distance};
    use std::f64::consts::PI;

    #[test]
    fn hat_examples() {
        let ball = Phantom::ball(3, 1.0, 1.0).unwrap();
        assert_eq!(ball.hat(2, 1.0), 0.0);
        assert!((ball.hat(2, 0.6) - PI * 0.64).abs() < 1e-14);
        let g = Phantom::gaussian(3, 1.0).unwrap();
        assert!((g.hat(1, 0.0) - PI.sqrt()).abs() < 1e-15);
        assert!(Phantom::gaussian(3, 0.0).is_err());
        assert!(Phantom::ball(3, -1.0, 1.0).is_err());
    }

    #[test]
    fn numeric_transform_matches_closed_form() {
        let spec = QuadratureSpec::transform();
        let g = Phantom::gaussian(3, 1.0).unwrap();
        let flat = FlatParam::new(haar_frame(3, 1, 5).unwrap(), vec![0.7, 0.0]).unwrap();
        let d = point_flat_distance(&[0.0; 3], &flat).unwrap();
        assert!((d - 0.7).abs() < 1e-15);
        let v = kplane_numeric(&g, &flat, &spec).unwrap();
        assert!((v - PI.sqrt() * (-0.49f64).exp()).abs() < 1e-7, "{v}");

        let flat = FlatParam::new(haar_frame(3, 2, 8).unwrap(), vec![0.0]).unwrap();
        assert!((kplane_numeric(&g, &flat, &spec).unwrap() - PI).abs() < 1e-7);

        let ball = Phantom::ball(3, 1.0, 1.0).unwrap();
        let flat = FlatParam::new(haar_frame(3, 2, 9).unwrap(), vec![1.2]).unwrap();
        assert_eq!(kplane_numeric(&ball, &flat, &spec).unwrap(), 0.0);
        let flat = FlatParam::new(haar_frame(3, 2, 9).unwrap(), vec![0.6]).unwrap();
        let v = kplane_numeric(&ball, &flat, &spec).unwrap();
        assert!((v - ball.hat(2, 0.6)).abs() < 1e-7, "{v}");

        let g4 = Phantom::gaussian(4, 0.8).unwrap();
        let flat = FlatParam::new(haar_frame(4, 2, 1).unwrap(), vec![0.3, -0.4]).unwrap();
        let v = kplane_numeric(&g4, &flat, &spec).unwrap();
        assert!((v - g4.hat(2, 0.5)).abs() < 1e-7, "{v}");
    }
}

//! Convergence of λ^{−1} W*ₐf̂(x) to f(x) as a → 0.

use serde::Serialize;

use super::backproject::{backproject_mc, backproject_reduced};
use super::phantom::Phantom;
use crate::error::{Error, Result};
use crate::kernels::{PiecewiseRadialKernel, RadialProfile};
use crate::numerics::QuadratureSpec;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Engine {
    Reduced,
    MonteCarlo { samples: usize, seed: u64 },
}

/// Scales a_i = a_start·factor^i for i = 0..=steps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Schedule {
    pub a_start: f64,
    pub factor: f64,
    pub steps: usize,
}

impl Schedule {
    pub fn new(a_start: f64, factor: f64, steps: usize) -> Result<Self> {
        if !(a_start > 0.0) || !a_start.is_finite() {
            return Err(Error::domain(format!("a_start must be positive, got {a_start}")));
        }
        if !(factor > 0.0 && factor < 1.0) {
            return Err(Error::domain(format!("factor must lie in (0, 1), got {factor}")));
        }
        if steps == 0 {
            return Err(Error::domain("steps must be at least 1"));
        }
        if !(a_start * factor.powi(steps as i32) > 0.0) {
            return Err(Error::domain("schedule underflows to zero"));
        }
        Ok(Schedule { a_start, factor, steps })
    }

    pub fn values(&self) -> Vec<f64> {
        (0..=self.steps)
            .map(|i| self.a_start * self.factor.powi(i as i32))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub schedule: Vec<f64>,
    pub target: f64,
    pub estimates: Vec<Option<f64>>,
    /// Monte Carlo standard errors, zero for the deterministic engine.
    pub std_errors: Vec<Option<f64>>,
    pub errors: Vec<Option<f64>>,
    /// ln(errᵢ₋₁/errᵢ)/ln(1/factor); the first entry is always empty.
    pub observed_orders: Vec<Option<f64>>,
    pub failures: Vec<Option<String>>,
}

impl SweepResult {
    pub fn final_relative_error(&self) -> Option<f64> {
        self.errors.last().copied().flatten().map(|e| e / self.target.abs())
    }

    pub fn errors_strictly_decrease(&self) -> bool {
        self.errors.windows(2).all(|w| matches!(w, [Some(a), Some(b)] if b < a))
    }
}

/// Evaluates λ^{−1} W*ₐf̂(x) along the schedule. Failed steps are recorded
/// and the sweep continues.
pub fn invert_sweep(
    phantom: &Phantom,
    kernel: &PiecewiseRadialKernel,
    profile: &RadialProfile,
    x: &[f64],
    schedule: Schedule,
    engine: Engine,
    spec: &QuadratureSpec,
) -> Result<SweepResult> {
    if kernel.dims != profile.dims {
        return Err(Error::domain("kernel and profile dimensions differ"));
    }
    let target = phantom.value_at(x);
    let scales = schedule.values();
    let mut estimates = Vec::with_capacity(scales.len());
    let mut std_errors = Vec::with_capacity(scales.len());
    let mut failures = Vec::with_capacity(scales.len());
    for &a in &scales {
        let step = match engine {
            Engine::Reduced => backproject_reduced(kernel, phantom, x, a, spec).map(|v| (v, 0.0)),
            Engine::MonteCarlo { samples, seed } => {
                backproject_mc(kernel, phantom, x, a, samples, seed, spec).map(|m| (m.estimate, m.std_error))
            }
        };
        match step {
            Ok((v, se)) => {
                estimates.push(Some(v / profile.lambda));
                std_errors.push(Some(se / profile.lambda));
                failures.push(None);
            }
            Err(e @ Error::Domain(_)) => return Err(e),
            Err(e) => {
                estimates.push(None);
                std_errors.push(None);
                failures.push(Some(e.to_string()));
            }
        }
    }
    let errors: Vec<Option<f64>> = estimates.iter().map(|e| e.map(|v| (v - target).abs())).collect();
    let rate = (1.0 / schedule.factor).ln();
    let observed_orders = std::iter::once(None)
        .chain(errors.windows(2).map(|w| match w {
            [Some(prev), Some(cur)] if *prev > 0.0 && *cur > 0.0 => Some((prev / cur).ln() / rate),
            _ => None,
        }))
        .collect();
    Ok(SweepResult {
        schedule: scales,
        target,
        estimates,
        std_errors,
        errors,
        observed_orders,
        failures,
    })
}

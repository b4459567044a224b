//! Adaptive Gauss–Kronrod quadrature with endpoint-singularity handling.
//!
//! The engine bisects the panel with the largest error estimate until the
//! global estimate falls below `max(abs_tol, rel_tol·|I|)`. Integrands receive
//! an [`Abscissa`] carrying the distance to both interval ends, so factors like
//! `(r − 1)^(-1/2)` can be evaluated without cancellation.
//!
//! Internal callers use `x = a + h·t²` on each half of the interval, which
//! turns an endpoint factor `(x − a)^β` with half-integer β into a polynomial
//! in t. [`singular_quad`] uses `x = a + h·t^p` with `p = 1/(β + 1)`, so the
//! weight becomes constant for any β in (−1, 0).

use crate::error::{Error, Result};

#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

/// Tolerances and limits for one integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
    /// Exponents `(α, β)` of `(b − x)^α (x − a)^β`, when known.
    pub endpoint_exponents: Option<(f64, f64)>,
}

impl QuadratureSpec {
    pub const DEFAULT_MAX_SUBDIVISIONS: usize = 2_000;

    pub fn new(abs_tol: f64, rel_tol: f64) -> Result<Self> {
        let spec = QuadratureSpec {
            abs_tol,
            rel_tol,
            max_subdivisions: Self::DEFAULT_MAX_SUBDIVISIONS,
            endpoint_exponents: None,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Tolerances for one-dimensional kernel integrals.
    pub fn kernel() -> Self {
        QuadratureSpec {
            abs_tol: 1e-10,
            rel_tol: 1e-10,
            max_subdivisions: Self::DEFAULT_MAX_SUBDIVISIONS,
            endpoint_exponents: None,
        }
    }

    /// Tolerances for transform-level nested integrals.
    pub fn transform() -> Self {
        QuadratureSpec {
            abs_tol: 1e-8,
            rel_tol: 1e-8,
            ..Self::kernel()
        }
    }

    pub fn with_max_subdivisions(mut self, max_subdivisions: usize) -> Self {
        self.max_subdivisions = max_subdivisions;
        self
    }

    pub fn with_endpoint_exponents(mut self, alpha: f64, beta: f64) -> Result<Self> {
        self.endpoint_exponents = Some((alpha, beta));
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0) || !(self.rel_tol > 0.0) {
            return Err(Error::domain("quadrature tolerances must be positive"));
        }
        if self.max_subdivisions == 0 {
            return Err(Error::domain("max_subdivisions must be at least 1"));
        }
        if let Some((alpha, beta)) = self.endpoint_exponents {
            check_exponents(alpha, beta)?;
        }
        Ok(())
    }

    /// Same limits with both tolerances multiplied by `factor`.
    pub(crate) fn tightened(self, factor: f64) -> Self {
        QuadratureSpec {
            abs_tol: self.abs_tol * factor,
            rel_tol: self.rel_tol * factor,
            endpoint_exponents: None,
            ..self
        }
    }

    pub(crate) fn with_abs_tol(self, abs_tol: f64) -> Self {
        QuadratureSpec { abs_tol, ..self }
    }
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self::kernel()
    }
}

/// A quadrature node together with its distances to the interval ends.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Abscissa {
    pub x: f64,
    pub from_lo: f64,
    pub to_hi: f64,
}

/// Result of an integration with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub abs_error: f64,
    pub evaluations: usize,
}

impl Estimate {
    fn zero() -> Self {
        Estimate {
            value: 0.0,
            abs_error: 0.0,
            evaluations: 0,
        }
    }

    fn add(self, other: Estimate) -> Self {
        Estimate {
            value: self.value + other.value,
            abs_error: self.abs_error + other.abs_error,
            evaluations: self.evaluations + other.evaluations,
        }
    }
}

fn check_exponents(alpha: f64, beta: f64) -> Result<()> {
    if !(alpha > -1.0) || !(beta > -1.0) || !alpha.is_finite() || !beta.is_finite() {
        return Err(Error::domain(format!(
            "endpoint exponents must exceed -1, got ({alpha}, {beta})"
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    lo_off: f64,
    hi_off: f64,
    len: f64,
    value: f64,
    error: f64,
    floor: f64,
}

impl Panel {
    fn at_floor(&self) -> bool {
        self.error <= self.floor * (1.0 + 1e-12)
    }
}

fn gk21<F>(f: &mut F, lo: f64, hi: f64, lo_off: f64, hi_off: f64, len: f64) -> Result<Panel>
where
    F: FnMut(Abscissa) -> Result<f64>,
{
    let half = 0.5 * len;
    let mut eval = |xi_plus: f64, xi_minus: f64| -> Result<f64> {
        let from_lo = lo_off + half * xi_plus;
        let to_hi = hi_off + half * xi_minus;
        let x = if from_lo <= to_hi { lo + from_lo } else { hi - to_hi };
        let v = f(Abscissa { x, from_lo, to_hi })?;
        if !v.is_finite() {
            return Err(Error::domain(format!("non-finite integrand value {v} at x = {x}")));
        }
        Ok(v)
    };

    let f_center = eval(1.0, 1.0)?;
    let mut res_k = f_center * WGK[10];
    let mut res_abs = res_k.abs();
    let mut res_g = 0.0;
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for j in 0..10 {
        let xi = XGK[j];
        let f1 = eval(1.0 - xi, 1.0 + xi)?;
        let f2 = eval(1.0 + xi, 1.0 - xi)?;
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[10] * (f_center - mean).abs();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }

    let value = res_k * half;
    res_abs *= half;
    res_asc *= half;
    let mut error = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && error != 0.0 {
        error = res_asc * (200.0 * error / res_asc).powf(1.5).min(1.0);
    }
    let floor = 50.0 * f64::EPSILON * res_abs;
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(floor);
    }
    Ok(Panel {
        lo_off,
        hi_off,
        len,
        value,
        error,
        floor,
    })
}

/// Adaptive integration over a finite `[lo, hi]` with offset-aware abscissae.
pub(crate) fn integrate_offsets<F>(mut f: F, lo: f64, hi: f64, spec: &QuadratureSpec) -> Result<Estimate>
where
    F: FnMut(Abscissa) -> Result<f64>,
{
    if !lo.is_finite() || !hi.is_finite() || hi < lo {
        return Err(Error::domain(format!("invalid finite interval [{lo}, {hi}]")));
    }
    if hi == lo {
        return Ok(Estimate::zero());
    }
    let mut panels = vec![gk21(&mut f, lo, hi, 0.0, 0.0, hi - lo)?];
    loop {
        let total: f64 = panels.iter().map(|p| p.value).sum();
        let error: f64 = panels.iter().map(|p| p.error).sum();
        let evaluations = 21 * panels.len() + 21 * (panels.len() - 1);
        let estimate = Estimate {
            value: total,
            abs_error: error,
            evaluations,
        };
        let tol = spec.abs_tol.max(spec.rel_tol * total.abs());
        if error <= tol {
            return Ok(estimate);
        }

        let worst = panels
            .iter()
            .enumerate()
            .filter(|(_, p)| !p.at_floor() && splittable(lo, p))
            .max_by(|a, b| a.1.error.total_cmp(&b.1.error))
            .map(|(i, _)| i);

        let Some(worst) = worst else {
            // Every remaining panel is at the round-off floor or too small to split.
            if panels
                .iter()
                .all(|p| p.at_floor() || p.error <= tol / panels.len() as f64)
            {
                return Ok(estimate);
            }
            return Err(Error::Accuracy {
                estimate: total,
                error_bound: error,
                context: format!("panels on [{lo}, {hi}] cannot be refined further"),
            });
        };
        if panels.len() >= spec.max_subdivisions {
            return Err(Error::Accuracy {
                estimate: total,
                error_bound: error,
                context: format!("{} subdivisions exhausted on [{lo}, {hi}]", spec.max_subdivisions),
            });
        }

        let p = panels.swap_remove(worst);
        let half = 0.5 * p.len;
        let left = gk21(&mut f, lo, hi, p.lo_off, p.hi_off + half, half)?;
        let right = gk21(&mut f, lo, hi, p.lo_off + half, p.hi_off, half)?;
        panels.push(left);
        panels.push(right);
    }
}

fn splittable(lo: f64, p: &Panel) -> bool {
    let scale = (lo + p.lo_off).abs().max(p.lo_off).max(p.hi_off).max(f64::MIN_POSITIVE);
    p.len > 64.0 * f64::EPSILON * scale && p.len > 1e3 * f64::MIN_POSITIVE
}

/// Integrates over `[lo, hi]` after substituting `x = lo + h t²` on the left
/// half and `x = hi − h t²` on the right half (`h = (hi − lo)/2`). Integrands
/// with half-integer power behaviour at either end become smooth in `t`.
pub(crate) fn integrate_smooth_ends<F>(mut f: F, lo: f64, hi: f64, spec: &QuadratureSpec) -> Result<Estimate>
where
    F: FnMut(Abscissa) -> Result<f64>,
{
    if !lo.is_finite() || !hi.is_finite() || hi < lo {
        return Err(Error::domain(format!("invalid finite interval [{lo}, {hi}]")));
    }
    if hi == lo {
        return Ok(Estimate::zero());
    }
    let h = 0.5 * (hi - lo);
    let half_spec = spec.with_abs_tol(0.5 * spec.abs_tol);

    let left = integrate_offsets(
        |t: Abscissa| {
            let from_lo = h * t.x * t.x;
            let to_hi = h + h * t.to_hi * (1.0 + t.x);
            let x = lo + from_lo;
            Ok(2.0 * h * t.x * f(Abscissa { x, from_lo, to_hi })?)
        },
        0.0,
        1.0,
        &half_spec,
    )?;
    let right = integrate_offsets(
        |t: Abscissa| {
            let to_hi = h * t.x * t.x;
            let from_lo = h + h * t.to_hi * (1.0 + t.x);
            let x = hi - to_hi;
            Ok(2.0 * h * t.x * f(Abscissa { x, from_lo, to_hi })?)
        },
        0.0,
        1.0,
        &half_spec,
    )?;
    Ok(left.add(right))
}

/// Integrates over consecutive pieces `[knots[i], knots[i+1]]`, each with
/// [`integrate_smooth_ends`]. The integrand receives the piece index.
pub(crate) fn integrate_pieces<F>(mut f: F, knots: &[f64], spec: &QuadratureSpec) -> Result<Estimate>
where
    F: FnMut(usize, Abscissa) -> Result<f64>,
{
    let pieces = knots.len().saturating_sub(1);
    if pieces == 0 {
        return Ok(Estimate::zero());
    }
    let piece_spec = spec.with_abs_tol(spec.abs_tol / pieces as f64);
    let mut total = Estimate::zero();
    for (i, w) in knots.windows(2).enumerate() {
        if w[1] < w[0] {
            return Err(Error::domain(format!("knots must be non-decreasing: {knots:?}")));
        }
        let part = integrate_smooth_ends(|node| f(i, node), w[0], w[1], &piece_spec)?;
        total = total.add(part);
    }
    Ok(total)
}

/// ∫ₐᵇ f(x) dx. An infinite upper limit is mapped by x = 1/t.
/// If `spec.endpoint_exponents` is set the call is routed to [`singular_quad`].
pub fn adaptive_quad<F>(f: F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    spec.validate()?;
    if a.is_nan() || b.is_nan() || a.is_infinite() {
        return Err(Error::domain(format!("unsupported interval [{a}, {b}]")));
    }
    if let (Some((alpha, beta)), true) = (spec.endpoint_exponents, b.is_finite()) {
        return singular_quad(f, a, b, (alpha, beta), spec);
    }
    let plain = |x: Abscissa| Ok(f(x.x));
    if b.is_finite() {
        return integrate_offsets(plain, a, b, spec).map(|e| e.value);
    }
    if b < 0.0 {
        return Err(Error::domain("upper limit -inf is not supported"));
    }
    let tail = |t: Abscissa| {
        let x = 1.0 / t.x;
        Ok(f(x) * x * x)
    };
    if a > 0.0 {
        integrate_offsets(tail, 0.0, 1.0 / a, spec).map(|e| e.value)
    } else {
        let half_spec = spec.with_abs_tol(0.5 * spec.abs_tol);
        let head = integrate_offsets(plain, a, 1.0, &half_spec)?;
        let rest = integrate_offsets(tail, 0.0, 1.0, &half_spec)?;
        Ok(head.value + rest.value)
    }
}

/// ∫ₐᵇ (b − x)^α (x − a)^β g(x) dx for α, β > −1.
pub fn singular_quad<G>(g: G, a: f64, b: f64, exponents: (f64, f64), spec: &QuadratureSpec) -> Result<f64>
where
    G: Fn(f64) -> f64,
{
    let (alpha, beta) = exponents;
    check_exponents(alpha, beta)?;
    spec.validate()?;
    if !a.is_finite() || !b.is_finite() || b < a {
        return Err(Error::domain(format!("invalid finite interval [{a}, {b}]")));
    }
    if b == a {
        return Ok(0.0);
    }
    let h = 0.5 * (b - a);
    let half_spec = spec.with_abs_tol(0.5 * spec.abs_tol);
    let weight = |t: f64, e: f64| if e == 0.0 { 1.0 } else { t.powf(e) };

    // x = end ± h·t^p with p(e + 1) = 1 absorbs the end weight into a constant.
    let half = |e: f64, other: f64, toward_lo: bool| -> Result<f64> {
        let p = if e < 0.0 { 1.0 / (e + 1.0) } else { 1.0 };
        let scale = if e < 0.0 { p * h.powf(e + 1.0) } else { h };
        let est = integrate_offsets(
            |t: Abscissa| {
                let tp = t.x.powf(p);
                let near = h * tp;
                // 1 − t^p from the exact offset 1 − t
                let far = h + h * -(p * (-t.to_hi).ln_1p()).exp_m1();
                let w_end = if e < 0.0 { 1.0 } else { weight(near, e) };
                let x = if toward_lo { a + near } else { b - near };
                Ok(scale * w_end * weight(far, other) * g(x))
            },
            0.0,
            1.0,
            &half_spec,
        )?;
        Ok(est.value)
    };
    Ok(half(beta, alpha, true)? + half(alpha, beta, false)?)
}

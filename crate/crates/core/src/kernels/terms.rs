//! Symbolic sums of terms coef·(r²−1)^α·r^β.

use serde::Serialize;

const MATCH_TOL: f64 = 1e-14;

/// coef·(r²−1)^alpha·r^beta.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Term {
    pub coef: f64,
    pub alpha: f64,
    pub beta: f64,
}

impl Term {
    pub fn new(coef: f64, alpha: f64, beta: f64) -> Self {
        Term { coef, alpha, beta }
    }

    /// Value at r = 1 + rm1, with r − 1 supplied exactly.
    pub(crate) fn eval_outside(&self, rm1: f64) -> f64 {
        let r = 1.0 + rm1;
        let r2m1 = rm1 * (2.0 + rm1);
        self.coef * int_or_real_pow(r2m1, self.alpha) * int_or_real_pow(r, self.beta)
    }
}

fn int_or_real_pow(x: f64, e: f64) -> f64 {
    if e == 0.0 {
        1.0
    } else if e == e.round() && e.abs() < 64.0 {
        x.powi(e as i32)
    } else {
        x.powf(e)
    }
}

/// One application of (1/(2r)) d/dr, term by term:
/// (1/(2r)) d/dr [(r²−1)^α r^β] = α (r²−1)^{α−1} r^β + (β/2)(r²−1)^α r^{β−2}.
pub fn halfd_apply(terms: &[Term]) -> Vec<Term> {
    let mut out = Vec::with_capacity(2 * terms.len());
    for t in terms {
        out.push(Term::new(t.coef * t.alpha, t.alpha - 1.0, t.beta));
        out.push(Term::new(t.coef * t.beta / 2.0, t.alpha, t.beta - 2.0));
    }
    merge(out)
}

/// Adds coefficients of terms with equal (α, β) and drops zero coefficients.
pub(crate) fn merge(terms: Vec<Term>) -> Vec<Term> {
    let mut out: Vec<Term> = Vec::with_capacity(terms.len());
    for t in terms {
        match out
            .iter_mut()
            .find(|o| (o.alpha - t.alpha).abs() < MATCH_TOL && (o.beta - t.beta).abs() < MATCH_TOL)
        {
            Some(o) => o.coef += t.coef,
            None => out.push(t),
        }
    }
    out.retain(|t| t.coef != 0.0);
    out
}

/// Rewrites terms with a positive integer α as pure powers of r via the
/// binomial expansion of (r²−1)^α.
pub(crate) fn expand_integer_alpha(terms: &[Term]) -> Vec<Term> {
    let mut out = Vec::new();
    for t in terms {
        if t.alpha > 0.0 && t.alpha == t.alpha.round() {
            let a = t.alpha as usize;
            let mut binom = 1.0;
            for j in 0..=a {
                let sign = if (a - j).is_multiple_of(2) { 1.0 } else { -1.0 };
                out.push(Term::new(t.coef * sign * binom, 0.0, t.beta + 2.0 * j as f64));
                binom = binom * (a - j) as f64 / (j + 1) as f64;
            }
        } else {
            out.push(*t);
        }
    }
    let mut merged = merge(out);
    merged.sort_by(|x, y| x.alpha.total_cmp(&y.alpha).then(x.beta.total_cmp(&y.beta)));
    merged
}

//! Special functions and quadrature engines.

mod gamma;
mod hypergeometric;
mod quadrature;

pub use gamma::gamma_fn;
pub use hypergeometric::gauss_2f1;
pub use quadrature::{adaptive_quad, singular_quad, Abscissa, QuadratureSpec};

pub(crate) use gamma::{beta_fn, factorial, gamma_half, gamma_real, pi_half_power};
pub(crate) use hypergeometric::hyp2f1_with_complement;
pub(crate) use quadrature::{integrate_offsets, integrate_pieces, integrate_smooth_ends};

/// `count` log-spaced points from `lo` to `hi` inclusive.
pub fn log_spaced(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let ratio = (hi / lo).ln();
            (0..count)
                .map(|i| {
                    if i + 1 == count {
                        hi
                    } else {
                        lo * (ratio * i as f64 / (count - 1) as f64).exp()
                    }
                })
                .collect()
        }
    }
}

//! Random k-planes: Haar frames, plane parameters and point–plane distances.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Orthonormal basis of a k-dimensional subspace ζ and of its complement.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    /// n × k, columns span ζ.
    pub basis: DMatrix<f64>,
    /// n × (n − k), columns span ζ^⊥.
    pub complement: DMatrix<f64>,
}

impl Frame {
    pub fn n(&self) -> usize {
        self.basis.nrows()
    }

    pub fn k(&self) -> usize {
        self.basis.ncols()
    }

    /// Largest deviation of the n × n column Gram matrix from the identity.
    pub fn orthonormality_defect(&self) -> f64 {
        let full = DMatrix::from_columns(
            &self
                .basis
                .column_iter()
                .chain(self.complement.column_iter())
                .map(|c| c.into_owned())
                .collect::<Vec<_>>(),
        );
        let gram = full.transpose() * &full;
        (gram - DMatrix::identity(self.n(), self.n())).amax()
    }

    /// |P_ζ x|², the squared length of the projection onto ζ.
    pub fn projection_sq(&self, x: &[f64]) -> f64 {
        let x = DVector::from_column_slice(x);
        (self.basis.transpose() * x).norm_squared()
    }

    /// |P_{ζ⊥} x|.
    pub fn normal_distance(&self, x: &[f64]) -> f64 {
        let x = DVector::from_column_slice(x);
        (self.complement.transpose() * x).norm()
    }
}

/// A k-plane: the subspace ζ translated by x″ = Σ offsetᵢ·complementᵢ.
#[derive(Debug, Clone, PartialEq)]
pub struct FlatParam {
    pub frame: Frame,
    pub offset: DVector<f64>,
}

impl FlatParam {
    pub fn new(frame: Frame, offset: Vec<f64>) -> Result<Self> {
        if offset.len() != frame.complement.ncols() {
            return Err(Error::domain(format!(
                "offset has {} coordinates, the normal space has {}",
                offset.len(),
                frame.complement.ncols()
            )));
        }
        Ok(FlatParam {
            frame,
            offset: DVector::from_vec(offset),
        })
    }

    /// The point x″ of the plane closest to the origin.
    pub fn foot(&self) -> DVector<f64> {
        &self.frame.complement * &self.offset
    }

    /// Distance from the origin to the plane.
    pub fn distance_to_origin(&self) -> f64 {
        self.offset.norm()
    }
}

/// Frame drawn from the rotation-invariant measure, deterministic in `seed`.
pub fn haar_frame(n: usize, k: usize, seed: u64) -> Result<Frame> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    haar_frame_from_rng(n, k, &mut rng)
}

/// Orthonormalizes an n × n matrix of independent standard normals (QR with
/// the signs of R's diagonal moved into Q). The first k columns span ζ.
pub fn haar_frame_from_rng<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Result<Frame> {
    if k < 1 || k >= n {
        return Err(Error::domain(format!("need 1 <= k < n, got n = {n}, k = {k}")));
    }
    let g = DMatrix::<f64>::from_fn(n, n, |_, _| rng.sample(StandardNormal));
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    Ok(Frame {
        basis: q.columns(0, k).into_owned(),
        complement: q.columns(k, n - k).into_owned(),
    })
}

/// |P_{ζ⊥} x − x″|.
pub fn point_flat_distance(x: &[f64], flat: &FlatParam) -> Result<f64> {
    if x.len() != flat.frame.n() {
        return Err(Error::domain(format!(
            "point has dimension {}, plane lives in dimension {}",
            x.len(),
            flat.frame.n()
        )));
    }
    let x = DVector::from_column_slice(x);
    Ok((flat.frame.complement.transpose() * x - &flat.offset).norm())
}

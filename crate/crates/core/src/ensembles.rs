//! Seeded random states and operators.
//!
//! Every draw is keyed by a [`SeedSpec`]. The generator is ChaCha8 with the
//! 256-bit key expanded from `master_seed` by `SeedableRng::seed_from_u64`
//! and the ChaCha stream (nonce) set to `stream_index`. Distinct stream
//! indices therefore give independent sequences, and a draw never depends on
//! which thread evaluates it or in which order.
//!
//! Complex standard normals have independent real and imaginary parts with
//! variance 1/2 each, so `E|z|² = 1`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::{embed_battery_op, CMatrix, CVector, DensityMatrix, HermitianOperator};
use crate::structure::TensorStructure;
use num_complex::Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeedSpec {
    pub master_seed: u64,
    pub stream_index: u64,
}

impl SeedSpec {
    pub fn new(master_seed: u64, stream_index: u64) -> Self {
        Self {
            master_seed,
            stream_index,
        }
    }

    pub fn with_stream(self, stream_index: u64) -> Self {
        Self {
            stream_index,
            ..self
        }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(self.stream_index);
        rng
    }
}

pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn complex_normal_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    // Fill row-major so the draw order does not depend on storage layout.
    let mut m = CMatrix::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            m[(i, j)] = complex_normal(rng);
        }
    }
    m
}

fn require_dim(dim: usize) -> Result<()> {
    if dim == 0 {
        return Err(Error::InvalidInput("dimension must be >= 1".into()));
    }
    Ok(())
}

/// Haar-random unit vector.
pub fn haar_vector<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CVector {
    let v = CVector::from_iterator(dim, (0..dim).map(|_| complex_normal(rng)));
    let n = v.norm();
    v / Complex64::new(n, 0.0)
}

pub fn haar_pure(dim: usize, seed: SeedSpec) -> Result<DensityMatrix> {
    require_dim(dim)?;
    DensityMatrix::from_pure(&haar_vector(dim, &mut seed.rng()))
}

/// `G G† / Tr(G G†)` with `G` a `dim × rank` complex Ginibre matrix.
pub fn ginibre_from_factor(g: &CMatrix) -> Result<DensityMatrix> {
    let w = g * g.adjoint();
    let t = w.trace().re;
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::InvalidInput("Ginibre factor has zero norm".into()));
    }
    DensityMatrix::new(w / Complex64::new(t, 0.0))
}

pub fn ginibre_mixed(dim: usize, rank: usize, seed: SeedSpec) -> Result<DensityMatrix> {
    require_dim(dim)?;
    if rank == 0 || rank > dim {
        return Err(Error::InvalidInput(format!(
            "Ginibre rank must be in 1..={dim}, got {rank}"
        )));
    }
    ginibre_from_factor(&complex_normal_matrix(dim, rank, &mut seed.rng()))
}

/// `scale · (M + M†)/2` with `M` complex standard normal.
pub fn gue_hermitian(dim: usize, scale: f64, seed: SeedSpec) -> Result<HermitianOperator> {
    require_dim(dim)?;
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "scale must be > 0, got {scale}"
        )));
    }
    let m = complex_normal_matrix(dim, dim, &mut seed.rng());
    let h = (&m + m.adjoint()) * Complex64::new(0.5 * scale, 0.0);
    HermitianOperator::new(h)
}

/// `|j⟩⟨j| ⊗ rest` where `|j⟩` is the `j`-th eigenvector of `F`.
#[derive(Debug, Clone)]
pub struct EigenstateProduct {
    pub rho: DensityMatrix,
    /// Eigenvector index under ascending eigenvalue order.
    pub index: usize,
    /// `w_j` with `F|j⟩ = w_j|j⟩`.
    pub eigenvalue: f64,
    pub eigenvector: CVector,
}

pub fn battery_eigenstate_product(
    f: &HermitianOperator,
    j: usize,
    rest: &DensityMatrix,
    s: &TensorStructure,
) -> Result<EigenstateProduct> {
    // validates F against the structure
    embed_battery_op(f, s)?;
    if rest.dim() != s.env_dim() {
        return Err(Error::mismatch(
            "environment state",
            s.env_dim(),
            rest.dim(),
        ));
    }
    if j >= s.d_w() {
        return Err(Error::InvalidInput(format!(
            "eigenvector index {j} out of range for d_W = {}",
            s.d_w()
        )));
    }
    let eig = f.eigen();
    let eigenvector = eig.eigenvector(j);
    let battery = DensityMatrix::from_pure(&eigenvector)?;
    Ok(EigenstateProduct {
        rho: battery.kron(rest)?,
        index: j,
        eigenvalue: eig.eigenvalues()[j],
        eigenvector,
    })
}

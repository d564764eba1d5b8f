//! Dense complex operator algebra on the `W ⊗ S ⊗ B ⊗ A` composite space.
//!
//! [`HermitianOperator`] and [`DensityMatrix`] validate their invariants on
//! construction and are immutable afterwards, so every function here is a
//! pure function of its arguments.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::structure::TensorStructure;
use crate::tol;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Largest absolute entry.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0f64, |acc, z| acc.max(z.norm()))
}

/// Max-norm of `A - A†`.
pub fn hermitian_residual(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Kronecker product with the left factor as the most significant index.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// `Tr(A B)` without forming the product.
pub fn trace_product(a: &CMatrix, b: &CMatrix) -> Complex64 {
    let n = a.nrows();
    let mut acc = ZERO;
    for i in 0..n {
        for k in 0..n {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

fn square_dim(m: &CMatrix, context: &'static str) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::mismatch(context, m.nrows(), m.ncols()));
    }
    if m.nrows() == 0 {
        return Err(Error::InvalidInput(format!("{context}: empty matrix")));
    }
    Ok(m.nrows())
}

fn symmetrize(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * Complex64::new(0.5, 0.0)
}

/// Spectral decomposition of a Hermitian matrix with ascending eigenvalues.
///
/// Ties keep the order produced by the underlying solver.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    eigenvalues: Vec<f64>,
    eigenvectors: CMatrix,
}

impl EigenDecomposition {
    /// The caller guarantees `m` is Hermitian; only its Hermitian part is used.
    fn of_hermitian(m: &CMatrix) -> Self {
        let n = m.nrows();
        let eig = m.clone().symmetric_eigen();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let eigenvalues = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        let eigenvectors = CMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
        Self {
            eigenvalues,
            eigenvectors,
        }
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Unitary whose columns are the eigenvectors.
    pub fn eigenvectors(&self) -> &CMatrix {
        &self.eigenvectors
    }

    pub fn eigenvector(&self, j: usize) -> CVector {
        self.eigenvectors.column(j).into_owned()
    }

    /// `U f(Λ) U†` for a complex-valued spectral function.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> Complex64) -> CMatrix {
        let u = &self.eigenvectors;
        let n = u.nrows();
        let mut scaled = u.clone();
        for (j, &lambda) in self.eigenvalues.iter().enumerate() {
            let w = f(lambda);
            for i in 0..n {
                scaled[(i, j)] *= w;
            }
        }
        scaled * u.adjoint()
    }

    pub fn reconstruct(&self) -> CMatrix {
        self.map_spectrum(|l| Complex64::new(l, 0.0))
    }
}

/// Complex square matrix equal to its adjoint.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator {
    m: CMatrix,
}

impl HermitianOperator {
    /// Checks `‖A − A†‖_max ≤ 1e-10`, then stores `(A + A†)/2`.
    pub fn new(m: CMatrix) -> Result<Self> {
        square_dim(&m, "hermitian operator")?;
        let residual = hermitian_residual(&m);
        if !(residual <= tol::HERMITIAN) {
            return Err(Error::NotHermitian { residual });
        }
        Ok(Self { m: symmetrize(&m) })
    }

    pub fn from_real(n: usize, rows: &[f64]) -> Result<Self> {
        if rows.len() != n * n {
            return Err(Error::mismatch("real operator entries", n * n, rows.len()));
        }
        Self::new(CMatrix::from_row_iterator(
            n,
            n,
            rows.iter().map(|&x| Complex64::new(x, 0.0)),
        ))
    }

    pub fn identity(n: usize) -> Self {
        Self {
            m: CMatrix::identity(n, n),
        }
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            m: CMatrix::zeros(n, n),
        }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }

    pub fn into_matrix(self) -> CMatrix {
        self.m
    }

    pub fn eigen(&self) -> EigenDecomposition {
        EigenDecomposition::of_hermitian(&self.m)
    }

    /// Largest absolute eigenvalue.
    pub fn spectral_norm(&self) -> f64 {
        self.eigen()
            .eigenvalues()
            .iter()
            .fold(0.0f64, |acc, l| acc.max(l.abs()))
    }

    pub fn scale(&self, c: f64) -> Self {
        Self {
            m: &self.m * Complex64::new(c, 0.0),
        }
    }

    /// `A + c·I`.
    pub fn shift(&self, c: f64) -> Self {
        let mut m = self.m.clone();
        for i in 0..m.nrows() {
            m[(i, i)] += c;
        }
        Self { m }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::mismatch("operator sum", self.dim(), other.dim()));
        }
        Ok(Self {
            m: &self.m + &other.m,
        })
    }

    pub fn kron(&self, other: &Self) -> Self {
        Self {
            m: symmetrize(&kron(&self.m, &other.m)),
        }
    }

    pub fn square(&self) -> Self {
        Self {
            m: symmetrize(&(&self.m * &self.m)),
        }
    }

    pub fn trace(&self) -> f64 {
        self.m.trace().re
    }
}

/// Positive semidefinite, unit-trace Hermitian matrix.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    m: CMatrix,
    eig: EigenDecomposition,
}

impl PartialEq for DensityMatrix {
    fn eq(&self, other: &Self) -> bool {
        self.m == other.m
    }
}

impl DensityMatrix {
    /// Validates Hermiticity, positivity and unit trace.
    ///
    /// Eigenvalues in `[-1e-10, 0)` are clamped to zero and the trace is
    /// renormalized; anything more negative is rejected.
    pub fn new(m: CMatrix) -> Result<Self> {
        let h = HermitianOperator::new(m)?;
        let trace = h.trace();
        if !((trace - 1.0).abs() <= tol::INPUT_TRACE) {
            return Err(Error::BadTrace { trace });
        }
        let eig = h.eigen();
        let min = eig.eigenvalues()[0];
        if min < -tol::PSD {
            return Err(Error::NotPositive {
                min_eigenvalue: min,
            });
        }
        let clamped: Vec<f64> = eig.eigenvalues().iter().map(|&l| l.max(0.0)).collect();
        let total: f64 = clamped.iter().sum();
        let eig = EigenDecomposition {
            eigenvalues: clamped.iter().map(|l| l / total).collect(),
            eigenvectors: eig.eigenvectors,
        };
        let needs_rebuild = min < 0.0;
        let m = if needs_rebuild {
            symmetrize(&eig.reconstruct())
        } else {
            h.into_matrix() * Complex64::new(1.0 / trace, 0.0)
        };
        Ok(Self { m, eig })
    }

    /// `|ψ⟩⟨ψ|` for the normalized `psi`.
    pub fn from_pure(psi: &CVector) -> Result<Self> {
        let norm = psi.norm();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::InvalidInput("state vector has zero norm".into()));
        }
        let psi = psi / Complex64::new(norm, 0.0);
        Self::new(&psi * psi.adjoint())
    }

    pub fn maximally_mixed(n: usize) -> Self {
        Self::new(CMatrix::identity(n, n) / Complex64::new(n as f64, 0.0))
            .expect("maximally mixed state is valid")
    }

    /// Computational basis state `|k⟩⟨k|`.
    pub fn basis(n: usize, k: usize) -> Result<Self> {
        if k >= n {
            return Err(Error::InvalidInput(format!("basis index {k} >= {n}")));
        }
        let mut psi = CVector::zeros(n);
        psi[k] = Complex64::new(1.0, 0.0);
        Self::from_pure(&psi)
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }

    /// Ascending, clamped eigenvalues.
    pub fn eigenvalues(&self) -> &[f64] {
        self.eig.eigenvalues()
    }

    pub fn eigen(&self) -> &EigenDecomposition {
        &self.eig
    }

    pub fn trace(&self) -> f64 {
        self.m.trace().re
    }

    /// `Tr(ρ²)`.
    pub fn purity(&self) -> f64 {
        trace_product(&self.m, &self.m).re
    }

    /// `ρ ⊗ σ`.
    pub fn kron(&self, other: &Self) -> Result<Self> {
        Self::new(kron(&self.m, &other.m))
    }

    pub fn as_operator(&self) -> HermitianOperator {
        HermitianOperator { m: self.m.clone() }
    }
}

/// `F ⊗ 1_{SBA}` with the battery as the leading factor.
pub fn embed_battery_op(f: &HermitianOperator, s: &TensorStructure) -> Result<HermitianOperator> {
    if f.dim() != s.d_w() {
        return Err(Error::mismatch("battery operator", s.d_w(), f.dim()));
    }
    Ok(f.kron(&HermitianOperator::identity(s.env_dim())))
}

/// `ρ_W = Tr_{SBA} ρ`.
pub fn partial_trace_to_battery(rho: &DensityMatrix, s: &TensorStructure) -> Result<DensityMatrix> {
    if rho.dim() != s.total_dim() {
        return Err(Error::mismatch("full state", s.total_dim(), rho.dim()));
    }
    let (dw, de) = (s.d_w(), s.env_dim());
    let m = rho.matrix();
    let reduced = CMatrix::from_fn(dw, dw, |i, j| {
        (0..de).fold(ZERO, |acc, k| acc + m[(i * de + k, j * de + k)])
    });
    DensityMatrix::new(reduced)
}

/// Positive square root by spectral decomposition.
///
/// [`DensityMatrix`] has already clamped round-off negatives, so this never
/// fails for a validated state.
pub fn matrix_sqrt(rho: &DensityMatrix) -> HermitianOperator {
    let root = rho
        .eigen()
        .map_spectrum(|l| Complex64::new(l.max(0.0).sqrt(), 0.0));
    HermitianOperator {
        m: symmetrize(&root),
    }
}

/// `Re Tr(ρA)`; the imaginary part must vanish.
pub fn expectation(rho: &DensityMatrix, a: &HermitianOperator) -> Result<f64> {
    if rho.dim() != a.dim() {
        return Err(Error::mismatch("expectation", rho.dim(), a.dim()));
    }
    let z = trace_product(rho.matrix(), a.matrix());
    if !(z.im.abs() <= tol::REALITY * (1.0 + z.re.abs())) {
        return Err(Error::integrity(
            "expectation-reality",
            format!("Im Tr(rho A) = {:e}", z.im),
        ));
    }
    Ok(z.re)
}

/// `AB − BA`, checked to be anti-Hermitian.
pub fn commutator(a: &HermitianOperator, b: &HermitianOperator) -> Result<CMatrix> {
    if a.dim() != b.dim() {
        return Err(Error::mismatch("commutator", a.dim(), b.dim()));
    }
    let ab = a.matrix() * b.matrix();
    let ba = b.matrix() * a.matrix();
    let c = ab - ba;
    let residual = max_abs(&(&c + c.adjoint()));
    if !(residual <= tol::HERMITIAN * (1.0 + max_abs(&c))) {
        return Err(Error::integrity(
            "commutator-anti-hermitian",
            format!("max |C + C^dagger| = {residual:e}"),
        ));
    }
    Ok(c)
}

/// Pauli matrices in the basis where `σ_z = diag(1, −1)`; index 0 is the
/// excited (`+1`) level and index 1 the ground (`−1`) level.
pub mod pauli {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    pub fn identity() -> HermitianOperator {
        HermitianOperator::identity(2)
    }

    pub fn x() -> HermitianOperator {
        HermitianOperator {
            m: CMatrix::from_row_slice(2, 2, &[ZERO, c(1.0, 0.0), c(1.0, 0.0), ZERO]),
        }
    }

    pub fn y() -> HermitianOperator {
        HermitianOperator {
            m: CMatrix::from_row_slice(2, 2, &[ZERO, c(0.0, -1.0), c(0.0, 1.0), ZERO]),
        }
    }

    pub fn z() -> HermitianOperator {
        HermitianOperator {
            m: CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), ZERO, ZERO, c(-1.0, 0.0)]),
        }
    }

    /// Raising operator `|e⟩⟨g|` (not Hermitian).
    pub fn raising() -> CMatrix {
        CMatrix::from_row_slice(2, 2, &[ZERO, c(1.0, 0.0), ZERO, ZERO])
    }

    /// Lowering operator `|g⟩⟨e|` (not Hermitian).
    pub fn lowering() -> CMatrix {
        raising().adjoint()
    }

    /// `½(I + r_x σ_x + r_y σ_y + r_z σ_z)`.
    pub fn bloch_state(r: [f64; 3]) -> Result<DensityMatrix> {
        let m = (identity().m + x().m * c(r[0], 0.0) + y().m * c(r[1], 0.0) + z().m * c(r[2], 0.0))
            * c(0.5, 0.0);
        DensityMatrix::new(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn assert_mat_close(a: &CMatrix, b: &CMatrix, tol: f64) {
        assert_eq!(a.shape(), b.shape());
        let d = max_abs(&(a - b));
        assert!(d <= tol, "matrices differ by {d:e}\n{a}\n{b}");
    }

    fn diag(v: &[f64]) -> CMatrix {
        CMatrix::from_diagonal(&CVector::from_iterator(
            v.len(),
            v.iter().map(|&x| c(x, 0.0)),
        ))
    }

    #[test]
    fn hermitian_construction_symmetrizes_drift() {
        let mut m = pauli::x().into_matrix();
        m[(0, 1)] += c(5e-11, 0.0);
        let h = HermitianOperator::new(m).unwrap();
        assert_eq!(hermitian_residual(h.matrix()), 0.0);
    }

    #[test]
    fn non_hermitian_rejected() {
        let err = HermitianOperator::new(pauli::raising()).unwrap_err();
        assert!(matches!(err, Error::NotHermitian { .. }));
        let rect = CMatrix::zeros(2, 3);
        assert!(HermitianOperator::new(rect).is_err());
    }

    #[test]
    fn density_rejects_negative_and_bad_trace() {
        let neg = diag(&[1.5, -0.5]);
        assert!(matches!(
            DensityMatrix::new(neg).unwrap_err(),
            Error::NotPositive { .. }
        ));
        let heavy = diag(&[1.0, 1.0]);
        assert!(matches!(
            DensityMatrix::new(heavy).unwrap_err(),
            Error::BadTrace { .. }
        ));
    }

    #[test]
    fn density_clamps_round_off_negatives() {
        let rho = DensityMatrix::new(diag(&[1.0 + 5e-11, -5e-11])).unwrap();
        assert!(rho.eigenvalues().iter().all(|&l| l >= 0.0));
        assert!((rho.trace() - 1.0).abs() <= 1e-12);
        assert!(rho.purity() <= 1.0 + 1e-10);
    }

    #[test]
    fn embed_examples() {
        let s = TensorStructure::new(2, 1, 1, 1).unwrap();
        let e = embed_battery_op(&pauli::z(), &s).unwrap();
        assert_eq!(e.matrix(), pauli::z().matrix());

        let s = TensorStructure::new(2, 2, 1, 1).unwrap();
        let e = embed_battery_op(&pauli::z(), &s).unwrap();
        assert_mat_close(e.matrix(), &diag(&[1.0, 1.0, -1.0, -1.0]), 0.0);

        let s = TensorStructure::new(2, 3, 1, 1).unwrap();
        let e = embed_battery_op(&pauli::identity(), &s).unwrap();
        assert_mat_close(e.matrix(), &CMatrix::identity(6, 6), 0.0);
        assert_eq!(e.trace(), 2.0 * 6.0 / 2.0);
    }

    #[test]
    fn embed_rejects_wrong_dim() {
        let s = TensorStructure::new(3, 2, 1, 1).unwrap();
        assert!(matches!(
            embed_battery_op(&pauli::z(), &s).unwrap_err(),
            Error::DimensionMismatch { .. }
        ));
    }

    #[test]
    fn partial_trace_examples() {
        let s = TensorStructure::new(2, 2, 1, 1).unwrap();
        let rho_w = pauli::bloch_state([0.3, -0.2, 0.5]).unwrap();
        let rho_s = pauli::bloch_state([0.0, 0.6, 0.1]).unwrap();
        let product = rho_w.kron(&rho_s).unwrap();
        let reduced = partial_trace_to_battery(&product, &s).unwrap();
        assert_mat_close(reduced.matrix(), rho_w.matrix(), 1e-14);

        let mut bell = CVector::zeros(4);
        bell[0] = c(1.0, 0.0);
        bell[3] = c(1.0, 0.0);
        let bell = DensityMatrix::from_pure(&bell).unwrap();
        let reduced = partial_trace_to_battery(&bell, &s).unwrap();
        assert_mat_close(reduced.matrix(), &diag(&[0.5, 0.5]), 1e-15);

        let mixed = DensityMatrix::maximally_mixed(4);
        let reduced = partial_trace_to_battery(&mixed, &s).unwrap();
        assert_mat_close(reduced.matrix(), &diag(&[0.5, 0.5]), 1e-15);

        assert!(partial_trace_to_battery(&rho_w, &s).is_err());
    }

    #[test]
    fn sqrt_examples() {
        let half = DensityMatrix::maximally_mixed(2);
        let r = matrix_sqrt(&half);
        assert_mat_close(r.matrix(), &diag(&[0.5f64.sqrt(), 0.5f64.sqrt()]), 1e-15);

        let d = DensityMatrix::new(diag(&[0.25, 0.75])).unwrap();
        let r = matrix_sqrt(&d);
        assert_mat_close(r.matrix(), &diag(&[0.5, 0.75f64.sqrt()]), 1e-15);

        let plus = pauli::bloch_state([1.0, 0.0, 0.0]).unwrap();
        let r = matrix_sqrt(&plus);
        assert_mat_close(r.matrix(), plus.matrix(), 1e-12);
    }

    #[test]
    fn expectation_examples() {
        let excited = DensityMatrix::basis(2, 0).unwrap();
        assert_eq!(expectation(&excited, &pauli::z()).unwrap(), 1.0);
        let mixed = DensityMatrix::maximally_mixed(2);
        assert_eq!(expectation(&mixed, &pauli::x()).unwrap(), 0.0);
        let y_up = pauli::bloch_state([0.0, 1.0, 0.0]).unwrap();
        assert!((expectation(&y_up, &pauli::y()).unwrap() - 1.0).abs() < 1e-15);
        assert!(expectation(&y_up, &HermitianOperator::identity(3)).is_err());
    }

    #[test]
    fn commutator_examples() {
        let xy = commutator(&pauli::x(), &pauli::y()).unwrap();
        assert_mat_close(&xy, &(pauli::z().into_matrix() * c(0.0, 2.0)), 0.0);
        let a = HermitianOperator::from_real(2, &[1.0, 2.0, 2.0, -3.0]).unwrap();
        assert_eq!(max_abs(&commutator(&a, &a).unwrap()), 0.0);
        assert_eq!(
            max_abs(&commutator(&pauli::z(), &pauli::identity()).unwrap()),
            0.0
        );
        assert!(commutator(&pauli::z(), &HermitianOperator::identity(3)).is_err());
    }

    #[test]
    fn eigen_is_ascending_and_unitary() {
        let a = HermitianOperator::from_real(3, &[2.0, 1.0, 0.0, 1.0, -1.0, 0.5, 0.0, 0.5, 0.0])
            .unwrap();
        let e = a.eigen();
        assert!(e.eigenvalues().windows(2).all(|w| w[0] <= w[1]));
        let u = e.eigenvectors();
        assert_mat_close(&(u.adjoint() * u), &CMatrix::identity(3, 3), 1e-12);
        assert_mat_close(&e.reconstruct(), a.matrix(), 1e-12);
    }

    #[test]
    fn shift_and_scale() {
        let z = pauli::z();
        assert_mat_close(z.shift(-1.0).matrix(), &diag(&[0.0, -2.0]), 0.0);
        assert_mat_close(z.scale(2.0).matrix(), &diag(&[2.0, -2.0]), 0.0);
        assert!((z.spectral_norm() - 1.0).abs() < 1e-15);
    }
}

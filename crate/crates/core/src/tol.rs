//! Numerical tolerances shared across the crate.

/// Max-norm of `A - A†` accepted when constructing a Hermitian operator.
pub const HERMITIAN: f64 = 1e-10;

/// Most negative eigenvalue clamped to zero when constructing a density matrix.
pub const PSD: f64 = 1e-10;

/// Trace deviation accepted on input; the trace is renormalized afterwards.
pub const INPUT_TRACE: f64 = 1e-9;

/// Imaginary part tolerated in quantities that must be real.
pub const REALITY: f64 = 1e-10;

/// Relative tolerance for the identity chain and the bound check.
pub const IDENTITY: f64 = 1e-9;

/// Corrected bounds at or below this are treated as zero when forming
/// the saturation ratio.
pub const BOUND_FLOOR: f64 = 1e-14;

/// Mixed absolute/relative comparison: `|a - b| <= tol * (1 + max(|a|, |b|))`.
pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

//! Small worked instances with known closed-form values.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::campaign::Instance;
use crate::dynamics::exchange_interaction;
use crate::ensembles::battery_eigenstate_product;
use crate::error::Result;
use crate::operator::{pauli, CVector, DensityMatrix};
use crate::structure::TensorStructure;

/// `ρ = ½(I + σ_y)`, `F = σ_z`, `V = σ_x`: `P = 2`, bound `4`, ratio `1`.
pub fn saturating() -> Result<(Instance, TensorStructure)> {
    Ok((
        Instance {
            rho: pauli::bloch_state([0.0, 1.0, 0.0])?,
            f: pauli::z(),
            v: pauli::x(),
        },
        TensorStructure::battery_only(2)?,
    ))
}

/// `ρ = ½(I + ½σ_z)`, `F = σ_z`, `V = σ_z + σ_x`: `P = 0` with
/// `σ²_F = 3/4` and `Cov = 3/4`.
pub fn real_covariance() -> Result<(Instance, TensorStructure)> {
    Ok((
        Instance {
            rho: pauli::bloch_state([0.0, 0.0, 0.5])?,
            f: pauli::z(),
            v: pauli::z().add(&pauli::x())?,
        },
        TensorStructure::battery_only(2)?,
    ))
}

/// Battery in the `+1` eigenvector of `σ_z`, system maximally mixed,
/// `V = exchange(1) + ½ σ_x ⊗ σ_z`.
pub fn eigenstate() -> Result<(Instance, TensorStructure)> {
    let s = TensorStructure::new(2, 2, 1, 1)?;
    let f = pauli::z();
    let p = battery_eigenstate_product(&f, 1, &DensityMatrix::maximally_mixed(2), &s)?;
    let v = exchange_interaction(1.0, &s)?.add(&pauli::x().kron(&pauli::z()).scale(0.5))?;
    Ok((Instance { rho: p.rho, f, v }, s))
}

/// Entangled real-amplitude pure state `cos(π/8)|00⟩ + sin(π/8)|11⟩` with
/// `F = σ_z` and `V = σ_z ⊗ σ_z + σ_x ⊗ σ_x`; all entries are real, so the
/// covariance is real and the power vanishes.
pub fn real_entangled() -> Result<(Instance, TensorStructure)> {
    let s = TensorStructure::new(2, 2, 1, 1)?;
    let theta = PI / 8.0;
    let mut psi = CVector::zeros(4);
    psi[0] = Complex64::new(theta.cos(), 0.0);
    psi[3] = Complex64::new(theta.sin(), 0.0);
    let v = pauli::z()
        .kron(&pauli::z())
        .add(&pauli::x().kron(&pauli::x()))?;
    Ok((
        Instance {
            rho: DensityMatrix::from_pure(&psi)?,
            f: pauli::z(),
            v,
        },
        s,
    ))
}

//! Closed-system evolution `ρ(t) = U ρ₀ U†`, `U = exp(−i(H₀ + V)t)`, with a
//! power/bound report at every time on a grid.
//!
//! The charging power uses the interaction `V` alone. When `[F ⊗ 1, H₀] = 0`
//! it equals `d⟨F⟩/dt`, which the trajectory cross-checks with central
//! differences of `⟨F⟩_W`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{verify_evaluation, PowerBoundReport};
use crate::error::{Error, Result};
use crate::operator::{
    commutator, embed_battery_op, kron, max_abs, partial_trace_to_battery, pauli, DensityMatrix,
    EigenDecomposition, HermitianOperator,
};
use crate::structure::TensorStructure;
use crate::tol;

#[derive(Debug, Clone)]
pub struct HamiltonianSpec {
    h0: HermitianOperator,
    v: HermitianOperator,
    structure: TensorStructure,
}

impl HamiltonianSpec {
    pub fn new(
        h0: HermitianOperator,
        v: HermitianOperator,
        structure: TensorStructure,
    ) -> Result<Self> {
        let d = structure.total_dim();
        if h0.dim() != d {
            return Err(Error::mismatch("H0", d, h0.dim()));
        }
        if v.dim() != d {
            return Err(Error::mismatch("V", d, v.dim()));
        }
        Ok(Self { h0, v, structure })
    }

    /// `H₀ = 0`.
    pub fn interaction_only(v: HermitianOperator, structure: TensorStructure) -> Result<Self> {
        Self::new(
            HermitianOperator::zeros(structure.total_dim()),
            v,
            structure,
        )
    }

    pub fn h0(&self) -> &HermitianOperator {
        &self.h0
    }

    pub fn v(&self) -> &HermitianOperator {
        &self.v
    }

    pub fn structure(&self) -> &TensorStructure {
        &self.structure
    }

    pub fn total(&self) -> HermitianOperator {
        self.h0
            .add(&self.v)
            .expect("dimensions checked at construction")
    }
}

/// Spectral propagator for a fixed Hamiltonian; diagonalizes once.
#[derive(Debug, Clone)]
pub struct Propagator {
    eig: EigenDecomposition,
}

impl Propagator {
    pub fn new(h: &HamiltonianSpec) -> Self {
        Self {
            eig: h.total().eigen(),
        }
    }

    pub fn dim(&self) -> usize {
        self.eig.eigenvalues().len()
    }

    pub fn evolve(&self, rho0: &DensityMatrix, t: f64) -> Result<DensityMatrix> {
        if rho0.dim() != self.dim() {
            return Err(Error::mismatch("initial state", self.dim(), rho0.dim()));
        }
        if !t.is_finite() {
            return Err(Error::InvalidInput(format!("time must be finite, got {t}")));
        }
        let u = self
            .eig
            .map_spectrum(|e| Complex64::from_polar(1.0, -e * t));
        DensityMatrix::new(&u * rho0.matrix() * u.adjoint())
    }
}

pub fn propagate(rho0: &DensityMatrix, h: &HamiltonianSpec, t: f64) -> Result<DensityMatrix> {
    Propagator::new(h).evolve(rho0, t)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub t0: f64,
    pub t1: f64,
    /// Number of intervals; the grid has `steps + 1` points.
    pub steps: usize,
}

impl TimeGrid {
    pub fn points(&self) -> Result<Vec<f64>> {
        if !(self.t0.is_finite() && self.t1.is_finite() && self.t1 > self.t0) {
            return Err(Error::InvalidInput(format!(
                "grid needs finite t0 < t1, got [{}, {}]",
                self.t0, self.t1
            )));
        }
        if self.steps < 2 {
            return Err(Error::InvalidInput(format!(
                "grid needs at least 2 steps, got {}",
                self.steps
            )));
        }
        let dt = (self.t1 - self.t0) / self.steps as f64;
        Ok((0..=self.steps)
            .map(|k| {
                if k == self.steps {
                    self.t1
                } else {
                    self.t0 + dt * k as f64
                }
            })
            .collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub t: f64,
    pub report: PowerBoundReport,
    pub mean_f: f64,
    pub battery_purity: f64,
    /// Central difference of `mean_f`; `None` at the endpoints.
    pub dfdt_fd: Option<f64>,
    /// Set when `[F ⊗ 1, H₀] ≠ 0`, so `power` is not `d⟨F⟩/dt`.
    pub derivative_unchecked: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub records: Vec<TrajectoryRecord>,
    /// Whether `F ⊗ 1` commutes with `H₀`.
    pub commuting: bool,
    /// `max |power − dFdt_fd|` over interior points, when commuting.
    pub max_derivative_error: Option<f64>,
}

impl Trajectory {
    pub fn bound_holds(&self) -> bool {
        self.records.iter().all(|r| r.report.bound_holds())
    }
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.len() < 3 {
        return Err(Error::InvalidInput(format!(
            "time grid needs at least 3 points, got {}",
            grid.len()
        )));
    }
    if grid.iter().any(|t| !t.is_finite()) || grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidInput(
            "time grid must be finite and strictly increasing".into(),
        ));
    }
    Ok(())
}

pub fn trajectory_report(
    rho0: &DensityMatrix,
    h: &HamiltonianSpec,
    f: &HermitianOperator,
    grid: &[f64],
) -> Result<Trajectory> {
    check_grid(grid)?;
    let s = h.structure();
    let f_full = embed_battery_op(f, s)?;
    let commuting = max_abs(&commutator(&f_full, h.h0())?) <= tol::HERMITIAN;
    let propagator = Propagator::new(h);
    if rho0.dim() != propagator.dim() {
        return Err(Error::mismatch(
            "initial state",
            propagator.dim(),
            rho0.dim(),
        ));
    }

    let points: Vec<(f64, PowerBoundReport, f64, f64)> = grid
        .par_iter()
        .map(|&t| {
            let rho = propagator.evolve(rho0, t)?;
            let e = verify_evaluation(&rho, f, h.v(), s)?;
            let purity = partial_trace_to_battery(&rho, s)?.purity();
            Ok((t, e.report, e.moments.mean_f, purity))
        })
        .collect::<Result<_>>()?;

    let n = points.len();
    let mut records = Vec::with_capacity(n);
    let mut max_err: Option<f64> = None;
    for (k, &(t, report, mean_f, battery_purity)) in points.iter().enumerate() {
        let dfdt_fd = (k > 0 && k + 1 < n).then(|| {
            let (prev, next) = (&points[k - 1], &points[k + 1]);
            (next.2 - prev.2) / (next.0 - prev.0)
        });
        if let (true, Some(d)) = (commuting, dfdt_fd) {
            let err = (report.power - d).abs();
            max_err = Some(max_err.map_or(err, |m| m.max(err)));
        }
        records.push(TrajectoryRecord {
            t,
            report,
            mean_f,
            battery_purity,
            dfdt_fd,
            derivative_unchecked: !commuting,
        });
    }
    Ok(Trajectory {
        records,
        commuting,
        max_derivative_error: max_err,
    })
}

/// Errors of the derivative cross-check at `steps` and `2·steps` intervals
/// on the same time window, plus their ratio (≈4 for second order).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivativeConvergence {
    pub coarse_error: f64,
    pub fine_error: f64,
    pub ratio: f64,
}

pub fn derivative_convergence(
    rho0: &DensityMatrix,
    h: &HamiltonianSpec,
    f: &HermitianOperator,
    grid: TimeGrid,
) -> Result<DerivativeConvergence> {
    let coarse = trajectory_report(rho0, h, f, &grid.points()?)?;
    let fine_grid = TimeGrid {
        steps: grid.steps * 2,
        ..grid
    };
    let fine = trajectory_report(rho0, h, f, &fine_grid.points()?)?;
    match (coarse.max_derivative_error, fine.max_derivative_error) {
        (Some(c), Some(f)) => Ok(DerivativeConvergence {
            coarse_error: c,
            fine_error: f,
            ratio: c / f,
        }),
        _ => Err(Error::InvalidInput(
            "derivative check disabled: F does not commute with H0".into(),
        )),
    }
}

fn require_two_level_pair(s: &TensorStructure, what: &str) -> Result<()> {
    if s.d_w() != 2 || s.d_s() != 2 {
        return Err(Error::InvalidInput(format!(
            "{what} needs d_W = d_S = 2, got structure {s}"
        )));
    }
    Ok(())
}

/// `g (σ₊ ⊗ σ₋ + σ₋ ⊗ σ₊)` between battery and system qubits, identity on `B ⊗ A`.
pub fn exchange_interaction(g: f64, s: &TensorStructure) -> Result<HermitianOperator> {
    require_two_level_pair(s, "exchange model")?;
    if !g.is_finite() {
        return Err(Error::InvalidInput(format!(
            "coupling must be finite, got {g}"
        )));
    }
    let (up, down) = (pauli::raising(), pauli::lowering());
    let pair = (kron(&up, &down) + kron(&down, &up)) * Complex64::new(g, 0.0);
    let rest = s.d_b() * s.d_a();
    HermitianOperator::new(kron(&pair, &crate::operator::CMatrix::identity(rest, rest)))
}

/// Battery in its ground level, system excited, bath and ancilla in `|0⟩`.
pub fn ground_excited_state(s: &TensorStructure) -> Result<DensityMatrix> {
    require_two_level_pair(s, "ground-excited state")?;
    // σ_z = diag(1, −1): index 1 is ground, index 0 excited.
    DensityMatrix::basis(s.total_dim(), s.env_dim())
}

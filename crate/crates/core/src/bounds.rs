//! Charging power, variance/covariance moments and the corrected power bound.
//!
//! For a full state `ρ`, a battery operator `F` and an interaction `V`:
//!
//! ```text
//! P        = −i Tr([ρ, F ⊗ 1] V) = −i Tr(ρ [δF, δV])
//! |P|²     = |Tr(√ρ δF δV √ρ)|² + |Tr(√ρ δV δF √ρ)|² − 2 Re[(Tr ρ δF δV)²]
//!          ≤ 2 (σ²_F σ²_V − Re[Cov(F, V)²])
//! ```
//!
//! `Cov(F, V) = ⟨(F ⊗ 1) V⟩ − ⟨F⟩_W ⟨V⟩` is complex and is never symmetrized.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::{
    commutator, embed_battery_op, expectation, matrix_sqrt, partial_trace_to_battery,
    trace_product, DensityMatrix, HermitianOperator,
};
use crate::structure::TensorStructure;
use crate::tol;

const MINUS_I: Complex64 = Complex64::new(0.0, -1.0);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentSet {
    /// `⟨F⟩_W` in the reduced battery state.
    pub mean_f: f64,
    /// `⟨V⟩` in the full state.
    pub mean_v: f64,
    pub var_f: f64,
    pub var_v: f64,
    pub cov: Complex64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerBoundReport {
    pub power: f64,
    pub power_sq: f64,
    pub term_fv: f64,
    pub term_vf: f64,
    pub term_cross: f64,
    pub corrected_bound: f64,
    pub loose_bound: f64,
    pub slack: f64,
    pub saturation_ratio: f64,
}

/// The three terms of the `√ρ` decomposition of `|P|²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecompositionTerms {
    /// `|Tr(√ρ δF δV √ρ)|²`
    pub term_fv: f64,
    /// `|Tr(√ρ δV δF √ρ)|²`
    pub term_vf: f64,
    /// `2 Re[(Tr ρ δF δV)²]`
    pub term_cross: f64,
}

impl DecompositionTerms {
    pub fn sum(&self) -> f64 {
        self.term_fv + self.term_vf - self.term_cross
    }
}

/// `A − mean·I`.
pub fn delta_operator(a: &HermitianOperator, mean: f64) -> HermitianOperator {
    a.shift(-mean)
}

fn check_dims(
    rho: &DensityMatrix,
    f: &HermitianOperator,
    v: &HermitianOperator,
    s: &TensorStructure,
) -> Result<()> {
    if f.dim() != s.d_w() {
        return Err(Error::mismatch("battery operator F", s.d_w(), f.dim()));
    }
    if v.dim() != s.total_dim() {
        return Err(Error::mismatch("interaction V", s.total_dim(), v.dim()));
    }
    if rho.dim() != s.total_dim() {
        return Err(Error::mismatch("full state", s.total_dim(), rho.dim()));
    }
    Ok(())
}

fn clamp_variance(var: f64, which: &'static str) -> Result<f64> {
    if var < -tol::PSD {
        return Err(Error::integrity(
            which,
            format!("negative variance {var:e}"),
        ));
    }
    Ok(var.max(0.0))
}

pub fn compute_moments(
    rho: &DensityMatrix,
    f: &HermitianOperator,
    v: &HermitianOperator,
    s: &TensorStructure,
) -> Result<MomentSet> {
    check_dims(rho, f, v, s)?;
    let rho_w = partial_trace_to_battery(rho, s)?;
    let mean_f = expectation(&rho_w, f)?;
    let var_f = clamp_variance(
        expectation(&rho_w, &f.square())? - mean_f * mean_f,
        "variance-F",
    )?;
    let mean_v = expectation(rho, v)?;
    let var_v = clamp_variance(
        expectation(rho, &v.square())? - mean_v * mean_v,
        "variance-V",
    )?;

    let fv = embed_battery_op(f, s)?.matrix() * v.matrix();
    let cov = trace_product(rho.matrix(), &fv) - mean_f * mean_v;

    let m = MomentSet {
        mean_f,
        mean_v,
        var_f,
        var_v,
        cov,
    };
    let product = var_f * var_v;
    if product < cov.norm_sqr() - tol::IDENTITY * (1.0 + product) {
        return Err(Error::integrity(
            "cauchy-schwarz",
            format!("var_F var_V = {product:e} < |cov|^2 = {:e}", cov.norm_sqr()),
        ));
    }
    Ok(m)
}

/// `P = Re[−i Tr([ρ, F ⊗ 1] V)]`; the imaginary part must vanish.
pub fn charging_power(
    rho: &DensityMatrix,
    f: &HermitianOperator,
    v: &HermitianOperator,
    s: &TensorStructure,
) -> Result<f64> {
    check_dims(rho, f, v, s)?;
    let c = commutator(&rho.as_operator(), &embed_battery_op(f, s)?)?;
    let raw = MINUS_I * trace_product(&c, v.matrix());
    real_part("charging-power-reality", raw)
}

/// The same power through the centred operators, `−i Tr(ρ [δF, δV])`.
pub fn charging_power_centred(
    rho: &DensityMatrix,
    f: &HermitianOperator,
    v: &HermitianOperator,
    s: &TensorStructure,
) -> Result<f64> {
    check_dims(rho, f, v, s)?;
    let rho_w = partial_trace_to_battery(rho, s)?;
    let df = embed_battery_op(&delta_operator(f, expectation(&rho_w, f)?), s)?;
    let dv = delta_operator(v, expectation(rho, v)?);
    let c = commutator(&df, &dv)?;
    let raw = MINUS_I * trace_product(rho.matrix(), &c);
    real_part("centred-power-reality", raw)
}

/// `2 Im Cov(F, V)`, an independent route to `P`.
pub fn power_from_covariance(m: &MomentSet) -> f64 {
    2.0 * m.cov.im
}

fn real_part(identity: &'static str, z: Complex64) -> Result<f64> {
    if !(z.im.abs() <= tol::REALITY * (1.0 + z.re.abs())) {
        return Err(Error::integrity(
            identity,
            format!("imaginary part {:e}", z.im),
        ));
    }
    Ok(z.re)
}

/// The sandwich traces `Tr(√ρ δF δV √ρ)` and `Tr(√ρ δV δF √ρ)`, computed with
/// an explicit matrix square root.
pub fn sandwich_traces(
    rho: &DensityMatrix,
    f: &HermitianOperator,
    v: &HermitianOperator,
    s: &TensorStructure,
) -> Result<(Complex64, Complex64)> {
    check_dims(rho, f, v, s)?;
    let rho_w = partial_trace_to_battery(rho, s)?;
    let df = embed_battery_op(&delta_operator(f, expectation(&rho_w, f)?), s)?;
    let dv = delta_operator(v, expectation(rho, v)?);
    let root = matrix_sqrt(rho);
    let r = root.matrix();
    let fv = df.matrix() * dv.matrix();
    let vf = dv.matrix() * df.matrix();
    let z_fv = (r * fv * r).trace();
    let z_vf = (r * vf * r).trace();
    Ok((z_fv, z_vf))
}

pub fn decomposition_terms(
    rho: &DensityMatrix,
    f: &HermitianOperator,
    v: &HermitianOperator,
    s: &TensorStructure,
) -> Result<DecompositionTerms> {
    let (z_fv, z_vf) = sandwich_traces(rho, f, v, s)?;

    // The cross term uses Tr(ρ δF δV) directly, without the square root.
    let rho_w = partial_trace_to_battery(rho, s)?;
    let df = embed_battery_op(&delta_operator(f, expectation(&rho_w, f)?), s)?;
    let dv = delta_operator(v, expectation(rho, v)?);
    let direct = trace_product(rho.matrix(), &(df.matrix() * dv.matrix()));

    Ok(DecompositionTerms {
        term_fv: z_fv.norm_sqr(),
        term_vf: z_vf.norm_sqr(),
        term_cross: 2.0 * (direct * direct).re,
    })
}

/// `2 (σ²_F σ²_V − Re[Cov²])`.
pub fn corrected_bound(m: &MomentSet) -> f64 {
    2.0 * (m.var_f * m.var_v - (m.cov * m.cov).re)
}

/// `4 σ²_F σ²_V`, weaker than [`corrected_bound`].
pub fn loose_bound(m: &MomentSet) -> f64 {
    4.0 * m.var_f * m.var_v
}

/// Moments plus the report built from them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub moments: MomentSet,
    pub report: PowerBoundReport,
}

/// Computes every report field without asserting the report invariants.
pub fn evaluate_instance(
    rho: &DensityMatrix,
    f: &HermitianOperator,
    v: &HermitianOperator,
    s: &TensorStructure,
) -> Result<Evaluation> {
    let moments = compute_moments(rho, f, v, s)?;
    let power = charging_power(rho, f, v, s)?;
    let terms = decomposition_terms(rho, f, v, s)?;
    let power_sq = power * power;
    let bound = corrected_bound(&moments);
    let saturation_ratio = if bound <= tol::BOUND_FLOOR {
        0.0
    } else {
        power_sq / bound
    };
    Ok(Evaluation {
        moments,
        report: PowerBoundReport {
            power,
            power_sq,
            term_fv: terms.term_fv,
            term_vf: terms.term_vf,
            term_cross: terms.term_cross,
            corrected_bound: bound,
            loose_bound: loose_bound(&moments),
            slack: bound - power_sq,
            saturation_ratio,
        },
    })
}

impl PowerBoundReport {
    /// `power² ≤ bound` with tolerance `1e-9 (1 + bound)`.
    pub fn bound_holds(&self) -> bool {
        self.slack >= -tol::IDENTITY * (1.0 + self.corrected_bound)
    }

    /// Checks every report invariant, naming the first violated identity.
    pub fn check(&self) -> Result<()> {
        let fail = |identity: &'static str, detail: String| Err(Error::integrity(identity, detail));
        if !tol::close(self.power_sq, self.power * self.power, 1e-10) {
            return fail(
                "power-square",
                format!("{} vs {}", self.power_sq, self.power),
            );
        }
        let sum = self.term_fv + self.term_vf - self.term_cross;
        if !tol::close(sum, self.power_sq, tol::IDENTITY) {
            return fail(
                "decomposition",
                format!("term sum {sum:e} vs power^2 {:e}", self.power_sq),
            );
        }
        if !tol::close(self.term_fv, self.term_vf, tol::IDENTITY) {
            return fail(
                "conjugate-terms",
                format!("{:e} vs {:e}", self.term_fv, self.term_vf),
            );
        }
        if self.corrected_bound < -tol::IDENTITY {
            return fail(
                "bound-nonnegative",
                format!("corrected bound {:e}", self.corrected_bound),
            );
        }
        if !self.bound_holds() {
            return fail(
                "corrected-bound",
                format!(
                    "power^2 {:e} exceeds bound {:e}",
                    self.power_sq, self.corrected_bound
                ),
            );
        }
        if self.loose_bound < self.corrected_bound - tol::IDENTITY * (1.0 + self.loose_bound) {
            return fail(
                "loose-bound",
                format!("{:e} < {:e}", self.loose_bound, self.corrected_bound),
            );
        }
        let excess = (self.saturation_ratio - 1.0) * self.corrected_bound;
        if !(self.saturation_ratio >= 0.0 && excess <= tol::IDENTITY * (1.0 + self.corrected_bound))
        {
            return fail("saturation-ratio", format!("{:e}", self.saturation_ratio));
        }
        Ok(())
    }
}

/// Evaluates and checks an instance; errors name the violated identity.
pub fn verify_evaluation(
    rho: &DensityMatrix,
    f: &HermitianOperator,
    v: &HermitianOperator,
    s: &TensorStructure,
) -> Result<Evaluation> {
    let e = evaluate_instance(rho, f, v, s)?;
    e.report.check()?;
    Ok(e)
}

pub fn verify_instance(
    rho: &DensityMatrix,
    f: &HermitianOperator,
    v: &HermitianOperator,
    s: &TensorStructure,
) -> Result<PowerBoundReport> {
    verify_evaluation(rho, f, v, s).map(|e| e.report)
}

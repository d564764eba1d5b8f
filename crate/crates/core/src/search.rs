//! Derivative-free search for zero-power states with non-vanishing battery
//! variance and covariance, and for instances saturating the corrected bound.
//!
//! Candidates are decoded from a flat real parameter vector:
//!
//! * state: a complex vector (pure) or a square Ginibre factor (mixed);
//! * `F` and `V`: entry-wise Hermitian parameterization, rescaled to unit
//!   spectral norm so variances and covariances stay bounded by one.
//!
//! Each restart runs a coordinate pattern search: perturb one random
//! coordinate by `±step`, keep the move if the loss decreases, and halve the
//! step after ten consecutive failed coordinates.

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{verify_evaluation, Evaluation, MomentSet, PowerBoundReport};
use crate::ensembles::{ginibre_from_factor, SeedSpec};
use crate::error::{Error, Result};
use crate::literal::MatrixLiteral;
use crate::operator::{
    partial_trace_to_battery, CMatrix, CVector, DensityMatrix, HermitianOperator,
};
use crate::structure::TensorStructure;
use crate::tol;

const INITIAL_STEP: f64 = 0.5;
const MIN_STEP: f64 = 1e-13;
const FAILURES_PER_SCALE: u32 = 10;
const SHRINK: f64 = 0.5;

/// Battery purity a successful entangled candidate must stay below.
pub const ENTANGLED_PURITY: f64 = 1.0 - 1e-3;
/// Purity target used inside the loss, a little below [`ENTANGLED_PURITY`].
const ENTANGLED_PURITY_TARGET: f64 = 1.0 - 1e-2;
/// Ratio above which a saturation restart stops early.
const SATURATED: f64 = 1.0 - 1e-9;
/// Success threshold for saturation mode.
pub const SATURATION_SUCCESS: f64 = 0.999;
/// Bounds below this do not count towards the saturation objective, which
/// keeps the ratio away from 0/0 round-off.
const SATURATION_BOUND_FLOOR: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SearchMode {
    ZeroPower,
    Saturation,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub min_var_f: f64,
    pub min_abs_cov: f64,
    pub max_abs_power: f64,
    pub require_entangled: bool,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            min_var_f: 0.5,
            min_abs_cov: 0.5,
            max_abs_power: 1e-8,
            require_entangled: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub structure: TensorStructure,
    pub mode: SearchMode,
    pub thresholds: Thresholds,
    /// Maximum number of objective evaluations over all restarts.
    pub budget: u64,
    pub seed: SeedSpec,
    pub restarts: u32,
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.restarts == 0 || self.budget < self.restarts as u64 {
            return Err(Error::InvalidInput(format!(
                "need budget >= restarts >= 1, got budget {} and restarts {}",
                self.budget, self.restarts
            )));
        }
        let t = &self.thresholds;
        for (name, x) in [
            ("min_var_f", t.min_var_f),
            ("min_abs_cov", t.min_abs_cov),
            ("max_abs_power", t.max_abs_power),
        ] {
            if !(x >= 0.0 && x.is_finite()) {
                return Err(Error::InvalidInput(format!(
                    "threshold {name} must be finite and >= 0, got {x}"
                )));
            }
        }
        Ok(())
    }

    /// Whether success is possible at all under unit spectral norm:
    /// `σ²_F ≤ 1`, `|Cov| ≤ σ_F σ_V ≤ 1`, and entanglement needs a
    /// non-trivial environment.
    pub fn infeasibility(&self) -> Option<String> {
        if self.mode != SearchMode::ZeroPower {
            return None;
        }
        let t = &self.thresholds;
        if t.min_var_f > 1.0 {
            return Some(format!(
                "min_var_f {} exceeds 1 for unit-norm F",
                t.min_var_f
            ));
        }
        if t.min_abs_cov > 1.0 {
            return Some(format!(
                "min_abs_cov {} exceeds 1 for unit-norm F, V",
                t.min_abs_cov
            ));
        }
        if self.structure.d_w() == 1 && (t.min_var_f > 0.0 || t.min_abs_cov > 0.0) {
            return Some("a one-level battery has zero variance".into());
        }
        if t.require_entangled && self.structure.env_dim() == 1 {
            return Some("entanglement needs a non-trivial environment".into());
        }
        None
    }
}

#[derive(Debug, Clone)]
pub struct SearchResult {
    pub rho: DensityMatrix,
    pub f: HermitianOperator,
    pub v: HermitianOperator,
    pub report: PowerBoundReport,
    pub moments: MomentSet,
    /// Penalty (zero-power) or saturation ratio (saturation).
    pub objective: f64,
    pub evaluations: u64,
    pub succeeded: bool,
    pub battery_purity: f64,
    /// Index of the winning restart.
    pub restart: u32,
    /// Best objective after each accepted move of the winning restart.
    pub history: Vec<f64>,
}

/// JSON form of a [`SearchResult`] with embedded matrix literals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchRecord {
    pub structure: TensorStructure,
    pub mode: SearchMode,
    pub rho: MatrixLiteral,
    pub f: MatrixLiteral,
    pub v: MatrixLiteral,
    pub report: PowerBoundReport,
    pub moments: MomentSet,
    pub objective: f64,
    pub evaluations: u64,
    pub succeeded: bool,
    pub battery_purity: f64,
    pub restart: u32,
}

impl SearchResult {
    pub fn to_record(&self, config: &SearchConfig) -> SearchRecord {
        SearchRecord {
            structure: config.structure,
            mode: config.mode,
            rho: (&self.rho).into(),
            f: (&self.f).into(),
            v: (&self.v).into(),
            report: self.report,
            moments: self.moments,
            objective: self.objective,
            evaluations: self.evaluations,
            succeeded: self.succeeded,
            battery_purity: self.battery_purity,
            restart: self.restart,
        }
    }
}

impl SearchRecord {
    /// Rebuilds the instance and checks that its report and moments
    /// reproduce the stored values within `1e-10`.
    pub fn recheck(&self) -> Result<Evaluation> {
        let rho = self.rho.to_density()?;
        let f = self.f.to_operator()?;
        let v = self.v.to_operator()?;
        let e = verify_evaluation(&rho, &f, &v, &self.structure)?;
        let r = &e.report;
        let m = &e.moments;
        let pairs = [
            ("power", r.power, self.report.power),
            (
                "corrected_bound",
                r.corrected_bound,
                self.report.corrected_bound,
            ),
            ("var_f", m.var_f, self.moments.var_f),
            ("var_v", m.var_v, self.moments.var_v),
            ("cov.re", m.cov.re, self.moments.cov.re),
            ("cov.im", m.cov.im, self.moments.cov.im),
        ];
        for (name, fresh, stored) in pairs {
            if !tol::close(fresh, stored, 1e-10) {
                return Err(Error::integrity(
                    "search-record",
                    format!("{name}: recomputed {fresh:e}, stored {stored:e}"),
                ));
            }
        }
        Ok(e)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum StateParam {
    Pure,
    Mixed,
}

/// Maps a flat parameter vector onto `(ρ, F, V)`.
#[derive(Debug, Clone, Copy)]
struct Layout {
    structure: TensorStructure,
    state: StateParam,
}

struct Candidate {
    rho: DensityMatrix,
    f: HermitianOperator,
    v: HermitianOperator,
}

impl Layout {
    fn for_config(config: &SearchConfig) -> Self {
        let state = match config.mode {
            SearchMode::ZeroPower if !config.thresholds.require_entangled => StateParam::Mixed,
            _ => StateParam::Pure,
        };
        Self {
            structure: config.structure,
            state,
        }
    }

    fn state_len(&self) -> usize {
        let d = self.structure.total_dim();
        match self.state {
            StateParam::Pure => 2 * d,
            StateParam::Mixed => 2 * d * d,
        }
    }

    fn len(&self) -> usize {
        let dw = self.structure.d_w();
        let d = self.structure.total_dim();
        self.state_len() + dw * dw + d * d
    }

    fn decode(&self, x: &[f64]) -> Option<Candidate> {
        let d = self.structure.total_dim();
        let dw = self.structure.d_w();
        let (state, ops) = x.split_at(self.state_len());
        let (fx, vx) = ops.split_at(dw * dw);
        let rho = match self.state {
            StateParam::Pure => {
                let psi = CVector::from_fn(d, |i, _| Complex64::new(state[i], state[d + i]));
                DensityMatrix::from_pure(&psi).ok()?
            }
            StateParam::Mixed => {
                let g = CMatrix::from_fn(d, d, |i, j| {
                    let k = 2 * (i * d + j);
                    Complex64::new(state[k], state[k + 1])
                });
                ginibre_from_factor(&g).ok()?
            }
        };
        Some(Candidate {
            rho,
            f: unit_hermitian(dw, fx)?,
            v: unit_hermitian(d, vx)?,
        })
    }
}

/// Diagonal entries first, then real/imaginary pairs of the upper triangle;
/// the result is scaled to unit spectral norm.
fn unit_hermitian(n: usize, x: &[f64]) -> Option<HermitianOperator> {
    let mut m = CMatrix::zeros(n, n);
    let mut k = n;
    for i in 0..n {
        m[(i, i)] = Complex64::new(x[i], 0.0);
        for j in i + 1..n {
            let z = Complex64::new(x[k], x[k + 1]);
            m[(i, j)] = z;
            m[(j, i)] = z.conj();
            k += 2;
        }
    }
    let h = HermitianOperator::new(m).ok()?;
    let norm = h.spectral_norm();
    (norm > 1e-12 && norm.is_finite()).then(|| h.scale(1.0 / norm))
}

struct Scored {
    loss: f64,
    eval: Option<Evaluation>,
    battery_purity: f64,
    global_purity: f64,
}

/// Loss minimized by the pattern search: the zero-power penalty, or the
/// negated saturation ratio.
fn score(config: &SearchConfig, layout: &Layout, x: &[f64]) -> Scored {
    let infeasible = Scored {
        loss: f64::INFINITY,
        eval: None,
        battery_purity: f64::NAN,
        global_purity: f64::NAN,
    };
    let Some(c) = layout.decode(x) else {
        return infeasible;
    };
    let s = &config.structure;
    let Ok(e) = verify_evaluation(&c.rho, &c.f, &c.v, s) else {
        return infeasible;
    };
    let Ok(rho_w) = partial_trace_to_battery(&c.rho, s) else {
        return infeasible;
    };
    let battery_purity = rho_w.purity();
    let loss = match config.mode {
        SearchMode::ZeroPower => zero_power_penalty(&config.thresholds, &e, battery_purity),
        SearchMode::Saturation => -saturation_objective(&e.report),
    };
    Scored {
        loss,
        eval: Some(e),
        battery_purity,
        global_purity: c.rho.purity(),
    }
}

fn zero_power_penalty(t: &Thresholds, e: &Evaluation, battery_purity: f64) -> f64 {
    let m = &e.moments;
    let mut p = e.report.power.abs()
        + (t.min_var_f - m.var_f).max(0.0)
        + (t.min_abs_cov - m.cov.norm()).max(0.0);
    if t.require_entangled {
        p += (battery_purity - ENTANGLED_PURITY_TARGET).max(0.0);
    }
    p
}

fn saturation_objective(r: &PowerBoundReport) -> f64 {
    if r.corrected_bound > SATURATION_BOUND_FLOOR {
        r.saturation_ratio
    } else {
        0.0
    }
}

fn objective_from_loss(mode: SearchMode, loss: f64) -> f64 {
    match mode {
        SearchMode::ZeroPower => loss,
        SearchMode::Saturation => -loss,
    }
}

fn succeeded(config: &SearchConfig, s: &Scored) -> bool {
    let Some(e) = &s.eval else {
        return false;
    };
    match config.mode {
        SearchMode::Saturation => saturation_objective(&e.report) >= SATURATION_SUCCESS,
        SearchMode::ZeroPower => {
            let t = &config.thresholds;
            let m = &e.moments;
            let power = e.report.power;
            // second route to the power: P = 2 Im Cov
            let certified = (power - 2.0 * m.cov.im).abs() <= tol::IDENTITY;
            // a pure global state with a mixed battery marginal is entangled
            let entangled = !t.require_entangled
                || (s.battery_purity <= ENTANGLED_PURITY && (s.global_purity - 1.0).abs() <= 1e-10);
            power.abs() <= t.max_abs_power
                && m.var_f >= t.min_var_f
                && m.cov.norm() >= t.min_abs_cov
                && certified
                && entangled
        }
    }
}

fn finished(config: &SearchConfig, s: &Scored) -> bool {
    match config.mode {
        SearchMode::ZeroPower => succeeded(config, s),
        SearchMode::Saturation => -s.loss >= SATURATED,
    }
}

struct RestartOutcome {
    restart: u32,
    x: Vec<f64>,
    loss: f64,
    evaluations: u64,
    history: Vec<f64>,
}

/// Restart `r` draws from ChaCha stream `stream_index · 2³² + r`.
fn restart_seed(seed: SeedSpec, restart: u32) -> SeedSpec {
    seed.with_stream(
        seed.stream_index
            .wrapping_shl(32)
            .wrapping_add(restart as u64),
    )
}

fn run_restart(
    config: &SearchConfig,
    layout: &Layout,
    restart: u32,
    budget: u64,
) -> RestartOutcome {
    let mut rng = restart_seed(config.seed, restart).rng();
    let n = layout.len();
    let mut x: Vec<f64> = (0..n)
        .map(|_| rng.sample::<f64, _>(rand_distr::StandardNormal))
        .collect();
    let mut best = score(config, layout, &x);
    let mut evaluations = 1u64;
    let mut history = vec![objective_from_loss(config.mode, best.loss)];

    let mut step = INITIAL_STEP;
    let mut failures = 0u32;
    'search: while evaluations < budget && !finished(config, &best) {
        let i = rng.random_range(0..n);
        let first = if rng.random::<bool>() { step } else { -step };
        let mut improved = false;
        for delta in [first, -first] {
            if evaluations >= budget {
                break 'search;
            }
            let old = x[i];
            x[i] = old + delta;
            let trial = score(config, layout, &x);
            evaluations += 1;
            if trial.loss < best.loss {
                best = trial;
                history.push(objective_from_loss(config.mode, best.loss));
                improved = true;
                break;
            }
            x[i] = old;
        }
        if improved {
            failures = 0;
            continue;
        }
        failures += 1;
        if failures >= FAILURES_PER_SCALE {
            failures = 0;
            step *= SHRINK;
            if step < MIN_STEP {
                break;
            }
        }
    }
    RestartOutcome {
        restart,
        x,
        loss: best.loss,
        evaluations,
        history,
    }
}

fn search(config: &SearchConfig, expected: SearchMode) -> Result<SearchResult> {
    config.validate()?;
    if config.mode != expected {
        return Err(Error::InvalidInput(format!(
            "search mode {:?} does not match the requested {:?}",
            config.mode, expected
        )));
    }
    let layout = Layout::for_config(config);
    let restarts = config.restarts as u64;
    let per = config.budget / restarts;
    let extra = config.budget % restarts;

    let outcomes: Vec<RestartOutcome> = (0..config.restarts)
        .into_par_iter()
        .map(|r| {
            let budget = per + u64::from((r as u64) < extra);
            run_restart(config, &layout, r, budget)
        })
        .collect();

    let evaluations = outcomes.iter().map(|o| o.evaluations).sum();
    let winner = outcomes
        .into_iter()
        .min_by(|a, b| a.loss.total_cmp(&b.loss).then(a.restart.cmp(&b.restart)))
        .expect("at least one restart");

    let scored = score(config, &layout, &winner.x);
    let candidate = layout.decode(&winner.x);
    match (scored.eval.as_ref(), candidate) {
        (Some(e), Some(c)) => Ok(SearchResult {
            report: e.report,
            moments: e.moments,
            objective: objective_from_loss(config.mode, scored.loss),
            evaluations,
            succeeded: succeeded(config, &scored),
            battery_purity: scored.battery_purity,
            restart: winner.restart,
            history: winner.history,
            rho: c.rho,
            f: c.f,
            v: c.v,
        }),
        _ => Err(Error::integrity(
            "search",
            "no restart produced a valid candidate",
        )),
    }
}

/// Looks for `P = 0` with `σ²_F` and `|Cov|` above the configured thresholds.
///
/// Running out of budget is not an error: the best candidate is returned with
/// `succeeded = false`.
pub fn find_zero_power(config: &SearchConfig) -> Result<SearchResult> {
    search(config, SearchMode::ZeroPower)
}

/// Maximizes the saturation ratio `|P|² / bound`; succeeds at `≥ 0.999`.
pub fn find_saturating(config: &SearchConfig) -> Result<SearchResult> {
    search(config, SearchMode::Saturation)
}

pub fn run(config: &SearchConfig) -> Result<SearchResult> {
    search(config, config.mode)
}

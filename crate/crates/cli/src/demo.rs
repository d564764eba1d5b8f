use std::time::Instant;

use anyhow::Result;
use clap::{Args, ValueEnum};
use serde::Serialize;

use qbattery::bounds::{evaluate_instance, power_from_covariance, Evaluation};
use qbattery::cases;

use crate::manifest::RunManifest;
use crate::output::{emit, to_json};
use crate::{Common, Format, Status};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Case {
    /// Battery in an eigenstate of F: zero variance, covariance and power.
    Eigenstate,
    /// Qubit instance saturating the corrected bound.
    Saturating,
    /// Real covariance: zero power with non-zero variance and covariance.
    RealCov,
}

#[derive(Debug, Args)]
pub struct DemoArgs {
    #[arg(long, value_enum)]
    case: Case,
    #[command(flatten)]
    common: Common,
}

pub struct Check {
    pub name: &'static str,
    pub passed: bool,
}

fn near(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

pub fn checks(case: Case, e: &Evaluation) -> Vec<Check> {
    let r = &e.report;
    let m = &e.moments;
    let mut out = vec![
        Check {
            name: "report invariants",
            passed: r.check().is_ok(),
        },
        Check {
            name: "power = 2 Im cov",
            passed: near(r.power, power_from_covariance(m), 1e-9),
        },
    ];
    let specific: Vec<(&'static str, bool)> = match case {
        Case::Eigenstate => vec![
            ("power = 0", near(r.power, 0.0, 1e-10)),
            ("var_F = 0", near(m.var_f, 0.0, 1e-10)),
            ("cov = 0", m.cov.norm() <= 1e-10),
            ("corrected_bound = 0", near(r.corrected_bound, 0.0, 1e-10)),
        ],
        Case::Saturating => vec![
            ("power = 2", near(r.power, 2.0, 1e-9)),
            ("corrected_bound = 4", near(r.corrected_bound, 4.0, 1e-9)),
            ("saturation_ratio = 1", near(r.saturation_ratio, 1.0, 1e-9)),
        ],
        Case::RealCov => vec![
            ("power = 0", near(r.power, 0.0, 1e-10)),
            ("var_F = 3/4", near(m.var_f, 0.75, 1e-10)),
            (
                "cov = 3/4",
                near(m.cov.re, 0.75, 1e-10) && near(m.cov.im, 0.0, 1e-10),
            ),
            ("corrected_bound = 3/2", near(r.corrected_bound, 1.5, 1e-10)),
            ("slack = 3/2", near(r.slack, 1.5, 1e-10)),
        ],
    };
    out.extend(
        specific
            .into_iter()
            .map(|(name, passed)| Check { name, passed }),
    );
    out
}

pub fn run(args: DemoArgs) -> Result<Status> {
    let start = Instant::now();
    let (instance, s) = match args.case {
        Case::Eigenstate => cases::eigenstate()?,
        Case::Saturating => cases::saturating()?,
        Case::RealCov => cases::real_covariance()?,
    };
    let e = evaluate_instance(&instance.rho, &instance.f, &instance.v, &s)?;
    let checks = checks(args.case, &e);

    let payload = match args.common.format.unwrap_or(Format::Json) {
        Format::Json => to_json(&e)?,
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.serialize(e.report)?;
            w.into_inner()?
        }
    };
    let manifest = RunManifest::new("demo", &args.case, None)?;
    emit(
        args.common.out.as_deref(),
        &payload,
        &manifest.finish(start.elapsed()),
    )?;

    let mut all = true;
    for c in &checks {
        all &= c.passed;
        eprintln!("{} {}", if c.passed { "PASS" } else { "FAIL" }, c.name);
    }
    Ok(if all { Status::Passed } else { Status::Failed })
}

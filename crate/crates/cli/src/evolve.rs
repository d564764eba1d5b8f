use std::path::PathBuf;
use std::time::Instant;

use anyhow::Result;
use clap::Args;
use serde::Serialize;

use qbattery::dynamics::{trajectory_report, Trajectory};
use qbattery::scenario::Scenario;

use crate::manifest::{read_input, RunManifest};
use crate::output::{emit, fmt17, fmt_opt, to_json};
use crate::{usage, Common, Format, Status};

#[derive(Debug, Args)]
pub struct EvolveArgs {
    /// Scenario JSON file.
    #[arg(long)]
    config: PathBuf,
    #[command(flatten)]
    common: Common,
}

pub const CSV_COLUMNS: [&str; 10] = [
    "t",
    "power",
    "power_sq",
    "corrected_bound",
    "loose_bound",
    "slack",
    "saturation_ratio",
    "mean_F",
    "battery_purity",
    "dFdt_fd",
];

pub fn trajectory_csv(traj: &Trajectory) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_COLUMNS)?;
    for r in &traj.records {
        let p = &r.report;
        let mut rec: Vec<String> = [
            r.t,
            p.power,
            p.power_sq,
            p.corrected_bound,
            p.loose_bound,
            p.slack,
            p.saturation_ratio,
            r.mean_f,
            r.battery_purity,
        ]
        .map(fmt17)
        .to_vec();
        rec.push(fmt_opt(r.dfdt_fd));
        w.write_record(&rec)?;
    }
    Ok(w.into_inner()?)
}

#[derive(Serialize)]
struct ResolvedEvolve<'a> {
    scenario: &'a Scenario,
    threads: usize,
    format: Format,
}

pub fn run(args: EvolveArgs) -> Result<Status> {
    let start = Instant::now();
    let bytes = read_input(&args.config).map_err(|e| usage(format!("{e:#}")))?;
    let text = String::from_utf8(bytes.clone()).map_err(|_| usage("scenario is not UTF-8"))?;
    let scenario = Scenario::from_json(&text).map_err(|e| usage(e.to_string()))?;
    let resolved = scenario.resolve().map_err(|e| usage(e.to_string()))?;

    let pool = rayon_pool(args.common.threads)?;
    let traj = pool.install(|| {
        trajectory_report(
            &resolved.rho0,
            &resolved.hamiltonian,
            &resolved.f,
            &resolved.grid,
        )
    })?;

    let format = args.common.format.unwrap_or(Format::Csv);
    let payload = match format {
        Format::Csv => trajectory_csv(&traj)?,
        Format::Json => to_json(&traj)?,
    };
    let mut manifest = RunManifest::new(
        "evolve",
        &ResolvedEvolve {
            scenario: &scenario,
            threads: args.common.threads,
            format,
        },
        None,
    )?;
    manifest.add_input(&args.config, &bytes);
    emit(
        args.common.out.as_deref(),
        &payload,
        &manifest.finish(start.elapsed()),
    )?;

    let holds = traj.bound_holds();
    eprintln!(
        "evolve: {} points, bound {}, derivative check {}",
        traj.records.len(),
        if holds { "holds" } else { "VIOLATED" },
        match traj.max_derivative_error {
            Some(e) => format!("max error {e:.3e}"),
            None => "disabled ([F, H0] != 0)".into(),
        }
    );
    Ok(if holds {
        Status::Passed
    } else {
        Status::Failed
    })
}

fn rayon_pool(threads: usize) -> Result<rayon::ThreadPool> {
    Ok(rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()?)
}

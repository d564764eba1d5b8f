use std::path::PathBuf;
use std::time::Instant;

use anyhow::Result;
use clap::Args;
use serde::Serialize;

use qbattery::campaign::{run_verification, StateEnsemble, TrialRow, VerifyConfig};
use qbattery::TensorStructure;

use crate::manifest::RunManifest;
use crate::output::{emit, fmt17, to_json};
use crate::{usage, Common, Format, Status};

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Subsystem dimensions dW,dS,dB,dA.
    #[arg(long)]
    dims: String,
    #[arg(long, default_value_t = 1000)]
    trials: u64,
    /// State ensemble: haar, ginibre or gue-ops (alternating Haar/Ginibre).
    #[arg(long, default_value = "gue-ops")]
    ensemble: String,
    /// Ginibre rank (default: full rank).
    #[arg(long)]
    rank: Option<usize>,
    /// Also write the per-trial rows as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
}

#[derive(Serialize)]
struct ResolvedVerify<'a> {
    #[serde(flatten)]
    config: &'a VerifyConfig,
    threads: usize,
    format: Format,
}

const CSV_HEADER: [&str; 12] = [
    "trial",
    "power",
    "power_sq",
    "corrected_bound",
    "loose_bound",
    "slack",
    "saturation_ratio",
    "var_f",
    "var_v",
    "cov_re",
    "cov_im",
    "bound_holds",
];

fn trial_csv(rows: &[TrialRow]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER)?;
    for row in rows {
        let mut rec = vec![row.trial.to_string()];
        match (&row.report, &row.moments) {
            (Some(r), Some(m)) => rec.extend(
                [
                    r.power,
                    r.power_sq,
                    r.corrected_bound,
                    r.loose_bound,
                    r.slack,
                    r.saturation_ratio,
                    m.var_f,
                    m.var_v,
                    m.cov.re,
                    m.cov.im,
                ]
                .map(fmt17),
            ),
            _ => rec.extend(std::iter::repeat_n(String::new(), 10)),
        }
        rec.push(row.bound_holds.to_string());
        w.write_record(&rec)?;
    }
    Ok(w.into_inner()?)
}

pub fn run(args: VerifyArgs) -> Result<Status> {
    let start = Instant::now();
    let structure: TensorStructure = args
        .dims
        .parse()
        .map_err(|e| usage(format!("--dims: {e}")))?;
    let ensemble: StateEnsemble = args
        .ensemble
        .parse()
        .map_err(|e| usage(format!("--ensemble: {e}")))?;
    let config = VerifyConfig {
        structure,
        trials: args.trials,
        ensemble,
        rank: args.rank,
        seed: args.common.seed,
    };
    config.validate().map_err(|e| usage(e.to_string()))?;
    let format = args.common.format.unwrap_or(Format::Json);

    let (summary, rows) = run_verification(&config, args.common.threads)?;
    let payload = match format {
        Format::Json => to_json(&summary)?,
        Format::Csv => trial_csv(&rows)?,
    };
    let resolved = ResolvedVerify {
        config: &config,
        threads: args.common.threads,
        format,
    };
    let manifest = RunManifest::new("verify", &resolved, Some(config.seed))?;
    let manifest = manifest.finish(start.elapsed());
    emit(args.common.out.as_deref(), &payload, &manifest)?;
    if let Some(path) = &args.csv {
        emit(Some(path), &trial_csv(&rows)?, &manifest)?;
    }

    eprintln!(
        "verify {structure}: {} trials, {} violations, {} integrity failures",
        summary.trials, summary.violations, summary.integrity_failures
    );
    Ok(if summary.passed() {
        Status::Passed
    } else {
        Status::Failed
    })
}

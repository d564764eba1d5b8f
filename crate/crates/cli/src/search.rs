use std::time::Instant;

use anyhow::Result;
use clap::{Args, ValueEnum};
use serde::Serialize;

use qbattery::ensembles::SeedSpec;
use qbattery::search::{self, SearchConfig, SearchMode, Thresholds};
use qbattery::TensorStructure;

use crate::manifest::RunManifest;
use crate::output::{emit, to_json};
use crate::{usage, Common, Format, Status};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Mode {
    ZeroPower,
    Saturation,
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    #[arg(long, value_enum)]
    mode: Mode,
    /// Subsystem dimensions dW,dS,dB,dA.
    #[arg(long)]
    dims: String,
    #[arg(long, default_value_t = 0.5)]
    min_var_f: f64,
    #[arg(long, default_value_t = 0.5)]
    min_abs_cov: f64,
    #[arg(long, default_value_t = 1e-8)]
    max_abs_power: f64,
    /// Require an entangled pure global state (battery purity <= 0.999).
    #[arg(long)]
    require_entangled: bool,
    /// Maximum objective evaluations over all restarts.
    #[arg(long, default_value_t = 100_000)]
    budget: u64,
    #[arg(long, default_value_t = 4)]
    restarts: u32,
    /// Seed stream index.
    #[arg(long, default_value_t = 0)]
    stream: u64,
    #[command(flatten)]
    common: Common,
}

#[derive(Serialize)]
struct ResolvedSearch<'a> {
    #[serde(flatten)]
    config: &'a SearchConfig,
    threads: usize,
}

pub fn run(args: SearchArgs) -> Result<Status> {
    let start = Instant::now();
    let structure: TensorStructure = args
        .dims
        .parse()
        .map_err(|e| usage(format!("--dims: {e}")))?;
    if args.common.format == Some(Format::Csv) {
        return Err(usage("search writes JSON only"));
    }
    let config = SearchConfig {
        structure,
        mode: match args.mode {
            Mode::ZeroPower => SearchMode::ZeroPower,
            Mode::Saturation => SearchMode::Saturation,
        },
        thresholds: Thresholds {
            min_var_f: args.min_var_f,
            min_abs_cov: args.min_abs_cov,
            max_abs_power: args.max_abs_power,
            require_entangled: args.require_entangled,
        },
        budget: args.budget,
        seed: SeedSpec::new(args.common.seed, args.stream),
        restarts: args.restarts,
    };
    config.validate().map_err(|e| usage(e.to_string()))?;
    if let Some(why) = config.infeasibility() {
        return Err(usage(format!("infeasible thresholds: {why}")));
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.common.threads.max(1))
        .build()?;
    let result = pool.install(|| search::run(&config))?;
    let payload = to_json(&result.to_record(&config))?;
    let manifest = RunManifest::new(
        "search",
        &ResolvedSearch {
            config: &config,
            threads: args.common.threads,
        },
        Some(config.seed.master_seed),
    )?;
    emit(
        args.common.out.as_deref(),
        &payload,
        &manifest.finish(start.elapsed()),
    )?;

    eprintln!(
        "search: {} after {} evaluations (objective {:.6e}, power {:.3e}, ratio {:.6})",
        if result.succeeded {
            "succeeded"
        } else {
            "not found"
        },
        result.evaluations,
        result.objective,
        result.report.power,
        result.report.saturation_ratio
    );
    Ok(if result.succeeded {
        Status::Passed
    } else {
        Status::Failed
    })
}

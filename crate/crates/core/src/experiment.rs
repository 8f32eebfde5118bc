//! Experiment batch runner: resolves the trace, fans runs out across seeds
//! and policies, and assembles the report.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use thiserror::Error;

use crate::config::{ConfigError, SimConfig};
use crate::policy::PolicyKind;
use crate::report::{
    aggregate_policy, build_comparison, write_report_files, PolicyRuns, ReportError, RunReport,
    SeedOutcome,
};
use crate::sim::{self, summarize, Metrics, SimError};
use crate::synth::generate_synthetic_trace;
use crate::trace::{parse_trace, slot_aggregate, PartialSlotPolicy, SlotEnergy, TraceError};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("trace error: {0}")]
    Trace(#[from] TraceError),
    #[error(transparent)]
    Report(#[from] ReportError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Default)]
pub struct ExperimentOptions {
    /// Extra policies to run alongside the configured one (comparison mode).
    pub policies: Option<Vec<PolicyKind>>,
    /// Where to write report files; skipped when `None`.
    pub out_dir: Option<PathBuf>,
    /// Also write one event log per (policy, seed) into the output directory.
    pub event_logs: bool,
}

/// Resolves the configured trace source into per-slot harvested energy.
pub fn resolve_slots(cfg: &SimConfig) -> Result<Vec<SlotEnergy>, ExperimentError> {
    let trace = if let Some(path) = &cfg.trace.file {
        let file = std::fs::File::open(path).map_err(|source| ConfigError::Io {
            path: path.clone(),
            source,
        })?;
        parse_trace(std::io::BufReader::new(file))?
    } else {
        let kind = cfg.trace.synthetic.expect("validated: file or synthetic");
        generate_synthetic_trace(kind, &cfg.trace, cfg.trace.seed)?
    };
    Ok(slot_aggregate(
        &trace,
        &cfg.harvest,
        PartialSlotPolicy::Drop,
    )?)
}

fn run_one(
    cfg: &SimConfig,
    slots: &[SlotEnergy],
    seed: u64,
    log_path: Option<&Path>,
) -> (SeedOutcome, Option<Metrics>) {
    let result = match log_path {
        Some(path) => std::fs::File::create(path)
            .map_err(|e| SimError::Log(e))
            .and_then(|file| {
                let mut writer = std::io::BufWriter::new(file);
                sim::run_with_log(cfg, slots, seed, Some(&mut writer))
            }),
        None => sim::run(cfg, slots, seed),
    };
    match result {
        Ok(metrics) => (
            SeedOutcome {
                seed,
                summary: Some(summarize(&metrics)),
                error: None,
            },
            Some(metrics),
        ),
        Err(err) => (
            SeedOutcome {
                seed,
                summary: None,
                error: Some(err.to_string()),
            },
            None,
        ),
    }
}

/// Runs the configured seed batch for one or more policies over a shared
/// trace and writes the report files. Per-seed failures are reported in
/// place; they do not abort the batch.
pub fn run_experiment(
    cfg: &SimConfig,
    options: &ExperimentOptions,
) -> Result<RunReport, ExperimentError> {
    cfg.validate()?;
    let slots = resolve_slots(cfg)?;
    if let Some(dir) = &options.out_dir {
        std::fs::create_dir_all(dir).map_err(|source| ExperimentError::Io {
            path: dir.display().to_string(),
            source,
        })?;
    }
    let policies: Vec<PolicyKind> = options
        .policies
        .clone()
        .unwrap_or_else(|| vec![cfg.policy.kind]);

    let mut policy_runs = Vec::new();
    let mut all_metrics = Vec::new();
    for kind in &policies {
        let run_cfg = cfg.with_policy(*kind);
        let outcomes: Vec<(SeedOutcome, Option<Metrics>)> = cfg
            .seeds
            .par_iter()
            .map(|&seed| {
                let log_path = if options.event_logs {
                    options
                        .out_dir
                        .as_ref()
                        .map(|d| d.join(format!("events_{}_{seed}.log", kind.name())))
                } else {
                    None
                };
                run_one(&run_cfg, &slots, seed, log_path.as_deref())
            })
            .collect();
        let seeds: Vec<SeedOutcome> = outcomes.iter().map(|(o, _)| o.clone()).collect();
        all_metrics.extend(outcomes.into_iter().filter_map(|(_, m)| m));
        let aggregate = aggregate_policy(kind.name(), &seeds);
        policy_runs.push(PolicyRuns {
            policy: kind.name().to_string(),
            seeds,
            aggregate,
        });
    }

    let comparison = if policies.len() > 1 {
        build_comparison(&policy_runs)
    } else {
        None
    };
    let report = RunReport {
        config_echo: cfg.canonical_toml(),
        config_hash: cfg.hash(),
        policies: policy_runs,
        comparison,
    };
    if let Some(dir) = &options.out_dir {
        write_report_files(&report, &all_metrics, dir)?;
    }
    Ok(report)
}

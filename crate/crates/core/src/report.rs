//! Batch reports and their CSV/JSON emission.
//!
//! One run of the batch runner produces, per output directory:
//!
//! - `config_echo.toml` — the fully expanded configuration
//! - `summary.csv` — one row per (policy, seed)
//! - `delays.csv` — per-priority delay statistics per (policy, seed)
//! - `energy_trajectory.csv` — charge samples per (policy, seed, node)
//! - `duty_cycle.csv` — duty-cycle change points per (policy, seed)
//! - `aggregates.csv` — mean ± stdev of per-run means per policy
//! - `comparison.csv` — side-by-side policy table (comparison mode only)
//! - `report.json` — everything above in one machine-readable document
//!
//! All columns are fixed; reruns of the same inputs reproduce the files
//! byte for byte.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::policy::PolicyKind;
use crate::sim::{Metrics, RunSummary};

#[derive(Debug, thiserror::Error)]
pub enum ReportError {
    #[error("cannot write {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

fn io_err(path: &Path, source: std::io::Error) -> ReportError {
    ReportError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Mean and sample standard deviation of per-run means.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct MeanStdev {
    pub mean: f64,
    pub stdev: f64,
    pub runs: usize,
}

impl MeanStdev {
    pub fn of(values: &[f64]) -> Self {
        let n = values.len();
        if n == 0 {
            return Self::default();
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let stdev = if n < 2 {
            0.0
        } else {
            (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64).sqrt()
        };
        Self {
            mean,
            stdev,
            runs: n,
        }
    }
}

/// One run's outcome inside a batch: a summary or the error that stopped it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SeedOutcome {
    pub seed: u64,
    pub summary: Option<RunSummary>,
    pub error: Option<String>,
}

/// Batch aggregates for one policy, recomputable from the per-seed rows.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct PolicyAggregate {
    pub policy: String,
    pub mean_delay_all_s: MeanStdev,
    pub mean_delay_p4_s: MeanStdev,
    pub delivery_ratio: MeanStdev,
    pub final_receiver_re_pct: MeanStdev,
    pub eno_hours: MeanStdev,
    pub hours_at_full_duty: MeanStdev,
}

/// Side-by-side comparison row: how much lower the hybrid policy's delay is
/// than this baseline's, as a percentage of the baseline.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub policy: String,
    pub mean_delay_all_s: f64,
    pub mean_delay_p4_s: f64,
    pub improvement_all_pct: Option<f64>,
    pub improvement_p4_pct: Option<f64>,
}

/// Everything one invocation of the batch runner produced.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunReport {
    pub config_echo: String,
    pub config_hash: String,
    pub policies: Vec<PolicyRuns>,
    pub comparison: Option<Vec<ComparisonRow>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PolicyRuns {
    pub policy: String,
    pub seeds: Vec<SeedOutcome>,
    pub aggregate: PolicyAggregate,
}

impl PolicyRuns {
    pub fn summaries(&self) -> impl Iterator<Item = &RunSummary> {
        self.seeds.iter().filter_map(|s| s.summary.as_ref())
    }
}

pub fn aggregate_policy(policy: &str, outcomes: &[SeedOutcome]) -> PolicyAggregate {
    let pick = |f: &dyn Fn(&RunSummary) -> Option<f64>| -> Vec<f64> {
        outcomes
            .iter()
            .filter_map(|o| o.summary.as_ref())
            .filter_map(|s| f(s))
            .collect()
    };
    PolicyAggregate {
        policy: policy.to_string(),
        mean_delay_all_s: MeanStdev::of(&pick(&|s| s.mean_delay_all_s)),
        mean_delay_p4_s: MeanStdev::of(&pick(&|s| s.mean_delay_by_priority_s[3])),
        delivery_ratio: MeanStdev::of(&pick(&|s| Some(s.delivery_ratio))),
        final_receiver_re_pct: MeanStdev::of(&pick(&|s| Some(s.final_receiver_re_pct))),
        eno_hours: MeanStdev::of(&pick(&|s| Some(s.eno_hours))),
        hours_at_full_duty: MeanStdev::of(&pick(&|s| Some(s.hours_at_full_duty))),
    }
}

/// Builds the comparison table against the hybrid policy, when present.
pub fn build_comparison(policies: &[PolicyRuns]) -> Option<Vec<ComparisonRow>> {
    let hybrid = policies
        .iter()
        .find(|p| p.policy == PolicyKind::HenoHybrid.name())?;
    let h_all = hybrid.aggregate.mean_delay_all_s.mean;
    let h_p4 = hybrid.aggregate.mean_delay_p4_s.mean;
    let improvement = |baseline: f64, hybrid: f64| {
        if baseline > 0.0 {
            Some(100.0 * (baseline - hybrid) / baseline)
        } else {
            None
        }
    };
    Some(
        policies
            .iter()
            .map(|p| {
                let all = p.aggregate.mean_delay_all_s.mean;
                let p4 = p.aggregate.mean_delay_p4_s.mean;
                let is_hybrid = p.policy == hybrid.policy;
                ComparisonRow {
                    policy: p.policy.clone(),
                    mean_delay_all_s: all,
                    mean_delay_p4_s: p4,
                    improvement_all_pct: if is_hybrid {
                        None
                    } else {
                        improvement(all, h_all)
                    },
                    improvement_p4_pct: if is_hybrid {
                        None
                    } else {
                        improvement(p4, h_p4)
                    },
                }
            })
            .collect(),
    )
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Writes every report artifact into `out_dir`. `metrics` carries the raw
/// per-run traces backing the trajectory and duty-cycle CSVs.
pub fn write_report_files(
    report: &RunReport,
    metrics: &[Metrics],
    out_dir: &Path,
) -> Result<(), ReportError> {
    std::fs::create_dir_all(out_dir).map_err(|e| io_err(out_dir, e))?;
    let write = |name: &str, content: String| -> Result<(), ReportError> {
        let path = out_dir.join(name);
        let mut f = std::fs::File::create(&path).map_err(|e| io_err(&path, e))?;
        f.write_all(content.as_bytes())
            .map_err(|e| io_err(&path, e))
    };

    write("config_echo.toml", report.config_echo.clone())?;

    let mut summary = String::from(
        "policy,seed,packets_generated,packets_delivered,packets_dropped_queue,frames_collided,\
         delivery_ratio,mean_delay_all_s,mean_delay_p1_s,mean_delay_p2_s,mean_delay_p3_s,\
         mean_delay_p4_s,final_receiver_re_pct,eno_hours,hours_at_full_duty,receiver_death_s,error\n",
    );
    for p in &report.policies {
        for o in &p.seeds {
            match (&o.summary, &o.error) {
                (Some(s), _) => {
                    let d = &s.mean_delay_by_priority_s;
                    summary.push_str(&format!(
                        "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},\n",
                        p.policy,
                        o.seed,
                        s.packets_generated,
                        s.packets_delivered,
                        s.packets_dropped_queue,
                        s.frames_collided,
                        s.delivery_ratio,
                        fmt_opt(s.mean_delay_all_s),
                        fmt_opt(d[0]),
                        fmt_opt(d[1]),
                        fmt_opt(d[2]),
                        fmt_opt(d[3]),
                        s.final_receiver_re_pct,
                        s.eno_hours,
                        s.hours_at_full_duty,
                        fmt_opt(s.receiver_death_s),
                    ));
                }
                (None, err) => {
                    summary.push_str(&format!(
                        "{},{},,,,,,,,,,,,,,,{}\n",
                        p.policy,
                        o.seed,
                        err.as_deref().unwrap_or("unknown error"),
                    ));
                }
            }
        }
    }
    write("summary.csv", summary)?;

    let mut delays = String::from("policy,seed,priority,count,mean_s,min_s,max_s\n");
    for m in metrics {
        for (i, samples) in m.delays_s.iter().enumerate() {
            let (count, mean, min, max) = if samples.is_empty() {
                (0usize, String::new(), String::new(), String::new())
            } else {
                let sum: f64 = samples.iter().sum();
                let min = samples.iter().copied().fold(f64::INFINITY, f64::min);
                let max = samples.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                (
                    samples.len(),
                    (sum / samples.len() as f64).to_string(),
                    min.to_string(),
                    max.to_string(),
                )
            };
            delays.push_str(&format!(
                "{},{},P{},{},{},{},{}\n",
                m.policy,
                m.seed,
                i + 1,
                count,
                mean,
                min,
                max
            ));
        }
    }
    write("delays.csv", delays)?;

    let mut trajectory = String::from("policy,seed,time_s,node,re_pct\n");
    for m in metrics {
        for p in &m.energy_trajectory {
            trajectory.push_str(&format!(
                "{},{},{},{},{}\n",
                m.policy, m.seed, p.time_s, p.node, p.re_pct
            ));
        }
    }
    write("energy_trajectory.csv", trajectory)?;

    let mut duty = String::from("policy,seed,time_s,d_c\n");
    for m in metrics {
        for p in &m.duty_cycle_trace {
            duty.push_str(&format!("{},{},{},{}\n", m.policy, m.seed, p.time_s, p.d_c));
        }
    }
    write("duty_cycle.csv", duty)?;

    let mut aggregates = String::from(
        "policy,runs,mean_delay_all_s,stdev_delay_all_s,mean_delay_p4_s,stdev_delay_p4_s,\
         delivery_ratio,final_receiver_re_pct,eno_hours,hours_at_full_duty\n",
    );
    for p in &report.policies {
        let a = &p.aggregate;
        aggregates.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            a.policy,
            a.mean_delay_all_s.runs,
            a.mean_delay_all_s.mean,
            a.mean_delay_all_s.stdev,
            a.mean_delay_p4_s.mean,
            a.mean_delay_p4_s.stdev,
            a.delivery_ratio.mean,
            a.final_receiver_re_pct.mean,
            a.eno_hours.mean,
            a.hours_at_full_duty.mean
        ));
    }
    write("aggregates.csv", aggregates)?;

    if let Some(rows) = &report.comparison {
        let mut cmp = String::from(
            "policy,mean_delay_all_s,mean_delay_p4_s,improvement_all_pct,improvement_p4_pct\n",
        );
        for r in rows {
            cmp.push_str(&format!(
                "{},{},{},{},{}\n",
                r.policy,
                r.mean_delay_all_s,
                r.mean_delay_p4_s,
                fmt_opt(r.improvement_all_pct),
                fmt_opt(r.improvement_p4_pct)
            ));
        }
        write("comparison.csv", cmp)?;
    }

    let json = serde_json::to_string_pretty(report).expect("report serializes");
    write("report.json", json)?;
    Ok(())
}

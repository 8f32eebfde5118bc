//! Command-line runner: single-policy batches, policy comparisons, and
//! synthetic trace generation.
//!
//! Exit codes: 0 success, 2 configuration error, 3 simulation invariant
//! violation, 1 any other failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use henosim_core::config::{load_config, SimConfig, SynthKind, TraceSection};
use henosim_core::experiment::{run_experiment, ExperimentError, ExperimentOptions};
use henosim_core::policy::PolicyKind;
use henosim_core::report::RunReport;
use henosim_core::sim::SimError;
use henosim_core::synth::generate_synthetic_trace;

const OUT_DIR_ENV: &str = "HENOSIM_OUT_DIR";

#[derive(Parser)]
#[command(
    name = "henosim",
    version,
    about = "Energy-harvesting MAC protocol simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// TOML configuration file; an empty file runs the reference defaults.
    config: PathBuf,
    /// Replace the configured seed list (repeatable).
    #[arg(long = "seed")]
    seeds: Vec<u64>,
    /// Output directory for report CSVs (default: $HENOSIM_OUT_DIR or ./henosim-out).
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Write one event log per run into the output directory.
    #[arg(long)]
    event_log: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run the configured policy over the seed batch.
    Run(RunArgs),
    /// Run several policies over a shared trace and seed batch.
    Compare {
        #[command(flatten)]
        run: RunArgs,
        /// Comma-separated policy list.
        #[arg(
            long,
            value_delimiter = ',',
            default_value = "heno-hybrid,solar-eno,solar-available,fixed"
        )]
        policies: Vec<String>,
    },
    /// Generate a synthetic trace CSV.
    GenTrace {
        /// One of: sinusoidal-solar, gusty-wind, combined, flat.
        kind: String,
        /// Output CSV path.
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 2.0)]
        days: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 3600.0)]
        sample_interval: f64,
        #[arg(long, default_value_t = 959.3)]
        peak_irradiance: f64,
        #[arg(long, default_value_t = 8.0)]
        night_wind: f64,
        #[arg(long, default_value_t = 7.0)]
        day_wind: f64,
        #[arg(long, default_value_t = 5.0)]
        base_wind: f64,
        #[arg(long, default_value_t = 3.0)]
        gust_amplitude: f64,
        #[arg(long, default_value_t = 0.0)]
        flat_irradiance: f64,
        #[arg(long, default_value_t = 0.0)]
        flat_wind: f64,
    },
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error(transparent)]
    Experiment(#[from] ExperimentError),
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Io(String),
    #[error("{message}")]
    BatchFailed { message: String, invariant: bool },
}

fn exit_code(err: &CliError) -> u8 {
    match err {
        CliError::Experiment(ExperimentError::Config(_)) => 2,
        CliError::Experiment(ExperimentError::Trace(_)) => 2,
        CliError::Experiment(ExperimentError::Sim(SimError::Config(_))) => 2,
        CliError::Experiment(ExperimentError::Sim(SimError::Invariant(_))) => 3,
        CliError::BatchFailed { invariant, .. } => {
            if *invariant {
                3
            } else {
                2
            }
        }
        CliError::Usage(_) => 2,
        _ => 1,
    }
}

fn out_dir(flag: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("henosim-out"))
}

fn load_with_overrides(args: &RunArgs) -> Result<SimConfig, CliError> {
    let mut cfg = load_config(&args.config).map_err(ExperimentError::Config)?;
    if !args.seeds.is_empty() {
        cfg.seeds = args.seeds.clone();
    }
    Ok(cfg)
}

fn print_report(report: &RunReport) {
    for policy in &report.policies {
        let a = &policy.aggregate;
        println!(
            "{:<16} runs={} mean_delay_all={:.6}s mean_delay_p4={:.6}s delivery={:.4} final_re={:.2}% eno_h={:.1} dc1_h={:.2}",
            policy.policy,
            a.mean_delay_all_s.runs,
            a.mean_delay_all_s.mean,
            a.mean_delay_p4_s.mean,
            a.delivery_ratio.mean,
            a.final_receiver_re_pct.mean,
            a.eno_hours.mean,
            a.hours_at_full_duty.mean,
        );
        for seed in &policy.seeds {
            if let Some(err) = &seed.error {
                println!("  seed {}: FAILED: {err}", seed.seed);
            }
        }
    }
    if let Some(rows) = &report.comparison {
        println!("\ncomparison (improvement of heno-hybrid over each baseline):");
        for r in rows {
            match (r.improvement_all_pct, r.improvement_p4_pct) {
                (Some(all), Some(p4)) => println!(
                    "  vs {:<16} delay_all {:+.1}%  delay_p4 {:+.1}%",
                    r.policy, all, p4
                ),
                _ => println!("  {:<16} (reference)", r.policy),
            }
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run(args) => {
            let cfg = load_with_overrides(&args)?;
            let options = ExperimentOptions {
                policies: None,
                out_dir: Some(out_dir(args.out_dir.clone())),
                event_logs: args.event_log,
            };
            let report = run_experiment(&cfg, &options)?;
            print_report(&report);
            fail_if_all_seeds_failed(&report)
        }
        Command::Compare {
            run: args,
            policies,
        } => {
            let kinds = policies
                .iter()
                .map(|name| {
                    PolicyKind::parse(name)
                        .ok_or_else(|| CliError::Usage(format!("unknown policy kind: {name}")))
                })
                .collect::<Result<Vec<_>, _>>()?;
            let cfg = load_with_overrides(&args)?;
            let options = ExperimentOptions {
                policies: Some(kinds),
                out_dir: Some(out_dir(args.out_dir.clone())),
                event_logs: args.event_log,
            };
            let report = run_experiment(&cfg, &options)?;
            print_report(&report);
            fail_if_all_seeds_failed(&report)
        }
        Command::GenTrace {
            kind,
            out,
            days,
            seed,
            sample_interval,
            peak_irradiance,
            night_wind,
            day_wind,
            base_wind,
            gust_amplitude,
            flat_irradiance,
            flat_wind,
        } => {
            let kind = SynthKind::parse(&kind)
                .ok_or_else(|| CliError::Usage(format!("unknown trace kind: {kind}")))?;
            let params = TraceSection {
                file: None,
                synthetic: Some(kind),
                days,
                sample_interval_s: sample_interval,
                peak_irradiance_wm2: peak_irradiance,
                night_wind_ms: night_wind,
                day_wind_ms: day_wind,
                base_wind_ms: base_wind,
                gust_amplitude_ms: gust_amplitude,
                flat_irradiance_wm2: flat_irradiance,
                flat_wind_ms: flat_wind,
                seed,
            };
            if days <= 0.0 || sample_interval <= 0.0 {
                return Err(CliError::Usage(
                    "days and sample-interval must be > 0".into(),
                ));
            }
            let trace =
                generate_synthetic_trace(kind, &params, seed).map_err(ExperimentError::Trace)?;
            let file = std::fs::File::create(&out)
                .map_err(|e| CliError::Io(format!("cannot create {}: {e}", out.display())))?;
            trace
                .write_csv(std::io::BufWriter::new(file))
                .map_err(ExperimentError::Trace)?;
            println!("wrote {} samples to {}", trace.len(), out.display());
            Ok(())
        }
    }
}

/// A batch where every seed failed exits nonzero with the first error's code.
fn fail_if_all_seeds_failed(report: &RunReport) -> Result<(), CliError> {
    let all_failed = report
        .policies
        .iter()
        .all(|p| p.seeds.iter().all(|s| s.summary.is_none()));
    if !all_failed {
        return Ok(());
    }
    let first = report
        .policies
        .iter()
        .flat_map(|p| p.seeds.iter())
        .find_map(|s| s.error.clone())
        .unwrap_or_else(|| "no runs executed".into());
    let invariant = first.contains("invariant");
    Err(CliError::BatchFailed {
        message: first,
        invariant,
    })
}

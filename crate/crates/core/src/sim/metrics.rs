//! Per-run measurement collection and summarization.

use serde::{Deserialize, Serialize};

use crate::protocol::Priority;

use super::SimError;

/// One charge-level sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPoint {
    pub time_s: f64,
    pub node: usize,
    pub re_pct: f64,
}

/// One duty-cycle change point; the value holds until the next point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DutyCyclePoint {
    pub time_s: f64,
    pub d_c: f64,
}

/// End-of-run conservation checks, relative residuals.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct EnergyAudit {
    pub conservation_residual_rel: f64,
    pub state_identity_residual_rel: f64,
}

/// Everything a single run measures. Identical inputs produce identical
/// metrics, byte for byte once serialized.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Metrics {
    pub policy: String,
    pub seed: u64,
    pub horizon_s: f64,
    pub packets_generated: u64,
    pub packets_delivered: u64,
    pub duplicate_deliveries: u64,
    pub packets_dropped_queue: u64,
    pub frames_collided: u64,
    /// Raw delay samples, indexed by priority.
    pub delays_s: [Vec<f64>; 4],
    pub energy_trajectory: Vec<TrajectoryPoint>,
    pub duty_cycle_trace: Vec<DutyCyclePoint>,
    /// Hours the active policy saw slot harvest at or above its neutral cost.
    pub eno_hours: f64,
    pub hours_at_full_duty: f64,
    pub node_deaths: Vec<(usize, f64)>,
    pub final_re_pct: Vec<f64>,
    /// Per-sender packet-generation phase offsets, for reproducibility.
    pub traffic_phases_s: Vec<f64>,
    pub audit: EnergyAudit,
}

impl Metrics {
    /// Books a delivered packet's delay under its priority.
    pub fn record_delay(
        &mut self,
        priority: Priority,
        generated_at: f64,
        delivered_at: f64,
    ) -> Result<(), SimError> {
        if delivered_at < generated_at {
            return Err(SimError::Invariant(format!(
                "negative delay: generated {generated_at}, delivered {delivered_at}"
            )));
        }
        self.delays_s[priority.index()].push(delivered_at - generated_at);
        Ok(())
    }

    pub fn delay_count(&self) -> usize {
        self.delays_s.iter().map(Vec::len).sum()
    }

    pub fn receiver_death_s(&self) -> Option<f64> {
        self.node_deaths
            .iter()
            .find(|(n, _)| *n == 0)
            .map(|(_, t)| *t)
    }
}

fn mean(samples: &[f64]) -> Option<f64> {
    if samples.is_empty() {
        None
    } else {
        Some(samples.iter().sum::<f64>() / samples.len() as f64)
    }
}

/// Aggregated view of one run; empty sample sets become absent fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub policy: String,
    pub seed: u64,
    pub packets_generated: u64,
    pub packets_delivered: u64,
    pub packets_dropped_queue: u64,
    pub frames_collided: u64,
    pub delivery_ratio: f64,
    pub mean_delay_all_s: Option<f64>,
    pub mean_delay_by_priority_s: [Option<f64>; 4],
    pub final_receiver_re_pct: f64,
    pub eno_hours: f64,
    pub hours_at_full_duty: f64,
    pub receiver_death_s: Option<f64>,
}

/// Collapses run metrics into the reported aggregates.
pub fn summarize(metrics: &Metrics) -> RunSummary {
    let all: Vec<f64> = metrics.delays_s.iter().flatten().copied().collect();
    RunSummary {
        policy: metrics.policy.clone(),
        seed: metrics.seed,
        packets_generated: metrics.packets_generated,
        packets_delivered: metrics.packets_delivered,
        packets_dropped_queue: metrics.packets_dropped_queue,
        frames_collided: metrics.frames_collided,
        delivery_ratio: if metrics.packets_generated == 0 {
            0.0
        } else {
            metrics.packets_delivered as f64 / metrics.packets_generated as f64
        },
        mean_delay_all_s: mean(&all),
        mean_delay_by_priority_s: [
            mean(&metrics.delays_s[0]),
            mean(&metrics.delays_s[1]),
            mean(&metrics.delays_s[2]),
            mean(&metrics.delays_s[3]),
        ],
        final_receiver_re_pct: metrics.final_re_pct.first().copied().unwrap_or(0.0),
        eno_hours: metrics.eno_hours,
        hours_at_full_duty: metrics.hours_at_full_duty,
        receiver_death_s: metrics.receiver_death_s(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn delay_recording_and_mean() {
        let mut m = Metrics::default();
        m.record_delay(Priority::P4, 10.0, 10.004).unwrap();
        m.record_delay(Priority::P4, 11.0, 11.002).unwrap();
        m.packets_generated = 2;
        m.packets_delivered = 2;
        let s = summarize(&m);
        let p4 = s.mean_delay_by_priority_s[Priority::P4.index()].unwrap();
        assert!((p4 - 0.003).abs() < 1e-12);
        assert_eq!(s.mean_delay_all_s.unwrap(), p4);
        assert!(s.mean_delay_by_priority_s[0].is_none());
    }

    #[test]
    fn negative_delay_is_invariant_violation() {
        let mut m = Metrics::default();
        assert!(m.record_delay(Priority::P1, 2.0, 1.0).is_err());
    }

    #[test]
    fn empty_run_has_absent_delay() {
        let s = summarize(&Metrics::default());
        assert!(s.mean_delay_all_s.is_none());
        assert_eq!(s.delivery_ratio, 0.0);
    }
}

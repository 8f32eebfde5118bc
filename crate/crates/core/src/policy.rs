//! Duty-cycle controllers.
//!
//! The hybrid controller sets the receiver duty cycle from the energy-neutral
//! test on the current slot and from the stored-energy level, tier by tier:
//!
//! | condition                        | d_c        |
//! |----------------------------------|------------|
//! | slot solar + wind ≥ E_c          | 1          |
//! | 50% ≤ RE ≤ 100%                  | 1          |
//! | 10% ≤ RE < 50%                   | (RE − E_th)/(100 − E_th), floored |
//! | RE < 10%                         | floor (0.05) |
//!
//! Three simplified stand-ins for single-source protocols are provided for
//! comparison runs: `solar-eno` (same tiers, wind ignored), `solar-available`
//! (stored-energy tiers only, no ENO row) and `fixed` (constant d_c).

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::energy::eno_achieved;
use crate::trace::SlotEnergy;

#[derive(Debug, Error)]
pub enum PolicyError {
    #[error("duty cycle must be in (0, 1], got {0}")]
    DutyCycleOutOfRange(f64),
}

/// Which duty-cycle controller a run uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PolicyKind {
    /// ENO on combined solar + wind, then stored-energy tiers.
    HenoHybrid,
    /// ENO tiers evaluated on solar alone.
    SolarEno,
    /// Stored-energy tiers only; no ENO row, solar-only harvest.
    SolarAvailable,
    /// Constant configured duty cycle.
    Fixed,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 4] = [
        PolicyKind::HenoHybrid,
        PolicyKind::SolarEno,
        PolicyKind::SolarAvailable,
        PolicyKind::Fixed,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PolicyKind::HenoHybrid => "heno-hybrid",
            PolicyKind::SolarEno => "solar-eno",
            PolicyKind::SolarAvailable => "solar-available",
            PolicyKind::Fixed => "fixed",
        }
    }

    pub fn parse(s: &str) -> Option<PolicyKind> {
        Self::ALL.into_iter().find(|k| k.name() == s)
    }

    /// Whether the node banks wind harvest. The single-source stand-ins see
    /// only the solar side, both for charging and for the ENO test.
    pub fn uses_wind(self) -> bool {
        matches!(self, PolicyKind::HenoHybrid)
    }
}

impl std::fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Controller parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PolicyConfig {
    pub kind: PolicyKind,
    /// Stored-energy threshold in percent below which the floor applies.
    pub e_th_pct: f64,
    /// Slot cost of continuous operation, the ENO comparison point (J).
    pub e_c_j: f64,
    /// Listening time per wake cycle (s).
    pub t_listen_s: f64,
    /// Lowest admissible duty cycle.
    pub d_c_floor: f64,
    /// Constant duty cycle for [`PolicyKind::Fixed`].
    pub fixed_d_c: f64,
    /// Add the current slot's not-yet-banked harvest to RE when deciding d_c.
    pub include_current_slot_harvest: bool,
}

impl Default for PolicyConfig {
    fn default() -> Self {
        Self {
            kind: PolicyKind::HenoHybrid,
            e_th_pct: 10.0,
            e_c_j: 224.0,
            t_listen_s: 0.1,
            d_c_floor: 0.05,
            fixed_d_c: 0.5,
            include_current_slot_harvest: false,
        }
    }
}

impl PolicyConfig {
    pub fn validate(&self) -> Result<(), (String, String)> {
        let err = |key: &str, msg: &str| Err((format!("policy.{key}"), msg.to_string()));
        if !(self.e_th_pct > 0.0 && self.e_th_pct < 100.0) {
            return err("e_th_pct", "must be in (0, 100)");
        }
        if !(self.e_c_j > 0.0) {
            return err("e_c_j", "must be > 0");
        }
        if !(self.t_listen_s > 0.0) {
            return err("t_listen_s", "must be > 0");
        }
        if !(self.d_c_floor > 0.0 && self.d_c_floor <= 1.0) {
            return err("d_c_floor", "must be in (0, 1]");
        }
        if !(self.fixed_d_c >= self.d_c_floor && self.fixed_d_c <= 1.0) {
            return err("fixed_d_c", "must be in [d_c_floor, 1]");
        }
        Ok(())
    }
}

/// A controller output: the duty cycle and the sleep time it implies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DutyCycleDecision {
    pub d_c: f64,
    pub t_sleep_s: f64,
}

impl DutyCycleDecision {
    fn from_d_c(d_c: f64, cfg: &PolicyConfig) -> Self {
        let d_c = d_c.clamp(cfg.d_c_floor, 1.0);
        Self {
            d_c,
            t_sleep_s: sleep_time(d_c, cfg.t_listen_s).expect("floored d_c is positive"),
        }
    }
}

/// Sleep time for a duty cycle: `t_listen × (1 − d_c) / d_c`.
pub fn sleep_time(d_c: f64, t_listen_s: f64) -> Result<f64, PolicyError> {
    if !(d_c > 0.0 && d_c <= 1.0) {
        return Err(PolicyError::DutyCycleOutOfRange(d_c));
    }
    debug_assert!(t_listen_s > 0.0);
    Ok(t_listen_s * (1.0 - d_c) / d_c)
}

/// Stored-energy tiers shared by the controllers. `re_total_pct` must already
/// include any forecast adjustment the caller wants.
fn stored_energy_d_c(re_total_pct: f64, cfg: &PolicyConfig) -> f64 {
    if re_total_pct >= 50.0 {
        1.0
    } else if re_total_pct >= cfg.e_th_pct {
        (re_total_pct - cfg.e_th_pct) / (100.0 - cfg.e_th_pct)
    } else {
        cfg.d_c_floor
    }
}

/// The hybrid ENO controller. Tier order: the ENO test on combined slot
/// energy wins; otherwise the stored-energy tiers decide.
pub fn heno_duty_cycle(
    slot: &SlotEnergy,
    re_total_pct: f64,
    cfg: &PolicyConfig,
) -> DutyCycleDecision {
    debug_assert!((0.0..=100.0).contains(&re_total_pct));
    let d_c = if eno_achieved(slot, cfg.e_c_j) {
        1.0
    } else {
        stored_energy_d_c(re_total_pct, cfg)
    };
    DutyCycleDecision::from_d_c(d_c, cfg)
}

/// Simplified baseline controllers standing in for single-source protocols.
pub fn baseline_duty_cycle(
    kind: PolicyKind,
    slot: &SlotEnergy,
    re_total_pct: f64,
    cfg: &PolicyConfig,
) -> DutyCycleDecision {
    let solar_only = SlotEnergy {
        wind_energy_j: 0.0,
        ..*slot
    };
    match kind {
        PolicyKind::HenoHybrid => heno_duty_cycle(slot, re_total_pct, cfg),
        PolicyKind::SolarEno => heno_duty_cycle(&solar_only, re_total_pct, cfg),
        PolicyKind::SolarAvailable => {
            DutyCycleDecision::from_d_c(stored_energy_d_c(re_total_pct, cfg), cfg)
        }
        PolicyKind::Fixed => DutyCycleDecision::from_d_c(cfg.fixed_d_c, cfg),
    }
}

/// Dispatches to the configured controller.
pub fn duty_cycle(slot: &SlotEnergy, re_total_pct: f64, cfg: &PolicyConfig) -> DutyCycleDecision {
    baseline_duty_cycle(cfg.kind, slot, re_total_pct, cfg)
}

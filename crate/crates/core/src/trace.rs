//! Environmental trace ingestion and harvested-energy conversion.
//!
//! A trace is a time series of irradiance and wind-speed samples. Samples are
//! aggregated into fixed-width accounting slots (one hour by default) and each
//! slot's mean irradiance / mean wind speed is converted into harvested joules
//! via the panel and micro-turbine models.

use std::f64::consts::PI;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Trace CSV header, fixed for cross-tool compatibility.
pub const TRACE_CSV_HEADER: [&str; 3] = ["timestamp_s", "irradiance_wm2", "wind_speed_ms"];

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("trace i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: malformed row: {msg}")]
    MalformedRow { line: u64, msg: String },
    #[error("line {line}: {field} must be >= 0 (got {value})")]
    NegativeValue {
        line: u64,
        field: &'static str,
        value: f64,
    },
    #[error("line {line}: timestamps must be strictly increasing")]
    NonMonotonicTimestamp { line: u64 },
    #[error("trace contains no samples")]
    Empty,
    #[error("trace shorter than one {0} s slot and partial slots are disabled")]
    ShorterThanSlot(f64),
    #[error("unexpected header {found:?}, expected {expected:?}")]
    BadHeader {
        found: Vec<String>,
        expected: Vec<String>,
    },
}

/// One environmental measurement: seconds since the simulation epoch plus
/// the solar irradiance (W/m²) and wind speed (m/s) observed at that time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HarvestSample {
    pub timestamp_s: f64,
    pub irradiance_wm2: f64,
    pub wind_speed_ms: f64,
}

/// Harvester geometry and slot layout.
///
/// `rotor_diameter_m` is the micro-turbine rotor diameter; the swept area is
/// derived as a disc ([`HarvestConfig::swept_area_m2`]).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HarvestConfig {
    pub panel_area_m2: f64,
    pub panel_efficiency: f64,
    pub rotor_diameter_m: f64,
    pub air_density_kg_m3: f64,
    pub power_coefficient: f64,
    pub slot_duration_s: f64,
    pub slots_per_day: u32,
}

impl Default for HarvestConfig {
    fn default() -> Self {
        Self {
            panel_area_m2: 7.7e-4,
            panel_efficiency: 0.22,
            rotor_diameter_m: 0.05,
            air_density_kg_m3: 1.25,
            power_coefficient: 0.1,
            slot_duration_s: 3600.0,
            slots_per_day: 24,
        }
    }
}

impl HarvestConfig {
    /// Rotor swept area, a disc of the configured diameter.
    pub fn swept_area_m2(&self) -> f64 {
        PI * (self.rotor_diameter_m / 2.0) * (self.rotor_diameter_m / 2.0)
    }

    /// Returns the offending key and a message for the first invalid field.
    pub fn validate(&self) -> Result<(), (String, String)> {
        let err = |key: &str, msg: &str| Err((format!("harvest.{key}"), msg.to_string()));
        if !(self.panel_area_m2 > 0.0) {
            return err("panel_area_m2", "must be > 0");
        }
        if !(self.panel_efficiency > 0.0 && self.panel_efficiency <= 1.0) {
            return err("panel_efficiency", "must be in (0, 1]");
        }
        if !(self.rotor_diameter_m > 0.0) {
            return err("rotor_diameter_m", "must be > 0");
        }
        if !(self.air_density_kg_m3 > 0.0) {
            return err("air_density_kg_m3", "must be > 0");
        }
        if !(self.power_coefficient > 0.0 && self.power_coefficient < 1.0) {
            return err("power_coefficient", "must be in (0, 1), Betz-bounded");
        }
        if !(self.slot_duration_s > 0.0) {
            return err("slot_duration_s", "must be > 0");
        }
        if self.slots_per_day == 0 {
            return err("slots_per_day", "must be > 0");
        }
        Ok(())
    }
}

/// Harvested energy of one accounting slot, split by source.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlotEnergy {
    pub slot_index: u64,
    pub solar_energy_j: f64,
    pub wind_energy_j: f64,
}

impl SlotEnergy {
    pub fn total_j(&self) -> f64 {
        self.solar_energy_j + self.wind_energy_j
    }
}

/// How [`slot_aggregate`] treats slots the trace does not fully cover.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PartialSlotPolicy {
    /// Drop head/tail slots without full coverage (default; avoids biased means).
    #[default]
    Drop,
    /// Emit every slot containing at least one sample.
    Include,
}

/// An ordered environmental time series.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct HarvestTrace {
    samples: Vec<HarvestSample>,
}

impl HarvestTrace {
    /// Builds a trace from pre-validated samples. Fails on empty input,
    /// negative values, or non-increasing timestamps.
    pub fn from_samples(samples: Vec<HarvestSample>) -> Result<Self, TraceError> {
        if samples.is_empty() {
            return Err(TraceError::Empty);
        }
        for (i, s) in samples.iter().enumerate() {
            let line = i as u64 + 2; // header is line 1
            if s.irradiance_wm2 < 0.0 {
                return Err(TraceError::NegativeValue {
                    line,
                    field: "irradiance_wm2",
                    value: s.irradiance_wm2,
                });
            }
            if s.wind_speed_ms < 0.0 {
                return Err(TraceError::NegativeValue {
                    line,
                    field: "wind_speed_ms",
                    value: s.wind_speed_ms,
                });
            }
            if i > 0 && s.timestamp_s <= samples[i - 1].timestamp_s {
                return Err(TraceError::NonMonotonicTimestamp { line });
            }
        }
        Ok(Self { samples })
    }

    pub fn samples(&self) -> &[HarvestSample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Time span the trace covers: `[first, last + last_interval)`.
    /// Each sample stands for the interval up to the next one; the final
    /// sample is extended by the preceding spacing. A single-sample trace
    /// covers nothing.
    pub fn coverage_end_s(&self) -> Option<f64> {
        match self.samples.len() {
            0 | 1 => None,
            n => {
                let last = self.samples[n - 1].timestamp_s;
                let prev = self.samples[n - 2].timestamp_s;
                Some(last + (last - prev))
            }
        }
    }

    /// Writes the trace in the standard CSV format.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), TraceError> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(TRACE_CSV_HEADER)
            .map_err(|e| io_from_csv(e))?;
        for s in &self.samples {
            w.write_record([
                s.timestamp_s.to_string(),
                s.irradiance_wm2.to_string(),
                s.wind_speed_ms.to_string(),
            ])
            .map_err(|e| io_from_csv(e))?;
        }
        w.flush()?;
        Ok(())
    }
}

fn io_from_csv(e: csv::Error) -> TraceError {
    TraceError::Io(std::io::Error::other(e))
}

/// Parses a trace from CSV text (`timestamp_s,irradiance_wm2,wind_speed_ms`
/// with a header row). Rejects malformed rows, negative physical values and
/// non-increasing timestamps, reporting the 1-based line number.
pub fn parse_trace<R: Read>(reader: R) -> Result<HarvestTrace, TraceError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(reader);
    {
        let headers = rdr.headers().map_err(|e| TraceError::MalformedRow {
            line: 1,
            msg: e.to_string(),
        })?;
        let found: Vec<String> = headers.iter().map(|h| h.trim().to_string()).collect();
        if found != TRACE_CSV_HEADER {
            return Err(TraceError::BadHeader {
                found,
                expected: TRACE_CSV_HEADER.iter().map(|s| s.to_string()).collect(),
            });
        }
    }
    let mut samples = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let line = i as u64 + 2;
        let record = record.map_err(|e| TraceError::MalformedRow {
            line,
            msg: e.to_string(),
        })?;
        if record.len() != 3 {
            return Err(TraceError::MalformedRow {
                line,
                msg: format!("expected 3 fields, got {}", record.len()),
            });
        }
        let field = |idx: usize, name: &str| -> Result<f64, TraceError> {
            record[idx]
                .trim()
                .parse::<f64>()
                .map_err(|e| TraceError::MalformedRow {
                    line,
                    msg: format!("{name}: {e}"),
                })
        };
        let sample = HarvestSample {
            timestamp_s: field(0, "timestamp_s")?,
            irradiance_wm2: field(1, "irradiance_wm2")?,
            wind_speed_ms: field(2, "wind_speed_ms")?,
        };
        if !sample.timestamp_s.is_finite()
            || !sample.irradiance_wm2.is_finite()
            || !sample.wind_speed_ms.is_finite()
        {
            return Err(TraceError::MalformedRow {
                line,
                msg: "non-finite value".into(),
            });
        }
        samples.push(sample);
    }
    // from_samples re-checks ordering/sign so errors carry line numbers
    // consistent with the file layout.
    HarvestTrace::from_samples(samples)
}

/// Solar energy harvested over one slot: `A × η × I_s × d_s`.
pub fn solar_slot_energy(mean_irradiance_wm2: f64, cfg: &HarvestConfig) -> f64 {
    debug_assert!(mean_irradiance_wm2 >= 0.0);
    cfg.panel_area_m2 * cfg.panel_efficiency * mean_irradiance_wm2 * cfg.slot_duration_s
}

/// Wind energy harvested over one slot: `0.5 × v³ × A_w × ρ × C_p × d_s`.
///
/// The slot-mean wind speed is cubed (mean-before-cube).
pub fn wind_slot_energy(mean_wind_speed_ms: f64, cfg: &HarvestConfig) -> f64 {
    debug_assert!(mean_wind_speed_ms >= 0.0);
    let v = mean_wind_speed_ms;
    0.5 * v
        * v
        * v
        * cfg.swept_area_m2()
        * cfg.air_density_kg_m3
        * cfg.power_coefficient
        * cfg.slot_duration_s
}

/// Aggregates a trace into per-slot harvested energy.
///
/// Slot `k` is the window `[k·d_s, (k+1)·d_s)` anchored at the epoch. Each
/// emitted slot converts the arithmetic mean of the samples inside its window.
/// Under [`PartialSlotPolicy::Drop`], a slot is emitted only when it contains
/// at least one sample and lies entirely inside the trace coverage.
pub fn slot_aggregate(
    trace: &HarvestTrace,
    cfg: &HarvestConfig,
    partial: PartialSlotPolicy,
) -> Result<Vec<SlotEnergy>, TraceError> {
    if trace.is_empty() {
        return Err(TraceError::Empty);
    }
    let d_s = cfg.slot_duration_s;
    let coverage_end = trace.coverage_end_s();

    let mut slots: Vec<SlotEnergy> = Vec::new();
    let samples = trace.samples();
    let mut i = 0usize;
    while i < samples.len() {
        let slot_index = (samples[i].timestamp_s / d_s).floor() as u64;
        let window_start = slot_index as f64 * d_s;
        let window_end = window_start + d_s;

        let mut sum_irr = 0.0;
        let mut sum_wind = 0.0;
        let mut count = 0u64;
        while i < samples.len() && samples[i].timestamp_s < window_end {
            sum_irr += samples[i].irradiance_wm2;
            sum_wind += samples[i].wind_speed_ms;
            count += 1;
            i += 1;
        }

        let full = samples[0].timestamp_s <= window_start
            && coverage_end.is_some_and(|end| window_end <= end);
        if partial == PartialSlotPolicy::Include || full {
            let n = count as f64;
            slots.push(SlotEnergy {
                slot_index,
                solar_energy_j: solar_slot_energy(sum_irr / n, cfg),
                wind_energy_j: wind_slot_energy(sum_wind / n, cfg),
            });
        }
    }

    if slots.is_empty() {
        return Err(TraceError::ShorterThanSlot(d_s));
    }
    Ok(slots)
}

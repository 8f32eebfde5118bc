//! Synthetic environmental traces for desk-scale experiments, written in the
//! same CSV format as field data.
//!
//! The solar families use a half-sine day: zero before 06:00, peak at noon,
//! zero after 18:00. The combined family adds strong nocturnal wind so the
//! receiver can stay energy neutral around the clock.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{SynthKind, TraceSection};
use crate::trace::{HarvestSample, HarvestTrace, TraceError};

const DAY_S: f64 = 86_400.0;
const SUNRISE_S: f64 = 6.0 * 3600.0;
const SUNSET_S: f64 = 18.0 * 3600.0;

fn day_fraction(t: f64) -> f64 {
    let tod = t.rem_euclid(DAY_S);
    if (SUNRISE_S..SUNSET_S).contains(&tod) {
        (PI * (tod - SUNRISE_S) / (SUNSET_S - SUNRISE_S)).sin()
    } else {
        0.0
    }
}

/// Generates a seeded, reproducible trace of `params.days` days sampled every
/// `params.sample_interval_s` seconds.
pub fn generate_synthetic_trace(
    kind: SynthKind,
    params: &TraceSection,
    seed: u64,
) -> Result<HarvestTrace, TraceError> {
    let duration = params.days * DAY_S;
    let step = params.sample_interval_s;
    let count = (duration / step).round() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut samples = Vec::with_capacity(count);
    for i in 0..count {
        let t = i as f64 * step;
        let (irradiance, wind) = match kind {
            SynthKind::Flat => (params.flat_irradiance_wm2, params.flat_wind_ms),
            SynthKind::SinusoidalSolar => (params.peak_irradiance_wm2 * day_fraction(t), 0.0),
            SynthKind::GustyWind => {
                let gust: f64 = rng.gen::<f64>() * 2.0 - 1.0;
                (
                    0.0,
                    (params.base_wind_ms + params.gust_amplitude_ms * gust).max(0.0),
                )
            }
            SynthKind::Combined => {
                let solar = params.peak_irradiance_wm2 * day_fraction(t);
                let tod = t.rem_euclid(DAY_S);
                let is_night = !(SUNRISE_S..SUNSET_S).contains(&tod);
                let wind = if is_night {
                    params.night_wind_ms
                } else {
                    params.day_wind_ms
                };
                (solar, wind)
            }
        };
        samples.push(HarvestSample {
            timestamp_s: t,
            irradiance_wm2: irradiance,
            wind_speed_ms: wind,
        });
    }
    HarvestTrace::from_samples(samples)
}

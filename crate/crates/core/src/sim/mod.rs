//! Deterministic discrete-event engine: star topology, idealized collision
//! channel, per-node energy accounting and metrics collection.
//!
//! One run is strictly single-threaded; identical `(config, slots, seed)`
//! inputs produce identical metrics and event logs. Batch callers may run
//! independent seeds in parallel.

mod channel;
mod engine;
mod event;
mod metrics;
mod receiver;
mod sender;

pub use channel::PacketMeta;
pub use engine::{run, run_with_log, SimError};
pub use metrics::{summarize, DutyCyclePoint, EnergyAudit, Metrics, RunSummary, TrajectoryPoint};

/// Per-sender packet-generation phase offset in `[0, period)`, derived from
/// the same per-node stream the simulator draws from.
pub fn traffic_phase(seed: u64, node: usize, period_s: f64) -> f64 {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(node as u64 * 2);
    rng.gen::<f64>() * period_s
}

//! Idealized shared medium for a star within mutual radio range of every
//! node: zero propagation delay, no capture. A frame reaches its listeners
//! only when no other transmission overlaps any part of its airtime; two or
//! more overlapping transmissions destroy each other symmetrically.

use crate::protocol::{Frame, Priority};

use super::event::TxId;

/// Simulator-side bookkeeping for a data packet riding in a DATA frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PacketMeta {
    pub packet_id: u64,
    pub priority: Priority,
    pub generated_at: f64,
    pub origin: usize,
}

#[derive(Debug, Clone)]
pub struct Transmission {
    pub id: TxId,
    pub source: usize,
    pub frame: Frame,
    pub meta: Option<PacketMeta>,
    pub start: f64,
    pub end: f64,
    pub overlapped: bool,
    /// Source died before the airtime completed; never delivered.
    pub aborted: bool,
}

impl Transmission {
    pub fn deliverable(&self) -> bool {
        !self.overlapped && !self.aborted
    }
}

fn intervals_overlap(a_start: f64, a_end: f64, b_start: f64, b_end: f64) -> bool {
    a_start < b_end && b_start < a_end
}

/// Retention horizon for ended transmissions, used by the delivery
/// soundness re-check. Far larger than any frame airtime.
const RECENT_RETENTION_S: f64 = 0.05;

#[derive(Debug, Default)]
pub struct Channel {
    active: Vec<Transmission>,
    recent: Vec<Transmission>,
    next_id: TxId,
}

impl Channel {
    pub fn new() -> Self {
        Self::default()
    }

    /// Registers a transmission over `[start, end)`, marking collision on it
    /// and on everything it overlaps.
    pub fn begin(
        &mut self,
        source: usize,
        frame: Frame,
        meta: Option<PacketMeta>,
        start: f64,
        end: f64,
    ) -> TxId {
        debug_assert!(end > start);
        let id = self.next_id;
        self.next_id += 1;
        let mut tx = Transmission {
            id,
            source,
            frame,
            meta,
            start,
            end,
            overlapped: false,
            aborted: false,
        };
        for other in &mut self.active {
            if intervals_overlap(start, end, other.start, other.end) {
                other.overlapped = true;
                tx.overlapped = true;
            }
        }
        self.active.push(tx);
        id
    }

    /// Carrier sense at an instant. Intervals are half-open, so a
    /// transmission ending exactly at `t` no longer occupies the channel.
    pub fn busy_at(&self, t: f64) -> bool {
        self.active.iter().any(|tx| tx.start <= t && t < tx.end)
    }

    /// Removes a completed transmission and returns it for delivery.
    pub fn finish(&mut self, id: TxId, now: f64) -> Option<Transmission> {
        let pos = self.active.iter().position(|tx| tx.id == id)?;
        let tx = self.active.swap_remove(pos);
        self.recent.retain(|t| t.end > now - RECENT_RETENTION_S);
        self.recent.push(tx.clone());
        Some(tx)
    }

    /// Marks every in-flight transmission from a dying node as aborted and
    /// cuts its occupancy at the death instant.
    pub fn abort_from(&mut self, source: usize, death_time: f64) {
        for tx in &mut self.active {
            if tx.source == source && tx.end > death_time {
                tx.aborted = true;
                tx.end = tx.end.min(death_time.max(tx.start));
            }
        }
    }

    /// Independent re-check that a frame about to be delivered shared the
    /// channel with nothing, regardless of the overlap flags.
    pub fn delivery_is_sound(&self, tx: &Transmission) -> bool {
        !self
            .active
            .iter()
            .chain(self.recent.iter())
            .any(|o| o.id != tx.id && intervals_overlap(tx.start, tx.end, o.start, o.end))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::NodeAddr;

    fn wb() -> Frame {
        Frame::Wb {
            sa: NodeAddr(0),
            e_s: true,
        }
    }

    #[test]
    fn lone_transmission_is_deliverable() {
        let mut ch = Channel::new();
        let id = ch.begin(0, wb(), None, 0.0, 1e-3);
        assert!(ch.busy_at(0.5e-3));
        assert!(!ch.busy_at(1e-3)); // half-open
        let tx = ch.finish(id, 1e-3).unwrap();
        assert!(tx.deliverable());
        assert!(ch.delivery_is_sound(&tx));
    }

    #[test]
    fn overlap_destroys_both() {
        let mut ch = Channel::new();
        let a = ch.begin(1, wb(), None, 0.0, 1e-3);
        let b = ch.begin(2, wb(), None, 0.5e-3, 1.5e-3);
        let ta = ch.finish(a, 1e-3).unwrap();
        let tb = ch.finish(b, 1.5e-3).unwrap();
        assert!(!ta.deliverable());
        assert!(!tb.deliverable());
        assert!(!ch.delivery_is_sound(&ta));
    }

    #[test]
    fn back_to_back_is_clean() {
        let mut ch = Channel::new();
        let a = ch.begin(1, wb(), None, 0.0, 1e-3);
        let b = ch.begin(2, wb(), None, 1e-3, 2e-3);
        assert!(ch.finish(a, 1e-3).unwrap().deliverable());
        assert!(ch.finish(b, 2e-3).unwrap().deliverable());
    }

    #[test]
    fn abort_truncates_occupancy() {
        let mut ch = Channel::new();
        let id = ch.begin(1, wb(), None, 0.0, 1e-3);
        ch.abort_from(1, 0.4e-3);
        assert!(!ch.busy_at(0.5e-3));
        let tx = ch.finish(id, 1e-3).unwrap();
        assert!(tx.aborted);
        assert!(!tx.deliverable());
    }

    #[test]
    fn future_registration_counts_for_overlap() {
        let mut ch = Channel::new();
        ch.begin(0, wb(), None, 5e-3, 6e-3);
        assert!(!ch.busy_at(4e-3));
        let id = ch.begin(1, wb(), None, 5.5e-3, 6.5e-3);
        let tx = ch.finish(id, 6.5e-3).unwrap();
        assert!(tx.overlapped);
    }
}

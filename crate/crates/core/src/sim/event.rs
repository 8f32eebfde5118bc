//! Deterministic event queue: events fire in (time, insertion sequence)
//! order, so equal-time events execute in the order they were scheduled.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

pub type TxId = u64;

/// Scheduled simulation actions. `epoch` fields guard against stale timers:
/// a node bumps its epoch whenever a pending timer becomes meaningless, and
/// stale firings are ignored.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EventKind {
    /// Receiver begins a beacon round (or evaluates its period/sleep state).
    RoundStart { epoch: u32 },
    /// Receiver waiting-timer expiry or data timeout, by phase.
    ReceiverTimer { epoch: u32 },
    /// A transmission's airtime ends; deliver or discard it.
    TxEnd { tx: TxId },
    /// A sender's contention slot boundary.
    CsmaSlot { node: usize, epoch: u32 },
    /// A sender's grant/ack timeout.
    SenderTimer { node: usize, epoch: u32 },
    /// End of an optional sender sleep interval.
    SenderWake { node: usize, epoch: u32 },
    /// Periodic packet generation at one sender.
    PacketGen { node: usize },
    /// Bank the harvest accrued since the previous credit.
    HarvestCredit,
    /// Sample every node's charge level.
    TrajectorySample,
}

#[derive(Debug)]
struct Entry {
    time: f64,
    seq: u64,
    kind: EventKind,
}

impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.time == other.time && self.seq == other.seq
    }
}
impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        // Reversed: BinaryHeap is a max-heap, we want earliest first.
        other
            .time
            .total_cmp(&self.time)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Debug, Default)]
pub struct EventQueue {
    heap: BinaryHeap<Entry>,
    next_seq: u64,
}

impl EventQueue {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn schedule(&mut self, time: f64, kind: EventKind) {
        debug_assert!(time.is_finite());
        let seq = self.next_seq;
        self.next_seq += 1;
        self.heap.push(Entry { time, seq, kind });
    }

    pub fn pop(&mut self) -> Option<(f64, EventKind)> {
        self.heap.pop().map(|e| (e.time, e.kind))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pops_in_time_order() {
        let mut q = EventQueue::new();
        q.schedule(2.0, EventKind::HarvestCredit);
        q.schedule(1.0, EventKind::TrajectorySample);
        q.schedule(3.0, EventKind::RoundStart { epoch: 0 });
        assert_eq!(q.pop().unwrap().0, 1.0);
        assert_eq!(q.pop().unwrap().0, 2.0);
        assert_eq!(q.pop().unwrap().0, 3.0);
        assert!(q.pop().is_none());
    }

    #[test]
    fn equal_times_fire_in_schedule_order() {
        let mut q = EventQueue::new();
        q.schedule(1.0, EventKind::PacketGen { node: 1 });
        q.schedule(1.0, EventKind::PacketGen { node: 2 });
        q.schedule(1.0, EventKind::PacketGen { node: 3 });
        let order: Vec<_> = (0..3).map(|_| q.pop().unwrap().1).collect();
        assert_eq!(
            order,
            vec![
                EventKind::PacketGen { node: 1 },
                EventKind::PacketGen { node: 2 },
                EventKind::PacketGen { node: 3 },
            ]
        );
    }
}

//! Sender-side packet buffer: highest priority first, FIFO within a
//! priority, bounded capacity with drop-oldest-lowest-priority overflow.

use std::collections::VecDeque;

use super::Priority;

/// A generated data packet awaiting delivery.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Packet {
    /// Run-unique id, used to pin the in-flight packet across a handshake.
    pub id: u64,
    pub priority: Priority,
    pub generated_at: f64,
}

/// Priority-ordered bounded buffer.
#[derive(Debug, Clone)]
pub struct PacketQueue {
    by_priority: [VecDeque<Packet>; 4],
    capacity: usize,
    len: usize,
}

impl PacketQueue {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0);
        Self {
            by_priority: Default::default(),
            capacity,
            len: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Inserts a packet. When full, the oldest packet of the lowest priority
    /// present (counting the incoming one) is dropped and returned. A packet
    /// mid-handshake may be passed as `protected`; it is never evicted.
    pub fn push(&mut self, packet: Packet, protected: Option<u64>) -> Option<Packet> {
        let dropped = if self.len == self.capacity {
            let candidate = self.by_priority.iter().enumerate().find_map(|(prio, q)| {
                q.iter()
                    .position(|p| Some(p.id) != protected)
                    .map(|pos| (prio, pos))
            });
            match candidate {
                // Queued candidate no higher than the incoming packet and
                // strictly older: evict it.
                Some((prio, pos)) if prio <= packet.priority.index() => {
                    self.len -= 1;
                    self.by_priority[prio].remove(pos)
                }
                // Incoming is strictly lowest, or everything else is
                // protected: drop the incoming packet.
                _ => return Some(packet),
            }
        } else {
            None
        };
        self.by_priority[packet.priority.index()].push_back(packet);
        self.len += 1;
        dropped
    }

    /// Highest-priority packet, FIFO within the priority.
    pub fn head(&self) -> Option<&Packet> {
        self.by_priority.iter().rev().find_map(|q| q.front())
    }

    /// Removes a specific packet. Returns whether it was present.
    pub fn remove(&mut self, id: u64) -> bool {
        for q in &mut self.by_priority {
            if let Some(pos) = q.iter().position(|p| p.id == id) {
                q.remove(pos);
                self.len -= 1;
                return true;
            }
        }
        false
    }
}

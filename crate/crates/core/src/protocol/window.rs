//! The receiver's request-collection window.
//!
//! After a wake-up beacon the receiver waits up to `T_w` for transmission
//! requests. Each first request of a given priority `P_k` truncates the
//! remaining wait by the factor `(4 − k) / 4`, so a top-priority request
//! cancels the wait outright and is granted immediately. When the window
//! closes, the grant goes to the highest collected priority, ties broken by
//! earliest arrival.

use super::{NodeAddr, Priority};

/// A collected transmission request.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CollectedTxb {
    pub sender: NodeAddr,
    pub priority: Priority,
    pub arrived_at: f64,
}

/// How the window reacted to a request.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WindowReaction {
    /// Request recorded; the deadline did not move.
    Recorded,
    /// Request recorded and the remaining wait shrank to the new deadline.
    Truncated { new_deadline: f64 },
    /// Top-priority request: the wait is cancelled, grant the sender now.
    CancelAndGrant { sender: NodeAddr },
    /// Arrived at or after the deadline; ignored.
    Late,
}

/// State of one collection window.
#[derive(Debug, Clone)]
pub struct TxbWindow {
    deadline: f64,
    collected: Vec<CollectedTxb>,
    priority_seen: [bool; 4],
}

impl TxbWindow {
    /// Opens a window closing at `deadline` (wake-up beacon end + T_w).
    pub fn new(deadline: f64) -> Self {
        Self {
            deadline,
            collected: Vec::new(),
            priority_seen: [false; 4],
        }
    }

    pub fn deadline(&self) -> f64 {
        self.deadline
    }

    pub fn collected(&self) -> &[CollectedTxb] {
        &self.collected
    }

    /// Handles a request arriving at `now`.
    pub fn on_txb(&mut self, sender: NodeAddr, priority: Priority, now: f64) -> WindowReaction {
        if now >= self.deadline {
            return WindowReaction::Late;
        }
        self.collected.push(CollectedTxb {
            sender,
            priority,
            arrived_at: now,
        });
        if priority == Priority::P4 {
            self.deadline = now;
            return WindowReaction::CancelAndGrant { sender };
        }
        let first_of_priority = !self.priority_seen[priority.index()];
        self.priority_seen[priority.index()] = true;
        if first_of_priority {
            let remaining = self.deadline - now;
            let factor = (4 - priority.level()) as f64 / 4.0;
            self.deadline = now + remaining * factor;
            WindowReaction::Truncated {
                new_deadline: self.deadline,
            }
        } else {
            WindowReaction::Recorded
        }
    }

    /// Selection at window close: highest priority, earliest arrival on ties.
    /// `None` when nothing was collected.
    pub fn select(&self) -> Option<CollectedTxb> {
        let mut best: Option<CollectedTxb> = None;
        for txb in &self.collected {
            match best {
                None => best = Some(*txb),
                Some(b) if txb.priority > b.priority => best = Some(*txb),
                _ => {}
            }
        }
        best
    }
}

//! Frame formats and the protocol building blocks of the beacon handshake.
//!
//! A communication round is receiver-initiated: the receiver broadcasts a
//! wake-up beacon, collects transmission requests for a bounded waiting time,
//! grants the channel to the highest-priority requester, and acknowledges the
//! data it receives.

pub mod frame;
pub mod queue;
pub mod window;

use serde::{Deserialize, Serialize};

pub use frame::{decode_frame, encode_frame, frame_airtime, Frame, FrameError};
pub use queue::{Packet, PacketQueue};
pub use window::{TxbWindow, WindowReaction};

/// Small-integer node address. The receiver is node 0 by convention; senders
/// are numbered from 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct NodeAddr(pub u16);

impl std::fmt::Display for NodeAddr {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Packet priority levels, lowest to highest: periodic monitoring,
/// on-demand, real-time, and time-critical traffic. The highest level is
/// forwarded without waiting out the collection window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Priority {
    P1 = 1,
    P2 = 2,
    P3 = 3,
    P4 = 4,
}

impl Priority {
    pub const ALL: [Priority; 4] = [Priority::P1, Priority::P2, Priority::P3, Priority::P4];

    pub fn level(self) -> u8 {
        self as u8
    }

    pub fn from_level(level: u8) -> Option<Priority> {
        match level {
            1 => Some(Priority::P1),
            2 => Some(Priority::P2),
            3 => Some(Priority::P3),
            4 => Some(Priority::P4),
            _ => None,
        }
    }

    /// Zero-based index for per-priority arrays.
    pub fn index(self) -> usize {
        self.level() as usize - 1
    }
}

impl std::fmt::Display for Priority {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "P{}", self.level())
    }
}

/// Maps a uniform draw in `[0, 1)` onto a priority by quartile:
/// `[0, .25) → P1`, `[.25, .5) → P2`, `[.5, .75) → P3`, `[.75, 1) → P4`.
pub fn assign_priority(u: f64) -> Priority {
    debug_assert!((0.0..1.0).contains(&u));
    if u < 0.25 {
        Priority::P1
    } else if u < 0.5 {
        Priority::P2
    } else if u < 0.75 {
        Priority::P3
    } else {
        Priority::P4
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn priority_order() {
        assert!(Priority::P1 < Priority::P2);
        assert!(Priority::P2 < Priority::P3);
        assert!(Priority::P3 < Priority::P4);
        assert_eq!(Priority::ALL.iter().max(), Some(&Priority::P4));
    }

    #[test]
    fn quartile_mapping() {
        assert_eq!(assign_priority(0.0), Priority::P1);
        assert_eq!(assign_priority(0.49999), Priority::P2);
        assert_eq!(assign_priority(0.5), Priority::P3);
        assert_eq!(assign_priority(0.75), Priority::P4);
        assert_eq!(assign_priority(0.9999999), Priority::P4);
    }

    #[test]
    fn level_round_trip() {
        for p in Priority::ALL {
            assert_eq!(Priority::from_level(p.level()), Some(p));
        }
        assert_eq!(Priority::from_level(0), None);
        assert_eq!(Priority::from_level(5), None);
    }
}

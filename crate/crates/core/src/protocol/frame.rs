//! Byte-exact frame encoding.
//!
//! Every frame is `FC(2) | kind-specific fields | zero padding | FCS(2)` with
//! little-endian multi-byte fields, padded to the fixed per-kind size:
//!
//! | kind | size | fields after FC                        |
//! |------|------|----------------------------------------|
//! | WB   |  9 B | sa: u16, e_s: u8                       |
//! | TxB  | 14 B | priority: u8, da: u16                  |
//! | RxB  | 13 B | ss: u16                                |
//! | ACK  | 11 B | —                                      |
//! | DATA | 28 B | priority: u8, payload: [u8; 23]        |
//!
//! FC carries the frame kind in its low three bits; FCS is the standard
//! 16-bit CRC (poly 0x1021, bit-reflected, zero init) over everything before
//! it, appended little-endian.

use thiserror::Error;

use super::{NodeAddr, Priority};

/// Fixed DATA payload length; together with FC, priority and FCS this pads
/// the frame to its 28-byte wire size.
pub const DATA_PAYLOAD_LEN: usize = 23;

pub const WB_SIZE: usize = 9;
pub const TXB_SIZE: usize = 14;
pub const RXB_SIZE: usize = 13;
pub const ACK_SIZE: usize = 11;
pub const DATA_SIZE: usize = 28;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FrameError {
    #[error("frame too short to carry a frame control field")]
    Truncated,
    #[error("unknown frame kind code {0}")]
    UnknownKind(u16),
    #[error("{kind} frame must be {expected} bytes, got {got}")]
    LengthMismatch {
        kind: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("frame check sequence mismatch")]
    FcsMismatch,
    #[error("invalid field value: {0}")]
    InvalidField(&'static str),
}

/// A protocol frame. Wire layout documented at the module level.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Frame {
    /// Wake-up beacon: receiver's address plus its energy-state flag.
    Wb {
        sa: NodeAddr,
        e_s: bool,
    },
    /// Transmission request: pending packet priority and destination.
    Txb {
        priority: Priority,
        da: NodeAddr,
    },
    /// Grant naming the selected sender.
    Rxb {
        ss: NodeAddr,
    },
    Ack,
    Data {
        priority: Priority,
        payload: [u8; DATA_PAYLOAD_LEN],
    },
}

impl Frame {
    pub fn kind_name(&self) -> &'static str {
        match self {
            Frame::Wb { .. } => "WB",
            Frame::Txb { .. } => "TxB",
            Frame::Rxb { .. } => "RxB",
            Frame::Ack => "ACK",
            Frame::Data { .. } => "DATA",
        }
    }

    fn kind_code(&self) -> u16 {
        match self {
            Frame::Wb { .. } => 1,
            Frame::Txb { .. } => 2,
            Frame::Rxb { .. } => 3,
            Frame::Ack => 4,
            Frame::Data { .. } => 5,
        }
    }

    /// Encoded size in bytes.
    pub fn size_bytes(&self) -> usize {
        match self {
            Frame::Wb { .. } => WB_SIZE,
            Frame::Txb { .. } => TXB_SIZE,
            Frame::Rxb { .. } => RXB_SIZE,
            Frame::Ack => ACK_SIZE,
            Frame::Data { .. } => DATA_SIZE,
        }
    }
}

/// Time on air at the given data rate: `size × 8 / rate`.
pub fn frame_airtime(frame: &Frame, data_rate_bps: f64) -> f64 {
    airtime_of_size(frame.size_bytes(), data_rate_bps)
}

pub fn airtime_of_size(size_bytes: usize, data_rate_bps: f64) -> f64 {
    debug_assert!(data_rate_bps > 0.0);
    size_bytes as f64 * 8.0 / data_rate_bps
}

/// Bit-reflected CRC-16 (poly 0x1021 reflected to 0x8408), zero initial value.
fn crc16(bytes: &[u8]) -> u16 {
    let mut crc: u16 = 0x0000;
    for &b in bytes {
        crc ^= b as u16;
        for _ in 0..8 {
            if crc & 1 != 0 {
                crc = (crc >> 1) ^ 0x8408;
            } else {
                crc >>= 1;
            }
        }
    }
    crc
}

/// Encodes a frame to its fixed-size wire representation.
pub fn encode_frame(frame: &Frame) -> Vec<u8> {
    let size = frame.size_bytes();
    let mut buf = vec![0u8; size];
    buf[0..2].copy_from_slice(&frame.kind_code().to_le_bytes());
    match frame {
        Frame::Wb { sa, e_s } => {
            buf[2..4].copy_from_slice(&sa.0.to_le_bytes());
            buf[4] = *e_s as u8;
        }
        Frame::Txb { priority, da } => {
            buf[2] = priority.level();
            buf[3..5].copy_from_slice(&da.0.to_le_bytes());
        }
        Frame::Rxb { ss } => {
            buf[2..4].copy_from_slice(&ss.0.to_le_bytes());
        }
        Frame::Ack => {}
        Frame::Data { priority, payload } => {
            buf[2] = priority.level();
            buf[3..3 + DATA_PAYLOAD_LEN].copy_from_slice(payload);
        }
    }
    let fcs = crc16(&buf[..size - 2]);
    buf[size - 2..].copy_from_slice(&fcs.to_le_bytes());
    buf
}

/// Decodes a wire frame, checking size and FCS. Any mismatch is reported as
/// a corrupt frame and treated as loss by callers.
pub fn decode_frame(bytes: &[u8]) -> Result<Frame, FrameError> {
    if bytes.len() < 4 {
        return Err(FrameError::Truncated);
    }
    let fc = u16::from_le_bytes([bytes[0], bytes[1]]);
    let (kind, expected) = match fc & 0x7 {
        1 => ("WB", WB_SIZE),
        2 => ("TxB", TXB_SIZE),
        3 => ("RxB", RXB_SIZE),
        4 => ("ACK", ACK_SIZE),
        5 => ("DATA", DATA_SIZE),
        _ => return Err(FrameError::UnknownKind(fc)),
    };
    if bytes.len() != expected {
        return Err(FrameError::LengthMismatch {
            kind,
            expected,
            got: bytes.len(),
        });
    }
    let fcs = u16::from_le_bytes([bytes[expected - 2], bytes[expected - 1]]);
    if crc16(&bytes[..expected - 2]) != fcs {
        return Err(FrameError::FcsMismatch);
    }
    match fc & 0x7 {
        1 => {
            let e_s = match bytes[4] {
                0 => false,
                1 => true,
                _ => return Err(FrameError::InvalidField("e_s")),
            };
            Ok(Frame::Wb {
                sa: NodeAddr(u16::from_le_bytes([bytes[2], bytes[3]])),
                e_s,
            })
        }
        2 => {
            let priority =
                Priority::from_level(bytes[2]).ok_or(FrameError::InvalidField("priority"))?;
            Ok(Frame::Txb {
                priority,
                da: NodeAddr(u16::from_le_bytes([bytes[3], bytes[4]])),
            })
        }
        3 => Ok(Frame::Rxb {
            ss: NodeAddr(u16::from_le_bytes([bytes[2], bytes[3]])),
        }),
        4 => Ok(Frame::Ack),
        5 => {
            let priority =
                Priority::from_level(bytes[2]).ok_or(FrameError::InvalidField("priority"))?;
            let mut payload = [0u8; DATA_PAYLOAD_LEN];
            payload.copy_from_slice(&bytes[3..3 + DATA_PAYLOAD_LEN]);
            Ok(Frame::Data { priority, payload })
        }
        _ => unreachable!(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sizes_match_wire_contract() {
        assert_eq!(
            encode_frame(&Frame::Wb {
                sa: NodeAddr(1),
                e_s: true
            })
            .len(),
            9
        );
        assert_eq!(
            encode_frame(&Frame::Txb {
                priority: Priority::P4,
                da: NodeAddr(0)
            })
            .len(),
            14
        );
        assert_eq!(encode_frame(&Frame::Rxb { ss: NodeAddr(3) }).len(), 13);
        assert_eq!(encode_frame(&Frame::Ack).len(), 11);
        assert_eq!(
            encode_frame(&Frame::Data {
                priority: Priority::P1,
                payload: [0; DATA_PAYLOAD_LEN]
            })
            .len(),
            28
        );
    }

    #[test]
    fn wb_round_trip() {
        let frame = Frame::Wb {
            sa: NodeAddr(1),
            e_s: true,
        };
        assert_eq!(decode_frame(&encode_frame(&frame)).unwrap(), frame);
    }

    #[test]
    fn txb_round_trip() {
        let frame = Frame::Txb {
            priority: Priority::P4,
            da: NodeAddr(0),
        };
        assert_eq!(decode_frame(&encode_frame(&frame)).unwrap(), frame);
    }

    #[test]
    fn short_wb_is_corrupt() {
        let mut bytes = encode_frame(&Frame::Wb {
            sa: NodeAddr(1),
            e_s: false,
        });
        bytes.truncate(8);
        assert_eq!(
            decode_frame(&bytes),
            Err(FrameError::LengthMismatch {
                kind: "WB",
                expected: 9,
                got: 8
            })
        );
    }

    #[test]
    fn flipped_bit_fails_fcs() {
        let mut bytes = encode_frame(&Frame::Rxb { ss: NodeAddr(7) });
        bytes[2] ^= 0x01;
        assert_eq!(decode_frame(&bytes), Err(FrameError::FcsMismatch));
    }

    #[test]
    fn bad_priority_is_invalid_field() {
        let mut bytes = encode_frame(&Frame::Txb {
            priority: Priority::P1,
            da: NodeAddr(0),
        });
        bytes[2] = 9;
        let fcs = crc16(&bytes[..TXB_SIZE - 2]).to_le_bytes();
        bytes[TXB_SIZE - 2..].copy_from_slice(&fcs);
        assert_eq!(
            decode_frame(&bytes),
            Err(FrameError::InvalidField("priority"))
        );
    }

    #[test]
    fn airtimes_at_250_kbps() {
        let rate = 250_000.0;
        assert_eq!(
            frame_airtime(
                &Frame::Wb {
                    sa: NodeAddr(0),
                    e_s: false
                },
                rate
            ),
            288e-6
        );
        assert_eq!(
            frame_airtime(
                &Frame::Txb {
                    priority: Priority::P1,
                    da: NodeAddr(0)
                },
                rate
            ),
            448e-6
        );
        assert_eq!(frame_airtime(&Frame::Rxb { ss: NodeAddr(0) }, rate), 416e-6);
        assert_eq!(frame_airtime(&Frame::Ack, rate), 352e-6);
        assert_eq!(
            frame_airtime(
                &Frame::Data {
                    priority: Priority::P1,
                    payload: [0; DATA_PAYLOAD_LEN]
                },
                rate
            ),
            896e-6
        );
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        fn arb_frame() -> impl Strategy<Value = Frame> {
            let prio = (1u8..=4).prop_map(|l| Priority::from_level(l).unwrap());
            prop_oneof![
                (any::<u16>(), any::<bool>()).prop_map(|(sa, e_s)| Frame::Wb {
                    sa: NodeAddr(sa),
                    e_s
                }),
                (prio.clone(), any::<u16>()).prop_map(|(priority, da)| Frame::Txb {
                    priority,
                    da: NodeAddr(da)
                }),
                any::<u16>().prop_map(|ss| Frame::Rxb { ss: NodeAddr(ss) }),
                Just(Frame::Ack),
                (prio, any::<[u8; DATA_PAYLOAD_LEN]>())
                    .prop_map(|(priority, payload)| Frame::Data { priority, payload }),
            ]
        }

        proptest! {
            #[test]
            fn encode_decode_identity(frame in arb_frame()) {
                let bytes = encode_frame(&frame);
                prop_assert_eq!(bytes.len(), frame.size_bytes());
                prop_assert_eq!(decode_frame(&bytes).unwrap(), frame);
            }
        }
    }
}

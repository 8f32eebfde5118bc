//! Sender side of the handshake: react to wake-up beacons, contend with
//! p-persistent carrier sensing, transmit on grant, retry on silence.

use rand::Rng;

use crate::protocol::frame::DATA_PAYLOAD_LEN;
use crate::protocol::{assign_priority, Frame, NodeAddr, Priority};

use super::channel::Transmission;
use super::engine::{Sim, SimError, TxPhase};
use super::event::EventKind;

fn data_payload(packet_id: u64) -> [u8; DATA_PAYLOAD_LEN] {
    let mut payload = [0u8; DATA_PAYLOAD_LEN];
    payload[..8].copy_from_slice(&packet_id.to_le_bytes());
    payload
}

impl<'a> Sim<'a> {
    /// Periodic packet generation. Dead nodes stop generating.
    pub(super) fn packet_gen(&mut self, node: usize) -> Result<(), SimError> {
        if !self.settle_sender(node, self.now)? {
            return Ok(());
        }
        self.metrics.packets_generated += 1;
        let id = self.next_packet_id;
        self.next_packet_id += 1;
        let fixed = self
            .cfg
            .traffic
            .fixed_priority
            .and_then(Priority::from_level);
        let now = self.now;
        let gen_period = self.gen_period;
        let s = self.sender_mut(node);
        let priority = match fixed {
            Some(p) => p,
            None => assign_priority(s.traffic_rng.gen::<f64>()),
        };
        let protected = s.in_flight.map(|p| p.id);
        let dropped = s
            .queue
            .push(
                crate::protocol::Packet {
                    id,
                    priority,
                    generated_at: now,
                },
                protected,
            )
            .is_some();
        if dropped {
            self.metrics.packets_dropped_queue += 1;
        }
        let next = now + gen_period;
        self.sender_mut(node).next_gen = next;
        self.queue.schedule(next, EventKind::PacketGen { node });
        self.log_args(node, format_args!("packet_gen {priority}"));
        Ok(())
    }

    /// Wake-up beacon heard. Returns whether this sender enters contention.
    pub(super) fn sender_on_wb(&mut self, node: usize, e_s: bool) -> Result<bool, SimError> {
        if self.sender(node).phase != TxPhase::Waiting {
            return Ok(false);
        }
        if self.sender(node).queue.is_empty() || !e_s {
            // Nothing to send, or the receiver flagged low energy: stay put.
            return Ok(false);
        }
        if !self.settle_sender(node, self.now)? {
            return Ok(false);
        }
        let now = self.now;
        let t_w = self.cfg.timers.t_w_s;
        let s = self.sender_mut(node);
        s.in_flight = s.queue.head().copied();
        s.phase = TxPhase::Sensing;
        s.epoch += 1;
        s.wb_end = now;
        s.give_up_at = now + t_w;
        let epoch = s.epoch;
        // Sensing starts immediately; the beacon just ended, so its airtime
        // no longer occupies the channel.
        self.queue
            .schedule(now, EventKind::CsmaSlot { node, epoch });
        Ok(true)
    }

    /// One contention slot: sense, then transmit with probability p.
    pub(super) fn csma_slot(&mut self, node: usize) -> Result<(), SimError> {
        let phase = self.sender(node).phase;
        if !matches!(phase, TxPhase::Sensing | TxPhase::Contending) {
            return Ok(());
        }
        self.log_line(node, "csma_slot");
        let now = self.now;
        if now >= self.sender(node).give_up_at {
            // The collection window has passed; wait for the next beacon.
            let s = self.sender_mut(node);
            s.phase = TxPhase::Waiting;
            s.in_flight = None;
            s.epoch += 1;
            return Ok(());
        }
        let slot = self.cfg.csma.slot_s;
        if self.channel.busy_at(now) {
            let s = self.sender_mut(node);
            s.phase = TxPhase::Sensing;
            let epoch = s.epoch;
            self.queue
                .schedule(now + slot, EventKind::CsmaSlot { node, epoch });
            return Ok(());
        }
        let p = self.cfg.csma.p;
        let s = self.sender_mut(node);
        s.phase = TxPhase::Contending;
        let coin: f64 = s.mac_rng.gen();
        if coin < p {
            if !self.settle_sender(node, now)? {
                return Ok(());
            }
            let s = self.sender_mut(node);
            s.phase = TxPhase::SendingTxb;
            s.epoch += 1;
            let priority = s
                .in_flight
                .expect("contending sender has a pinned packet")
                .priority;
            self.transmit(
                node,
                Frame::Txb {
                    priority,
                    da: NodeAddr(0),
                },
                None,
            );
        } else {
            let epoch = s.epoch;
            self.queue
                .schedule(now + slot, EventKind::CsmaSlot { node, epoch });
        }
        Ok(())
    }

    /// Sender-side transition when one of its own transmissions ends.
    pub(super) fn sender_tx_done(
        &mut self,
        node: usize,
        tx: &Transmission,
    ) -> Result<(), SimError> {
        if !self.settle_sender(node, self.now)? {
            return Ok(());
        }
        let now = self.now;
        match (&tx.frame, self.sender(node).phase) {
            (Frame::Txb { .. }, TxPhase::SendingTxb) => {
                // The grant may come any time up to the full window plus the
                // grant's own airtime; pad by one contention slot.
                let timeout = self.sender(node).wb_end
                    + self.cfg.timers.t_w_s
                    + 2.0 * self.rxb_air
                    + self.cfg.csma.slot_s;
                let s = self.sender_mut(node);
                s.phase = TxPhase::AwaitingRxb;
                s.epoch += 1;
                let epoch = s.epoch;
                self.queue
                    .schedule(timeout.max(now), EventKind::SenderTimer { node, epoch });
            }
            (Frame::Data { .. }, TxPhase::SendingData) => {
                let timeout = now + 2.0 * self.ack_air + self.cfg.csma.slot_s;
                let s = self.sender_mut(node);
                s.phase = TxPhase::AwaitingAck;
                s.epoch += 1;
                let epoch = s.epoch;
                self.queue
                    .schedule(timeout, EventKind::SenderTimer { node, epoch });
            }
            (frame, phase) => {
                return Err(SimError::Invariant(format!(
                    "sender {node} finished a {} transmission in phase {phase:?}",
                    frame.kind_name()
                )));
            }
        }
        Ok(())
    }

    /// Grant broadcast heard by every sender.
    pub(super) fn deliver_rxb(&mut self, selected: usize) -> Result<(), SimError> {
        for node in 1..=self.senders.len() {
            match self.sender(node).phase {
                TxPhase::AwaitingRxb if node == selected => {
                    if !self.settle_sender(node, self.now)? {
                        continue;
                    }
                    let s = self.sender_mut(node);
                    let packet = s.in_flight.expect("granted sender has a pinned packet");
                    s.phase = TxPhase::SendingData;
                    s.epoch += 1;
                    let meta = self.make_packet_meta(&packet, node);
                    self.transmit(
                        node,
                        Frame::Data {
                            priority: packet.priority,
                            payload: data_payload(packet.id),
                        },
                        Some(meta),
                    );
                }
                // Anyone else who heard the grant lost this round.
                TxPhase::AwaitingRxb | TxPhase::Sensing | TxPhase::Contending => {
                    self.lose_round(node)?;
                }
                _ => {}
            }
        }
        Ok(())
    }

    /// Acknowledgment heard; only the sender awaiting it reacts.
    pub(super) fn deliver_ack(&mut self) -> Result<(), SimError> {
        for node in 1..=self.senders.len() {
            if self.sender(node).phase != TxPhase::AwaitingAck {
                continue;
            }
            let s = self.sender_mut(node);
            let packet = s
                .in_flight
                .take()
                .expect("acked sender has a pinned packet");
            if !s.queue.remove(packet.id) {
                return Err(SimError::Invariant(format!(
                    "acknowledged packet {} missing from sender {node}'s queue",
                    packet.id
                )));
            }
            s.phase = TxPhase::Waiting;
            s.epoch += 1;
            self.log_args(node, format_args!("acked packet={}", packet.id));
        }
        Ok(())
    }

    /// Grant or acknowledgment never arrived.
    pub(super) fn sender_timer(&mut self, node: usize) -> Result<(), SimError> {
        match self.sender(node).phase {
            // Not selected, or the grant was lost: retry at the next beacon.
            TxPhase::AwaitingRxb => self.lose_round(node),
            // No acknowledgment: the packet stays queued for retry.
            TxPhase::AwaitingAck => self.lose_round(node),
            _ => Ok(()),
        }
    }

    /// Round lost. The pinned packet stays queued; with sender duty cycling
    /// the radio sleeps out the remainder of the ongoing exchange.
    fn lose_round(&mut self, node: usize) -> Result<(), SimError> {
        let sleep_until = self.sender(node).wb_end
            + self.cfg.timers.t_w_s
            + self.rxb_air
            + self.data_air
            + self.ack_air;
        let duty_cycling = self.cfg.sim.sender_duty_cycling;
        if duty_cycling && sleep_until > self.now {
            if !self.settle_sender(node, self.now)? {
                return Ok(());
            }
            let s = self.sender_mut(node);
            s.in_flight = None;
            s.phase = TxPhase::SleepingUntil(sleep_until);
            s.epoch += 1;
            let epoch = s.epoch;
            self.queue
                .schedule(sleep_until, EventKind::SenderWake { node, epoch });
        } else {
            let s = self.sender_mut(node);
            s.in_flight = None;
            s.phase = TxPhase::Waiting;
            s.epoch += 1;
        }
        Ok(())
    }

    pub(super) fn sender_wake(&mut self, node: usize) -> Result<(), SimError> {
        if !matches!(self.sender(node).phase, TxPhase::SleepingUntil(_)) {
            return Ok(());
        }
        if !self.settle_sender(node, self.now)? {
            return Ok(());
        }
        let s = self.sender_mut(node);
        s.phase = TxPhase::Waiting;
        s.epoch += 1;
        Ok(())
    }

    /// Beacon delivery fan-out; returns how many senders enter contention.
    pub(super) fn deliver_wb(&mut self, e_s: bool) -> Result<usize, SimError> {
        let mut contenders = 0;
        for node in 1..=self.senders.len() {
            if self.sender_on_wb(node, e_s)? {
                contenders += 1;
            }
        }
        Ok(contenders)
    }
}

//! Receiver side of the beacon handshake.
//!
//! A wake cycle runs beacon rounds back to back for `t_listen`, then
//! recomputes the duty cycle and sleeps the time it implies. Each round:
//! broadcast a wake-up beacon, collect transmission requests for up to `T_w`
//! (shortened by priorities as they arrive), grant the best request, take the
//! data frame, acknowledge it.

use crate::protocol::{Frame, NodeAddr, Priority, TxbWindow, WindowReaction};

use super::channel::Transmission;
use super::engine::{RxPhase, RxTx, Sim, SimError};
use super::event::EventKind;

impl<'a> Sim<'a> {
    /// Begins a round, handling period turnover and sleep first.
    pub(super) fn start_round(&mut self) -> Result<(), SimError> {
        if !self.settle_receiver(self.now)? {
            return Ok(());
        }
        if self.now >= self.receiver.active_until {
            let decision = self.compute_and_record_duty();
            self.receiver.decision = decision;
            if decision.t_sleep_s > 0.0 {
                self.set_rx_phase(RxPhase::Sleeping);
                let wake_at = self.now + decision.t_sleep_s;
                self.receiver.active_until = wake_at + self.cfg.policy.t_listen_s;
                let epoch = self.receiver.epoch;
                self.queue
                    .schedule(wake_at, EventKind::RoundStart { epoch });
                return Ok(());
            }
            self.receiver.active_until = self.now + self.cfg.policy.t_listen_s;
        }
        self.emit_wb();
        Ok(())
    }

    fn set_rx_phase(&mut self, phase: RxPhase) {
        self.receiver.phase = phase;
        self.receiver.epoch += 1;
    }

    fn emit_wb(&mut self) {
        let e_s = self.receiver.ledger.remaining_total_percent() >= self.cfg.policy.e_th_pct;
        self.set_rx_phase(RxPhase::Sending(RxTx::Wb));
        self.transmit(
            0,
            Frame::Wb {
                sa: NodeAddr(0),
                e_s,
            },
            None,
        );
    }

    /// Receiver-side transition when one of its own transmissions ends.
    pub(super) fn receiver_tx_done(&mut self, tx: &Transmission) -> Result<(), SimError> {
        if !self.settle_receiver(self.now)? {
            return Ok(());
        }
        let RxPhase::Sending(what) = self.receiver.phase else {
            return Err(SimError::Invariant(format!(
                "receiver finished a {} transmission while not sending",
                tx.frame.kind_name()
            )));
        };
        match what {
            RxTx::Wb => {
                let deadline = self.now + self.cfg.timers.t_w_s;
                self.set_rx_phase(RxPhase::AwaitingTxb(TxbWindow::new(deadline)));
            }
            RxTx::Rxb { selected } => {
                self.set_rx_phase(RxPhase::AwaitingData { selected });
                let timeout = self.now + 2.0 * self.data_air + self.cfg.csma.slot_s;
                let epoch = self.receiver.epoch;
                self.queue
                    .schedule(timeout, EventKind::ReceiverTimer { epoch });
            }
            RxTx::Ack => {
                self.start_round()?;
            }
        }
        Ok(())
    }

    /// After the beacon's airtime: either wait for requests or, when nobody
    /// can possibly answer, fast-forward to the next consequential round.
    pub(super) fn after_wb(&mut self, contenders: usize) -> Result<(), SimError> {
        let RxPhase::AwaitingTxb(window) = &self.receiver.phase else {
            return Ok(()); // died mid-beacon
        };
        let deadline = window.deadline();
        let epoch = self.receiver.epoch;
        if contenders > 0 || !self.cfg.sim.idle_fast_forward {
            self.queue
                .schedule(deadline, EventKind::ReceiverTimer { epoch });
            return Ok(());
        }

        // Nothing answered this beacon. Find the earliest instant contention
        // could resume: an engaged or queued sender means the very next
        // round; with the energy flag down, only a harvest credit can change
        // anything; otherwise the next packet generation. The flag is
        // re-evaluated rather than taken from the delivered beacon, since a
        // credit may have landed during the beacon's airtime.
        let t0 = self.now;
        let e_s_now = self.receiver.ledger.remaining_total_percent() >= self.cfg.policy.e_th_pct;
        let any_engaged = self.senders.iter().any(|s| s.alive() && s.phase.engaged());
        let any_queued = self
            .senders
            .iter()
            .any(|s| s.alive() && !s.queue.is_empty());
        let stop = if any_engaged || (e_s_now && any_queued) {
            t0
        } else if !e_s_now {
            self.next_credit_at
        } else {
            self.senders
                .iter()
                .filter(|s| s.alive())
                .map(|s| s.next_gen)
                .fold(f64::INFINITY, f64::min)
        };

        // Advance the round grid with the same per-round additions the
        // per-round path performs, so the landing time is bit-identical to
        // simulating each skipped round. The walk is bounded by the rounds
        // remaining in this active period.
        let t_w = self.cfg.timers.t_w_s;
        let a = self.receiver.active_until;
        let mut land = deadline; // next round start
        let mut skipped: u64 = 0;
        while land < a && land + self.wb_air < stop {
            land = land + self.wb_air + t_w;
            skipped += 1;
        }
        if skipped == 0 {
            self.queue
                .schedule(deadline, EventKind::ReceiverTimer { epoch });
            return Ok(());
        }
        self.set_rx_phase(RxPhase::IdleCycling { entry_wb_end: t0 });
        let epoch = self.receiver.epoch;
        self.queue.schedule(land, EventKind::RoundStart { epoch });
        self.log_args(
            0,
            format_args!("idle_skip rounds={skipped} until={land:.9}"),
        );
        Ok(())
    }

    /// Window deadline or data timeout, depending on phase.
    pub(super) fn receiver_timer(&mut self) -> Result<(), SimError> {
        enum Action {
            Grant(usize),
            NextRound,
            Nothing,
        }
        let action = match &self.receiver.phase {
            RxPhase::AwaitingTxb(window) => match window.select() {
                Some(granted) => Action::Grant(granted.sender.0 as usize),
                None => Action::NextRound,
            },
            RxPhase::AwaitingData { .. } => Action::NextRound,
            _ => Action::Nothing,
        };
        match action {
            Action::Grant(selected) => self.emit_rxb(selected),
            Action::NextRound => self.start_round(),
            Action::Nothing => Ok(()),
        }
    }

    /// A transmission request arrived while the window is open.
    pub(super) fn receiver_on_txb(
        &mut self,
        from: usize,
        priority: Priority,
    ) -> Result<(), SimError> {
        let now = self.now;
        let RxPhase::AwaitingTxb(window) = &mut self.receiver.phase else {
            return Ok(()); // outside any collection window
        };
        match window.on_txb(NodeAddr(from as u16), priority, now) {
            WindowReaction::Late | WindowReaction::Recorded => Ok(()),
            WindowReaction::Truncated { new_deadline } => {
                self.receiver.epoch += 1;
                let epoch = self.receiver.epoch;
                self.queue
                    .schedule(new_deadline, EventKind::ReceiverTimer { epoch });
                Ok(())
            }
            WindowReaction::CancelAndGrant { sender } => self.emit_rxb(sender.0 as usize),
        }
    }

    fn emit_rxb(&mut self, selected: usize) -> Result<(), SimError> {
        if !self.settle_receiver(self.now)? {
            return Ok(());
        }
        self.set_rx_phase(RxPhase::Sending(RxTx::Rxb { selected }));
        self.transmit(
            0,
            Frame::Rxb {
                ss: NodeAddr(selected as u16),
            },
            None,
        );
        Ok(())
    }

    /// Data frame arrived; record the delivery and acknowledge.
    pub(super) fn receiver_on_data(&mut self, tx: &Transmission) -> Result<(), SimError> {
        let RxPhase::AwaitingData { selected } = self.receiver.phase else {
            return Ok(()); // stray data frame
        };
        if tx.source != selected {
            return Ok(());
        }
        let meta = tx
            .meta
            .ok_or_else(|| SimError::Invariant("data frame without packet bookkeeping".into()))?;
        if self.receiver.delivered_ids.insert(meta.packet_id) {
            self.metrics.packets_delivered += 1;
            self.metrics
                .record_delay(meta.priority, meta.generated_at, self.now)?;
        } else {
            self.metrics.duplicate_deliveries += 1;
        }
        if !self.settle_receiver(self.now)? {
            return Ok(());
        }
        self.set_rx_phase(RxPhase::Sending(RxTx::Ack));
        self.transmit(0, Frame::Ack, None);
        Ok(())
    }
}

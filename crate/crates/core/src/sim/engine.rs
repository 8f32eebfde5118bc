//! Engine state, the event loop, and energy settlement.

use std::collections::HashSet;
use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::config::{ConfigError, SimConfig};
use crate::energy::{DebitOutcome, EnergyLedger, RadioState};
use crate::policy::{duty_cycle, DutyCycleDecision};
use crate::protocol::frame::{airtime_of_size, ACK_SIZE, DATA_SIZE, RXB_SIZE, WB_SIZE};
use crate::protocol::{Frame, Packet, PacketQueue, TxbWindow};
use crate::trace::SlotEnergy;

use super::channel::Channel;
use super::event::{EventKind, EventQueue};
use super::metrics::{DutyCyclePoint, Metrics, TrajectoryPoint};

#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("simulation invariant violated: {0}")]
    Invariant(String),
    #[error("event log write failed: {0}")]
    Log(#[from] std::io::Error),
}

/// Receiver protocol phase. The radio draw follows from the phase.
#[derive(Debug, Clone)]
pub(super) enum RxPhase {
    /// Transmitting one of its own frames.
    Sending(RxTx),
    /// Collecting transmission requests until the window deadline.
    AwaitingTxb(TxbWindow),
    /// Granted the channel; waiting for the data frame.
    AwaitingData {
        selected: usize,
    },
    /// Fast-forwarding through provably idle beacon rounds. The radio keeps
    /// its beacon/listen alternation on the round grid anchored at the
    /// stored beacon end.
    IdleCycling {
        entry_wb_end: f64,
    },
    Sleeping,
    Dead,
}

#[derive(Debug, Clone, Copy)]
pub(super) enum RxTx {
    Wb,
    Rxb { selected: usize },
    Ack,
}

#[derive(Debug)]
pub(super) struct Receiver {
    pub(super) phase: RxPhase,
    pub(super) epoch: u32,
    pub(super) active_until: f64,
    pub(super) decision: DutyCycleDecision,
    pub(super) ledger: EnergyLedger,
    pub(super) last_settle: f64,
    pub(super) death_time: Option<f64>,
    pub(super) delivered_ids: HashSet<u64>,
}

/// Sender protocol phase.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(super) enum TxPhase {
    /// Listening for a wake-up beacon.
    Waiting,
    /// Heard a beacon; channel currently busy.
    Sensing,
    /// Channel clear; flipping the persistence coin each slot.
    Contending,
    SendingTxb,
    AwaitingRxb,
    SendingData,
    AwaitingAck,
    /// Optional sender duty cycling: radio off until the stored time.
    SleepingUntil(f64),
    Dead,
}

impl TxPhase {
    pub(super) fn engaged(self) -> bool {
        matches!(
            self,
            TxPhase::Sensing
                | TxPhase::Contending
                | TxPhase::SendingTxb
                | TxPhase::AwaitingRxb
                | TxPhase::SendingData
                | TxPhase::AwaitingAck
        )
    }
}

#[derive(Debug)]
pub(super) struct Sender {
    pub(super) phase: TxPhase,
    pub(super) epoch: u32,
    pub(super) queue: PacketQueue,
    pub(super) in_flight: Option<Packet>,
    pub(super) wb_end: f64,
    pub(super) give_up_at: f64,
    pub(super) next_gen: f64,
    pub(super) traffic_rng: ChaCha8Rng,
    pub(super) mac_rng: ChaCha8Rng,
    pub(super) ledger: EnergyLedger,
    pub(super) last_settle: f64,
    pub(super) death_time: Option<f64>,
}

impl Sender {
    pub(super) fn alive(&self) -> bool {
        !matches!(self.phase, TxPhase::Dead)
    }
}

pub(super) struct Sim<'a> {
    pub(super) cfg: &'a SimConfig,
    pub(super) slots: &'a [SlotEnergy],
    pub(super) queue: EventQueue,
    pub(super) channel: Channel,
    pub(super) now: f64,
    pub(super) receiver: Receiver,
    pub(super) senders: Vec<Sender>,
    pub(super) metrics: Metrics,
    pub(super) log: Option<&'a mut dyn Write>,
    pub(super) next_packet_id: u64,
    pub(super) last_credit_at: f64,
    pub(super) next_credit_at: f64,
    // Derived timing constants.
    pub(super) e_max_j: f64,
    pub(super) wb_air: f64,
    pub(super) rxb_air: f64,
    pub(super) ack_air: f64,
    pub(super) data_air: f64,
    pub(super) uses_wind: bool,
    pub(super) gen_period: f64,
}

/// Runs one simulation to the horizon and returns its metrics.
pub fn run(cfg: &SimConfig, slots: &[SlotEnergy], seed: u64) -> Result<Metrics, SimError> {
    run_with_log(cfg, slots, seed, None)
}

/// Like [`run`], optionally writing one line per processed event.
pub fn run_with_log<'a>(
    cfg: &'a SimConfig,
    slots: &'a [SlotEnergy],
    seed: u64,
    log: Option<&'a mut dyn Write>,
) -> Result<Metrics, SimError> {
    cfg.validate()?;
    let needed = (cfg.horizon_s / cfg.harvest.slot_duration_s).ceil() as usize;
    if needed > 0 {
        let contiguous_from_zero = slots
            .iter()
            .enumerate()
            .all(|(i, s)| s.slot_index == i as u64);
        if slots.len() < needed || !contiguous_from_zero {
            return Err(ConfigError::invalid(
                "trace",
                format!(
                    "must cover the horizon with slots 0..{needed}, got {} slot(s)",
                    slots.len()
                ),
            )
            .into());
        }
    }

    let mut sim = Sim::new(cfg, slots, seed, log);
    sim.start();
    while let Some((time, kind)) = sim.queue.pop() {
        if time >= cfg.horizon_s {
            break;
        }
        debug_assert!(time >= sim.now, "time went backwards");
        sim.now = time;
        sim.dispatch(kind)?;
    }
    sim.finalize()?;
    Ok(sim.metrics)
}

impl<'a> Sim<'a> {
    fn new(
        cfg: &'a SimConfig,
        slots: &'a [SlotEnergy],
        seed: u64,
        log: Option<&'a mut dyn Write>,
    ) -> Self {
        let e_max_j = cfg.battery.e_max_j();
        let rate = cfg.radio.data_rate_bps;
        let wb_air = airtime_of_size(WB_SIZE, rate);
        let senders = (1..=cfg.senders as usize)
            .map(|node| {
                let mut traffic_rng = ChaCha8Rng::seed_from_u64(seed);
                traffic_rng.set_stream(node as u64 * 2);
                let mut mac_rng = ChaCha8Rng::seed_from_u64(seed);
                mac_rng.set_stream(node as u64 * 2 + 1);
                Sender {
                    phase: TxPhase::Waiting,
                    epoch: 0,
                    queue: PacketQueue::new(cfg.traffic.queue_capacity),
                    in_flight: None,
                    wb_end: 0.0,
                    give_up_at: 0.0,
                    next_gen: 0.0,
                    traffic_rng,
                    mac_rng,
                    ledger: EnergyLedger::new(e_max_j, cfg.battery.sender_initial_pct),
                    last_settle: 0.0,
                    death_time: None,
                }
            })
            .collect();
        let mut metrics = Metrics::default();
        metrics.policy = cfg.policy.kind.name().to_string();
        metrics.seed = seed;
        metrics.horizon_s = cfg.horizon_s;
        Sim {
            cfg,
            slots,
            queue: EventQueue::new(),
            channel: Channel::new(),
            now: 0.0,
            receiver: Receiver {
                phase: RxPhase::Sleeping,
                epoch: 0,
                active_until: cfg.policy.t_listen_s,
                decision: DutyCycleDecision {
                    d_c: 1.0,
                    t_sleep_s: 0.0,
                },
                ledger: EnergyLedger::new(e_max_j, cfg.battery.initial_pct),
                last_settle: 0.0,
                death_time: None,
                delivered_ids: HashSet::new(),
            },
            senders,
            metrics,
            log,
            next_packet_id: 0,
            last_credit_at: 0.0,
            next_credit_at: cfg.sim.credit_interval_s,
            e_max_j,
            wb_air,
            rxb_air: airtime_of_size(RXB_SIZE, rate),
            ack_air: airtime_of_size(ACK_SIZE, rate),
            data_air: airtime_of_size(DATA_SIZE, rate),
            uses_wind: cfg.policy.kind.uses_wind(),
            gen_period: 1.0 / cfg.traffic.packets_per_s,
        }
    }

    fn start(&mut self) {
        // Receiver wakes at t = 0 with a fresh duty-cycle decision on record.
        self.receiver.decision = self.compute_and_record_duty();
        self.receiver.phase = RxPhase::Sleeping; // replaced by the first round
        self.queue.schedule(
            0.0,
            EventKind::RoundStart {
                epoch: self.receiver.epoch,
            },
        );

        for node in 1..=self.senders.len() {
            let period = self.gen_period;
            let s = self.sender_mut(node);
            use rand::Rng;
            let phase: f64 = s.traffic_rng.gen::<f64>() * period;
            s.next_gen = phase;
            self.metrics.traffic_phases_s.push(phase);
            self.queue.schedule(phase, EventKind::PacketGen { node });
        }

        self.queue
            .schedule(self.next_credit_at, EventKind::HarvestCredit);
        self.queue.schedule(
            self.cfg.sim.trajectory_interval_s,
            EventKind::TrajectorySample,
        );
        if self.cfg.horizon_s > 0.0 {
            self.sample_trajectory();
        }
    }

    fn dispatch(&mut self, kind: EventKind) -> Result<(), SimError> {
        match kind {
            EventKind::RoundStart { epoch } => {
                if epoch == self.receiver.epoch {
                    self.log_line(0, "round_start");
                    self.start_round()?;
                }
            }
            EventKind::ReceiverTimer { epoch } => {
                if epoch == self.receiver.epoch {
                    self.log_line(0, "receiver_timer");
                    self.receiver_timer()?;
                }
            }
            EventKind::TxEnd { tx } => self.on_tx_end(tx)?,
            EventKind::CsmaSlot { node, epoch } => {
                if epoch == self.sender(node).epoch {
                    self.csma_slot(node)?;
                }
            }
            EventKind::SenderTimer { node, epoch } => {
                if epoch == self.sender(node).epoch {
                    self.log_line(node, "sender_timer");
                    self.sender_timer(node)?;
                }
            }
            EventKind::SenderWake { node, epoch } => {
                if epoch == self.sender(node).epoch {
                    self.log_line(node, "sender_wake");
                    self.sender_wake(node)?;
                }
            }
            EventKind::PacketGen { node } => self.packet_gen(node)?,
            EventKind::HarvestCredit => self.harvest_credit()?,
            EventKind::TrajectorySample => {
                self.log_line(0, "trajectory_sample");
                self.settle_all()?;
                self.sample_trajectory();
                self.queue.schedule(
                    self.now + self.cfg.sim.trajectory_interval_s,
                    EventKind::TrajectorySample,
                );
            }
        }
        Ok(())
    }

    // ------------------------------------------------------------------
    // Energy settlement
    // ------------------------------------------------------------------

    fn rx_phase_state(phase: &RxPhase) -> RadioState {
        match phase {
            RxPhase::Sending(_) => RadioState::Transmit,
            RxPhase::AwaitingTxb(_) | RxPhase::AwaitingData { .. } => RadioState::Receive,
            RxPhase::Sleeping => RadioState::Sleep,
            RxPhase::IdleCycling { .. } | RxPhase::Dead => {
                unreachable!("handled by the caller")
            }
        }
    }

    fn tx_phase_state(phase: TxPhase) -> RadioState {
        match phase {
            TxPhase::SendingTxb | TxPhase::SendingData => RadioState::Transmit,
            TxPhase::SleepingUntil(_) => RadioState::Sleep,
            TxPhase::Dead => unreachable!("handled by the caller"),
            _ => RadioState::Receive,
        }
    }

    /// Accrues receiver energy up to `to`. Returns whether it is still alive.
    pub(super) fn settle_receiver(&mut self, to: f64) -> Result<bool, SimError> {
        if matches!(self.receiver.phase, RxPhase::Dead) {
            return Ok(false);
        }
        let from = self.receiver.last_settle;
        if to <= from {
            return Ok(true);
        }
        self.receiver.last_settle = to;
        if let RxPhase::IdleCycling { entry_wb_end } = self.receiver.phase {
            return self.settle_receiver_pattern(entry_wb_end, from, to);
        }
        let state = Self::rx_phase_state(&self.receiver.phase);
        match self
            .receiver
            .ledger
            .account_state_time(&self.cfg.radio, state, to - from)
        {
            DebitOutcome::Alive => Ok(true),
            DebitOutcome::Depleted { survived_s } => {
                self.kill_node(0, from + survived_s);
                Ok(false)
            }
        }
    }

    /// Settlement across fast-forwarded idle rounds. Rebuilds the listen and
    /// beacon segments with the same chain of additions the per-round path
    /// executes, so the ledger receives a bit-identical debit sequence.
    fn settle_receiver_pattern(
        &mut self,
        entry_wb_end: f64,
        from: f64,
        to: f64,
    ) -> Result<bool, SimError> {
        let t_w = self.cfg.timers.t_w_s;
        let mut seg_start = entry_wb_end;
        let mut state = RadioState::Receive; // the collection wait comes first
        let mut seg_len = t_w;
        loop {
            let seg_end = seg_start + seg_len;
            let a = seg_start.max(from);
            let b = seg_end.min(to);
            if b > a {
                match self
                    .receiver
                    .ledger
                    .account_state_time(&self.cfg.radio, state, b - a)
                {
                    DebitOutcome::Alive => {}
                    DebitOutcome::Depleted { survived_s } => {
                        self.kill_node(0, a + survived_s);
                        return Ok(false);
                    }
                }
            }
            if seg_end >= to {
                return Ok(true);
            }
            seg_start = seg_end;
            (state, seg_len) = match state {
                RadioState::Receive => (RadioState::Transmit, self.wb_air),
                _ => (RadioState::Receive, t_w),
            };
        }
    }

    /// Accrues one sender's energy up to `to`. Returns whether it is alive.
    pub(super) fn settle_sender(&mut self, node: usize, to: f64) -> Result<bool, SimError> {
        let profile = &self.cfg.radio;
        let s = &mut self.senders[node - 1];
        if !s.alive() {
            return Ok(false);
        }
        let from = s.last_settle;
        if to <= from {
            return Ok(true);
        }
        s.last_settle = to;
        let state = Self::tx_phase_state(s.phase);
        match s.ledger.account_state_time(profile, state, to - from) {
            DebitOutcome::Alive => Ok(true),
            DebitOutcome::Depleted { survived_s } => {
                self.kill_node(node, from + survived_s);
                Ok(false)
            }
        }
    }

    fn settle_all(&mut self) -> Result<(), SimError> {
        self.settle_receiver(self.now)?;
        for node in 1..=self.senders.len() {
            self.settle_sender(node, self.now)?;
        }
        Ok(())
    }

    pub(super) fn kill_node(&mut self, node: usize, death_time: f64) {
        self.channel.abort_from(node, death_time);
        self.metrics.node_deaths.push((node, death_time));
        if node == 0 {
            self.receiver.phase = RxPhase::Dead;
            self.receiver.epoch += 1;
            self.receiver.death_time = Some(death_time);
        } else {
            let s = &mut self.senders[node - 1];
            s.phase = TxPhase::Dead;
            s.epoch += 1;
            s.death_time = Some(death_time);
        }
        let t = death_time;
        self.log_args(node, format_args!("node_dead at={t:.9}"));
    }

    pub(super) fn node_death(&self, node: usize) -> Option<f64> {
        if node == 0 {
            self.receiver.death_time
        } else {
            self.senders[node - 1].death_time
        }
    }

    // ------------------------------------------------------------------
    // Harvest banking and policy inputs
    // ------------------------------------------------------------------

    pub(super) fn sender(&self, node: usize) -> &Sender {
        &self.senders[node - 1]
    }

    pub(super) fn sender_mut(&mut self, node: usize) -> &mut Sender {
        &mut self.senders[node - 1]
    }

    pub(super) fn current_slot_energy(&self) -> SlotEnergy {
        // Empty only on a zero-length horizon, where nothing harvests.
        let Some(last) = self.slots.len().checked_sub(1) else {
            return SlotEnergy {
                slot_index: 0,
                solar_energy_j: 0.0,
                wind_energy_j: 0.0,
            };
        };
        let idx = ((self.now / self.cfg.harvest.slot_duration_s) as usize).min(last);
        self.slots[idx]
    }

    /// Integrates the per-slot harvest rate over `[from, to)`.
    fn harvest_in_window(&self, from: f64, to: f64) -> (f64, f64) {
        let d_s = self.cfg.harvest.slot_duration_s;
        let mut solar = 0.0;
        let mut wind = 0.0;
        let mut t = from;
        while t < to {
            let idx = ((t / d_s) as usize).min(self.slots.len() - 1);
            let slot_end = ((idx as f64) + 1.0) * d_s;
            let seg_end = slot_end.min(to);
            let frac = (seg_end - t) / d_s;
            solar += self.slots[idx].solar_energy_j * frac;
            wind += self.slots[idx].wind_energy_j * frac;
            t = seg_end;
        }
        (solar, wind)
    }

    fn harvest_credit(&mut self) -> Result<(), SimError> {
        self.log_line(0, "harvest_credit");
        let alive = self.settle_receiver(self.now)?;
        if alive {
            let (solar, wind) = self.harvest_in_window(self.last_credit_at, self.now);
            let wind = if self.uses_wind { wind } else { 0.0 };
            self.receiver.ledger.credit_harvest(solar, wind);
        }
        self.last_credit_at = self.now;
        self.next_credit_at = self.now + self.cfg.sim.credit_interval_s;
        self.queue
            .schedule(self.next_credit_at, EventKind::HarvestCredit);
        Ok(())
    }

    /// Stored-energy percentage the policy sees, optionally counting the
    /// current slot's remaining (not yet banked) harvest as a forecast.
    pub(super) fn re_for_policy(&self) -> f64 {
        let base = self.receiver.ledger.remaining_total_percent();
        if !self.cfg.policy.include_current_slot_harvest {
            return base;
        }
        let d_s = self.cfg.harvest.slot_duration_s;
        let slot = self.current_slot_energy();
        let view = slot.solar_energy_j
            + if self.uses_wind {
                slot.wind_energy_j
            } else {
                0.0
            };
        let slot_end = (slot.slot_index as f64 + 1.0) * d_s;
        let remaining = view * ((slot_end - self.now).max(0.0) / d_s);
        (base + 100.0 * remaining / self.e_max_j).min(100.0)
    }

    pub(super) fn compute_and_record_duty(&mut self) -> DutyCycleDecision {
        let slot = self.current_slot_energy();
        let re = self.re_for_policy();
        let d = duty_cycle(&slot, re, &self.cfg.policy);
        let changed = self
            .metrics
            .duty_cycle_trace
            .last()
            .map_or(true, |p| p.d_c != d.d_c);
        if changed {
            self.metrics.duty_cycle_trace.push(DutyCyclePoint {
                time_s: self.now,
                d_c: d.d_c,
            });
            let (t, dc) = (self.now, d.d_c);
            self.log_args(0, format_args!("duty_cycle d_c={dc} t={t:.9}"));
        }
        d
    }

    fn sample_trajectory(&mut self) {
        let t = self.now;
        self.metrics.energy_trajectory.push(TrajectoryPoint {
            time_s: t,
            node: 0,
            re_pct: self.receiver.ledger.remaining_total_percent(),
        });
        for node in 1..=self.senders.len() {
            self.metrics.energy_trajectory.push(TrajectoryPoint {
                time_s: t,
                node,
                re_pct: self.sender(node).ledger.remaining_total_percent(),
            });
        }
    }

    // ------------------------------------------------------------------
    // Transmission plumbing
    // ------------------------------------------------------------------

    pub(super) fn transmit(
        &mut self,
        source: usize,
        frame: Frame,
        meta: Option<super::channel::PacketMeta>,
    ) {
        let airtime = airtime_of_size(frame.size_bytes(), self.cfg.radio.data_rate_bps);
        let end = self.now + airtime;
        let kind = frame.kind_name();
        let id = self.channel.begin(source, frame, meta, self.now, end);
        self.queue.schedule(end, EventKind::TxEnd { tx: id });
        self.log_args(source, format_args!("tx_begin {kind}"));
    }

    fn on_tx_end(&mut self, tx_id: u64) -> Result<(), SimError> {
        let Some(tx) = self.channel.finish(tx_id, self.now) else {
            return Ok(());
        };
        if tx.overlapped {
            self.metrics.frames_collided += 1;
        }
        let kind = tx.frame.kind_name();
        let (src, collided) = (tx.source, tx.overlapped);
        self.log_args(src, format_args!("tx_end {kind} collided={collided}"));

        if tx.source == 0 {
            self.receiver_tx_done(&tx)?;
        } else {
            self.sender_tx_done(tx.source, &tx)?;
        }

        let deliverable =
            tx.deliverable() && self.node_death(tx.source).map_or(true, |td| td >= tx.end);
        if deliverable && !self.channel.delivery_is_sound(&tx) {
            return Err(SimError::Invariant(format!(
                "frame {} delivered during a channel overlap at t={}",
                tx.frame.kind_name(),
                self.now
            )));
        }

        match (&tx.frame, tx.source) {
            (Frame::Wb { e_s, .. }, 0) => {
                let contenders = if deliverable {
                    self.deliver_wb(*e_s)?
                } else {
                    0
                };
                self.after_wb(contenders)?;
            }
            (Frame::Rxb { ss }, 0) => {
                if deliverable {
                    self.deliver_rxb(ss.0 as usize)?;
                }
            }
            (Frame::Ack, 0) => {
                if deliverable {
                    self.deliver_ack()?;
                }
            }
            (Frame::Txb { priority, .. }, node) if node > 0 => {
                if deliverable {
                    self.receiver_on_txb(node, *priority)?;
                }
            }
            (Frame::Data { .. }, node) if node > 0 => {
                if deliverable {
                    self.receiver_on_data(&tx)?;
                }
            }
            (frame, source) => {
                return Err(SimError::Invariant(format!(
                    "node {source} completed an unexpected {} transmission",
                    frame.kind_name()
                )));
            }
        }
        Ok(())
    }

    pub(super) fn make_packet_meta(
        &self,
        packet: &Packet,
        origin: usize,
    ) -> super::channel::PacketMeta {
        super::channel::PacketMeta {
            packet_id: packet.id,
            priority: packet.priority,
            generated_at: packet.generated_at,
            origin,
        }
    }

    // ------------------------------------------------------------------
    // End of run
    // ------------------------------------------------------------------

    fn finalize(&mut self) -> Result<(), SimError> {
        self.now = self.cfg.horizon_s;
        self.settle_all()?;
        if !matches!(self.receiver.phase, RxPhase::Dead) && self.now > self.last_credit_at {
            let (solar, wind) = self.harvest_in_window(self.last_credit_at, self.now);
            let wind = if self.uses_wind { wind } else { 0.0 };
            self.receiver.ledger.credit_harvest(solar, wind);
        }
        self.sample_trajectory();

        self.metrics
            .final_re_pct
            .push(self.receiver.ledger.remaining_total_percent());
        for node in 1..=self.senders.len() {
            self.metrics
                .final_re_pct
                .push(self.sender(node).ledger.remaining_total_percent());
        }

        self.metrics.hours_at_full_duty = self.hours_at_full_duty();
        self.metrics.eno_hours = self.eno_hours();
        self.audit()
    }

    fn hours_at_full_duty(&self) -> f64 {
        let trace = &self.metrics.duty_cycle_trace;
        let horizon = self.cfg.horizon_s;
        let mut total = 0.0;
        for (i, p) in trace.iter().enumerate() {
            if p.d_c == 1.0 {
                let end = trace.get(i + 1).map_or(horizon, |n| n.time_s);
                total += (end.min(horizon) - p.time_s).max(0.0);
            }
        }
        total / 3600.0
    }

    fn eno_hours(&self) -> f64 {
        let d_s = self.cfg.harvest.slot_duration_s;
        let horizon = self.cfg.horizon_s;
        let mut total = 0.0;
        for slot in self.slots {
            let view = slot.solar_energy_j
                + if self.uses_wind {
                    slot.wind_energy_j
                } else {
                    0.0
                };
            if view >= self.cfg.policy.e_c_j {
                let start = slot.slot_index as f64 * d_s;
                let overlap = (horizon.min(start + d_s) - start).max(0.0);
                total += overlap;
            }
        }
        total / 3600.0
    }

    fn audit(&mut self) -> Result<(), SimError> {
        if self.metrics.packets_delivered > self.metrics.packets_generated {
            return Err(SimError::Invariant("delivered exceeds generated".into()));
        }
        if self.metrics.delay_count() as u64 != self.metrics.packets_delivered {
            return Err(SimError::Invariant(
                "delay samples out of step with deliveries".into(),
            ));
        }
        let mut worst_conservation: f64 = 0.0;
        let mut worst_identity: f64 = 0.0;
        let ledgers =
            std::iter::once(&self.receiver.ledger).chain(self.senders.iter().map(|s| &s.ledger));
        for (node, ledger) in ledgers.enumerate() {
            let conservation = ledger.conservation_residual_rel();
            let identity = ledger.state_time_residual_rel(&self.cfg.radio);
            if conservation > 1e-9 {
                return Err(SimError::Invariant(format!(
                    "node {node} energy conservation residual {conservation:e} exceeds 1e-9"
                )));
            }
            if identity > 1e-9 {
                return Err(SimError::Invariant(format!(
                    "node {node} state-time identity residual {identity:e} exceeds 1e-9"
                )));
            }
            worst_conservation = worst_conservation.max(conservation);
            worst_identity = worst_identity.max(identity);
        }
        self.metrics.audit.conservation_residual_rel = worst_conservation;
        self.metrics.audit.state_identity_residual_rel = worst_identity;
        Ok(())
    }

    // ------------------------------------------------------------------
    // Event log
    // ------------------------------------------------------------------

    pub(super) fn log_line(&mut self, node: usize, kind: &str) {
        if let Some(w) = self.log.as_deref_mut() {
            let t = self.now;
            let _ = writeln!(w, "{t:.9} {node} {kind}");
        }
    }

    pub(super) fn log_args(&mut self, node: usize, args: std::fmt::Arguments<'_>) {
        if let Some(w) = self.log.as_deref_mut() {
            let t = self.now;
            let _ = writeln!(w, "{t:.9} {node} {args}");
        }
    }
}

//! Deterministic discrete-event simulation of one scenario.
//!
//! One run owns every node. Events execute in `(time, insertion)` order.
//! Each node has a single outbound radio serving a drop-tail FIFO; reception
//! never blocks. Links never collide. Beacons and void announcements are
//! broadcast instantly to live radio neighbors and bypass the data queue.
//! The run stops once every image has been emitted and every packet is
//! delivered or lost, or at the horizon.

pub mod config;
pub mod event;
pub mod link;

use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::energy::{rx_energy, tx_energy, Battery};
use crate::metrics::{
    dead_node_count, delay_and_loss, energy_stats, regional_energy, EnergyLedger, MetricsReport, NodeFinal,
    PacketOutcome, PacketRecord,
};
use crate::packet::{DataPacket, LossReason};
use crate::routing::neighbor::{Beacon, NeighborTable};
use crate::routing::{Action, Protocol, Router};
use crate::topology::{generate_topology, NodeId, Topology, TopologyError};

use self::config::{ConfigError, ScenarioConfig};
use self::event::{EventKind, EventQueue};

#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Topology(#[from] TopologyError),
}

/// Knobs that do not change simulated behavior.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimOptions {
    /// Keep per-packet records and paths in the report.
    pub keep_packet_log: bool,
}

impl Default for SimOptions {
    fn default() -> Self {
        Self { keep_packet_log: true }
    }
}

#[derive(Debug)]
struct NodeRuntime {
    position: crate::topology::Position,
    battery: Battery,
    /// Sink and source: charged to the ledger but never depleted.
    exempt: bool,
    alive: bool,
    queue: VecDeque<DataPacket>,
    transmitting: bool,
    router: Router,
}

/// A single simulation instance.
pub struct Simulation<'a> {
    cfg: &'a ScenarioConfig,
    protocol: Protocol,
    topo: &'a Topology,
    options: SimOptions,
    adjacency: Vec<Vec<NodeId>>,
    nodes: Vec<NodeRuntime>,
    events: EventQueue,
    ledger: EnergyLedger,
    log: Vec<PacketRecord>,
    images_emitted: u32,
    outstanding: u64,
    ttl: u32,
}

impl<'a> Simulation<'a> {
    pub fn new(cfg: &'a ScenarioConfig, protocol: Protocol, topo: &'a Topology, options: SimOptions) -> Result<Self, SimError> {
        cfg.validate()?;
        if topo.field().min_separation < link::MIN_LINK_LENGTH {
            return Err(ConfigError::Invalid {
                key: "min_separation_m",
                message: "topology allows links shorter than 1 m".into(),
            }
            .into());
        }
        let energy = cfg.energy();
        let sink = topo.sink();
        let sink_pos = topo.field().sink_position;
        let expiry = cfg.neighbor_timeout_intervals * cfg.beacon_interval_s;
        let nodes = topo
            .nodes()
            .map(|(id, position)| {
                let table = NeighborTable::new(id, position, sink_pos, expiry, cfg.link());
                NodeRuntime {
                    position,
                    battery: Battery::new(cfg.initial_energy_j),
                    exempt: !topo.is_sensor(id),
                    alive: true,
                    queue: VecDeque::new(),
                    transmitting: false,
                    router: Router::new(protocol, table, sink, cfg.packet_bits(), energy),
                }
            })
            .collect();
        Ok(Self {
            cfg,
            protocol,
            topo,
            options,
            adjacency: topo.adjacency(),
            nodes,
            events: EventQueue::new(),
            ledger: EnergyLedger::default(),
            log: Vec::new(),
            images_emitted: 0,
            outstanding: 0,
            ttl: cfg.ttl_for(topo.len()),
        })
    }

    fn now(&self) -> f64 {
        self.events.now()
    }

    fn traffic_done(&self) -> bool {
        self.images_emitted >= self.cfg.images && self.outstanding == 0
    }

    pub fn run(mut self) -> MetricsReport {
        let mut phases = ChaCha8Rng::seed_from_u64(self.topo.seed() ^ 0x9E37_79B9_7F4A_7C15);
        for i in 0..self.nodes.len() {
            let phase = phases.random_range(0.0..self.cfg.beacon_interval_s);
            self.events.schedule(phase, EventKind::BeaconTick { node: NodeId(i as u32) });
        }
        if self.cfg.images > 0 {
            self.events
                .schedule(self.cfg.traffic_start_s, EventKind::ImageEmission { index: 0 });
        }

        while !self.traffic_done() {
            match self.events.peek_time() {
                Some(t) if t <= self.cfg.horizon_s => {}
                _ => break,
            }
            let ev = self.events.pop().expect("peeked");
            match ev.kind {
                EventKind::ImageEmission { index } => self.on_image(index),
                EventKind::BeaconTick { node } => self.on_beacon_tick(node),
                EventKind::TransmissionComplete { sender, receiver, packet } => {
                    self.on_transmission_complete(sender, receiver, *packet)
                }
                EventKind::PacketArrival { node, from, packet } => self.on_arrival(node, from, *packet),
            }
        }
        self.expire_outstanding();
        self.into_report()
    }

    fn on_image(&mut self, index: u32) {
        let now = self.now();
        let source = self.topo.source();
        let per_image = self.cfg.packets_per_image();
        let payload = self.cfg.packet_payload_bits;
        for k in 0..per_image {
            let id = self.log.len() as u64;
            let bits = if k + 1 == per_image {
                self.cfg.image_bits - payload * (per_image - 1)
            } else {
                payload
            };
            let pk = DataPacket::new(id, source, id, bits, now, self.ttl);
            self.log.push(PacketRecord {
                packet_id: id,
                seq: id,
                outcome: PacketOutcome::Pending,
                delay: None,
                hops: 0,
                path: if self.options.keep_packet_log { vec![source] } else { Vec::new() },
            });
            self.outstanding += 1;
            self.enqueue(source, pk);
            self.try_start(source);
        }
        self.images_emitted = index + 1;
        if self.images_emitted < self.cfg.images {
            self.events.schedule(
                now + self.cfg.image_interval_s,
                EventKind::ImageEmission { index: index + 1 },
            );
        }
    }

    fn enqueue(&mut self, node: NodeId, pk: DataPacket) {
        let n = &mut self.nodes[node.index()];
        if n.queue.len() >= self.cfg.queue_capacity {
            self.lose(&pk, LossReason::BufferOverflow);
        } else {
            n.queue.push_back(pk);
        }
    }

    /// Starts the next transmission if the radio is idle.
    fn try_start(&mut self, node: NodeId) {
        let now = self.now();
        loop {
            let n = &mut self.nodes[node.index()];
            if !n.alive || n.transmitting {
                return;
            }
            let Some(mut pk) = n.queue.pop_front() else { return };
            let decision = n.router.route(&mut pk, now);
            if decision.announce_void {
                self.announce_void(node);
                if !self.nodes[node.index()].alive {
                    self.lose(&pk, LossReason::SenderDied);
                    return;
                }
            }
            let next = match decision.action {
                Action::Forward(next) => next,
                Action::Drop(reason) => {
                    self.lose(&pk, reason);
                    continue;
                }
            };
            let air_bits = pk.payload_bits + self.cfg.header_bits;
            let d = self.nodes[node.index()].position.distance_to(self.nodes[next.index()].position);
            let cost = tx_energy(air_bits, d, &self.cfg.energy());
            let n = &mut self.nodes[node.index()];
            if !n.exempt && !n.battery.can_afford(cost) {
                self.ledger.forfeited += n.battery.drain();
                self.lose(&pk, LossReason::SenderDied);
                self.kill(node);
                return;
            }
            let rate = self.cfg.link().rate(d).unwrap_or(self.cfg.link_base_rate_bps);
            n.transmitting = true;
            self.events.schedule(
                now + link::serialization_delay(air_bits, rate),
                EventKind::TransmissionComplete {
                    sender: node,
                    receiver: next,
                    packet: Box::new(pk),
                },
            );
            return;
        }
    }

    fn on_transmission_complete(&mut self, sender: NodeId, receiver: NodeId, pk: DataPacket) {
        let now = self.now();
        self.nodes[sender.index()].transmitting = false;
        if !self.nodes[sender.index()].alive {
            self.lose(&pk, LossReason::SenderDied);
            return;
        }
        let air_bits = pk.payload_bits + self.cfg.header_bits;
        let energy = self.cfg.energy();
        let d = self.nodes[sender.index()].position.distance_to(self.nodes[receiver.index()].position);
        self.charge_tx(sender, tx_energy(air_bits, d, &energy));

        if self.nodes[receiver.index()].alive && self.charge_rx(receiver, rx_energy(air_bits, &energy)) {
            self.events.schedule(
                now,
                EventKind::PacketArrival {
                    node: receiver,
                    from: sender,
                    packet: Box::new(pk),
                },
            );
        } else {
            self.lose(&pk, LossReason::NextHopDied);
        }
        self.try_start(sender);
    }

    fn on_arrival(&mut self, node: NodeId, from: NodeId, mut pk: DataPacket) {
        pk.record_hop(from);
        if self.options.keep_packet_log {
            self.log[pk.id as usize].path.push(node);
        }
        if !self.nodes[node.index()].alive {
            self.lose(&pk, LossReason::NextHopDied);
            return;
        }
        if node == self.topo.sink() {
            self.deliver(&pk);
            return;
        }
        self.enqueue(node, pk);
        self.try_start(node);
    }

    fn on_beacon_tick(&mut self, node: NodeId) {
        if !self.nodes[node.index()].alive {
            return;
        }
        let now = self.now();
        if !self.broadcast(node, self.cfg.beacon_bits) {
            return;
        }
        let n = &self.nodes[node.index()];
        let beacon = Beacon {
            sender: node,
            position: n.position,
            residual_energy: n.battery.residual(),
            has_sinkward_neighbor: n.router.has_sinkward_neighbor(now),
            sent_at: now,
        };
        for i in 0..self.adjacency[node.index()].len() {
            let nb = self.adjacency[node.index()][i];
            if self.receive_control(nb, self.cfg.beacon_bits) {
                self.nodes[nb.index()].router.handle_beacon(&beacon, now);
            }
        }
        self.events
            .schedule(now + self.cfg.beacon_interval_s, EventKind::BeaconTick { node });
    }

    fn announce_void(&mut self, node: NodeId) {
        let now = self.now();
        let bits = self.cfg.void_announcement_bits;
        if !self.broadcast(node, bits) {
            return;
        }
        for i in 0..self.adjacency[node.index()].len() {
            let nb = self.adjacency[node.index()][i];
            if self.receive_control(nb, bits) {
                self.nodes[nb.index()].router.handle_void_announcement(node, now);
            }
        }
    }

    /// Pays for a full-range control broadcast. False if the sender could
    /// not afford it and died.
    fn broadcast(&mut self, node: NodeId, bits: u64) -> bool {
        if !self.cfg.beacon_energy.is_on() {
            return true;
        }
        let cost = tx_energy(bits, self.cfg.radio_range_m, &self.cfg.energy());
        let n = &mut self.nodes[node.index()];
        if !n.exempt && !n.battery.can_afford(cost) {
            self.ledger.forfeited += n.battery.drain();
            self.kill(node);
            return false;
        }
        self.charge_tx(node, cost)
    }

    /// A live neighbor hears a control message. False if it is dead or the
    /// reception killed it.
    fn receive_control(&mut self, node: NodeId, bits: u64) -> bool {
        if !self.nodes[node.index()].alive {
            return false;
        }
        if !self.cfg.beacon_energy.is_on() {
            return true;
        }
        self.charge_rx(node, rx_energy(bits, &self.cfg.energy()))
    }

    fn charge_tx(&mut self, node: NodeId, amount: f64) -> bool {
        self.charge(node, amount, true)
    }

    fn charge_rx(&mut self, node: NodeId, amount: f64) -> bool {
        self.charge(node, amount, false)
    }

    /// Debits a node and records the draw. Returns whether it is still alive.
    fn charge(&mut self, node: NodeId, amount: f64, transmit: bool) -> bool {
        let n = &mut self.nodes[node.index()];
        if n.exempt {
            self.ledger.exempt += amount;
            return true;
        }
        let debit = n.battery.debit(amount);
        if transmit {
            self.ledger.tx += debit.drawn;
        } else {
            self.ledger.rx += debit.drawn;
        }
        if debit.died {
            self.kill(node);
            return false;
        }
        true
    }

    fn kill(&mut self, node: NodeId) {
        let n = &mut self.nodes[node.index()];
        if !n.alive {
            return;
        }
        n.alive = false;
        let stranded: Vec<DataPacket> = n.queue.drain(..).collect();
        for pk in &stranded {
            self.lose(pk, LossReason::SenderDied);
        }
    }

    fn deliver(&mut self, pk: &DataPacket) {
        let rec = &mut self.log[pk.id as usize];
        debug_assert_eq!(rec.outcome, PacketOutcome::Pending);
        rec.outcome = PacketOutcome::Delivered;
        rec.delay = Some(self.events.now() - pk.created_at);
        rec.hops = pk.hop_count;
        self.outstanding -= 1;
    }

    fn lose(&mut self, pk: &DataPacket, reason: LossReason) {
        let rec = &mut self.log[pk.id as usize];
        debug_assert_eq!(rec.outcome, PacketOutcome::Pending);
        rec.outcome = PacketOutcome::Lost(reason);
        rec.hops = pk.hop_count;
        self.outstanding -= 1;
    }

    /// Packets still queued or in flight when the run stops.
    fn expire_outstanding(&mut self) {
        if self.outstanding == 0 {
            return;
        }
        let mut stuck: Vec<DataPacket> = self
            .nodes
            .iter_mut()
            .flat_map(|n| n.queue.drain(..))
            .collect();
        for ev in self.events.drain_ordered() {
            match ev.kind {
                EventKind::TransmissionComplete { packet, .. } | EventKind::PacketArrival { packet, .. } => {
                    stuck.push(*packet)
                }
                _ => {}
            }
        }
        for pk in &stuck {
            self.lose(pk, LossReason::HorizonExpired);
        }
    }

    fn into_report(self) -> MetricsReport {
        let nodes: Vec<NodeFinal> = self
            .topo
            .nodes()
            .zip(&self.nodes)
            .map(|((id, position), n)| NodeFinal {
                id,
                position,
                initial: n.battery.initial(),
                residual: n.battery.residual(),
                sensor: !n.exempt,
                alive: n.alive,
            })
            .collect();
        let energy = energy_stats(&nodes);
        let dl = delay_and_loss(&self.log);
        MetricsReport {
            protocol: self.protocol,
            seed: self.topo.seed(),
            n_sensors: self.topo.sensor_count(),
            dead_nodes: dead_node_count(&nodes),
            mean_energy: energy.map(|e| e.0),
            energy_variance: energy.map(|e| e.1),
            regional_mean_energy: regional_energy(&nodes, self.topo.field()),
            delay_mean: dl.delay_mean,
            delay_variance: dl.delay_variance,
            emitted: self.log.len() as u64,
            delivered: dl.delivered,
            lost: dl.lost,
            per_packet_log: if self.options.keep_packet_log { self.log } else { Vec::new() },
            nodes,
            ledger: self.ledger,
            end_time: self.events.now(),
        }
    }
}

/// Runs `protocol` on an explicit topology.
pub fn run_on_topology(cfg: &ScenarioConfig, protocol: Protocol, topo: &Topology, options: SimOptions) -> Result<MetricsReport, SimError> {
    Ok(Simulation::new(cfg, protocol, topo, options)?.run())
}

/// Generates the topology for `(seed, n_sensors)` and runs `protocol` on it.
pub fn run(cfg: &ScenarioConfig, protocol: Protocol, n_sensors: usize, seed: u64) -> Result<MetricsReport, SimError> {
    cfg.validate()?;
    let topo = generate_topology(seed, n_sensors, &cfg.field())?;
    run_on_topology(cfg, protocol, &topo, SimOptions::default())
}

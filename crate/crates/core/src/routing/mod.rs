//! Next-hop selection for both protocols.

pub mod geams;
pub mod gpsr;
pub mod neighbor;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::energy::EnergyModelParams;
use crate::packet::{DataPacket, LossReason};
use crate::sim::link::LinkModel;
use crate::topology::{NodeId, Topology};

use self::geams::GeamsRouter;
use self::gpsr::GpsrRouter;
use self::neighbor::{Beacon, NeighborTable};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RoutingError {
    #[error("best-neighbor set is empty")]
    EmptyNeighborSet,
    #[error("unknown protocol `{0}`; expected `geams` or `gpsr`")]
    UnknownProtocol(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Protocol {
    Geams,
    Gpsr,
}

impl Protocol {
    pub fn as_str(self) -> &'static str {
        match self {
            Protocol::Geams => "geams",
            Protocol::Gpsr => "gpsr",
        }
    }
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Protocol {
    type Err = RoutingError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "geams" => Ok(Protocol::Geams),
            "gpsr" => Ok(Protocol::Gpsr),
            _ => Err(RoutingError::UnknownProtocol(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Action {
    Forward(NodeId),
    Drop(LossReason),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RouteDecision {
    pub action: Action,
    /// The node just found itself in a void and must tell its neighbors.
    pub announce_void: bool,
}

impl RouteDecision {
    pub fn forward(next: NodeId) -> Self {
        Self {
            action: Action::Forward(next),
            announce_void: false,
        }
    }

    pub fn drop(reason: LossReason) -> Self {
        Self {
            action: Action::Drop(reason),
            announce_void: false,
        }
    }
}

/// Per-node routing state for either protocol.
#[derive(Debug, Clone)]
pub enum Router {
    Geams(GeamsRouter),
    Gpsr(GpsrRouter),
}

impl Router {
    pub fn new(protocol: Protocol, table: NeighborTable, sink: NodeId, packet_bits: u64, energy: EnergyModelParams) -> Self {
        match protocol {
            Protocol::Geams => Router::Geams(GeamsRouter::new(table, sink, packet_bits, energy)),
            Protocol::Gpsr => Router::Gpsr(GpsrRouter::new(table, sink)),
        }
    }

    pub fn table(&self) -> &NeighborTable {
        match self {
            Router::Geams(r) => r.table(),
            Router::Gpsr(r) => r.table(),
        }
    }

    pub fn handle_beacon(&mut self, beacon: &Beacon, now: f64) {
        match self {
            Router::Geams(r) => r.handle_beacon(beacon, now),
            Router::Gpsr(r) => r.handle_beacon(beacon),
        }
    }

    /// Only GEAMS reacts to void announcements.
    pub fn handle_void_announcement(&mut self, from: NodeId, now: f64) {
        if let Router::Geams(r) = self {
            r.handle_void_announcement(from, now);
        }
    }

    pub fn has_sinkward_neighbor(&self, now: f64) -> bool {
        match self {
            Router::Geams(r) => r.has_sinkward_neighbor(now),
            Router::Gpsr(r) => r.has_sinkward_neighbor(now),
        }
    }

    /// Chooses what to do with `pk` at this node. Packets with no hops left
    /// are dropped before either protocol sees them.
    pub fn route(&mut self, pk: &mut DataPacket, now: f64) -> RouteDecision {
        if pk.ttl == 0 {
            return RouteDecision::drop(LossReason::TtlExpired);
        }
        match self {
            Router::Geams(r) => r.route(pk, now),
            Router::Gpsr(r) => r.route(pk, now),
        }
    }
}

/// Outcome of tracing a packet through a frozen network.
#[derive(Debug, Clone, PartialEq)]
pub struct TracedRoute {
    /// Visited nodes, starting at the source.
    pub path: Vec<NodeId>,
    /// `None` when the packet reached the sink.
    pub loss: Option<LossReason>,
}

impl TracedRoute {
    pub fn delivered(&self) -> bool {
        self.loss.is_none()
    }

    pub fn hops(&self) -> usize {
        self.path.len().saturating_sub(1)
    }
}

/// Routers on a static topology where every node has heard one beacon from
/// each radio neighbor at full energy. Packets are walked hop by hop with no
/// timing or energy; per-node protocol state persists across packets.
#[derive(Debug, Clone)]
pub struct StaticNetwork {
    routers: Vec<Router>,
    sink: NodeId,
    source: NodeId,
    ttl: u32,
    payload_bits: u64,
    next_packet: u64,
}

impl StaticNetwork {
    pub fn new(t: &Topology, protocol: Protocol, energy: EnergyModelParams, packet_bits: u64, initial_energy: f64) -> Self {
        let adjacency = t.adjacency();
        let sink = t.sink();
        let sink_pos = t.field().sink_position;
        let mut routers: Vec<Router> = t
            .nodes()
            .map(|(id, pos)| {
                let table = NeighborTable::new(id, pos, sink_pos, f64::INFINITY, LinkModel::default());
                Router::new(protocol, table, sink, packet_bits, energy)
            })
            .collect();
        for (id, neighbors) in adjacency.iter().enumerate() {
            for &nb in neighbors {
                let beacon = Beacon {
                    sender: nb,
                    position: t.positions()[nb.index()],
                    residual_energy: initial_energy,
                    has_sinkward_neighbor: true,
                    sent_at: 0.0,
                };
                routers[id].handle_beacon(&beacon, 0.0);
            }
        }
        Self {
            routers,
            sink,
            source: t.source(),
            ttl: 2 * t.len() as u32,
            payload_bits: packet_bits,
            next_packet: 0,
        }
    }

    pub fn router(&self, id: NodeId) -> &Router {
        &self.routers[id.index()]
    }

    /// Sends one packet from the source towards the sink.
    pub fn trace(&mut self) -> TracedRoute {
        let mut pk = DataPacket::new(self.next_packet, self.source, self.next_packet, self.payload_bits, 0.0, self.ttl);
        self.next_packet += 1;
        let mut at = self.source;
        let mut path = vec![at];
        loop {
            if at == self.sink {
                return TracedRoute { path, loss: None };
            }
            let decision = self.routers[at.index()].route(&mut pk, 0.0);
            if decision.announce_void {
                let neighbors: Vec<NodeId> = self.routers[at.index()].table().live(0.0).map(|r| r.id).collect();
                for nb in neighbors {
                    self.routers[nb.index()].handle_void_announcement(at, 0.0);
                }
            }
            match decision.action {
                Action::Forward(next) => {
                    pk.record_hop(at);
                    at = next;
                    path.push(at);
                }
                Action::Drop(reason) => return TracedRoute { path, loss: Some(reason) },
            }
        }
    }
}

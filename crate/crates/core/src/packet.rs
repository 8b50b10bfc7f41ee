//! Data packets and their routing headers.

use serde::{Deserialize, Serialize};

use crate::routing::gpsr::GpsrPacketState;
use crate::topology::NodeId;

#[derive(Debug, Clone, PartialEq)]
pub struct DataPacket {
    /// Unique per run, assigned in emission order.
    pub id: u64,
    pub source: NodeId,
    pub stream_id: u32,
    pub seq: u64,
    pub hop_count: u32,
    pub payload_bits: u64,
    pub created_at: f64,
    /// Remaining hops before the packet is discarded.
    pub ttl: u32,
    /// Nodes that stepped this packet back out of a void.
    pub excluded: Vec<NodeId>,
    pub prev_hop: Option<NodeId>,
    pub gpsr: GpsrPacketState,
}

impl DataPacket {
    pub fn new(id: u64, source: NodeId, seq: u64, payload_bits: u64, created_at: f64, ttl: u32) -> Self {
        Self {
            id,
            source,
            stream_id: 0,
            seq,
            hop_count: 0,
            payload_bits,
            created_at,
            ttl,
            excluded: Vec::new(),
            prev_hop: None,
            gpsr: GpsrPacketState::Greedy,
        }
    }

    /// Bookkeeping on arrival at the next hop.
    pub fn record_hop(&mut self, from: NodeId) {
        self.hop_count += 1;
        self.ttl = self.ttl.saturating_sub(1);
        self.prev_hop = Some(from);
    }
}

/// Why a packet never reached the sink.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossReason {
    BufferOverflow,
    TtlExpired,
    NextHopDied,
    VoidUnresolvable,
    PerimeterExhausted,
    SenderDied,
    HorizonExpired,
}

impl LossReason {
    pub const ALL: [LossReason; 7] = [
        LossReason::BufferOverflow,
        LossReason::TtlExpired,
        LossReason::NextHopDied,
        LossReason::VoidUnresolvable,
        LossReason::PerimeterExhausted,
        LossReason::SenderDied,
        LossReason::HorizonExpired,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            LossReason::BufferOverflow => "buffer_overflow",
            LossReason::TtlExpired => "ttl_expired",
            LossReason::NextHopDied => "next_hop_died",
            LossReason::VoidUnresolvable => "void_unresolvable",
            LossReason::PerimeterExhausted => "perimeter_exhausted",
            LossReason::SenderDied => "sender_died",
            LossReason::HorizonExpired => "horizon_expired",
        }
    }
}

impl std::fmt::Display for LossReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

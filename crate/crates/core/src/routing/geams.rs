//! Geographic energy-aware multipath forwarding.
//!
//! Each forwarder ranks its sink-ward neighbors by an energy score and keeps,
//! per traffic source, an empirical hop count `H` and the index `j` of the
//! neighbor whose score is closest to the set average. A packet that arrives
//! with more hops than expected is pushed towards the best neighbor, one with
//! fewer hops towards the worst, spreading a stream over several paths.
//! Nodes with no sink-ward neighbor announce themselves void and hand the
//! packet back to their neighbor nearest the sink.

use std::collections::BTreeMap;

use crate::energy::{rx_energy, tx_energy, EnergyModelParams};
use crate::packet::{DataPacket, LossReason};
use crate::routing::neighbor::{Beacon, NeighborRecord, NeighborTable};
use crate::routing::{Action, RouteDecision, RoutingError};
use crate::topology::NodeId;

/// Energy-aware desirability of a neighbor as next hop:
/// residual energy minus the cost of sending it and of it receiving a packet.
pub fn score(n: &NeighborRecord, bits: u64, p: &EnergyModelParams) -> f64 {
    n.residual_energy - tx_energy(bits, n.distance_to_me, p) - rx_energy(bits, p)
}

/// Sink-ward neighbors in descending score order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct BestNeighborSet {
    entries: Vec<(NodeId, f64)>,
}

impl BestNeighborSet {
    /// Sorts by descending score, ties by ascending id.
    pub fn from_scores(mut entries: Vec<(NodeId, f64)>) -> Self {
        entries.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        Self { entries }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// 1-based access, matching the ranking `BN_1 .. BN_m`.
    pub fn rank(&self, index: usize) -> Option<NodeId> {
        index.checked_sub(1).and_then(|i| self.entries.get(i)).map(|e| e.0)
    }

    pub fn ids(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.entries.iter().map(|e| e.0)
    }

    pub fn scores(&self) -> impl Iterator<Item = f64> + '_ {
        self.entries.iter().map(|e| e.1)
    }

    pub fn entries(&self) -> &[(NodeId, f64)] {
        &self.entries
    }
}

/// Live, non-void neighbors strictly closer to the sink than the owner,
/// ranked by [`score`].
pub fn build_best_neighbor_set(
    t: &NeighborTable,
    now: f64,
    bits: u64,
    p: &EnergyModelParams,
) -> BestNeighborSet {
    let mine = t.my_distance_to_sink();
    BestNeighborSet::from_scores(
        t.live(now)
            .filter(|r| !r.void_flagged && r.distance_to_sink < mine)
            .map(|r| (r.id, score(r, bits, p)))
            .collect(),
    )
}

/// 1-based index of the entry whose score is nearest the mean score.
/// Ties go to the smaller index.
pub fn average_score_index(s: &BestNeighborSet) -> Result<usize, RoutingError> {
    if s.is_empty() {
        return Err(RoutingError::EmptyNeighborSet);
    }
    let mean = s.scores().sum::<f64>() / s.len() as f64;
    let mut best = 1;
    let mut best_gap = f64::INFINITY;
    for (i, score) in s.scores().enumerate() {
        let gap = (score - mean).abs();
        if gap < best_gap {
            best_gap = gap;
            best = i + 1;
        }
    }
    Ok(best)
}

/// Per-source forwarding history `(H, j)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SourceState {
    /// Empirical hop count from the source to this node (`H`).
    pub expected_hops: u32,
    /// 1-based index of the average-score neighbor (`j`).
    pub pivot: usize,
}

/// Smart greedy choice of the next hop.
///
/// A fresh source always goes to the best neighbor. Otherwise the pivot is
/// shifted by the hop-count deviation and clamped into `[1, m]`; clamping
/// moves the expected hop count so later packets are measured against it.
pub fn select_next_hop(
    state: Option<SourceState>,
    s: &BestNeighborSet,
    packet_hops: u32,
) -> Result<(NodeId, SourceState), RoutingError> {
    let m = s.len();
    if m == 0 {
        return Err(RoutingError::EmptyNeighborSet);
    }
    let Some(state) = state else {
        let next = s.rank(1).ok_or(RoutingError::EmptyNeighborSet)?;
        return Ok((
            next,
            SourceState {
                expected_hops: packet_hops,
                pivot: average_score_index(s)?,
            },
        ));
    };

    let pivot = state.pivot.clamp(1, m);
    let m = m as i64;
    let mut hops = i64::from(state.expected_hops);
    let mut index = pivot as i64 + (hops - i64::from(packet_hops));
    if index <= 0 {
        hops = hops - index + 1;
        index = 1;
    } else if index > m {
        hops = hops - index + m;
        index = m;
    }
    let next = s.rank(index as usize).ok_or(RoutingError::EmptyNeighborSet)?;
    Ok((
        next,
        SourceState {
            expected_hops: hops.max(0) as u32,
            pivot,
        },
    ))
}

/// No usable neighbor is closer to the sink than the owner.
pub fn detect_void(t: &NeighborTable, now: f64) -> bool {
    let mine = t.my_distance_to_sink();
    !t.live(now)
        .any(|r| !r.void_flagged && r.distance_to_sink < mine)
}

/// Outcome of a walking-back step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WalkBack {
    Delegate(NodeId),
    Drop,
}

/// Steps a packet out of a void: the owner joins the packet's exclusion list
/// and hands it to the live, non-void, non-excluded neighbor nearest the sink.
pub fn walking_back(t: &NeighborTable, pk: &mut DataPacket, now: f64) -> WalkBack {
    if !pk.excluded.contains(&t.owner()) {
        pk.excluded.push(t.owner());
    }
    if pk.ttl == 0 {
        return WalkBack::Drop;
    }
    t.live(now)
        .filter(|r| !r.void_flagged && !pk.excluded.contains(&r.id))
        .min_by(|a, b| {
            a.distance_to_sink
                .total_cmp(&b.distance_to_sink)
                .then(a.id.cmp(&b.id))
        })
        .map_or(WalkBack::Drop, |r| WalkBack::Delegate(r.id))
}

/// GEAMS state held by one node.
#[derive(Debug, Clone)]
pub struct GeamsRouter {
    table: NeighborTable,
    sink: NodeId,
    sources: BTreeMap<NodeId, SourceState>,
    /// Best-neighbor ranking the stored pivots refer to.
    ranking: Vec<NodeId>,
    packet_bits: u64,
    energy: EnergyModelParams,
    void_announced: bool,
}

impl GeamsRouter {
    pub fn new(table: NeighborTable, sink: NodeId, packet_bits: u64, energy: EnergyModelParams) -> Self {
        Self {
            table,
            sink,
            sources: BTreeMap::new(),
            ranking: Vec::new(),
            packet_bits,
            energy,
            void_announced: false,
        }
    }

    pub fn table(&self) -> &NeighborTable {
        &self.table
    }

    pub fn source_state(&self, source: NodeId) -> Option<SourceState> {
        self.sources.get(&source).copied()
    }

    pub fn best_neighbors(&self, now: f64) -> BestNeighborSet {
        build_best_neighbor_set(&self.table, now, self.packet_bits, &self.energy)
    }

    pub fn handle_beacon(&mut self, beacon: &Beacon, now: f64) {
        self.table.handle_beacon(beacon);
        self.refresh(now);
    }

    pub fn handle_void_announcement(&mut self, from: NodeId, now: f64) {
        self.table.mark_void(from);
        self.refresh(now);
    }

    pub fn has_sinkward_neighbor(&self, now: f64) -> bool {
        !detect_void(&self.table, now)
    }

    /// Rebuilds the ranking; when membership or order changed, every stored
    /// pivot is recomputed against the new ranking. Hop estimates persist.
    fn refresh(&mut self, now: f64) -> BestNeighborSet {
        let set = self.best_neighbors(now);
        if !set.ids().eq(self.ranking.iter().copied()) {
            self.ranking = set.ids().collect();
            if let Ok(pivot) = average_score_index(&set) {
                for state in self.sources.values_mut() {
                    state.pivot = pivot;
                }
            }
        }
        set
    }

    pub fn route(&mut self, pk: &mut DataPacket, now: f64) -> RouteDecision {
        if self.table.get_live(self.sink, now).is_some() {
            return RouteDecision::forward(self.sink);
        }
        let set = self.refresh(now);
        if !set.is_empty() {
            self.void_announced = false;
            let state = self.sources.get(&pk.source).copied();
            return match select_next_hop(state, &set, pk.hop_count) {
                Ok((next, state)) => {
                    self.sources.insert(pk.source, state);
                    RouteDecision::forward(next)
                }
                Err(_) => RouteDecision::drop(LossReason::VoidUnresolvable),
            };
        }

        let announce_void = !self.void_announced;
        self.void_announced = true;
        let action = match walking_back(&self.table, pk, now) {
            WalkBack::Delegate(next) => Action::Forward(next),
            WalkBack::Drop if pk.ttl == 0 => Action::Drop(LossReason::TtlExpired),
            WalkBack::Drop => Action::Drop(LossReason::VoidUnresolvable),
        };
        RouteDecision {
            action,
            announce_void,
        }
    }
}

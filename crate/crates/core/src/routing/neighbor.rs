//! Beacon-maintained one-hop neighbor view shared by both protocols.

use std::collections::BTreeMap;

use crate::sim::link::LinkModel;
use crate::topology::{NodeId, Position};

/// Periodic hello message.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Beacon {
    pub sender: NodeId,
    pub position: Position,
    pub residual_energy: f64,
    /// The sender currently has a usable neighbor closer to the sink.
    pub has_sinkward_neighbor: bool,
    pub sent_at: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NeighborRecord {
    pub id: NodeId,
    pub position: Position,
    pub distance_to_me: f64,
    pub distance_to_sink: f64,
    pub residual_energy: f64,
    /// Bits per second over the link to this neighbor.
    pub link_rate: f64,
    pub void_flagged: bool,
    pub last_beacon_time: f64,
}

#[derive(Debug, Clone)]
pub struct NeighborTable {
    owner: NodeId,
    my_position: Position,
    sink_position: Position,
    /// Seconds without a beacon after which a record is ignored.
    expiry: f64,
    link: LinkModel,
    records: BTreeMap<NodeId, NeighborRecord>,
}

impl NeighborTable {
    pub fn new(owner: NodeId, my_position: Position, sink_position: Position, expiry: f64, link: LinkModel) -> Self {
        Self {
            owner,
            my_position,
            sink_position,
            expiry,
            link,
            records: BTreeMap::new(),
        }
    }

    pub fn owner(&self) -> NodeId {
        self.owner
    }

    pub fn my_position(&self) -> Position {
        self.my_position
    }

    pub fn sink_position(&self) -> Position {
        self.sink_position
    }

    pub fn my_distance_to_sink(&self) -> f64 {
        self.my_position.distance_to(self.sink_position)
    }

    /// Upserts the sender's record. A beacon reporting a sink-ward neighbor
    /// clears an earlier void announcement; otherwise the flag is kept.
    pub fn handle_beacon(&mut self, beacon: &Beacon) {
        if beacon.sender == self.owner {
            return;
        }
        let distance_to_me = self.my_position.distance_to(beacon.position);
        // Sub-meter links only come from hand-built placements below the
        // formula's domain; treat them as 1 m links.
        let link_rate = self
            .link
            .rate(distance_to_me)
            .unwrap_or(self.link.base_rate);
        let distance_to_sink = beacon.position.distance_to(self.sink_position);
        let void_flagged = self
            .records
            .get(&beacon.sender)
            .map(|r| r.void_flagged && !beacon.has_sinkward_neighbor)
            .unwrap_or(false);
        self.records.insert(
            beacon.sender,
            NeighborRecord {
                id: beacon.sender,
                position: beacon.position,
                distance_to_me,
                distance_to_sink,
                residual_energy: beacon.residual_energy,
                link_rate,
                void_flagged,
                last_beacon_time: beacon.sent_at,
            },
        );
    }

    /// Applies a void announcement from `id`.
    pub fn mark_void(&mut self, id: NodeId) {
        if let Some(r) = self.records.get_mut(&id) {
            r.void_flagged = true;
        }
    }

    pub fn is_live(&self, record: &NeighborRecord, now: f64) -> bool {
        now - record.last_beacon_time <= self.expiry
    }

    /// Records heard from within the expiry window, ascending by id.
    pub fn live(&self, now: f64) -> impl Iterator<Item = &NeighborRecord> + '_ {
        self.records.values().filter(move |r| self.is_live(r, now))
    }

    pub fn get(&self, id: NodeId) -> Option<&NeighborRecord> {
        self.records.get(&id)
    }

    pub fn get_live(&self, id: NodeId, now: f64) -> Option<&NeighborRecord> {
        self.records.get(&id).filter(|r| self.is_live(r, now))
    }

    /// Drops expired records.
    pub fn purge(&mut self, now: f64) {
        let expiry = self.expiry;
        self.records.retain(|_, r| now - r.last_beacon_time <= expiry);
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table() -> NeighborTable {
        NeighborTable::new(
            NodeId(9),
            Position::new(100.0, 90.0),
            Position::new(490.0, 90.0),
            2.5,
            LinkModel::default(),
        )
    }

    fn beacon(id: u32, x: f64, energy: f64, at: f64) -> Beacon {
        Beacon {
            sender: NodeId(id),
            position: Position::new(x, 90.0),
            residual_energy: energy,
            has_sinkward_neighbor: true,
            sent_at: at,
        }
    }

    #[test]
    fn first_beacon_creates_record() {
        let mut t = table();
        t.handle_beacon(&beacon(5, 125.0, 1.0, 0.0));
        let r = t.get(NodeId(5)).unwrap();
        assert_eq!(r.distance_to_me, 25.0);
        assert_eq!(r.distance_to_sink, 365.0);
        assert_eq!(r.link_rate, 50_000.0);
        assert!(!r.void_flagged);
    }

    #[test]
    fn later_beacon_updates_energy() {
        let mut t = table();
        t.handle_beacon(&beacon(5, 125.0, 1.0, 0.0));
        t.handle_beacon(&beacon(5, 125.0, 0.4, 1.0));
        assert_eq!(t.get(NodeId(5)).unwrap().residual_energy, 0.4);
    }

    #[test]
    fn own_beacon_ignored() {
        let mut t = table();
        t.handle_beacon(&beacon(9, 125.0, 1.0, 0.0));
        assert!(t.is_empty());
    }

    #[test]
    fn records_expire_after_timeout() {
        let mut t = table();
        t.handle_beacon(&beacon(5, 125.0, 1.0, 0.0));
        assert_eq!(t.live(2.5).count(), 1);
        assert_eq!(t.live(2.51).count(), 0);
        t.purge(3.0);
        assert!(t.is_empty());
    }

    #[test]
    fn void_flag_cleared_only_by_sinkward_beacon() {
        let mut t = table();
        t.handle_beacon(&beacon(5, 125.0, 1.0, 0.0));
        t.mark_void(NodeId(5));
        let mut b = beacon(5, 125.0, 1.0, 1.0);
        b.has_sinkward_neighbor = false;
        t.handle_beacon(&b);
        assert!(t.get(NodeId(5)).unwrap().void_flagged);
        t.handle_beacon(&beacon(5, 125.0, 1.0, 2.0));
        assert!(!t.get(NodeId(5)).unwrap().void_flagged);
    }
}

//! Greedy perimeter stateless routing, the history-free baseline.
//!
//! Greedy mode forwards to the neighbor closest to the sink. At a local
//! minimum the packet switches to perimeter mode and walks faces of the
//! node's local Gabriel graph with the right-hand rule until it reaches a
//! node closer to the sink than where it entered perimeter mode.

use std::f64::consts::TAU;

use crate::packet::{DataPacket, LossReason};
use crate::routing::neighbor::{Beacon, NeighborTable};
use crate::routing::RouteDecision;
use crate::topology::{blocks_gabriel_edge, NodeId, Position};

/// Perimeter-mode header fields.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerimeterState {
    /// Where the packet entered perimeter mode.
    pub entry_point: Position,
    /// Point on the entry-to-sink segment where the current face was entered.
    pub face_entry: Position,
    /// First edge traversed on the current face.
    pub first_edge: (NodeId, NodeId),
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum GpsrPacketState {
    #[default]
    Greedy,
    Perimeter(PerimeterState),
}

/// Live neighbor closest to the sink, if it beats the owner. Ties by id.
pub fn greedy_next_hop(t: &NeighborTable, now: f64) -> Option<NodeId> {
    let mine = t.my_distance_to_sink();
    t.live(now)
        .filter(|r| r.distance_to_sink < mine)
        .min_by(|a, b| {
            a.distance_to_sink
                .total_cmp(&b.distance_to_sink)
                .then(a.id.cmp(&b.id))
        })
        .map(|r| r.id)
}

/// Live neighbors kept by the Gabriel test against the other live neighbors.
pub fn planar_neighbors(t: &NeighborTable, now: f64) -> Vec<(NodeId, Position)> {
    let me = t.my_position();
    let live: Vec<(NodeId, Position)> = t.live(now).map(|r| (r.id, r.position)).collect();
    live.iter()
        .filter(|(id, p)| {
            !live
                .iter()
                .any(|(w, wp)| w != id && blocks_gabriel_edge(me, *p, *wp))
        })
        .copied()
        .collect()
}

fn bearing(from: Position, to: Position) -> f64 {
    (to.y - from.y).atan2(to.x - from.x)
}

/// First planar neighbor counterclockwise from the direction `reference`,
/// sweeping from just past it. A neighbor lying exactly on the reference
/// direction comes last.
fn counterclockwise_from(me: Position, reference: Position, planar: &[(NodeId, Position)]) -> Option<(NodeId, Position)> {
    let base = bearing(me, reference);
    planar
        .iter()
        .map(|&(id, p)| {
            let mut delta = (bearing(me, p) - base).rem_euclid(TAU);
            if delta <= 0.0 {
                delta = TAU;
            }
            (delta, id, p)
        })
        .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
        .map(|(_, id, p)| (id, p))
}

fn cross(o: Position, a: Position, b: Position) -> f64 {
    (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)
}

/// Intersection point of segments `ab` and `cd`, if they properly cross.
fn segment_intersection(a: Position, b: Position, c: Position, d: Position) -> Option<Position> {
    let d1 = cross(c, d, a);
    let d2 = cross(c, d, b);
    let d3 = cross(a, b, c);
    let d4 = cross(a, b, d);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0)) {
        let t = d1 / (d1 - d2);
        Some(Position::new(a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)))
    } else {
        None
    }
}

/// Outcome of one perimeter-mode step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PerimeterStep {
    Forward(NodeId, PerimeterState),
    ResumeGreedy,
    Drop,
}

/// Starts perimeter mode at a local minimum: the first edge counterclockwise
/// from the line towards the sink.
pub fn enter_perimeter(me: NodeId, my_pos: Position, sink: Position, planar: &[(NodeId, Position)]) -> PerimeterStep {
    match counterclockwise_from(my_pos, sink, planar) {
        Some((next, _)) => PerimeterStep::Forward(
            next,
            PerimeterState {
                entry_point: my_pos,
                face_entry: my_pos,
                first_edge: (me, next),
            },
        ),
        None => PerimeterStep::Drop,
    }
}

/// Right-hand-rule step for a packet already in perimeter mode that arrived
/// from `prev`. Changes face when the chosen edge crosses the entry-to-sink
/// segment closer to the sink than the current face entry, and gives up when
/// the first edge of the current face would be traversed again.
pub fn perimeter_next_hop(
    state: PerimeterState,
    me: NodeId,
    my_pos: Position,
    prev: Position,
    sink: Position,
    planar: &[(NodeId, Position)],
) -> PerimeterStep {
    if my_pos.distance_to(sink) < state.entry_point.distance_to(sink) {
        return PerimeterStep::ResumeGreedy;
    }
    let Some((mut next, mut next_pos)) = counterclockwise_from(my_pos, prev, planar) else {
        return PerimeterStep::Drop;
    };
    let mut state = state;
    let mut face_changed = false;
    for _ in 0..planar.len() {
        let crossing = segment_intersection(my_pos, next_pos, state.entry_point, sink)
            .filter(|i| i.distance_to(sink) < state.face_entry.distance_to(sink));
        let Some(point) = crossing else { break };
        state.face_entry = point;
        face_changed = true;
        match counterclockwise_from(my_pos, next_pos, planar) {
            Some((n, p)) => {
                next = n;
                next_pos = p;
            }
            None => break,
        }
    }
    if face_changed {
        state.first_edge = (me, next);
    } else if state.first_edge == (me, next) {
        return PerimeterStep::Drop;
    }
    PerimeterStep::Forward(next, state)
}

/// GPSR state held by one node.
#[derive(Debug, Clone)]
pub struct GpsrRouter {
    table: NeighborTable,
    sink: NodeId,
}

impl GpsrRouter {
    pub fn new(table: NeighborTable, sink: NodeId) -> Self {
        Self { table, sink }
    }

    pub fn table(&self) -> &NeighborTable {
        &self.table
    }

    pub fn handle_beacon(&mut self, beacon: &Beacon) {
        self.table.handle_beacon(beacon);
    }

    pub fn has_sinkward_neighbor(&self, now: f64) -> bool {
        greedy_next_hop(&self.table, now).is_some()
    }

    pub fn route(&mut self, pk: &mut DataPacket, now: f64) -> RouteDecision {
        if self.table.get_live(self.sink, now).is_some() {
            pk.gpsr = GpsrPacketState::Greedy;
            return RouteDecision::forward(self.sink);
        }
        let me = self.table.owner();
        let my_pos = self.table.my_position();
        let sink_pos = self.table.sink_position();

        if let GpsrPacketState::Perimeter(state) = pk.gpsr {
            let prev = pk
                .prev_hop
                .and_then(|id| self.table.get(id))
                .map(|r| r.position)
                .unwrap_or(sink_pos);
            let planar = planar_neighbors(&self.table, now);
            match perimeter_next_hop(state, me, my_pos, prev, sink_pos, &planar) {
                PerimeterStep::Forward(next, state) => {
                    pk.gpsr = GpsrPacketState::Perimeter(state);
                    return RouteDecision::forward(next);
                }
                PerimeterStep::Drop => return RouteDecision::drop(LossReason::PerimeterExhausted),
                PerimeterStep::ResumeGreedy => pk.gpsr = GpsrPacketState::Greedy,
            }
        }

        if let Some(next) = greedy_next_hop(&self.table, now) {
            return RouteDecision::forward(next);
        }
        let planar = planar_neighbors(&self.table, now);
        match enter_perimeter(me, my_pos, sink_pos, &planar) {
            PerimeterStep::Forward(next, state) => {
                pk.gpsr = GpsrPacketState::Perimeter(state);
                RouteDecision::forward(next)
            }
            _ => RouteDecision::drop(LossReason::PerimeterExhausted),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::link::LinkModel;

    fn table_at(x: f64, y: f64) -> NeighborTable {
        NeighborTable::new(NodeId(0), Position::new(x, y), Position::new(490.0, 90.0), 2.5, LinkModel::default())
    }

    fn hear(t: &mut NeighborTable, id: u32, x: f64, y: f64) {
        t.handle_beacon(&Beacon {
            sender: NodeId(id),
            position: Position::new(x, y),
            residual_energy: 1.0,
            has_sinkward_neighbor: true,
            sent_at: 0.0,
        });
    }

    #[test]
    fn greedy_picks_closest_to_sink() {
        // Self at sink distance 120; neighbors at 100, 50 and 200.
        let mut t = table_at(370.0, 90.0);
        hear(&mut t, 1, 390.0, 90.0);
        hear(&mut t, 2, 440.0, 90.0);
        hear(&mut t, 3, 290.0, 90.0);
        assert_eq!(greedy_next_hop(&t, 0.0), Some(NodeId(2)));
    }

    #[test]
    fn greedy_absent_at_local_minimum() {
        let mut t = table_at(100.0, 90.0);
        hear(&mut t, 1, 60.0, 90.0);
        hear(&mut t, 2, 80.0, 120.0);
        assert_eq!(greedy_next_hop(&t, 0.0), None);
        hear(&mut t, 3, 120.0, 90.0);
        assert_eq!(greedy_next_hop(&t, 0.0), Some(NodeId(3)));
    }

    #[test]
    fn ccw_sweep_order() {
        let me = Position::new(0.0, 0.0);
        let planar = vec![
            (NodeId(1), Position::new(10.0, 0.0)),
            (NodeId(2), Position::new(0.0, 10.0)),
            (NodeId(3), Position::new(-10.0, 0.0)),
        ];
        // From east, the next counterclockwise is north.
        assert_eq!(counterclockwise_from(me, Position::new(10.0, 0.0), &planar).unwrap().0, NodeId(2));
        // From south, east comes first.
        assert_eq!(counterclockwise_from(me, Position::new(0.0, -10.0), &planar).unwrap().0, NodeId(1));
        // A lone neighbor is chosen even when it is the reference.
        let lone = vec![(NodeId(1), Position::new(10.0, 0.0))];
        assert_eq!(counterclockwise_from(me, Position::new(10.0, 0.0), &lone).unwrap().0, NodeId(1));
    }

    #[test]
    fn segments_cross() {
        let p = segment_intersection(
            Position::new(0.0, 0.0),
            Position::new(2.0, 2.0),
            Position::new(0.0, 2.0),
            Position::new(2.0, 0.0),
        )
        .unwrap();
        assert!((p.x - 1.0).abs() < 1e-12 && (p.y - 1.0).abs() < 1e-12);
        assert!(segment_intersection(
            Position::new(0.0, 0.0),
            Position::new(1.0, 0.0),
            Position::new(0.0, 1.0),
            Position::new(1.0, 1.0)
        )
        .is_none());
    }

    #[test]
    fn resumes_greedy_once_past_entry_point() {
        let state = PerimeterState {
            entry_point: Position::new(100.0, 90.0),
            face_entry: Position::new(100.0, 90.0),
            first_edge: (NodeId(5), NodeId(6)),
        };
        let step = perimeter_next_hop(
            state,
            NodeId(7),
            Position::new(150.0, 60.0),
            Position::new(120.0, 40.0),
            Position::new(490.0, 90.0),
            &[(NodeId(8), Position::new(170.0, 90.0))],
        );
        assert_eq!(step, PerimeterStep::ResumeGreedy);
    }

    #[test]
    fn planar_neighbors_drop_shadowed_edges() {
        let mut t = table_at(0.0, 0.0);
        hear(&mut t, 1, 40.0, 0.0);
        hear(&mut t, 2, 80.0, 0.0);
        let kept: Vec<NodeId> = planar_neighbors(&t, 0.0).into_iter().map(|(id, _)| id).collect();
        assert_eq!(kept, vec![NodeId(1)]);
    }
}

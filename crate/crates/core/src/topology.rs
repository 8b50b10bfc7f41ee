//! Static random deployments on a rectangular sensing field.
//!
//! Node `0` is always the sink and node `1` the source; sensors follow
//! densely from `2`. Positions are placed by rejection sampling so every
//! pair of nodes is at least `min_separation` apart.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;
use std::io::{Read, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Rejection-sampling budget per sensor.
pub const MAX_PLACEMENT_ATTEMPTS: u32 = 10_000;

pub const SINK_ID: NodeId = NodeId(0);
pub const SOURCE_ID: NodeId = NodeId(1);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct NodeId(pub u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A point on the field, in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Position {
    pub x: f64,
    pub y: f64,
}

impl Position {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance_to(self, other: Position) -> f64 {
        distance(self, other)
    }

    pub(crate) fn distance_sq(self, other: Position) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }
}

/// Euclidean distance.
pub fn distance(a: Position, b: Position) -> f64 {
    (a.x - b.x).hypot(a.y - b.y)
}

#[derive(Debug, Error)]
pub enum TopologyError {
    #[error("invalid field: {0}")]
    InvalidField(String),
    #[error("could not place sensor {sensor} after {attempts} attempts; field too crowded")]
    PlacementFailed { sensor: usize, attempts: u32 },
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
    #[error("nodes {a} and {b} are {distance} m apart, below the minimum separation of {min} m")]
    SeparationViolated {
        a: NodeId,
        b: NodeId,
        distance: f64,
        min: f64,
    },
    #[error("node {id} at ({x}, {y}) lies outside the field")]
    OutOfField { id: NodeId, x: f64, y: f64 },
    #[error("topology needs at least a sink and a source, got {0} nodes")]
    TooFewNodes(usize),
    #[error("topology csv: {0}")]
    Csv(String),
}

/// Geometry of the sensing field and the radio.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldSpec {
    pub width: f64,
    pub height: f64,
    pub sink_position: Position,
    pub source_position: Position,
    pub radio_range: f64,
    pub min_separation: f64,
}

impl Default for FieldSpec {
    fn default() -> Self {
        Self {
            width: 500.0,
            height: 200.0,
            sink_position: Position::new(490.0, 90.0),
            source_position: Position::new(10.0, 90.0),
            radio_range: 80.0,
            min_separation: 1.0,
        }
    }
}

impl FieldSpec {
    pub fn contains(&self, p: Position) -> bool {
        (0.0..=self.width).contains(&p.x) && (0.0..=self.height).contains(&p.y)
    }

    pub fn validate(&self) -> Result<(), TopologyError> {
        if !(self.width > 0.0 && self.height > 0.0) || !self.width.is_finite() || !self.height.is_finite() {
            return Err(TopologyError::InvalidField(format!(
                "dimensions must be positive and finite, got {} x {}",
                self.width, self.height
            )));
        }
        if !(self.radio_range > 0.0) {
            return Err(TopologyError::InvalidField(format!(
                "radio range must be positive, got {}",
                self.radio_range
            )));
        }
        if !(self.min_separation > 0.0) {
            return Err(TopologyError::InvalidField(format!(
                "minimum separation must be positive, got {}",
                self.min_separation
            )));
        }
        if !self.contains(self.sink_position) {
            return Err(TopologyError::InvalidField("sink lies outside the field".into()));
        }
        if !self.contains(self.source_position) {
            return Err(TopologyError::InvalidField("source lies outside the field".into()));
        }
        Ok(())
    }
}

/// An immutable node deployment.
#[derive(Debug, Clone, PartialEq)]
pub struct Topology {
    positions: Vec<Position>,
    field: FieldSpec,
    seed: u64,
}

impl Topology {
    /// Builds a topology from explicit positions. `positions[0]` is the sink
    /// and `positions[1]` the source; the field's sink and source positions
    /// are overwritten to match.
    pub fn from_positions(
        mut field: FieldSpec,
        positions: Vec<Position>,
        seed: u64,
    ) -> Result<Self, TopologyError> {
        if positions.len() < 2 {
            return Err(TopologyError::TooFewNodes(positions.len()));
        }
        field.sink_position = positions[SINK_ID.index()];
        field.source_position = positions[SOURCE_ID.index()];
        field.validate()?;
        for (i, p) in positions.iter().enumerate() {
            if !field.contains(*p) {
                return Err(TopologyError::OutOfField {
                    id: NodeId(i as u32),
                    x: p.x,
                    y: p.y,
                });
            }
        }
        for i in 0..positions.len() {
            for j in (i + 1)..positions.len() {
                let d = distance(positions[i], positions[j]);
                if d < field.min_separation {
                    return Err(TopologyError::SeparationViolated {
                        a: NodeId(i as u32),
                        b: NodeId(j as u32),
                        distance: d,
                        min: field.min_separation,
                    });
                }
            }
        }
        Ok(Self {
            positions,
            field,
            seed,
        })
    }

    pub fn field(&self) -> &FieldSpec {
        &self.field
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Same placement under another seed. The engine derives beacon phases
    /// from the seed, so imported placements take the run's seed.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn sink(&self) -> NodeId {
        SINK_ID
    }

    pub fn source(&self) -> NodeId {
        SOURCE_ID
    }

    /// Total node count including sink and source.
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn sensor_count(&self) -> usize {
        self.positions.len() - 2
    }

    pub fn is_sensor(&self, id: NodeId) -> bool {
        id != SINK_ID && id != SOURCE_ID && id.index() < self.positions.len()
    }

    pub fn position(&self, id: NodeId) -> Result<Position, TopologyError> {
        self.positions
            .get(id.index())
            .copied()
            .ok_or(TopologyError::UnknownNode(id))
    }

    pub fn positions(&self) -> &[Position] {
        &self.positions
    }

    pub fn nodes(&self) -> impl Iterator<Item = (NodeId, Position)> + '_ {
        self.positions
            .iter()
            .enumerate()
            .map(|(i, p)| (NodeId(i as u32), *p))
    }

    pub fn in_range(&self, a: Position, b: Position) -> bool {
        a.distance_sq(b) <= self.field.radio_range * self.field.radio_range
    }

    /// Adjacency lists of the unit-disk radio graph, ascending by id.
    pub fn adjacency(&self) -> Vec<Vec<NodeId>> {
        let n = self.positions.len();
        let mut adj = vec![Vec::new(); n];
        for i in 0..n {
            for j in (i + 1)..n {
                if self.in_range(self.positions[i], self.positions[j]) {
                    adj[i].push(NodeId(j as u32));
                    adj[j].push(NodeId(i as u32));
                }
            }
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        adj
    }

    /// Whether every node is reachable from the sink over `edges`.
    pub fn is_connected_under(&self, edges: &BTreeSet<(NodeId, NodeId)>) -> bool {
        let n = self.positions.len();
        let mut adj = vec![Vec::new(); n];
        for &(a, b) in edges {
            adj[a.index()].push(b.index());
            adj[b.index()].push(a.index());
        }
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    /// Writes `node_id,x,y` rows with a header.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), TopologyError> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["node_id", "x", "y"])
            .map_err(|e| TopologyError::Csv(e.to_string()))?;
        for (id, p) in self.nodes() {
            w.write_record([id.to_string(), p.x.to_string(), p.y.to_string()])
                .map_err(|e| TopologyError::Csv(e.to_string()))?;
        }
        w.flush().map_err(|e| TopologyError::Csv(e.to_string()))
    }

    /// Reads a placement written by [`Topology::write_csv`]. Rows may come in
    /// any order but ids must be dense from 0.
    pub fn read_csv<R: Read>(field: FieldSpec, reader: R) -> Result<Self, TopologyError> {
        #[derive(Deserialize)]
        struct Row {
            node_id: u32,
            x: f64,
            y: f64,
        }
        let mut rdr = csv::Reader::from_reader(reader);
        let mut rows: Vec<Row> = Vec::new();
        for (line, rec) in rdr.deserialize().enumerate() {
            let row: Row = rec.map_err(|e| TopologyError::Csv(format!("row {}: {e}", line + 2)))?;
            rows.push(row);
        }
        rows.sort_by_key(|r| r.node_id);
        for (i, r) in rows.iter().enumerate() {
            if r.node_id as usize != i {
                return Err(TopologyError::Csv(format!(
                    "node ids must be dense from 0; expected {i}, found {}",
                    r.node_id
                )));
            }
        }
        let positions = rows.into_iter().map(|r| Position::new(r.x, r.y)).collect();
        Self::from_positions(field, positions, 0)
    }
}

/// Deploys `n_sensors` sensors uniformly at random, plus the fixed sink and
/// source. Identical arguments always yield the identical topology.
pub fn generate_topology(
    seed: u64,
    n_sensors: usize,
    field: &FieldSpec,
) -> Result<Topology, TopologyError> {
    field.validate()?;
    if n_sensors == 0 {
        return Err(TopologyError::InvalidField("at least one sensor is required".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let min_sq = field.min_separation * field.min_separation;
    let mut positions = Vec::with_capacity(n_sensors + 2);
    positions.push(field.sink_position);
    positions.push(field.source_position);
    if field.sink_position.distance_sq(field.source_position) < min_sq {
        return Err(TopologyError::InvalidField(
            "sink and source are closer than the minimum separation".into(),
        ));
    }

    for sensor in 0..n_sensors {
        let mut placed = false;
        for _ in 0..MAX_PLACEMENT_ATTEMPTS {
            let candidate = Position::new(
                rng.random_range(0.0..=field.width),
                rng.random_range(0.0..=field.height),
            );
            if positions.iter().all(|p| p.distance_sq(candidate) >= min_sq) {
                positions.push(candidate);
                placed = true;
                break;
            }
        }
        if !placed {
            return Err(TopologyError::PlacementFailed {
                sensor,
                attempts: MAX_PLACEMENT_ATTEMPTS,
            });
        }
    }

    Ok(Topology {
        positions,
        field: field.clone(),
        seed,
    })
}

/// All nodes within radio range of `id`, excluding `id` itself. The range
/// boundary is inclusive.
pub fn radio_neighbors(t: &Topology, id: NodeId) -> Result<BTreeSet<NodeId>, TopologyError> {
    let me = t.position(id)?;
    Ok(t.nodes()
        .filter(|&(other, p)| other != id && t.in_range(me, p))
        .map(|(other, _)| other)
        .collect())
}

/// Whether `witness` blocks the Gabriel edge `(u, v)`: it lies inside or on
/// the circle whose diameter is `uv`.
pub(crate) fn blocks_gabriel_edge(u: Position, v: Position, witness: Position) -> bool {
    let mid = Position::new((u.x + v.x) / 2.0, (u.y + v.y) / 2.0);
    let radius_sq = u.distance_sq(v) / 4.0;
    witness.distance_sq(mid) <= radius_sq
}

/// Gabriel subgraph of the radio graph. Edges are returned as `(low, high)`.
pub fn gabriel_planarize(t: &Topology) -> BTreeSet<(NodeId, NodeId)> {
    let adj = t.adjacency();
    let mut edges = BTreeSet::new();
    for (u, neighbors) in adj.iter().enumerate() {
        let pu = t.positions[u];
        for &v in neighbors.iter().filter(|v| v.index() > u) {
            let pv = t.positions[v.index()];
            // Any witness inside the diametral disk is within range of u.
            let blocked = neighbors
                .iter()
                .filter(|w| **w != v)
                .any(|w| blocks_gabriel_edge(pu, pv, t.positions[w.index()]));
            if !blocked {
                edges.insert((NodeId(u as u32), v));
            }
        }
    }
    edges
}

/// Edge set of the radio graph as `(low, high)` pairs.
pub fn radio_edges(t: &Topology) -> BTreeSet<(NodeId, NodeId)> {
    let mut edges = BTreeSet::new();
    for (u, neighbors) in t.adjacency().iter().enumerate() {
        for &v in neighbors.iter().filter(|v| v.index() > u) {
            edges.insert((NodeId(u as u32), v));
        }
    }
    edges
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line_field(range: f64) -> FieldSpec {
        FieldSpec {
            width: 500.0,
            height: 200.0,
            sink_position: Position::new(0.0, 0.0),
            source_position: Position::new(0.0, 0.0),
            radio_range: range,
            min_separation: 1.0,
        }
    }

    #[test]
    fn distance_examples() {
        assert_eq!(distance(Position::new(0.0, 0.0), Position::new(0.0, 0.0)), 0.0);
        assert_eq!(distance(Position::new(10.0, 90.0), Position::new(490.0, 90.0)), 480.0);
        assert_eq!(distance(Position::new(0.0, 0.0), Position::new(3.0, 4.0)), 5.0);
    }

    #[test]
    fn default_scenario_has_sink_and_source() {
        let t = generate_topology(1, 30, &FieldSpec::default()).unwrap();
        assert_eq!(t.len(), 32);
        assert_eq!(t.sensor_count(), 30);
        assert_eq!(t.position(t.sink()).unwrap(), Position::new(490.0, 90.0));
        assert_eq!(t.position(t.source()).unwrap(), Position::new(10.0, 90.0));
    }

    #[test]
    fn generation_is_deterministic() {
        let f = FieldSpec::default();
        assert_eq!(generate_topology(1, 30, &f).unwrap(), generate_topology(1, 30, &f).unwrap());
        assert_ne!(generate_topology(1, 30, &f).unwrap(), generate_topology(2, 30, &f).unwrap());
    }

    #[test]
    fn crowded_field_fails_placement() {
        let field = FieldSpec {
            width: 2.0,
            height: 2.0,
            sink_position: Position::new(0.0, 0.0),
            source_position: Position::new(2.0, 2.0),
            radio_range: 80.0,
            min_separation: 1.0,
        };
        let err = generate_topology(3, 50, &field).unwrap_err();
        assert!(matches!(err, TopologyError::PlacementFailed { .. }));
    }

    #[test]
    fn zero_sensors_rejected() {
        assert!(generate_topology(1, 0, &FieldSpec::default()).is_err());
    }

    #[test]
    fn range_boundary_is_inclusive() {
        let f = line_field(80.0);
        let t = Topology::from_positions(f.clone(), vec![Position::new(0.0, 0.0), Position::new(80.0, 0.0)], 0).unwrap();
        assert_eq!(radio_neighbors(&t, NodeId(0)).unwrap(), BTreeSet::from([NodeId(1)]));
        assert_eq!(radio_neighbors(&t, NodeId(1)).unwrap(), BTreeSet::from([NodeId(0)]));

        let t = Topology::from_positions(f, vec![Position::new(0.0, 0.0), Position::new(80.01, 0.0)], 0).unwrap();
        assert!(radio_neighbors(&t, NodeId(0)).unwrap().is_empty());
        assert!(radio_neighbors(&t, NodeId(1)).unwrap().is_empty());
    }

    #[test]
    fn unknown_node_is_an_error() {
        let t = generate_topology(1, 5, &FieldSpec::default()).unwrap();
        assert!(matches!(radio_neighbors(&t, NodeId(99)), Err(TopologyError::UnknownNode(_))));
    }

    #[test]
    fn gabriel_drops_edge_with_midpoint_witness() {
        let t = Topology::from_positions(
            line_field(80.0),
            vec![Position::new(0.0, 0.0), Position::new(80.0, 0.0), Position::new(40.0, 0.0)],
            0,
        )
        .unwrap();
        let g = gabriel_planarize(&t);
        assert_eq!(
            g,
            BTreeSet::from([(NodeId(0), NodeId(2)), (NodeId(1), NodeId(2))])
        );
    }

    #[test]
    fn gabriel_keeps_lone_edge() {
        let t = Topology::from_positions(
            line_field(80.0),
            vec![Position::new(0.0, 0.0), Position::new(50.0, 0.0)],
            0,
        )
        .unwrap();
        assert_eq!(gabriel_planarize(&t), BTreeSet::from([(NodeId(0), NodeId(1))]));
    }

    #[test]
    fn witness_on_circle_excludes_edge() {
        // (0,0)-(2,0) has diametral circle of radius 1 around (1,0); (1,1) is on it.
        assert!(blocks_gabriel_edge(Position::new(0.0, 0.0), Position::new(2.0, 0.0), Position::new(1.0, 1.0)));
        assert!(!blocks_gabriel_edge(Position::new(0.0, 0.0), Position::new(2.0, 0.0), Position::new(1.0, 1.001)));
    }

    #[test]
    fn csv_round_trip() {
        let t = generate_topology(4, 12, &FieldSpec::default()).unwrap();
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("node_id,x,y\n"));
        let back = Topology::read_csv(FieldSpec::default(), buf.as_slice()).unwrap();
        assert_eq!(back.positions(), t.positions());
    }

    #[test]
    fn csv_rejects_gaps_and_crowding() {
        let gap = "node_id,x,y\n0,490,90\n2,10,90\n";
        assert!(Topology::read_csv(FieldSpec::default(), gap.as_bytes()).is_err());
        let close = "node_id,x,y\n0,490,90\n1,10,90\n2,10.5,90\n";
        assert!(matches!(
            Topology::read_csv(FieldSpec::default(), close.as_bytes()),
            Err(TopologyError::SeparationViolated { .. })
        ));
    }
}

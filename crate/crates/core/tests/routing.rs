use geams_core::routing::geams::{detect_void, walking_back, WalkBack};
use geams_core::routing::neighbor::{Beacon, NeighborTable};
use geams_core::routing::StaticNetwork;
use geams_core::{
    DataPacket, EnergyModelParams, FieldSpec, LinkModel, LossReason, NodeId, Position, Protocol, Topology,
};

fn topo(points: &[(f64, f64)]) -> Topology {
    let positions = points.iter().map(|&(x, y)| Position::new(x, y)).collect();
    Topology::from_positions(FieldSpec::default(), positions, 0).unwrap()
}

fn ids(v: &[u32]) -> Vec<NodeId> {
    v.iter().copied().map(NodeId).collect()
}

fn net(t: &Topology, p: Protocol) -> StaticNetwork {
    StaticNetwork::new(t, p, EnergyModelParams::default(), 1064, 1.0)
}

/// Node 3 and node 5 are both dead ends; node 6 has a way forward.
fn double_void() -> Topology {
    topo(&[
        (490.0, 90.0),
        (330.0, 90.0),
        (475.0, 80.0),
        (385.0, 100.0),
        (430.0, 25.0),
        (385.0, 105.0),
        (390.0, 30.0),
    ])
}

fn beacon(id: u32, x: f64, y: f64) -> Beacon {
    Beacon {
        sender: NodeId(id),
        position: Position::new(x, y),
        residual_energy: 1.0,
        has_sinkward_neighbor: true,
        sent_at: 0.0,
    }
}

#[test]
fn void_detected_when_every_neighbor_is_farther() {
    let sink = Position::new(490.0, 90.0);
    let mut t = NeighborTable::new(NodeId(9), Position::new(100.0, 90.0), sink, 2.5, LinkModel::default());
    assert!(detect_void(&t, 0.0));
    t.handle_beacon(&beacon(1, 60.0, 90.0));
    t.handle_beacon(&beacon(2, 80.0, 120.0));
    assert!(detect_void(&t, 0.0));

    let mut pk = DataPacket::new(0, NodeId(1), 0, 1000, 0.0, 10);
    assert_eq!(walking_back(&t, &mut pk, 0.0), WalkBack::Delegate(NodeId(2)));
    assert_eq!(pk.excluded, vec![NodeId(9)]);

    t.handle_beacon(&beacon(3, 140.0, 90.0));
    assert!(!detect_void(&t, 0.0));
}

#[test]
fn walking_back_with_everything_excluded_drops() {
    let sink = Position::new(490.0, 90.0);
    let mut t = NeighborTable::new(NodeId(9), Position::new(100.0, 90.0), sink, 2.5, LinkModel::default());
    t.handle_beacon(&beacon(1, 60.0, 90.0));
    let mut pk = DataPacket::new(0, NodeId(1), 0, 1000, 0.0, 10);
    pk.excluded.push(NodeId(1));
    assert_eq!(walking_back(&t, &mut pk, 0.0), WalkBack::Drop);
}

#[test]
fn geams_steps_back_twice_then_resumes() {
    let t = double_void();
    let mut n = net(&t, Protocol::Geams);
    let r = n.trace();
    assert_eq!(r.path, ids(&[1, 3, 5, 6, 4, 2, 0]));
    assert!(r.delivered());
    // Both dead ends are now known to their neighbors.
    assert!(n.router(NodeId(1)).table().get(NodeId(3)).unwrap().void_flagged);
    assert!(n.router(NodeId(6)).table().get(NodeId(5)).unwrap().void_flagged);
    // The source's only neighbors are the flagged dead ends, and no beacon
    // arrives in a static network to clear them.
    let second = n.trace();
    assert_eq!(second.path, ids(&[1]));
    assert_eq!(second.loss, Some(LossReason::VoidUnresolvable));
}

#[test]
fn gpsr_bypasses_the_void_on_the_perimeter() {
    let t = double_void();
    let sink = t.field().sink_position;
    let r = net(&t, Protocol::Gpsr).trace();
    assert!(r.delivered(), "{r:?}");
    assert_eq!(r.path[..2], ids(&[1, 3]));
    let d: Vec<f64> = r.path.iter().map(|id| t.positions()[id.index()].distance_to(sink)).collect();
    assert!(d.windows(2).any(|w| w[1] > w[0]), "a perimeter hop moves away from the sink");
}

#[test]
fn unreachable_sink_is_dropped_by_both() {
    let t = topo(&[(490.0, 90.0), (10.0, 90.0), (60.0, 90.0), (120.0, 100.0)]);
    let g = net(&t, Protocol::Geams).trace();
    assert_eq!(g.loss, Some(LossReason::VoidUnresolvable));
    let p = net(&t, Protocol::Gpsr).trace();
    assert_eq!(p.loss, Some(LossReason::PerimeterExhausted));
}

#[test]
fn straight_chain_is_pure_greedy_for_both() {
    let xs = [10.0, 80.0, 150.0, 220.0, 290.0, 360.0, 430.0];
    let mut pts = vec![(490.0, 90.0)];
    pts.extend(xs.iter().map(|&x| (x, 90.0)));
    let t = topo(&pts);
    let expected = ids(&[1, 2, 3, 4, 5, 6, 7, 0]);
    for p in [Protocol::Geams, Protocol::Gpsr] {
        let mut n = net(&t, p);
        for _ in 0..3 {
            assert_eq!(n.trace().path, expected, "{p}");
        }
    }
}

#[test]
fn geams_spreads_a_stream_where_gpsr_does_not() {
    let t = geams_core::generate_topology(2, 100, &FieldSpec::default()).unwrap();
    let mut g = net(&t, Protocol::Geams);
    let mut p = net(&t, Protocol::Gpsr);
    let gpaths: std::collections::BTreeSet<_> = (0..10).map(|_| g.trace().path).collect();
    let ppaths: std::collections::BTreeSet<_> = (0..10).map(|_| p.trace().path).collect();
    assert_eq!(ppaths.len(), 1);
    assert!(gpaths.len() > 1);
}

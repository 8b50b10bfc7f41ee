use proptest::prelude::*;

use geams_core::routing::geams::{build_best_neighbor_set, select_next_hop, BestNeighborSet, SourceState};
use geams_core::routing::neighbor::{Beacon, NeighborTable};
use geams_core::routing::StaticNetwork;
use geams_core::sim::event::{EventKind, EventQueue};
use geams_core::topology::{gabriel_planarize, radio_edges, radio_neighbors};
use geams_core::{
    generate_topology, rx_energy, tx_energy, EnergyModelParams, FieldSpec, LinkModel, NodeId, Position, Protocol,
};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn placements_respect_min_separation(seed in any::<u64>(), n in 1usize..120) {
        let f = FieldSpec::default();
        let t = generate_topology(seed, n, &f).unwrap();
        prop_assert_eq!(t.len(), n + 2);
        let p = t.positions();
        for i in 0..p.len() {
            prop_assert!(f.contains(p[i]));
            for j in (i + 1)..p.len() {
                prop_assert!(p[i].distance_to(p[j]) >= f.min_separation);
            }
        }
    }

    #[test]
    fn radio_neighborhoods_are_symmetric(seed in any::<u64>(), n in 1usize..100) {
        let t = generate_topology(seed, n, &FieldSpec::default()).unwrap();
        for (u, _) in t.nodes() {
            for v in radio_neighbors(&t, u).unwrap() {
                prop_assert!(radio_neighbors(&t, v).unwrap().contains(&u));
            }
        }
    }

    #[test]
    fn gabriel_graph_is_a_connected_subgraph(seed in any::<u64>(), n in 1usize..100) {
        let t = generate_topology(seed, n, &FieldSpec::default()).unwrap();
        let radio = radio_edges(&t);
        let planar = gabriel_planarize(&t);
        prop_assert!(planar.is_subset(&radio));
        if t.is_connected_under(&radio) {
            prop_assert!(t.is_connected_under(&planar));
        }
    }

    #[test]
    fn tx_never_cheaper_than_rx(bits in 0u64..100_000, d in 0.0f64..500.0, d2 in 0.0f64..500.0) {
        let p = EnergyModelParams::default();
        prop_assert!(tx_energy(bits, d, &p) >= rx_energy(bits, &p));
        let (lo, hi) = if d <= d2 { (d, d2) } else { (d2, d) };
        prop_assert!(tx_energy(bits, lo, &p) <= tx_energy(bits, hi, &p));
    }

    #[test]
    fn ranking_ignores_a_common_energy_offset(
        nbs in prop::collection::vec((0.0f64..80.0, -60.0f64..60.0, 0.1f64..1.0), 1..10),
        offset in 0.0f64..5.0,
    ) {
        let me = Position::new(300.0, 100.0);
        let sink = Position::new(490.0, 90.0);
        let build = |shift: f64| {
            let mut t = NeighborTable::new(NodeId(99), me, sink, f64::INFINITY, LinkModel::default());
            for (i, &(dx, dy, e)) in nbs.iter().enumerate() {
                t.handle_beacon(&Beacon {
                    sender: NodeId(i as u32 + 2),
                    position: Position::new(me.x + dx + 1.0, me.y + dy),
                    residual_energy: e + shift,
                    has_sinkward_neighbor: true,
                    sent_at: 0.0,
                });
            }
            build_best_neighbor_set(&t, 0.0, 1064, &EnergyModelParams::default())
        };
        let a: Vec<NodeId> = build(0.0).ids().collect();
        let b: Vec<NodeId> = build(offset).ids().collect();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn selector_index_stays_in_range(
        m in 1usize..12,
        hops in 0u32..200,
        expected in 0u32..200,
        pivot in 0usize..20,
    ) {
        let set = BestNeighborSet::from_scores((0..m).map(|i| (NodeId(i as u32), -(i as f64))).collect());
        let state = SourceState { expected_hops: expected, pivot };
        let (id, next) = select_next_hop(Some(state), &set, hops).unwrap();
        prop_assert!((id.0 as usize) < m);
        prop_assert!((1..=m).contains(&next.pivot));
        let (first, _) = select_next_hop(None, &set, hops).unwrap();
        prop_assert_eq!(first, NodeId(0));
    }

    #[test]
    fn events_pop_in_time_order(times in prop::collection::vec(0.0f64..100.0, 1..60)) {
        let mut q = EventQueue::new();
        for (i, &t) in times.iter().enumerate() {
            q.schedule(t, EventKind::BeaconTick { node: NodeId(i as u32) });
        }
        let mut last = (f64::NEG_INFINITY, 0u64);
        while let Some(ev) = q.pop() {
            prop_assert!((ev.time, ev.sequence) > last);
            last = (ev.time, ev.sequence);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn static_traces_terminate_and_gpsr_repeats(seed in any::<u64>(), n in 5usize..100) {
        let t = generate_topology(seed, n, &FieldSpec::default()).unwrap();
        let p = EnergyModelParams::default();
        let limit = 2 * t.len();
        let mut gpsr = StaticNetwork::new(&t, Protocol::Gpsr, p, 1064, 1.0);
        let first = gpsr.trace();
        prop_assert!(first.hops() <= limit);
        for _ in 0..5 {
            prop_assert_eq!(&gpsr.trace(), &first);
        }
        let mut geams = StaticNetwork::new(&t, Protocol::Geams, p, 1064, 1.0);
        for _ in 0..20 {
            let r = geams.trace();
            prop_assert!(r.hops() <= limit);
        }
    }

    #[test]
    fn greedy_only_geams_paths_make_progress(seed in any::<u64>(), n in 30usize..100) {
        let t = generate_topology(seed, n, &FieldSpec::default()).unwrap();
        let sink = t.field().sink_position;
        let mut geams = StaticNetwork::new(&t, Protocol::Geams, EnergyModelParams::default(), 1064, 1.0);
        for _ in 0..10 {
            let r = geams.trace();
            let d: Vec<f64> = r.path.iter().map(|id| t.positions()[id.index()].distance_to(sink)).collect();
            // A path that never walked back strictly approaches the sink.
            if r.delivered() && d.windows(2).all(|w| w[1] <= w[0]) {
                prop_assert!(d.windows(2).all(|w| w[1] < w[0]));
            }
        }
    }
}

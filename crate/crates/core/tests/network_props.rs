use mmbcast_core::network::{
    hop_affectance_matrix, radio_network_matrix, required_degradation_distance,
};
use mmbcast_core::topology::generate;
use mmbcast_core::{Graph, LinkId, Network, NodeId, TopologyKind, Transmission};
use proptest::prelude::*;

fn kind() -> impl Strategy<Value = TopologyKind> {
    prop::sample::select(TopologyKind::ALL.to_vec())
}

fn subset(n: usize, mask: u64) -> Vec<NodeId> {
    (0..n)
        .filter(|i| mask >> i & 1 == 1)
        .map(NodeId::from)
        .collect()
}

proptest! {
    #[test]
    fn affectance_is_additive(k in kind(), n in 4usize..12, seed in 0u64..500, a in any::<u64>(), b in any::<u64>(), alpha in 1u32..4) {
        let net = Network::with_hop_matrix(generate(k, n & !1, seed).unwrap(), alpha).unwrap();
        let n = net.node_count();
        let x = subset(n, a & !b);
        let y = subset(n, b & !a);
        let mut both: Vec<NodeId> = x.iter().chain(&y).copied().collect();
        both.sort_unstable();
        for l in 0..net.graph().link_count() {
            let link = LinkId(l as u32);
            let sum = net.affectance_from(&x, link) + net.affectance_from(&y, link);
            prop_assert!((net.affectance_from(&both, link) - sum).abs() < 1e-9);
        }
    }

    #[test]
    fn dropping_transmitters_keeps_receptions(k in kind(), n in 4usize..12, seed in 0u64..500, mask in any::<u64>(), drop in any::<u64>(), alpha in 1u32..4) {
        let net = Network::with_hop_matrix(generate(k, n & !1, seed).unwrap(), alpha).unwrap();
        let n = net.node_count();
        let senders = subset(n, mask);
        let listeners: Vec<NodeId> = net.graph().nodes().filter(|v| !senders.contains(v)).collect();
        let tx: Vec<Transmission<u32>> = senders.iter().map(|&s| Transmission { sender: s, payload: s.0 }).collect();
        let full = net.step(&tx, &listeners).unwrap();
        for (v, r) in &full.receptions {
            let kept: Vec<Transmission<u32>> = tx
                .iter()
                .filter(|t| t.sender == r.sender || drop >> t.sender.index() & 1 == 0)
                .cloned()
                .collect();
            let fewer = net.step(&kept, &listeners).unwrap();
            prop_assert_eq!(fewer.receptions.get(v).map(|x| x.sender), Some(r.sender));
        }
    }

    #[test]
    fn matrices_respect_degradation(k in kind(), n in 4usize..14, seed in 0u64..500, alpha in 1u32..5) {
        let g = generate(k, n & !1, seed).unwrap();
        let hops = g.hop_distances();
        let a = hop_affectance_matrix(&g, alpha);
        for (w, l, value) in a.nonzero() {
            let (u, v) = g.link(l);
            prop_assert!(w != u);
            prop_assert!(value.is_finite() && value > 0.0);
            prop_assert!(hops.get(w, v).unwrap() < alpha);
        }
        prop_assert!(required_degradation_distance(&g, &a).unwrap() <= alpha);
        prop_assert!(Network::new(g, a, alpha).is_ok());
    }
}

#[test]
fn radio_matrix_marks_receiver_neighborhood() {
    let g = Graph::bidirected(4, [(0, 1), (1, 2), (2, 3)]).unwrap();
    let a = radio_network_matrix(&g);
    let l = g.link_id(NodeId(0), NodeId(1)).unwrap();
    assert_eq!(a.get(NodeId(0), l), 0.0);
    assert_eq!(a.get(NodeId(1), l), 1.0);
    assert_eq!(a.get(NodeId(2), l), 1.0);
    assert_eq!(a.get(NodeId(3), l), 0.0);
}

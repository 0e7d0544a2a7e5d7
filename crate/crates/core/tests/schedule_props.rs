use mmbcast_core::schedule::run_single_broadcast;
use mmbcast_core::topology::generate;
use mmbcast_core::{
    BroadcastPlan, Network, NodeId, ScheduleParams, TminMode, TopologyKind, TreeCharacteristics,
};
use proptest::prelude::*;

fn params(alpha: u32, depth: u32, r: u32) -> ScheduleParams {
    ScheduleParams::new(
        16,
        alpha,
        depth,
        r,
        TreeCharacteristics {
            k: 1.0,
            m: 1.0,
            objective: 0.0,
        },
    )
}

#[test]
fn reservations_separate_layers() {
    for alpha in 1..7 {
        for max_rank in 1..5 {
            let p = params(alpha, 20, max_rank);
            let h = p.h;
            for t in 0..(4 * h as u64 * max_rank as u64) {
                let fast: Vec<(u32, u32)> = (0..20)
                    .flat_map(|d| (1..=max_rank).map(move |r| (d, r)))
                    .filter(|&(d, r)| p.fast_reserved(d, r, t))
                    .collect();
                let slow: Vec<u32> = (0..20).filter(|&d| p.slow_reserved(d, t)).collect();
                for (i, &(d, r)) in fast.iter().enumerate() {
                    for &(d2, r2) in &fast[i + 1..] {
                        assert!((d, r) != (d2, r2));
                        assert!(
                            d.abs_diff(d2) >= 2 * h,
                            "fast classes ({d},{r}) ({d2},{r2}) share slot {t}"
                        );
                    }
                    for &s in &slow {
                        assert!(d.abs_diff(s) >= h, "fast {d} and slow {s} share slot {t}");
                    }
                }
                for (i, &a) in slow.iter().enumerate() {
                    for &b in &slow[i + 1..] {
                        assert!(a.abs_diff(b) >= 2 * h);
                    }
                }
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn broadcast_follows_the_tree(kind in prop::sample::select(TopologyKind::ALL.to_vec()), n in 4usize..17, seed in 0u64..1000, root in 0u32..16) {
        let net = Network::with_hop_matrix(generate(kind, n & !1, seed).unwrap(), 2).unwrap();
        let root = NodeId(root % net.node_count() as u32);
        let plan = BroadcastPlan::for_source(&net, root, TminMode::SingleBfs).unwrap();
        let out = run_single_broadcast(&net, &plan, 7, seed, 10 * plan.params.delta_len).unwrap();
        prop_assert!(!out.violation);
        let tree = plan.ranked.tree();
        prop_assert_eq!(out.first_reception[root.index()], Some(0));
        for v in net.graph().nodes() {
            // The root may transmit in the slot it is handed the packet.
            if let Some(p) = tree.parent(v) {
                let (got, from) = (out.first_reception[v.index()].unwrap(), out.first_reception[p.index()].unwrap());
                prop_assert!(got > from || (p == root && got == from));
            }
        }
        let last = out.first_reception.iter().map(|x| x.unwrap()).max().unwrap();
        prop_assert_eq!(out.completion_slot, Some(last));
    }
}

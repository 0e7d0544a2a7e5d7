use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use super::BroadcastPlan;
use crate::graph::NodeId;
use crate::network::Network;

/// A same-rank child that missed its fast parent's only transmission.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FastLinkFailure {
    pub slot: u64,
    pub packet: u64,
    pub parent: NodeId,
    pub child: NodeId,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Delivery {
    pub packet: u64,
    /// Index of the broadcasting plan.
    pub plan: usize,
    pub launched: u64,
    /// Slot in which the last node accepted the packet.
    pub slot: u64,
    pub first_reception: Vec<Option<u64>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SlotRecord {
    pub slot: u64,
    pub transmitters: Vec<NodeId>,
    /// `(listener, sender)` for every decoded transmission, accepted or not.
    pub receptions: Vec<(NodeId, NodeId)>,
}

#[derive(Debug, Default)]
pub(crate) struct SlotReport {
    pub deliveries: Vec<Delivery>,
    pub fast_failures: Vec<FastLinkFailure>,
    pub ignored: u64,
}

impl SlotReport {
    pub fn clear(&mut self) {
        self.deliveries.clear();
        self.fast_failures.clear();
        self.ignored = 0;
    }
}

/// One packet travelling down its source's tree.
#[derive(Debug)]
struct Flight {
    plan: usize,
    packet: u64,
    launched: u64,
    received: Vec<Option<u64>>,
    /// First slot in which a holder may forward the packet.
    ready_at: Vec<u64>,
    /// Fast holders that have not yet used their fast slot for this packet.
    fast_pending: Vec<bool>,
    reached: usize,
}

impl Flight {
    /// Some child of `u` lacks the packet and is not waiting for `u`'s
    /// pending fast transmission.
    fn needs_contention(&self, plan: &BroadcastPlan, u: NodeId) -> bool {
        let ranked = &plan.ranked;
        let pending = self.fast_pending[u.index()];
        let r = ranked.rank(u);
        ranked
            .tree()
            .children(u)
            .iter()
            .any(|&c| self.received[c.index()].is_none() && !(pending && ranked.rank(c) == r))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Role {
    Fast,
    Contention,
}

/// Packets in flight, oldest first, and per-slot scratch space.
#[derive(Debug)]
pub(crate) struct Pipeline {
    flights: VecDeque<Flight>,
    /// `(flight index, role)` chosen by each node this slot.
    chosen: Vec<Option<(usize, Role)>>,
    listening: Vec<bool>,
    senders: Vec<NodeId>,
    decoded: Vec<(NodeId, NodeId)>,
}

impl Pipeline {
    pub fn new(node_count: usize) -> Self {
        Pipeline {
            flights: VecDeque::new(),
            chosen: vec![None; node_count],
            listening: vec![false; node_count],
            senders: Vec::new(),
            decoded: Vec::new(),
        }
    }

    pub fn is_idle(&self) -> bool {
        self.flights.is_empty()
    }

    pub fn first_receptions(&self, packet: u64) -> Option<Vec<Option<u64>>> {
        self.flights
            .iter()
            .find(|f| f.packet == packet)
            .map(|f| f.received.clone())
    }

    /// Hands `packet` to the root of `plans[plan]`; it may be forwarded from
    /// `slot` on.
    pub fn launch(&mut self, plans: &[BroadcastPlan], plan: usize, packet: u64, slot: u64) {
        let n = self.chosen.len();
        let root = plans[plan].source();
        let mut flight = Flight {
            plan,
            packet,
            launched: slot,
            received: vec![None; n],
            ready_at: vec![u64::MAX; n],
            fast_pending: vec![false; n],
            reached: 1,
        };
        flight.received[root.index()] = Some(slot);
        flight.ready_at[root.index()] = slot;
        flight.fast_pending[root.index()] = plans[plan].ranked.is_fast(root);
        self.flights.push_back(flight);
    }

    /// Simulates one slot for every packet in flight.
    pub fn advance<R: Rng + ?Sized>(
        &mut self,
        net: &Network,
        plans: &[BroadcastPlan],
        slot: u64,
        rng: &mut R,
        report: &mut SlotReport,
        log: Option<&mut Vec<SlotRecord>>,
    ) {
        let n = self.chosen.len();
        self.senders.clear();
        for v in 0..n {
            let node = NodeId::from(v);
            self.chosen[v] = None;
            for (i, f) in self.flights.iter().enumerate() {
                if f.ready_at[v] > slot {
                    continue;
                }
                let plan = &plans[f.plan];
                let d = plan.ranked.tree().depth_of(node);
                if f.fast_pending[v] && plan.params.fast_reserved(d, plan.ranked.rank(node), slot) {
                    self.chosen[v] = Some((i, Role::Fast));
                    break;
                }
                if plan.params.slow_reserved(d, slot) && f.needs_contention(plan, node) {
                    if rng.random_bool(plan.params.slow_prob) {
                        self.chosen[v] = Some((i, Role::Contention));
                    }
                    break;
                }
            }
            self.listening[v] = self.chosen[v].is_none();
            if self.chosen[v].is_some() {
                self.senders.push(node);
            }
        }

        self.decoded.clear();
        if !self.senders.is_empty() {
            net.resolve(&self.senders, &self.listening, &mut self.decoded, None);
        }

        for &(v, u) in &self.decoded {
            let (i, _) = self.chosen[u.index()].expect("decoded senders transmitted");
            let f = &mut self.flights[i];
            let ranked = &plans[f.plan].ranked;
            if ranked.tree().parent(v) == Some(u) && f.received[v.index()].is_none() {
                f.received[v.index()] = Some(slot);
                f.ready_at[v.index()] = slot + 1;
                f.fast_pending[v.index()] = ranked.is_fast(v);
                f.reached += 1;
            } else {
                report.ignored += 1;
            }
        }

        for &u in &self.senders {
            if let Some((i, Role::Fast)) = self.chosen[u.index()] {
                let f = &mut self.flights[i];
                f.fast_pending[u.index()] = false;
                let ranked = &plans[f.plan].ranked;
                for &c in ranked.tree().children(u) {
                    if ranked.rank(c) == ranked.rank(u) && f.received[c.index()].is_none() {
                        report.fast_failures.push(FastLinkFailure {
                            slot,
                            packet: f.packet,
                            parent: u,
                            child: c,
                        });
                    }
                }
            }
        }

        if let Some(log) = log {
            log.push(SlotRecord {
                slot,
                transmitters: self.senders.clone(),
                receptions: self.decoded.clone(),
            });
        }

        let mut i = 0;
        while i < self.flights.len() {
            if self.flights[i].reached == n {
                let f = self.flights.remove(i).expect("index in range");
                report.deliveries.push(Delivery {
                    packet: f.packet,
                    plan: f.plan,
                    launched: f.launched,
                    slot,
                    first_reception: f.received,
                });
            } else {
                i += 1;
            }
        }
    }
}

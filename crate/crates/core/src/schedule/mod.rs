//! Slot reservation and single-packet broadcast along a ranked tree.
//!
//! With `h = max(3, alpha)` and `R` the maximum rank, a fast node at
//! distance `d` with rank `r` owns the slots `t ≡ d + 2h(R - r) (mod 2hR)`
//! and a slow node owns `t ≡ d + h (mod 2h)`. A fast node forwards each
//! packet once, in its next fast slot. A node with children that the fast
//! transmission does not cover (all children of a slow node, lower-rank
//! children of a fast node, or same-rank children that still missed it)
//! transmits with probability `slow_prob` in each of its slow slots until
//! those children hold the packet.

mod pipeline;

use alloc::vec::Vec;

use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::NodeId;
use crate::labst::{build_labst, RankedTree};
use crate::metrics::{select_tmin, TminMode, TreeCharacteristics};
use crate::network::Network;
use crate::rng::{self, Stream};
use crate::topology::BfsTree;

pub use pipeline::{Delivery, FastLinkFailure, SlotRecord};
pub(crate) use pipeline::{Pipeline, SlotReport};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScheduleParams {
    /// Network size used in the logarithms.
    pub node_count: usize,
    /// `max(3, alpha)`.
    pub h: u32,
    pub max_rank: u32,
    /// Tree depth `D(T)`.
    pub depth: u32,
    pub k: f64,
    pub m: f64,
    /// Broadcast length budget `D + 2hR^2 + ceil(32 h R K ln n)`.
    pub delta_len: u64,
    /// Pipelining separation `max(2hR, ceil(16 h K ln n))`. A fast node
    /// forwards one packet per `2hR` slots, so closer packets would queue.
    pub delta_pipe: u64,
    /// Contention transmit probability `min(1, 1/(4K))`.
    pub slow_prob: f64,
}

impl ScheduleParams {
    pub fn new(
        node_count: usize,
        degradation_distance: u32,
        depth: u32,
        max_rank: u32,
        chars: TreeCharacteristics,
    ) -> Self {
        let h = degradation_distance.max(3);
        let hf = f64::from(h);
        let rf = f64::from(max_rank);
        let ln_n = libm::log(node_count as f64);
        let k = chars.k;
        let delta_len = u64::from(depth)
            + 2 * u64::from(h) * u64::from(max_rank) * u64::from(max_rank)
            + libm::ceil(32.0 * hf * rf * k * ln_n) as u64;
        let fast_period = 2 * u64::from(h) * u64::from(max_rank);
        let delta_pipe = (libm::ceil(16.0 * hf * k * ln_n) as u64).max(fast_period);
        let slow_prob = if k < 0.25 { 1.0 } else { 1.0 / (4.0 * k) };
        ScheduleParams {
            node_count,
            h,
            max_rank,
            depth,
            k,
            m: chars.m,
            delta_len,
            delta_pipe,
            slow_prob,
        }
    }

    #[inline]
    pub fn fast_reserved(&self, depth: u32, rank: u32, t: u64) -> bool {
        let h = u64::from(self.h);
        let period = 2 * h * u64::from(self.max_rank);
        let offset = u64::from(depth) + 2 * h * u64::from(self.max_rank - rank);
        t % period == offset % period
    }

    #[inline]
    pub fn slow_reserved(&self, depth: u32, t: u64) -> bool {
        let h = u64::from(self.h);
        t % (2 * h) == (u64::from(depth) + h) % (2 * h)
    }
}

/// Whether slot `t` is reserved for `v` according to its class.
pub fn reserved(v: NodeId, t: u64, params: &ScheduleParams, ranked: &RankedTree) -> bool {
    let d = ranked.tree().depth_of(v);
    if ranked.is_fast(v) {
        params.fast_reserved(d, ranked.rank(v), t)
    } else {
        params.slow_reserved(d, t)
    }
}

/// Everything a source needs to broadcast: its ranked tree and parameters.
#[derive(Debug, Clone)]
pub struct BroadcastPlan {
    pub ranked: RankedTree,
    pub chars: TreeCharacteristics,
    pub params: ScheduleParams,
}

impl BroadcastPlan {
    pub fn new(net: &Network, tmin: BfsTree, chars: TreeCharacteristics) -> Self {
        let ranked = build_labst(net, tmin);
        let params = ScheduleParams::new(
            net.node_count(),
            net.degradation_distance(),
            ranked.tree().depth() as u32,
            ranked.max_rank(),
            chars,
        );
        BroadcastPlan {
            ranked,
            chars,
            params,
        }
    }

    /// Selects the tree for `root`, ranks it and derives the parameters.
    pub fn for_source(net: &Network, root: NodeId, mode: TminMode) -> Result<Self> {
        let (tree, chars) = select_tmin(net, root, mode)?;
        Ok(BroadcastPlan::new(net, tree, chars))
    }

    pub fn source(&self) -> NodeId {
        self.ranked.root()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BroadcastOutcome {
    /// Slot at which each node first accepted the packet; the root holds it
    /// from slot 0.
    pub first_reception: Vec<Option<u64>>,
    /// Last acceptance slot, if every node was reached.
    pub completion_slot: Option<u64>,
    /// Slots simulated.
    pub slots_used: u64,
    pub fast_link_failures: Vec<FastLinkFailure>,
    pub ignored_receptions: u64,
    /// Some node was still unreached when the budget ran out.
    pub violation: bool,
    /// Per-slot transmissions and receptions when requested.
    pub log: Vec<SlotRecord>,
}

impl BroadcastOutcome {
    /// Slots from the start of slot 0 to full delivery.
    pub fn length(&self) -> Option<u64> {
        self.completion_slot.map(|s| s + 1)
    }
}

/// Broadcasts one packet from the plan's root starting at slot 0.
pub fn run_single_broadcast(
    net: &Network,
    plan: &BroadcastPlan,
    packet: u64,
    seed: u64,
    slot_budget: u64,
) -> Result<BroadcastOutcome> {
    run_single_broadcast_logged(net, plan, packet, seed, slot_budget, false)
}

pub fn run_single_broadcast_logged(
    net: &Network,
    plan: &BroadcastPlan,
    packet: u64,
    seed: u64,
    slot_budget: u64,
    record_slots: bool,
) -> Result<BroadcastOutcome> {
    if slot_budget < plan.params.delta_len {
        return Err(Error::InvalidParameter(
            "slot budget is shorter than the schedule length",
        ));
    }
    let mut rng = rng::stream(seed, Stream::Contention);
    run_with_rng(net, plan, packet, slot_budget, record_slots, &mut rng)
}

fn run_with_rng<R: Rng + ?Sized>(
    net: &Network,
    plan: &BroadcastPlan,
    packet: u64,
    slot_budget: u64,
    record_slots: bool,
    rng: &mut R,
) -> Result<BroadcastOutcome> {
    let plans = core::slice::from_ref(plan);
    let mut pipeline = Pipeline::new(net.node_count());
    pipeline.launch(plans, 0, packet, 0);
    let mut report = SlotReport::default();
    let mut log = Vec::new();
    let mut fast_link_failures = Vec::new();
    let mut ignored_receptions = 0;
    let mut slot = 0;
    while slot < slot_budget && !pipeline.is_idle() {
        report.clear();
        let record = if record_slots { Some(&mut log) } else { None };
        pipeline.advance(net, plans, slot, rng, &mut report, record);
        fast_link_failures.extend_from_slice(&report.fast_failures);
        ignored_receptions += report.ignored;
        slot += 1;
    }
    let (first_reception, completion_slot) = match report.deliveries.first() {
        Some(d) => (d.first_reception.clone(), Some(d.slot)),
        None => (pipeline.first_receptions(packet).unwrap_or_default(), None),
    };
    Ok(BroadcastOutcome {
        violation: completion_slot.is_none(),
        first_reception,
        completion_slot,
        slots_used: slot,
        fast_link_failures,
        ignored_receptions,
        log,
    })
}

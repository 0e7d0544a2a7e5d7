//! Dynamic multiple-message broadcast.
//!
//! Sources keep FIFO queues of injected packets and pass a token along a
//! move-big-to-front (MBTF) list. Every pass takes `Δ` slots. When the
//! token's time-to-live runs out the holder looks at its queue:
//!
//! - fewer than `Δ` packets (*empty*): passes the token on (a silent round);
//! - fewer than `nΔ` (*small*): broadcasts `Δ` packets `δ` slots apart, waits
//!   `δ` more slots and passes the token;
//! - otherwise (*big*): moves itself to the front of the list (a discovery)
//!   and broadcasts while it stays big, at least `Δ` packets.
//!
//! `Δ` and `δ` are the maxima of the sources' broadcast lengths and
//! pipelining separations.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::NodeId;
use crate::network::Network;
use crate::rng::{self, Stream};
use crate::schedule::{BroadcastPlan, Pipeline, SlotReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QueueClass {
    Empty,
    Small,
    Big,
}

pub fn classify(queue_len: u64, delta_len: u64, node_count: usize) -> QueueClass {
    if queue_len < delta_len {
        QueueClass::Empty
    } else if queue_len < node_count as u64 * delta_len {
        QueueClass::Small
    } else {
        QueueClass::Big
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InjectionRate {
    One,
    /// `1 / sqrt(1 + δ)`.
    InvSqrtOnePlusDelta,
    /// `1 / (1 + δ)`.
    InvOnePlusDelta,
    /// A fixed per-slot probability.
    Fixed(f64),
}

impl InjectionRate {
    pub fn probability(self, delta_pipe: u64) -> f64 {
        let one_plus = 1.0 + delta_pipe as f64;
        match self {
            InjectionRate::One => 1.0,
            InjectionRate::InvSqrtOnePlusDelta => 1.0 / libm::sqrt(one_plus),
            InjectionRate::InvOnePlusDelta => 1.0 / one_plus,
            InjectionRate::Fixed(p) => p,
        }
    }
}

impl fmt::Display for InjectionRate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InjectionRate::One => f.write_str("1"),
            InjectionRate::InvSqrtOnePlusDelta => f.write_str("1/sqrt(1+delta)"),
            InjectionRate::InvOnePlusDelta => f.write_str("1/(1+delta)"),
            InjectionRate::Fixed(p) => write!(f, "{p}"),
        }
    }
}

impl FromStr for InjectionRate {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "1" | "one" => Ok(InjectionRate::One),
            "inv-sqrt" | "1/sqrt(1+delta)" => Ok(InjectionRate::InvSqrtOnePlusDelta),
            "inv" | "1/(1+delta)" => Ok(InjectionRate::InvOnePlusDelta),
            _ => match s.parse::<f64>() {
                Ok(p) if (0.0..=1.0).contains(&p) => Ok(InjectionRate::Fixed(p)),
                _ => Err(Error::Config(
                    "injection rate must be 1, inv-sqrt, inv or a probability",
                )),
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InjectionPolicy {
    /// Uniformly random source.
    Uniform,
    /// The source after the token holder in id order.
    Next,
    /// The token holder.
    Current,
    /// Uniform over the sources other than the token holder.
    UnifCurr,
}

impl InjectionPolicy {
    pub const ALL: [InjectionPolicy; 4] = [
        InjectionPolicy::Uniform,
        InjectionPolicy::Next,
        InjectionPolicy::Current,
        InjectionPolicy::UnifCurr,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            InjectionPolicy::Uniform => "uniform",
            InjectionPolicy::Next => "next",
            InjectionPolicy::Current => "current",
            InjectionPolicy::UnifCurr => "unif-curr",
        }
    }
}

impl fmt::Display for InjectionPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for InjectionPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(InjectionPolicy::Uniform),
            "next" => Ok(InjectionPolicy::Next),
            "current" => Ok(InjectionPolicy::Current),
            "unif-curr" | "unif_curr" => Ok(InjectionPolicy::UnifCurr),
            _ => Err(Error::Config("unknown injection policy")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InjectionPlan {
    pub rate: InjectionRate,
    pub policy: InjectionPolicy,
}

/// Target source for an injection. `sources` must be sorted and contain
/// `holder`; with a single source `UnifCurr` falls back to the holder.
pub fn injection_target<R: Rng + ?Sized>(
    policy: InjectionPolicy,
    holder: NodeId,
    sources: &[NodeId],
    rng: &mut R,
) -> NodeId {
    match policy {
        InjectionPolicy::Uniform => sources[rng.random_range(0..sources.len())],
        InjectionPolicy::Current => holder,
        InjectionPolicy::Next => {
            let i = sources.binary_search(&holder).unwrap_or_else(|i| i);
            sources[(i + 1) % sources.len()]
        }
        InjectionPolicy::UnifCurr => {
            if sources.len() == 1 {
                return holder;
            }
            let pos = sources.binary_search(&holder).expect("holder is a source");
            let mut i = rng.random_range(0..sources.len() - 1);
            if i >= pos {
                i += 1;
            }
            sources[i]
        }
    }
}

/// Bernoulli injector handing out sequential packet ids.
#[derive(Debug, Clone)]
pub struct Injector {
    probability: f64,
    policy: InjectionPolicy,
    next_packet: u64,
}

impl Injector {
    pub fn new(plan: InjectionPlan, delta_pipe: u64, first_packet: u64) -> Result<Self> {
        let probability = plan.rate.probability(delta_pipe);
        if !(0.0..=1.0).contains(&probability) {
            return Err(Error::InvalidParameter(
                "injection probability must lie in [0, 1]",
            ));
        }
        Ok(Injector {
            probability,
            policy: plan.policy,
            next_packet: first_packet,
        })
    }

    pub fn probability(&self) -> f64 {
        self.probability
    }

    /// At most one injection per call.
    pub fn inject<R: Rng + ?Sized>(
        &mut self,
        holder: NodeId,
        sources: &[NodeId],
        rng: &mut R,
    ) -> Option<(NodeId, u64)> {
        let hit = self.probability >= 1.0
            || (self.probability > 0.0 && rng.random_bool(self.probability));
        if !hit {
            return None;
        }
        let target = injection_target(self.policy, holder, sources, rng);
        let packet = self.next_packet;
        self.next_packet += 1;
        Some((target, packet))
    }
}

/// Source order and token state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MbtfList {
    order: Vec<NodeId>,
    holder: NodeId,
    ttl: u64,
}

impl MbtfList {
    /// List in the given order; the first entry holds the token with an
    /// expired time-to-live.
    pub fn new(order: Vec<NodeId>) -> Self {
        let holder = order[0];
        MbtfList {
            order,
            holder,
            ttl: 0,
        }
    }

    pub fn order(&self) -> &[NodeId] {
        &self.order
    }

    pub fn holder(&self) -> NodeId {
        self.holder
    }

    pub fn ttl(&self) -> u64 {
        self.ttl
    }

    pub fn move_to_front(&mut self, s: NodeId) {
        if let Some(i) = self.order.iter().position(|&x| x == s) {
            self.order[..=i].rotate_right(1);
        }
    }

    pub fn next_after(&self, s: NodeId) -> NodeId {
        let i = self
            .order
            .iter()
            .position(|&x| x == s)
            .expect("listed source");
        self.order[(i + 1) % self.order.len()]
    }

    fn pass(&mut self, ttl: u64) -> NodeId {
        self.holder = self.next_after(self.holder);
        self.ttl = ttl;
        self.holder
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EventKind {
    SilentRound {
        source: NodeId,
    },
    SmallBatch {
        source: NodeId,
    },
    Discovery {
        source: NodeId,
    },
    /// The token left `from` after it launched `launched` packets.
    TokenPass {
        from: NodeId,
        to: NodeId,
        launched: u64,
    },
    /// The first packet of a discovery batch, which carries the list
    /// change, reached every node.
    ListAdopted {
        source: NodeId,
    },
    FastLinkFailure {
        packet: u64,
        parent: NodeId,
        child: NodeId,
    },
    /// A packet needed more than its source's `Δ(s)` slots.
    Overrun {
        packet: u64,
        source: NodeId,
        length: u64,
    },
    /// `ℓ(t)` reached the queue bound.
    QueueBound {
        queue: u64,
        bound: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceEvent {
    pub slot: u64,
    pub kind: EventKind,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TraceCounters {
    pub launched: u64,
    pub silent_rounds: u64,
    pub small_batches: u64,
    pub discoveries: u64,
    pub token_passes: u64,
    pub fast_link_failures: u64,
    pub overruns: u64,
    pub ignored_receptions: u64,
    pub queue_bound_violations: u64,
}

/// Per-slot record of a run. Values are taken at the end of each slot.
#[derive(Debug, Clone, PartialEq)]
pub struct SimTrace {
    pub node_count: usize,
    pub sources: Vec<NodeId>,
    pub delta_len: u64,
    pub delta_pipe: u64,
    pub injection_probability: f64,
    queue: Vec<u64>,
    injected: Vec<u64>,
    delivered: Vec<u64>,
    pub events: Vec<TraceEvent>,
    pub counters: TraceCounters,
    /// Largest `ℓ(t) / bound(t)` seen.
    pub max_bound_ratio: f64,
    pub final_list: Vec<NodeId>,
}

impl SimTrace {
    /// Number of simulated slots.
    pub fn horizon(&self) -> u64 {
        self.queue.len() as u64
    }

    /// `ℓ(t)`: packets waiting in source queues.
    pub fn queue_at(&self, slot: u64) -> u64 {
        self.queue[slot as usize]
    }

    /// Packets injected so far, preloaded ones included.
    pub fn injected_at(&self, slot: u64) -> u64 {
        self.injected[slot as usize]
    }

    /// `d_ALG(t)`: packets received by every node so far.
    pub fn delivered_at(&self, slot: u64) -> u64 {
        self.delivered[slot as usize]
    }

    /// `t δ/(1+δ) + 2Δn²` with `t = slot + 1` slots elapsed.
    pub fn queue_bound(&self, slot: u64) -> f64 {
        queue_bound(slot, self.delta_len, self.delta_pipe, self.node_count)
    }

    pub fn competitive_throughput(&self, slot: u64) -> f64 {
        competitive_throughput(self, slot)
    }
}

pub fn queue_bound(slot: u64, delta_len: u64, delta_pipe: u64, node_count: usize) -> f64 {
    let t = (slot + 1) as f64;
    let d = delta_pipe as f64;
    let n = node_count as f64;
    t * d / (1.0 + d) + 2.0 * delta_len as f64 * n * n
}

/// `d_ALG(t) / d_OPT(t)` where the optimum delivers every packet when it is
/// injected; 1 before the first injection.
pub fn competitive_throughput(trace: &SimTrace, slot: u64) -> f64 {
    let injected = trace.injected_at(slot);
    if injected == 0 {
        1.0
    } else {
        trace.delivered_at(slot) as f64 / injected as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MmbConfig {
    pub total_slots: u64,
    /// Source whose queue starts non-empty; defaults to the lowest id.
    pub preload_source: Option<NodeId>,
    /// Initial queue of the preloaded source; defaults to `2Δδ`.
    pub preload_packets: Option<u64>,
}

impl MmbConfig {
    pub fn new(total_slots: u64) -> Self {
        MmbConfig {
            total_slots,
            preload_source: None,
            preload_packets: None,
        }
    }
}

/// FIFO queue of a source. Preloaded packets are a contiguous id range
/// served before any injected packet.
#[derive(Debug, Clone, Default)]
struct SourceQueue {
    preloaded: core::ops::Range<u64>,
    injected: VecDeque<u64>,
}

impl SourceQueue {
    fn len(&self) -> u64 {
        (self.preloaded.end - self.preloaded.start) + self.injected.len() as u64
    }

    fn pop_front(&mut self) -> Option<u64> {
        self.preloaded.next().or_else(|| self.injected.pop_front())
    }
}

#[derive(Debug, Clone, Copy)]
enum Phase {
    /// Token travelling; the holder acts at `act_at`.
    Transit { act_at: u64 },
    Disseminating {
        next_launch: u64,
        launched: u64,
        big: bool,
    },
}

/// Runs the protocol for `config.total_slots` slots.
///
/// Each slot: the token holder acts (classification sees the queue before
/// this slot's injection), then at most one packet is injected, then the
/// network advances every packet in flight.
pub fn run_mmb(
    net: &Network,
    plans: &[BroadcastPlan],
    plan: InjectionPlan,
    config: &MmbConfig,
    seed: u64,
) -> Result<SimTrace> {
    let n = net.node_count();
    if plans.is_empty() {
        return Err(Error::Config("at least one source is required"));
    }
    if config.total_slots == 0 || config.total_slots > u64::from(u32::MAX) {
        return Err(Error::Config("total slots must be in [1, 2^32)"));
    }
    let mut order: Vec<usize> = (0..plans.len()).collect();
    order.sort_by_key(|&i| plans[i].source());
    let sources: Vec<NodeId> = order.iter().map(|&i| plans[i].source()).collect();
    if sources.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::Config("sources must be distinct"));
    }
    if sources.iter().any(|s| s.index() >= n) {
        return Err(Error::Config("source outside the network"));
    }
    let mut plan_of = vec![usize::MAX; n];
    for &i in &order {
        plan_of[plans[i].source().index()] = i;
    }

    let delta_len = plans.iter().map(|p| p.params.delta_len).max().unwrap_or(1);
    let delta_pipe = plans.iter().map(|p| p.params.delta_pipe).max().unwrap_or(1);

    let mut injector = Injector::new(plan, delta_pipe, 0)?;
    let mut inject_rng = rng::stream(seed, Stream::Injection);
    let mut contention_rng = rng::stream(seed, Stream::Contention);

    let mut queues: Vec<SourceQueue> = vec![SourceQueue::default(); n];
    let preload_source = config.preload_source.unwrap_or(sources[0]);
    if plan_of.get(preload_source.index()) == Some(&usize::MAX) || preload_source.index() >= n {
        return Err(Error::Config("preloaded node is not a source"));
    }
    let preload = config
        .preload_packets
        .unwrap_or_else(|| delta_len.saturating_mul(delta_pipe).saturating_mul(2));
    queues[preload_source.index()].preloaded = 0..preload;
    injector = Injector {
        next_packet: preload,
        ..injector
    };

    let horizon = config.total_slots as usize;
    let mut trace = SimTrace {
        node_count: n,
        sources: sources.clone(),
        delta_len,
        delta_pipe,
        injection_probability: injector.probability(),
        queue: Vec::with_capacity(horizon),
        injected: Vec::with_capacity(horizon),
        delivered: Vec::with_capacity(horizon),
        events: Vec::new(),
        counters: TraceCounters::default(),
        max_bound_ratio: 0.0,
        final_list: Vec::new(),
    };

    let mut list = MbtfList::new(sources.clone());
    let mut phase = Phase::Transit { act_at: 0 };
    let mut pipeline = Pipeline::new(n);
    let mut report = SlotReport::default();
    let mut queue_total = preload;
    let mut injected_total = preload;
    let mut delivered_total = 0u64;
    let mut pending_adoption: Option<u64> = None;

    for slot in 0..config.total_slots {
        // Token holder.
        loop {
            match phase {
                Phase::Transit { act_at } if act_at == slot => {
                    let holder = list.holder();
                    list.ttl = 0;
                    let queued = queues[holder.index()].len();
                    match classify(queued, delta_len, n) {
                        QueueClass::Empty => {
                            trace.counters.silent_rounds += 1;
                            trace.events.push(TraceEvent {
                                slot,
                                kind: EventKind::SilentRound { source: holder },
                            });
                            pass_token(&mut list, &mut trace, slot, delta_len, 0);
                            phase = Phase::Transit {
                                act_at: slot + delta_len,
                            };
                        }
                        QueueClass::Small => {
                            trace.counters.small_batches += 1;
                            trace.events.push(TraceEvent {
                                slot,
                                kind: EventKind::SmallBatch { source: holder },
                            });
                            phase = Phase::Disseminating {
                                next_launch: slot,
                                launched: 0,
                                big: false,
                            };
                        }
                        QueueClass::Big => {
                            trace.counters.discoveries += 1;
                            trace.events.push(TraceEvent {
                                slot,
                                kind: EventKind::Discovery { source: holder },
                            });
                            list.move_to_front(holder);
                            phase = Phase::Disseminating {
                                next_launch: slot,
                                launched: 0,
                                big: true,
                            };
                        }
                    }
                }
                Phase::Disseminating {
                    next_launch,
                    launched,
                    big,
                } if next_launch == slot => {
                    let holder = list.holder();
                    let queue = &mut queues[holder.index()];
                    let more = launched < delta_len
                        || (big && classify(queue.len(), delta_len, n) == QueueClass::Big);
                    match if more { queue.pop_front() } else { None } {
                        Some(packet) => {
                            queue_total -= 1;
                            trace.counters.launched += 1;
                            pipeline.launch(plans, plan_of[holder.index()], packet, slot);
                            if big && launched == 0 {
                                pending_adoption = Some(packet);
                            }
                            phase = Phase::Disseminating {
                                next_launch: slot + delta_pipe,
                                launched: launched + 1,
                                big,
                            };
                        }
                        None => {
                            pass_token(&mut list, &mut trace, slot, delta_len, launched);
                            phase = Phase::Transit {
                                act_at: slot + delta_len,
                            };
                        }
                    }
                }
                _ => break,
            }
            if matches!(phase, Phase::Transit { act_at } if act_at > slot) {
                break;
            }
            if matches!(phase, Phase::Disseminating { next_launch, .. } if next_launch > slot) {
                break;
            }
        }
        if let Phase::Transit { act_at } = phase {
            list.ttl = act_at - slot;
        }

        if let Some((target, packet)) = injector.inject(list.holder(), &sources, &mut inject_rng) {
            queues[target.index()].injected.push_back(packet);
            queue_total += 1;
            injected_total += 1;
        }

        if !pipeline.is_idle() {
            report.clear();
            pipeline.advance(net, plans, slot, &mut contention_rng, &mut report, None);
            trace.counters.ignored_receptions += report.ignored;
            for f in &report.fast_failures {
                trace.counters.fast_link_failures += 1;
                trace.events.push(TraceEvent {
                    slot,
                    kind: EventKind::FastLinkFailure {
                        packet: f.packet,
                        parent: f.parent,
                        child: f.child,
                    },
                });
            }
            for d in &report.deliveries {
                delivered_total += 1;
                let source = plans[d.plan].source();
                let length = slot - d.launched + 1;
                if length > plans[d.plan].params.delta_len {
                    trace.counters.overruns += 1;
                    trace.events.push(TraceEvent {
                        slot,
                        kind: EventKind::Overrun {
                            packet: d.packet,
                            source,
                            length,
                        },
                    });
                }
                if pending_adoption == Some(d.packet) {
                    pending_adoption = None;
                    trace.events.push(TraceEvent {
                        slot,
                        kind: EventKind::ListAdopted { source },
                    });
                }
            }
        }

        let bound = queue_bound(slot, delta_len, delta_pipe, n);
        let ratio = queue_total as f64 / bound;
        if ratio > trace.max_bound_ratio {
            trace.max_bound_ratio = ratio;
        }
        if queue_total as f64 >= bound {
            trace.counters.queue_bound_violations += 1;
            trace.events.push(TraceEvent {
                slot,
                kind: EventKind::QueueBound {
                    queue: queue_total,
                    bound,
                },
            });
        }
        trace.queue.push(queue_total);
        trace.injected.push(injected_total);
        trace.delivered.push(delivered_total);
    }
    trace.final_list = list.order().to_vec();
    Ok(trace)
}

fn pass_token(list: &mut MbtfList, trace: &mut SimTrace, slot: u64, delta_len: u64, launched: u64) {
    let from = list.holder();
    let to = list.pass(delta_len);
    trace.counters.token_passes += 1;
    trace.events.push(TraceEvent {
        slot,
        kind: EventKind::TokenPass { from, to, launched },
    });
}

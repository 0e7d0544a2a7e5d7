//! One experiment: network, sources, per-source plans, MMB run and CSV
//! artifacts.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use mmbcast_core::mmb::{self, EventKind, MmbConfig, SimTrace};
use mmbcast_core::network::{
    radio_network_matrix, required_degradation_distance, sinr_matrix, SinrParams,
};
use mmbcast_core::rng::{self, Stream};
use mmbcast_core::topology::generate;
use mmbcast_core::{BroadcastPlan, Graph, InjectionPlan, Network, NodeId};
use rand::Rng;
use serde::Serialize;

use crate::config::{alpha_rule, ExperimentConfig, MatrixKind};
use crate::error::{Result, SimError};
use crate::netfile;

/// Redraws allowed when no node is picked as a source.
pub const SOURCE_ATTEMPTS: u32 = 32;

/// Node positions for the SINR matrix, uniform in the unit square.
pub fn sinr_positions(n: usize, seed: u64) -> Vec<[f64; 2]> {
    let mut rng = rng::stream(seed, Stream::Positions);
    (0..n)
        .map(|_| [rng.random::<f64>(), rng.random::<f64>()])
        .collect()
}

/// Twice the least power for which every link clears the SINR threshold
/// over the noise alone.
pub fn feasible_power(
    graph: &Graph,
    positions: &[[f64; 2]],
    beta: f64,
    noise: f64,
    path_loss: f64,
) -> f64 {
    let longest = graph
        .links()
        .iter()
        .map(|&(u, v)| mmbcast_core::network::distance(positions[u.index()], positions[v.index()]))
        .fold(0.0, f64::max);
    2.0 * beta * noise.max(f64::MIN_POSITIVE) * longest.powf(path_loss)
}

pub fn build_network(config: &ExperimentConfig) -> Result<Network> {
    if let Some(path) = &config.network_file {
        return netfile::parse(&fs::read_to_string(path)?);
    }
    let graph = generate(config.topology, config.n, config.seed)?;
    let rule = config
        .alpha
        .unwrap_or_else(|| alpha_rule(config.topology, config.n));
    let matrix = match config.matrix {
        MatrixKind::Hop => return Ok(Network::with_hop_matrix(graph, rule)?),
        MatrixKind::Radio => radio_network_matrix(&graph),
        MatrixKind::Sinr => {
            let s = config.sinr;
            let positions = sinr_positions(config.n, config.seed);
            let power = s.power.unwrap_or_else(|| {
                feasible_power(&graph, &positions, s.beta, s.noise, s.path_loss)
            });
            let params = SinrParams {
                power,
                noise: s.noise,
                beta: s.beta,
                path_loss: s.path_loss,
            };
            sinr_matrix(&graph, &positions, params)?
        }
    };
    let required = required_degradation_distance(&graph, &matrix)
        .ok_or_else(|| SimError::Config("the graph is not connected".into()))?;
    let alpha = match config.alpha {
        Some(a) if a < required => {
            return Err(SimError::Config(format!(
                "alpha {a} is below the {required} hops the {} matrix needs",
                config.matrix
            )))
        }
        _ => rule.max(required),
    };
    Ok(Network::new(graph, matrix, alpha)?)
}

/// Each node becomes a source with probability `p`; empty draws are
/// repeated on fresh streams.
pub fn draw_sources(n: usize, p: f64, seed: u64) -> Result<Vec<NodeId>> {
    for attempt in 0..SOURCE_ATTEMPTS {
        let mut rng = rng::substream(seed, Stream::Sources, attempt);
        let sources: Vec<NodeId> = (0..n)
            .filter(|_| rng.random_bool(p))
            .map(NodeId::from)
            .collect();
        if !sources.is_empty() {
            return Ok(sources);
        }
    }
    Err(SimError::Config(format!(
        "no source drawn in {SOURCE_ATTEMPTS} attempts"
    )))
}

pub struct Setup {
    pub network: Network,
    pub plans: Vec<BroadcastPlan>,
    pub preload_source: NodeId,
}

impl Setup {
    pub fn sources(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.plans.iter().map(|p| p.source())
    }
}

pub fn prepare(config: &ExperimentConfig) -> Result<Setup> {
    config.validate()?;
    let network = build_network(config)?;
    let sources = draw_sources(network.node_count(), config.source_probability, config.seed)?;
    let plans = sources
        .iter()
        .map(|&s| BroadcastPlan::for_source(&network, s, config.tmin_mode))
        .collect::<mmbcast_core::Result<Vec<_>>>()?;
    let mut rng = rng::stream(config.seed, Stream::Preload);
    let preload_source = sources[rng.random_range(0..sources.len())];
    Ok(Setup {
        network,
        plans,
        preload_source,
    })
}

pub fn simulate(config: &ExperimentConfig, setup: &Setup) -> Result<SimTrace> {
    let mut mmb_config = MmbConfig::new(config.slots);
    mmb_config.preload_source = Some(setup.preload_source);
    mmb_config.preload_packets = config.preload;
    let plan = InjectionPlan {
        rate: config.rate,
        policy: config.policy,
    };
    Ok(mmb::run_mmb(
        &setup.network,
        &setup.plans,
        plan,
        &mmb_config,
        config.seed,
    )?)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub config_hash: String,
    pub seed: u64,
    pub topology: String,
    pub n: usize,
    pub matrix: String,
    pub alpha: u32,
    pub rate: String,
    pub policy: String,
    pub sources: usize,
    pub preload_source: u32,
    pub delta_len: u64,
    pub delta_pipe: u64,
    pub injection_probability: f64,
    pub slots: u64,
    pub injected: u64,
    pub delivered: u64,
    pub queue_total: u64,
    pub ratio: f64,
    pub max_bound_ratio: f64,
    pub bound_violations: u64,
    pub overruns: u64,
    pub fast_link_failures: u64,
    pub discoveries: u64,
    pub silent_rounds: u64,
    pub token_passes: u64,
}

impl RunSummary {
    pub fn new(config: &ExperimentConfig, setup: &Setup, trace: &SimTrace) -> Self {
        let last = trace.horizon() - 1;
        let c = &trace.counters;
        RunSummary {
            config_hash: config.hash(),
            seed: config.seed,
            topology: config.topology.to_string(),
            n: setup.network.node_count(),
            matrix: config.matrix.to_string(),
            alpha: setup.network.degradation_distance(),
            rate: config.rate.to_string(),
            policy: config.policy.to_string(),
            sources: setup.plans.len(),
            preload_source: setup.preload_source.0,
            delta_len: trace.delta_len,
            delta_pipe: trace.delta_pipe,
            injection_probability: trace.injection_probability,
            slots: trace.horizon(),
            injected: trace.injected_at(last),
            delivered: trace.delivered_at(last),
            queue_total: trace.queue_at(last),
            ratio: trace.competitive_throughput(last),
            max_bound_ratio: trace.max_bound_ratio,
            bound_violations: c.queue_bound_violations,
            overruns: c.overruns,
            fast_link_failures: c.fast_link_failures,
            discoveries: c.discoveries,
            silent_rounds: c.silent_rounds,
            token_passes: c.token_passes,
        }
    }
}

pub struct Outcome {
    pub setup: Setup,
    pub trace: SimTrace,
    pub summary: RunSummary,
}

pub fn execute(config: &ExperimentConfig) -> Result<Outcome> {
    let setup = prepare(config)?;
    let trace = simulate(config, &setup)?;
    let summary = RunSummary::new(config, &setup, &trace);
    Ok(Outcome {
        setup,
        trace,
        summary,
    })
}

/// Runs the experiment and writes its artifacts into `config.out_dir`.
pub fn run_experiment(config: &ExperimentConfig) -> Result<(RunSummary, Vec<PathBuf>)> {
    let outcome = execute(config)?;
    let files = write_artifacts(config, &outcome, &config.out_dir)?;
    Ok((outcome.summary, files))
}

pub const RUN_CSV: &str = "run.csv";
pub const PARAMS_CSV: &str = "params.csv";
pub const PLOT_CSV: &str = "plot.csv";
pub const LABST_CSV: &str = "labst.csv";
pub const CONFIG_TOML: &str = "config.toml";

#[derive(Serialize)]
struct RunRow<'a> {
    slot: u64,
    injected: u64,
    delivered: u64,
    queue_total: u64,
    ratio: f64,
    events: String,
    seed: u64,
    config_hash: &'a str,
}

#[derive(Serialize)]
struct PlotRow<'a> {
    slot: u64,
    injected: u64,
    ratio: f64,
    seed: u64,
    config_hash: &'a str,
}

#[derive(Serialize)]
struct ParamsRow<'a> {
    source: u32,
    preloaded: bool,
    k: f64,
    m: f64,
    objective: f64,
    max_rank: u32,
    depth: u32,
    h: u32,
    delta_len: u64,
    delta_pipe: u64,
    one_plus_delta: u64,
    slow_prob: f64,
    seed: u64,
    config_hash: &'a str,
}

#[derive(Serialize)]
struct LabstRow<'a> {
    source: u32,
    node: u32,
    depth: u32,
    parent: Option<u32>,
    rank: u32,
    fast: bool,
    seed: u64,
    config_hash: &'a str,
}

/// Slots `t - 1` for elapsed times `t` spaced ten per decade, plus the last
/// slot.
pub fn plot_slots(horizon: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut j = 0i32;
    loop {
        let t = 10f64.powf(f64::from(j) / 10.0).round() as u64;
        if t > horizon {
            break;
        }
        if out.last() != Some(&(t - 1)) {
            out.push(t - 1);
        }
        j += 1;
    }
    if out.last() != Some(&(horizon - 1)) {
        out.push(horizon - 1);
    }
    out
}

/// Snapshot slots merged with the plot slots.
pub fn sample_slots(horizon: u64, every: u64) -> Vec<u64> {
    let mut slots: Vec<u64> = (1..=horizon / every).map(|k| k * every - 1).collect();
    slots.extend(plot_slots(horizon));
    slots.sort_unstable();
    slots.dedup();
    slots
}

fn event_name(kind: &EventKind) -> &'static str {
    match kind {
        EventKind::SilentRound { .. } => "silent_round",
        EventKind::SmallBatch { .. } => "small_batch",
        EventKind::Discovery { .. } => "discovery",
        EventKind::TokenPass { .. } => "token_pass",
        EventKind::ListAdopted { .. } => "list_adopted",
        EventKind::FastLinkFailure { .. } => "fast_link_failure",
        EventKind::Overrun { .. } => "overrun",
        EventKind::QueueBound { .. } => "queue_bound",
    }
}

pub fn write_artifacts(
    config: &ExperimentConfig,
    outcome: &Outcome,
    dir: &Path,
) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let hash = config.hash();
    let seed = config.seed;
    let trace = &outcome.trace;
    let mut files = Vec::new();

    let path = dir.join(CONFIG_TOML);
    fs::write(&path, config.to_toml())?;
    files.push(path);

    let path = dir.join(RUN_CSV);
    let mut w = csv::Writer::from_path(&path)?;
    let mut next_event = 0;
    for slot in sample_slots(trace.horizon(), config.snapshot_every) {
        let mut counts: BTreeMap<&str, u64> = BTreeMap::new();
        while next_event < trace.events.len() && trace.events[next_event].slot <= slot {
            *counts
                .entry(event_name(&trace.events[next_event].kind))
                .or_default() += 1;
            next_event += 1;
        }
        let events = counts
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect::<Vec<_>>()
            .join(";");
        w.serialize(RunRow {
            slot,
            injected: trace.injected_at(slot),
            delivered: trace.delivered_at(slot),
            queue_total: trace.queue_at(slot),
            ratio: trace.competitive_throughput(slot),
            events,
            seed,
            config_hash: &hash,
        })?;
    }
    w.flush()?;
    files.push(path);

    let path = dir.join(PLOT_CSV);
    let mut w = csv::Writer::from_path(&path)?;
    for slot in plot_slots(trace.horizon()) {
        w.serialize(PlotRow {
            slot,
            injected: trace.injected_at(slot),
            ratio: trace.competitive_throughput(slot),
            seed,
            config_hash: &hash,
        })?;
    }
    w.flush()?;
    files.push(path);

    let path = dir.join(PARAMS_CSV);
    let mut w = csv::Writer::from_path(&path)?;
    for plan in &outcome.setup.plans {
        let p = &plan.params;
        w.serialize(ParamsRow {
            source: plan.source().0,
            preloaded: plan.source() == outcome.setup.preload_source,
            k: p.k,
            m: p.m,
            objective: plan.chars.objective,
            max_rank: p.max_rank,
            depth: p.depth,
            h: p.h,
            delta_len: p.delta_len,
            delta_pipe: p.delta_pipe,
            one_plus_delta: p.delta_pipe + 1,
            slow_prob: p.slow_prob,
            seed,
            config_hash: &hash,
        })?;
    }
    w.flush()?;
    files.push(path);

    let path = dir.join(LABST_CSV);
    let mut w = csv::Writer::from_path(&path)?;
    for plan in &outcome.setup.plans {
        let ranked = &plan.ranked;
        let tree = ranked.tree();
        for v in outcome.setup.network.graph().nodes() {
            w.serialize(LabstRow {
                source: plan.source().0,
                node: v.0,
                depth: tree.depth_of(v),
                parent: tree.parent(v).map(|p| p.0),
                rank: ranked.rank(v),
                fast: ranked.is_fast(v),
                seed,
                config_hash: &hash,
            })?;
        }
    }
    w.flush()?;
    files.push(path);

    Ok(files)
}

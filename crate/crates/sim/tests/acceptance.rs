//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::collections::BTreeMap;
use std::fs;
use std::process::ExitCode;
use std::time::Instant;

use mmbcast::config::{alpha_rule, ExperimentConfig, MatrixKind};
use mmbcast::experiment::{self, feasible_power};
use mmbcast::sweep;
use mmbcast_core::metrics::{max_avg_layer_affectance, max_path_affectance};
use mmbcast_core::mmb::{InjectionPolicy, InjectionRate};
use mmbcast_core::network::{
    distance, hop_affectance_matrix, radio_network_matrix, required_degradation_distance,
    sinr_matrix, SinrParams,
};
use mmbcast_core::rng::{self, Stream};
use mmbcast_core::schedule::run_single_broadcast;
use mmbcast_core::topology::generate;
use mmbcast_core::{
    build_labst, select_tmin, BfsTree, BroadcastPlan, Graph, KMode, Network, NodeId, TminMode,
    TopologyKind, Transmission,
};
use rand::Rng;

/// Horizon of the long MMB runs.
const HORIZON: u64 = 1_000_000;
/// Seeds per grid cell in the queue-bound grid.
const GRID_SEEDS: u64 = 5;
/// Relative slack on the rate-1 throughput floor.
const THROUGHPUT_SLACK: f64 = 0.1;
/// Required advantage of the lowest injection rate over rate 1.
const RATE_ORDERING: f64 = 3.0;
/// Order of magnitude expected for `1 + δ` at n = 16 on overlapped trees:
/// `round(log10(1 + δ))`.
const ONE_PLUS_DELTA_MAGNITUDE: i32 = 2;
const SINR_INSTANCES: u32 = 1000;
const RANK_INSTANCES: u64 = 200;
const METRIC_INSTANCES: u64 = 100;
const BROADCASTS_PER_TOPOLOGY: u64 = 100;
/// Share of broadcasts allowed to exceed their length budget.
const OVERRUN_SHARE: f64 = 0.05;
/// Hard cap on a broadcast, in multiples of its length budget.
const HARD_CAP: u64 = 10;

type Verdict = Result<String, String>;

fn grid_config(
    n: usize,
    rate: InjectionRate,
    policy: InjectionPolicy,
    seed: u64,
) -> ExperimentConfig {
    ExperimentConfig {
        topology: TopologyKind::OverlapTrees,
        n,
        rate,
        policy,
        seed,
        slots: HORIZON,
        ..ExperimentConfig::default()
    }
}

const RATES: [InjectionRate; 3] = [
    InjectionRate::One,
    InjectionRate::InvSqrtOnePlusDelta,
    InjectionRate::InvOnePlusDelta,
];

fn queue_bound() -> Verdict {
    let mut grid = Vec::new();
    for n in [8, 16] {
        for rate in RATES {
            for policy in InjectionPolicy::ALL {
                for seed in 1..=GRID_SEEDS {
                    grid.push(grid_config(n, rate, policy, seed));
                }
            }
        }
    }
    let rows = sweep::sweep(&grid, false);
    let mut failed_runs = Vec::new();
    let mut errors = Vec::new();
    let mut wide_delta = 0;
    for row in &rows {
        match &row.summary {
            None => errors.push(format!("#{} {}", row.index, row.error)),
            Some(s) => {
                if s.bound_violations > 0 {
                    failed_runs.push(row.index);
                    if s.delta_pipe as usize >= s.n * s.n {
                        wide_delta += 1;
                    }
                }
            }
        }
    }
    if !errors.is_empty() {
        return Err(format!(
            "{} runs errored: {}",
            errors.len(),
            errors.join("; ")
        ));
    }
    if failed_runs.is_empty() {
        return Ok(format!(
            "{} runs x {HORIZON} slots, bound held in every slot",
            rows.len()
        ));
    }
    // Same runs with empty initial queues, to separate the preload from
    // the protocol.
    let retry: Vec<ExperimentConfig> = failed_runs
        .iter()
        .map(|&i| ExperimentConfig {
            preload: Some(0),
            ..grid[i].clone()
        })
        .collect();
    let still = sweep::sweep(&retry, false)
        .iter()
        .filter(|r| r.summary.as_ref().is_none_or(|s| s.bound_violations > 0))
        .count();
    Err(format!(
        "{}/{} runs exceed the bound; {} of them have delta >= n^2 so the 2*Delta*delta preload already \
         exceeds 2*Delta*n^2 at t = 1; without the preload {} of them still exceed it",
        failed_runs.len(),
        rows.len(),
        wide_delta,
        still
    ))
}

fn throughput() -> Verdict {
    let mut problems = Vec::new();
    let mut details = Vec::new();
    for seed in 1..=GRID_SEEDS {
        for policy in InjectionPolicy::ALL {
            let fast = experiment::execute(&grid_config(16, InjectionRate::One, policy, seed))
                .map_err(|e| e.to_string())?;
            let slow = experiment::execute(&grid_config(
                16,
                InjectionRate::InvOnePlusDelta,
                policy,
                seed,
            ))
            .map_err(|e| e.to_string())?;
            let s = &fast.summary;
            let inv = 1.0 / (1.0 + s.delta_pipe as f64);
            let n2 = (s.n * s.n) as f64;
            let floor =
                inv - 2.0 * s.delta_len as f64 * n2 / HORIZON as f64 - THROUGHPUT_SLACK * inv;
            if s.ratio < floor {
                problems.push(format!(
                    "seed {seed} {policy}: rate-1 ratio {:.5} < {floor:.5}",
                    s.ratio
                ));
            }
            let ordering = slow.summary.ratio / s.ratio;
            if ordering < RATE_ORDERING {
                problems.push(format!(
                    "seed {seed} {policy}: 1/(1+delta) ratio {:.5} is {ordering:.2}x the rate-1 ratio {:.5} \
                     (Delta {}, delta {})",
                    slow.summary.ratio, s.ratio, s.delta_len, s.delta_pipe
                ));
            }
            let one_plus = s.delta_pipe + 1;
            if policy == InjectionPolicy::Uniform
                && (one_plus as f64).log10().round() as i32 != ONE_PLUS_DELTA_MAGNITUDE
            {
                problems.push(format!("seed {seed}: 1+delta = {one_plus} is not of order 10^{ONE_PLUS_DELTA_MAGNITUDE}"));
            }
            if policy == InjectionPolicy::Uniform {
                details.push(format!(
                    "seed {seed}: 1+delta {one_plus}, ratios {:.5}/{:.5}",
                    s.ratio, slow.summary.ratio
                ));
            }
        }
    }
    if problems.is_empty() {
        Ok(details.join("; "))
    } else {
        Err(format!(
            "{} checks failed: {}",
            problems.len(),
            problems.join("; ")
        ))
    }
}

/// Random connected graph on `n` nodes with nodes placed in the unit square.
fn sinr_instance(index: u32) -> (Graph, Vec<[f64; 2]>, SinrParams, Vec<NodeId>) {
    let mut rng = rng::substream(0x51_4e_52, Stream::Topology, index);
    let n = rng.random_range(2..=10);
    let graph =
        mmbcast_core::topology::generate_with(TopologyKind::RandomConnected, n, &mut rng).unwrap();
    let positions: Vec<[f64; 2]> = (0..n).map(|_| [rng.random(), rng.random()]).collect();
    let beta = rng.random_range(0.5..4.0);
    let noise = rng.random_range(0.01..1.0);
    let path_loss = rng.random_range(2.0..5.0);
    let power =
        feasible_power(&graph, &positions, beta, noise, path_loss) * rng.random_range(0.6..3.0);
    let transmitters = (0..n)
        .filter(|_| rng.random_bool(0.4))
        .map(NodeId::from)
        .collect();
    (
        graph,
        positions,
        SinrParams {
            power,
            noise,
            beta,
            path_loss,
        },
        transmitters,
    )
}

fn sinr_equivalence() -> Verdict {
    let mut checked = 0u64;
    let mut infeasible = 0;
    let mut mismatches = Vec::new();
    for index in 0..SINR_INSTANCES {
        let (graph, pos, p, tx) = sinr_instance(index);
        let matrix = match sinr_matrix(&graph, &pos, p) {
            Ok(m) => m,
            Err(mmbcast_core::Error::InfeasibleSinrLink { .. }) => {
                infeasible += 1;
                continue;
            }
            Err(e) => return Err(e.to_string()),
        };
        let alpha = required_degradation_distance(&graph, &matrix).unwrap();
        let net = Network::new(graph.clone(), matrix, alpha).map_err(|e| e.to_string())?;
        let listeners: Vec<NodeId> = graph.nodes().filter(|v| !tx.contains(v)).collect();
        let transmissions: Vec<Transmission<()>> = tx
            .iter()
            .map(|&s| Transmission {
                sender: s,
                payload: (),
            })
            .collect();
        let got = net
            .step(&transmissions, &listeners)
            .map_err(|e| e.to_string())?;
        let signal = |w: NodeId, v: NodeId| {
            p.power / distance(pos[w.index()], pos[v.index()]).powf(p.path_loss)
        };
        for &v in &listeners {
            let expected = tx.iter().copied().find(|&u| {
                if !graph.has_link(u, v) {
                    return false;
                }
                let interference: f64 = tx.iter().filter(|&&w| w != u).map(|&w| signal(w, v)).sum();
                signal(u, v) / (p.noise + interference) > p.beta
            });
            checked += 1;
            if got.receptions.get(&v).map(|r| r.sender) != expected {
                mismatches.push(format!("instance {index} listener {v}"));
            }
        }
    }
    let msg = format!(
        "{} feasible instances, {checked} listeners checked, {} mismatches",
        SINR_INSTANCES - infeasible,
        mismatches.len()
    );
    if mismatches.is_empty() && infeasible == 0 {
        Ok(msg)
    } else {
        Err(format!(
            "{msg}; {infeasible} infeasible draws; {}",
            mismatches.join(", ")
        ))
    }
}

fn radio_semantics() -> Verdict {
    let mut graphs = 0u64;
    let mut cases = 0u64;
    for n in 1..=5usize {
        let pairs: Vec<(usize, usize)> = (0..n)
            .flat_map(|u| (0..n).map(move |v| (u, v)))
            .filter(|(u, v)| u != v)
            .collect();
        for links_mask in 0u64..(1 << pairs.len()) {
            let links = pairs
                .iter()
                .enumerate()
                .filter(|(i, _)| links_mask >> i & 1 == 1)
                .map(|(_, &l)| l);
            let graph = Graph::new(n, links).map_err(|e| e.to_string())?;
            let net = Network::new(graph.clone(), radio_network_matrix(&graph), 2)
                .map_err(|e| e.to_string())?;
            graphs += 1;
            for tx_mask in 0u64..(1 << n) {
                let tx: Vec<Transmission<()>> = (0..n)
                    .filter(|i| tx_mask >> i & 1 == 1)
                    .map(|i| Transmission {
                        sender: NodeId::from(i),
                        payload: (),
                    })
                    .collect();
                let listeners: Vec<NodeId> = (0..n)
                    .filter(|i| tx_mask >> i & 1 == 0)
                    .map(NodeId::from)
                    .collect();
                let got = net.step(&tx, &listeners).map_err(|e| e.to_string())?;
                for v in graph.nodes() {
                    let silent = tx_mask >> v.index() & 1 == 0;
                    let talking: Vec<NodeId> = tx
                        .iter()
                        .map(|t| t.sender)
                        .filter(|&u| graph.has_link(u, v))
                        .collect();
                    let expected = (silent && talking.len() == 1).then(|| talking[0]);
                    cases += 1;
                    if got.receptions.get(&v).map(|r| r.sender) != expected {
                        return Err(format!(
                            "mismatch: n={n} links={links_mask:#x} tx={tx_mask:#b} node {v}"
                        ));
                    }
                }
            }
        }
    }
    Ok(format!(
        "{graphs} directed graphs with n <= 5, {cases} node/slot cases, 0 mismatches"
    ))
}

fn rank_bound() -> Verdict {
    let mut violations = Vec::new();
    let mut within_ceil = 0;
    let mut max_rank_seen = 0;
    for i in 0..RANK_INSTANCES {
        let kind = if i % 2 == 0 {
            TopologyKind::OverlapTrees
        } else {
            TopologyKind::Bipartite
        };
        let mut rng = rng::substream(i, Stream::Sources, 0);
        let n = 2 * rng.random_range(2..=8usize);
        let graph = generate(kind, n, i).map_err(|e| e.to_string())?;
        let net =
            Network::with_hop_matrix(graph, alpha_rule(kind, n)).map_err(|e| e.to_string())?;
        let root = NodeId::from(rng.random_range(0..n));
        let (tree, chars) =
            select_tmin(&net, root, TminMode::SingleBfs).map_err(|e| e.to_string())?;
        let ranked = build_labst(&net, tree);
        let r = ranked.max_rank();
        max_rank_seen = max_rank_seen.max(r);
        if f64::from(r) > chars.m.floor() + 1.0 {
            violations.push(format!(
                "instance {i} ({kind}, n={n}): R={r}, M={}",
                chars.m
            ));
        }
        if f64::from(r) <= chars.m.ceil() {
            within_ceil += 1;
        }
    }
    let info = format!(
        "{RANK_INSTANCES} instances, max R {max_rank_seen}; R <= ceil(M) holds in {within_ceil}/{RANK_INSTANCES} ({:.1}%)",
        100.0 * f64::from(within_ceil) / RANK_INSTANCES as f64
    );
    if violations.is_empty() {
        Ok(info)
    } else {
        Err(format!(
            "{info}; R > floor(M)+1 in: {}",
            violations.join(", ")
        ))
    }
}

fn brute_k(net: &Network, tree: &BfsTree) -> f64 {
    let mut best = 0.0f64;
    for d in 0..tree.depth() {
        let layer = tree.layer(d);
        for mask in 1u64..(1 << layer.len()) {
            let set: Vec<NodeId> = layer
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, &u)| u)
                .collect();
            let mut total = 0.0;
            let mut count = 0;
            for &u in &set {
                for &c in tree.children(u) {
                    total += net.affectance_on_link(&set, u, c).unwrap();
                    count += 1;
                }
            }
            if count > 0 {
                best = best.max(total / count as f64);
            }
        }
    }
    best
}

fn brute_m(net: &Network, tree: &BfsTree, u: NodeId, acc: f64) -> f64 {
    if tree.is_leaf(u) {
        return acc;
    }
    let layer = tree.layer(tree.depth_of(u) as usize);
    tree.children(u)
        .iter()
        .map(|&c| {
            brute_m(
                net,
                tree,
                c,
                acc + net.affectance_on_link(layer, u, c).unwrap(),
            )
        })
        .fold(0.0, f64::max)
}

fn metric_oracles() -> Verdict {
    let mut mismatches = Vec::new();
    for i in 0..METRIC_INSTANCES {
        let mut rng = rng::substream(i, Stream::Positions, 7);
        let kind = TopologyKind::ALL[(i % 4) as usize];
        let n = 2 * rng.random_range(2..=5usize);
        let graph = generate(kind, n, i).map_err(|e| e.to_string())?;
        let net = match i % 3 {
            0 => Network::new(graph.clone(), radio_network_matrix(&graph), 2),
            1 => Network::new(graph.clone(), hop_affectance_matrix(&graph, 3), 3),
            _ => {
                let pos: Vec<[f64; 2]> = (0..n).map(|_| [rng.random(), rng.random()]).collect();
                let power = feasible_power(&graph, &pos, 1.0, 0.5, 3.0);
                let m = sinr_matrix(
                    &graph,
                    &pos,
                    SinrParams {
                        power,
                        noise: 0.5,
                        beta: 1.0,
                        path_loss: 3.0,
                    },
                )
                .map_err(|e| e.to_string())?;
                let alpha = required_degradation_distance(&graph, &m).unwrap();
                Network::new(graph.clone(), m, alpha)
            }
        }
        .map_err(|e| e.to_string())?;
        let root = NodeId::from(rng.random_range(0..n));
        let tree =
            mmbcast_core::topology::bfs_tree(net.graph(), root).map_err(|e| e.to_string())?;
        let k = max_avg_layer_affectance(&net, &tree, KMode::Exact).map_err(|e| e.to_string())?;
        let m = max_path_affectance(&net, &tree);
        let (bk, bm) = (brute_k(&net, &tree), brute_m(&net, &tree, root, 0.0));
        if k != bk || m != bm {
            mismatches.push(format!("instance {i}: K {k} vs {bk}, M {m} vs {bm}"));
        }
    }
    if mismatches.is_empty() {
        Ok(format!(
            "{METRIC_INSTANCES} instances (radio, hop, SINR), K and M bitwise equal to brute force"
        ))
    } else {
        Err(mismatches.join("; "))
    }
}

fn broadcast_bound() -> Verdict {
    let mut lines = Vec::new();
    let mut failed = false;
    for kind in TopologyKind::ALL {
        let n = 16;
        let mut over = 0;
        let mut undelivered = 0;
        let mut worst = 0.0f64;
        for seed in 0..BROADCASTS_PER_TOPOLOGY {
            let net = Network::with_hop_matrix(
                generate(kind, n, seed).map_err(|e| e.to_string())?,
                alpha_rule(kind, n),
            )
            .map_err(|e| e.to_string())?;
            let root = NodeId::from(rng::stream(seed, Stream::Sources).random_range(0..n));
            let plan = BroadcastPlan::for_source(&net, root, TminMode::SingleBfs)
                .map_err(|e| e.to_string())?;
            let budget = plan.params.delta_len;
            let out = run_single_broadcast(&net, &plan, 0, seed, HARD_CAP * budget)
                .map_err(|e| e.to_string())?;
            match out.length() {
                Some(len) => {
                    worst = worst.max(len as f64 / budget as f64);
                    if len > budget {
                        over += 1;
                    }
                }
                None => undelivered += 1,
            }
        }
        let share = f64::from(over) / BROADCASTS_PER_TOPOLOGY as f64;
        failed |= share > OVERRUN_SHARE || undelivered > 0;
        lines.push(format!(
            "{kind}: {over} over budget, {undelivered} undelivered, worst {worst:.3} x budget"
        ));
    }
    if failed {
        Err(lines.join("; "))
    } else {
        Ok(lines.join("; "))
    }
}

fn read_dir(dir: &std::path::Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    for entry in walk(dir) {
        let rel = entry
            .strip_prefix(dir)
            .unwrap()
            .to_string_lossy()
            .into_owned();
        out.insert(rel, fs::read(&entry).unwrap());
    }
    out
}

fn walk(dir: &std::path::Path) -> Vec<std::path::PathBuf> {
    let mut files = Vec::new();
    for e in fs::read_dir(dir).unwrap() {
        let p = e.unwrap().path();
        if p.is_dir() {
            files.extend(walk(&p));
        } else {
            files.push(p);
        }
    }
    files.sort();
    files
}

fn determinism() -> Verdict {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let configs = [
        ExperimentConfig {
            topology: TopologyKind::Path,
            rate: InjectionRate::InvOnePlusDelta,
            slots: 200_000,
            ..ExperimentConfig::default()
        },
        ExperimentConfig {
            topology: TopologyKind::OverlapTrees,
            matrix: MatrixKind::Sinr,
            rate: InjectionRate::InvSqrtOnePlusDelta,
            policy: InjectionPolicy::UnifCurr,
            slots: 200_000,
            seed: 9,
            ..ExperimentConfig::default()
        },
    ];
    let mut compared = 0;
    for (i, base) in configs.iter().enumerate() {
        let mut outputs = Vec::new();
        for attempt in 0..2 {
            let config = ExperimentConfig {
                out_dir: tmp.path().join(format!("{i}-{attempt}")),
                ..base.clone()
            };
            experiment::run_experiment(&config).map_err(|e| e.to_string())?;
            outputs.push(read_dir(&config.out_dir));
        }
        if outputs[0] != outputs[1] {
            return Err(format!("config {i} produced different files"));
        }
        compared += outputs[0].len();
    }
    let grid: Vec<ExperimentConfig> = (0..2)
        .map(|k| ExperimentConfig {
            topology: TopologyKind::Bipartite,
            n: 8,
            seed: 3 + k,
            slots: 50_000,
            out_dir: tmp.path().join("sweep"),
            ..ExperimentConfig::default()
        })
        .collect();
    let mut sums = Vec::new();
    for _ in 0..2 {
        let mut buf = Vec::new();
        sweep::write_summary(&sweep::sweep(&grid, false), &mut buf).map_err(|e| e.to_string())?;
        sums.push(buf);
    }
    if sums[0] != sums[1] {
        return Err("sweep summaries differ".into());
    }
    Ok(format!(
        "{compared} experiment files and a sweep summary byte-identical across reruns"
    ))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Verdict); 8] = [
        ("queue bound", queue_bound),
        ("throughput convergence", throughput),
        ("SINR equivalence", sinr_equivalence),
        ("radio network semantics", radio_semantics),
        ("rank bound", rank_bound),
        ("metric oracles", metric_oracles),
        ("single-broadcast bound", broadcast_bound),
        ("determinism", determinism),
    ];
    let only: Vec<usize> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    let mut failures = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let number = i + 1;
        if !only.is_empty() && !only.contains(&number) {
            continue;
        }
        let start = Instant::now();
        let verdict = check();
        let secs = start.elapsed().as_secs_f64();
        match verdict {
            Ok(detail) => println!("criterion {number} PASS {name} ({secs:.1}s): {detail}"),
            Err(detail) => {
                failures += 1;
                println!("criterion {number} FAIL {name} ({secs:.1}s): {detail}");
            }
        }
    }
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

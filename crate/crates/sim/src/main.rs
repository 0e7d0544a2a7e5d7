use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use mmbcast::config::{ExperimentConfig, MatrixKind};
use mmbcast::experiment::{self, build_network};
use mmbcast::{netfile, sweep, SimError};
use mmbcast_core::mmb::{InjectionPolicy, InjectionRate};
use mmbcast_core::schedule::run_single_broadcast_logged;
use mmbcast_core::{NodeId, TminMode, TopologyKind};

#[derive(Parser)]
#[command(
    name = "mmbcast",
    version,
    about = "Multiple-message broadcast simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and write its CSV files.
    Run(ConfigArgs),
    /// Run a grid of experiments and write an aggregated CSV.
    Sweep(SweepArgs),
    /// Write the experiment's network in the network file format.
    Network {
        #[command(flatten)]
        config: ConfigArgs,
        /// Destination; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the ranked tree of one source and trace a single broadcast.
    Labst {
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long, default_value_t = 0)]
        source: u32,
        /// Write the per-slot broadcast trace here.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
}

#[derive(Args, Clone, Default)]
struct ConfigArgs {
    /// TOML file with any of the settings below; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    topology: Option<TopologyKind>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    matrix: Option<MatrixKind>,
    #[arg(long)]
    alpha: Option<u32>,
    /// 1, inv-sqrt, inv or a probability.
    #[arg(long)]
    rate: Option<InjectionRate>,
    /// uniform, next, current or unif-curr.
    #[arg(long)]
    policy: Option<InjectionPolicy>,
    #[arg(long)]
    slots: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// single-bfs or exhaustive.
    #[arg(long)]
    tmin_mode: Option<TminMode>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long)]
    snapshot_every: Option<u64>,
    #[arg(long)]
    network_file: Option<PathBuf>,
    #[arg(long)]
    preload: Option<u64>,
    #[arg(long)]
    source_probability: Option<f64>,
}

impl ConfigArgs {
    fn resolve(&self) -> Result<ExperimentConfig, SimError> {
        let mut c = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        macro_rules! apply {
            ($($field:ident),*) => { $(if let Some(v) = self.$field.clone() { c.$field = v; })* };
        }
        apply!(
            topology,
            n,
            matrix,
            rate,
            policy,
            slots,
            seed,
            tmin_mode,
            out_dir,
            snapshot_every,
            source_probability
        );
        if self.alpha.is_some() {
            c.alpha = self.alpha;
        }
        if self.network_file.is_some() {
            c.network_file = self.network_file.clone();
        }
        if self.preload.is_some() {
            c.preload = self.preload;
        }
        c.validate()?;
        Ok(c)
    }
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    base: ConfigArgs,
    #[arg(long, value_delimiter = ',', default_values_t = [16usize])]
    sizes: Vec<usize>,
    #[arg(long, value_delimiter = ',')]
    topologies: Vec<TopologyKind>,
    #[arg(long, value_delimiter = ',', default_values = ["1", "inv-sqrt", "inv"])]
    rates: Vec<InjectionRate>,
    #[arg(long, value_delimiter = ',', default_values = ["uniform", "next", "current", "unif-curr"])]
    policies: Vec<InjectionPolicy>,
    /// Seeds `seed, seed + 1, ...`.
    #[arg(long, default_value_t = 1)]
    seeds: u64,
    /// Also write every entry's files.
    #[arg(long)]
    artifacts: bool,
}

fn grid(args: &SweepArgs) -> Result<Vec<ExperimentConfig>, SimError> {
    let base = args.base.resolve()?;
    let topologies = if args.topologies.is_empty() {
        vec![base.topology]
    } else {
        args.topologies.clone()
    };
    let mut out = Vec::new();
    for &n in &args.sizes {
        for &topology in &topologies {
            for &rate in &args.rates {
                for &policy in &args.policies {
                    for k in 0..args.seeds {
                        let mut c = base.clone();
                        c.n = n;
                        c.topology = topology;
                        c.rate = rate;
                        c.policy = policy;
                        c.seed = base.seed + k;
                        out.push(c);
                    }
                }
            }
        }
    }
    Ok(out)
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Run(args) => {
            let config = args.resolve()?;
            let (summary, files) = experiment::run_experiment(&config)?;
            println!(
                "ratio {:.6} after {} slots ({} injected, {} delivered); 1+delta = {}",
                summary.ratio,
                summary.slots,
                summary.injected,
                summary.delivered,
                summary.delta_pipe + 1
            );
            if summary.bound_violations > 0 {
                println!("queue bound exceeded in {} slots", summary.bound_violations);
            }
            for f in files {
                println!("wrote {}", f.display());
            }
        }
        Command::Sweep(args) => {
            let configs = grid(&args)?;
            let rows = sweep::sweep(&configs, args.artifacts);
            let out_dir = configs
                .first()
                .map(|c| c.out_dir.clone())
                .unwrap_or_else(|| args.base.resolve().map(|c| c.out_dir).unwrap_or_default());
            let path = out_dir.join("sweep.csv");
            sweep::write_summary_file(&rows, &path)?;
            let failed = rows.iter().filter(|r| !r.error.is_empty()).count();
            println!(
                "{} runs, {} failed; wrote {}",
                rows.len(),
                failed,
                path.display()
            );
        }
        Command::Network { config, out } => {
            let config = config.resolve()?;
            let text = netfile::render(&build_network(&config)?);
            match out {
                Some(path) => std::fs::write(&path, text)
                    .with_context(|| format!("writing {}", path.display()))?,
                None => print!("{text}"),
            }
        }
        Command::Labst {
            config,
            source,
            trace,
        } => {
            let config = config.resolve()?;
            let network = build_network(&config)?;
            let net = &network;
            let source = NodeId(source);
            if source.index() >= net.node_count() {
                return Err(
                    SimError::Config(format!("source {source} is outside the network")).into(),
                );
            }
            let plan = mmbcast_core::BroadcastPlan::for_source(net, source, config.tmin_mode)?;
            println!("node,depth,parent,rank,fast");
            for v in net.graph().nodes() {
                let tree = plan.ranked.tree();
                let parent = tree.parent(v).map(|p| p.to_string()).unwrap_or_default();
                println!(
                    "{v},{},{parent},{},{}",
                    tree.depth_of(v),
                    plan.ranked.rank(v),
                    plan.ranked.is_fast(v)
                );
            }
            let budget = 10 * plan.params.delta_len;
            let out =
                run_single_broadcast_logged(net, &plan, 0, config.seed, budget, trace.is_some())?;
            eprintln!(
                "K {} M {} R {} delta_len {}; broadcast length {:?}",
                plan.params.k,
                plan.params.m,
                plan.params.max_rank,
                plan.params.delta_len,
                out.length()
            );
            if let Some(path) = trace {
                let mut w = csv::Writer::from_path(&path)?;
                w.write_record(["slot", "transmitters", "receptions"])?;
                for r in &out.log {
                    let tx = r
                        .transmitters
                        .iter()
                        .map(|u| u.to_string())
                        .collect::<Vec<_>>()
                        .join(" ");
                    let rx = r
                        .receptions
                        .iter()
                        .map(|(v, u)| format!("{u}>{v}"))
                        .collect::<Vec<_>>()
                        .join(" ");
                    w.write_record([r.slot.to_string(), tx, rx])?;
                }
                w.flush()?;
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            let config = e
                .downcast_ref::<SimError>()
                .is_some_and(SimError::is_config);
            ExitCode::from(if config { 2 } else { 1 })
        }
    }
}

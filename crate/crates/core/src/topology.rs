//! Benchmark topologies and BFS trees.

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};
use crate::rng::{self, Stream};

/// Maximum number of `G(n, p)` samples drawn while looking for a connected one.
pub const MAX_CONNECTED_ATTEMPTS: u32 = 10_000;

/// Default limit on enumerated BFS trees.
pub const DEFAULT_ENUMERATION_CAP: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TopologyKind {
    /// Nodes `0..n` chained in order.
    Path,
    /// Complete bipartite graph with parts `0..n/2` and `n/2..n`.
    Bipartite,
    /// Union of two BFS trees of one random connected graph.
    OverlapTrees,
    RandomConnected,
}

impl TopologyKind {
    pub const ALL: [TopologyKind; 4] = [
        TopologyKind::Path,
        TopologyKind::Bipartite,
        TopologyKind::OverlapTrees,
        TopologyKind::RandomConnected,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TopologyKind::Path => "path",
            TopologyKind::Bipartite => "bipartite",
            TopologyKind::OverlapTrees => "overlap-trees",
            TopologyKind::RandomConnected => "random-connected",
        }
    }
}

impl fmt::Display for TopologyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TopologyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "path" => Ok(TopologyKind::Path),
            "bipartite" => Ok(TopologyKind::Bipartite),
            "overlap-trees" | "overlap_trees" => Ok(TopologyKind::OverlapTrees),
            "random-connected" | "random_connected" => Ok(TopologyKind::RandomConnected),
            _ => Err(Error::Config("unknown topology kind")),
        }
    }
}

/// Generates a topology from the topology stream of `seed`.
pub fn generate(kind: TopologyKind, n: usize, seed: u64) -> Result<Graph> {
    generate_with(kind, n, &mut rng::stream(seed, Stream::Topology))
}

pub fn generate_with<R: Rng + ?Sized>(kind: TopologyKind, n: usize, rng: &mut R) -> Result<Graph> {
    if n < 2 {
        return Err(Error::TooFewNodes { node_count: n });
    }
    match kind {
        TopologyKind::Path => Graph::bidirected(n, (1..n).map(|i| (i - 1, i))),
        TopologyKind::Bipartite => {
            if n % 2 != 0 {
                return Err(Error::OddBipartite { node_count: n });
            }
            let half = n / 2;
            Graph::bidirected(n, (0..half).flat_map(|a| (half..n).map(move |b| (a, b))))
        }
        TopologyKind::RandomConnected => random_connected(n, rng),
        TopologyKind::OverlapTrees => {
            let base = random_connected(n, rng)?;
            let first = rng.random_range(0..n);
            let mut second = rng.random_range(0..n - 1);
            if second >= first {
                second += 1;
            }
            let mut edges = BTreeSet::new();
            for root in [first, second] {
                let tree = bfs_tree(&base, NodeId::from(root))?;
                edges.extend(
                    tree.tree_links()
                        .map(|(p, c)| (p.index().min(c.index()), p.index().max(c.index()))),
                );
            }
            Graph::bidirected(n, edges)
        }
    }
}

/// `G(n, p)` with `p = min(1, 2 ln n / n)`, resampled until connected.
fn random_connected<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Graph> {
    let p = (2.0 * libm::log(n as f64) / n as f64).min(1.0);
    for _ in 0..MAX_CONNECTED_ATTEMPTS {
        let mut edges = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                if rng.random_bool(p) {
                    edges.push((i, j));
                }
            }
        }
        let g = Graph::bidirected(n, edges)?;
        if g.bfs_distances(NodeId(0)).iter().all(Option::is_some) {
            return Ok(g);
        }
    }
    Err(Error::NoConnectedSample {
        attempts: MAX_CONNECTED_ATTEMPTS,
    })
}

/// A layered spanning tree whose depths are the BFS distances from the root.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BfsTree {
    root: NodeId,
    parent: Vec<Option<NodeId>>,
    depth_of: Vec<u32>,
    layers: Vec<Vec<NodeId>>,
    children: Vec<Vec<NodeId>>,
}

impl BfsTree {
    /// Builds a tree from explicit parent choices, checking that every tree
    /// link is a graph link joining consecutive BFS layers.
    pub fn from_parents(graph: &Graph, root: NodeId, parent: Vec<Option<NodeId>>) -> Result<Self> {
        let n = graph.node_count();
        if parent.len() != n || root.index() >= n {
            return Err(Error::InvalidTree("parent map does not cover the graph"));
        }
        let dist = reachable_distances(graph, root)?;
        for v in graph.nodes() {
            match parent[v.index()] {
                None if v == root => {}
                Some(p) if v != root => {
                    if p.index() >= n || !graph.has_link(p, v) {
                        return Err(Error::InvalidTree("tree link is not a graph link"));
                    }
                    if dist[p.index()] + 1 != dist[v.index()] {
                        return Err(Error::InvalidTree("parent is not in the previous layer"));
                    }
                }
                _ => return Err(Error::InvalidTree("only the root lacks a parent")),
            }
        }
        Ok(Self::assemble(root, parent, dist))
    }

    fn assemble(root: NodeId, parent: Vec<Option<NodeId>>, depth_of: Vec<u32>) -> Self {
        let n = parent.len();
        let depth = depth_of.iter().copied().max().unwrap_or(0) as usize;
        let mut layers = vec![Vec::new(); depth + 1];
        let mut children = vec![Vec::new(); n];
        for v in 0..n {
            layers[depth_of[v] as usize].push(NodeId::from(v));
            if let Some(p) = parent[v] {
                children[p.index()].push(NodeId::from(v));
            }
        }
        BfsTree {
            root,
            parent,
            depth_of,
            layers,
            children,
        }
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn node_count(&self) -> usize {
        self.parent.len()
    }

    pub fn parent(&self, v: NodeId) -> Option<NodeId> {
        self.parent[v.index()]
    }

    pub fn parents(&self) -> &[Option<NodeId>] {
        &self.parent
    }

    /// Distance of `v` from the root.
    #[inline]
    pub fn depth_of(&self, v: NodeId) -> u32 {
        self.depth_of[v.index()]
    }

    /// Depth of the tree, `D(T)`.
    pub fn depth(&self) -> usize {
        self.layers.len() - 1
    }

    pub fn layers(&self) -> &[Vec<NodeId>] {
        &self.layers
    }

    /// Nodes at distance `d`, ascending.
    pub fn layer(&self, d: usize) -> &[NodeId] {
        &self.layers[d]
    }

    /// Children of `u`, ascending.
    #[inline]
    pub fn children(&self, u: NodeId) -> &[NodeId] {
        &self.children[u.index()]
    }

    pub fn is_leaf(&self, u: NodeId) -> bool {
        self.children[u.index()].is_empty()
    }

    /// Tree links `(parent, child)`, ordered by parent then child.
    pub fn tree_links(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.children
            .iter()
            .enumerate()
            .flat_map(|(p, cs)| cs.iter().map(move |&c| (NodeId::from(p), c)))
    }

    /// Nodes of layer `d` that have at least one child.
    pub fn non_leaf(&self, d: usize) -> impl Iterator<Item = NodeId> + '_ {
        self.layers[d].iter().copied().filter(|&u| !self.is_leaf(u))
    }
}

fn reachable_distances(graph: &Graph, root: NodeId) -> Result<Vec<u32>> {
    graph
        .bfs_distances(root)
        .into_iter()
        .enumerate()
        .map(|(v, d)| {
            d.ok_or(Error::Disconnected {
                root,
                unreachable: NodeId::from(v),
            })
        })
        .collect()
}

/// Candidate parents of each node: in-neighbors one layer closer to the root.
fn parent_choices(graph: &Graph, dist: &[u32]) -> Vec<Vec<NodeId>> {
    let mut choices = vec![Vec::new(); graph.node_count()];
    for &(u, v) in graph.links() {
        if dist[u.index()] + 1 == dist[v.index()] {
            choices[v.index()].push(u);
        }
    }
    choices
}

/// BFS tree in which every node takes its lowest-id candidate parent.
pub fn bfs_tree(graph: &Graph, root: NodeId) -> Result<BfsTree> {
    if root.index() >= graph.node_count() {
        return Err(Error::NodeOutOfRange {
            node: root.index(),
            node_count: graph.node_count(),
        });
    }
    let dist = reachable_distances(graph, root)?;
    let parent = parent_choices(graph, &dist)
        .into_iter()
        .map(|c| c.first().copied())
        .collect();
    Ok(BfsTree::assemble(root, parent, dist))
}

#[derive(Debug, Clone)]
pub struct BfsEnumeration {
    pub trees: Vec<BfsTree>,
    /// Number of distinct BFS trees, saturating at `u128::MAX`.
    pub total: u128,
    /// `true` if `trees` stops short of `total`.
    pub truncated: bool,
}

/// Enumerates BFS trees rooted at `root` as the product of per-node parent
/// choices, in lexicographic order of the parent vector, up to `cap` trees.
pub fn enumerate_bfs_trees(graph: &Graph, root: NodeId, cap: usize) -> Result<BfsEnumeration> {
    if root.index() >= graph.node_count() {
        return Err(Error::NodeOutOfRange {
            node: root.index(),
            node_count: graph.node_count(),
        });
    }
    let dist = reachable_distances(graph, root)?;
    let choices = parent_choices(graph, &dist);
    let total = choices
        .iter()
        .map(|c| c.len().max(1) as u128)
        .fold(1u128, u128::saturating_mul);

    // Mixed-radix counter; the highest node id varies fastest.
    let mut digits = vec![0usize; choices.len()];
    let mut trees = Vec::new();
    while trees.len() < cap {
        let parent = choices
            .iter()
            .zip(&digits)
            .map(|(c, &i)| c.get(i).copied())
            .collect();
        trees.push(BfsTree::assemble(root, parent, dist.clone()));
        let mut pos = digits.len();
        loop {
            if pos == 0 {
                return Ok(BfsEnumeration {
                    total,
                    truncated: false,
                    trees,
                });
            }
            pos -= 1;
            digits[pos] += 1;
            if digits[pos] < choices[pos].len() {
                break;
            }
            digits[pos] = 0;
        }
    }
    let truncated = (trees.len() as u128) < total;
    Ok(BfsEnumeration {
        trees,
        total,
        truncated,
    })
}

//! Tree characteristics.
//!
//! - `K`, the maximum average tree-layer affectance: over layers `d` and
//!   sets `V' ⊆ V_d`, the largest `a_{V'}(L(V')) / |L(V')|`, where `L(V')`
//!   are the tree links from `V'` to layer `d + 1`. Sets without tree links
//!   have no average and are skipped.
//! - `M`, the maximum path affectance: over root-to-leaf paths, the largest
//!   sum of `a_{V_d(u)}((u, v))` along the path.
//!
//! Leaves of a layer add affectance to `V'` without adding links, so the
//! maximizing `V'` always contains all of them. Exact `K` therefore only
//! enumerates subsets of the layer's non-leaf nodes, each joined with the
//! layer's leaves. All sums are accumulated in ascending node/link order.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::graph::{LinkId, NodeId};
use crate::network::Network;
use crate::topology::{self, BfsTree, DEFAULT_ENUMERATION_CAP};

/// Largest number of non-leaf nodes per layer for exact `K` (`2^20` subsets).
pub const EXACT_K_MAX_NON_LEAF: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KMode {
    /// Maximum over every subset of each layer.
    Exact,
    /// The whole layer as the only candidate set.
    LayerHeuristic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TminMode {
    /// Enumerate all BFS trees and minimize the objective with exact `K`.
    Exhaustive,
    /// Lowest-parent BFS tree with the layer heuristic for `K`.
    SingleBfs,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TreeCharacteristics {
    pub k: f64,
    pub m: f64,
    /// `M (M / log2 n + K)`.
    pub objective: f64,
}

impl TminMode {
    pub fn as_str(self) -> &'static str {
        match self {
            TminMode::Exhaustive => "exhaustive",
            TminMode::SingleBfs => "single-bfs",
        }
    }
}

impl core::fmt::Display for TminMode {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl core::str::FromStr for TminMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exhaustive" => Ok(TminMode::Exhaustive),
            "single-bfs" | "single_bfs" => Ok(TminMode::SingleBfs),
            _ => Err(Error::Config(
                "tree selection must be exhaustive or single-bfs",
            )),
        }
    }
}

pub fn objective(k: f64, m: f64, node_count: usize) -> f64 {
    m * (m / libm::log2(node_count as f64) + k)
}

struct LayerLinks {
    /// Non-leaf senders of the layer, ascending.
    senders: Vec<NodeId>,
    leaves: Vec<NodeId>,
    /// Tree links of each sender, ascending by child.
    links: Vec<Vec<LinkId>>,
}

fn layer_links(net: &Network, tree: &BfsTree, d: usize) -> LayerLinks {
    let senders: Vec<NodeId> = tree.non_leaf(d).collect();
    let leaves = tree
        .layer(d)
        .iter()
        .copied()
        .filter(|&u| tree.is_leaf(u))
        .collect();
    let links = senders
        .iter()
        .map(|&u| {
            tree.children(u)
                .iter()
                .map(|&c| {
                    net.graph()
                        .link_id(u, c)
                        .expect("tree links are graph links")
                })
                .collect()
        })
        .collect();
    LayerLinks {
        senders,
        leaves,
        links,
    }
}

/// `a_{V'}(L(V')) / |L(V')|` for `V'` = the senders selected by `mask` plus
/// the layer's leaves.
fn subset_average(net: &Network, layer: &LayerLinks, mask: u64, members: &mut Vec<NodeId>) -> f64 {
    members.clear();
    members.extend(
        layer
            .senders
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, &u)| u),
    );
    members.extend_from_slice(&layer.leaves);
    members.sort_unstable();
    let mut total = 0.0;
    let mut count = 0usize;
    for (i, links) in layer.links.iter().enumerate() {
        if mask >> i & 1 == 0 {
            continue;
        }
        for &link in links {
            total += net.affectance_from(members, link);
            count += 1;
        }
    }
    total / count as f64
}

/// `K(T)` under the chosen mode. Layers without tree links contribute nothing.
pub fn max_avg_layer_affectance(net: &Network, tree: &BfsTree, mode: KMode) -> Result<f64> {
    let mut best = 0.0f64;
    let mut members = Vec::new();
    for d in 0..tree.depth() {
        let layer = layer_links(net, tree, d);
        let k = layer.senders.len();
        if k == 0 {
            continue;
        }
        match mode {
            KMode::LayerHeuristic => {
                let whole = tree.layer(d);
                let mut total = 0.0;
                let mut count = 0usize;
                for links in &layer.links {
                    for &link in links {
                        total += net.affectance_from(whole, link);
                        count += 1;
                    }
                }
                best = best.max(total / count as f64);
            }
            KMode::Exact => {
                if k > EXACT_K_MAX_NON_LEAF {
                    return Err(Error::ExactLayerTooLarge {
                        depth: d,
                        non_leaf: k,
                    });
                }
                let full = (1u64 << k) - 1;
                for mask in 1..=full {
                    best = best.max(subset_average(net, &layer, mask, &mut members));
                }
            }
        }
    }
    Ok(best)
}

/// `M(T)`: accumulated top-down, so each path sum is added root first.
pub fn max_path_affectance(net: &Network, tree: &BfsTree) -> f64 {
    let mut acc = vec![0.0f64; tree.node_count()];
    let mut best = 0.0f64;
    for d in 0..=tree.depth() {
        let layer = tree.layer(d);
        for &u in layer {
            let here = acc[u.index()];
            if tree.is_leaf(u) {
                best = best.max(here);
                continue;
            }
            for &c in tree.children(u) {
                let link = net
                    .graph()
                    .link_id(u, c)
                    .expect("tree links are graph links");
                acc[c.index()] = here + net.affectance_from(layer, link);
            }
        }
    }
    best
}

pub fn characterize(net: &Network, tree: &BfsTree, mode: KMode) -> Result<TreeCharacteristics> {
    let k = max_avg_layer_affectance(net, tree, mode)?;
    let m = max_path_affectance(net, tree);
    Ok(TreeCharacteristics {
        k,
        m,
        objective: objective(k, m, net.node_count()),
    })
}

/// Picks the broadcast tree for `root`.
///
/// Exhaustive mode returns the first enumerated tree with the smallest
/// objective; it fails if there are more than the default enumeration cap.
pub fn select_tmin(
    net: &Network,
    root: NodeId,
    mode: TminMode,
) -> Result<(BfsTree, TreeCharacteristics)> {
    match mode {
        TminMode::SingleBfs => {
            let tree = topology::bfs_tree(net.graph(), root)?;
            let chars = characterize(net, &tree, KMode::LayerHeuristic)?;
            Ok((tree, chars))
        }
        TminMode::Exhaustive => {
            let all = topology::enumerate_bfs_trees(net.graph(), root, DEFAULT_ENUMERATION_CAP)?;
            if all.truncated {
                return Err(Error::EnumerationCapExceeded {
                    cap: DEFAULT_ENUMERATION_CAP,
                });
            }
            let mut best: Option<(BfsTree, TreeCharacteristics)> = None;
            for tree in all.trees {
                let chars = characterize(net, &tree, KMode::Exact)?;
                if best
                    .as_ref()
                    .map_or(true, |(_, b)| chars.objective < b.objective)
                {
                    best = Some((tree, chars));
                }
            }
            Ok(best.expect("a connected graph has at least one BFS tree"))
        }
    }
}

//! Low-affectance broadcast spanning trees.
//!
//! Every node gets a rank. A node is *fast* when it has a child of its own
//! rank; fast nodes of equal rank and distance form a fast set `F_d^r`, and
//! every link from a fast node to a same-rank child has affectance below 1
//! from the rest of its fast set. Such nodes can then transmit together in a
//! reserved slot. All other nodes are *slow*.
//!
//! The construction starts with rank 1 everywhere and walks the layers from
//! the deepest non-leaf layer up to the root. At layer `d` it first demotes
//! every fast node whose same-rank child link is blocked by its fast set,
//! giving it rank `r + 1`, and then lifts the ranks of all shallower layers
//! to their maximum child rank.

use alloc::vec;
use alloc::vec::Vec;

use crate::graph::NodeId;
use crate::network::Network;
use crate::topology::BfsTree;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankedTree {
    tree: BfsTree,
    rank: Vec<u32>,
    fast: Vec<bool>,
    /// `fast_sets[d][r - 1]`, ascending node ids.
    fast_sets: Vec<Vec<Vec<NodeId>>>,
    max_rank: u32,
}

impl RankedTree {
    pub fn tree(&self) -> &BfsTree {
        &self.tree
    }

    pub fn root(&self) -> NodeId {
        self.tree.root()
    }

    #[inline]
    pub fn rank(&self, u: NodeId) -> u32 {
        self.rank[u.index()]
    }

    #[inline]
    pub fn is_fast(&self, u: NodeId) -> bool {
        self.fast[u.index()]
    }

    /// `R(T)`.
    pub fn max_rank(&self) -> u32 {
        self.max_rank
    }

    /// `F_d^r`; empty for ranks that do not occur.
    pub fn fast_set(&self, d: usize, r: u32) -> &[NodeId] {
        self.fast_sets
            .get(d)
            .and_then(|by_rank| by_rank.get((r as usize).wrapping_sub(1)))
            .map_or(&[], Vec::as_slice)
    }
}

fn members(layer: &[NodeId], rank: &[u32], fast: &[bool], r: u32, out: &mut Vec<NodeId>) {
    out.clear();
    out.extend(
        layer
            .iter()
            .copied()
            .filter(|u| fast[u.index()] && rank[u.index()] == r),
    );
}

/// Ranks `tmin` into a low-affectance broadcast spanning tree.
///
/// Nodes within a fast set are visited in ascending id order and each
/// node's child links in ascending child order. Only links to children of
/// the node's own rank are checked; a demoted node takes the rank of the
/// blocked child plus one.
pub fn build_labst(net: &Network, tmin: BfsTree) -> RankedTree {
    let n = tmin.node_count();
    let depth = tmin.depth();
    let rank_cap = depth as u32 + 1;
    let mut rank = vec![1u32; n];
    let mut fast: Vec<bool> = (0..n).map(|u| !tmin.is_leaf(NodeId::from(u))).collect();
    let mut set = Vec::new();

    for d in (0..depth).rev() {
        let layer = tmin.layer(d);
        for r in 1..=rank_cap {
            members(layer, &rank, &fast, r, &mut set);
            let snapshot = set.clone();
            for &u in &snapshot {
                for &c in tmin.children(u) {
                    if !(fast[u.index()] && rank[u.index()] == r) {
                        break;
                    }
                    if rank[c.index()] != r {
                        continue;
                    }
                    let link = net
                        .graph()
                        .link_id(u, c)
                        .expect("tree links are graph links");
                    if net.affectance_from(&set, link) >= 1.0 {
                        rank[u.index()] = rank[c.index()] + 1;
                        fast[u.index()] = false;
                        members(layer, &rank, &fast, r, &mut set);
                    }
                }
            }
        }

        for upper in (0..d).rev() {
            for &u in tmin.layer(upper) {
                fast[u.index()] = false;
                let Some(r_max) = tmin.children(u).iter().map(|c| rank[c.index()]).max() else {
                    continue;
                };
                if rank[u.index()] <= r_max {
                    rank[u.index()] = r_max;
                    fast[u.index()] = true;
                }
            }
        }
    }

    let max_rank = rank.iter().copied().max().unwrap_or(1);
    let mut fast_sets = vec![vec![Vec::new(); max_rank as usize]; depth + 1];
    for (d, layer) in tmin.layers().iter().enumerate() {
        for &u in layer {
            if fast[u.index()] {
                fast_sets[d][rank[u.index()] as usize - 1].push(u);
            }
        }
    }
    RankedTree {
        tree: tmin,
        rank,
        fast,
        fast_sets,
        max_rank,
    }
}

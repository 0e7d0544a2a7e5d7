//! Directed connectivity graphs with dense node and link ids.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub u32);

impl NodeId {
    #[inline]
    pub const fn index(self) -> usize {
        self.0 as usize
    }
}

impl From<usize> for NodeId {
    fn from(i: usize) -> Self {
        NodeId(i as u32)
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Position of a link in the graph's sorted link list.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LinkId(pub u32);

impl LinkId {
    #[inline]
    pub const fn index(self) -> usize {
        self.0 as usize
    }
}

/// A directed graph over nodes `0..n`.
///
/// Links are kept sorted by `(from, to)` without duplicates, so a [`LinkId`]
/// is stable for a given link set regardless of insertion order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    node_count: usize,
    links: Vec<(NodeId, NodeId)>,
    out_adj: Vec<Vec<NodeId>>,
    in_links: Vec<Vec<LinkId>>,
}

impl Graph {
    pub fn new<I>(node_count: usize, links: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut sorted = Vec::new();
        for (u, v) in links {
            for x in [u, v] {
                if x >= node_count {
                    return Err(Error::NodeOutOfRange {
                        node: x,
                        node_count,
                    });
                }
            }
            if u == v {
                return Err(Error::SelfLoop { node: u.into() });
            }
            sorted.push((NodeId::from(u), NodeId::from(v)));
        }
        sorted.sort_unstable();
        sorted.dedup();

        let mut out_adj = vec![Vec::new(); node_count];
        let mut in_links = vec![Vec::new(); node_count];
        for (i, &(u, v)) in sorted.iter().enumerate() {
            out_adj[u.index()].push(v);
            in_links[v.index()].push(LinkId(i as u32));
        }
        Ok(Graph {
            node_count,
            links: sorted,
            out_adj,
            in_links,
        })
    }

    /// Builds a graph with both directions of every undirected edge.
    pub fn bidirected<I>(node_count: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        Graph::new(
            node_count,
            edges.into_iter().flat_map(|(u, v)| [(u, v), (v, u)]),
        )
    }

    #[inline]
    pub fn node_count(&self) -> usize {
        self.node_count
    }

    #[inline]
    pub fn link_count(&self) -> usize {
        self.links.len()
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.node_count).map(NodeId::from)
    }

    pub fn links(&self) -> &[(NodeId, NodeId)] {
        &self.links
    }

    #[inline]
    pub fn link(&self, id: LinkId) -> (NodeId, NodeId) {
        self.links[id.index()]
    }

    pub fn link_id(&self, from: NodeId, to: NodeId) -> Option<LinkId> {
        self.links
            .binary_search(&(from, to))
            .ok()
            .map(|i| LinkId(i as u32))
    }

    pub fn has_link(&self, from: NodeId, to: NodeId) -> bool {
        self.link_id(from, to).is_some()
    }

    /// Out-neighbors of `u` in ascending id order.
    pub fn out_neighbors(&self, u: NodeId) -> &[NodeId] {
        &self.out_adj[u.index()]
    }

    /// Links into `v`, ordered by ascending sender id.
    pub fn in_links(&self, v: NodeId) -> &[LinkId] {
        &self.in_links[v.index()]
    }

    /// Number of unordered node pairs joined by at least one link.
    pub fn undirected_edge_count(&self) -> usize {
        self.links
            .iter()
            .filter(|&&(u, v)| u < v || !self.has_link(v, u))
            .count()
    }

    /// Hop distances from `root`; `None` for unreachable nodes.
    pub fn bfs_distances(&self, root: NodeId) -> Vec<Option<u32>> {
        let mut dist = vec![None; self.node_count];
        let mut queue = VecDeque::new();
        dist[root.index()] = Some(0);
        queue.push_back(root);
        while let Some(u) = queue.pop_front() {
            let du = dist[u.index()].unwrap_or(0);
            for &v in self.out_neighbors(u) {
                if dist[v.index()].is_none() {
                    dist[v.index()] = Some(du + 1);
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    pub fn hop_distances(&self) -> HopDistances {
        let n = self.node_count;
        let mut hops = Vec::with_capacity(n * n);
        for u in self.nodes() {
            hops.extend(
                self.bfs_distances(u)
                    .into_iter()
                    .map(|d| d.unwrap_or(u32::MAX)),
            );
        }
        HopDistances { n, hops }
    }

    pub fn is_strongly_connected(&self) -> bool {
        self.node_count == 0
            || (self.bfs_distances(NodeId(0)).iter().all(Option::is_some)
                && self
                    .reversed()
                    .bfs_distances(NodeId(0))
                    .iter()
                    .all(Option::is_some))
    }

    fn reversed(&self) -> Graph {
        let rev = self.links.iter().map(|&(u, v)| (v.index(), u.index()));
        // Endpoints were validated on construction.
        Graph::new(self.node_count, rev).expect("reversal of a valid graph")
    }
}

/// All-pairs shortest hop distances.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HopDistances {
    n: usize,
    hops: Vec<u32>,
}

impl HopDistances {
    /// Hops from `from` to `to`, `None` if unreachable.
    #[inline]
    pub fn get(&self, from: NodeId, to: NodeId) -> Option<u32> {
        match self.hops[from.index() * self.n + to.index()] {
            u32::MAX => None,
            h => Some(h),
        }
    }

    /// Largest finite distance.
    pub fn diameter(&self) -> u32 {
        self.hops
            .iter()
            .copied()
            .filter(|&h| h != u32::MAX)
            .max()
            .unwrap_or(0)
    }
}

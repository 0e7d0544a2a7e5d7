//! The affectance interference model.
//!
//! A transmitting node `w` contributes `A(w, (u, v))` to the interference on
//! link `(u, v)`. Contributions add up, and a transmission over `(u, v)` is
//! received iff `v` listens and the total affectance of the other transmitters
//! on the link is below 1.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::graph::{Graph, HopDistances, LinkId, NodeId};

/// Dense `|V| x |E|` matrix, one row per interfering node.
#[derive(Debug, Clone, PartialEq)]
pub struct AffectanceMatrix {
    node_count: usize,
    link_count: usize,
    values: Vec<f64>,
}

impl AffectanceMatrix {
    pub fn zeros(node_count: usize, link_count: usize) -> Self {
        AffectanceMatrix {
            node_count,
            link_count,
            values: vec![0.0; node_count * link_count],
        }
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.node_count, self.link_count)
    }

    #[inline]
    pub fn get(&self, node: NodeId, link: LinkId) -> f64 {
        self.values[node.index() * self.link_count + link.index()]
    }

    #[inline]
    pub fn set(&mut self, node: NodeId, link: LinkId, value: f64) {
        self.values[node.index() * self.link_count + link.index()] = value;
    }

    /// Nonzero entries as `(node, link, value)`, row-major.
    pub fn nonzero(&self) -> impl Iterator<Item = (NodeId, LinkId, f64)> + '_ {
        self.values
            .iter()
            .enumerate()
            .filter(|(_, &v)| v != 0.0)
            .map(|(i, &v)| {
                (
                    NodeId((i / self.link_count) as u32),
                    LinkId((i % self.link_count) as u32),
                    v,
                )
            })
    }
}

/// Radio Network model: a node blocks a link iff it is a neighbor of the
/// receiver or the receiver itself, and is not the sender.
pub fn radio_network_matrix(graph: &Graph) -> AffectanceMatrix {
    let mut a = AffectanceMatrix::zeros(graph.node_count(), graph.link_count());
    for (i, &(u, v)) in graph.links().iter().enumerate() {
        for w in graph.nodes() {
            if w != u && (w == v || graph.has_link(w, v)) {
                a.set(w, LinkId(i as u32), 1.0);
            }
        }
    }
    a
}

/// Physical parameters of the SINR instantiation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SinrParams {
    pub power: f64,
    pub noise: f64,
    /// Reception threshold: a signal is received iff its SINR exceeds it.
    pub beta: f64,
    pub path_loss: f64,
}

/// Euclidean distance between two points.
pub fn distance(a: [f64; 2], b: [f64; 2]) -> f64 {
    libm::hypot(a[0] - b[0], a[1] - b[1])
}

/// SINR model expressed as affectance:
/// `A(w,(u,v)) = (P / d_wv^a) / (P / (beta d_uv^a) - N)` for `w != u`.
///
/// The receiver's own entry `A(v,(u,v))` would be unbounded (`d_vv = 0`); a
/// transmitting receiver never listens, so it is stored as 1 like the other
/// matrices do for a busy receiver.
pub fn sinr_matrix(
    graph: &Graph,
    positions: &[[f64; 2]],
    params: SinrParams,
) -> Result<AffectanceMatrix> {
    if positions.len() != graph.node_count() {
        return Err(Error::InvalidParameter("one position per node is required"));
    }
    if !(params.power > 0.0 && params.beta > 0.0 && params.noise >= 0.0 && params.path_loss > 0.0) {
        return Err(Error::InvalidParameter(
            "SINR power, beta and path loss must be positive",
        ));
    }
    let mut a = AffectanceMatrix::zeros(graph.node_count(), graph.link_count());
    for (i, &(u, v)) in graph.links().iter().enumerate() {
        let d_uv = distance(positions[u.index()], positions[v.index()]);
        let headroom =
            params.power / (params.beta * libm::pow(d_uv, params.path_loss)) - params.noise;
        if !(headroom > 0.0) || !headroom.is_finite() {
            return Err(Error::InfeasibleSinrLink { from: u, to: v });
        }
        for w in graph.nodes() {
            let value = if w == u {
                0.0
            } else if w == v {
                1.0
            } else {
                let d_wv = distance(positions[w.index()], positions[v.index()]);
                if d_wv == 0.0 {
                    return Err(Error::InvalidParameter("node positions must be distinct"));
                }
                params.power / libm::pow(d_wv, params.path_loss) / headroom
            };
            a.set(w, LinkId(i as u32), value);
        }
    }
    Ok(a)
}

/// Hop-distance affectance: with `d` the hops from the interferer to the
/// receiver, the entry is 1 at `d = 0`, `1/d^2` below `alpha`, and 0 from
/// `alpha` on. Sender entries are zero.
pub fn hop_affectance_matrix(graph: &Graph, alpha: u32) -> AffectanceMatrix {
    let hops = graph.hop_distances();
    hop_matrix_with(graph, &hops, alpha)
}

fn hop_matrix_with(graph: &Graph, hops: &HopDistances, alpha: u32) -> AffectanceMatrix {
    let mut a = AffectanceMatrix::zeros(graph.node_count(), graph.link_count());
    for (i, &(j, k)) in graph.links().iter().enumerate() {
        for node in graph.nodes() {
            if node == j {
                continue;
            }
            let value = match hops.get(node, k) {
                Some(0) => 1.0,
                Some(d) if d < alpha => 1.0 / f64::from(d * d),
                _ => 0.0,
            };
            a.set(node, LinkId(i as u32), value);
        }
    }
    a
}

/// Smallest degradation distance for which `matrix` satisfies the network
/// invariant, or `None` if some unreachable node has nonzero affectance.
pub fn required_degradation_distance(graph: &Graph, matrix: &AffectanceMatrix) -> Option<u32> {
    let hops = graph.hop_distances();
    let mut alpha = 1;
    for (w, link, _) in matrix.nonzero() {
        let (_, receiver) = graph.link(link);
        alpha = alpha.max(hops.get(w, receiver)? + 1);
    }
    Some(alpha)
}

/// One node's transmission in a slot.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transmission<P> {
    pub sender: NodeId,
    pub payload: P,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reception<P> {
    pub sender: NodeId,
    pub payload: P,
}

/// Result of one slot.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SlotOutcome<P> {
    /// At most one reception per listener.
    pub receptions: BTreeMap<NodeId, Reception<P>>,
    /// Links whose sender transmitted to a listening receiver with
    /// affectance at least 1.
    pub collisions: Vec<LinkId>,
}

/// Connectivity graph, affectance matrix and degradation distance.
///
/// Immutable after construction.
#[derive(Debug, Clone)]
pub struct Network {
    graph: Graph,
    affectance: AffectanceMatrix,
    degradation_distance: u32,
    hops: HopDistances,
}

impl Network {
    /// Validates the matrix against the graph: shape, non-negative finite
    /// entries, zero sender self-entries, and zero entries from nodes at
    /// least `degradation_distance` hops from a link's receiver.
    pub fn new(
        graph: Graph,
        affectance: AffectanceMatrix,
        degradation_distance: u32,
    ) -> Result<Self> {
        if degradation_distance == 0 {
            return Err(Error::InvalidParameter(
                "degradation distance must be positive",
            ));
        }
        let expected = (graph.node_count(), graph.link_count());
        if affectance.shape() != expected {
            return Err(Error::MatrixShape {
                expected,
                found: affectance.shape(),
            });
        }
        let hops = graph.hop_distances();
        for (i, &(u, v)) in graph.links().iter().enumerate() {
            let link = LinkId(i as u32);
            for w in graph.nodes() {
                let value = affectance.get(w, link);
                if !(value >= 0.0) || !value.is_finite() {
                    return Err(Error::NegativeOrNonFinite {
                        node: w,
                        link: (u, v),
                        value,
                    });
                }
                if value == 0.0 {
                    continue;
                }
                if w == u {
                    return Err(Error::SenderSelfAffectance {
                        link: (u, v),
                        value,
                    });
                }
                let h = hops.get(w, v);
                if h.map_or(true, |h| h >= degradation_distance) {
                    return Err(Error::BeyondDegradationDistance {
                        node: w,
                        link: (u, v),
                        hops: h,
                        alpha: degradation_distance,
                    });
                }
            }
        }
        Ok(Network {
            graph,
            affectance,
            degradation_distance,
            hops,
        })
    }

    /// Hop-distance matrix network, reusing one all-pairs BFS.
    pub fn with_hop_matrix(graph: Graph, alpha: u32) -> Result<Self> {
        if alpha == 0 {
            return Err(Error::InvalidParameter(
                "degradation distance must be positive",
            ));
        }
        let hops = graph.hop_distances();
        let affectance = hop_matrix_with(&graph, &hops, alpha);
        Ok(Network {
            graph,
            affectance,
            degradation_distance: alpha,
            hops,
        })
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn node_count(&self) -> usize {
        self.graph.node_count()
    }

    pub fn matrix(&self) -> &AffectanceMatrix {
        &self.affectance
    }

    pub fn degradation_distance(&self) -> u32 {
        self.degradation_distance
    }

    pub fn hops(&self) -> &HopDistances {
        &self.hops
    }

    #[inline]
    pub fn affectance(&self, node: NodeId, link: LinkId) -> f64 {
        self.affectance.get(node, link)
    }

    /// Sum of `A(u, link)` over `transmitters`, skipping the link's sender.
    /// Terms are added in the order given.
    #[inline]
    pub fn affectance_from(&self, transmitters: &[NodeId], link: LinkId) -> f64 {
        let (sender, _) = self.graph.link(link);
        transmitters
            .iter()
            .filter(|&&u| u != sender)
            .map(|&u| self.affectance.get(u, link))
            .sum()
    }

    /// Affectance of `transmitters` on the link `from -> to`.
    pub fn affectance_on_link(
        &self,
        transmitters: &[NodeId],
        from: NodeId,
        to: NodeId,
    ) -> Result<f64> {
        let link = self
            .graph
            .link_id(from, to)
            .ok_or(Error::UnknownLink { from, to })?;
        for &u in transmitters {
            self.check_node(u)?;
        }
        Ok(self.affectance_from(transmitters, link))
    }

    fn check_node(&self, u: NodeId) -> Result<()> {
        if u.index() >= self.node_count() {
            return Err(Error::NodeOutOfRange {
                node: u.index(),
                node_count: self.node_count(),
            });
        }
        Ok(())
    }

    /// Resolves one slot.
    ///
    /// A listener that can decode several transmissions receives the one
    /// from the lowest-id sender.
    pub fn step<P: Clone>(
        &self,
        transmissions: &[Transmission<P>],
        listeners: &[NodeId],
    ) -> Result<SlotOutcome<P>> {
        let n = self.node_count();
        let mut payload_of: Vec<Option<&P>> = vec![None; n];
        for t in transmissions {
            self.check_node(t.sender)?;
            if payload_of[t.sender.index()].replace(&t.payload).is_some() {
                return Err(Error::DuplicateTransmitter { node: t.sender });
            }
        }
        let mut listening = vec![false; n];
        for &v in listeners {
            self.check_node(v)?;
            if payload_of[v.index()].is_some() {
                return Err(Error::TransmitAndListen { node: v });
            }
            listening[v.index()] = true;
        }
        let mut senders: Vec<NodeId> = transmissions.iter().map(|t| t.sender).collect();
        senders.sort_unstable();

        let mut decoded = Vec::new();
        let mut collisions = Vec::new();
        self.resolve(&senders, &listening, &mut decoded, Some(&mut collisions));

        let receptions = decoded
            .into_iter()
            .map(|(v, u)| {
                let payload = payload_of[u.index()]
                    .cloned()
                    .expect("sender has a payload");
                (v, Reception { sender: u, payload })
            })
            .collect();
        Ok(SlotOutcome {
            receptions,
            collisions,
        })
    }

    /// Core of [`Network::step`] without payloads.
    ///
    /// `senders` must be sorted ascending and disjoint from the listening
    /// nodes. Appends `(listener, sender)` pairs sorted by listener.
    pub(crate) fn resolve(
        &self,
        senders: &[NodeId],
        listening: &[bool],
        decoded: &mut Vec<(NodeId, NodeId)>,
        mut collisions: Option<&mut Vec<LinkId>>,
    ) {
        let start = decoded.len();
        for &u in senders {
            for &v in self.graph.out_neighbors(u) {
                if !listening[v.index()] {
                    continue;
                }
                let link = self.graph.link_id(u, v).expect("adjacency matches links");
                if self.affectance_from(senders, link) < 1.0 {
                    decoded.push((v, u));
                } else if let Some(c) = collisions.as_deref_mut() {
                    c.push(link);
                }
            }
        }
        let tail = &mut decoded[start..];
        tail.sort_unstable();
        let mut kept = start;
        for i in start..decoded.len() {
            if kept == start || decoded[kept - 1].0 != decoded[i].0 {
                decoded[kept] = decoded[i];
                kept += 1;
            }
        }
        decoded.truncate(kept);
        if let Some(c) = collisions {
            c.sort_unstable();
        }
    }
}

use core::fmt;

use crate::graph::NodeId;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A node id is outside `[0, n)`.
    NodeOutOfRange {
        node: usize,
        node_count: usize,
    },
    SelfLoop {
        node: NodeId,
    },
    UnknownLink {
        from: NodeId,
        to: NodeId,
    },
    /// The matrix does not have one row per node and one column per link.
    MatrixShape {
        expected: (usize, usize),
        found: (usize, usize),
    },
    NegativeOrNonFinite {
        node: NodeId,
        link: (NodeId, NodeId),
        value: f64,
    },
    /// A node has nonzero affectance on one of its own outgoing links.
    SenderSelfAffectance {
        link: (NodeId, NodeId),
        value: f64,
    },
    /// Nonzero affectance from a node at least `alpha` hops from the receiver.
    BeyondDegradationDistance {
        node: NodeId,
        link: (NodeId, NodeId),
        hops: Option<u32>,
        alpha: u32,
    },
    /// A node was asked to transmit and listen in the same slot.
    TransmitAndListen {
        node: NodeId,
    },
    DuplicateTransmitter {
        node: NodeId,
    },
    /// The received signal cannot beat the noise floor even without interference.
    InfeasibleSinrLink {
        from: NodeId,
        to: NodeId,
    },
    InvalidParameter(&'static str),
    OddBipartite {
        node_count: usize,
    },
    TooFewNodes {
        node_count: usize,
    },
    Disconnected {
        root: NodeId,
        unreachable: NodeId,
    },
    NoConnectedSample {
        attempts: u32,
    },
    /// Exact `K` would enumerate too many subsets of one layer.
    ExactLayerTooLarge {
        depth: usize,
        non_leaf: usize,
    },
    EnumerationCapExceeded {
        cap: usize,
    },
    /// The tree does not span the network or breaks a BFS invariant.
    InvalidTree(&'static str),
    Config(&'static str),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::NodeOutOfRange { node, node_count } => {
                write!(f, "node {node} out of range for a network of {node_count} nodes")
            }
            Error::SelfLoop { node } => write!(f, "self-loop at node {node}"),
            Error::UnknownLink { from, to } => write!(f, "no link ({from},{to}) in the network"),
            Error::MatrixShape { expected, found } => write!(
                f,
                "affectance matrix is {}x{}, expected {}x{}",
                found.0, found.1, expected.0, expected.1
            ),
            Error::NegativeOrNonFinite { node, link, value } => write!(
                f,
                "affectance of node {node} on link ({},{}) is {value}",
                link.0, link.1
            ),
            Error::SenderSelfAffectance { link, value } => write!(
                f,
                "sender of link ({},{}) has nonzero self-affectance {value}",
                link.0, link.1
            ),
            Error::BeyondDegradationDistance { node, link, hops, alpha } => match hops {
                Some(h) => write!(
                    f,
                    "node {node} is {h} hops from the receiver of ({},{}) but has nonzero affectance (alpha = {alpha})",
                    link.0, link.1
                ),
                None => write!(
                    f,
                    "node {node} cannot reach the receiver of ({},{}) but has nonzero affectance",
                    link.0, link.1
                ),
            },
            Error::TransmitAndListen { node } => {
                write!(f, "node {node} cannot transmit and listen in the same slot")
            }
            Error::DuplicateTransmitter { node } => write!(f, "node {node} transmits twice"),
            Error::InfeasibleSinrLink { from, to } => {
                write!(f, "link ({from},{to}) cannot overcome background noise")
            }
            Error::InvalidParameter(what) => write!(f, "invalid parameter: {what}"),
            Error::OddBipartite { node_count } => {
                write!(f, "a balanced bipartite graph needs an even node count, got {node_count}")
            }
            Error::TooFewNodes { node_count } => write!(f, "need at least 2 nodes, got {node_count}"),
            Error::Disconnected { root, unreachable } => {
                write!(f, "node {unreachable} is unreachable from {root}")
            }
            Error::NoConnectedSample { attempts } => {
                write!(f, "no connected random graph after {attempts} attempts")
            }
            Error::ExactLayerTooLarge { depth, non_leaf } => write!(
                f,
                "layer {depth} has {non_leaf} non-leaf nodes; exact K is limited to {}, use the layer heuristic",
                crate::metrics::EXACT_K_MAX_NON_LEAF
            ),
            Error::EnumerationCapExceeded { cap } => write!(
                f,
                "more than {cap} BFS trees; use single_bfs tree selection"
            ),
            Error::InvalidTree(what) => write!(f, "invalid tree: {what}"),
            Error::Config(what) => write!(f, "configuration error: {what}"),
        }
    }
}

impl core::error::Error for Error {}

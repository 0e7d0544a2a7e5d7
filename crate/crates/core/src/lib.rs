//! Broadcast scheduling and dynamic multiple-message broadcast for multihop
//! wireless networks under an additive affectance interference model.
//!
//! The crate is `no_std` and only needs `alloc`. It contains the pure parts of
//! the simulator:
//!
//! - [`network`]: affectance matrices and single-slot reception semantics
//! - [`topology`]: benchmark graph generators and BFS trees
//! - [`metrics`]: tree characteristics `K` and `M`, and selection of the tree
//!   minimizing `M (M / log2 n + K)`
//! - [`labst`]: ranking a BFS tree into a low-affectance broadcast spanning tree
//! - [`schedule`]: slot reservation and the per-packet broadcast engine
//! - [`mmb`]: the token-based multiple-message broadcast protocol with
//!   adversarial injection
//!
//! File formats, configuration and the command line live in the `mmbcast`
//! crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod error;
pub mod graph;
pub mod labst;
pub mod metrics;
pub mod mmb;
pub mod network;
pub mod rng;
pub mod schedule;
pub mod topology;

pub use error::{Error, Result};
pub use graph::{Graph, LinkId, NodeId};
pub use labst::{build_labst, RankedTree};
pub use metrics::{select_tmin, KMode, TminMode, TreeCharacteristics};
pub use mmb::{run_mmb, InjectionPlan, InjectionPolicy, InjectionRate, MmbConfig, SimTrace};
pub use network::{Network, SlotOutcome, Transmission};
pub use schedule::{BroadcastPlan, ScheduleParams};
pub use topology::{BfsTree, TopologyKind};

//! Group-level networks and statistics.
//!
//! Three directed networks are derived from routing records:
//!
//! * transfer (`H_trans`): edge weight is the share of a group's outgoing
//!   transfers that went to the target;
//! * resolver-distance (`H_res`): every earlier group of a sequence points at
//!   the resolver, contributing 1 for the immediate predecessor and halving
//!   with each further step back;
//! * root-level (`H_root`): `H_res` with groups collapsed onto their roots.

mod centrality;
mod fidelity;
mod network;
mod priors;
mod stats;

pub use centrality::{compute_centralities, CentralityTable, NodeCentrality};
pub use fidelity::{
    fidelity_and_roles, kmeans, moments, Fidelity, FidelityClusters, FidelityReport, KMeansFit,
    RoleMoments, SourceProfile, DISPATCH,
};
pub use network::{build_networks, NetworkKind, Networks, RoutingNetwork};
pub use priors::{compute_priors, GroupPriors, RolePrior};
pub use stats::{network_stats, NetworkStats};

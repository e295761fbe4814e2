//! Simulation and analysis of probabilistic forwarding of coded packets on
//! random geometric graphs.
//!
//! A source at the origin of a Poisson point pattern sends `n` coded
//! packets; every other node forwards each newly received packet with
//! probability `p`, and a node decodes once it holds any `k` packets. The
//! crate samples such networks ([`pointproc`], [`rgg`]), runs the protocol
//! ([`forwarding`]), estimates the percolation curve `θ(λ)`
//! ([`percolation`]) and evaluates the closed-form approximations built on
//! it ([`analysis`]).

pub mod analysis;
pub mod error;
pub mod fmt;
pub mod forwarding;
pub mod graph;
pub mod percolation;
pub mod pointproc;
pub mod rgg;
pub mod seed;
pub mod stats;
mod unionfind;

pub use analysis::{
    binomial_tail, estimate_theta_kn_ext, mean_field_p, min_forward_prob_simulated, receiver_formula, sweep,
    tau_estimate, theta_ext_lower_bounds, Method, PMin, SweepConfig, SweepRow, ThetaExtEstimates,
};
pub use error::{Error, Result};
pub use forwarding::{
    forward_n_packets, forward_one_packet, success_fraction, Condition, ForwardingParams, ForwardingResult,
    PacketOutcome, TrialsSpec,
};
pub use graph::{Graph, Network};
pub use percolation::{theta_at, ThetaTable};
pub use pointproc::{sample_ppp, Point, PointSet, SimDomain};
pub use rgg::{build_rgg, components, extended_cluster, largest_component_fraction, ClusterLabeling, Rgg};
pub use seed::{derive_stream, SeedSpec};
pub use stats::Estimate;
pub use unionfind::UnionFind;

/// Critical intensity of unit-disk continuum percolation in the plane
/// (simulation value). Used for search bounds and regime flags only.
pub const LAMBDA_C: f64 = 1.44;

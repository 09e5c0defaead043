//! Monte Carlo percolation over element hypergraphs.

mod convolve;
mod estimate;
mod rng;
mod sweep;
mod union_find;

pub use convolve::BinomialWindow;
pub use estimate::{
    compare_strategies, estimate_p_ab, estimate_theta, estimate_threshold,
    estimate_threshold_networks, periodic_network, select_ab, CompareOptions, Comparison,
    ComparisonRow, PabEstimate, ThetaEstimate, ThresholdEstimate, THETA_DEFINITION,
    THRESHOLD_METHOD,
};
pub use rng::{derive_seed, sample_rng};
pub(crate) use sweep::Hypergraph;
pub use sweep::{
    newman_ziff_sweep, sample_and_cluster, wrapping_sweep, Clustering, SweepConfig, SweepResult,
};
pub use union_find::UnionFind;

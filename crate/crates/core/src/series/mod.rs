//! Exact high-density expansions of θ by perimeter enumeration.

mod enumerate;
mod poly;

pub use enumerate::{
    enumerate_clusters, theta_series, theta_series_detailed, EnumeratedCluster,
    LocalClusterEnumeration, ThetaSeries, MAX_PERIMETER,
};
pub use poly::{eval_series, EpsilonPolynomial};

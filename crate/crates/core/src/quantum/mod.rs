//! Exact state-vector treatment of the node measurements: GHZ generation
//! from a star of bonds, GHZ fusion and Bell-pair extraction.

mod ops;
mod protocols;
mod state;

pub use ops::{completeness_defect, MeasurementOperator};
pub use protocols::{
    extract_bell, ghz_success_prob, merge_ghz, singlet_conversion_prob, star_measurement_oracle,
    star_measurement_outcomes, Branch, ProtocolOutcome, StarOutcome, FIDELITY_TOL,
    MAX_ORACLE_LINKS, PROB_TOL,
};
pub use state::{PureState, StateVector};

//! Lattice geometry, measurement patterns and percolation networks.

mod graph;
mod io;
mod kind;
mod network;
mod pattern;

pub use graph::{generate_lattice, Edge, Incidence, Lattice, Node};
pub use io::{export_network, import_network, NetworkMeta};
pub use kind::{BasisSite, Boundary, CellBond, LatticeKind, UnitCell};
pub use network::{
    build_network, cep_network, network_stats, qep_network, qep_network_with, Element, ElementKind,
    GeneralizedNetwork, NetworkStats, Strategy,
};
pub use pattern::{
    dice, snub_square, triangular, AppliedPattern, MeasurementPattern, PairRule, Slot,
};

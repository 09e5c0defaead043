//! Entanglement percolation on periodic lattices.
//!
//! The crate covers the whole pipeline: exact verification of the node
//! measurements ([`quantum`]), lattice generation and the measurement
//! patterns that turn bond networks into GHZ hypergraphs ([`lattice`]),
//! Newman–Ziff Monte Carlo over those hypergraphs ([`percolation`]) and
//! exact high-density expansions by perimeter enumeration ([`series`]).

pub mod error;
pub mod lattice;
pub mod numfmt;
pub mod percolation;
pub mod quantum;
pub mod reference;
pub mod series;

pub use error::{Error, Result};

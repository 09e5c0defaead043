//! Published reference values used by the reproduction commands and the
//! acceptance suite.

use serde::Serialize;

use crate::lattice::LatticeKind;
use crate::series::EpsilonPolynomial;

/// Bond threshold tolerance.
pub const BOND_TOLERANCE: f64 = 0.005;
/// Tolerance for thresholds after the measurement pattern is applied.
pub const TRANSFORMED_TOLERANCE: f64 = 0.01;

/// One lattice row of the reference tables.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Reference {
    pub kind: LatticeKind,
    /// Bond percolation threshold `p′_c`.
    pub p_bond: f64,
    /// Threshold `p̂_c` of the transformed network.
    pub p_transformed: f64,
    /// Relative gain in percent.
    pub delta_percent: f64,
    /// Listed `(power, c)` terms of `θ′ = 1 - Σ c ε^power`.
    pub theta_cep: [(usize, i64); 3],
    /// Listed terms of `θ̂`.
    pub theta_qep: [(usize, i64); 3],
    /// Qualified-node fraction `f` as a ratio.
    pub f: (u64, u64),
}

impl Reference {
    fn listed(terms: &[(usize, i64); 3]) -> &[(usize, i64)] {
        let n = terms.iter().take_while(|t| t.1 != 0).count();
        &terms[..n]
    }

    /// Nonzero terms of the bond series.
    pub fn cep_terms(&self) -> &[(usize, i64)] {
        Self::listed(&self.theta_cep)
    }

    pub fn qep_terms(&self) -> &[(usize, i64)] {
        Self::listed(&self.theta_qep)
    }

    /// Highest listed power over both series.
    pub fn order(&self) -> usize {
        self.cep_terms()
            .iter()
            .chain(self.qep_terms())
            .map(|t| t.0)
            .max()
            .unwrap_or(0)
    }

    pub fn cep_series(&self) -> EpsilonPolynomial {
        let terms = self.cep_terms();
        EpsilonPolynomial::one_minus(terms, terms.last().map_or(0, |t| t.0))
    }

    pub fn qep_series(&self) -> EpsilonPolynomial {
        let terms = self.qep_terms();
        EpsilonPolynomial::one_minus(terms, terms.last().map_or(0, |t| t.0))
    }
}

const Z: (usize, i64) = (0, 0);

pub const TABLE: [Reference; 8] = [
    Reference {
        kind: LatticeKind::FourEightEight,
        p_bond: 0.6768,
        p_transformed: 0.6499,
        delta_percent: 4.0,
        theta_cep: [(3, 1), (4, 4), (5, 11)],
        theta_qep: [(3, 1), (4, 4), (5, 4)],
        f: (1, 4),
    },
    Reference {
        kind: LatticeKind::Hexagonal,
        p_bond: 0.6527,
        p_transformed: 0.609,
        delta_percent: 6.7,
        theta_cep: [(3, 1), (4, 3), Z],
        theta_qep: [(3, 1), (4, 1), Z],
        f: (1, 4),
    },
    Reference {
        kind: LatticeKind::Kagome,
        p_bond: 0.5244,
        p_transformed: 0.427,
        delta_percent: 18.6,
        theta_cep: [(4, 1), (6, 6), Z],
        theta_qep: [(4, 1), (7, 2), Z],
        f: (1, 3),
    },
    Reference {
        kind: LatticeKind::Square,
        p_bond: 0.5,
        p_transformed: 0.3928,
        delta_percent: 21.4,
        theta_cep: [(4, 1), (6, 4), Z],
        theta_qep: [(4, 1), (7, 4), Z],
        f: (1, 2),
    },
    Reference {
        kind: LatticeKind::Dice,
        p_bond: 0.4755,
        p_transformed: 0.3755,
        delta_percent: 21.0,
        theta_cep: [(6, 1), (7, 6), Z],
        theta_qep: [(6, 1), (10, 9), Z],
        f: (3, 4),
    },
    Reference {
        kind: LatticeKind::SnubSquare,
        p_bond: 0.4141,
        p_transformed: 0.3447,
        delta_percent: 16.8,
        theta_cep: [(5, 1), (8, 5), Z],
        theta_qep: [(5, 1), (8, 1), Z],
        f: (1, 2),
    },
    Reference {
        kind: LatticeKind::Bowtie,
        p_bond: 0.4045,
        p_transformed: 0.2949,
        delta_percent: 27.1,
        theta_cep: [(6, 1), (8, 4), Z],
        theta_qep: [(6, 1), (11, 4), Z],
        f: (1, 2),
    },
    Reference {
        kind: LatticeKind::Triangular,
        p_bond: 0.3472,
        p_transformed: 0.2735,
        delta_percent: 21.2,
        theta_cep: [(6, 1), (10, 6), Z],
        theta_qep: [(6, 1), (12, 2), Z],
        f: (1, 4),
    },
];

/// Reference row for `kind`.
pub fn reference(kind: LatticeKind) -> &'static Reference {
    TABLE
        .iter()
        .find(|r| r.kind == kind)
        .expect("every lattice kind has a reference row")
}

/// Lattices whose strategy difference is plotted against `p`.
pub const COMPARISON_KINDS: [LatticeKind; 3] = [
    LatticeKind::Triangular,
    LatticeKind::Square,
    LatticeKind::Hexagonal,
];

/// Whether `computed` reproduces every listed term of `listed`.
pub fn series_matches(computed: &EpsilonPolynomial, listed: &[(usize, i64)]) -> bool {
    computed.integer_coefficient(0) == Some(1)
        && listed
            .iter()
            .all(|&(k, c)| k <= computed.order() && computed.integer_coefficient(k) == Some(-c))
}

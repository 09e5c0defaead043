use num_complex::Complex64;

use crate::error::{Error, Result};

/// Tolerance on Schmidt-weight normalisation.
pub const WEIGHT_TOL: f64 = 1e-12;

/// Two-qubit resource `sqrt(phi0)|00> + sqrt(phi1)|11>` held by every bond.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PureState {
    phi0: f64,
    phi1: f64,
}

impl PureState {
    /// Builds a state from its Schmidt weights, requiring `phi0 >= phi1 >= 0`
    /// and `phi0 + phi1 = 1`.
    pub fn new(phi0: f64, phi1: f64) -> Result<Self> {
        if !(phi0.is_finite() && phi1.is_finite()) {
            return Err(Error::Domain("Schmidt weights must be finite".into()));
        }
        if phi1 < 0.0 || phi0 < phi1 {
            return Err(Error::Domain(format!(
                "Schmidt weights must satisfy phi0 >= phi1 >= 0, got ({phi0}, {phi1})"
            )));
        }
        if (phi0 + phi1 - 1.0).abs() > WEIGHT_TOL {
            return Err(Error::Domain(format!(
                "Schmidt weights must sum to 1, got {}",
                phi0 + phi1
            )));
        }
        Ok(Self { phi0, phi1 })
    }

    /// The state with smaller weight `phi1` in `[0, 1/2]`.
    pub fn from_phi1(phi1: f64) -> Result<Self> {
        Self::new(1.0 - phi1, phi1)
    }

    pub fn maximally_entangled() -> Self {
        Self {
            phi0: 0.5,
            phi1: 0.5,
        }
    }

    pub fn phi0(&self) -> f64 {
        self.phi0
    }

    pub fn phi1(&self) -> f64 {
        self.phi1
    }

    /// Two-qubit state vector of the bond.
    pub fn to_state_vector(&self) -> StateVector {
        let mut amps = vec![Complex64::new(0.0, 0.0); 4];
        amps[0] = Complex64::new(self.phi0.sqrt(), 0.0);
        amps[3] = Complex64::new(self.phi1.sqrt(), 0.0);
        StateVector::from_amplitudes(2, amps).expect("four amplitudes for two qubits")
    }
}

/// Pure state of `n` qubits in big-endian basis order: qubit 0 is the most
/// significant bit of the basis index.
///
/// States produced by a measurement branch are left unnormalised; their
/// squared norm is the branch probability.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    pub fn from_amplitudes(n_qubits: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() != 1usize << n_qubits {
            return Err(Error::Domain(format!(
                "{} amplitudes cannot describe {n_qubits} qubits",
                amplitudes.len()
            )));
        }
        Ok(Self {
            n_qubits,
            amplitudes,
        })
    }

    pub fn zeros(n_qubits: usize) -> Self {
        Self {
            n_qubits,
            amplitudes: vec![Complex64::new(0.0, 0.0); 1usize << n_qubits],
        }
    }

    /// `(|0...0> + |1...1>) / sqrt(2)`; for `n = 2` this is the Bell pair `|Phi+>`.
    pub fn ghz(n_qubits: usize) -> Result<Self> {
        if n_qubits == 0 {
            return Err(Error::Domain("a GHZ state needs at least one qubit".into()));
        }
        let mut s = Self::zeros(n_qubits);
        let a = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        s.amplitudes[0] = a;
        let last = s.amplitudes.len() - 1;
        s.amplitudes[last] = a;
        Ok(s)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amplitudes
    }

    /// Squared norm, i.e. the weight of an unnormalised branch.
    pub fn weight(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn normalized(&self) -> Result<Self> {
        let w = self.weight();
        if w <= 0.0 {
            return Err(Error::Contract("cannot normalise the zero vector".into()));
        }
        let s = 1.0 / w.sqrt();
        Ok(Self {
            n_qubits: self.n_qubits,
            amplitudes: self.amplitudes.iter().map(|a| a * s).collect(),
        })
    }

    /// `|<self|other>|^2` for normalised states of equal size.
    pub fn fidelity(&self, other: &StateVector) -> f64 {
        assert_eq!(
            self.n_qubits, other.n_qubits,
            "fidelity between different register sizes"
        );
        let overlap: Complex64 = self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum();
        overlap.norm_sqr()
    }

    /// Kronecker product; the qubits of `self` come first.
    pub fn tensor(&self, other: &StateVector) -> StateVector {
        let mut amps = Vec::with_capacity(self.amplitudes.len() * other.amplitudes.len());
        for a in &self.amplitudes {
            for b in &other.amplitudes {
                amps.push(a * b);
            }
        }
        StateVector {
            n_qubits: self.n_qubits + other.n_qubits,
            amplitudes: amps,
        }
    }

    /// Applies Pauli X to `qubit`.
    pub fn apply_x(&mut self, qubit: usize) {
        let mask = self.bit_mask(qubit);
        for i in 0..self.amplitudes.len() {
            if i & mask == 0 {
                self.amplitudes.swap(i, i | mask);
            }
        }
    }

    /// Applies Pauli Z to `qubit`.
    pub fn apply_z(&mut self, qubit: usize) {
        let mask = self.bit_mask(qubit);
        for (i, a) in self.amplitudes.iter_mut().enumerate() {
            if i & mask != 0 {
                *a = -*a;
            }
        }
    }

    /// Indices of basis states with non-negligible amplitude.
    pub fn support(&self, tol: f64) -> Vec<usize> {
        self.amplitudes
            .iter()
            .enumerate()
            .filter(|(_, a)| a.norm_sqr() > tol)
            .map(|(i, _)| i)
            .collect()
    }

    pub(crate) fn bit_mask(&self, qubit: usize) -> usize {
        assert!(qubit < self.n_qubits, "qubit {qubit} out of range");
        1usize << (self.n_qubits - 1 - qubit)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pure_state_validation() {
        assert!(PureState::new(0.5, 0.5).is_ok());
        assert!(PureState::new(1.0, 0.0).is_ok());
        assert!(matches!(PureState::new(0.4, 0.6), Err(Error::Domain(_))));
        assert!(matches!(PureState::new(0.7, 0.2), Err(Error::Domain(_))));
        assert!(matches!(PureState::new(1.1, -0.1), Err(Error::Domain(_))));
        assert!(PureState::new(f64::NAN, 0.5).is_err());
    }

    #[test]
    fn ghz_is_normalised() {
        for n in 1..=8 {
            let g = StateVector::ghz(n).unwrap();
            assert!((g.weight() - 1.0).abs() < 1e-12);
            assert_eq!(g.support(1e-14), vec![0, (1 << n) - 1]);
        }
        assert!(StateVector::ghz(0).is_err());
    }

    #[test]
    fn big_endian_ordering() {
        let mut s = StateVector::zeros(3);
        s.amplitudes_mut()[0] = Complex64::new(1.0, 0.0);
        s.apply_x(0);
        assert_eq!(s.support(1e-14), vec![0b100]);
        s.apply_x(2);
        assert_eq!(s.support(1e-14), vec![0b101]);
    }

    #[test]
    fn tensor_of_bonds() {
        let p = PureState::new(0.7, 0.3).unwrap().to_state_vector();
        let pp = p.tensor(&p);
        assert_eq!(pp.n_qubits(), 4);
        assert!((pp.amplitudes()[0].re - 0.7).abs() < 1e-12);
        assert!((pp.amplitudes()[15].re - 0.3).abs() < 1e-12);
        assert!((pp.weight() - 1.0).abs() < 1e-12);
    }
}

use num_complex::Complex64;

use super::state::StateVector;
use crate::error::{Error, Result};

/// Operator `|0><m| + |1><m_bar|` mapping `arity` qubits held at one node onto
/// a single qubit. `m_bar` is the bitwise complement of `m`.
///
/// The family `m in [0, 2^(arity-1))` (leading bit of `m` zero) is a complete
/// measurement: every input string is either some `m` or some `m_bar`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MeasurementOperator {
    arity: usize,
    index: u32,
}

impl MeasurementOperator {
    pub fn new(arity: usize, index: u32) -> Result<Self> {
        if arity == 0 || arity > 16 {
            return Err(Error::Domain(format!(
                "operator arity {arity} not in 1..=16"
            )));
        }
        if u64::from(index) >= 1u64 << (arity - 1) {
            return Err(Error::Domain(format!(
                "operator index {index} out of range for arity {arity}"
            )));
        }
        Ok(Self { arity, index })
    }

    /// All `2^(arity-1)` operators of the family.
    pub fn family(arity: usize) -> Result<Vec<Self>> {
        if arity == 0 || arity > 16 {
            return Err(Error::Domain(format!(
                "operator arity {arity} not in 1..=16"
            )));
        }
        Ok((0..1u32 << (arity - 1))
            .map(|index| Self { arity, index })
            .collect())
    }

    /// The two-outcome measurement on the two qubits of a shared node:
    /// the anti-correlated operator `|0><01| + |1><10|` first, then the
    /// correlated `|0><00| + |1><11|`.
    pub fn pair_measurement() -> [Self; 2] {
        [
            Self {
                arity: 2,
                index: 0b01,
            },
            Self {
                arity: 2,
                index: 0b00,
            },
        ]
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn index(&self) -> u32 {
        self.index
    }

    pub fn complement(&self) -> u32 {
        !self.index & ((1u32 << self.arity) - 1)
    }

    /// Output bit for an input string on the measured qubits, if the operator
    /// does not annihilate it.
    pub fn output(&self, input: u32) -> Option<usize> {
        if input == self.index {
            Some(0)
        } else if input == self.complement() {
            Some(1)
        } else {
            None
        }
    }

    /// Applies the operator to `targets` of `state`. The merged qubit takes the
    /// position of `targets[0]`; the remaining targets are removed and the
    /// other qubits keep their relative order. The result is unnormalised.
    pub fn apply(&self, state: &StateVector, targets: &[usize]) -> Result<StateVector> {
        let n = state.n_qubits();
        if targets.len() != self.arity {
            return Err(Error::Domain(format!(
                "operator acts on {} qubits, {} targets given",
                self.arity,
                targets.len()
            )));
        }
        for (i, &t) in targets.iter().enumerate() {
            if t >= n {
                return Err(Error::Domain(format!("target qubit {t} out of range")));
            }
            if targets[..i].contains(&t) {
                return Err(Error::Domain(format!("target qubit {t} repeated")));
            }
        }
        let out_qubits = n - self.arity + 1;
        // Output position of each surviving input qubit.
        let mut out_pos = vec![usize::MAX; n];
        let mut next = 0;
        for (q, pos) in out_pos.iter_mut().enumerate() {
            if q == targets[0] || !targets.contains(&q) {
                *pos = next;
                next += 1;
            }
        }
        let mut out = StateVector::zeros(out_qubits);
        let amps = out.amplitudes_mut();
        for (idx, amp) in state.amplitudes().iter().enumerate() {
            if amp.norm_sqr() == 0.0 {
                continue;
            }
            let bit = |q: usize| (idx >> (n - 1 - q)) & 1;
            let mut input = 0u32;
            for &t in targets {
                input = (input << 1) | bit(t) as u32;
            }
            let Some(merged) = self.output(input) else {
                continue;
            };
            let mut o = 0usize;
            for (q, &pos) in out_pos.iter().enumerate() {
                if pos == usize::MAX {
                    continue;
                }
                let b = if q == targets[0] { merged } else { bit(q) };
                o |= b << (out_qubits - 1 - pos);
            }
            amps[o] += *amp;
        }
        Ok(out)
    }

    /// Matrix element `<row| E^dagger E |col>` on the measured register.
    pub fn effect_element(&self, row: u32, col: u32) -> Complex64 {
        // E^dagger E = |m><m| + |m_bar><m_bar|.
        let diag = row == col && (row == self.index || row == self.complement());
        Complex64::new(if diag { 1.0 } else { 0.0 }, 0.0)
    }
}

/// Largest deviation of `sum_m E_m^dagger E_m` from the identity.
pub fn completeness_defect(arity: usize) -> Result<f64> {
    let family = MeasurementOperator::family(arity)?;
    let dim = 1u32 << arity;
    let mut worst: f64 = 0.0;
    for row in 0..dim {
        for col in 0..dim {
            let sum: Complex64 = family.iter().map(|e| e.effect_element(row, col)).sum();
            let target = if row == col { 1.0 } else { 0.0 };
            worst = worst.max((sum - Complex64::new(target, 0.0)).norm());
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn family_is_complete() {
        for n in 1..=6 {
            assert!(completeness_defect(n).unwrap() < 1e-12, "n = {n}");
        }
    }

    #[test]
    fn index_range_checked() {
        assert!(MeasurementOperator::new(2, 1).is_ok());
        assert!(MeasurementOperator::new(2, 2).is_err());
        assert!(MeasurementOperator::new(0, 0).is_err());
    }

    #[test]
    fn pair_measurement_matches_family() {
        let fam = MeasurementOperator::family(2).unwrap();
        let [anti, corr] = MeasurementOperator::pair_measurement();
        assert!(fam.contains(&anti) && fam.contains(&corr));
        assert_eq!(anti.output(0b01), Some(0));
        assert_eq!(anti.output(0b10), Some(1));
        assert_eq!(corr.output(0b11), Some(1));
        assert_eq!(corr.output(0b01), None);
    }

    #[test]
    fn apply_keeps_order_of_spectators() {
        // |0 1 1> with targets (0, 2) under the anti-correlated operator -> |0 1>.
        let mut s = StateVector::zeros(3);
        s.amplitudes_mut()[0b011] = Complex64::new(1.0, 0.0);
        let [anti, corr] = MeasurementOperator::pair_measurement();
        let out = anti.apply(&s, &[0, 2]).unwrap();
        assert_eq!(out.n_qubits(), 2);
        assert_eq!(out.support(1e-14), vec![0b01]);
        let out = corr.apply(&s, &[0, 2]).unwrap();
        assert!(out.weight() < 1e-14);
        assert!(anti.apply(&s, &[0, 0]).is_err());
        assert!(anti.apply(&s, &[0, 3]).is_err());
    }
}

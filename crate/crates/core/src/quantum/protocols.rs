//! Success probabilities of the node measurements, in closed form and by
//! direct state-vector simulation.

use num_complex::Complex64;

use super::ops::MeasurementOperator;
use super::state::{PureState, StateVector};
use crate::error::{Error, Result};

/// Probability tolerance used by all quantum checks.
pub const PROB_TOL: f64 = 1e-10;
/// Norm and fidelity tolerance.
pub const FIDELITY_TOL: f64 = 1e-12;
/// Largest star handled by the brute-force oracle (2n qubits in memory).
pub const MAX_ORACLE_LINKS: usize = 6;

/// Optimal probability of converting one bond into a maximally entangled pair: `2 phi1`.
pub fn singlet_conversion_prob(state: &PureState) -> f64 {
    (2.0 * state.phi1()).min(1.0)
}

/// Closed-form probability of building an `(n+1)`-qubit GHZ state from `n`
/// bonds sharing a node:
/// `1 - (phi0 - phi1) * sum_{k=0}^{floor((n-1)/2)} C(2k, k) (phi0 phi1)^k`.
pub fn ghz_success_prob(n: usize, state: &PureState) -> Result<f64> {
    if n == 0 {
        return Err(Error::Domain("a star needs at least one link".into()));
    }
    let (p0, p1) = (state.phi0(), state.phi1());
    let x = p0 * p1;
    let mut sum = 0.0;
    let mut central = 1.0; // C(2k, k)
    let mut power = 1.0;
    for k in 0..=(n - 1) / 2 {
        if k > 0 {
            central = central * (2 * k) as f64 * (2 * k - 1) as f64 / (k * k) as f64;
            power *= x;
        }
        sum += central * power;
    }
    Ok(1.0 - (p0 - p1) * sum)
}

/// One outcome of the star measurement.
#[derive(Debug, Clone)]
pub struct StarOutcome {
    pub operator: MeasurementOperator,
    /// Probability of the outcome.
    pub weight: f64,
    /// Normalised Schmidt weights `(lambda_max, lambda_min)` of the post-measurement state.
    pub schmidt: (f64, f64),
    /// Optimal probability of converting the branch into an exact GHZ state.
    pub conversion: f64,
}

/// Simulates `n` copies of `state` sharing a central node, applies every
/// operator of the `E_m` family to the `n` central qubits and returns the
/// outcome table. Qubits `0..n` are central, `n..2n` are the far ends.
pub fn star_measurement_outcomes(n: usize, state: &PureState) -> Result<Vec<StarOutcome>> {
    if n == 0 || n > MAX_ORACLE_LINKS {
        return Err(Error::Domain(format!(
            "star size {n} outside 1..={MAX_ORACLE_LINKS}"
        )));
    }
    let mut star = StateVector::zeros(2 * n);
    let amp = [state.phi0().sqrt(), state.phi1().sqrt()];
    for x in 0..1usize << n {
        let a: f64 = (0..n).map(|i| amp[(x >> (n - 1 - i)) & 1]).product();
        star.amplitudes_mut()[(x << n) | x] = Complex64::new(a, 0.0);
    }
    let targets: Vec<usize> = (0..n).collect();
    let all_ones = (1usize << (n + 1)) - 1;
    let mut outcomes = Vec::with_capacity(1 << (n - 1));
    for op in MeasurementOperator::family(n)? {
        let post = op.apply(&star, &targets)?;
        let weight = post.weight();
        let support = post.support(0.0);
        let (schmidt, conversion) = match support.as_slice() {
            [] => ((0.0, 0.0), 0.0),
            [_] => ((1.0, 0.0), 0.0),
            [a, b] if a ^ b == all_ones => {
                let wa = post.amplitudes()[*a].norm_sqr() / weight;
                let wb = post.amplitudes()[*b].norm_sqr() / weight;
                let (hi, lo) = if wa >= wb { (wa, wb) } else { (wb, wa) };
                ((hi, lo), (2.0 * lo).min(1.0))
            }
            _ => {
                return Err(Error::Contract(format!(
                    "outcome {} left a state outside the GHZ class",
                    op.index()
                )))
            }
        };
        outcomes.push(StarOutcome {
            operator: op,
            weight,
            schmidt,
            conversion,
        });
    }
    Ok(outcomes)
}

/// Brute-force success probability of the star measurement followed by
/// optimal conversion of each branch.
pub fn star_measurement_oracle(n: usize, state: &PureState) -> Result<f64> {
    let outcomes = star_measurement_outcomes(n, state)?;
    let total: f64 = outcomes.iter().map(|o| o.weight).sum();
    if (total - 1.0).abs() > FIDELITY_TOL {
        return Err(Error::Contract(format!(
            "outcome probabilities sum to {total}"
        )));
    }
    Ok(outcomes.iter().map(|o| o.weight * o.conversion).sum())
}

/// A measurement branch after its local correction.
#[derive(Debug, Clone)]
pub struct Branch {
    /// Outcome label: operator index for merging, X-outcome bits for extraction
    /// (bit set means the `-` result).
    pub outcome: u32,
    pub probability: f64,
    /// Normalised, corrected state.
    pub state: StateVector,
    /// Fidelity with the ideal target state.
    pub fidelity: f64,
}

/// All branches of a protocol run.
#[derive(Debug, Clone)]
pub struct ProtocolOutcome {
    pub branches: Vec<Branch>,
}

impl ProtocolOutcome {
    /// Total probability of branches that reached the target exactly.
    pub fn success_probability(&self) -> f64 {
        self.branches
            .iter()
            .filter(|b| b.fidelity >= 1.0 - FIDELITY_TOL)
            .map(|b| b.probability)
            .sum()
    }

    pub fn total_probability(&self) -> f64 {
        self.branches.iter().map(|b| b.probability).sum()
    }

    pub fn min_fidelity(&self) -> f64 {
        self.branches
            .iter()
            .map(|b| b.fidelity)
            .fold(f64::INFINITY, f64::min)
    }
}

fn require_ghz(state: &StateVector, what: &str) -> Result<()> {
    let ideal = StateVector::ghz(state.n_qubits())?;
    let f = state.fidelity(&ideal);
    if f < 1.0 - PROB_TOL || (state.weight() - 1.0).abs() > PROB_TOL {
        return Err(Error::Contract(format!(
            "{what} is not a GHZ state (fidelity {f:.3e})"
        )));
    }
    Ok(())
}

/// Fuses `GHZ_n` and `GHZ_m` sharing a node into `GHZ_{n+m-1}` by measuring
/// qubit `shared_a` of `a` together with qubit `shared_b` of `b`.
///
/// Output qubit order: the qubits of `a` (the merged qubit in place of
/// `shared_a`) followed by the remaining qubits of `b`. After the
/// anti-correlated outcome every remaining qubit of `b` is flipped with X;
/// the correlated outcome needs no correction.
pub fn merge_ghz(
    a: &StateVector,
    b: &StateVector,
    shared_a: usize,
    shared_b: usize,
) -> Result<ProtocolOutcome> {
    let (n, m) = (a.n_qubits(), b.n_qubits());
    if n < 2 || m < 2 {
        return Err(Error::Domain(
            "merging needs GHZ states of at least two qubits".into(),
        ));
    }
    if shared_a >= n || shared_b >= m {
        return Err(Error::Domain("shared qubit index out of range".into()));
    }
    require_ghz(a, "first input")?;
    require_ghz(b, "second input")?;
    let joint = a.tensor(b);
    let ideal = StateVector::ghz(n + m - 1)?;
    let mut branches = Vec::with_capacity(2);
    for op in MeasurementOperator::pair_measurement() {
        let mut post = op.apply(&joint, &[shared_a, n + shared_b])?;
        let probability = post.weight();
        if probability <= PROB_TOL {
            continue;
        }
        if op.index() == 0b01 {
            for q in n..n + m - 1 {
                post.apply_x(q);
            }
        }
        let state = post.normalized()?;
        let fidelity = state.fidelity(&ideal);
        branches.push(Branch {
            outcome: op.index(),
            probability,
            state,
            fidelity,
        });
    }
    Ok(ProtocolOutcome { branches })
}

/// Extracts `|Phi+>` between qubits `keep_i` and `keep_j` of a GHZ state by
/// measuring every other qubit in the X basis. An odd number of `-`
/// outcomes is undone by Z on `keep_i`. The output register holds
/// `keep_i` then `keep_j`.
pub fn extract_bell(state: &StateVector, keep_i: usize, keep_j: usize) -> Result<ProtocolOutcome> {
    let n = state.n_qubits();
    if n < 2 {
        return Err(Error::Domain("extraction needs at least two qubits".into()));
    }
    if keep_i >= n || keep_j >= n {
        return Err(Error::Domain(format!(
            "kept qubits ({keep_i}, {keep_j}) out of range for {n} qubits"
        )));
    }
    if keep_i == keep_j {
        return Err(Error::Domain("kept qubits must differ".into()));
    }
    require_ghz(state, "input")?;
    let measured: Vec<usize> = (0..n).filter(|&q| q != keep_i && q != keep_j).collect();
    let ideal = StateVector::ghz(2)?;
    let scale = std::f64::consts::FRAC_1_SQRT_2.powi(measured.len() as i32);
    let mut branches = Vec::with_capacity(1 << measured.len());
    for outcome in 0u32..1 << measured.len() {
        let mut post = StateVector::zeros(2);
        for (idx, amp) in state.amplitudes().iter().enumerate() {
            let bit = |q: usize| (idx >> (n - 1 - q)) & 1;
            // <+|x> = 1/sqrt2, <-|x> = (-1)^x / sqrt2.
            let mut sign = 1.0;
            for (k, &q) in measured.iter().enumerate() {
                let minus = (outcome >> (measured.len() - 1 - k)) & 1 == 1;
                if minus && bit(q) == 1 {
                    sign = -sign;
                }
            }
            let o = (bit(keep_i) << 1) | bit(keep_j);
            post.amplitudes_mut()[o] += amp * (sign * scale);
        }
        let probability = post.weight();
        if outcome.count_ones() % 2 == 1 {
            post.apply_z(0);
        }
        let state = post.normalized()?;
        let fidelity = state.fidelity(&ideal);
        branches.push(Branch {
            outcome,
            probability,
            state,
            fidelity,
        });
    }
    Ok(ProtocolOutcome { branches })
}

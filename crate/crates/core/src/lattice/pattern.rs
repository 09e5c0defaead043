use super::graph::Lattice;
use super::kind::{Boundary, LatticeKind};
use super::network::Element;
use crate::error::{Error, Result};

/// A neighbour of a measured node: basis site `basis` in the cell displaced by
/// `shift` from the measured node's cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Slot {
    pub basis: u8,
    pub shift: [i32; 2],
}

/// Which two edges a measurement merges into one GHZ triangle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairRule {
    pub basis: u8,
    /// Cell coordinates modulo the pattern period.
    pub residue: [u32; 2],
    pub pairs: Vec<[Slot; 2]>,
}

/// Periodic assignment of measurements to lattice nodes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MeasurementPattern {
    kind: LatticeKind,
    period: [u32; 2],
    rules: Vec<PairRule>,
}

/// Result of applying a pattern to a finite lattice.
#[derive(Debug, Clone, Default)]
pub struct AppliedPattern {
    pub ghz: Vec<Element>,
    /// Edges left over as two-node Bell bonds.
    pub bell: Vec<u32>,
    pub measured: Vec<u32>,
}

const fn s(basis: u8, x: i32, y: i32) -> Slot {
    Slot {
        basis,
        shift: [x, y],
    }
}

fn rule(basis: u8, residue: [u32; 2], pairs: &[[Slot; 2]]) -> PairRule {
    PairRule {
        basis,
        residue,
        pairs: pairs.to_vec(),
    }
}

impl MeasurementPattern {
    pub fn new(kind: LatticeKind, period: [u32; 2], rules: Vec<PairRule>) -> Result<Self> {
        if period[0] == 0 || period[1] == 0 {
            return Err(Error::Domain("pattern period must be positive".into()));
        }
        let nb = kind.unit_cell().basis.len();
        for (i, r) in rules.iter().enumerate() {
            if r.basis as usize >= nb || r.residue[0] >= period[0] || r.residue[1] >= period[1] {
                return Err(Error::Domain(format!("pattern rule {i} out of range")));
            }
            if rules[..i]
                .iter()
                .any(|o| o.basis == r.basis && o.residue == r.residue)
            {
                return Err(Error::Domain(format!("pattern rule {i} duplicates a site")));
            }
            if r.pairs.iter().flatten().any(|s| s.basis as usize >= nb) {
                return Err(Error::Domain(format!(
                    "pattern rule {i} names an unknown site"
                )));
            }
        }
        Ok(Self {
            kind,
            period,
            rules,
        })
    }

    pub fn kind(&self) -> LatticeKind {
        self.kind
    }

    /// Periodicity in unit cells along each axis.
    pub fn period(&self) -> [u32; 2] {
        self.period
    }

    pub fn rules(&self) -> &[PairRule] {
        &self.rules
    }

    /// The built-in measurement pattern for `kind`.
    pub fn for_kind(kind: LatticeKind) -> Self {
        let (period, rules) = builtin(kind);
        Self::new(kind, period, rules).expect("built-in patterns are well formed")
    }

    /// Smallest periodic size of at least `target` cells compatible with the pattern.
    pub fn fit_size(&self, target: u32, axis: usize) -> u32 {
        let p = self.period[axis];
        target.div_ceil(p).max(1) * p
    }

    pub fn apply(&self, lattice: &Lattice) -> Result<AppliedPattern> {
        if lattice.kind() != self.kind {
            return Err(Error::Contract(format!(
                "pattern for {} applied to a {} lattice",
                self.kind,
                lattice.kind()
            )));
        }
        if lattice.boundary() == Boundary::Periodic
            && (!lattice.lx().is_multiple_of(self.period[0])
                || !lattice.ly().is_multiple_of(self.period[1]))
        {
            return Err(Error::Size(format!(
                "periodic {} lattice of {}x{} cells is not a multiple of the measurement period {}x{}",
                self.kind,
                lattice.lx(),
                lattice.ly(),
                self.period[0],
                self.period[1]
            )));
        }
        let mut claimed = vec![false; lattice.edge_count()];
        let mut out = AppliedPattern::default();
        for node in lattice.nodes() {
            let residue = [node.cell[0] % self.period[0], node.cell[1] % self.period[1]];
            let Some(r) = self
                .rules
                .iter()
                .find(|r| r.basis == node.sublattice && r.residue == residue)
            else {
                continue;
            };
            out.measured.push(node.id);
            for pair in &r.pairs {
                let a = find_slot(lattice, node.id, pair[0]);
                let b = find_slot(lattice, node.id, pair[1]);
                let (Some(a), Some(b)) = (a, b) else {
                    if lattice.boundary() == Boundary::Periodic {
                        return Err(Error::Contract(format!(
                            "pattern slot missing around node {}",
                            node.id
                        )));
                    }
                    // Truncated by the open boundary: the surviving edge stays a bond.
                    continue;
                };
                if a.edge == b.edge {
                    return Err(Error::Contract(format!(
                        "pattern pairs an edge with itself at node {}",
                        node.id
                    )));
                }
                for e in [a.edge, b.edge] {
                    if std::mem::replace(&mut claimed[e as usize], true) {
                        return Err(Error::Contract(format!(
                            "edge {e} claimed by two measurements"
                        )));
                    }
                }
                out.ghz.push(Element::ghz(
                    node.id,
                    [(a.neighbor, a.wrap, a.edge), (b.neighbor, b.wrap, b.edge)],
                ));
            }
        }
        out.bell = (0..lattice.edge_count() as u32)
            .filter(|&e| !claimed[e as usize])
            .collect();
        Ok(out)
    }
}

fn find_slot(lattice: &Lattice, node: u32, slot: Slot) -> Option<super::graph::Incidence> {
    lattice.incident(node).iter().copied().find(|inc| {
        lattice.nodes()[inc.neighbor as usize].sublattice == slot.basis
            && lattice.displacement(node, inc) == [slot.shift[0] as i64, slot.shift[1] as i64]
    })
}

fn builtin(kind: LatticeKind) -> ([u32; 2], Vec<PairRule>) {
    match kind {
        LatticeKind::Square => {
            let p = [[s(0, 0, 1), s(0, 0, -1)], [s(0, 1, 0), s(0, -1, 0)]];
            ([2, 2], vec![rule(0, [1, 0], &p), rule(0, [0, 1], &p)])
        }
        LatticeKind::Hexagonal => (
            [2, 1],
            vec![
                rule(1, [0, 0], &[[s(0, 0, 0), s(0, 0, 1)]]),
                rule(1, [1, 0], &[[s(0, 1, 0), s(0, 0, 1)]]),
                rule(0, [1, 0], &[[s(1, 0, 0), s(1, -1, 0)]]),
            ],
        ),
        LatticeKind::FourEightEight => (
            [1, 1],
            vec![
                rule(3, [0, 0], &[[s(1, -1, 0), s(0, 0, 0)]]),
                rule(2, [0, 0], &[[s(1, 0, 0), s(3, 0, 0)]]),
                rule(0, [0, 0], &[[s(1, 0, 0), s(2, 0, 1)]]),
            ],
        ),
        LatticeKind::Kagome => (
            [1, 1],
            vec![
                rule(
                    1,
                    [0, 0],
                    &[[s(0, 0, 0), s(0, 1, 0)], [s(2, 0, 0), s(2, 1, -1)]],
                ),
                rule(2, [0, 0], &[[s(0, 0, 0), s(0, 0, 1)]]),
            ],
        ),
        LatticeKind::Bowtie => {
            let o = [[s(0, 0, 0), s(0, 1, 1)], [s(0, 1, 0), s(0, 0, 1)]];
            let r = [[s(0, 1, 0), s(0, -1, 0)]];
            let mut rules: Vec<PairRule> = [[0, 0], [1, 0], [0, 1], [1, 1]]
                .iter()
                .map(|&res| rule(1, res, &o))
                .collect();
            rules.push(rule(0, [1, 0], &r));
            rules.push(rule(0, [0, 1], &r));
            ([2, 2], rules)
        }
        LatticeKind::Triangular => triangular(TRIANGULAR_VARIANT),
        LatticeKind::SnubSquare => snub_square(SNUB_VARIANT),
        LatticeKind::Dice => dice(DICE_VARIANT),
    }
}

const TRIANGULAR_VARIANT: usize = 0;
const SNUB_VARIANT: [usize; 2] = [0, 0];
const DICE_VARIANT: usize = 0;

/// Three ways of splitting four slots into two pairs.
fn pairings(q: [Slot; 4]) -> [[[Slot; 2]; 2]; 3] {
    [
        [[q[0], q[1]], [q[2], q[3]]],
        [[q[0], q[2]], [q[1], q[3]]],
        [[q[0], q[3]], [q[1], q[2]]],
    ]
}

/// Triangular lattice: one site in four keeps all its bonds.
pub fn triangular(variant: usize) -> ([u32; 2], Vec<PairRule>) {
    let mut a = vec![[s(0, 1, 0), s(0, -1, 0)]];
    a.extend(pairings([s(0, 0, 1), s(0, 0, -1), s(0, 1, -1), s(0, -1, 1)])[variant % 3]);
    (
        [2, 2],
        vec![
            rule(0, [1, 0], &a),
            rule(
                0,
                [0, 1],
                &[[s(0, 0, 1), s(0, 0, -1)], [s(0, 1, 0), s(0, -1, 0)]],
            ),
            rule(0, [1, 1], &[[s(0, 1, -1), s(0, -1, 1)]]),
        ],
    )
}

/// Snub square lattice: sites 1 and 3 are measured, each splitting its four
/// bonds towards sites 0 and 2 into two triangles.
pub fn snub_square(variant: [usize; 2]) -> ([u32; 2], Vec<PairRule>) {
    let m1 = pairings([s(0, 0, 0), s(0, -1, 0), s(2, 0, 0), s(2, 0, 1)]);
    let m3 = pairings([s(0, 0, 0), s(0, 0, -1), s(2, 1, 0), s(2, 0, 0)]);
    (
        [1, 1],
        vec![
            rule(1, [0, 0], &m1[variant[0] % 3]),
            rule(3, [0, 0], &m3[variant[1] % 3]),
        ],
    )
}

/// Dice lattice: the hubs form a triangular lattice; one hub sublattice in
/// three is measured and every rim joins its two unmeasured hubs.
pub fn dice(variant: usize) -> ([u32; 2], Vec<PairRule>) {
    // Rims around a hub in angular order, starting at 30 degrees.
    let ring = [
        s(1, 0, 0),
        s(2, -1, 0),
        s(1, -1, 0),
        s(2, -1, -1),
        s(1, 0, -1),
        s(2, 0, -1),
    ];
    let hub: Vec<[Slot; 2]> = match variant % 3 {
        0 => (0..3).map(|i| [ring[i], ring[i + 3]]).collect(),
        1 => (0..3).map(|i| [ring[2 * i], ring[2 * i + 1]]).collect(),
        _ => (0..3)
            .map(|i| [ring[2 * i + 1], ring[(2 * i + 2) % 6]])
            .collect(),
    };
    let mut rules = Vec::new();
    for y in 0..3u32 {
        for x in 0..3u32 {
            let color = (x + 3 - y) % 3;
            if color == 0 {
                rules.push(rule(0, [x, y], &hub));
            }
            // Hubs of each rim, listed so that the measured one comes first.
            let up = [s(0, 0, 0), s(0, 1, 0), s(0, 0, 1)];
            let down = [s(0, 1, 1), s(0, 1, 0), s(0, 0, 1)];
            let skip = [0, 2, 1][color as usize];
            for (basis, hubs) in [(1u8, up), (2u8, down)] {
                let pair: Vec<Slot> = (0..3).filter(|&i| i != skip).map(|i| hubs[i]).collect();
                rules.push(rule(basis, [x, y], &[[pair[0], pair[1]]]));
            }
        }
    }
    ([3, 3], rules)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::generate_lattice;

    fn periodic(kind: LatticeKind, p: &MeasurementPattern) -> Lattice {
        generate_lattice(kind, p.fit_size(6, 0), p.fit_size(6, 1), Boundary::Periodic).unwrap()
    }

    #[test]
    fn variants_are_valid() {
        for v in 0..3 {
            let (period, rules) = triangular(v);
            let p = MeasurementPattern::new(LatticeKind::Triangular, period, rules).unwrap();
            p.apply(&periodic(LatticeKind::Triangular, &p)).unwrap();
            let (period, rules) = dice(v);
            let p = MeasurementPattern::new(LatticeKind::Dice, period, rules).unwrap();
            let a = p.apply(&periodic(LatticeKind::Dice, &p)).unwrap();
            assert!(a.bell.is_empty());
            for w in 0..3 {
                let (period, rules) = snub_square([v, w]);
                let p = MeasurementPattern::new(LatticeKind::SnubSquare, period, rules).unwrap();
                p.apply(&periodic(LatticeKind::SnubSquare, &p)).unwrap();
            }
        }
    }

    #[test]
    fn square_checkerboard() {
        let p = MeasurementPattern::for_kind(LatticeKind::Square);
        let lat = periodic(LatticeKind::Square, &p);
        let a = p.apply(&lat).unwrap();
        assert_eq!(a.measured.len(), lat.nodes().len() / 2);
        assert_eq!(a.ghz.len(), lat.nodes().len());
        assert!(a.bell.is_empty());
        for &m in &a.measured {
            let c = lat.nodes()[m as usize].cell;
            assert_eq!((c[0] + c[1]) % 2, 1);
        }
    }

    #[test]
    fn dice_measures_one_hub_in_three() {
        let p = MeasurementPattern::for_kind(LatticeKind::Dice);
        let lat = periodic(LatticeKind::Dice, &p);
        let a = p.apply(&lat).unwrap();
        let hubs = lat.nodes().iter().filter(|n| n.sublattice == 0).count();
        let measured_hubs = a
            .measured
            .iter()
            .filter(|&&m| lat.nodes()[m as usize].sublattice == 0)
            .count();
        assert_eq!(measured_hubs * 3, hubs);
        assert_eq!(a.measured.len() - measured_hubs, 2 * hubs);
    }

    #[test]
    fn malformed_patterns() {
        let bad = |rules| MeasurementPattern::new(LatticeKind::Square, [2, 2], rules).is_err();
        assert!(bad(vec![rule(1, [0, 0], &[])]));
        assert!(bad(vec![rule(0, [2, 0], &[])]));
        assert!(bad(vec![rule(0, [0, 0], &[]), rule(0, [0, 0], &[])]));
        assert!(bad(vec![rule(0, [0, 0], &[[s(3, 0, 1), s(0, 0, -1)]])]));
        assert!(MeasurementPattern::new(LatticeKind::Square, [0, 1], vec![]).is_err());

        let lat = generate_lattice(LatticeKind::Square, 4, 4, Boundary::Periodic).unwrap();
        let same = vec![rule(0, [0, 0], &[[s(0, 1, 0), s(0, 1, 0)]])];
        let p = MeasurementPattern::new(LatticeKind::Square, [1, 1], same).unwrap();
        assert!(matches!(p.apply(&lat), Err(Error::Contract(_))));
        // Neighbouring measured sites both claiming their shared edge.
        let clash = vec![rule(0, [0, 0], &[[s(0, 1, 0), s(0, -1, 0)]])];
        let p = MeasurementPattern::new(LatticeKind::Square, [1, 1], clash).unwrap();
        assert!(matches!(p.apply(&lat), Err(Error::Contract(_))));
        let tri = generate_lattice(LatticeKind::Triangular, 4, 4, Boundary::Periodic).unwrap();
        assert!(MeasurementPattern::for_kind(LatticeKind::Square)
            .apply(&tri)
            .is_err());
    }

    #[test]
    fn fit_size_rounds_up() {
        let p = MeasurementPattern::for_kind(LatticeKind::Dice);
        assert_eq!(p.period(), [3, 3]);
        assert_eq!(p.fit_size(64, 0), 66);
        assert_eq!(p.fit_size(0, 1), 3);
    }
}

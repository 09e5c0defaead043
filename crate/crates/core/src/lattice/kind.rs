use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// The eight periodic lattices handled by the toolkit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LatticeKind {
    /// Truncated square tiling (4,8^2).
    FourEightEight,
    Hexagonal,
    Kagome,
    Square,
    Dice,
    /// Snub square tiling (3^2,4,3,4).
    SnubSquare,
    Bowtie,
    Triangular,
}

impl LatticeKind {
    /// All kinds, in the order used by the reference tables.
    pub const ALL: [LatticeKind; 8] = [
        LatticeKind::FourEightEight,
        LatticeKind::Hexagonal,
        LatticeKind::Kagome,
        LatticeKind::Square,
        LatticeKind::Dice,
        LatticeKind::SnubSquare,
        LatticeKind::Bowtie,
        LatticeKind::Triangular,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            LatticeKind::FourEightEight => "four-eight-eight",
            LatticeKind::Hexagonal => "hexagonal",
            LatticeKind::Kagome => "kagome",
            LatticeKind::Square => "square",
            LatticeKind::Dice => "dice",
            LatticeKind::SnubSquare => "snub-square",
            LatticeKind::Bowtie => "bowtie",
            LatticeKind::Triangular => "triangular",
        }
    }

    pub fn unit_cell(&self) -> UnitCell {
        unit_cell(*self)
    }
}

impl fmt::Display for LatticeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LatticeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key = s.trim().to_ascii_lowercase().replace(['_', ' '], "-");
        Ok(match key.as_str() {
            "four-eight-eight" | "4-8-8" | "488" | "(4,8^2)" | "truncated-square" => {
                LatticeKind::FourEightEight
            }
            "hexagonal" | "honeycomb" => LatticeKind::Hexagonal,
            "kagome" | "kagomé" => LatticeKind::Kagome,
            "square" => LatticeKind::Square,
            "dice" => LatticeKind::Dice,
            "snub-square" | "33434" | "(3^2,4,3,4)" => LatticeKind::SnubSquare,
            "bowtie" => LatticeKind::Bowtie,
            "triangular" | "triangle" => LatticeKind::Triangular,
            _ => return Err(Error::Domain(format!("unknown lattice kind '{s}'"))),
        })
    }
}

/// Boundary condition of a finite lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    Periodic,
    Open,
}

impl fmt::Display for Boundary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Boundary::Periodic => "periodic",
            Boundary::Open => "open",
        })
    }
}

impl FromStr for Boundary {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "periodic" => Ok(Boundary::Periodic),
            "open" => Ok(Boundary::Open),
            _ => Err(Error::Domain(format!("unknown boundary '{s}'"))),
        }
    }
}

/// A basis site of the unit cell.
#[derive(Debug, Clone, Copy)]
pub struct BasisSite {
    pub pos: [f64; 2],
    /// Coordination of this sublattice in the infinite lattice.
    pub coordination: u32,
}

/// Bond from basis site `from` in cell `c` to basis site `to` in cell `c + shift`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CellBond {
    pub from: usize,
    pub to: usize,
    pub shift: [i32; 2],
}

/// Primitive cell description of a lattice.
#[derive(Debug, Clone)]
pub struct UnitCell {
    pub a1: [f64; 2],
    pub a2: [f64; 2],
    pub basis: Vec<BasisSite>,
    pub bonds: Vec<CellBond>,
}

impl UnitCell {
    pub fn zmax(&self) -> u32 {
        self.basis.iter().map(|b| b.coordination).max().unwrap_or(0)
    }

    /// Fraction of sites with maximal coordination.
    pub fn dprime(&self) -> f64 {
        let z = self.zmax();
        let n = self.basis.iter().filter(|b| b.coordination == z).count();
        n as f64 / self.basis.len() as f64
    }

    /// Cartesian position of basis site `b` in cell `cell`.
    pub fn position(&self, cell: [i64; 2], b: usize) -> [f64; 2] {
        let (x, y) = (cell[0] as f64, cell[1] as f64);
        let p = self.basis[b].pos;
        [
            x * self.a1[0] + y * self.a2[0] + p[0],
            x * self.a1[1] + y * self.a2[1] + p[1],
        ]
    }
}

fn bond(from: usize, to: usize, sx: i32, sy: i32) -> CellBond {
    CellBond {
        from,
        to,
        shift: [sx, sy],
    }
}

fn site(x: f64, y: f64, coordination: u32) -> BasisSite {
    BasisSite {
        pos: [x, y],
        coordination,
    }
}

fn unit_cell(kind: LatticeKind) -> UnitCell {
    let s3 = 3f64.sqrt();
    match kind {
        LatticeKind::Square => UnitCell {
            a1: [1.0, 0.0],
            a2: [0.0, 1.0],
            basis: vec![site(0.0, 0.0, 4)],
            bonds: vec![bond(0, 0, 1, 0), bond(0, 0, 0, 1)],
        },
        LatticeKind::Triangular => UnitCell {
            a1: [1.0, 0.0],
            a2: [0.5, s3 / 2.0],
            basis: vec![site(0.0, 0.0, 6)],
            bonds: vec![bond(0, 0, 1, 0), bond(0, 0, 0, 1), bond(0, 0, 1, -1)],
        },
        LatticeKind::Hexagonal => UnitCell {
            // Bond length 1; A at the origin, B at (a1 + a2) / 3.
            a1: [s3, 0.0],
            a2: [s3 / 2.0, 1.5],
            basis: vec![site(0.0, 0.0, 3), site(s3 / 2.0, 0.5, 3)],
            bonds: vec![bond(0, 1, 0, 0), bond(0, 1, -1, 0), bond(0, 1, 0, -1)],
        },
        LatticeKind::Kagome => UnitCell {
            a1: [2.0, 0.0],
            a2: [1.0, s3],
            basis: vec![site(0.0, 0.0, 4), site(1.0, 0.0, 4), site(0.5, s3 / 2.0, 4)],
            bonds: vec![
                // up triangle
                bond(0, 1, 0, 0),
                bond(0, 2, 0, 0),
                bond(1, 2, 0, 0),
                // down triangles
                bond(0, 1, -1, 0),
                bond(0, 2, 0, -1),
                bond(1, 2, 1, -1),
            ],
        },
        LatticeKind::Dice => UnitCell {
            // Hub on the triangular lattice, rims at (a1+a2)/3 and 2(a1+a2)/3.
            a1: [s3, 0.0],
            a2: [s3 / 2.0, 1.5],
            basis: vec![site(0.0, 0.0, 6), site(s3 / 2.0, 0.5, 3), site(s3, 1.0, 3)],
            bonds: vec![
                bond(1, 0, 0, 0),
                bond(1, 0, 1, 0),
                bond(1, 0, 0, 1),
                bond(2, 0, 1, 1),
                bond(2, 0, 1, 0),
                bond(2, 0, 0, 1),
            ],
        },
        LatticeKind::Bowtie => UnitCell {
            // Square lattice plus the diagonal (x,y)-(x+1,y+1) through every
            // site with x+y even, i.e. along every other diagonal line.
            // Site 0 is the even (degree 6) site, site 1 the odd one at +(1,0).
            a1: [1.0, 1.0],
            a2: [1.0, -1.0],
            basis: vec![site(0.0, 0.0, 6), site(1.0, 0.0, 4)],
            bonds: vec![
                bond(0, 1, 0, 0),
                bond(0, 1, -1, -1),
                bond(0, 1, 0, -1),
                bond(0, 1, -1, 0),
                bond(0, 0, 1, 0),
            ],
        },
        LatticeKind::FourEightEight => {
            // Unit squares tilted by 45 degrees, joined by unit links.
            let h = std::f64::consts::FRAC_1_SQRT_2;
            let a = 1.0 + 2f64.sqrt();
            UnitCell {
                a1: [a, 0.0],
                a2: [0.0, a],
                // N, E, S, W
                basis: vec![
                    site(0.0, h, 3),
                    site(h, 0.0, 3),
                    site(0.0, -h, 3),
                    site(-h, 0.0, 3),
                ],
                bonds: vec![
                    bond(0, 1, 0, 0),
                    bond(1, 2, 0, 0),
                    bond(2, 3, 0, 0),
                    bond(3, 0, 0, 0),
                    bond(1, 3, 1, 0),
                    bond(0, 2, 0, 1),
                ],
            }
        }
        LatticeKind::SnubSquare => {
            // A unit square rotated by 15 degrees about the cell origin; its
            // neighbours are rotated by -15 degrees.
            let r = std::f64::consts::FRAC_1_SQRT_2;
            let a = (2.0 + s3).sqrt();
            let corner = |deg: f64| {
                let t = deg.to_radians();
                site(r * t.cos(), r * t.sin(), 5)
            };
            UnitCell {
                a1: [a, 0.0],
                a2: [0.0, a],
                basis: vec![corner(60.0), corner(150.0), corner(240.0), corner(330.0)],
                bonds: vec![
                    bond(0, 1, 0, 0),
                    bond(0, 1, 1, 0),
                    bond(0, 2, 0, 1),
                    bond(0, 3, 0, 0),
                    bond(0, 3, 0, 1),
                    bond(1, 2, 0, 0),
                    bond(1, 2, 0, 1),
                    bond(1, 3, -1, 0),
                    bond(2, 3, -1, 0),
                    bond(2, 3, 0, 0),
                ],
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
        ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
    }

    #[test]
    fn coordination_matches_bond_list() {
        for kind in LatticeKind::ALL {
            let cell = kind.unit_cell();
            let mut deg = vec![0u32; cell.basis.len()];
            for b in &cell.bonds {
                deg[b.from] += 1;
                deg[b.to] += 1;
            }
            let expected: Vec<u32> = cell.basis.iter().map(|s| s.coordination).collect();
            assert_eq!(deg, expected, "{kind}");
        }
    }

    #[test]
    fn archimedean_bonds_have_unit_length() {
        for kind in [
            LatticeKind::Square,
            LatticeKind::Triangular,
            LatticeKind::Hexagonal,
            LatticeKind::Kagome,
            LatticeKind::FourEightEight,
            LatticeKind::SnubSquare,
        ] {
            let cell = kind.unit_cell();
            for b in &cell.bonds {
                let p = cell.position([0, 0], b.from);
                let q = cell.position([b.shift[0] as i64, b.shift[1] as i64], b.to);
                assert!((dist(p, q) - 1.0).abs() < 1e-12, "{kind} {b:?}");
            }
        }
    }

    #[test]
    fn dice_rims_are_equidistant() {
        let cell = LatticeKind::Dice.unit_cell();
        let l = 1.0;
        for b in &cell.bonds {
            let p = cell.position([0, 0], b.from);
            let q = cell.position([b.shift[0] as i64, b.shift[1] as i64], b.to);
            assert!((dist(p, q) - l).abs() < 1e-12);
        }
    }

    #[test]
    fn parse_names() {
        for kind in LatticeKind::ALL {
            assert_eq!(kind.name().parse::<LatticeKind>().unwrap(), kind);
        }
        assert_eq!(
            "Honeycomb".parse::<LatticeKind>().unwrap(),
            LatticeKind::Hexagonal
        );
        assert!("penrose".parse::<LatticeKind>().is_err());
    }

    #[test]
    fn dprime_values() {
        assert_eq!(LatticeKind::Dice.unit_cell().dprime(), 1.0 / 3.0);
        assert_eq!(LatticeKind::Bowtie.unit_cell().dprime(), 0.5);
        assert_eq!(LatticeKind::SnubSquare.unit_cell().dprime(), 1.0);
    }
}

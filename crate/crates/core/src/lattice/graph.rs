use super::kind::{Boundary, LatticeKind, UnitCell};
use crate::error::{Error, Result};

/// A physical node of a finite lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub id: u32,
    pub pos: [f64; 2],
    /// Basis index inside the unit cell.
    pub sublattice: u8,
    pub cell: [u32; 2],
    pub degree: u32,
}

/// An undirected edge. `wrap` counts how often the edge crosses the periodic
/// boundary when walked from `a` to `b`, so the unwrapped cell displacement
/// is `cell(b) - cell(a) + wrap * (Lx, Ly)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Edge {
    pub a: u32,
    pub b: u32,
    pub wrap: [i8; 2],
}

/// Edge as seen from one of its endpoints.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Incidence {
    pub edge: u32,
    pub neighbor: u32,
    pub wrap: [i8; 2],
}

/// Immutable finite lattice with optional periodic wrap-around.
#[derive(Debug, Clone)]
pub struct Lattice {
    kind: LatticeKind,
    lx: u32,
    ly: u32,
    boundary: Boundary,
    nodes: Vec<Node>,
    edges: Vec<Edge>,
    incidence: Vec<Vec<Incidence>>,
    zmax: u32,
    dprime: f64,
}

impl Lattice {
    pub fn kind(&self) -> LatticeKind {
        self.kind
    }

    pub fn lx(&self) -> u32 {
        self.lx
    }

    pub fn ly(&self) -> u32 {
        self.ly
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn incident(&self, node: u32) -> &[Incidence] {
        &self.incidence[node as usize]
    }

    /// Maximal coordination number of the infinite lattice.
    pub fn zmax(&self) -> u32 {
        self.zmax
    }

    /// Density of maximal-coordination nodes in the infinite lattice.
    pub fn dprime(&self) -> f64 {
        self.dprime
    }

    pub fn basis_len(&self) -> usize {
        self.nodes.len() / (self.lx as usize * self.ly as usize)
    }

    pub fn node_id(&self, cell: [u32; 2], sublattice: usize) -> u32 {
        ((cell[1] as usize * self.lx as usize + cell[0] as usize) * self.basis_len() + sublattice)
            as u32
    }

    /// Unwrapped displacement in cell units of an edge walked from `from`.
    pub fn displacement(&self, from: u32, inc: &Incidence) -> [i64; 2] {
        let c0 = self.nodes[from as usize].cell;
        let c1 = self.nodes[inc.neighbor as usize].cell;
        [
            c1[0] as i64 - c0[0] as i64 + inc.wrap[0] as i64 * self.lx as i64,
            c1[1] as i64 - c0[1] as i64 + inc.wrap[1] as i64 * self.ly as i64,
        ]
    }

    /// Shortest periodic displacement between two nodes in cartesian units.
    pub fn min_image_distance(&self, a: u32, b: u32) -> f64 {
        let cell = self.kind.unit_cell();
        let na = &self.nodes[a as usize];
        let nb = &self.nodes[b as usize];
        let mut best = f64::INFINITY;
        let range: &[i64] = match self.boundary {
            Boundary::Periodic => &[-1, 0, 1],
            Boundary::Open => &[0],
        };
        for &wx in range {
            for &wy in range {
                let pa = cell.position(
                    [na.cell[0] as i64, na.cell[1] as i64],
                    na.sublattice as usize,
                );
                let pb = cell.position(
                    [
                        nb.cell[0] as i64 + wx * self.lx as i64,
                        nb.cell[1] as i64 + wy * self.ly as i64,
                    ],
                    nb.sublattice as usize,
                );
                let d = ((pa[0] - pb[0]).powi(2) + (pa[1] - pb[1]).powi(2)).sqrt();
                best = best.min(d);
            }
        }
        best
    }

    /// Histogram of node degrees as sorted `(degree, count)` pairs.
    pub fn degree_histogram(&self) -> Vec<(u32, usize)> {
        let mut h = std::collections::BTreeMap::new();
        for n in &self.nodes {
            *h.entry(n.degree).or_insert(0usize) += 1;
        }
        h.into_iter().collect()
    }
}

/// Builds an `lx` by `ly` patch of unit cells.
pub fn generate_lattice(
    kind: LatticeKind,
    lx: u32,
    ly: u32,
    boundary: Boundary,
) -> Result<Lattice> {
    let min = match boundary {
        Boundary::Periodic => 2,
        Boundary::Open => 3,
    };
    if lx < min || ly < min {
        return Err(Error::Size(format!(
            "{kind} lattice needs at least {min}x{min} cells with {boundary} boundaries, got {lx}x{ly}"
        )));
    }
    let cell = kind.unit_cell();
    build(kind, &cell, lx, ly, boundary)
}

fn build(
    kind: LatticeKind,
    cell: &UnitCell,
    lx: u32,
    ly: u32,
    boundary: Boundary,
) -> Result<Lattice> {
    let nb = cell.basis.len();
    let total = lx as usize * ly as usize * nb;
    if total > u32::MAX as usize / 2 {
        return Err(Error::Size("lattice too large".into()));
    }
    let mut nodes = Vec::with_capacity(total);
    for cy in 0..ly {
        for cx in 0..lx {
            for b in 0..nb {
                nodes.push(Node {
                    id: nodes.len() as u32,
                    pos: cell.position([cx as i64, cy as i64], b),
                    sublattice: b as u8,
                    cell: [cx, cy],
                    degree: 0,
                });
            }
        }
    }
    let id =
        |cx: u32, cy: u32, b: usize| ((cy as usize * lx as usize + cx as usize) * nb + b) as u32;
    let mut edges = Vec::with_capacity(lx as usize * ly as usize * cell.bonds.len());
    let mut incidence = vec![Vec::new(); total];
    for cy in 0..ly {
        for cx in 0..lx {
            for bond in &cell.bonds {
                let tx = cx as i64 + bond.shift[0] as i64;
                let ty = cy as i64 + bond.shift[1] as i64;
                let wx = tx.div_euclid(lx as i64);
                let wy = ty.div_euclid(ly as i64);
                if boundary == Boundary::Open && (wx != 0 || wy != 0) {
                    continue;
                }
                let a = id(cx, cy, bond.from);
                let b = id(
                    tx.rem_euclid(lx as i64) as u32,
                    ty.rem_euclid(ly as i64) as u32,
                    bond.to,
                );
                let wrap = [wx as i8, wy as i8];
                let e = edges.len() as u32;
                edges.push(Edge { a, b, wrap });
                incidence[a as usize].push(Incidence {
                    edge: e,
                    neighbor: b,
                    wrap,
                });
                incidence[b as usize].push(Incidence {
                    edge: e,
                    neighbor: a,
                    wrap: [-wrap[0], -wrap[1]],
                });
            }
        }
    }
    for (n, inc) in nodes.iter_mut().zip(&incidence) {
        n.degree = inc.len() as u32;
    }
    Ok(Lattice {
        kind,
        lx,
        ly,
        boundary,
        nodes,
        edges,
        incidence,
        zmax: cell.zmax(),
        dprime: cell.dprime(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_counts() {
        let l = generate_lattice(LatticeKind::Square, 16, 16, Boundary::Periodic).unwrap();
        assert_eq!((l.node_count(), l.edge_count(), l.zmax()), (256, 512, 4));
    }

    #[test]
    fn hexagonal_counts() {
        let l = generate_lattice(LatticeKind::Hexagonal, 8, 8, Boundary::Periodic).unwrap();
        assert_eq!((l.node_count(), l.edge_count(), l.zmax()), (128, 192, 3));
    }

    #[test]
    fn dice_counts_and_degrees() {
        let l = generate_lattice(LatticeKind::Dice, 8, 8, Boundary::Periodic).unwrap();
        assert_eq!((l.node_count(), l.edge_count(), l.zmax()), (192, 384, 6));
        assert!((l.dprime() - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(l.degree_histogram(), vec![(3, 128), (6, 64)]);
    }

    #[test]
    fn per_cell_counts() {
        let expect = [
            (LatticeKind::Square, 1, 2),
            (LatticeKind::Triangular, 1, 3),
            (LatticeKind::Hexagonal, 2, 3),
            (LatticeKind::Kagome, 3, 6),
            (LatticeKind::Dice, 3, 6),
            (LatticeKind::FourEightEight, 4, 6),
            (LatticeKind::SnubSquare, 4, 10),
            (LatticeKind::Bowtie, 2, 5),
        ];
        for (kind, n, e) in expect {
            let l = generate_lattice(kind, 4, 6, Boundary::Periodic).unwrap();
            assert_eq!(l.node_count(), 24 * n, "{kind}");
            assert_eq!(l.edge_count(), 24 * e, "{kind}");
            let cell = kind.unit_cell();
            for node in l.nodes() {
                assert_eq!(
                    node.degree,
                    cell.basis[node.sublattice as usize].coordination
                );
            }
        }
    }

    #[test]
    fn open_boundary_drops_wrapping_edges() {
        let l = generate_lattice(LatticeKind::Square, 4, 4, Boundary::Open).unwrap();
        assert_eq!(l.edge_count(), 24);
        assert!(l.edges().iter().all(|e| e.wrap == [0, 0]));
        assert!(generate_lattice(LatticeKind::Square, 2, 4, Boundary::Open).is_err());
        assert!(generate_lattice(LatticeKind::Square, 1, 4, Boundary::Periodic).is_err());
    }

    #[test]
    fn displacement_is_unwrapped() {
        let l = generate_lattice(LatticeKind::Square, 4, 4, Boundary::Periodic).unwrap();
        let corner = l.node_id([3, 0], 0);
        let right = l
            .incident(corner)
            .iter()
            .find(|i| l.displacement(corner, i) == [1, 0])
            .unwrap();
        assert_eq!(right.neighbor, l.node_id([0, 0], 0));
        assert_eq!(right.wrap, [1, 0]);
    }

    #[test]
    fn antipodal_distance() {
        let l = generate_lattice(LatticeKind::Square, 8, 8, Boundary::Periodic).unwrap();
        let d = l.min_image_distance(l.node_id([0, 0], 0), l.node_id([4, 4], 0));
        assert!((d - 32f64.sqrt()).abs() < 1e-12);
    }
}

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::graph::Lattice;
use super::kind::Boundary;
use super::pattern::MeasurementPattern;
use crate::error::{Error, Result};

/// Entanglement distribution strategy a network was built for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    /// Every bond is converted into a singlet independently.
    Cep,
    /// GHZ-generating measurements first, then conversion.
    Qep,
}

impl std::fmt::Display for Strategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Strategy::Cep => "cep",
            Strategy::Qep => "qep",
        })
    }
}

impl std::str::FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "cep" | "classical" => Ok(Strategy::Cep),
            "qep" | "quantum" | "multipartite" => Ok(Strategy::Qep),
            _ => Err(Error::Domain(format!("unknown strategy '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ElementKind {
    /// Two-node Bell bond.
    Bond,
    /// Three-node GHZ triangle; the first member is the measured centre.
    Ghz,
}

/// A percolating unit: all members join one cluster when it is occupied.
///
/// `wraps[k]` is the boundary-crossing count from member 0 to member `k + 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Element {
    kind: ElementKind,
    nodes: [u32; 3],
    wraps: [[i8; 2]; 2],
    edges: [u32; 2],
}

impl Element {
    pub fn bond(a: u32, b: u32, wrap: [i8; 2], edge: u32) -> Self {
        Self {
            kind: ElementKind::Bond,
            nodes: [a, b, u32::MAX],
            wraps: [wrap, [0, 0]],
            edges: [edge, u32::MAX],
        }
    }

    pub fn ghz(center: u32, ends: [(u32, [i8; 2], u32); 2]) -> Self {
        Self {
            kind: ElementKind::Ghz,
            nodes: [center, ends[0].0, ends[1].0],
            wraps: [ends[0].1, ends[1].1],
            edges: [ends[0].2, ends[1].2],
        }
    }

    pub fn kind(&self) -> ElementKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        match self.kind {
            ElementKind::Bond => 2,
            ElementKind::Ghz => 3,
        }
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn members(&self) -> &[u32] {
        &self.nodes[..self.len()]
    }

    /// Wrap counts of members `1..` relative to member 0.
    pub fn wraps(&self) -> &[[i8; 2]] {
        &self.wraps[..self.len() - 1]
    }

    /// Lattice edges consumed by this element.
    pub fn edges(&self) -> &[u32] {
        &self.edges[..self.len() - 1]
    }
}

/// Hypergraph of percolating elements over the nodes of a lattice.
#[derive(Debug, Clone)]
pub struct GeneralizedNetwork {
    lattice: Arc<Lattice>,
    strategy: Strategy,
    elements: Vec<Element>,
    qualified: Vec<u32>,
    measured: Vec<u32>,
}

/// Summary counts of a network.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NetworkStats {
    pub nodes: usize,
    pub edges: usize,
    pub bonds: usize,
    pub ghz: usize,
    pub measured: usize,
    pub qualified: usize,
    /// Nodes of maximal coordination in the source lattice.
    pub zmax_nodes: usize,
    pub zmax: u32,
    pub dprime: f64,
    pub dhat: f64,
    pub f: f64,
    /// `f` as a reduced fraction.
    pub f_ratio: (u64, u64),
}

impl GeneralizedNetwork {
    /// Assembles a network after checking that every lattice edge is consumed
    /// by exactly one element.
    pub fn new(
        lattice: Arc<Lattice>,
        strategy: Strategy,
        elements: Vec<Element>,
        measured: Vec<u32>,
    ) -> Result<Self> {
        check_edge_partition(&lattice, &elements)?;
        let mut is_measured = vec![false; lattice.node_count()];
        for &m in &measured {
            *is_measured
                .get_mut(m as usize)
                .ok_or_else(|| Error::Contract(format!("measured node {m} out of range")))? = true;
        }
        for el in &elements {
            if el.kind == ElementKind::Ghz && !is_measured[el.nodes[0] as usize] {
                return Err(Error::Contract(format!(
                    "GHZ centre {} is not marked as measured",
                    el.nodes[0]
                )));
            }
        }
        let mut measured = measured;
        measured.sort_unstable();
        measured.dedup();
        let zmax = lattice.zmax();
        let qualified = lattice
            .nodes()
            .iter()
            .filter(|n| n.degree == zmax && !is_measured[n.id as usize])
            .map(|n| n.id)
            .collect();
        Ok(Self {
            lattice,
            strategy,
            elements,
            qualified,
            measured,
        })
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn lattice_arc(&self) -> &Arc<Lattice> {
        &self.lattice
    }

    pub fn strategy(&self) -> Strategy {
        self.strategy
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    pub fn node_count(&self) -> usize {
        self.lattice.node_count()
    }

    /// Nodes of maximal coordination that host no measurement.
    pub fn qualified(&self) -> &[u32] {
        &self.qualified
    }

    pub fn measured(&self) -> &[u32] {
        &self.measured
    }

    /// Short identifier such as `square-qep-64x64-periodic`.
    pub fn label(&self) -> String {
        let l = &self.lattice;
        format!(
            "{}-{}-{}x{}-{}",
            l.kind(),
            self.strategy,
            l.lx(),
            l.ly(),
            l.boundary()
        )
    }

    pub fn is_periodic(&self) -> bool {
        self.lattice.boundary() == Boundary::Periodic
    }

    /// For every node, the indices of elements containing it.
    pub fn node_elements(&self) -> Vec<Vec<u32>> {
        let mut out = vec![Vec::new(); self.node_count()];
        for (i, el) in self.elements.iter().enumerate() {
            for &n in el.members() {
                out[n as usize].push(i as u32);
            }
        }
        out
    }

    /// Unwrapped cell displacement from member 0 to member `k` of `el`.
    pub fn member_displacement(&self, el: &Element, k: usize) -> [i64; 2] {
        if k == 0 {
            return [0, 0];
        }
        let l = &self.lattice;
        let c0 = l.nodes()[el.nodes[0] as usize].cell;
        let ck = l.nodes()[el.nodes[k] as usize].cell;
        let w = el.wraps[k - 1];
        [
            ck[0] as i64 - c0[0] as i64 + w[0] as i64 * l.lx() as i64,
            ck[1] as i64 - c0[1] as i64 + w[1] as i64 * l.ly() as i64,
        ]
    }

    pub fn stats(&self) -> NetworkStats {
        let lattice = &self.lattice;
        let zmax = lattice.zmax();
        let zmax_nodes = lattice.nodes().iter().filter(|n| n.degree == zmax).count();
        let bonds = self
            .elements
            .iter()
            .filter(|e| e.kind == ElementKind::Bond)
            .count();
        let n = lattice.node_count();
        let dhat = self.qualified.len() as f64 / n as f64;
        let dprime = lattice.dprime();
        let (num, den) = reduce(self.qualified.len() as u64, zmax_nodes.max(1) as u64);
        NetworkStats {
            nodes: n,
            edges: lattice.edge_count(),
            bonds,
            ghz: self.elements.len() - bonds,
            measured: self.measured.len(),
            qualified: self.qualified.len(),
            zmax_nodes,
            zmax,
            dprime,
            dhat,
            f: if zmax_nodes == 0 {
                0.0
            } else {
                self.qualified.len() as f64 / zmax_nodes as f64
            },
            f_ratio: (num, den),
        }
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn reduce(a: u64, b: u64) -> (u64, u64) {
    let g = gcd(a, b).max(1);
    (a / g, b / g)
}

fn check_edge_partition(lattice: &Lattice, elements: &[Element]) -> Result<()> {
    let mut used = vec![u32::MAX; lattice.edge_count()];
    for (i, el) in elements.iter().enumerate() {
        for (k, &e) in el.edges().iter().enumerate() {
            let edge = lattice
                .edges()
                .get(e as usize)
                .ok_or_else(|| Error::Contract(format!("element {i} consumes unknown edge {e}")))?;
            let (center, end) = (el.nodes[0], el.nodes[k + 1]);
            let w = el.wraps[k];
            let matches = (edge.a == center && edge.b == end && edge.wrap == w)
                || (edge.b == center && edge.a == end && edge.wrap == [-w[0], -w[1]]);
            if !matches {
                return Err(Error::Contract(format!(
                    "element {i} does not match lattice edge {e}"
                )));
            }
            if used[e as usize] != u32::MAX {
                return Err(Error::Contract(format!(
                    "edge {e} consumed by elements {} and {i}",
                    used[e as usize]
                )));
            }
            used[e as usize] = i as u32;
        }
    }
    if let Some(e) = used.iter().position(|&u| u == u32::MAX) {
        return Err(Error::Contract(format!(
            "edge {e} is not consumed by any element"
        )));
    }
    Ok(())
}

/// Classical strategy: every edge becomes a two-node element.
pub fn cep_network(lattice: Arc<Lattice>) -> GeneralizedNetwork {
    let elements = lattice
        .edges()
        .iter()
        .enumerate()
        .map(|(i, e)| Element::bond(e.a, e.b, e.wrap, i as u32))
        .collect();
    GeneralizedNetwork::new(lattice, Strategy::Cep, elements, Vec::new())
        .expect("one element per edge is a valid partition")
}

/// Multipartite strategy using the built-in measurement pattern of the lattice kind.
pub fn qep_network(lattice: Arc<Lattice>) -> Result<GeneralizedNetwork> {
    let pattern = MeasurementPattern::for_kind(lattice.kind());
    qep_network_with(lattice, &pattern)
}

/// Multipartite strategy with an explicit pattern.
pub fn qep_network_with(
    lattice: Arc<Lattice>,
    pattern: &MeasurementPattern,
) -> Result<GeneralizedNetwork> {
    let applied = pattern.apply(&lattice)?;
    let mut elements = Vec::with_capacity(applied.ghz.len() + applied.bell.len());
    for g in &applied.ghz {
        elements.push(*g);
    }
    for &e in &applied.bell {
        let edge = lattice.edges()[e as usize];
        elements.push(Element::bond(edge.a, edge.b, edge.wrap, e));
    }
    GeneralizedNetwork::new(lattice, Strategy::Qep, elements, applied.measured)
}

/// Builds either strategy for a lattice.
pub fn build_network(lattice: Arc<Lattice>, strategy: Strategy) -> Result<GeneralizedNetwork> {
    match strategy {
        Strategy::Cep => Ok(cep_network(lattice)),
        Strategy::Qep => qep_network(lattice),
    }
}

/// Returns `net.stats()`.
pub fn network_stats(net: &GeneralizedNetwork) -> NetworkStats {
    net.stats()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{generate_lattice, LatticeKind};

    fn qep(kind: LatticeKind, l: u32) -> GeneralizedNetwork {
        let p = MeasurementPattern::for_kind(kind);
        let lat =
            generate_lattice(kind, p.fit_size(l, 0), p.fit_size(l, 1), Boundary::Periodic).unwrap();
        qep_network(Arc::new(lat)).unwrap()
    }

    #[test]
    fn builtin_patterns_partition_edges() {
        for kind in LatticeKind::ALL {
            let net = qep(kind, 6);
            let st = net.stats();
            assert!(st.ghz > 0, "{kind}");
            let consumed: usize = net.elements().iter().map(|e| e.edges().len()).sum();
            assert_eq!(consumed, st.edges, "{kind}");
        }
    }

    #[test]
    fn qualified_fractions() {
        let expect = [
            (LatticeKind::Square, (1, 2)),
            (LatticeKind::Hexagonal, (1, 4)),
            (LatticeKind::Kagome, (1, 3)),
            (LatticeKind::FourEightEight, (1, 4)),
            (LatticeKind::Bowtie, (1, 2)),
            (LatticeKind::Triangular, (1, 4)),
            (LatticeKind::SnubSquare, (1, 2)),
            (LatticeKind::Dice, (2, 3)),
        ];
        for (kind, f) in expect {
            assert_eq!(qep(kind, 8).stats().f_ratio, f, "{kind}");
        }
    }

    #[test]
    fn cep_keeps_every_node() {
        let lat = Arc::new(generate_lattice(LatticeKind::Dice, 4, 4, Boundary::Periodic).unwrap());
        let net = cep_network(lat);
        let st = net.stats();
        assert_eq!((st.bonds, st.ghz, st.f_ratio), (96, 0, (1, 1)));
        assert!((st.dhat - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn incompatible_size_rejected() {
        let lat = generate_lattice(LatticeKind::Square, 5, 4, Boundary::Periodic).unwrap();
        assert!(matches!(qep_network(Arc::new(lat)), Err(Error::Size(_))));
    }

    #[test]
    fn double_claim_rejected() {
        let lat =
            Arc::new(generate_lattice(LatticeKind::Square, 4, 4, Boundary::Periodic).unwrap());
        let mut els: Vec<Element> = cep_network(lat.clone()).elements().to_vec();
        els.push(els[0]);
        assert!(GeneralizedNetwork::new(lat, Strategy::Cep, els, vec![]).is_err());
    }

    #[test]
    fn open_boundary_qep() {
        let lat = generate_lattice(LatticeKind::Square, 5, 5, Boundary::Open).unwrap();
        let net = qep_network(Arc::new(lat)).unwrap();
        assert!(net.stats().bonds > 0);
    }
}

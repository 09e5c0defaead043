use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use super::poly::EpsilonPolynomial;
use crate::error::{Error, Result};
use crate::lattice::{GeneralizedNetwork, MeasurementPattern, Strategy};
use crate::percolation::{periodic_network, Hypergraph};

/// Largest perimeter the enumerator accepts.
pub const MAX_PERIMETER: usize = 14;
/// Largest cluster size explored before giving up on convergence.
const MAX_CLUSTER_ELEMENTS: usize = 64;

const UNSEEN: u8 = 0;
const FRONTIER: u8 = 1;
const INCLUDED: u8 = 2;
const EXCLUDED: u8 = 3;

/// A finite cluster of occupied elements around the root.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EnumeratedCluster {
    pub elements: Vec<u32>,
    /// Occupied elements `s`.
    pub occupied: usize,
    /// Closed elements touching the cluster, `t`.
    pub perimeter: usize,
}

/// All finite clusters containing `root` with perimeter up to the bound.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LocalClusterEnumeration {
    pub root: u32,
    pub max_perimeter: usize,
    /// Size cut that the enumeration converged at.
    pub max_size: usize,
    pub clusters: Vec<EnumeratedCluster>,
}

impl LocalClusterEnumeration {
    /// Number of clusters for each `(s, t)`.
    pub fn census(&self) -> BTreeMap<(usize, usize), u64> {
        let mut m = BTreeMap::new();
        for c in &self.clusters {
            *m.entry((c.occupied, c.perimeter)).or_insert(0) += 1;
        }
        m
    }
}

struct Enumerator<'a> {
    h: &'a Hypergraph,
    node_elements: &'a [Vec<u32>],
    status: Vec<u8>,
    in_cluster: Vec<bool>,
    pos: Vec<[i32; 2]>,
    frontier: Vec<u32>,
    chosen: Vec<u32>,
    s: usize,
    t: usize,
    max_t: usize,
    max_s: usize,
    census: BTreeMap<(usize, usize), u64>,
    keep: bool,
    clusters: Vec<EnumeratedCluster>,
    wrapped: bool,
}

impl<'a> Enumerator<'a> {
    fn new(h: &'a Hypergraph, node_elements: &'a [Vec<u32>], keep: bool) -> Self {
        Self {
            h,
            node_elements,
            status: vec![UNSEEN; h.elements()],
            in_cluster: vec![false; h.nodes],
            pos: vec![[0, 0]; h.nodes],
            frontier: Vec::new(),
            chosen: Vec::new(),
            s: 0,
            t: 0,
            max_t: 0,
            max_s: 0,
            census: BTreeMap::new(),
            keep,
            clusters: Vec::new(),
            wrapped: false,
        }
    }

    fn run(&mut self, root: u32, max_t: usize, max_s: usize) -> Result<()> {
        self.status.fill(UNSEEN);
        self.in_cluster.fill(false);
        self.frontier.clear();
        self.chosen.clear();
        self.census.clear();
        self.clusters.clear();
        self.wrapped = false;
        (self.s, self.t, self.max_t, self.max_s) = (0, 0, max_t, max_s);
        self.in_cluster[root as usize] = true;
        self.pos[root as usize] = [0, 0];
        for &e in &self.node_elements[root as usize] {
            if self.status[e as usize] == UNSEEN {
                self.status[e as usize] = FRONTIER;
                self.frontier.push(e);
            }
        }
        self.go(0);
        if self.wrapped {
            return Err(Error::Enumeration(
                "patch too small: a cluster wraps around the periodic lattice".into(),
            ));
        }
        Ok(())
    }

    fn rel(&self, e: usize, k: usize) -> [i32; 2] {
        if k == 0 {
            [0, 0]
        } else {
            self.h.disp[e][k - 1]
        }
    }

    fn go(&mut self, idx: usize) {
        if self.wrapped {
            return;
        }
        if idx == self.frontier.len() {
            *self.census.entry((self.s, self.t)).or_insert(0) += 1;
            if self.keep {
                let mut elements = self.chosen.clone();
                elements.sort_unstable();
                self.clusters.push(EnumeratedCluster {
                    elements,
                    occupied: self.s,
                    perimeter: self.t,
                });
            }
            return;
        }
        let e = self.frontier[idx] as usize;
        if self.t < self.max_t {
            self.status[e] = EXCLUDED;
            self.t += 1;
            self.go(idx + 1);
            self.t -= 1;
        }
        // Clusters larger than the size cut are treated as infinite.
        if self.s < self.max_s {
            self.status[e] = INCLUDED;
            self.s += 1;
            self.chosen.push(e as u32);
            let mark = self.frontier.len();
            let members = self.h.members[e];
            let len = self.h.len[e] as usize;
            let j = (0..len)
                .find(|&k| self.in_cluster[members[k] as usize])
                .expect("frontier elements touch the cluster");
            let pj = self.pos[members[j] as usize];
            let rj = self.rel(e, j);
            let base = [pj[0] - rj[0], pj[1] - rj[1]];
            let mut added = [u32::MAX; 3];
            for k in 0..len {
                let m = members[k] as usize;
                let r = self.rel(e, k);
                let p = [base[0] + r[0], base[1] + r[1]];
                if self.in_cluster[m] {
                    if self.pos[m] != p {
                        self.wrapped = true;
                    }
                    continue;
                }
                self.in_cluster[m] = true;
                self.pos[m] = p;
                added[k] = m as u32;
                for &f in &self.node_elements[m] {
                    if self.status[f as usize] == UNSEEN {
                        self.status[f as usize] = FRONTIER;
                        self.frontier.push(f);
                    }
                }
            }
            self.go(idx + 1);
            for &f in &self.frontier[mark..] {
                self.status[f as usize] = UNSEEN;
            }
            self.frontier.truncate(mark);
            for &m in added.iter().filter(|&&m| m != u32::MAX) {
                self.in_cluster[m as usize] = false;
            }
            self.chosen.pop();
            self.s -= 1;
        }
        self.status[e] = FRONTIER;
    }
}

fn check_perimeter(max_perimeter: usize) -> Result<()> {
    if max_perimeter > MAX_PERIMETER {
        return Err(Error::Enumeration(format!(
            "perimeter {max_perimeter} requested, the enumeration cap is {MAX_PERIMETER}"
        )));
    }
    Ok(())
}

/// Cluster counts keyed by (occupied, perimeter).
type Census = BTreeMap<(usize, usize), u64>;

/// Enumerates with growing size cuts until two consecutive cuts agree.
fn converge(en: &mut Enumerator<'_>, root: u32, max_perimeter: usize) -> Result<(usize, Census)> {
    let mut cut = max_perimeter.max(2);
    en.run(root, max_perimeter, cut)?;
    let mut prev = en.census.clone();
    loop {
        let next = cut + 2;
        if next > MAX_CLUSTER_ELEMENTS {
            return Err(Error::Enumeration(format!(
                "cluster census did not settle below {MAX_CLUSTER_ELEMENTS} elements at perimeter {max_perimeter}"
            )));
        }
        en.run(root, max_perimeter, next)?;
        if en.census == prev {
            return Ok((cut, prev));
        }
        prev = en.census.clone();
        cut = next;
    }
}

/// Exhaustively enumerates finite element clusters containing `root` whose
/// perimeter does not exceed `max_perimeter`.
pub fn enumerate_clusters(
    net: &GeneralizedNetwork,
    root: u32,
    max_perimeter: usize,
) -> Result<LocalClusterEnumeration> {
    check_perimeter(max_perimeter)?;
    if root as usize >= net.node_count() {
        return Err(Error::Domain(format!("root {root} out of range")));
    }
    if net.qualified().binary_search(&root).is_err() {
        return Err(Error::Contract(format!(
            "root {root} is not a qualified node"
        )));
    }
    let h = Hypergraph::new(net);
    let ne = net.node_elements();
    let mut en = Enumerator::new(&h, &ne, false);
    let (cut, _) = converge(&mut en, root, max_perimeter)?;
    let mut keep = Enumerator::new(&h, &ne, true);
    keep.run(root, max_perimeter, cut)?;
    Ok(LocalClusterEnumeration {
        root,
        max_perimeter,
        max_size: cut,
        clusters: keep.clusters,
    })
}

/// `1 - Σ count · ε^t (1-ε)^s`, truncated at `order`.
fn census_series(census: &BTreeMap<(usize, usize), u64>, order: usize) -> Result<Vec<i64>> {
    let overflow = || Error::Enumeration("series coefficient overflow".into());
    let mut c = vec![0i64; order + 1];
    c[0] = 1;
    for (&(s, t), &n) in census {
        if t > order {
            continue;
        }
        let n = i64::try_from(n).map_err(|_| overflow())?;
        // Binomial coefficients of (1 - ε)^s.
        let mut binom: i64 = 1;
        for j in 0..=(order - t).min(s) {
            if j > 0 {
                binom = binom.checked_mul((s - j + 1) as i64).ok_or_else(overflow)? / j as i64;
            }
            let term = n.checked_mul(binom).ok_or_else(overflow)?;
            let signed = if j % 2 == 0 { term } else { -term };
            c[t + j] = c[t + j].checked_sub(signed).ok_or_else(overflow)?;
        }
    }
    Ok(c)
}

/// High-density series with its per-root breakdown.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThetaSeries {
    pub network: String,
    pub series: EpsilonPolynomial,
    /// Distinct per-root series and how many roots produced each.
    pub orbits: Vec<(EpsilonPolynomial, usize)>,
    pub roots: usize,
    /// Largest cluster size cut needed for convergence.
    pub max_size: usize,
}

/// Qualified nodes inside one period of the measurement pattern.
fn roots(net: &GeneralizedNetwork) -> Vec<u32> {
    let period = match net.strategy() {
        Strategy::Cep => [1, 1],
        Strategy::Qep => MeasurementPattern::for_kind(net.lattice().kind()).period(),
    };
    let nodes = net.lattice().nodes();
    net.qualified()
        .iter()
        .copied()
        .filter(|&q| {
            let c = nodes[q as usize].cell;
            c[0] < period[0] && c[1] < period[1]
        })
        .collect()
}

/// θ(1 - ε) up to `max_order` by the perimeter method, averaged over the
/// qualified nodes of one pattern period.
///
/// The enumeration runs on `net` when it is large enough; otherwise a larger
/// periodic network of the same kind and strategy is generated with the
/// built-in measurement pattern.
pub fn theta_series_detailed(net: &GeneralizedNetwork, max_order: usize) -> Result<ThetaSeries> {
    check_perimeter(max_order)?;
    if net.qualified().is_empty() {
        return Err(Error::Contract(format!(
            "{} has no qualified nodes",
            net.label()
        )));
    }
    let kind = net.lattice().kind();
    let mut size = 4 * max_order as u32 + 8;
    let mut owned = None;
    if !net.is_periodic() || net.lattice().lx().min(net.lattice().ly()) < size {
        owned = Some(periodic_network(kind, net.strategy(), size)?);
    }
    loop {
        match series_on(owned.as_ref().unwrap_or(net), max_order) {
            Err(Error::Enumeration(msg)) if msg.starts_with("patch too small") => {
                size *= 2;
                if size > 1024 {
                    return Err(Error::Enumeration(msg));
                }
                owned = Some(periodic_network(kind, net.strategy(), size)?);
            }
            other => return other,
        }
    }
}

fn series_on(net: &GeneralizedNetwork, max_order: usize) -> Result<ThetaSeries> {
    let h = Hypergraph::new(net);
    let ne = net.node_elements();
    let roots = roots(net);
    let per_root: Vec<(Vec<i64>, usize)> = roots
        .par_iter()
        .map(|&r| {
            let mut en = Enumerator::new(&h, &ne, false);
            let (cut, census) = converge(&mut en, r, max_order)?;
            Ok((census_series(&census, max_order)?, cut))
        })
        .collect::<Result<_>>()?;
    let mut total = vec![0i64; max_order + 1];
    let mut orbits: Vec<(Vec<i64>, usize)> = Vec::new();
    let mut max_size = 0;
    for (c, cut) in &per_root {
        max_size = max_size.max(*cut);
        for (a, b) in total.iter_mut().zip(c) {
            *a = a
                .checked_add(*b)
                .ok_or_else(|| Error::Enumeration("series coefficient overflow".into()))?;
        }
        match orbits.iter_mut().find(|(o, _)| o == c) {
            Some(o) => o.1 += 1,
            None => orbits.push((c.clone(), 1)),
        }
    }
    Ok(ThetaSeries {
        network: net.label(),
        series: EpsilonPolynomial::new(total, roots.len() as i64, max_order)?,
        orbits: orbits
            .into_iter()
            .map(|(c, n)| Ok((EpsilonPolynomial::new(c, 1, max_order)?, n)))
            .collect::<Result<_>>()?,
        roots: roots.len(),
        max_size,
    })
}

/// θ(1 - ε) truncated at `max_order`.
pub fn theta_series(net: &GeneralizedNetwork, max_order: usize) -> Result<EpsilonPolynomial> {
    Ok(theta_series_detailed(net, max_order)?.series)
}

#[cfg(test)]
mod tests {
    use std::collections::{BTreeSet, HashSet};

    use super::*;
    use crate::lattice::LatticeKind;

    fn net(kind: LatticeKind, strategy: Strategy) -> GeneralizedNetwork {
        periodic_network(kind, strategy, 12).unwrap()
    }

    /// Connected element sets containing `root` with at most `max_s`
    /// elements, grown one element at a time and deduplicated.
    fn naive_census(
        net: &GeneralizedNetwork,
        root: u32,
        max_s: usize,
        max_t: usize,
    ) -> BTreeMap<(usize, usize), u64> {
        let ne = net.node_elements();
        let els = net.elements();
        let nodes_of = |set: &BTreeSet<u32>| {
            let mut n: BTreeSet<u32> = set
                .iter()
                .flat_map(|&e| els[e as usize].members().to_vec())
                .collect();
            n.insert(root);
            n
        };
        let mut census = BTreeMap::new();
        let mut layer: HashSet<BTreeSet<u32>> = HashSet::from([BTreeSet::new()]);
        for s in 0..=max_s {
            let mut next = HashSet::new();
            for set in &layer {
                let nodes = nodes_of(set);
                let touching: BTreeSet<u32> = nodes
                    .iter()
                    .flat_map(|&n| ne[n as usize].iter().copied())
                    .filter(|e| !set.contains(e))
                    .collect();
                if touching.len() <= max_t {
                    *census.entry((s, touching.len())).or_insert(0) += 1;
                }
                for &e in &touching {
                    let mut grown = set.clone();
                    grown.insert(e);
                    next.insert(grown);
                }
            }
            layer = next;
        }
        census
    }

    #[test]
    fn square_cep_small_perimeters() {
        let n = net(LatticeKind::Square, Strategy::Cep);
        let root = n.qualified()[0];
        let e4 = enumerate_clusters(&n, root, 4).unwrap();
        assert_eq!(e4.clusters.len(), 1);
        assert_eq!((e4.clusters[0].occupied, e4.clusters[0].perimeter), (0, 4));
        let e6 = enumerate_clusters(&n, root, 6).unwrap();
        assert_eq!(e6.census(), BTreeMap::from([((0, 4), 1), ((1, 6), 4)]));
        assert!(e6.clusters.iter().all(|c| c.elements.len() == c.occupied));
    }

    #[test]
    fn hexagonal_qep_small_perimeters() {
        let n = net(LatticeKind::Hexagonal, Strategy::Qep);
        let root = n.qualified()[0];
        let e = enumerate_clusters(&n, root, 4).unwrap();
        let series = census_series(&e.census(), 4).unwrap();
        assert_eq!(series, vec![1, 0, 0, -1, -1]);
    }

    #[test]
    fn census_matches_naive_growth() {
        let cases = [
            (LatticeKind::Square, Strategy::Cep, 9),
            (LatticeKind::Square, Strategy::Qep, 9),
            (LatticeKind::Hexagonal, Strategy::Cep, 8),
            (LatticeKind::Kagome, Strategy::Qep, 9),
            (LatticeKind::Triangular, Strategy::Qep, 10),
            (LatticeKind::Dice, Strategy::Qep, 10),
        ];
        for (kind, strategy, cap) in cases {
            let n = periodic_network(kind, strategy, 24).unwrap();
            let root = n.qualified()[0];
            let mut fast = enumerate_clusters(&n, root, cap).unwrap().census();
            fast.retain(|&(s, _), _| s <= 3);
            assert_eq!(fast, naive_census(&n, root, 3, cap), "{}", n.label());
        }
    }

    #[test]
    fn clusters_are_distinct_and_connected() {
        let n = net(LatticeKind::Kagome, Strategy::Cep);
        let root = n.qualified()[0];
        let e = enumerate_clusters(&n, root, 8).unwrap();
        let mut seen = HashSet::new();
        for c in &e.clusters {
            let mut key = c.elements.clone();
            key.sort_unstable();
            assert!(seen.insert(key));
            // Every element is reachable from the root through the others.
            let mut reached: BTreeSet<u32> = BTreeSet::from([root]);
            let mut left: Vec<u32> = c.elements.clone();
            while let Some(i) = left.iter().position(|&el| {
                n.elements()[el as usize]
                    .members()
                    .iter()
                    .any(|m| reached.contains(m))
            }) {
                let el = left.swap_remove(i);
                reached.extend(n.elements()[el as usize].members());
            }
            assert!(left.is_empty());
        }
    }

    #[test]
    fn rejects_bad_requests() {
        let n = net(LatticeKind::Square, Strategy::Qep);
        assert!(enumerate_clusters(&n, n.measured()[0], 4).is_err());
        assert!(enumerate_clusters(&n, n.qualified()[0], MAX_PERIMETER + 1).is_err());
        assert!(theta_series(&n, MAX_PERIMETER + 1).is_err());
    }

    #[test]
    fn known_series() {
        let hex = periodic_network(LatticeKind::Hexagonal, Strategy::Cep, 8).unwrap();
        assert_eq!(
            theta_series(&hex, 4).unwrap().canonical(),
            "1 - e^3 - 3*e^4"
        );
        let sq = periodic_network(LatticeKind::Square, Strategy::Cep, 8).unwrap();
        assert_eq!(theta_series(&sq, 5).unwrap().canonical(), "1 - e^4");
        let dice = periodic_network(LatticeKind::Dice, Strategy::Qep, 6).unwrap();
        let d = theta_series_detailed(&dice, 10).unwrap();
        assert_eq!(d.series.canonical(), "1 - e^6 - 9*e^10");
        assert_eq!(d.roots, 6);
    }

    #[test]
    fn census_series_expands_binomials() {
        // One cluster with s = 2, t = 1: -ε(1 - ε)² = -ε + 2ε² - ε³.
        let c = BTreeMap::from([((2, 1), 1)]);
        assert_eq!(census_series(&c, 4).unwrap(), vec![1, -1, 2, -1, 0]);
        assert_eq!(census_series(&c, 2).unwrap(), vec![1, -1, 2]);
    }
}

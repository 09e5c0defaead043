use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::convolve::BinomialWindow;
use super::rng::sample_rng;
use super::union_find::{UnionFind, WrapUnionFind};
use crate::error::{Error, Result};
use crate::lattice::GeneralizedNetwork;

/// Samples processed sequentially by one task. Fixed so that floating-point
/// reductions do not depend on the thread count.
const CHUNK: usize = 8;

/// Flattened element table used by the hot loops.
#[derive(Debug, Clone)]
pub(crate) struct Hypergraph {
    pub nodes: usize,
    pub members: Vec<[u32; 3]>,
    pub len: Vec<u8>,
    pub disp: Vec<[[i32; 2]; 2]>,
    pub qualified: Vec<bool>,
    pub n_qualified: usize,
}

impl Hypergraph {
    pub fn new(net: &GeneralizedNetwork) -> Self {
        let els = net.elements();
        let mut members = Vec::with_capacity(els.len());
        let mut len = Vec::with_capacity(els.len());
        let mut disp = Vec::with_capacity(els.len());
        for el in els {
            let m = el.members();
            let mut row = [m[0], m[0], m[0]];
            row[..m.len()].copy_from_slice(m);
            members.push(row);
            len.push(m.len() as u8);
            let mut d = [[0i32; 2]; 2];
            for (k, slot) in d.iter_mut().enumerate().take(m.len() - 1) {
                let v = net.member_displacement(el, k + 1);
                *slot = [v[0] as i32, v[1] as i32];
            }
            disp.push(d);
        }
        let mut qualified = vec![false; net.node_count()];
        for &q in net.qualified() {
            qualified[q as usize] = true;
        }
        Self {
            nodes: net.node_count(),
            members,
            len,
            disp,
            n_qualified: net.qualified().len(),
            qualified,
        }
    }

    pub fn elements(&self) -> usize {
        self.members.len()
    }

    /// Occupies each element with probability `p` and unions its members.
    pub fn occupy<R: Rng>(&self, p: f64, rng: &mut R, uf: &mut UnionFind) {
        for (e, m) in self.members.iter().enumerate() {
            if rng.random::<f64>() < p {
                for &x in &m[1..self.len[e] as usize] {
                    uf.union(m[0], x);
                }
            }
        }
    }
}

/// Configuration of a Newman–Ziff sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepConfig {
    pub samples: usize,
    pub seed: u64,
    /// Occupation probabilities at which convolved curves are reported.
    pub p_grid: Vec<f64>,
}

/// Microcanonical and convolved observables of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub network: String,
    pub nodes: usize,
    pub elements: usize,
    pub qualified: usize,
    pub samples: usize,
    /// Fraction of samples with a wrapping cluster after `k` insertions.
    pub wrapping: Vec<f64>,
    /// Mean fraction of qualified nodes in wrapping clusters after `k` insertions.
    pub theta: Vec<f64>,
    /// Mean size of the largest cluster after `k` insertions.
    pub largest: Vec<f64>,
    pub p_grid: Vec<f64>,
    pub wrapping_p: Vec<f64>,
    pub theta_p: Vec<f64>,
    /// `1 - theta_p`, accumulated directly to keep precision near `p = 1`.
    pub deficit_p: Vec<f64>,
    pub theta_p_stderr: Vec<f64>,
    pub largest_p: Vec<f64>,
    /// Per sample, the first `k` at which some cluster wraps (`elements + 1` if never).
    pub k_wrap: Vec<u32>,
}

struct ChunkOut {
    theta_k: Vec<f64>,
    largest_k: Vec<f64>,
    k_wrap: Vec<u32>,
    deficit: Vec<f64>,
    wrapping_p: Vec<f64>,
    largest_p: Vec<f64>,
}

struct Scratch {
    uf: WrapUnionFind,
    order: Vec<u32>,
    deficit_k: Vec<f64>,
    largest_k: Vec<f64>,
}

/// One microcanonical sweep; fills `deficit_k` and `largest_k` for
/// `k = 0..=M` and returns the first wrapping `k`.
fn run_sample(h: &Hypergraph, seed: u64, index: u64, s: &mut Scratch) -> u32 {
    let m = h.elements();
    let mut rng = sample_rng(seed, index);
    s.order.clear();
    s.order.extend(0..m as u32);
    s.order.shuffle(&mut rng);
    s.uf.reset(&h.qualified);
    let nq = h.n_qualified.max(1) as f64;
    let nq_int = h.n_qualified as u64;
    let mut w = 0u64;
    let mut largest = if h.nodes > 0 { 1u32 } else { 0 };
    let mut kw = m as u32 + 1;
    s.deficit_k[0] = 1.0;
    s.largest_k[0] = largest as f64;
    for (i, &e) in s.order.iter().enumerate() {
        let e = e as usize;
        let mem = h.members[e];
        for j in 1..h.len[e] as usize {
            let mg = s.uf.union(mem[0], mem[j], h.disp[e][j - 1]);
            w += mg.newly_wrapping as u64;
            largest = largest.max(mg.root_size);
            if mg.wraps && kw > m as u32 {
                kw = i as u32 + 1;
            }
        }
        s.deficit_k[i + 1] = (nq_int - w) as f64 / nq;
        s.largest_k[i + 1] = largest as f64;
    }
    kw
}

fn run_chunk(
    h: &Hypergraph,
    seed: u64,
    range: std::ops::Range<usize>,
    windows: &[BinomialWindow],
) -> ChunkOut {
    let m = h.elements();
    let g = windows.len();
    let mut s = Scratch {
        uf: WrapUnionFind::new(&h.qualified),
        order: Vec::with_capacity(m),
        deficit_k: vec![0.0; m + 1],
        largest_k: vec![0.0; m + 1],
    };
    let mut out = ChunkOut {
        theta_k: vec![0.0; m + 1],
        largest_k: vec![0.0; m + 1],
        k_wrap: Vec::with_capacity(range.len()),
        deficit: Vec::with_capacity(range.len() * g),
        wrapping_p: vec![0.0; g],
        largest_p: vec![0.0; g],
    };
    for index in range {
        let kw = run_sample(h, seed, index as u64, &mut s);
        out.k_wrap.push(kw);
        for (acc, d) in out.theta_k.iter_mut().zip(&s.deficit_k) {
            *acc += 1.0 - d;
        }
        for (acc, l) in out.largest_k.iter_mut().zip(&s.largest_k) {
            *acc += l;
        }
        for (i, win) in windows.iter().enumerate() {
            out.deficit.push(win.apply(&s.deficit_k));
            out.wrapping_p[i] += win.tail(kw as usize);
            out.largest_p[i] += win.apply(&s.largest_k);
        }
    }
    out
}

fn check_grid(p_grid: &[f64]) -> Result<()> {
    if let Some(p) = p_grid.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(Error::Domain(format!(
            "occupation probability {p} not in [0, 1]"
        )));
    }
    Ok(())
}

/// Runs independent Newman–Ziff sweeps: elements are inserted in a random
/// order, observables are recorded after every insertion and finally
/// convolved with the binomial distribution at each grid probability.
pub fn newman_ziff_sweep(net: &GeneralizedNetwork, config: &SweepConfig) -> Result<SweepResult> {
    if net.elements().is_empty() {
        return Err(Error::Contract("network has no elements".into()));
    }
    if config.samples == 0 {
        return Err(Error::Domain("at least one sample is required".into()));
    }
    check_grid(&config.p_grid)?;
    let h = Hypergraph::new(net);
    let m = h.elements();
    let g = config.p_grid.len();
    let windows: Vec<BinomialWindow> = config
        .p_grid
        .iter()
        .map(|&p| BinomialWindow::new(m, p))
        .collect();

    let n = config.samples;
    let chunks: Vec<std::ops::Range<usize>> = (0..n)
        .step_by(CHUNK)
        .map(|a| a..(a + CHUNK).min(n))
        .collect();
    let batch = rayon::current_num_threads().max(1) * 2;

    let mut theta_k = vec![0.0; m + 1];
    let mut largest_k = vec![0.0; m + 1];
    let mut k_wrap = Vec::with_capacity(n);
    let mut deficit = Vec::with_capacity(n * g);
    let mut wrapping_p = vec![0.0; g];
    let mut largest_p = vec![0.0; g];
    for group in chunks.chunks(batch) {
        let outs: Vec<ChunkOut> = group
            .par_iter()
            .map(|r| run_chunk(&h, config.seed, r.clone(), &windows))
            .collect();
        for o in outs {
            for (a, b) in theta_k.iter_mut().zip(&o.theta_k) {
                *a += b;
            }
            for (a, b) in largest_k.iter_mut().zip(&o.largest_k) {
                *a += b;
            }
            for i in 0..g {
                wrapping_p[i] += o.wrapping_p[i];
                largest_p[i] += o.largest_p[i];
            }
            k_wrap.extend(o.k_wrap);
            deficit.extend(o.deficit);
        }
    }

    let nf = n as f64;
    let mut hist = vec![0usize; m + 2];
    for &kw in &k_wrap {
        hist[kw as usize] += 1;
    }
    let mut cum = 0;
    let wrapping = (0..=m)
        .map(|k| {
            cum += hist[k];
            cum as f64 / nf
        })
        .collect();

    let mut deficit_p = vec![0.0; g];
    let mut stderr = vec![0.0; g];
    for i in 0..g {
        let mean = (0..n).map(|s| deficit[s * g + i]).sum::<f64>() / nf;
        deficit_p[i] = mean;
        if n > 1 {
            let var = (0..n)
                .map(|s| (deficit[s * g + i] - mean).powi(2))
                .sum::<f64>()
                / (nf - 1.0);
            stderr[i] = (var / nf).sqrt();
        }
    }

    Ok(SweepResult {
        network: net.label(),
        nodes: h.nodes,
        elements: m,
        qualified: h.n_qualified,
        samples: n,
        wrapping,
        theta: theta_k.into_iter().map(|x| x / nf).collect(),
        largest: largest_k.into_iter().map(|x| x / nf).collect(),
        p_grid: config.p_grid.clone(),
        wrapping_p: wrapping_p.into_iter().map(|x| x / nf).collect(),
        theta_p: deficit_p.iter().map(|d| 1.0 - d).collect(),
        deficit_p,
        theta_p_stderr: stderr,
        largest_p: largest_p.into_iter().map(|x| x / nf).collect(),
        k_wrap,
    })
}

/// Sweeps that stop as soon as a cluster wraps; returns `k_wrap` per sample.
pub fn wrapping_sweep(net: &GeneralizedNetwork, samples: usize, seed: u64) -> Result<Vec<u32>> {
    if net.elements().is_empty() {
        return Err(Error::Contract("network has no elements".into()));
    }
    let h = Hypergraph::new(net);
    let m = h.elements();
    let chunks: Vec<std::ops::Range<usize>> = (0..samples)
        .step_by(CHUNK)
        .map(|a| a..(a + CHUNK).min(samples))
        .collect();
    let per_chunk: Vec<Vec<u32>> = chunks
        .par_iter()
        .map(|r| {
            let mut uf = WrapUnionFind::new(&h.qualified);
            let mut order: Vec<u32> = Vec::with_capacity(m);
            r.clone()
                .map(|index| {
                    let mut rng = sample_rng(seed, index as u64);
                    order.clear();
                    order.extend(0..m as u32);
                    order.shuffle(&mut rng);
                    uf.reset(&h.qualified);
                    for (i, &e) in order.iter().enumerate() {
                        let e = e as usize;
                        let mem = h.members[e];
                        for j in 1..h.len[e] as usize {
                            if uf.union(mem[0], mem[j], h.disp[e][j - 1]).wraps {
                                return i as u32 + 1;
                            }
                        }
                    }
                    m as u32 + 1
                })
                .collect()
        })
        .collect();
    Ok(per_chunk.into_iter().flatten().collect())
}

/// Cluster labelling of one canonical sample.
#[derive(Debug, Clone)]
pub struct Clustering {
    /// Root id of the cluster of every node.
    pub labels: Vec<u32>,
    pub clusters: usize,
}

/// Occupies every element independently with probability `p` and unions the
/// members of occupied elements.
pub fn sample_and_cluster(net: &GeneralizedNetwork, p: f64, seed: u64) -> Result<Clustering> {
    check_grid(&[p])?;
    let h = Hypergraph::new(net);
    let mut uf = UnionFind::new(h.nodes);
    let mut rng = sample_rng(seed, 0);
    h.occupy(p, &mut rng, &mut uf);
    Ok(Clustering {
        clusters: uf.count(),
        labels: uf.labels(),
    })
}

#[cfg(test)]
mod tests {
    use std::collections::VecDeque;
    use std::sync::Arc;

    use rand::Rng;

    use super::*;
    use crate::lattice::{build_network, generate_lattice, Boundary, LatticeKind, Strategy};

    fn net(
        kind: LatticeKind,
        l: u32,
        boundary: Boundary,
        strategy: Strategy,
    ) -> GeneralizedNetwork {
        build_network(
            Arc::new(generate_lattice(kind, l, l, boundary).unwrap()),
            strategy,
        )
        .unwrap()
    }

    /// Component labels by breadth-first search over occupied elements.
    fn bfs_partition(net: &GeneralizedNetwork, occupied: &[bool]) -> Vec<usize> {
        let n = net.node_count();
        let mut adj = vec![Vec::new(); n];
        for (e, el) in net.elements().iter().enumerate() {
            if occupied[e] {
                let m = el.members();
                for &a in m {
                    for &b in m {
                        if a != b {
                            adj[a as usize].push(b as usize);
                        }
                    }
                }
            }
        }
        let mut comp = vec![usize::MAX; n];
        let mut next = 0;
        for s in 0..n {
            if comp[s] != usize::MAX {
                continue;
            }
            comp[s] = next;
            let mut q = VecDeque::from([s]);
            while let Some(x) = q.pop_front() {
                for &y in &adj[x] {
                    if comp[y] == usize::MAX {
                        comp[y] = next;
                        q.push_back(y);
                    }
                }
            }
            next += 1;
        }
        comp
    }

    fn same_partition(a: &[u32], b: &[usize]) -> bool {
        (0..a.len()).all(|i| (0..a.len()).all(|j| (a[i] == a[j]) == (b[i] == b[j])))
    }

    fn occupied_set(net: &GeneralizedNetwork, p: f64, seed: u64) -> Vec<bool> {
        let mut rng = sample_rng(seed, 0);
        (0..net.elements().len())
            .map(|_| rng.random::<f64>() < p)
            .collect()
    }

    #[test]
    fn clustering_matches_bfs_on_square_4x4() {
        let n = net(LatticeKind::Square, 4, Boundary::Periodic, Strategy::Cep);
        let c = sample_and_cluster(&n, 0.5, 11).unwrap();
        let bfs = bfs_partition(&n, &occupied_set(&n, 0.5, 11));
        assert!(same_partition(&c.labels, &bfs));
        assert_eq!(c.clusters, *bfs.iter().max().unwrap() + 1);
    }

    #[test]
    fn clustering_matches_bfs_on_random_instances() {
        let mut rng = sample_rng(2024, 0);
        let mut checked = 0u64;
        while checked < 100 {
            let kind = LatticeKind::ALL[rng.random_range(0..LatticeKind::ALL.len())];
            let strategy = if rng.random::<bool>() {
                Strategy::Cep
            } else {
                Strategy::Qep
            };
            let boundary = if rng.random::<bool>() {
                Boundary::Open
            } else {
                Boundary::Periodic
            };
            let mut l = rng.random_range(3..=6);
            if strategy == Strategy::Qep && boundary == Boundary::Periodic {
                let pat = crate::lattice::MeasurementPattern::for_kind(kind);
                l = pat.fit_size(l, 0).max(pat.fit_size(l, 1));
            }
            let nw = net(kind, l, boundary, strategy);
            if nw.node_count() > 64 {
                continue;
            }
            let p = rng.random::<f64>();
            let c = sample_and_cluster(&nw, p, checked).unwrap();
            let bfs = bfs_partition(&nw, &occupied_set(&nw, p, checked));
            assert!(same_partition(&c.labels, &bfs), "{} p={p}", nw.label());
            checked += 1;
        }
    }

    #[test]
    fn clustering_extremes() {
        let n = net(LatticeKind::Kagome, 4, Boundary::Periodic, Strategy::Qep);
        assert_eq!(
            sample_and_cluster(&n, 0.0, 1).unwrap().clusters,
            n.node_count()
        );
        assert_eq!(sample_and_cluster(&n, 1.0, 1).unwrap().clusters, 1);
        assert!(sample_and_cluster(&n, 1.5, 1).is_err());
    }

    #[test]
    fn sweep_is_deterministic_and_bounded() {
        let n = net(
            LatticeKind::Triangular,
            8,
            Boundary::Periodic,
            Strategy::Qep,
        );
        let cfg = SweepConfig {
            samples: 37,
            seed: 5,
            p_grid: vec![0.0, 0.3, 0.6, 0.9, 1.0],
        };
        let a = newman_ziff_sweep(&n, &cfg).unwrap();
        let b = newman_ziff_sweep(&n, &cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.theta_p[0], 0.0);
        assert_eq!(a.theta_p[4], 1.0);
        assert_eq!(a.wrapping_p[4], 1.0);
        for v in a.theta.iter().chain(&a.wrapping).chain(&a.theta_p) {
            assert!((0.0..=1.0).contains(v));
        }
        assert!(a.theta_p_stderr.iter().all(|&s| s >= 0.0));
        let mut c = cfg.clone();
        c.seed = 6;
        assert_ne!(newman_ziff_sweep(&n, &c).unwrap().theta, a.theta);
    }

    #[test]
    fn sample_observables_are_monotone() {
        for strategy in [Strategy::Cep, Strategy::Qep] {
            let n = net(LatticeKind::Square, 8, Boundary::Periodic, strategy);
            let h = Hypergraph::new(&n);
            let m = h.elements();
            let mut s = Scratch {
                uf: WrapUnionFind::new(&h.qualified),
                order: Vec::new(),
                deficit_k: vec![0.0; m + 1],
                largest_k: vec![0.0; m + 1],
            };
            for index in 0..20 {
                let kw = run_sample(&h, 3, index, &mut s) as usize;
                assert!(s.deficit_k.windows(2).all(|w| w[1] <= w[0]));
                assert!(s.largest_k.windows(2).all(|w| w[1] >= w[0]));
                assert!(kw <= m);
                // Before the first wrap no qualified node can be in a wrapping cluster.
                assert!(s.deficit_k[..kw].iter().all(|&d| d == 1.0));
                assert_eq!(s.largest_k[m], n.node_count() as f64);
            }
        }
    }

    #[test]
    fn wrapping_sweep_agrees_with_full_sweep() {
        let n = net(LatticeKind::Hexagonal, 6, Boundary::Periodic, Strategy::Cep);
        let full = newman_ziff_sweep(
            &n,
            &SweepConfig {
                samples: 20,
                seed: 9,
                p_grid: vec![],
            },
        )
        .unwrap();
        assert_eq!(wrapping_sweep(&n, 20, 9).unwrap(), full.k_wrap);
    }

    #[test]
    fn subcritical_theta_vanishes() {
        let n = net(LatticeKind::Square, 32, Boundary::Periodic, Strategy::Cep);
        let r = newman_ziff_sweep(
            &n,
            &SweepConfig {
                samples: 50,
                seed: 1,
                p_grid: vec![0.25],
            },
        )
        .unwrap();
        assert!(r.theta_p[0] < 1e-6, "{}", r.theta_p[0]);
    }
}

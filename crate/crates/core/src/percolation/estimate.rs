use std::sync::Arc;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::convolve::BinomialWindow;
use super::rng::{derive_seed, sample_rng};
use super::sweep::{newman_ziff_sweep, wrapping_sweep, Hypergraph, SweepConfig};
use super::union_find::UnionFind;
use crate::error::{Error, Result};
use crate::lattice::{
    build_network, generate_lattice, Boundary, GeneralizedNetwork, LatticeKind, MeasurementPattern,
    Strategy,
};
use crate::numfmt::g17;

/// Tag recorded with every θ estimate.
pub const THETA_DEFINITION: &str = "wrapping-cluster membership";
/// Tag recorded with every threshold estimate.
pub const THRESHOLD_METHOD: &str = "wrapping-probability crossing";

const BOOTSTRAP_ROUNDS: usize = 200;

/// θ(p) on a grid with Monte Carlo standard errors.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThetaEstimate {
    pub network: String,
    pub definition: String,
    pub samples: usize,
    pub p: Vec<f64>,
    pub theta: Vec<f64>,
    /// `1 - theta`, kept separately for precision near `p = 1`.
    pub deficit: Vec<f64>,
    pub stderr: Vec<f64>,
}

impl ThetaEstimate {
    /// Header row of [`ThetaEstimate::to_csv`].
    pub const CSV_HEADER: &'static str = "p,theta_mean,theta_stderr,n_samples";

    /// One row per grid point, floats at 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for i in 0..self.p.len() {
            out.push_str(&format!(
                "{},{},{},{}\n",
                g17(self.p[i]),
                g17(self.theta[i]),
                g17(self.stderr[i]),
                self.samples
            ));
        }
        out
    }
}

/// Fraction of qualified nodes in wrapping clusters, averaged over all
/// qualified nodes of each sample and then over samples.
pub fn estimate_theta(
    net: &GeneralizedNetwork,
    p_grid: &[f64],
    samples: usize,
    seed: u64,
) -> Result<ThetaEstimate> {
    if net.qualified().is_empty() {
        return Err(Error::Contract(format!(
            "{} has no qualified nodes",
            net.label()
        )));
    }
    if !net.is_periodic() {
        return Err(Error::Contract(
            "θ is defined through wrapping clusters and needs periodic boundaries".into(),
        ));
    }
    let sweep = newman_ziff_sweep(
        net,
        &SweepConfig {
            samples,
            seed,
            p_grid: p_grid.to_vec(),
        },
    )?;
    Ok(ThetaEstimate {
        network: sweep.network,
        definition: THETA_DEFINITION.into(),
        samples,
        p: sweep.p_grid,
        theta: sweep.theta_p,
        deficit: sweep.deficit_p,
        stderr: sweep.theta_p_stderr,
    })
}

/// Connection probability between two far-apart qualified nodes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PabEstimate {
    pub network: String,
    pub p: f64,
    pub a: u32,
    pub b: u32,
    /// Periodic distance between A and B in lattice units.
    pub distance: f64,
    pub samples: usize,
    pub value: f64,
    pub stderr: f64,
}

/// Picks A near the origin and B half a system size away along both axes.
pub fn select_ab(net: &GeneralizedNetwork) -> Result<(u32, u32)> {
    let q = net.qualified();
    if q.len() < 2 {
        return Err(Error::Contract(format!(
            "{} has fewer than two qualified nodes",
            net.label()
        )));
    }
    let l = net.lattice();
    let a = q[0];
    let na = &l.nodes()[a as usize];
    let target = [
        (na.cell[0] + l.lx() / 2) % l.lx(),
        (na.cell[1] + l.ly() / 2) % l.ly(),
    ];
    let cell_gap = |c: [u32; 2]| {
        let d = |x: u32, t: u32, n: u32| {
            let d = x.abs_diff(t);
            d.min(n - d)
        };
        d(c[0], target[0], l.lx()) + d(c[1], target[1], l.ly())
    };
    let b = q[1..]
        .iter()
        .copied()
        .min_by_key(|&b| {
            let nb = &l.nodes()[b as usize];
            (cell_gap(nb.cell), nb.sublattice != na.sublattice, b)
        })
        .expect("at least two qualified nodes");
    Ok((a, b))
}

/// Estimates `P(A <-> B)` by canonical sampling at fixed `p`.
pub fn estimate_p_ab(
    net: &GeneralizedNetwork,
    p: f64,
    samples: usize,
    seed: u64,
) -> Result<PabEstimate> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain(format!(
            "occupation probability {p} not in [0, 1]"
        )));
    }
    if samples == 0 {
        return Err(Error::Domain("at least one sample is required".into()));
    }
    let (a, b) = select_ab(net)?;
    let h = Hypergraph::new(net);
    let hits: Vec<bool> = (0..samples)
        .into_par_iter()
        .map_init(
            || UnionFind::new(h.nodes),
            |uf, s| {
                uf.reset();
                let mut rng = sample_rng(seed, s as u64);
                h.occupy(p, &mut rng, uf);
                uf.same(a, b)
            },
        )
        .collect();
    let k = hits.iter().filter(|&&x| x).count();
    let n = samples as f64;
    let value = k as f64 / n;
    Ok(PabEstimate {
        network: net.label(),
        p,
        a,
        b,
        distance: net.lattice().min_image_distance(a, b),
        samples,
        value,
        stderr: (value * (1.0 - value) / n).sqrt(),
    })
}

/// Critical probability from the crossing of wrapping probabilities.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdEstimate {
    pub network: String,
    pub method: String,
    pub p_c: f64,
    pub uncertainty: f64,
    /// Cell counts along each axis of the lattices used.
    pub sizes: Vec<u32>,
    pub samples: usize,
    /// Wrapping probability at the crossing.
    pub crossing_value: f64,
    pub bootstrap_rounds: usize,
}

/// Wrapping onset of every sample of one system size.
#[derive(Debug, Clone)]
struct WrapCurve {
    elements: usize,
    k_wrap: Vec<u32>,
}

impl WrapCurve {
    /// `R(p) = mean_s P(K >= k_wrap_s)` with sample multiplicities `counts`.
    fn eval_tails(&self, win: &BinomialWindow, tails: &[f64], counts: Option<&[u32]>) -> f64 {
        let tail = |k: u32| {
            let k = k as usize;
            if k <= win.start {
                1.0
            } else if k >= win.end() {
                0.0
            } else {
                tails[k - win.start]
            }
        };
        match counts {
            None => self.k_wrap.iter().map(|&k| tail(k)).sum::<f64>() / self.k_wrap.len() as f64,
            Some(c) => {
                let total: u32 = c.iter().sum();
                self.k_wrap
                    .iter()
                    .zip(c)
                    .filter(|(_, &n)| n > 0)
                    .map(|(&k, &n)| n as f64 * tail(k))
                    .sum::<f64>()
                    / total as f64
            }
        }
    }

    fn eval(&self, p: f64) -> f64 {
        let win = BinomialWindow::new(self.elements, p);
        let tails = win.tails();
        self.eval_tails(&win, &tails, None)
    }
}

struct Grid {
    p: Vec<f64>,
    small: Vec<(BinomialWindow, Vec<f64>)>,
    large: Vec<(BinomialWindow, Vec<f64>)>,
}

impl Grid {
    fn new(p: Vec<f64>, small: &WrapCurve, large: &WrapCurve) -> Self {
        let build = |c: &WrapCurve| {
            p.iter()
                .map(|&x| {
                    let w = BinomialWindow::new(c.elements, x);
                    let t = w.tails();
                    (w, t)
                })
                .collect()
        };
        Self {
            small: build(small),
            large: build(large),
            p,
        }
    }

    /// Crossing of the two curves on this grid, by linear interpolation of
    /// their difference, choosing the sign change nearest `R = 1/2`.
    fn crossing(
        &self,
        small: &WrapCurve,
        large: &WrapCurve,
        counts: Option<(&[u32], &[u32])>,
    ) -> Option<(f64, f64)> {
        let mut rs = Vec::with_capacity(self.p.len());
        for i in 0..self.p.len() {
            let (ws, ts) = &self.small[i];
            let (wl, tl) = &self.large[i];
            let a = small.eval_tails(ws, ts, counts.map(|c| c.0));
            let b = large.eval_tails(wl, tl, counts.map(|c| c.1));
            rs.push((a, b));
        }
        find_crossing(&self.p, &rs).map(|(i, t)| {
            let p = self.p[i] + t * (self.p[i + 1] - self.p[i]);
            let r = 0.5 * (rs[i].0 + rs[i].1) * (1.0 - t) + 0.5 * (rs[i + 1].0 + rs[i + 1].1) * t;
            (p, r)
        })
    }
}

/// Index and interpolation fraction of the sign change of `a - b` nearest to
/// the middle of the transition, restricted to `0.02 <= R <= 0.98`.
fn find_crossing(p: &[f64], rs: &[(f64, f64)]) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64, f64)> = None;
    let valid = |r: (f64, f64)| {
        let m = 0.5 * (r.0 + r.1);
        (0.02..=0.98).contains(&m)
    };
    for i in 0..p.len().saturating_sub(1) {
        if !valid(rs[i]) && !valid(rs[i + 1]) {
            continue;
        }
        let f0 = rs[i].0 - rs[i].1;
        let f1 = rs[i + 1].0 - rs[i + 1].1;
        if f0 == 0.0 && f1 == 0.0 {
            continue;
        }
        if (f0 >= 0.0) != (f1 >= 0.0) || f1 == 0.0 {
            let t = if f0 == f1 { 0.5 } else { f0 / (f0 - f1) };
            let mid = 0.25 * (rs[i].0 + rs[i].1 + rs[i + 1].0 + rs[i + 1].1);
            let score = (mid - 0.5).abs();
            if best.is_none_or(|b| score < b.2) {
                best = Some((i, t.clamp(0.0, 1.0), score));
            }
        }
    }
    best.map(|(i, t, _)| (i, t))
}

/// Estimates the threshold from networks of increasing size; the crossing of
/// the two largest sizes is reported.
pub fn estimate_threshold_networks(
    nets: &[GeneralizedNetwork],
    samples: usize,
    seed: u64,
) -> Result<ThresholdEstimate> {
    if nets.len() < 2 {
        return Err(Error::Domain(
            "threshold estimation needs at least two sizes".into(),
        ));
    }
    if samples < 2 {
        return Err(Error::Domain(
            "threshold estimation needs at least two samples".into(),
        ));
    }
    if let Some(n) = nets.iter().find(|n| !n.is_periodic()) {
        return Err(Error::Contract(format!("{} is not periodic", n.label())));
    }
    let curves: Vec<WrapCurve> = nets[nets.len() - 2..]
        .iter()
        .enumerate()
        .map(|(i, n)| {
            Ok(WrapCurve {
                elements: n.elements().len(),
                k_wrap: wrapping_sweep(n, samples, derive_seed(seed, i as u64 + 1))?,
            })
        })
        .collect::<Result<_>>()?;
    let (small, large) = (&curves[0], &curves[1]);

    // Coarse scan, then bisection on the exact convolved curves.
    let coarse: Vec<f64> = (1..200).map(|i| i as f64 * 0.005).collect();
    let rs: Vec<(f64, f64)> = coarse
        .iter()
        .map(|&p| (small.eval(p), large.eval(p)))
        .collect();
    let (i, _) = find_crossing(&coarse, &rs)
        .ok_or_else(|| Error::Estimation("wrapping probabilities do not cross in (0, 1)".into()))?;
    let (mut lo, mut hi) = (coarse[i], coarse[i + 1]);
    let f_lo = rs[i].0 - rs[i].1;
    for _ in 0..40 {
        let mid = 0.5 * (lo + hi);
        let f = small.eval(mid) - large.eval(mid);
        if (f >= 0.0) == (f_lo >= 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let p_c = 0.5 * (lo + hi);
    let crossing_value = 0.5 * (small.eval(p_c) + large.eval(p_c));

    // Bootstrap over samples on a fine grid around the estimate.
    let fine: Vec<f64> = (-100..=100)
        .map(|j| p_c + j as f64 * 5e-4)
        .filter(|p| *p > 0.0 && *p < 1.0)
        .collect();
    let grid = Grid::new(fine, small, large);
    let boot_seed = derive_seed(seed, 0xB0075);
    let values: Vec<f64> = (0..BOOTSTRAP_ROUNDS)
        .into_par_iter()
        .filter_map(|b| {
            let mut rng = sample_rng(boot_seed, b as u64);
            let mut resample = |n: usize| {
                let mut c = vec![0u32; n];
                for _ in 0..n {
                    c[rng.random_range(0..n)] += 1;
                }
                c
            };
            let cs = resample(small.k_wrap.len());
            let cl = resample(large.k_wrap.len());
            grid.crossing(small, large, Some((&cs, &cl))).map(|x| x.0)
        })
        .collect();
    let uncertainty = if values.len() >= 2 {
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (values.len() - 1) as f64).sqrt()
    } else {
        0.0
    };
    Ok(ThresholdEstimate {
        network: nets[nets.len() - 1].label(),
        method: THRESHOLD_METHOD.into(),
        p_c,
        uncertainty: uncertainty.max(hi - lo),
        sizes: nets.iter().map(|n| n.lattice().lx()).collect(),
        samples,
        crossing_value,
        bootstrap_rounds: values.len(),
    })
}

/// Builds a periodic network of roughly `size` cells per axis, rounded up to
/// a multiple of the measurement period for the multipartite strategy.
pub fn periodic_network(
    kind: LatticeKind,
    strategy: Strategy,
    size: u32,
) -> Result<GeneralizedNetwork> {
    let (lx, ly) = match strategy {
        Strategy::Cep => (size, size),
        Strategy::Qep => {
            let p = MeasurementPattern::for_kind(kind);
            (p.fit_size(size, 0), p.fit_size(size, 1))
        }
    };
    let lattice = Arc::new(generate_lattice(kind, lx, ly, Boundary::Periodic)?);
    build_network(lattice, strategy)
}

/// Threshold of `kind` under `strategy` from sizes such as `[64, 128]`.
pub fn estimate_threshold(
    kind: LatticeKind,
    strategy: Strategy,
    sizes: &[u32],
    samples: usize,
    seed: u64,
) -> Result<ThresholdEstimate> {
    if sizes.len() < 2 {
        return Err(Error::Domain(
            "threshold estimation needs at least two sizes".into(),
        ));
    }
    let nets = sizes
        .iter()
        .map(|&s| periodic_network(kind, strategy, s))
        .collect::<Result<Vec<_>>>()?;
    estimate_threshold_networks(&nets, samples, seed)
}

/// One grid point of a strategy comparison.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub p: f64,
    pub theta_cep: f64,
    pub stderr_cep: f64,
    pub theta_qep: f64,
    pub stderr_qep: f64,
    /// `θ̂ - θ′`, computed from the deficits.
    pub difference: f64,
    pub combined_stderr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    pub kind: LatticeKind,
    pub size: u32,
    pub samples: usize,
    pub rows: Vec<ComparisonRow>,
    pub threshold_cep: Option<ThresholdEstimate>,
    pub threshold_qep: Option<ThresholdEstimate>,
    /// Relative gain `1 - p̂_c / p′_c`.
    pub delta: Option<f64>,
}

/// Options for [`compare_strategies`].
#[derive(Debug, Clone, PartialEq)]
pub struct CompareOptions {
    pub size: u32,
    pub samples: usize,
    pub seed: u64,
    /// Sizes and sample count for thresholds, if they are wanted.
    pub thresholds: Option<(Vec<u32>, usize)>,
}

/// Paired θ′ and θ̂ estimates on a common grid and lattice size.
pub fn compare_strategies(
    kind: LatticeKind,
    p_grid: &[f64],
    opts: &CompareOptions,
) -> Result<Comparison> {
    let qep = periodic_network(kind, Strategy::Qep, opts.size)?;
    let l = qep.lattice();
    let cep = build_network(
        Arc::new(generate_lattice(kind, l.lx(), l.ly(), Boundary::Periodic)?),
        Strategy::Cep,
    )?;
    let tc = estimate_theta(&cep, p_grid, opts.samples, derive_seed(opts.seed, 1))?;
    let tq = estimate_theta(&qep, p_grid, opts.samples, derive_seed(opts.seed, 2))?;
    let rows = (0..p_grid.len())
        .map(|i| ComparisonRow {
            p: p_grid[i],
            theta_cep: tc.theta[i],
            stderr_cep: tc.stderr[i],
            theta_qep: tq.theta[i],
            stderr_qep: tq.stderr[i],
            difference: tc.deficit[i] - tq.deficit[i],
            combined_stderr: tc.stderr[i].hypot(tq.stderr[i]),
        })
        .collect();
    let (threshold_cep, threshold_qep, delta) = match &opts.thresholds {
        Some((sizes, samples)) => {
            let c = estimate_threshold(
                kind,
                Strategy::Cep,
                sizes,
                *samples,
                derive_seed(opts.seed, 3),
            )?;
            let q = estimate_threshold(
                kind,
                Strategy::Qep,
                sizes,
                *samples,
                derive_seed(opts.seed, 4),
            )?;
            let d = 1.0 - q.p_c / c.p_c;
            (Some(c), Some(q), Some(d))
        }
        None => (None, None, None),
    };
    Ok(Comparison {
        kind,
        size: l.lx(),
        samples: opts.samples,
        rows,
        threshold_cep,
        threshold_qep,
        delta,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::{eval_series, EpsilonPolynomial};

    fn square(strategy: Strategy, l: u32) -> GeneralizedNetwork {
        periodic_network(LatticeKind::Square, strategy, l).unwrap()
    }

    #[test]
    fn theta_contract() {
        let open = build_network(
            Arc::new(generate_lattice(LatticeKind::Square, 6, 6, Boundary::Open).unwrap()),
            Strategy::Cep,
        )
        .unwrap();
        assert!(matches!(
            estimate_theta(&open, &[0.5], 10, 1),
            Err(Error::Contract(_))
        ));
        let t = estimate_theta(&square(Strategy::Cep, 8), &[0.0, 1.0], 10, 1).unwrap();
        assert_eq!(t.theta, vec![0.0, 1.0]);
        assert_eq!(t.definition, THETA_DEFINITION);
        assert_eq!(
            t.to_csv(),
            "p,theta_mean,theta_stderr,n_samples\n0,0,0,10\n1,1,0,10\n"
        );
    }

    #[test]
    fn theta_follows_series_near_one() {
        let t = estimate_theta(&square(Strategy::Cep, 32), &[0.9], 400, 3).unwrap();
        let series = eval_series(&EpsilonPolynomial::one_minus(&[(4, 1), (6, 4)], 6), 0.9);
        assert!(
            (t.theta[0] - series).abs() < 3.0 * t.stderr[0] + 1e-5,
            "{t:?}"
        );
    }

    #[test]
    fn p_ab_extremes() {
        let n = square(Strategy::Qep, 8);
        let (a, b) = select_ab(&n).unwrap();
        assert_ne!(a, b);
        let r = estimate_p_ab(&n, 1.0, 20, 1).unwrap();
        assert_eq!((r.value, r.stderr), (1.0, 0.0));
        assert_eq!(estimate_p_ab(&n, 0.0, 20, 1).unwrap().value, 0.0);
        assert!((r.distance - 4.0 * 2f64.sqrt()).abs() < 1e-9);
        assert!(estimate_p_ab(&n, 1.1, 20, 1).is_err());
    }

    #[test]
    fn threshold_of_small_square() {
        let t = estimate_threshold(LatticeKind::Square, Strategy::Cep, &[16, 32], 400, 7).unwrap();
        assert!((t.p_c - 0.5).abs() < 0.03, "{t:?}");
        assert!(t.uncertainty > 0.0);
        assert_eq!(t.method, THRESHOLD_METHOD);
        assert!(estimate_threshold(LatticeKind::Square, Strategy::Cep, &[16], 400, 7).is_err());
        let again =
            estimate_threshold(LatticeKind::Square, Strategy::Cep, &[16, 32], 400, 7).unwrap();
        assert_eq!(t, again);
    }

    #[test]
    fn comparison_at_full_occupation() {
        let c = compare_strategies(
            LatticeKind::Hexagonal,
            &[1.0],
            &CompareOptions {
                size: 8,
                samples: 10,
                seed: 1,
                thresholds: None,
            },
        )
        .unwrap();
        let r = &c.rows[0];
        assert_eq!((r.theta_cep, r.theta_qep, r.difference), (1.0, 1.0, 0.0));
        assert!(c.delta.is_none());
    }

    #[test]
    fn crossing_picks_middle_sign_change() {
        let p = [0.1, 0.2, 0.3, 0.4];
        let rs = [(0.1, 0.05), (0.4, 0.45), (0.6, 0.65), (0.9, 0.99)];
        let (i, t) = find_crossing(&p, &rs).unwrap();
        assert_eq!(i, 0);
        assert!((t - 0.5).abs() < 1e-12);
        assert!(find_crossing(&p, &[(0.5, 0.4); 4]).is_none());
    }
}

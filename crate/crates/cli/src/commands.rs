//! One function per subcommand.

use std::sync::Arc;

use perconet_core::lattice::{
    build_network, export_network, generate_lattice, import_network, qep_network,
    GeneralizedNetwork, LatticeKind, NetworkStats, Strategy,
};
use perconet_core::percolation::{
    compare_strategies, derive_seed, estimate_p_ab, estimate_theta, estimate_threshold,
    estimate_threshold_networks, periodic_network, CompareOptions,
};
use perconet_core::quantum::{
    extract_bell, ghz_success_prob, merge_ghz, singlet_conversion_prob, star_measurement_oracle,
    PureState, StateVector, FIDELITY_TOL, MAX_ORACLE_LINKS, PROB_TOL,
};
use perconet_core::series::theta_series_detailed;
use serde_json::json;

use crate::config::RunConfig;
use crate::output::{row, Cell, Data, Emitter};
use crate::Failure;

fn kind(cfg: &RunConfig) -> Result<LatticeKind, Failure> {
    cfg.lattice
        .ok_or_else(|| Failure::Usage("a lattice kind (--lattice) or --network is required".into()))
}

fn load(path: &std::path::Path) -> Result<GeneralizedNetwork, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Runtime(format!("{}: {e}", path.display())))?;
    import_network(&text).map_err(|e| Failure::Runtime(format!("{}: {e}", path.display())))
}

/// The network named by `--network`, or one generated from the lattice flags.
fn network(cfg: &RunConfig) -> Result<GeneralizedNetwork, Failure> {
    match cfg.network.as_slice() {
        [] => {
            let lattice = generate_lattice(kind(cfg)?, cfg.lx, cfg.ly, cfg.boundary)?;
            Ok(build_network(Arc::new(lattice), cfg.strategy)?)
        }
        [one] => load(one),
        _ => Err(Failure::Usage(
            "this command takes a single --network".into(),
        )),
    }
}

fn grid(cfg: &RunConfig) -> Result<&[f64], Failure> {
    if cfg.p.is_empty() {
        return Err(Failure::Usage(
            "an occupation grid (--p or --phi) is required".into(),
        ));
    }
    Ok(&cfg.p)
}

fn stats_json(s: &NetworkStats) -> serde_json::Value {
    serde_json::to_value(s).expect("stats serialise")
}

fn describe(net: &GeneralizedNetwork) -> String {
    let s = net.stats();
    format!(
        "{}: {} nodes, {} bonds, {} GHZ triangles, {} qualified, f = {}/{}",
        net.label(),
        s.nodes,
        s.bonds,
        s.ghz,
        s.qualified,
        s.f_ratio.0,
        s.f_ratio.1
    )
}

pub fn lattice(cfg: &RunConfig) -> Result<(), Failure> {
    let net = match cfg.network.as_slice() {
        [] => {
            let lattice = generate_lattice(kind(cfg)?, cfg.lx, cfg.ly, cfg.boundary)?;
            build_network(Arc::new(lattice), Strategy::Cep)?
        }
        _ => network(cfg)?,
    };
    let out = Emitter::new(cfg);
    out.finish(
        Data::Network(export_network(&net)),
        json!({ "network": net.label(), "stats": stats_json(&net.stats()) }),
        &describe(&net),
    )
}

pub fn transform(cfg: &RunConfig) -> Result<(), Failure> {
    let net = match cfg.network.as_slice() {
        [] => network(cfg)?,
        _ => {
            let source = network(cfg)?;
            match cfg.strategy {
                Strategy::Qep => qep_network(source.lattice_arc().clone())?,
                Strategy::Cep => build_network(source.lattice_arc().clone(), Strategy::Cep)?,
            }
        }
    };
    let out = Emitter::new(cfg);
    out.finish(
        Data::Network(export_network(&net)),
        json!({ "network": net.label(), "stats": stats_json(&net.stats()) }),
        &describe(&net),
    )
}

pub fn threshold(cfg: &RunConfig) -> Result<(), Failure> {
    let t = if cfg.network.is_empty() {
        estimate_threshold(kind(cfg)?, cfg.strategy, &cfg.sizes, cfg.samples, cfg.seed)?
    } else {
        let nets = cfg
            .network
            .iter()
            .map(|p| load(p))
            .collect::<Result<Vec<_>, _>>()?;
        estimate_threshold_networks(&nets, cfg.samples, cfg.seed)?
    };
    let sizes = t
        .sizes
        .iter()
        .map(|s| s.to_string())
        .collect::<Vec<_>>()
        .join(" ");
    let out = Emitter::new(cfg);
    let rows = vec![row(&[
        Cell::S(t.network.clone()),
        Cell::S(t.method.clone()),
        Cell::F(t.p_c),
        Cell::F(t.uncertainty),
        Cell::F(t.crossing_value),
        Cell::S(sizes),
        Cell::U(t.samples as u64),
    ])];
    let summary = format!(
        "{}: p_c = {:.4} +- {:.4} ({})",
        t.network, t.p_c, t.uncertainty, t.method
    );
    out.finish(
        Data::Csv {
            header: "network,method,p_c,uncertainty,crossing_value,sizes,n_samples".into(),
            rows,
        },
        serde_json::to_value(&t).expect("serialises"),
        &summary,
    )
}

pub fn theta(cfg: &RunConfig) -> Result<(), Failure> {
    let net = network(cfg)?;
    let t = estimate_theta(&net, grid(cfg)?, cfg.samples, cfg.seed)?;
    let rows = (0..t.p.len())
        .map(|i| {
            row(&[
                Cell::F(t.p[i]),
                Cell::F(t.theta[i]),
                Cell::F(t.stderr[i]),
                Cell::U(t.samples as u64),
            ])
        })
        .collect();
    let summary = format!(
        "{}: theta at {} points from {} sweeps",
        t.network,
        t.p.len(),
        t.samples
    );
    Emitter::new(cfg).finish(
        Data::Csv {
            header: "p,theta_mean,theta_stderr,n_samples".into(),
            rows,
        },
        serde_json::to_value(&t).expect("serialises"),
        &summary,
    )
}

pub fn pab(cfg: &RunConfig) -> Result<(), Failure> {
    let net = network(cfg)?;
    let mut rows = Vec::new();
    let mut results = Vec::new();
    for (i, &p) in grid(cfg)?.iter().enumerate() {
        let r = estimate_p_ab(&net, p, cfg.samples, derive_seed(cfg.seed, i as u64))?;
        rows.push(row(&[
            Cell::F(r.p),
            Cell::F(r.value),
            Cell::F(r.stderr),
            Cell::U(r.samples as u64),
            Cell::U(r.a as u64),
            Cell::U(r.b as u64),
            Cell::F(r.distance),
        ]));
        results.push(r);
    }
    let summary = format!(
        "{}: P(A<->B) at {} points, A = {}, B = {}",
        net.label(),
        results.len(),
        results[0].a,
        results[0].b
    );
    Emitter::new(cfg).finish(
        Data::Csv {
            header: "p,pab_mean,pab_stderr,n_samples,a,b,distance".into(),
            rows,
        },
        serde_json::to_value(&results).expect("serialises"),
        &summary,
    )
}

pub fn compare(cfg: &RunConfig, thresholds: bool, threshold_samples: usize) -> Result<(), Failure> {
    let kind = kind(cfg)?;
    let c = compare_strategies(
        kind,
        grid(cfg)?,
        &CompareOptions {
            size: cfg.lx,
            samples: cfg.samples,
            seed: cfg.seed,
            thresholds: thresholds.then(|| (cfg.sizes.clone(), threshold_samples)),
        },
    )?;
    let rows = c
        .rows
        .iter()
        .map(|r| {
            row(&[
                Cell::F(r.p),
                Cell::F(r.theta_cep),
                Cell::F(r.stderr_cep),
                Cell::F(r.theta_qep),
                Cell::F(r.stderr_qep),
                Cell::F(r.difference),
                Cell::F(r.combined_stderr),
                Cell::U(c.samples as u64),
            ])
        })
        .collect();
    let mut summary = format!("{kind} {}x{}: {} grid points", c.size, c.size, c.rows.len());
    if let (Some(a), Some(b), Some(d)) = (&c.threshold_cep, &c.threshold_qep, c.delta) {
        summary.push_str(&format!(
            ", p'_c = {:.4}, p^_c = {:.4}, gain {:.1}%",
            a.p_c,
            b.p_c,
            100.0 * d
        ));
    }
    Emitter::new(cfg).finish(
        Data::Csv {
            header: "p,theta_cep,theta_cep_stderr,theta_qep,theta_qep_stderr,difference,difference_stderr,n_samples".into(),
            rows,
        },
        serde_json::to_value(&c).expect("serialises"),
        &summary,
    )
}

pub fn series(cfg: &RunConfig) -> Result<(), Failure> {
    let net = match cfg.network.as_slice() {
        [] => periodic_network(kind(cfg)?, cfg.strategy, cfg.lx)?,
        _ => network(cfg)?,
    };
    let s = theta_series_detailed(&net, cfg.order)?;
    let canonical = s.series.canonical();
    if cfg.out.is_none() {
        println!("{canonical}");
        return Ok(());
    }
    let rows = s
        .series
        .numerators()
        .iter()
        .enumerate()
        .map(|(k, &c)| {
            row(&[
                Cell::U(k as u64),
                Cell::I(c),
                Cell::I(s.series.denominator()),
            ])
        })
        .collect();
    let orbits: Vec<_> = s
        .orbits
        .iter()
        .map(|(p, n)| json!({ "series": p.canonical(), "roots": n }))
        .collect();
    let result = json!({
        "network": s.network,
        "series": canonical,
        "coefficients": s.series.numerators(),
        "denominator": s.series.denominator(),
        "order": s.series.order(),
        "orbits": orbits,
        "roots": s.roots,
        "max_cluster_size": s.max_size,
    });
    Emitter::new(cfg).finish(
        Data::Csv {
            header: "power,numerator,denominator".into(),
            rows,
        },
        result,
        &canonical,
    )
}

pub fn quantum_verify(cfg: &RunConfig) -> Result<(), Failure> {
    if cfg.n_max == 0 || cfg.n_max > MAX_ORACLE_LINKS {
        return Err(Failure::Usage(format!(
            "--n-max must be in 1..={MAX_ORACLE_LINKS}"
        )));
    }
    let mut rows = Vec::new();
    let mut failed = 0;
    let mut total = 0;
    let mut record = |check: &str, n: usize, phi1: f64, value: f64, reference: f64, tol: f64| {
        let dev = (value - reference).abs();
        let pass = dev < tol;
        failed += !pass as usize;
        total += 1;
        rows.push(row(&[
            Cell::S(check.into()),
            Cell::U(n as u64),
            Cell::F(phi1),
            Cell::F(value),
            Cell::F(reference),
            Cell::F(dev),
            Cell::S(pass.to_string()),
        ]));
    };
    for n in 1..=cfg.n_max {
        for i in 1..=10 {
            let phi1 = 0.05 * i as f64;
            let s = PureState::from_phi1(phi1)?;
            let closed = ghz_success_prob(n, &s)?;
            record(
                "star-oracle",
                n,
                phi1,
                star_measurement_oracle(n, &s)?,
                closed,
                PROB_TOL,
            );
            if n == 1 {
                record(
                    "singlet",
                    1,
                    phi1,
                    closed,
                    singlet_conversion_prob(&s),
                    PROB_TOL,
                );
            }
        }
    }
    let qubits = (cfg.n_max + 1).max(2);
    for n in 2..=qubits {
        for m in 2..=(qubits + 1 - n) {
            let (a, b) = (StateVector::ghz(n)?, StateVector::ghz(m)?);
            for i in 0..n {
                for j in 0..m {
                    let o = merge_ghz(&a, &b, i, j)?;
                    record(
                        "merge-fidelity",
                        n + m - 1,
                        f64::NAN,
                        o.min_fidelity(),
                        1.0,
                        FIDELITY_TOL,
                    );
                    record(
                        "merge-success",
                        n + m - 1,
                        f64::NAN,
                        o.success_probability(),
                        1.0,
                        FIDELITY_TOL,
                    );
                }
            }
        }
        let g = StateVector::ghz(n)?;
        for i in 0..n {
            for j in (0..n).filter(|&j| j != i) {
                let o = extract_bell(&g, i, j)?;
                record(
                    "extract-fidelity",
                    n,
                    f64::NAN,
                    o.min_fidelity(),
                    1.0,
                    FIDELITY_TOL,
                );
                record(
                    "extract-success",
                    n,
                    f64::NAN,
                    o.success_probability(),
                    1.0,
                    FIDELITY_TOL,
                );
            }
        }
    }
    let summary = format!("quantum-verify: {}/{total} checks pass", total - failed);
    Emitter::new(cfg).finish(
        Data::Csv {
            header: "check,n,phi1,value,reference,deviation,pass".into(),
            rows,
        },
        json!({ "checks": total, "failed": failed }),
        &summary,
    )?;
    if failed > 0 {
        return Err(Failure::Mismatch(format!("{failed} quantum checks failed")));
    }
    Ok(())
}

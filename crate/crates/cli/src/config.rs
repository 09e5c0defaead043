//! Run configuration: config file, then command-line flags on top.

use std::path::{Path, PathBuf};

use perconet_core::lattice::{Boundary, LatticeKind, Strategy};
use serde::{Deserialize, Serialize};

use crate::Failure;

/// Seed used when neither a flag, the config file nor `PERCONET_SEED` gives one.
pub const DEFAULT_SEED: u64 = 1;
pub const SEED_ENV: &str = "PERCONET_SEED";

/// Values read from a TOML config file. Every key is optional.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub lattice: Option<String>,
    pub network: Option<Vec<PathBuf>>,
    pub lx: Option<u32>,
    pub ly: Option<u32>,
    pub size: Option<u32>,
    pub boundary: Option<String>,
    pub strategy: Option<String>,
    pub p: Option<GridSpec>,
    pub phi: Option<GridSpec>,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
    pub sizes: Option<Vec<u32>>,
    pub order: Option<usize>,
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
    pub n_max: Option<usize>,
}

/// A grid written either as a TOML array or as a string such as `"0.5:0.9:0.1"`.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum GridSpec {
    List(Vec<f64>),
    Text(String),
}

impl GridSpec {
    fn values(&self) -> Result<Vec<f64>, Failure> {
        match self {
            GridSpec::List(v) => Ok(v.clone()),
            GridSpec::Text(s) => parse_grid(s),
        }
    }
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::Usage(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text)
            .map_err(|e| Failure::Usage(format!("invalid config {}: {e}", path.display())))
    }
}

/// Fully resolved configuration of one run, recorded with every output.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: String,
    pub lattice: Option<LatticeKind>,
    pub network: Vec<PathBuf>,
    pub lx: u32,
    pub ly: u32,
    pub boundary: Boundary,
    pub strategy: Strategy,
    pub p: Vec<f64>,
    pub samples: usize,
    pub seed: u64,
    pub sizes: Vec<u32>,
    pub order: usize,
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
    pub n_max: usize,
}

/// Command-line values; `None` falls through to the config file.
#[derive(Debug, Default, Clone)]
pub struct Overrides {
    pub config: Option<PathBuf>,
    pub lattice: Option<String>,
    pub network: Vec<PathBuf>,
    pub lx: Option<u32>,
    pub ly: Option<u32>,
    pub size: Option<u32>,
    pub boundary: Option<String>,
    pub strategy: Option<String>,
    pub p: Option<String>,
    pub phi: Option<String>,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
    pub sizes: Option<String>,
    pub order: Option<usize>,
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
    pub n_max: Option<usize>,
}

/// Per-command defaults.
#[derive(Debug, Clone, Copy)]
pub struct Defaults {
    pub size: u32,
    pub samples: usize,
    pub strategy: Strategy,
    pub order: usize,
}

fn usage<E: std::fmt::Display>(e: E) -> Failure {
    Failure::Usage(e.to_string())
}

/// Parses `"0.1,0.2,0.5:0.9:0.1"`; a range `a:b:step` includes both ends.
pub fn parse_grid(text: &str) -> Result<Vec<f64>, Failure> {
    let mut out = Vec::new();
    for part in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let fields: Vec<&str> = part.split(':').collect();
        let num = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Failure::Usage(format!("bad number '{s}' in grid '{text}'")))
        };
        match fields.as_slice() {
            [x] => out.push(num(x)?),
            [a, b, step] => {
                let (a, b, step) = (num(a)?, num(b)?, num(step)?);
                if step.is_nan() || step <= 0.0 || b < a {
                    return Err(Failure::Usage(format!("bad range '{part}'")));
                }
                let n = ((b - a) / step + 1e-9).floor() as usize;
                out.extend((0..=n).map(|i| a + i as f64 * step));
            }
            _ => return Err(Failure::Usage(format!("bad grid entry '{part}'"))),
        }
    }
    if out.is_empty() {
        return Err(Failure::Usage(format!("empty grid '{text}'")));
    }
    Ok(out)
}

fn parse_sizes(text: &str) -> Result<Vec<u32>, Failure> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<u32>()
                .map_err(|_| Failure::Usage(format!("bad size '{s}'")))
        })
        .collect()
}

impl RunConfig {
    pub fn resolve(command: &str, o: Overrides, d: Defaults) -> Result<Self, Failure> {
        let file = match &o.config {
            Some(path) => FileConfig::load(path)?,
            None => FileConfig::default(),
        };
        let lattice = o
            .lattice
            .or(file.lattice)
            .map(|s| s.parse::<LatticeKind>().map_err(usage))
            .transpose()?;
        let network = if o.network.is_empty() {
            file.network.unwrap_or_default()
        } else {
            o.network
        };
        let size = o.size.or(file.size).unwrap_or(d.size);
        let lx = o.lx.or(file.lx).unwrap_or(size);
        let ly = o.ly.or(file.ly).unwrap_or(size);
        let boundary = o
            .boundary
            .or(file.boundary)
            .map(|s| s.parse::<Boundary>().map_err(usage))
            .transpose()?
            .unwrap_or(Boundary::Periodic);
        let strategy = o
            .strategy
            .or(file.strategy)
            .map(|s| s.parse::<Strategy>().map_err(usage))
            .transpose()?
            .unwrap_or(d.strategy);

        // A φ₁ grid is mapped to occupation probabilities through p = 2 φ₁.
        let p_flag = o.p.as_deref().map(parse_grid).transpose()?;
        let phi_flag = o.phi.as_deref().map(parse_grid).transpose()?;
        if p_flag.is_some() && phi_flag.is_some() {
            return Err(Failure::Usage("give either --p or --phi, not both".into()));
        }
        let phi = match (&p_flag, phi_flag) {
            (None, None) if file.p.is_none() => file.phi.map(|g| g.values()).transpose()?,
            (_, phi) => phi,
        };
        let p = match (p_flag, phi) {
            (Some(p), _) => p,
            (None, Some(phi)) => {
                if let Some(x) = phi.iter().find(|x| !(0.0..=0.5).contains(*x)) {
                    return Err(Failure::Usage(format!("phi1 = {x} outside [0, 0.5]")));
                }
                phi.iter().map(|x| 2.0 * x).collect()
            }
            (None, None) => file.p.map(|g| g.values()).transpose()?.unwrap_or_default(),
        };
        if let Some(x) = p.iter().find(|x| !(0.0..=1.0).contains(*x)) {
            return Err(Failure::Usage(format!("p = {x} outside [0, 1]")));
        }

        let samples = o.samples.or(file.samples).unwrap_or(d.samples);
        if samples == 0 {
            return Err(Failure::Usage("samples must be at least 1".into()));
        }
        let seed = match o.seed.or(file.seed) {
            Some(s) => s,
            None => match std::env::var(SEED_ENV) {
                Ok(v) => v.trim().parse().map_err(|_| {
                    Failure::Usage(format!("{SEED_ENV}='{v}' is not a 64-bit integer"))
                })?,
                Err(_) => DEFAULT_SEED,
            },
        };
        let sizes = match o.sizes {
            Some(s) => parse_sizes(&s)?,
            None => file.sizes.unwrap_or_else(|| vec![64, 128]),
        };
        let threads = o.threads.or(file.threads);
        if threads == Some(0) {
            return Err(Failure::Usage("threads must be at least 1".into()));
        }
        Ok(Self {
            command: command.into(),
            lattice,
            network,
            lx,
            ly,
            boundary,
            strategy,
            p,
            samples,
            seed,
            sizes,
            order: o.order.or(file.order).unwrap_or(d.order),
            out: o.out.or(file.out),
            threads,
            n_max: o.n_max.or(file.n_max).unwrap_or(5),
        })
    }
}

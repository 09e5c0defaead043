use std::fmt::Write as _;
use std::sync::Arc;

use serde::Deserialize;

use super::graph::generate_lattice;
use super::kind::{Boundary, LatticeKind};
use super::network::{Element, ElementKind, GeneralizedNetwork, Strategy};
use crate::error::{Error, Result};
use crate::numfmt::g17;

/// Header block of the network interchange document.
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct NetworkMeta {
    pub kind: LatticeKind,
    #[serde(rename = "Lx")]
    pub lx: u32,
    #[serde(rename = "Ly")]
    pub ly: u32,
    pub boundary: Boundary,
    #[serde(rename = "Zmax")]
    pub zmax: u32,
    pub dprime: f64,
    pub dhat: f64,
    pub f: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct NodeDoc {
    id: u32,
    pos: [f64; 2],
    degree: u32,
    qualified: bool,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ElementDoc {
    nodes: Vec<u32>,
    kind: ElementKind,
    wrap: Vec<i64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Document {
    meta: NetworkMeta,
    nodes: Vec<NodeDoc>,
    elements: Vec<ElementDoc>,
}

/// Serialises a network as a JSON document.
///
/// Element `wrap` lists `[bx, by]` for each member after the first, relative
/// to the first member; GHZ elements list the measured centre first.
pub fn export_network(net: &GeneralizedNetwork) -> String {
    let lattice = net.lattice();
    let stats = net.stats();
    let mut qualified = vec![false; net.node_count()];
    for &q in net.qualified() {
        qualified[q as usize] = true;
    }
    let mut out = String::new();
    write!(
        out,
        "{{\"meta\":{{\"kind\":\"{}\",\"Lx\":{},\"Ly\":{},\"boundary\":\"{}\",\"Zmax\":{},\"dprime\":{},\"dhat\":{},\"f\":{}}},\"nodes\":[",
        lattice.kind(),
        lattice.lx(),
        lattice.ly(),
        lattice.boundary(),
        stats.zmax,
        g17(stats.dprime),
        g17(stats.dhat),
        g17(stats.f)
    )
    .unwrap();
    for (i, n) in lattice.nodes().iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        write!(
            out,
            "\n{{\"id\":{},\"pos\":[{},{}],\"degree\":{},\"qualified\":{}}}",
            n.id,
            g17(n.pos[0]),
            g17(n.pos[1]),
            n.degree,
            qualified[i]
        )
        .unwrap();
    }
    out.push_str("],\"elements\":[");
    for (i, el) in net.elements().iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        let kind = match el.kind() {
            ElementKind::Bond => "bond",
            ElementKind::Ghz => "ghz",
        };
        let nodes: Vec<String> = el.members().iter().map(|m| m.to_string()).collect();
        let wrap: Vec<String> = el
            .wraps()
            .iter()
            .flat_map(|w| [w[0].to_string(), w[1].to_string()])
            .collect();
        write!(
            out,
            "\n{{\"nodes\":[{}],\"kind\":\"{kind}\",\"wrap\":[{}]}}",
            nodes.join(","),
            wrap.join(",")
        )
        .unwrap();
    }
    out.push_str("]}\n");
    out
}

/// Parses and validates a network document.
///
/// The lattice is regenerated from the header; every element must consume
/// existing lattice edges, and every edge must be consumed exactly once.
pub fn import_network(text: &str) -> Result<GeneralizedNetwork> {
    let doc: Document = serde_json::from_str(text).map_err(|e| {
        Error::parse(
            format!("line {} column {}", e.line(), e.column()),
            e.to_string(),
        )
    })?;
    let meta = &doc.meta;
    let lattice = Arc::new(
        generate_lattice(meta.kind, meta.lx, meta.ly, meta.boundary)
            .map_err(|e| Error::parse("meta", e.to_string()))?,
    );
    if meta.zmax != lattice.zmax() {
        return Err(Error::parse(
            "meta.Zmax",
            format!("expected {}, found {}", lattice.zmax(), meta.zmax),
        ));
    }
    if doc.nodes.len() != lattice.node_count() {
        return Err(Error::parse(
            "nodes",
            format!(
                "expected {} nodes, found {}",
                lattice.node_count(),
                doc.nodes.len()
            ),
        ));
    }
    for (i, n) in doc.nodes.iter().enumerate() {
        if n.id as usize != i {
            return Err(Error::parse(
                format!("nodes[{i}].id"),
                "ids must be dense and ordered",
            ));
        }
        if n.degree != lattice.nodes()[i].degree {
            return Err(Error::parse(
                format!("nodes[{i}].degree"),
                format!("expected {}, found {}", lattice.nodes()[i].degree, n.degree),
            ));
        }
        if !n.pos.iter().all(|x| x.is_finite()) {
            return Err(Error::parse(
                format!("nodes[{i}].pos"),
                "non-finite coordinate",
            ));
        }
    }

    let mut elements = Vec::with_capacity(doc.elements.len());
    let mut measured = Vec::new();
    let mut any_ghz = false;
    for (i, e) in doc.elements.iter().enumerate() {
        let at = format!("elements[{i}]");
        let size = match e.kind {
            ElementKind::Bond => 2,
            ElementKind::Ghz => 3,
        };
        if e.nodes.len() != size {
            return Err(Error::parse(
                at,
                format!(
                    "{:?} element needs {size} nodes, found {}",
                    e.kind,
                    e.nodes.len()
                ),
            ));
        }
        if e.wrap.len() != 2 * (size - 1) {
            return Err(Error::parse(
                at,
                format!(
                    "expected {} wrap entries, found {}",
                    2 * (size - 1),
                    e.wrap.len()
                ),
            ));
        }
        if let Some(&bad) = e
            .nodes
            .iter()
            .find(|&&n| n as usize >= lattice.node_count())
        {
            return Err(Error::parse(at, format!("unknown node {bad}")));
        }
        let head = e.nodes[0];
        let mut ends = Vec::with_capacity(2);
        for k in 1..size {
            let w = [e.wrap[2 * (k - 1)], e.wrap[2 * k - 1]];
            let inc = lattice
                .incident(head)
                .iter()
                .find(|inc| {
                    inc.neighbor == e.nodes[k] && [inc.wrap[0] as i64, inc.wrap[1] as i64] == w
                })
                .ok_or_else(|| {
                    Error::parse(
                        at.clone(),
                        format!("no lattice edge {} -> {} with wrap {w:?}", head, e.nodes[k]),
                    )
                })?;
            ends.push((inc.neighbor, inc.wrap, inc.edge));
        }
        elements.push(match e.kind {
            ElementKind::Bond => Element::bond(head, ends[0].0, ends[0].1, ends[0].2),
            ElementKind::Ghz => {
                any_ghz = true;
                measured.push(head);
                Element::ghz(head, [ends[0], ends[1]])
            }
        });
    }
    // Measured nodes whose triangles were cut by an open boundary only show
    // up as unqualified maximal-coordination nodes.
    for (i, n) in doc.nodes.iter().enumerate() {
        if !n.qualified && n.degree == lattice.zmax() {
            measured.push(i as u32);
        }
    }
    let strategy = if any_ghz || !measured.is_empty() {
        Strategy::Qep
    } else {
        Strategy::Cep
    };
    let net = GeneralizedNetwork::new(lattice, strategy, elements, measured)
        .map_err(|e| Error::parse("elements", e.to_string()))?;
    for &q in net.qualified() {
        if !doc.nodes[q as usize].qualified {
            return Err(Error::parse(
                format!("nodes[{q}].qualified"),
                "node is qualified but flagged otherwise",
            ));
        }
    }
    for (i, n) in doc.nodes.iter().enumerate() {
        if n.qualified && net.qualified().binary_search(&(i as u32)).is_err() {
            return Err(Error::parse(
                format!("nodes[{i}].qualified"),
                "node is flagged qualified but is measured or below maximal coordination",
            ));
        }
    }
    Ok(net)
}

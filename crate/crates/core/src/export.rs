//! File renderers for derived networks and analysis results. Every
//! function returns the full file contents; output is byte-for-byte
//! deterministic.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::kb::EntityId;
use crate::metrics::{round_sig, ActorIndex, ActorMetrics, Graph, MetricsReport};
use crate::network::DerivedNetwork;
use crate::survey::CompositeScores;

pub use crate::kb::write_fact_dump as export_facts;

/// Pajek `.net`: vertices in member order (1-based), then one arc per
/// edge sorted by index pair.
pub fn export_pajek(net: &DerivedNetwork) -> String {
    let g = Graph::from_network(net);
    let mut out = String::new();
    writeln!(out, "*Vertices {}", g.n()).unwrap();
    for (i, id) in g.nodes.iter().enumerate() {
        writeln!(out, "{} \"{}\"", i + 1, id).unwrap();
    }
    out.push_str("*Arcs\n");
    let mut arcs: Vec<(usize, usize)> = g.edges().collect();
    arcs.sort_unstable();
    for (s, t) in arcs {
        writeln!(out, "{} {}", s + 1, t + 1).unwrap();
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PajekGraph {
    pub vertices: Vec<String>,
    pub arcs: BTreeSet<(String, String)>,
}

/// Reads back what [`export_pajek`] writes.
pub fn parse_pajek(text: &str) -> Result<PajekGraph> {
    let bad = |line: usize, message: &str| Error::Pajek {
        line,
        message: message.to_string(),
    };
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (_, header) = lines.next().ok_or_else(|| bad(1, "empty file"))?;
    let n: usize = header
        .strip_prefix("*Vertices ")
        .and_then(|s| s.trim().parse().ok())
        .ok_or_else(|| bad(1, "expected *Vertices <n>"))?;
    let mut vertices = Vec::with_capacity(n);
    for k in 0..n {
        let (no, line) = lines.next().ok_or_else(|| bad(k + 2, "missing vertex"))?;
        let (idx, rest) = line
            .split_once(' ')
            .ok_or_else(|| bad(no, "expected <index> \"<id>\""))?;
        if idx.parse::<usize>().ok() != Some(k + 1) {
            return Err(bad(no, "vertex indices must run 1..n"));
        }
        let name = rest
            .strip_prefix('"')
            .and_then(|r| r.strip_suffix('"'))
            .ok_or_else(|| bad(no, "vertex name must be quoted"))?;
        vertices.push(name.to_string());
    }
    match lines.next() {
        Some((_, "*Arcs")) => {}
        Some((no, _)) => return Err(bad(no, "expected *Arcs")),
        None => return Err(bad(n + 2, "expected *Arcs")),
    }
    let mut arcs = BTreeSet::new();
    for (no, line) in lines {
        let mut parts = line.split(' ').map(|p| p.parse::<usize>().ok());
        let (Some(Some(s)), Some(Some(t)), None) = (parts.next(), parts.next(), parts.next())
        else {
            return Err(bad(no, "expected <src> <dst>"));
        };
        let name = |i: usize| {
            vertices
                .get(i.wrapping_sub(1))
                .cloned()
                .ok_or_else(|| bad(no, "arc endpoint out of range"))
        };
        arcs.insert((name(s)?, name(t)?));
    }
    Ok(PajekGraph { vertices, arcs })
}

fn xml_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

const GRAPHML_KEYS: [(&str, &str); 6] = [
    ("degree", "int"),
    ("indegree", "int"),
    ("outdegree", "int"),
    ("betweenness", "double"),
    ("closeness", "double"),
    ("eigenvector", "double"),
];

fn graphml_values(a: &ActorMetrics) -> [String; 6] {
    [
        a.degree.to_string(),
        a.indegree.to_string(),
        a.outdegree.to_string(),
        a.betweenness.to_string(),
        a.closeness.to_string(),
        a.eigenvector.to_string(),
    ]
}

/// GraphML with the six actor metrics as node data.
pub fn export_graphml(net: &DerivedNetwork, report: &MetricsReport) -> String {
    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    out.push_str("<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n");
    for (name, ty) in GRAPHML_KEYS {
        writeln!(
            out,
            "  <key id=\"{name}\" for=\"node\" attr.name=\"{name}\" attr.type=\"{ty}\"/>"
        )
        .unwrap();
    }
    writeln!(
        out,
        "  <graph id=\"{}\" edgedefault=\"directed\">",
        xml_escape(net.network_id.as_str())
    )
    .unwrap();
    let by_id: BTreeMap<&EntityId, &ActorMetrics> =
        report.actors.iter().map(|a| (&a.id, a)).collect();
    for m in &net.members {
        let id = xml_escape(m.as_str());
        match by_id.get(m) {
            Some(a) => {
                writeln!(out, "    <node id=\"{id}\">").unwrap();
                for ((key, _), v) in GRAPHML_KEYS.iter().zip(graphml_values(a)) {
                    writeln!(out, "      <data key=\"{key}\">{v}</data>").unwrap();
                }
                out.push_str("    </node>\n");
            }
            None => writeln!(out, "    <node id=\"{id}\"/>").unwrap(),
        }
    }
    for (k, (s, t)) in net.edges.iter().enumerate() {
        writeln!(
            out,
            "    <edge id=\"e{k}\" source=\"{}\" target=\"{}\"/>",
            xml_escape(s.as_str()),
            xml_escape(t.as_str())
        )
        .unwrap();
    }
    out.push_str("  </graph>\n</graphml>\n");
    out
}

/// `source,target` rows sorted by (source, target).
pub fn export_edgelist_csv(net: &DerivedNetwork) -> String {
    let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
    w.write_record(["source", "target"])
        .expect("write to memory");
    for (s, t) in &net.edges {
        w.write_record([s.as_str(), t.as_str()])
            .expect("write to memory");
    }
    String::from_utf8(w.into_inner().expect("flush to memory")).expect("utf-8")
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankedActor {
    pub id: EntityId,
    pub value: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct GroupComparison {
    pub involved_count: usize,
    pub involved_mean: Option<f64>,
    pub isolated_count: usize,
    pub isolated_mean: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct CategoryCounts {
    pub involved: usize,
    pub isolated: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NetworkFindings {
    pub network_id: EntityId,
    pub relation_type: String,
    /// metric -> highest-scoring actors, ties broken by id.
    pub top: BTreeMap<String, Vec<RankedActor>>,
    pub isolates: Vec<EntityId>,
    /// composite group -> score of actors with ties vs isolates.
    pub composite: BTreeMap<String, GroupComparison>,
    /// characteristic -> value -> how many actors with ties vs isolates.
    pub categorical: BTreeMap<String, BTreeMap<String, CategoryCounts>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FindingsReport {
    pub qpe_id: String,
    pub top_k: usize,
    pub networks: Vec<NetworkFindings>,
}

impl FindingsReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("findings serialize");
        s.push('\n');
        s
    }
}

const RANKED_METRICS: [(&str, ActorIndex); 6] = [
    ("degree", |a| a.degree as f64),
    ("indegree", |a| a.indegree as f64),
    ("outdegree", |a| a.outdegree as f64),
    ("betweenness", |a| a.betweenness),
    ("closeness", |a| a.closeness),
    ("eigenvector", |a| a.eigenvector),
];

fn mean(xs: &[i64]) -> Option<f64> {
    (!xs.is_empty()).then(|| round_sig(xs.iter().sum::<i64>() as f64 / xs.len() as f64))
}

pub fn top_k(
    actors: &[ActorMetrics],
    metric: fn(&ActorMetrics) -> f64,
    k: usize,
) -> Vec<RankedActor> {
    let mut ranked: Vec<RankedActor> = actors
        .iter()
        .map(|a| RankedActor {
            id: a.id.clone(),
            value: metric(a),
        })
        .collect();
    ranked.sort_by(|a, b| b.value.total_cmp(&a.value).then_with(|| a.id.cmp(&b.id)));
    ranked.truncate(k);
    ranked
}

/// Rankings, isolates and characteristic cross-tabs per network.
pub fn findings_report(
    qpe_id: &str,
    reports: &[MetricsReport],
    composite: &CompositeScores,
    characteristics: &BTreeMap<String, BTreeMap<EntityId, String>>,
    k: usize,
) -> FindingsReport {
    let networks = reports
        .iter()
        .map(|r| {
            let isolated: BTreeSet<&EntityId> = r.isolate_ids.iter().collect();
            let top = RANKED_METRICS
                .iter()
                .map(|(name, f)| (name.to_string(), top_k(&r.actors, *f, k)))
                .collect();
            let composite = composite
                .scores
                .iter()
                .map(|(group, scores)| {
                    let (mut inv, mut iso) = (Vec::new(), Vec::new());
                    for a in &r.actors {
                        if let Some(s) = scores.get(&a.id) {
                            if isolated.contains(&a.id) {
                                iso.push(*s)
                            } else {
                                inv.push(*s)
                            }
                        }
                    }
                    let cmp = GroupComparison {
                        involved_count: inv.len(),
                        involved_mean: mean(&inv),
                        isolated_count: iso.len(),
                        isolated_mean: mean(&iso),
                    };
                    (group.clone(), cmp)
                })
                .collect();
            let categorical = characteristics
                .iter()
                .map(|(name, by_person)| {
                    let mut counts: BTreeMap<String, CategoryCounts> = BTreeMap::new();
                    for a in &r.actors {
                        if let Some(v) = by_person.get(&a.id) {
                            let c = counts.entry(v.clone()).or_default();
                            if isolated.contains(&a.id) {
                                c.isolated += 1;
                            } else {
                                c.involved += 1;
                            }
                        }
                    }
                    (name.clone(), counts)
                })
                .collect();
            NetworkFindings {
                network_id: r.network_id.clone(),
                relation_type: r.relation_type.clone(),
                top,
                isolates: r.isolate_ids.clone(),
                composite,
                categorical,
            }
        })
        .collect();
    FindingsReport {
        qpe_id: qpe_id.to_string(),
        top_k: k,
        networks,
    }
}

//! Topology serializers: a stable JSON document, Graphviz DOT, and a
//! human-readable table.

use std::fmt::Write as _;
use std::net::Ipv4Addr;

use serde::{Deserialize, Serialize};

use crate::discovery::{DiscoveryReport, LinkState, QueryStatus, ReportedBy, TopologyGraph};

pub const SCHEMA_VERSION: &str = "1";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct EndpointRecord {
    pub ip: Ipv4Addr,
    pub port: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct NodeRecord {
    pub ip: Ipv4Addr,
    pub device_id: String,
    pub level: u32,
    pub query_status: QueryStatus,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct EdgeRecord {
    pub a: EndpointRecord,
    pub b: EndpointRecord,
    pub state: LinkState,
    pub reported_by: ReportedBy,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct DocumentStats {
    pub node_count: usize,
    pub edge_count: usize,
    pub blocked_count: usize,
    pub retrieval_ms: u64,
    pub assembly_ms: u64,
}

/// The machine-readable discovery result. Nodes are sorted by address,
/// edges by their canonical endpoint quadruple.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct TopologyDocument {
    pub schema_version: String,
    pub root: Ipv4Addr,
    pub nodes: Vec<NodeRecord>,
    pub edges: Vec<EdgeRecord>,
    pub stats: DocumentStats,
}

impl TopologyDocument {
    pub fn from_report(report: &DiscoveryReport) -> Self {
        let graph = &report.graph;
        let nodes = graph
            .nodes()
            .map(|node| NodeRecord {
                ip: node.management_ip,
                device_id: node.device_id.clone(),
                level: node.level,
                query_status: node.query_status,
            })
            .collect();
        let edges = graph
            .edges()
            .into_iter()
            .map(|edge| EdgeRecord {
                a: EndpointRecord {
                    ip: edge.a.ip,
                    port: edge.a.port,
                },
                b: EndpointRecord {
                    ip: edge.b.ip,
                    port: edge.b.port,
                },
                state: edge.state,
                reported_by: edge.reported_by,
            })
            .collect();
        TopologyDocument {
            schema_version: SCHEMA_VERSION.to_string(),
            root: graph.root_ip,
            nodes,
            edges,
            stats: DocumentStats {
                node_count: graph.node_count(),
                edge_count: graph.edge_count(),
                blocked_count: graph.blocked_count(),
                retrieval_ms: report.retrieval_duration.as_millis() as u64,
                assembly_ms: report.assembly_duration.as_millis() as u64,
            },
        }
    }

    /// Copy with timing fields zeroed, for structural comparisons.
    pub fn without_timings(mut self) -> Self {
        self.stats.retrieval_ms = 0;
        self.stats.assembly_ms = 0;
        self
    }
}

/// Serializes the discovery result as pretty-printed JSON. Identical
/// reports yield identical text.
pub fn to_json(report: &DiscoveryReport) -> String {
    let document = TopologyDocument::from_report(report);
    serde_json::to_string_pretty(&document).expect("document serialization cannot fail")
}

pub fn parse_json(text: &str) -> Result<TopologyDocument, serde_json::Error> {
    serde_json::from_str(text)
}

fn dot_escape(text: &str) -> String {
    text.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Renders the graph as Graphviz DOT: one node per device labeled with its
/// id, address, and level; dashed edges labeled "blocked" for links in
/// spanning-tree blocking state. Output is deterministic.
pub fn to_dot(graph: &TopologyGraph) -> String {
    let mut out = String::from("graph topology {\n");
    out.push_str("  node [shape=box];\n");
    for node in graph.nodes() {
        let _ = writeln!(
            out,
            "  \"{}\" [label=\"{}\\n{} (L{})\"];",
            node.management_ip,
            dot_escape(&node.device_id),
            node.management_ip,
            node.level
        );
    }
    for edge in graph.edges() {
        let attrs = match edge.state {
            LinkState::Forwarding => String::new(),
            LinkState::StpBlocked => " [style=dashed, label=\"blocked\"]".to_string(),
        };
        let _ = writeln!(out, "  \"{}\" -- \"{}\"{};", edge.a.ip, edge.b.ip, attrs);
    }
    out.push_str("}\n");
    out
}

/// Plain-text crawl report.
pub fn to_table(report: &DiscoveryReport) -> String {
    let document = TopologyDocument::from_report(report);
    let mut out = String::new();
    let _ = writeln!(
        out,
        "topology from {}: {} devices, {} links ({} blocked)",
        document.root, document.stats.node_count, document.stats.edge_count, document.stats.blocked_count
    );
    let _ = writeln!(out);
    let _ = writeln!(out, "LEVEL ADDRESS          DEVICE                   STATUS");
    for node in &document.nodes {
        let status = match node.query_status {
            QueryStatus::Queried => "queried",
            QueryStatus::Unreachable => "unreachable",
            QueryStatus::NotQueried => "not-queried",
        };
        let _ = writeln!(
            out,
            "{:<5} {:<16} {:<24} {}",
            node.level, node.ip.to_string(), node.device_id, status
        );
    }
    let _ = writeln!(out);
    for edge in &document.edges {
        let state = match edge.state {
            LinkState::Forwarding => "forwarding",
            LinkState::StpBlocked => "blocked",
        };
        let _ = writeln!(
            out,
            "{}:{} -- {}:{}  [{state}]",
            edge.a.ip, edge.a.port, edge.b.ip, edge.b.port
        );
    }
    let _ = writeln!(
        out,
        "\nretrieval {} ms, assembly {} ms",
        document.stats.retrieval_ms, document.stats.assembly_ms
    );
    out
}

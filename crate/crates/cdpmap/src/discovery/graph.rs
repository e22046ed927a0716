//! The discovered topology: devices with crawl levels, links with endpoint
//! ports and spanning-tree state.

use std::collections::BTreeMap;
use std::fmt;
use std::net::Ipv4Addr;

use serde::{Deserialize, Serialize};

/// State of a discovered link.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LinkState {
    Forwarding,
    StpBlocked,
}

/// Whether and how a device was queried during the crawl.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QueryStatus {
    Queried,
    Unreachable,
    NotQueried,
}

/// Which canonical side(s) of an edge reported it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReportedBy {
    A,
    B,
    Both,
}

/// One end of a link: a device's management address and port name.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EndpointRef {
    pub ip: Ipv4Addr,
    pub port: String,
}

impl EndpointRef {
    pub fn new(ip: Ipv4Addr, port: impl Into<String>) -> Self {
        Self {
            ip,
            port: port.into(),
        }
    }
}

impl fmt::Display for EndpointRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.ip, self.port)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DeviceNode {
    pub management_ip: Ipv4Addr,
    pub device_id: String,
    /// Crawl depth; the root is level 1.
    pub level: u32,
    pub query_status: QueryStatus,
}

/// A discovered link with canonically ordered endpoints (`a < b`), so the
/// same physical link reported from both sides collapses to one edge.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TopologyEdge {
    pub a: EndpointRef,
    pub b: EndpointRef,
    pub state: LinkState,
    pub reported_by: ReportedBy,
}

#[derive(Clone, Copy, Debug)]
struct EdgeData {
    state: LinkState,
    reported_by_a: bool,
    reported_by_b: bool,
}

#[derive(Debug, thiserror::Error)]
pub enum GraphError {
    #[error("self edge on {ip} rejected")]
    SelfEdge { ip: Ipv4Addr },

    #[error("edge endpoint {ip} is not a known node")]
    UnknownEndpoint { ip: Ipv4Addr },
}

/// The discovered graph. Nodes are keyed by management address; edges by
/// their canonical endpoint pair.
#[derive(Clone, Debug)]
pub struct TopologyGraph {
    pub root_ip: Ipv4Addr,
    nodes: BTreeMap<Ipv4Addr, DeviceNode>,
    edges: BTreeMap<(EndpointRef, EndpointRef), EdgeData>,
}

impl TopologyGraph {
    pub fn new(root_ip: Ipv4Addr) -> Self {
        Self {
            root_ip,
            nodes: BTreeMap::new(),
            edges: BTreeMap::new(),
        }
    }

    pub fn node(&self, ip: Ipv4Addr) -> Option<&DeviceNode> {
        self.nodes.get(&ip)
    }

    /// Nodes in ascending management-address order.
    pub fn nodes(&self) -> impl Iterator<Item = &DeviceNode> {
        self.nodes.values()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn blocked_count(&self) -> usize {
        self.edges
            .values()
            .filter(|e| e.state == LinkState::StpBlocked)
            .count()
    }

    /// Edges in canonical order.
    pub fn edges(&self) -> Vec<TopologyEdge> {
        self.edges
            .iter()
            .map(|((a, b), data)| TopologyEdge {
                a: a.clone(),
                b: b.clone(),
                state: data.state,
                reported_by: match (data.reported_by_a, data.reported_by_b) {
                    (true, true) => ReportedBy::Both,
                    (true, false) => ReportedBy::A,
                    _ => ReportedBy::B,
                },
            })
            .collect()
    }

    /// Inserts a node, or refreshes an existing one. An existing node keeps
    /// its level and its `Queried`/`Unreachable` status; `device_id` is
    /// upgraded when the current one is just the address placeholder.
    pub fn upsert_node(
        &mut self,
        ip: Ipv4Addr,
        device_id: impl Into<String>,
        level: u32,
        status: QueryStatus,
    ) {
        let device_id = device_id.into();
        match self.nodes.entry(ip) {
            std::collections::btree_map::Entry::Vacant(slot) => {
                slot.insert(DeviceNode {
                    management_ip: ip,
                    device_id,
                    level,
                    query_status: status,
                });
            }
            std::collections::btree_map::Entry::Occupied(mut slot) => {
                let node = slot.get_mut();
                if status != QueryStatus::NotQueried {
                    node.query_status = status;
                    node.device_id = device_id;
                } else if node.device_id == node.management_ip.to_string() {
                    node.device_id = device_id;
                }
            }
        }
    }

    /// Records one side's report of a link. The reversed edge updates the
    /// existing entry instead of duplicating it; a link blocked on either
    /// side is blocked. Returns the canonical endpoint pair.
    pub fn merge_edge(
        &mut self,
        local: EndpointRef,
        remote: EndpointRef,
        state: LinkState,
    ) -> Result<(EndpointRef, EndpointRef), GraphError> {
        if local.ip == remote.ip {
            return Err(GraphError::SelfEdge { ip: local.ip });
        }
        for endpoint in [&local, &remote] {
            if !self.nodes.contains_key(&endpoint.ip) {
                return Err(GraphError::UnknownEndpoint { ip: endpoint.ip });
            }
        }
        let local_is_a = local <= remote;
        let key = if local_is_a {
            (local, remote)
        } else {
            (remote, local)
        };
        let data = self.edges.entry(key.clone()).or_insert(EdgeData {
            state: LinkState::Forwarding,
            reported_by_a: false,
            reported_by_b: false,
        });
        if state == LinkState::StpBlocked {
            data.state = LinkState::StpBlocked;
        }
        if local_is_a {
            data.reported_by_a = true;
        } else {
            data.reported_by_b = true;
        }
        Ok(key)
    }
}

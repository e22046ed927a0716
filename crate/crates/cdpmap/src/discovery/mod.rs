//! Breadth-first topology crawl: query a device's CDP cache, enqueue every
//! newly seen neighbor address, repeat until the queue is empty.

mod graph;

use std::collections::{BTreeMap, BTreeSet};
use std::net::Ipv4Addr;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use crate::mib::{
    decode_cdp_cache_rows_lossy, CdpNeighborEntry, SnmpValue, BRIDGE_PORT_IF_INDEX,
    CDP_CACHE_TABLE, IF_DESCR, STP_PORT_STATE, SYS_NAME,
};
use crate::transport::{
    get, walk, AgentAddress, Credentials, SnmpTransport, TransportConfig, TransportError,
};

pub use graph::{
    DeviceNode, EndpointRef, GraphError, LinkState, QueryStatus, ReportedBy, TopologyEdge,
    TopologyGraph,
};

/// dot1dStpPortState values.
const STP_DISABLED: i64 = 1;
const STP_BLOCKING: i64 = 2;
const STP_LISTENING: i64 = 3;
const STP_LEARNING: i64 = 4;
const STP_FORWARDING: i64 = 5;

#[derive(Clone, Debug)]
pub struct DiscoveryConfig {
    pub transport: TransportConfig,
    /// Frontier devices queried concurrently within one level.
    pub parallelism: usize,
    /// Deepest level queried; 0 means unlimited.
    pub max_level: u32,
}

impl Default for DiscoveryConfig {
    fn default() -> Self {
        Self {
            transport: TransportConfig::default(),
            parallelism: 8,
            max_level: 0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QueryOutcome {
    Queried,
    Unreachable,
}

/// One BFS iteration: which addresses were dequeued and what they reported.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CrawlStep {
    pub level: u32,
    /// Addresses dequeued and queried this step, reachable or not.
    pub queried: Vec<Ipv4Addr>,
    /// Every neighbor address reported by this step's queries.
    pub neighbors_reported: BTreeSet<Ipv4Addr>,
    /// Addresses seen for the first time and enqueued for the next level.
    pub newly_enqueued: Vec<Ipv4Addr>,
}

/// The crawl result: the graph plus how it was obtained.
#[derive(Clone, Debug)]
pub struct DiscoveryReport {
    pub graph: TopologyGraph,
    pub steps: Vec<CrawlStep>,
    pub outcomes: BTreeMap<Ipv4Addr, QueryOutcome>,
    pub warnings: Vec<String>,
    pub retrieval_duration: Duration,
    pub assembly_duration: Duration,
}

#[derive(Debug, thiserror::Error)]
pub enum DiscoveryError {
    #[error("root device {agent} could not be queried: {detail}")]
    RootUnreachable { agent: AgentAddress, detail: String },

    #[error("invalid discovery configuration: {reason}")]
    InvalidConfig { reason: String },
}

/// Everything one device query yields.
#[derive(Clone, Debug, Default)]
struct DeviceFetch {
    sys_name: Option<String>,
    neighbors: Vec<CdpNeighborEntry>,
    if_names: BTreeMap<u32, String>,
    port_states: BridgePortStates,
    warnings: Vec<String>,
}

/// Per-port spanning-tree states read from a device's bridge tables,
/// re-keyed from bridge port number to interface index.
#[derive(Clone, Debug, Default)]
pub struct BridgePortStates {
    by_if_index: BTreeMap<u32, i64>,
}

impl BridgePortStates {
    pub fn fetch(
        transport: &dyn SnmpTransport,
        device: AgentAddress,
        creds: &Credentials,
        cfg: &TransportConfig,
    ) -> Result<Self, TransportError> {
        let port_to_if = walk(transport, device, &BRIDGE_PORT_IF_INDEX, creds, cfg)?;
        let port_states = walk(transport, device, &STP_PORT_STATE, creds, cfg)?;

        let mut if_index_by_port: BTreeMap<u32, u32> = BTreeMap::new();
        for vb in &port_to_if.varbinds {
            if let (Some([port]), SnmpValue::Integer(if_index)) =
                (vb.oid.suffix_of(&BRIDGE_PORT_IF_INDEX), &vb.value)
            {
                if let Ok(if_index) = u32::try_from(*if_index) {
                    if_index_by_port.insert(*port, if_index);
                }
            }
        }
        let mut by_if_index = BTreeMap::new();
        for vb in &port_states.varbinds {
            if let (Some([port]), SnmpValue::Integer(state)) =
                (vb.oid.suffix_of(&STP_PORT_STATE), &vb.value)
            {
                if let Some(if_index) = if_index_by_port.get(port) {
                    by_if_index.insert(*if_index, *state);
                }
            }
        }
        Ok(Self { by_if_index })
    }

    /// Maps a port's spanning-tree state to a link state. Ports absent from
    /// the bridge tables (routed ports, for one) default to forwarding with
    /// a warning.
    pub fn link_state(&self, if_index: u32) -> (LinkState, Option<String>) {
        match self.by_if_index.get(&if_index) {
            Some(&STP_FORWARDING) => (LinkState::Forwarding, None),
            Some(&(STP_BLOCKING | STP_LISTENING | STP_LEARNING)) => (LinkState::StpBlocked, None),
            Some(&other) => (
                LinkState::Forwarding,
                Some(format!(
                    "ifIndex {if_index} has spanning-tree state {other}{}; assuming forwarding",
                    if other == STP_DISABLED { " (disabled)" } else { "" }
                )),
            ),
            None => (
                LinkState::Forwarding,
                Some(format!(
                    "ifIndex {if_index} absent from bridge tables; assuming forwarding"
                )),
            ),
        }
    }
}

/// Spanning-tree state of one local port, read from the device's bridge
/// tables on demand.
pub fn link_state_of(
    transport: &dyn SnmpTransport,
    device: AgentAddress,
    local_if_index: u32,
    creds: &Credentials,
    cfg: &TransportConfig,
) -> Result<(LinkState, Option<String>), TransportError> {
    let states = BridgePortStates::fetch(transport, device, creds, cfg)?;
    Ok(states.link_state(local_if_index))
}

/// A device's CDP neighbors plus the local port names needed to label the
/// near end of each adjacency.
#[derive(Clone, Debug)]
pub struct NeighborFetch {
    pub entries: Vec<CdpNeighborEntry>,
    pub local_port_names: BTreeMap<u32, String>,
    pub warnings: Vec<String>,
}

/// Walks a device's CDP cache and interface table. Rows pointing back at
/// the device's own address are dropped; rows that fail to decode are
/// skipped with a warning.
pub fn fetch_neighbors(
    transport: &dyn SnmpTransport,
    device: AgentAddress,
    creds: &Credentials,
    cfg: &TransportConfig,
) -> Result<NeighborFetch, TransportError> {
    let mut warnings = Vec::new();
    let cache = walk(transport, device, &CDP_CACHE_TABLE, creds, cfg)?;
    let (mut entries, row_warnings) =
        decode_cdp_cache_rows_lossy(&cache.varbinds).map_err(|err| TransportError::Protocol {
            agent: device,
            detail: err.to_string(),
        })?;
    for w in row_warnings {
        warnings.push(format!(
            "cache row ({}, {}) skipped: {}",
            w.local_if_index, w.device_index, w.reason
        ));
    }
    entries.retain(|entry| entry.neighbor_address != device.ip);

    let if_table = walk(transport, device, &IF_DESCR, creds, cfg)?;
    let mut local_port_names = BTreeMap::new();
    for vb in &if_table.varbinds {
        if let (Some([if_index]), Some(name)) = (vb.oid.suffix_of(&IF_DESCR), vb.value.as_text()) {
            local_port_names.insert(*if_index, name);
        }
    }

    Ok(NeighborFetch {
        entries,
        local_port_names,
        warnings,
    })
}

fn fetch_device(
    transport: &dyn SnmpTransport,
    device: AgentAddress,
    creds: &Credentials,
    cfg: &TransportConfig,
) -> Result<DeviceFetch, TransportError> {
    let sys_name = get(transport, device, std::slice::from_ref(&SYS_NAME), creds, cfg)?
        .pop()
        .and_then(|vb| vb.value.as_text());
    let neighbors = fetch_neighbors(transport, device, creds, cfg)?;
    let port_states = BridgePortStates::fetch(transport, device, creds, cfg)?;
    Ok(DeviceFetch {
        sys_name,
        neighbors: neighbors.entries,
        if_names: neighbors.local_port_names,
        port_states,
        warnings: neighbors.warnings,
    })
}

/// Queries every address in `ips` (ascending), up to `parallelism` at a
/// time, and returns results in ascending address order. Fetches for one
/// level all complete before the caller moves to the next.
fn fetch_level(
    transport: &dyn SnmpTransport,
    ips: &[Ipv4Addr],
    port: u16,
    creds: &Credentials,
    cfg: &TransportConfig,
    parallelism: usize,
) -> Vec<(Ipv4Addr, Result<DeviceFetch, TransportError>)> {
    let workers = parallelism.max(1).min(ips.len());
    let mut results = if workers <= 1 {
        ips.iter()
            .map(|&ip| {
                let agent = AgentAddress { ip, port };
                (ip, fetch_device(transport, agent, creds, cfg))
            })
            .collect()
    } else {
        let next = AtomicUsize::new(0);
        let collected = Mutex::new(Vec::with_capacity(ips.len()));
        std::thread::scope(|scope| {
            for _ in 0..workers {
                scope.spawn(|| loop {
                    let i = next.fetch_add(1, Ordering::Relaxed);
                    let Some(&ip) = ips.get(i) else { break };
                    let agent = AgentAddress { ip, port };
                    let result = fetch_device(transport, agent, creds, cfg);
                    collected.lock().unwrap().push((ip, result));
                });
            }
        });
        collected.into_inner().unwrap()
    };
    results.sort_by_key(|(ip, _)| *ip);
    results
}

/// Crawls the network from `root` and assembles the topology graph.
///
/// Each address is queried exactly once; addresses within a level are
/// processed in ascending order, so the result is deterministic regardless
/// of the parallelism degree. Unreachable devices stay in the graph with
/// their status recorded and contribute no neighbor entries. Only an
/// unusable root is fatal.
pub fn discover(
    root: AgentAddress,
    transport: &dyn SnmpTransport,
    creds: &Credentials,
    cfg: &DiscoveryConfig,
) -> Result<DiscoveryReport, DiscoveryError> {
    cfg.transport
        .validate()
        .map_err(|err| DiscoveryError::InvalidConfig {
            reason: err.to_string(),
        })?;
    if cfg.parallelism == 0 {
        return Err(DiscoveryError::InvalidConfig {
            reason: "parallelism must be at least 1".to_string(),
        });
    }

    let mut graph = TopologyGraph::new(root.ip);
    let mut steps: Vec<CrawlStep> = Vec::new();
    let mut outcomes: BTreeMap<Ipv4Addr, QueryOutcome> = BTreeMap::new();
    let mut warnings: Vec<String> = Vec::new();
    let mut retrieval = Duration::ZERO;
    let mut assembly = Duration::ZERO;

    // Device ids learned from neighbor reports, for labeling nodes that
    // were never successfully queried themselves.
    let mut reported_ids: BTreeMap<Ipv4Addr, String> = BTreeMap::new();
    let mut levels: BTreeMap<Ipv4Addr, u32> = BTreeMap::new();
    let mut seen: BTreeSet<Ipv4Addr> = BTreeSet::new();

    levels.insert(root.ip, 1);
    seen.insert(root.ip);
    let mut frontier = vec![root.ip];
    let mut level = 1u32;

    while !frontier.is_empty() {
        frontier.sort_unstable();
        let started = Instant::now();
        let fetched = fetch_level(
            transport,
            &frontier,
            root.port,
            creds,
            &cfg.transport,
            cfg.parallelism,
        );
        retrieval += started.elapsed();

        let started = Instant::now();
        let mut step = CrawlStep {
            level,
            queried: frontier.clone(),
            neighbors_reported: BTreeSet::new(),
            newly_enqueued: Vec::new(),
        };
        let mut next_frontier = Vec::new();

        for (ip, result) in fetched {
            let node_level = levels[&ip];
            match result {
                Err(err) => {
                    if ip == root.ip && level == 1 {
                        return Err(DiscoveryError::RootUnreachable {
                            agent: root,
                            detail: err.to_string(),
                        });
                    }
                    outcomes.insert(ip, QueryOutcome::Unreachable);
                    if !matches!(err, TransportError::Unreachable { .. }) {
                        warnings.push(format!("{ip}: {err}"));
                    }
                    let label = reported_ids.get(&ip).cloned().unwrap_or_else(|| ip.to_string());
                    graph.upsert_node(ip, label, node_level, QueryStatus::Unreachable);
                }
                Ok(data) => {
                    outcomes.insert(ip, QueryOutcome::Queried);
                    let label = data
                        .sys_name
                        .clone()
                        .or_else(|| reported_ids.get(&ip).cloned())
                        .unwrap_or_else(|| ip.to_string());
                    graph.upsert_node(ip, label, node_level, QueryStatus::Queried);
                    for w in &data.warnings {
                        warnings.push(format!("{ip}: {w}"));
                    }

                    for entry in &data.neighbors {
                        let neighbor = entry.neighbor_address;
                        step.neighbors_reported.insert(neighbor);
                        reported_ids
                            .entry(neighbor)
                            .or_insert_with(|| entry.neighbor_device_id.clone());
                        let neighbor_level = *levels.entry(neighbor).or_insert(level + 1);
                        if seen.insert(neighbor) && (cfg.max_level == 0 || level < cfg.max_level) {
                            next_frontier.push(neighbor);
                            step.newly_enqueued.push(neighbor);
                        }
                        graph.upsert_node(
                            neighbor,
                            entry.neighbor_device_id.clone(),
                            neighbor_level,
                            QueryStatus::NotQueried,
                        );

                        let local_port = match data.if_names.get(&entry.local_if_index) {
                            Some(name) => name.clone(),
                            None => {
                                warnings.push(format!(
                                    "{ip}: no interface description for ifIndex {}; using index as port name",
                                    entry.local_if_index
                                ));
                                format!("ifIndex{}", entry.local_if_index)
                            }
                        };
                        let (state, state_warning) =
                            data.port_states.link_state(entry.local_if_index);
                        if let Some(w) = state_warning {
                            warnings.push(format!("{ip}: {w}"));
                        }
                        let merge = graph.merge_edge(
                            EndpointRef::new(ip, local_port),
                            EndpointRef::new(neighbor, entry.neighbor_port.clone()),
                            state,
                        );
                        if let Err(err) = merge {
                            warnings.push(format!("{ip}: {err}"));
                        }
                    }
                }
            }
        }

        step.newly_enqueued.sort_unstable();
        steps.push(step);
        assembly += started.elapsed();
        frontier = next_frontier;
        level += 1;
    }

    warn_about_aliases(&graph, &mut warnings);

    Ok(DiscoveryReport {
        graph,
        steps,
        outcomes,
        warnings,
        retrieval_duration: retrieval,
        assembly_duration: assembly,
    })
}

/// Two addresses advertising the same device id usually means one device
/// with several management addresses. Nodes are not merged; the suspicion
/// is surfaced instead.
fn warn_about_aliases(graph: &TopologyGraph, warnings: &mut Vec<String>) {
    let mut by_id: BTreeMap<&str, Vec<Ipv4Addr>> = BTreeMap::new();
    for node in graph.nodes() {
        if node.device_id != node.management_ip.to_string() {
            by_id
                .entry(node.device_id.as_str())
                .or_default()
                .push(node.management_ip);
        }
    }
    for (id, ips) in by_id {
        if ips.len() > 1 {
            let list = ips
                .iter()
                .map(|ip| ip.to_string())
                .collect::<Vec<_>>()
                .join(", ");
            warnings.push(format!(
                "device id {id:?} reported by multiple addresses ({list}); possible aliases, nodes not merged"
            ));
        }
    }
}

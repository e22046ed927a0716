//! Shared helpers for integration tests: a fixture-reading topology oracle
//! kept deliberately independent of the simulator's view builder and of
//! the crawler.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::net::Ipv4Addr;

use cdpmap::discovery::{discover, DiscoveryConfig, LinkState};
use cdpmap::simnet::{registry_from_fixture, AdminStatus, NetworkFixture, StpState};
use cdpmap::transport::{AgentAddress, Credentials};

pub fn creds() -> Credentials {
    Credentials::new("public").unwrap()
}

pub fn sim_discover(fixture: &NetworkFixture, root: Ipv4Addr) -> cdpmap::DiscoveryReport {
    let registry = registry_from_fixture(fixture, 161).unwrap();
    discover(
        AgentAddress::new(root),
        &registry,
        &creds(),
        &DiscoveryConfig::default(),
    )
    .unwrap()
}

/// Ground truth read straight off a resolved fixture: which device pairs
/// are CDP-adjacent (direct links and hub segments, both interfaces
/// admin-up, both devices CDP speakers), the ports forming each edge, and
/// which edges are blocked.
pub struct ExpectedTopology {
    /// Canonical (ip, port, ip, port) -> blocked?
    pub edges: BTreeMap<(Ipv4Addr, String, Ipv4Addr, String), bool>,
    /// Devices reachable from the root over those adjacencies.
    pub nodes: BTreeSet<Ipv4Addr>,
}

pub fn expected_topology(fixture: &NetworkFixture, root: Ipv4Addr) -> ExpectedTopology {
    let device = |id: &str| fixture.devices.iter().find(|d| d.device_id == id).unwrap();
    let split = |endpoint: &str| -> (String, String) {
        let (owner, port) = endpoint.split_once(':').unwrap();
        (owner.to_string(), port.to_string())
    };
    let iface_up = |dev: &str, port: &str| {
        device(dev)
            .interfaces
            .iter()
            .find(|i| i.name == port)
            .map(|i| i.admin_status == AdminStatus::Up)
            .unwrap_or(false)
    };
    let is_device = |owner: &str| fixture.devices.iter().any(|d| d.device_id == owner);

    // Each adjacency: (devA, portA, devB, portB, blocked_at_a, blocked_at_b).
    let mut adjacencies: Vec<(String, String, String, String, bool, bool)> = Vec::new();

    for link in &fixture.links {
        let (ao, ap) = split(&link.a);
        let (bo, bp) = split(&link.b);
        if !is_device(&bo) {
            continue; // hub legs handled below
        }
        if !(iface_up(&ao, &ap) && iface_up(&bo, &bp)) {
            continue;
        }
        if !(device(&ao).cdp_enabled && device(&bo).cdp_enabled) {
            continue;
        }
        let blocked = link.stp_state == StpState::Blocked;
        // The worse (higher priority value, then higher address) bridge
        // holds the blocking port; either way the edge is blocked.
        let a_worse = (device(&ao).bridge_priority, u32::from(device(&ao).management_ip))
            > (device(&bo).bridge_priority, u32::from(device(&bo).management_ip));
        adjacencies.push((ao, ap, bo, bp, blocked && a_worse, blocked && !a_worse));
    }
    for hub in &fixture.hubs {
        let mut legs: Vec<(String, String, bool)> = Vec::new(); // device, port, leg blocked
        for link in &fixture.links {
            let (bo, _) = split(&link.b);
            if bo != hub.hub_id {
                continue;
            }
            let (dev, port) = split(&link.a);
            if iface_up(&dev, &port) && device(&dev).cdp_enabled {
                legs.push((dev, port, link.stp_state == StpState::Blocked));
            }
        }
        for i in 0..legs.len() {
            for j in (i + 1)..legs.len() {
                adjacencies.push((
                    legs[i].0.clone(),
                    legs[i].1.clone(),
                    legs[j].0.clone(),
                    legs[j].1.clone(),
                    legs[i].2,
                    legs[j].2,
                ));
            }
        }
    }

    let mut edges = BTreeMap::new();
    let mut neighbors: BTreeMap<Ipv4Addr, Vec<Ipv4Addr>> = BTreeMap::new();
    for (ao, ap, bo, bp, blocked_a, blocked_b) in adjacencies {
        let a_ip = device(&ao).management_ip;
        let b_ip = device(&bo).management_ip;
        let (first, second) = if (a_ip, &ap) <= (b_ip, &bp) {
            ((a_ip, ap.clone()), (b_ip, bp.clone()))
        } else {
            ((b_ip, bp.clone()), (a_ip, ap.clone()))
        };
        edges.insert(
            (first.0, first.1, second.0, second.1),
            blocked_a || blocked_b,
        );
        neighbors.entry(a_ip).or_default().push(b_ip);
        neighbors.entry(b_ip).or_default().push(a_ip);
    }

    let mut nodes = BTreeSet::from([root]);
    let mut queue = VecDeque::from([root]);
    while let Some(at) = queue.pop_front() {
        for next in neighbors.get(&at).cloned().unwrap_or_default() {
            if nodes.insert(next) {
                queue.push_back(next);
            }
        }
    }
    // Edges with an unreachable endpoint are never witnessed.
    edges.retain(|(a, _, b, _), _| nodes.contains(a) && nodes.contains(b));

    ExpectedTopology { edges, nodes }
}

pub fn discovered_edge_map(
    report: &cdpmap::DiscoveryReport,
) -> BTreeMap<(Ipv4Addr, String, Ipv4Addr, String), bool> {
    report
        .graph
        .edges()
        .into_iter()
        .map(|e| {
            (
                (e.a.ip, e.a.port, e.b.ip, e.b.port),
                e.state == LinkState::StpBlocked,
            )
        })
        .collect()
}

//! Deterministic spanning-tree resolution for fixtures.
//!
//! Not a protocol state machine: per connected component the device with
//! the lowest (bridge priority, management address) becomes root, a
//! shortest-path tree is grown from it with fixed tie-breaks, links on the
//! tree forward, links off it block. Explicitly declared states are never
//! overridden, and links that cannot carry traffic (admin-down or routed
//! ends) are left forwarding since nothing will ever discover them.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use super::fixture::{Endpoint, FixtureError, NetworkFixture, StpState};

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug)]
enum Vertex {
    Device(usize),
    Hub(usize),
}

fn vertex_of(endpoint: &Endpoint) -> Vertex {
    match endpoint {
        Endpoint::Device(d, _) => Vertex::Device(*d),
        Endpoint::Hub(h, _) => Vertex::Hub(*h),
    }
}

/// Sort key used for root election and parent tie-breaks. Hubs sort after
/// every device so they never win an election.
fn vertex_key(fixture: &NetworkFixture, vertex: Vertex) -> (u8, u32, u32, String) {
    match vertex {
        Vertex::Device(d) => {
            let device = &fixture.devices[d];
            (
                0,
                device.bridge_priority,
                u32::from(device.management_ip),
                String::new(),
            )
        }
        Vertex::Hub(h) => (1, 0, 0, fixture.hubs[h].hub_id.clone()),
    }
}

fn port_name(fixture: &NetworkFixture, endpoint: &Endpoint) -> String {
    match endpoint {
        Endpoint::Device(d, i) => fixture.devices[*d].interfaces[*i].name.clone(),
        Endpoint::Hub(h, p) => fixture.hubs[*h].ports[*p].clone(),
    }
}

fn endpoint_usable(fixture: &NetworkFixture, endpoint: &Endpoint) -> bool {
    match endpoint {
        Endpoint::Device(d, i) => {
            let iface = &fixture.devices[*d].interfaces[*i];
            iface.admin_status == super::fixture::AdminStatus::Up && !iface.routed
        }
        Endpoint::Hub(..) => true,
    }
}

/// Resolves every `auto` link state, leaving declared states untouched.
pub fn compute_stp_states(fixture: &NetworkFixture) -> Result<NetworkFixture, FixtureError> {
    fixture.validate()?;

    let endpoints: Vec<(Endpoint, Endpoint)> = fixture
        .links
        .iter()
        .enumerate()
        .map(|(i, link)| {
            let a = fixture.resolve_endpoint(&link.a, &format!("links[{i}].a"))?;
            let b = fixture.resolve_endpoint(&link.b, &format!("links[{i}].b"))?;
            Ok((a, b))
        })
        .collect::<Result<_, FixtureError>>()?;

    // Links the spanning tree may use: both ends usable, not declared blocked.
    let participates: Vec<bool> = fixture
        .links
        .iter()
        .zip(&endpoints)
        .map(|(link, (a, b))| {
            link.stp_state != StpState::Blocked
                && endpoint_usable(fixture, a)
                && endpoint_usable(fixture, b)
        })
        .collect();

    let mut adjacency: BTreeMap<Vertex, Vec<(Vertex, usize)>> = BTreeMap::new();
    for (index, (a, b)) in endpoints.iter().enumerate() {
        if !participates[index] {
            continue;
        }
        let (va, vb) = (vertex_of(a), vertex_of(b));
        adjacency.entry(va).or_default().push((vb, index));
        adjacency.entry(vb).or_default().push((va, index));
    }

    let mut all_vertices: Vec<Vertex> = (0..fixture.devices.len()).map(Vertex::Device).collect();
    all_vertices.extend((0..fixture.hubs.len()).map(Vertex::Hub));

    let mut tree: BTreeSet<usize> = BTreeSet::new();
    let mut assigned: BTreeSet<Vertex> = BTreeSet::new();
    for &start in &all_vertices {
        if assigned.contains(&start) {
            continue;
        }
        let component = collect_component(start, &adjacency);
        assigned.extend(component.iter().copied());

        let Some(&root) = component
            .iter()
            .filter(|v| matches!(v, Vertex::Device(_)))
            .min_by_key(|v| vertex_key(fixture, **v))
        else {
            continue; // hub-only component, nothing elects
        };

        let dist = bfs_distances(root, &adjacency);
        for &vertex in &component {
            let Some(&d) = dist.get(&vertex) else { continue };
            if d == 0 {
                continue;
            }
            // Best link to any neighbor one hop closer to the root.
            let best = adjacency
                .get(&vertex)
                .into_iter()
                .flatten()
                .filter(|(parent, _)| dist.get(parent) == Some(&(d - 1)))
                .min_by_key(|(parent, index)| {
                    let (a, b) = &endpoints[*index];
                    let (local, remote) = if vertex_of(a) == vertex {
                        (a, b)
                    } else {
                        (b, a)
                    };
                    (
                        vertex_key(fixture, *parent),
                        port_name(fixture, local),
                        port_name(fixture, remote),
                    )
                })
                .map(|(_, index)| *index);
            if let Some(index) = best {
                tree.insert(index);
            }
        }
    }

    let mut resolved = fixture.clone();
    for (index, link) in resolved.links.iter_mut().enumerate() {
        if link.stp_state != StpState::Auto {
            continue;
        }
        link.stp_state = if !participates[index] {
            // Never carries frames; leave it forwarding for the record.
            StpState::Forwarding
        } else if tree.contains(&index) {
            StpState::Forwarding
        } else {
            StpState::Blocked
        };
    }
    Ok(resolved)
}

fn collect_component(
    start: Vertex,
    adjacency: &BTreeMap<Vertex, Vec<(Vertex, usize)>>,
) -> Vec<Vertex> {
    let mut seen = BTreeSet::from([start]);
    let mut queue = VecDeque::from([start]);
    let mut out = Vec::new();
    while let Some(v) = queue.pop_front() {
        out.push(v);
        for (next, _) in adjacency.get(&v).into_iter().flatten() {
            if seen.insert(*next) {
                queue.push_back(*next);
            }
        }
    }
    out
}

fn bfs_distances(
    root: Vertex,
    adjacency: &BTreeMap<Vertex, Vec<(Vertex, usize)>>,
) -> BTreeMap<Vertex, u32> {
    let mut dist = BTreeMap::from([(root, 0u32)]);
    let mut queue = VecDeque::from([root]);
    while let Some(v) = queue.pop_front() {
        let d = dist[&v];
        for (next, _) in adjacency.get(&v).into_iter().flatten() {
            if !dist.contains_key(next) {
                dist.insert(*next, d + 1);
                queue.push_back(*next);
            }
        }
    }
    dist
}

/// Which side of a blocked link holds the blocking port: the end belonging
/// to the worse (higher priority value, then higher address) bridge. A hub
/// has no port states, so on device-hub links the device side blocks.
pub(crate) fn blocking_side_is_a(
    fixture: &NetworkFixture,
    a: &Endpoint,
    b: &Endpoint,
) -> bool {
    match (a, b) {
        (Endpoint::Device(da, _), Endpoint::Device(db, _)) => {
            let key = |d: usize| {
                (
                    fixture.devices[d].bridge_priority,
                    u32::from(fixture.devices[d].management_ip),
                )
            };
            key(*da) > key(*db)
        }
        // Link validation guarantees `a` is a device.
        _ => true,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simnet::fixture::parse_fixture;

    fn triangle() -> NetworkFixture {
        parse_fixture(
            r#"
            [[devices]]
            device_id = "A"
            management_ip = "10.0.0.1"
            interfaces = [{ name = "Gi0/1", if_index = 1 }, { name = "Gi0/2", if_index = 2 }]

            [[devices]]
            device_id = "B"
            management_ip = "10.0.0.2"
            interfaces = [{ name = "Gi0/1", if_index = 1 }, { name = "Gi0/2", if_index = 2 }]

            [[devices]]
            device_id = "C"
            management_ip = "10.0.0.3"
            interfaces = [{ name = "Gi0/1", if_index = 1 }, { name = "Gi0/2", if_index = 2 }]

            [[links]]
            a = "A:Gi0/1"
            b = "B:Gi0/1"

            [[links]]
            a = "A:Gi0/2"
            b = "C:Gi0/1"

            [[links]]
            a = "B:Gi0/2"
            b = "C:Gi0/2"
            "#,
        )
        .unwrap()
    }

    /// Brute-force oracle: enumerate every spanning tree of the triangle
    /// (each 2-link subset that connects all three devices) and apply the
    /// documented election and tie-break rules independently. Exactly one
    /// tree survives, and it must be the one the resolver picks.
    #[test]
    fn triangle_blocks_the_far_link() {
        let fixture = triangle();
        let n = fixture.links.len();
        let connects = |subset: &[usize]| {
            let mut reach = std::collections::BTreeSet::from([0usize]);
            loop {
                let before = reach.len();
                for &li in subset {
                    let (a, b) = match li {
                        0 => (0usize, 1usize),
                        1 => (0, 2),
                        _ => (1, 2),
                    };
                    if reach.contains(&a) {
                        reach.insert(b);
                    }
                    if reach.contains(&b) {
                        reach.insert(a);
                    }
                }
                if reach.len() == before {
                    break;
                }
            }
            reach.len() == 3
        };
        let mut spanning_trees = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                if connects(&[i, j]) {
                    spanning_trees.push(vec![i, j]);
                }
            }
        }
        assert_eq!(spanning_trees.len(), 3, "triangle has 3 spanning trees");
        // Root is A (equal priorities, lowest address). Both B and C sit one
        // hop from A, so their parent pick is A over each other: the tree
        // must be {A-B, A-C}, i.e. links 0 and 1.
        let expected: Vec<usize> = vec![0, 1];
        assert!(spanning_trees.contains(&expected));

        let resolved = compute_stp_states(&fixture).unwrap();
        let states: Vec<StpState> = resolved.links.iter().map(|l| l.stp_state).collect();
        assert_eq!(
            states,
            vec![StpState::Forwarding, StpState::Forwarding, StpState::Blocked]
        );
    }

    #[test]
    fn tree_topology_has_no_blocked_links() {
        let fixture = parse_fixture(
            r#"
            [[devices]]
            device_id = "A"
            management_ip = "10.0.0.1"
            interfaces = [{ name = "Gi0/1", if_index = 1 }, { name = "Gi0/2", if_index = 2 }]

            [[devices]]
            device_id = "B"
            management_ip = "10.0.0.2"
            interfaces = [{ name = "Gi0/1", if_index = 1 }]

            [[devices]]
            device_id = "C"
            management_ip = "10.0.0.3"
            interfaces = [{ name = "Gi0/1", if_index = 1 }]

            [[links]]
            a = "A:Gi0/1"
            b = "B:Gi0/1"

            [[links]]
            a = "A:Gi0/2"
            b = "C:Gi0/1"
            "#,
        )
        .unwrap();
        let resolved = compute_stp_states(&fixture).unwrap();
        assert!(resolved
            .links
            .iter()
            .all(|l| l.stp_state == StpState::Forwarding));
    }

    #[test]
    fn declared_blocked_link_stays_blocked() {
        let mut fixture = triangle();
        fixture.links.retain(|l| l.b != "C:Gi0/2"); // drop B-C: now a tree
        fixture.links[1].stp_state = StpState::Blocked;
        let resolved = compute_stp_states(&fixture).unwrap();
        assert_eq!(resolved.links[1].stp_state, StpState::Blocked);
        assert_eq!(resolved.links[0].stp_state, StpState::Forwarding);
    }

    #[test]
    fn lower_priority_wins_root_election() {
        let mut fixture = triangle();
        // C gets a better (lower) priority than the default 32768.
        fixture.devices[2].bridge_priority = 4096;
        let resolved = compute_stp_states(&fixture).unwrap();
        // Root C: tree = {A-C, B-C}; the A-B link blocks.
        let states: Vec<StpState> = resolved.links.iter().map(|l| l.stp_state).collect();
        assert_eq!(
            states,
            vec![StpState::Blocked, StpState::Forwarding, StpState::Forwarding]
        );
    }

    #[test]
    fn components_resolve_independently() {
        let fixture = parse_fixture(
            r#"
            [[devices]]
            device_id = "A"
            management_ip = "10.0.0.1"
            interfaces = [{ name = "Gi0/1", if_index = 1 }]

            [[devices]]
            device_id = "B"
            management_ip = "10.0.0.2"
            interfaces = [{ name = "Gi0/1", if_index = 1 }]

            [[devices]]
            device_id = "X"
            management_ip = "10.0.1.1"
            interfaces = [{ name = "Gi0/1", if_index = 1 }]

            [[devices]]
            device_id = "Y"
            management_ip = "10.0.1.2"
            interfaces = [{ name = "Gi0/1", if_index = 1 }]

            [[links]]
            a = "A:Gi0/1"
            b = "B:Gi0/1"

            [[links]]
            a = "X:Gi0/1"
            b = "Y:Gi0/1"
            "#,
        )
        .unwrap();
        let resolved = compute_stp_states(&fixture).unwrap();
        assert!(resolved
            .links
            .iter()
            .all(|l| l.stp_state == StpState::Forwarding));
    }

    #[test]
    fn admin_down_links_resolve_forwarding_without_joining_the_tree() {
        let fixture = parse_fixture(
            r#"
            [[devices]]
            device_id = "A"
            management_ip = "10.0.0.1"
            interfaces = [
              { name = "Gi0/1", if_index = 1 },
              { name = "Gi0/2", if_index = 2, admin_status = "down" },
            ]

            [[devices]]
            device_id = "B"
            management_ip = "10.0.0.2"
            interfaces = [{ name = "Gi0/1", if_index = 1 }, { name = "Gi0/2", if_index = 2 }]

            [[links]]
            a = "A:Gi0/1"
            b = "B:Gi0/1"

            [[links]]
            a = "A:Gi0/2"
            b = "B:Gi0/2"
            "#,
        )
        .unwrap();
        let resolved = compute_stp_states(&fixture).unwrap();
        // The down link cannot be the reason the up link blocks.
        assert!(resolved
            .links
            .iter()
            .all(|l| l.stp_state == StpState::Forwarding));
    }
}

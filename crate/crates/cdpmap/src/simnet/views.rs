//! Materializes per-device SNMP agent views from a resolved fixture:
//! sysName, interface tables, bridge port states, and CDP caches.
//!
//! CDP adjacency rules mirror the protocol: caches hold a row per
//! CDP-speaking neighbor reachable over a link (or through a hub) whose
//! endpoint interfaces are both admin-up. Hubs are transparent and hosts
//! never appear. Blocked links still exchange CDP frames, so their rows are
//! present; only the port-state tables reveal the blocking.

use std::collections::BTreeMap;
use std::net::Ipv4Addr;

use crate::mib::{
    encode_cache_entry, CdpNeighborEntry, SnmpValue, BRIDGE_PORT_IF_INDEX, IF_ADMIN_STATUS,
    IF_DESCR, STP_PORT_STATE, SYS_NAME,
};
use crate::transport::AgentView;

use super::fixture::{AdminStatus, Endpoint, FixtureError, NetworkFixture, StpState};
use super::stp::blocking_side_is_a;

pub type AgentViews = BTreeMap<Ipv4Addr, AgentView>;

/// A CDP adjacency as one device sees it: who is on the other end of one of
/// my interfaces.
#[derive(Clone, Debug)]
struct SeenNeighbor {
    remote_ip: Ipv4Addr,
    remote_device: usize,
    remote_port: String,
}

pub fn build_agent_views(fixture: &NetworkFixture) -> Result<AgentViews, FixtureError> {
    fixture.validate()?;
    let endpoints: Vec<(Endpoint, Endpoint, StpState)> = fixture
        .links
        .iter()
        .enumerate()
        .map(|(i, link)| {
            if link.stp_state == StpState::Auto {
                return Err(FixtureError::UnresolvedStpState { index: i });
            }
            let a = fixture.resolve_endpoint(&link.a, &format!("links[{i}].a"))?;
            let b = fixture.resolve_endpoint(&link.b, &format!("links[{i}].b"))?;
            Ok((a, b, link.stp_state))
        })
        .collect::<Result<_, FixtureError>>()?;

    let up = |d: usize, i: usize| {
        fixture.devices[d].interfaces[i].admin_status == AdminStatus::Up
    };

    // Ports whose spanning-tree state is blocking.
    let mut blocked_ports: BTreeMap<(usize, usize), bool> = BTreeMap::new();
    for (a, b, state) in &endpoints {
        if *state != StpState::Blocked {
            continue;
        }
        let side_a = blocking_side_is_a(fixture, a, b);
        let blocked = if side_a { a } else { b };
        if let Endpoint::Device(d, i) = blocked {
            blocked_ports.insert((*d, *i), true);
        }
    }

    // CDP adjacencies per (device, interface position).
    let mut seen: BTreeMap<(usize, usize), Vec<SeenNeighbor>> = BTreeMap::new();
    let mut note = |local: (usize, usize), remote: (usize, usize)| {
        let (rd, ri) = remote;
        if !fixture.devices[rd].cdp_enabled {
            return; // silent neighbor: advertises nothing
        }
        seen.entry(local).or_default().push(SeenNeighbor {
            remote_ip: fixture.devices[rd].management_ip,
            remote_device: rd,
            remote_port: fixture.devices[rd].interfaces[ri].name.clone(),
        });
    };

    for (a, b, _) in &endpoints {
        if let (Endpoint::Device(da, ia), Endpoint::Device(db, ib)) = (a, b) {
            if up(*da, *ia) && up(*db, *ib) {
                note((*da, *ia), (*db, *ib));
                note((*db, *ib), (*da, *ia));
            }
        }
    }
    // Hub segments: every pair of live device attachments sees each other.
    for hub_index in 0..fixture.hubs.len() {
        let mut attached: Vec<(usize, usize)> = Vec::new();
        for (a, b, _) in &endpoints {
            if let (Endpoint::Device(d, i), Endpoint::Hub(h, _)) = (a, b) {
                if *h == hub_index && up(*d, *i) {
                    attached.push((*d, *i));
                }
            }
        }
        for x in 0..attached.len() {
            for y in 0..attached.len() {
                if x != y {
                    note(attached[x], attached[y]);
                }
            }
        }
    }

    let mut views = AgentViews::new();
    for (di, device) in fixture.devices.iter().enumerate() {
        let mut view = AgentView::new();
        view.insert(
            SYS_NAME.clone(),
            SnmpValue::OctetString(device.device_id.as_bytes().to_vec()),
        );
        for iface in &device.interfaces {
            view.insert(
                IF_DESCR.child(iface.if_index),
                SnmpValue::OctetString(iface.name.as_bytes().to_vec()),
            );
            let admin = if iface.admin_status == AdminStatus::Up { 1 } else { 2 };
            view.insert(IF_ADMIN_STATUS.child(iface.if_index), SnmpValue::Integer(admin));
        }
        // Bridge tables, keyed by bridge port number. Routed ports stay out.
        for (pos, iface) in device.interfaces.iter().enumerate() {
            if iface.routed {
                continue;
            }
            let base_port = (pos + 1) as u32;
            view.insert(
                BRIDGE_PORT_IF_INDEX.child(base_port),
                SnmpValue::Integer(iface.if_index as i64),
            );
            let state = if iface.admin_status == AdminStatus::Down {
                1 // disabled
            } else if blocked_ports.contains_key(&(di, pos)) {
                2 // blocking
            } else {
                5 // forwarding
            };
            view.insert(STP_PORT_STATE.child(base_port), SnmpValue::Integer(state));
        }
        if device.cdp_enabled {
            for (pos, iface) in device.interfaces.iter().enumerate() {
                let Some(list) = seen.get(&(di, pos)) else { continue };
                let mut list = list.clone();
                list.sort_by_key(|n| n.remote_ip);
                for (k, neighbor) in list.iter().enumerate() {
                    let entry = CdpNeighborEntry::new(
                        iface.if_index,
                        (k + 1) as u32,
                        neighbor.remote_ip,
                        fixture.devices[neighbor.remote_device].device_id.clone(),
                        neighbor.remote_port.clone(),
                    )
                    .expect("fixture validation guarantees usable addresses and indexes");
                    for vb in encode_cache_entry(&entry) {
                        view.insert(vb.oid, vb.value);
                    }
                }
            }
        }
        views.insert(device.management_ip, view);
    }
    Ok(views)
}

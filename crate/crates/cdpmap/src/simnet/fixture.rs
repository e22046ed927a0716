//! Ground-truth network fixtures: a declarative TOML description of
//! devices, links, hosts, and hubs from which agent views are built.
//!
//! Schema (TOML, all arrays optional):
//!
//! ```toml
//! [[devices]]
//! device_id = "SW1"
//! management_ip = "192.168.10.1"
//! bridge_priority = 32768            # default 32768
//! cdp_enabled = true                 # default true
//! interfaces = [
//!   { name = "Gi0/1", if_index = 1 },                         # admin_status defaults to "up"
//!   { name = "Gi0/2", if_index = 2, admin_status = "down" },
//!   { name = "Gi0/3", if_index = 3, routed = true },          # no bridge/STP rows
//! ]
//!
//! [[links]]
//! a = "SW1:Gi0/1"                    # always a device endpoint
//! b = "SW2:Gi0/1"                    # device or hub endpoint
//! stp_state = "auto"                 # forwarding | blocked | auto (default)
//!
//! [[hubs]]
//! hub_id = "HUB1"
//! ports = ["p1", "p2", "p3"]
//!
//! [[hosts]]
//! host_id = "PC1"
//! attached_to = "SW1:Gi0/2"          # device interface or hub port
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::net::Ipv4Addr;
use std::path::Path;

use serde::{Deserialize, Serialize};

pub const DEFAULT_BRIDGE_PRIORITY: u32 = 32768;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AdminStatus {
    #[default]
    Up,
    Down,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StpState {
    Forwarding,
    Blocked,
    #[default]
    Auto,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FixtureInterface {
    pub name: String,
    pub if_index: u32,
    #[serde(default)]
    pub admin_status: AdminStatus,
    /// Routed (layer-3) port: kept out of the bridge tables.
    #[serde(default)]
    pub routed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FixtureDevice {
    pub device_id: String,
    pub management_ip: Ipv4Addr,
    #[serde(default = "default_priority")]
    pub bridge_priority: u32,
    #[serde(default = "default_true")]
    pub cdp_enabled: bool,
    #[serde(default)]
    pub interfaces: Vec<FixtureInterface>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FixtureLink {
    /// Device endpoint, `"DEVICE:INTERFACE"`.
    pub a: String,
    /// Device or hub endpoint, `"DEVICE:INTERFACE"` or `"HUB:PORT"`.
    pub b: String,
    #[serde(default)]
    pub stp_state: StpState,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FixtureHost {
    pub host_id: String,
    /// Device interface or hub port the host hangs off.
    pub attached_to: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FixtureHub {
    pub hub_id: String,
    pub ports: Vec<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkFixture {
    #[serde(default)]
    pub devices: Vec<FixtureDevice>,
    #[serde(default)]
    pub links: Vec<FixtureLink>,
    #[serde(default)]
    pub hosts: Vec<FixtureHost>,
    #[serde(default)]
    pub hubs: Vec<FixtureHub>,
}

fn default_priority() -> u32 {
    DEFAULT_BRIDGE_PRIORITY
}

fn default_true() -> bool {
    true
}

#[derive(Debug, thiserror::Error)]
pub enum FixtureError {
    #[error("cannot read fixture {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },

    #[error("fixture parse error: {0}")]
    Parse(#[from] toml::de::Error),

    #[error("{context}: endpoint {endpoint:?} must be OWNER:PORT")]
    EndpointSyntax { context: String, endpoint: String },

    #[error("{context}: {endpoint:?} names unknown device or hub {owner:?}")]
    UnknownOwner {
        context: String,
        endpoint: String,
        owner: String,
    },

    #[error("{context}: {owner:?} has no interface or port named {port:?}")]
    UnknownPort {
        context: String,
        owner: String,
        port: String,
    },

    #[error("{context}: {reason}")]
    Invalid { context: String, reason: String },

    #[error("link {index} has unresolved stp_state \"auto\"; resolve states first")]
    UnresolvedStpState { index: usize },
}

/// A link or host endpoint, resolved against the fixture.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Endpoint {
    /// (device index, interface index into the device's interface list)
    Device(usize, usize),
    /// (hub index, port index)
    Hub(usize, usize),
}

impl NetworkFixture {
    pub fn device_by_id(&self, id: &str) -> Option<&FixtureDevice> {
        self.devices.iter().find(|d| d.device_id == id)
    }

    pub fn device_by_ip(&self, ip: Ipv4Addr) -> Option<&FixtureDevice> {
        self.devices.iter().find(|d| d.management_ip == ip)
    }

    /// Splits `"OWNER:PORT"` and resolves it to a device interface or hub
    /// port. `context` names the field for error messages.
    pub fn resolve_endpoint(&self, text: &str, context: &str) -> Result<Endpoint, FixtureError> {
        let Some((owner, port)) = text.split_once(':') else {
            return Err(FixtureError::EndpointSyntax {
                context: context.to_string(),
                endpoint: text.to_string(),
            });
        };
        if let Some(di) = self.devices.iter().position(|d| d.device_id == owner) {
            let Some(ii) = self.devices[di].interfaces.iter().position(|i| i.name == port) else {
                return Err(FixtureError::UnknownPort {
                    context: context.to_string(),
                    owner: owner.to_string(),
                    port: port.to_string(),
                });
            };
            return Ok(Endpoint::Device(di, ii));
        }
        if let Some(hi) = self.hubs.iter().position(|h| h.hub_id == owner) {
            let Some(pi) = self.hubs[hi].ports.iter().position(|p| p == port) else {
                return Err(FixtureError::UnknownPort {
                    context: context.to_string(),
                    owner: owner.to_string(),
                    port: port.to_string(),
                });
            };
            return Ok(Endpoint::Hub(hi, pi));
        }
        Err(FixtureError::UnknownOwner {
            context: context.to_string(),
            endpoint: text.to_string(),
            owner: owner.to_string(),
        })
    }

    pub fn validate(&self) -> Result<(), FixtureError> {
        let invalid = |context: &str, reason: String| FixtureError::Invalid {
            context: context.to_string(),
            reason,
        };

        let mut ids = BTreeSet::new();
        let mut ips = BTreeSet::new();
        for (i, device) in self.devices.iter().enumerate() {
            let context = format!("devices[{i}]");
            if device.device_id.is_empty() || device.device_id.contains(':') {
                return Err(invalid(&context, format!("bad device_id {:?}", device.device_id)));
            }
            if !ids.insert(device.device_id.clone()) {
                return Err(invalid(&context, format!("duplicate device_id {:?}", device.device_id)));
            }
            if device.management_ip.is_unspecified() {
                return Err(invalid(&context, "management_ip may not be 0.0.0.0".to_string()));
            }
            if !ips.insert(device.management_ip) {
                return Err(invalid(&context, format!("duplicate management_ip {}", device.management_ip)));
            }
            let mut if_indexes = BTreeSet::new();
            let mut if_names = BTreeSet::new();
            for iface in &device.interfaces {
                if iface.if_index == 0 {
                    return Err(invalid(&context, format!("interface {:?} has if_index 0", iface.name)));
                }
                if !if_indexes.insert(iface.if_index) {
                    return Err(invalid(&context, format!("duplicate if_index {}", iface.if_index)));
                }
                if iface.name.is_empty() || !if_names.insert(iface.name.clone()) {
                    return Err(invalid(&context, format!("duplicate or empty interface name {:?}", iface.name)));
                }
            }
        }

        for (i, hub) in self.hubs.iter().enumerate() {
            let context = format!("hubs[{i}]");
            if hub.hub_id.is_empty() || hub.hub_id.contains(':') {
                return Err(invalid(&context, format!("bad hub_id {:?}", hub.hub_id)));
            }
            if !ids.insert(hub.hub_id.clone()) {
                return Err(invalid(&context, format!("hub_id {:?} collides with another id", hub.hub_id)));
            }
            let mut ports = BTreeSet::new();
            for port in &hub.ports {
                if port.is_empty() || !ports.insert(port.clone()) {
                    return Err(invalid(&context, format!("duplicate or empty port {port:?}")));
                }
            }
        }

        // Each device interface or hub port holds at most one cable end.
        let mut occupied: BTreeMap<Endpoint, String> = BTreeMap::new();
        let mut claim = |endpoint: Endpoint, what: String| -> Result<(), FixtureError> {
            if let Some(existing) = occupied.insert(endpoint, what.clone()) {
                return Err(FixtureError::Invalid {
                    context: what,
                    reason: format!("endpoint already used by {existing}"),
                });
            }
            Ok(())
        };

        for (i, link) in self.links.iter().enumerate() {
            let context_a = format!("links[{i}].a");
            let context_b = format!("links[{i}].b");
            let a = self.resolve_endpoint(&link.a, &context_a)?;
            let b = self.resolve_endpoint(&link.b, &context_b)?;
            if !matches!(a, Endpoint::Device(..)) {
                return Err(invalid(&context_a, format!("{:?} must be a device endpoint", link.a)));
            }
            if a == b {
                return Err(invalid(&format!("links[{i}]"), "link endpoints are identical".to_string()));
            }
            claim(a, format!("links[{i}].a = {:?}", link.a))?;
            claim(b, format!("links[{i}].b = {:?}", link.b))?;
        }

        let mut host_ids = BTreeSet::new();
        for (i, host) in self.hosts.iter().enumerate() {
            let context = format!("hosts[{i}]");
            if host.host_id.is_empty() || !host_ids.insert(host.host_id.clone()) {
                return Err(invalid(&context, format!("duplicate or empty host_id {:?}", host.host_id)));
            }
            let endpoint = self.resolve_endpoint(&host.attached_to, &format!("{context}.attached_to"))?;
            claim(endpoint, format!("{context}.attached_to = {:?}", host.attached_to))?;
        }

        Ok(())
    }
}

/// Parses and validates fixture text.
pub fn parse_fixture(text: &str) -> Result<NetworkFixture, FixtureError> {
    let fixture: NetworkFixture = toml::from_str(text)?;
    fixture.validate()?;
    Ok(fixture)
}

/// Loads and validates a fixture file.
pub fn load_fixture(path: impl AsRef<Path>) -> Result<NetworkFixture, FixtureError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| FixtureError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_fixture(&text)
}

/// Serializes a fixture back to TOML. Deterministic for a given fixture.
pub fn fixture_to_toml(fixture: &NetworkFixture) -> String {
    toml::to_string_pretty(fixture).expect("fixture serialization cannot fail")
}

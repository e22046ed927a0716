//! Ground-truth network simulation: declarative fixtures, spanning-tree
//! resolution, and per-device SNMP agent views for end-to-end testing of
//! the discovery engine without hardware.

mod fixture;
mod random;
mod stp;
mod views;

pub use fixture::{
    fixture_to_toml, load_fixture, parse_fixture, AdminStatus, Endpoint, FixtureDevice,
    FixtureError, FixtureHost, FixtureHub, FixtureInterface, FixtureLink, NetworkFixture,
    StpState, DEFAULT_BRIDGE_PRIORITY,
};
pub use random::generate_random_fixture;
pub use stp::compute_stp_states;
pub use views::{build_agent_views, AgentViews};

use crate::transport::{AgentAddress, SimulatedRegistry, TransportError};

/// Registers every view under its management address at the given UDP port.
pub fn build_registry(views: &AgentViews, port: u16) -> Result<SimulatedRegistry, TransportError> {
    let mut registry = SimulatedRegistry::new();
    for (ip, view) in views {
        registry.register(AgentAddress { ip: *ip, port }, view.clone())?;
    }
    Ok(registry)
}

/// Fixture file to ready-to-crawl registry in one step: validate, resolve
/// spanning-tree states, build views, register.
pub fn registry_from_fixture(
    fixture: &NetworkFixture,
    port: u16,
) -> Result<SimulatedRegistry, FixtureError> {
    let resolved = compute_stp_states(fixture)?;
    let views = build_agent_views(&resolved)?;
    build_registry(&views, port).map_err(|err| FixtureError::Invalid {
        context: "registry".to_string(),
        reason: err.to_string(),
    })
}

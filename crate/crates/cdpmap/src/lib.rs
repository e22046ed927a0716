//! Layer-2 topology discovery over CDP neighbor caches.
//!
//! Starting from one root device, the crawler reads each device's CDP
//! cache over SNMP v2c (WALK on GETBULK), queues every newly seen neighbor
//! address, and assembles a physical topology graph that includes links the
//! spanning tree currently holds in blocking state, which still exchange
//! CDP frames even though they carry no data.
//!
//! The crate ships two interchangeable transports (a real UDP client and
//! an in-memory simulated agent registry), a network simulator that builds
//! agent views from declarative fixtures, and DOT/JSON exporters. The
//! `cdpmap` binary ties them together.

pub mod cli;
pub mod discovery;
pub mod export;
pub mod mib;
pub mod simnet;
pub mod transport;

pub use discovery::{discover, DiscoveryConfig, DiscoveryError, DiscoveryReport, TopologyGraph};
pub use mib::{CdpNeighborEntry, Oid, SnmpValue, VarBind};
pub use simnet::NetworkFixture;
pub use transport::{AgentAddress, Credentials, SimulatedRegistry, TransportConfig, UdpClient};

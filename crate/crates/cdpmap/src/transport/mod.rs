//! WALK and GETBULK retrieval against SNMP agents, with two interchangeable
//! backends: a real v2c client over UDP and an in-memory simulated registry.
//!
//! The iteration logic lives in [`walk`] and [`get`], shared by both
//! backends, so their results are varbind-for-varbind identical over the
//! same MIB view.

pub mod ber;
mod registry;
mod server;
mod udp;

use std::fmt;
use std::net::{Ipv4Addr, SocketAddr, SocketAddrV4};
use std::time::Duration;

use crate::mib::{Oid, SnmpValue, VarBind};

pub use registry::{AgentView, RequestKind, RequestRecord, SimulatedRegistry};
pub use server::UdpAgentServer;
pub use udp::UdpClient;

/// Where an agent listens: management IPv4 address plus UDP port.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AgentAddress {
    pub ip: Ipv4Addr,
    pub port: u16,
}

impl AgentAddress {
    pub const DEFAULT_PORT: u16 = 161;

    pub fn new(ip: Ipv4Addr) -> Self {
        Self {
            ip,
            port: Self::DEFAULT_PORT,
        }
    }

    pub fn with_port(ip: Ipv4Addr, port: u16) -> Result<Self, TransportError> {
        if port == 0 {
            return Err(TransportError::InvalidConfig {
                reason: "agent port must be in 1..=65535".to_string(),
            });
        }
        Ok(Self { ip, port })
    }

    pub fn socket_addr(&self) -> SocketAddr {
        SocketAddr::V4(SocketAddrV4::new(self.ip, self.port))
    }
}

impl fmt::Display for AgentAddress {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.ip, self.port)
    }
}

/// SNMP v2c community string.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Credentials {
    community: String,
}

impl Credentials {
    pub fn new(community: impl Into<String>) -> Result<Self, TransportError> {
        let community = community.into();
        if community.is_empty() {
            return Err(TransportError::InvalidConfig {
                reason: "community string must be non-empty".to_string(),
            });
        }
        Ok(Self { community })
    }

    pub fn community(&self) -> &str {
        &self.community
    }
}

/// Per-request transport tuning.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TransportConfig {
    pub timeout: Duration,
    pub retries: u32,
    /// GETBULK batch size.
    pub max_repetitions: u32,
}

impl Default for TransportConfig {
    fn default() -> Self {
        Self {
            timeout: Duration::from_millis(2000),
            retries: 1,
            max_repetitions: 20,
        }
    }
}

impl TransportConfig {
    pub fn validate(&self) -> Result<(), TransportError> {
        if self.timeout.is_zero() {
            return Err(TransportError::InvalidConfig {
                reason: "timeout must be positive".to_string(),
            });
        }
        if self.max_repetitions == 0 {
            return Err(TransportError::InvalidConfig {
                reason: "max-repetitions must be at least 1".to_string(),
            });
        }
        Ok(())
    }
}

/// Everything a WALK collected from one subtree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WalkResult {
    /// Strictly increasing by OID, all strictly inside the requested subtree.
    pub varbinds: Vec<VarBind>,
    /// Request PDUs sent, retries included.
    pub request_count: u32,
}

/// One request/response exchange as seen by the walk loop.
#[derive(Clone, Debug)]
pub struct PduReply {
    pub varbinds: Vec<VarBind>,
    /// Request PDUs this exchange cost (>1 when retries were needed).
    pub pdus_sent: u32,
}

#[derive(Debug, thiserror::Error)]
pub enum TransportError {
    #[error("agent {agent} unreachable")]
    Unreachable { agent: AgentAddress },

    #[error("protocol error from {agent}: {detail}")]
    Protocol { agent: AgentAddress, detail: String },

    #[error("agent {agent} already registered")]
    DuplicateAgent { agent: AgentAddress },

    #[error("get requires at least one OID")]
    EmptyOidList,

    #[error("invalid transport configuration: {reason}")]
    InvalidConfig { reason: String },

    #[error("I/O error talking to {agent}: {source}")]
    Io {
        agent: AgentAddress,
        source: std::io::Error,
    },
}

/// One PDU exchange against an agent. Implementations answer a single
/// request; [`walk`] and [`get`] drive the iteration.
pub trait SnmpTransport: Send + Sync {
    /// GETBULK with the given repetition count, starting after `start`.
    fn bulk_request(
        &self,
        agent: AgentAddress,
        start: &Oid,
        max_repetitions: u32,
        creds: &Credentials,
        cfg: &TransportConfig,
    ) -> Result<PduReply, TransportError>;

    /// GETNEXT for the single object after `start`.
    fn next_request(
        &self,
        agent: AgentAddress,
        start: &Oid,
        creds: &Credentials,
        cfg: &TransportConfig,
    ) -> Result<PduReply, TransportError>;

    /// GET for exactly the given objects.
    fn get_request(
        &self,
        agent: AgentAddress,
        oids: &[Oid],
        creds: &Credentials,
        cfg: &TransportConfig,
    ) -> Result<PduReply, TransportError>;
}

/// Retrieves every object strictly inside the `base` subtree, in OID order.
///
/// Iterates GETBULK with `cfg.max_repetitions` per request. If an agent
/// answers a GETBULK with an error, the walk falls back to GETNEXT for the
/// rest of this agent's walk. Ends at the first OID outside the subtree or
/// an end-of-mib-view marker. Agents that hand back non-increasing OIDs are
/// reported as protocol errors rather than walked forever.
pub fn walk(
    transport: &dyn SnmpTransport,
    agent: AgentAddress,
    base: &Oid,
    creds: &Credentials,
    cfg: &TransportConfig,
) -> Result<WalkResult, TransportError> {
    cfg.validate()?;
    let mut varbinds: Vec<VarBind> = Vec::new();
    let mut request_count = 0u32;
    let mut cursor = base.clone();
    let mut bulk_ok = true;

    'walk: loop {
        let reply = if bulk_ok {
            match transport.bulk_request(agent, &cursor, cfg.max_repetitions, creds, cfg) {
                Ok(reply) => {
                    request_count += reply.pdus_sent;
                    reply
                }
                Err(err @ TransportError::Unreachable { .. }) => return Err(err),
                Err(_) => {
                    // Agent answered but refused the bulk request; retry this
                    // step and every later one with GETNEXT.
                    request_count += 1;
                    bulk_ok = false;
                    continue;
                }
            }
        } else {
            let reply = transport.next_request(agent, &cursor, creds, cfg)?;
            request_count += reply.pdus_sent;
            reply
        };

        if reply.varbinds.is_empty() {
            return Err(TransportError::Protocol {
                agent,
                detail: "empty response to iteration request".to_string(),
            });
        }
        for vb in reply.varbinds {
            match vb.value {
                SnmpValue::EndOfMibView | SnmpValue::NoSuchObject => break 'walk,
                _ => {}
            }
            if vb.oid <= cursor {
                return Err(TransportError::Protocol {
                    agent,
                    detail: format!("OID {} does not advance past {}", vb.oid, cursor),
                });
            }
            if !vb.oid.is_under(base) {
                break 'walk;
            }
            cursor = vb.oid.clone();
            varbinds.push(vb);
        }
    }

    Ok(WalkResult {
        varbinds,
        request_count,
    })
}

/// GET of one or more scalar/instance objects, one varbind per requested
/// OID in request order. Missing objects come back as no-such-object.
pub fn get(
    transport: &dyn SnmpTransport,
    agent: AgentAddress,
    oids: &[Oid],
    creds: &Credentials,
    cfg: &TransportConfig,
) -> Result<Vec<VarBind>, TransportError> {
    cfg.validate()?;
    if oids.is_empty() {
        return Err(TransportError::EmptyOidList);
    }
    let reply = transport.get_request(agent, oids, creds, cfg)?;
    if reply.varbinds.len() != oids.len() {
        return Err(TransportError::Protocol {
            agent,
            detail: format!(
                "requested {} objects, agent answered {}",
                oids.len(),
                reply.varbinds.len()
            ),
        });
    }
    for (vb, requested) in reply.varbinds.iter().zip(oids) {
        if vb.oid != *requested {
            return Err(TransportError::Protocol {
                agent,
                detail: format!("response names {} for request {}", vb.oid, requested),
            });
        }
    }
    Ok(reply.varbinds)
}

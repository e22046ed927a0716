//! In-memory agent backend: a registry of MIB views keyed by agent address,
//! answering the same PDU primitives as the UDP client without any I/O.

use std::collections::BTreeMap;
use std::ops::Bound;
use std::sync::Mutex;

use crate::mib::{Oid, SnmpValue, VarBind};

use super::{
    AgentAddress, Credentials, PduReply, SnmpTransport, TransportConfig, TransportError,
};

/// An agent's MIB view: instance OID to value, kept in OID order.
pub type AgentView = BTreeMap<Oid, SnmpValue>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RequestKind {
    GetBulk,
    GetNext,
    Get,
}

/// One logical request an agent answered, for test assertions about how
/// often discovery touched each device.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RequestRecord {
    pub agent: AgentAddress,
    pub kind: RequestKind,
    /// Start OID of the iteration request, or the first OID of a GET.
    pub start: Oid,
}

struct SimulatedAgent {
    view: AgentView,
    getbulk_supported: bool,
}

/// Registry of simulated agents. Registration happens before discovery;
/// after that the registry is only read, so sharing it across crawl workers
/// needs no further coordination.
#[derive(Default)]
pub struct SimulatedRegistry {
    agents: BTreeMap<AgentAddress, SimulatedAgent>,
    log: Mutex<Vec<RequestRecord>>,
}

impl SimulatedRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    /// Registers a view under an address. Subsequent walks and gets against
    /// the address resolve from the view without network I/O.
    pub fn register(
        &mut self,
        address: AgentAddress,
        view: AgentView,
    ) -> Result<(), TransportError> {
        self.register_agent(address, view, true)
    }

    /// Registers an agent that refuses GETBULK, answering it with an error
    /// so walks have to fall back to GETNEXT.
    pub fn register_without_getbulk(
        &mut self,
        address: AgentAddress,
        view: AgentView,
    ) -> Result<(), TransportError> {
        self.register_agent(address, view, false)
    }

    fn register_agent(
        &mut self,
        address: AgentAddress,
        view: AgentView,
        getbulk_supported: bool,
    ) -> Result<(), TransportError> {
        if self.agents.contains_key(&address) {
            return Err(TransportError::DuplicateAgent { agent: address });
        }
        self.agents.insert(
            address,
            SimulatedAgent {
                view,
                getbulk_supported,
            },
        );
        Ok(())
    }

    pub fn contains(&self, address: &AgentAddress) -> bool {
        self.agents.contains_key(address)
    }

    pub fn request_log(&self) -> Vec<RequestRecord> {
        self.log.lock().unwrap().clone()
    }

    pub fn clear_request_log(&self) {
        self.log.lock().unwrap().clear();
    }

    fn agent(&self, address: AgentAddress) -> Result<&SimulatedAgent, TransportError> {
        self.agents
            .get(&address)
            .ok_or(TransportError::Unreachable { agent: address })
    }

    fn record(&self, agent: AgentAddress, kind: RequestKind, start: Oid) {
        self.log.lock().unwrap().push(RequestRecord { agent, kind, start });
    }

    fn successors(view: &AgentView, start: &Oid, limit: usize) -> Vec<VarBind> {
        view.range::<Oid, _>((Bound::Excluded(start), Bound::Unbounded))
            .take(limit)
            .map(|(oid, value)| VarBind::new(oid.clone(), value.clone()))
            .collect()
    }
}

impl SnmpTransport for SimulatedRegistry {
    fn bulk_request(
        &self,
        agent: AgentAddress,
        start: &Oid,
        max_repetitions: u32,
        _creds: &Credentials,
        cfg: &TransportConfig,
    ) -> Result<PduReply, TransportError> {
        cfg.validate()?;
        self.record(agent, RequestKind::GetBulk, start.clone());
        let sim = self.agent(agent)?;
        if !sim.getbulk_supported {
            return Err(TransportError::Protocol {
                agent,
                detail: "agent rejected GETBULK".to_string(),
            });
        }
        let mut varbinds = Self::successors(&sim.view, start, max_repetitions as usize);
        if varbinds.len() < max_repetitions as usize {
            varbinds.push(VarBind::new(start.clone(), SnmpValue::EndOfMibView));
        }
        Ok(PduReply {
            varbinds,
            pdus_sent: 1,
        })
    }

    fn next_request(
        &self,
        agent: AgentAddress,
        start: &Oid,
        _creds: &Credentials,
        cfg: &TransportConfig,
    ) -> Result<PduReply, TransportError> {
        cfg.validate()?;
        self.record(agent, RequestKind::GetNext, start.clone());
        let sim = self.agent(agent)?;
        let mut varbinds = Self::successors(&sim.view, start, 1);
        if varbinds.is_empty() {
            varbinds.push(VarBind::new(start.clone(), SnmpValue::EndOfMibView));
        }
        Ok(PduReply {
            varbinds,
            pdus_sent: 1,
        })
    }

    fn get_request(
        &self,
        agent: AgentAddress,
        oids: &[Oid],
        _creds: &Credentials,
        cfg: &TransportConfig,
    ) -> Result<PduReply, TransportError> {
        cfg.validate()?;
        if let Some(first) = oids.first() {
            self.record(agent, RequestKind::Get, first.clone());
        }
        let sim = self.agent(agent)?;
        let varbinds = oids
            .iter()
            .map(|oid| {
                let value = sim
                    .view
                    .get(oid)
                    .cloned()
                    .unwrap_or(SnmpValue::NoSuchObject);
                VarBind::new(oid.clone(), value)
            })
            .collect();
        Ok(PduReply {
            varbinds,
            pdus_sent: 1,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mib::parse_oid;
    use crate::transport::{get, walk};
    use std::net::Ipv4Addr;

    fn addr(last: u8) -> AgentAddress {
        AgentAddress::new(Ipv4Addr::new(192, 0, 2, last))
    }

    fn small_view() -> AgentView {
        let base = parse_oid("1.3.6.1.2.1.1").unwrap();
        let mut view = AgentView::new();
        view.insert(base.extend(&[1, 0]), SnmpValue::OctetString(b"desc".to_vec()));
        view.insert(base.extend(&[5, 0]), SnmpValue::OctetString(b"SW1".to_vec()));
        view.insert(
            parse_oid("1.3.6.1.2.1.2.2.1.2.1").unwrap(),
            SnmpValue::OctetString(b"Gi0/1".to_vec()),
        );
        view
    }

    #[test]
    fn walk_returns_subtree_slice() {
        let mut registry = SimulatedRegistry::new();
        registry.register(addr(1), small_view()).unwrap();
        let creds = Credentials::new("public").unwrap();
        let cfg = TransportConfig::default();

        let result = walk(
            &registry,
            addr(1),
            &parse_oid("1.3.6.1.2.1.1").unwrap(),
            &creds,
            &cfg,
        )
        .unwrap();
        assert_eq!(result.varbinds.len(), 2);
        assert!(result
            .varbinds
            .windows(2)
            .all(|pair| pair[0].oid < pair[1].oid));
    }

    #[test]
    fn walk_of_empty_subtree_is_empty() {
        let mut registry = SimulatedRegistry::new();
        registry.register(addr(1), small_view()).unwrap();
        let creds = Credentials::new("public").unwrap();
        let result = walk(
            &registry,
            addr(1),
            &parse_oid("1.3.6.1.4.1").unwrap(),
            &creds,
            &TransportConfig::default(),
        )
        .unwrap();
        assert!(result.varbinds.is_empty());
    }

    #[test]
    fn batch_size_changes_request_count_not_results() {
        let mut registry = SimulatedRegistry::new();
        registry.register(addr(1), small_view()).unwrap();
        let creds = Credentials::new("public").unwrap();
        let base = parse_oid("1.3.6.1").unwrap();

        let one = walk(
            &registry,
            addr(1),
            &base,
            &creds,
            &TransportConfig {
                max_repetitions: 1,
                ..Default::default()
            },
        )
        .unwrap();
        let fifty = walk(
            &registry,
            addr(1),
            &base,
            &creds,
            &TransportConfig {
                max_repetitions: 50,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(one.varbinds, fifty.varbinds);
        assert!(one.request_count > fifty.request_count);
    }

    #[test]
    fn walk_is_idempotent() {
        let mut registry = SimulatedRegistry::new();
        registry.register(addr(1), small_view()).unwrap();
        let creds = Credentials::new("public").unwrap();
        let base = parse_oid("1.3.6.1").unwrap();
        let cfg = TransportConfig::default();
        let first = walk(&registry, addr(1), &base, &creds, &cfg).unwrap();
        let second = walk(&registry, addr(1), &base, &creds, &cfg).unwrap();
        assert_eq!(first, second);
    }

    #[test]
    fn getnext_fallback_matches_bulk_walk() {
        let creds = Credentials::new("public").unwrap();
        let cfg = TransportConfig::default();
        let base = parse_oid("1.3.6.1").unwrap();

        let mut plain = SimulatedRegistry::new();
        plain.register(addr(1), small_view()).unwrap();
        let mut nobulk = SimulatedRegistry::new();
        nobulk.register_without_getbulk(addr(1), small_view()).unwrap();

        let a = walk(&plain, addr(1), &base, &creds, &cfg).unwrap();
        let b = walk(&nobulk, addr(1), &base, &creds, &cfg).unwrap();
        assert_eq!(a.varbinds, b.varbinds);
        assert!(
            nobulk
                .request_log()
                .iter()
                .any(|r| r.kind == RequestKind::GetNext),
            "fallback walk must have used GETNEXT"
        );
    }

    #[test]
    fn get_resolves_scalars_and_missing_objects() {
        let mut registry = SimulatedRegistry::new();
        registry.register(addr(1), small_view()).unwrap();
        let creds = Credentials::new("public").unwrap();
        let cfg = TransportConfig::default();

        let sys_name = parse_oid("1.3.6.1.2.1.1.5.0").unwrap();
        let missing = parse_oid("1.3.6.1.2.1.1.6.0").unwrap();
        let result = get(&registry, addr(1), &[sys_name, missing], &creds, &cfg).unwrap();
        assert_eq!(result[0].value.as_text().as_deref(), Some("SW1"));
        assert_eq!(result[1].value, SnmpValue::NoSuchObject);

        let err = get(&registry, addr(1), &[], &creds, &cfg).unwrap_err();
        assert!(matches!(err, TransportError::EmptyOidList));
    }

    #[test]
    fn unregistered_agent_is_unreachable() {
        let registry = SimulatedRegistry::new();
        let creds = Credentials::new("public").unwrap();
        let err = walk(
            &registry,
            addr(9),
            &parse_oid("1.3.6.1").unwrap(),
            &creds,
            &TransportConfig::default(),
        )
        .unwrap_err();
        assert!(matches!(err, TransportError::Unreachable { agent } if agent == addr(9)));
    }

    #[test]
    fn duplicate_registration_rejected() {
        let mut registry = SimulatedRegistry::new();
        registry.register(addr(1), AgentView::new()).unwrap();
        let err = registry.register(addr(1), AgentView::new()).unwrap_err();
        assert!(matches!(err, TransportError::DuplicateAgent { .. }));
    }

    #[test]
    fn registries_are_independent() {
        let mut first = SimulatedRegistry::new();
        first.register(addr(1), small_view()).unwrap();
        let second = SimulatedRegistry::new();
        assert!(first.contains(&addr(1)));
        assert!(!second.contains(&addr(1)));
    }
}

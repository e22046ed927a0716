//! Real SNMP v2c backend over UDP.

use std::io::ErrorKind;
use std::net::UdpSocket;
use std::sync::atomic::{AtomicI32, Ordering};
use std::time::Instant;

use crate::mib::{Oid, VarBind};

use super::ber::{self, Message, Pdu, PduKind};
use super::{AgentAddress, Credentials, PduReply, SnmpTransport, TransportConfig, TransportError};

/// SNMP v2c client. One request PDU per datagram, responses matched on
/// request id; timeouts are retried `cfg.retries` times before the agent is
/// reported unreachable.
pub struct UdpClient {
    next_request_id: AtomicI32,
}

impl UdpClient {
    pub fn new() -> Self {
        Self {
            // Arbitrary nonzero start; monotonic from there.
            next_request_id: AtomicI32::new(0x1000),
        }
    }

    /// Sends one request PDU (request id assigned here) and waits for the
    /// matching response.
    fn exchange(
        &self,
        agent: AgentAddress,
        mut pdu: Pdu,
        creds: &Credentials,
        cfg: &TransportConfig,
    ) -> Result<(Pdu, u32), TransportError> {
        cfg.validate()?;
        let request_id = self.next_request_id.fetch_add(1, Ordering::Relaxed);
        pdu.request_id = request_id;
        let request = Message {
            version: ber::VERSION_2C,
            community: creds.community().as_bytes().to_vec(),
            pdu,
        };
        let encoded = ber::encode_message(&request);

        let socket = UdpSocket::bind(("0.0.0.0", 0)).map_err(|source| TransportError::Io {
            agent,
            source,
        })?;
        socket
            .connect(agent.socket_addr())
            .map_err(|source| TransportError::Io { agent, source })?;

        let mut pdus_sent = 0u32;
        let mut buf = [0u8; 8192];
        for _attempt in 0..=cfg.retries {
            pdus_sent += 1;
            if socket.send(&encoded).is_err() {
                // No route, network down, sandboxed: the agent cannot be
                // reached either way.
                return Err(TransportError::Unreachable { agent });
            }
            let deadline = Instant::now() + cfg.timeout;
            loop {
                let remaining = deadline.saturating_duration_since(Instant::now());
                if remaining.is_zero() {
                    break;
                }
                socket
                    .set_read_timeout(Some(remaining))
                    .map_err(|source| TransportError::Io { agent, source })?;
                let len = match socket.recv(&mut buf) {
                    Ok(len) => len,
                    Err(e) if e.kind() == ErrorKind::WouldBlock || e.kind() == ErrorKind::TimedOut => {
                        break;
                    }
                    Err(e) if e.kind() == ErrorKind::ConnectionRefused => {
                        // ICMP port unreachable: nothing is listening there.
                        return Err(TransportError::Unreachable { agent });
                    }
                    Err(source) => return Err(TransportError::Io { agent, source }),
                };
                let response = match ber::decode_message(&buf[..len]) {
                    Ok(message) => message,
                    Err(_) => continue, // junk datagram; keep waiting
                };
                if response.pdu.request_id != request_id
                    || response.pdu.kind != PduKind::Response
                    || response.community != request.community
                {
                    continue;
                }
                if response.pdu.error_status != 0 {
                    return Err(TransportError::Protocol {
                        agent,
                        detail: format!(
                            "agent returned error-status {} at index {}",
                            response.pdu.error_status, response.pdu.error_index
                        ),
                    });
                }
                return Ok((response.pdu, pdus_sent));
            }
        }
        Err(TransportError::Unreachable { agent })
    }

    fn reply_from(agent: AgentAddress, pdu: Pdu, pdus_sent: u32) -> Result<PduReply, TransportError> {
        let mut varbinds = Vec::with_capacity(pdu.varbinds.len());
        for (oid, value) in pdu.varbinds {
            let value = value.ok_or_else(|| TransportError::Protocol {
                agent,
                detail: format!("null value for {oid} in response"),
            })?;
            varbinds.push(VarBind::new(oid, value));
        }
        Ok(PduReply {
            varbinds,
            pdus_sent,
        })
    }
}

impl Default for UdpClient {
    fn default() -> Self {
        Self::new()
    }
}

impl SnmpTransport for UdpClient {
    fn bulk_request(
        &self,
        agent: AgentAddress,
        start: &Oid,
        max_repetitions: u32,
        creds: &Credentials,
        cfg: &TransportConfig,
    ) -> Result<PduReply, TransportError> {
        let request = Pdu {
            kind: PduKind::GetBulkRequest,
            request_id: 0,
            error_status: 0, // non-repeaters
            error_index: max_repetitions as i64,
            varbinds: vec![(start.clone(), None)],
        };
        let (pdu, sent) = self.exchange(agent, request, creds, cfg)?;
        Self::reply_from(agent, pdu, sent)
    }

    fn next_request(
        &self,
        agent: AgentAddress,
        start: &Oid,
        creds: &Credentials,
        cfg: &TransportConfig,
    ) -> Result<PduReply, TransportError> {
        let request = Pdu {
            kind: PduKind::GetNextRequest,
            request_id: 0,
            error_status: 0,
            error_index: 0,
            varbinds: vec![(start.clone(), None)],
        };
        let (pdu, sent) = self.exchange(agent, request, creds, cfg)?;
        Self::reply_from(agent, pdu, sent)
    }

    fn get_request(
        &self,
        agent: AgentAddress,
        oids: &[Oid],
        creds: &Credentials,
        cfg: &TransportConfig,
    ) -> Result<PduReply, TransportError> {
        let request = Pdu {
            kind: PduKind::GetRequest,
            request_id: 0,
            error_status: 0,
            error_index: 0,
            varbinds: oids.iter().map(|oid| (oid.clone(), None)).collect(),
        };
        let (pdu, sent) = self.exchange(agent, request, creds, cfg)?;
        Self::reply_from(agent, pdu, sent)
    }
}

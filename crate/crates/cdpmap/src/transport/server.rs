//! Loopback UDP agent serving one MIB view, used to exercise the real
//! client end to end without touching a network.

use std::io;
use std::net::UdpSocket;
use std::ops::Bound;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::thread::JoinHandle;
use std::time::Duration;

use crate::mib::{Oid, SnmpValue};

use super::ber::{self, Message, Pdu, PduKind};
use super::{AgentAddress, AgentView};

/// Cap on repetitions honored per GETBULK so responses stay within one
/// datagram.
const MAX_SERVED_REPETITIONS: i64 = 64;

/// A background SNMP v2c agent bound to an ephemeral loopback port.
/// Stops and joins its thread on drop.
pub struct UdpAgentServer {
    address: AgentAddress,
    stop: Arc<AtomicBool>,
    handle: Option<JoinHandle<()>>,
}

impl UdpAgentServer {
    pub fn spawn(view: AgentView, community: &str) -> io::Result<Self> {
        let socket = UdpSocket::bind("127.0.0.1:0")?;
        socket.set_read_timeout(Some(Duration::from_millis(25)))?;
        let local = socket.local_addr()?;
        let address = AgentAddress {
            ip: std::net::Ipv4Addr::LOCALHOST,
            port: local.port(),
        };
        let stop = Arc::new(AtomicBool::new(false));
        let thread_stop = Arc::clone(&stop);
        let community = community.as_bytes().to_vec();
        let handle = std::thread::spawn(move || serve(socket, view, community, thread_stop));
        Ok(Self {
            address,
            stop,
            handle: Some(handle),
        })
    }

    pub fn agent_address(&self) -> AgentAddress {
        self.address
    }
}

impl Drop for UdpAgentServer {
    fn drop(&mut self) {
        self.stop.store(true, Ordering::Relaxed);
        if let Some(handle) = self.handle.take() {
            let _ = handle.join();
        }
    }
}

fn serve(socket: UdpSocket, view: AgentView, community: Vec<u8>, stop: Arc<AtomicBool>) {
    let mut buf = [0u8; 8192];
    while !stop.load(Ordering::Relaxed) {
        let (len, peer) = match socket.recv_from(&mut buf) {
            Ok(x) => x,
            Err(_) => continue, // timeout tick or transient error
        };
        let request = match ber::decode_message(&buf[..len]) {
            Ok(m) => m,
            Err(_) => continue,
        };
        // Real agents drop requests with the wrong community on the floor.
        if request.community != community || request.version != ber::VERSION_2C {
            continue;
        }
        let Some(varbinds) = answer(&view, &request.pdu) else {
            continue;
        };
        let response = Message {
            version: ber::VERSION_2C,
            community: community.clone(),
            pdu: Pdu {
                kind: PduKind::Response,
                request_id: request.pdu.request_id,
                error_status: 0,
                error_index: 0,
                varbinds,
            },
        };
        let _ = socket.send_to(&ber::encode_message(&response), peer);
    }
}

type WireVarBinds = Vec<(Oid, Option<SnmpValue>)>;

fn answer(view: &AgentView, request: &Pdu) -> Option<WireVarBinds> {
    match request.kind {
        PduKind::GetRequest => Some(
            request
                .oids()
                .map(|oid| {
                    let value = view.get(oid).cloned().unwrap_or(SnmpValue::NoSuchObject);
                    (oid.clone(), Some(value))
                })
                .collect(),
        ),
        PduKind::GetNextRequest => Some(
            request
                .oids()
                .map(|oid| next_of(view, oid))
                .collect(),
        ),
        PduKind::GetBulkRequest => {
            let oids: Vec<&Oid> = request.oids().collect();
            let non_repeaters = request.error_status.clamp(0, oids.len() as i64) as usize;
            let repetitions = request.error_index.clamp(0, MAX_SERVED_REPETITIONS) as usize;
            let mut out: WireVarBinds = Vec::new();
            for oid in &oids[..non_repeaters] {
                out.push(next_of(view, oid));
            }
            let mut cursors: Vec<Oid> = oids[non_repeaters..].iter().map(|o| (*o).clone()).collect();
            for _ in 0..repetitions {
                if cursors.is_empty() {
                    break;
                }
                let mut all_ended = true;
                for cursor in cursors.iter_mut() {
                    let (oid, value) = next_of(view, cursor);
                    if !matches!(value, Some(SnmpValue::EndOfMibView)) {
                        *cursor = oid.clone();
                        all_ended = false;
                    }
                    out.push((oid, value));
                }
                if all_ended {
                    break;
                }
            }
            Some(out)
        }
        PduKind::Response => None,
    }
}

fn next_of(view: &AgentView, oid: &Oid) -> (Oid, Option<SnmpValue>) {
    match view
        .range::<Oid, _>((Bound::Excluded(oid), Bound::Unbounded))
        .next()
    {
        Some((next, value)) => (next.clone(), Some(value.clone())),
        None => (oid.clone(), Some(SnmpValue::EndOfMibView)),
    }
}

//! SNMP values and varbinds.

use std::fmt;
use std::net::Ipv4Addr;

use super::Oid;

/// The value half of a varbind.
///
/// Covers the SNMPv2c types this tool actually reads plus the two exception
/// markers agents use to signal absence and end of view.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SnmpValue {
    Integer(i64),
    OctetString(Vec<u8>),
    ObjectIdentifier(Oid),
    IpAddress(Ipv4Addr),
    Counter(u32),
    Gauge(u32),
    TimeTicks(u32),
    EndOfMibView,
    NoSuchObject,
}

impl SnmpValue {
    pub fn kind(&self) -> &'static str {
        match self {
            SnmpValue::Integer(_) => "integer",
            SnmpValue::OctetString(_) => "octet-string",
            SnmpValue::ObjectIdentifier(_) => "object-identifier",
            SnmpValue::IpAddress(_) => "ip-address",
            SnmpValue::Counter(_) => "counter",
            SnmpValue::Gauge(_) => "gauge",
            SnmpValue::TimeTicks(_) => "time-ticks",
            SnmpValue::EndOfMibView => "end-of-mib-view",
            SnmpValue::NoSuchObject => "no-such-object",
        }
    }

    /// Octet-string payload interpreted as UTF-8, lossily.
    pub fn as_text(&self) -> Option<String> {
        match self {
            SnmpValue::OctetString(bytes) => Some(String::from_utf8_lossy(bytes).into_owned()),
            _ => None,
        }
    }

    pub fn as_integer(&self) -> Option<i64> {
        match self {
            SnmpValue::Integer(v) => Some(*v),
            _ => None,
        }
    }
}

/// An (OID, value) pair, the unit of SNMP data exchange.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VarBind {
    pub oid: Oid,
    pub value: SnmpValue,
}

impl VarBind {
    pub fn new(oid: Oid, value: SnmpValue) -> Self {
        Self { oid, value }
    }
}

impl fmt::Display for VarBind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} = {:?}", self.oid, self.value)
    }
}

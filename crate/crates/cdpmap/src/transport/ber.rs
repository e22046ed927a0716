//! Minimal BER codec for the SNMP v2c PDUs this tool exchanges:
//! GetRequest, GetNextRequest, GetBulkRequest, and Response.

use std::net::Ipv4Addr;

use crate::mib::{Oid, SnmpValue};

pub const TAG_INTEGER: u8 = 0x02;
pub const TAG_OCTET_STRING: u8 = 0x04;
pub const TAG_NULL: u8 = 0x05;
pub const TAG_OID: u8 = 0x06;
pub const TAG_SEQUENCE: u8 = 0x30;
pub const TAG_IP_ADDRESS: u8 = 0x40;
pub const TAG_COUNTER32: u8 = 0x41;
pub const TAG_GAUGE32: u8 = 0x42;
pub const TAG_TIMETICKS: u8 = 0x43;
pub const TAG_NO_SUCH_OBJECT: u8 = 0x80;
pub const TAG_NO_SUCH_INSTANCE: u8 = 0x81;
pub const TAG_END_OF_MIB_VIEW: u8 = 0x82;

/// SNMP version field value for v2c.
pub const VERSION_2C: i64 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PduKind {
    GetRequest,
    GetNextRequest,
    Response,
    GetBulkRequest,
}

impl PduKind {
    fn tag(self) -> u8 {
        match self {
            PduKind::GetRequest => 0xA0,
            PduKind::GetNextRequest => 0xA1,
            PduKind::Response => 0xA2,
            PduKind::GetBulkRequest => 0xA5,
        }
    }

    fn from_tag(tag: u8) -> Option<Self> {
        match tag {
            0xA0 => Some(PduKind::GetRequest),
            0xA1 => Some(PduKind::GetNextRequest),
            0xA2 => Some(PduKind::Response),
            0xA5 => Some(PduKind::GetBulkRequest),
            _ => None,
        }
    }
}

/// A decoded PDU. For GetBulkRequest, `error_status` carries non-repeaters
/// and `error_index` carries max-repetitions, mirroring the wire layout.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pdu {
    pub kind: PduKind,
    pub request_id: i32,
    pub error_status: i64,
    pub error_index: i64,
    /// `None` values are BER NULLs, as found in request varbinds.
    pub varbinds: Vec<(Oid, Option<SnmpValue>)>,
}

impl Pdu {
    pub fn oids(&self) -> impl Iterator<Item = &Oid> {
        self.varbinds.iter().map(|(oid, _)| oid)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Message {
    pub version: i64,
    pub community: Vec<u8>,
    pub pdu: Pdu,
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum BerError {
    #[error("truncated BER data")]
    Truncated,
    #[error("unsupported or invalid length encoding")]
    BadLength,
    #[error("unexpected tag 0x{0:02x}")]
    UnexpectedTag(u8),
    #[error("integer out of supported range")]
    IntegerRange,
    #[error("malformed object identifier")]
    BadOid,
    #[error("trailing bytes after message")]
    TrailingBytes,
}

// ---- encoding ----

fn push_tlv(out: &mut Vec<u8>, tag: u8, content: &[u8]) {
    out.push(tag);
    let len = content.len();
    if len < 0x80 {
        out.push(len as u8);
    } else {
        let bytes = (len as u64).to_be_bytes();
        let skip = bytes.iter().take_while(|b| **b == 0).count();
        out.push(0x80 | (8 - skip) as u8);
        out.extend_from_slice(&bytes[skip..]);
    }
    out.extend_from_slice(content);
}

fn int_content(value: i64) -> Vec<u8> {
    let mut bytes = value.to_be_bytes().to_vec();
    while bytes.len() > 1 {
        let drop = (bytes[0] == 0x00 && bytes[1] < 0x80) || (bytes[0] == 0xFF && bytes[1] >= 0x80);
        if drop {
            bytes.remove(0);
        } else {
            break;
        }
    }
    bytes
}

fn push_integer(out: &mut Vec<u8>, tag: u8, value: i64) {
    push_tlv(out, tag, &int_content(value));
}

fn base128(value: u64, out: &mut Vec<u8>) {
    let mut groups = [0u8; 10];
    let mut n = 0;
    let mut v = value;
    loop {
        groups[n] = (v & 0x7F) as u8;
        n += 1;
        v >>= 7;
        if v == 0 {
            break;
        }
    }
    for i in (0..n).rev() {
        let mut byte = groups[i];
        if i != 0 {
            byte |= 0x80;
        }
        out.push(byte);
    }
}

fn oid_content(oid: &Oid) -> Vec<u8> {
    let arcs = oid.arcs();
    let mut out = Vec::new();
    base128(arcs[0] as u64 * 40 + arcs[1] as u64, &mut out);
    for &arc in &arcs[2..] {
        base128(arc as u64, &mut out);
    }
    out
}

fn push_value(out: &mut Vec<u8>, value: &Option<SnmpValue>) {
    match value {
        None => push_tlv(out, TAG_NULL, &[]),
        Some(SnmpValue::Integer(v)) => push_integer(out, TAG_INTEGER, *v),
        Some(SnmpValue::OctetString(bytes)) => push_tlv(out, TAG_OCTET_STRING, bytes),
        Some(SnmpValue::ObjectIdentifier(oid)) => push_tlv(out, TAG_OID, &oid_content(oid)),
        Some(SnmpValue::IpAddress(ip)) => push_tlv(out, TAG_IP_ADDRESS, &ip.octets()),
        Some(SnmpValue::Counter(v)) => push_integer(out, TAG_COUNTER32, *v as i64),
        Some(SnmpValue::Gauge(v)) => push_integer(out, TAG_GAUGE32, *v as i64),
        Some(SnmpValue::TimeTicks(v)) => push_integer(out, TAG_TIMETICKS, *v as i64),
        Some(SnmpValue::NoSuchObject) => push_tlv(out, TAG_NO_SUCH_OBJECT, &[]),
        Some(SnmpValue::EndOfMibView) => push_tlv(out, TAG_END_OF_MIB_VIEW, &[]),
    }
}

pub fn encode_message(message: &Message) -> Vec<u8> {
    let mut varbind_list = Vec::new();
    for (oid, value) in &message.pdu.varbinds {
        let mut vb = Vec::new();
        push_tlv(&mut vb, TAG_OID, &oid_content(oid));
        push_value(&mut vb, value);
        push_tlv(&mut varbind_list, TAG_SEQUENCE, &vb);
    }

    let mut pdu = Vec::new();
    push_integer(&mut pdu, TAG_INTEGER, message.pdu.request_id as i64);
    push_integer(&mut pdu, TAG_INTEGER, message.pdu.error_status);
    push_integer(&mut pdu, TAG_INTEGER, message.pdu.error_index);
    push_tlv(&mut pdu, TAG_SEQUENCE, &varbind_list);

    let mut body = Vec::new();
    push_integer(&mut body, TAG_INTEGER, message.version);
    push_tlv(&mut body, TAG_OCTET_STRING, &message.community);
    push_tlv(&mut body, message.pdu.kind.tag(), &pdu);

    let mut out = Vec::new();
    push_tlv(&mut out, TAG_SEQUENCE, &body);
    out
}

// ---- decoding ----

struct Reader<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn new(data: &'a [u8]) -> Self {
        Self { data, pos: 0 }
    }

    fn done(&self) -> bool {
        self.pos >= self.data.len()
    }

    fn byte(&mut self) -> Result<u8, BerError> {
        let b = *self.data.get(self.pos).ok_or(BerError::Truncated)?;
        self.pos += 1;
        Ok(b)
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8], BerError> {
        if self.pos + n > self.data.len() {
            return Err(BerError::Truncated);
        }
        let slice = &self.data[self.pos..self.pos + n];
        self.pos += n;
        Ok(slice)
    }

    fn tlv(&mut self) -> Result<(u8, &'a [u8]), BerError> {
        let tag = self.byte()?;
        let first = self.byte()?;
        let len = if first < 0x80 {
            first as usize
        } else {
            let n = (first & 0x7F) as usize;
            if n == 0 || n > 4 {
                return Err(BerError::BadLength);
            }
            let mut len = 0usize;
            for _ in 0..n {
                len = (len << 8) | self.byte()? as usize;
            }
            len
        };
        Ok((tag, self.take(len)?))
    }

    fn expect(&mut self, expected: u8) -> Result<&'a [u8], BerError> {
        let (tag, content) = self.tlv()?;
        if tag != expected {
            return Err(BerError::UnexpectedTag(tag));
        }
        Ok(content)
    }
}

fn decode_integer(content: &[u8]) -> Result<i64, BerError> {
    if content.is_empty() || content.len() > 8 {
        return Err(BerError::IntegerRange);
    }
    let mut value: i64 = if content[0] >= 0x80 { -1 } else { 0 };
    for &b in content {
        value = (value << 8) | b as i64;
    }
    Ok(value)
}

fn decode_unsigned32(content: &[u8]) -> Result<u32, BerError> {
    let value = decode_integer(content)?;
    u32::try_from(value).map_err(|_| BerError::IntegerRange)
}

fn decode_oid(content: &[u8]) -> Result<Oid, BerError> {
    if content.is_empty() {
        return Err(BerError::BadOid);
    }
    let mut subids = Vec::new();
    let mut cur: u64 = 0;
    let mut in_subid = false;
    for &b in content {
        cur = (cur << 7) | (b & 0x7F) as u64;
        if cur > u32::MAX as u64 {
            return Err(BerError::BadOid);
        }
        in_subid = b & 0x80 != 0;
        if !in_subid {
            subids.push(cur as u32);
            cur = 0;
        }
    }
    if in_subid {
        return Err(BerError::BadOid);
    }
    let first = subids[0];
    let (a, b) = match first {
        0..=39 => (0, first),
        40..=79 => (1, first - 40),
        _ => (2, first - 80),
    };
    let mut arcs = vec![a, b];
    arcs.extend_from_slice(&subids[1..]);
    Oid::new(arcs).map_err(|_| BerError::BadOid)
}

fn decode_value(tag: u8, content: &[u8]) -> Result<Option<SnmpValue>, BerError> {
    let value = match tag {
        TAG_NULL => return Ok(None),
        TAG_INTEGER => SnmpValue::Integer(decode_integer(content)?),
        TAG_OCTET_STRING => SnmpValue::OctetString(content.to_vec()),
        TAG_OID => SnmpValue::ObjectIdentifier(decode_oid(content)?),
        TAG_IP_ADDRESS => {
            let octets: [u8; 4] = content.try_into().map_err(|_| BerError::BadLength)?;
            SnmpValue::IpAddress(Ipv4Addr::from(octets))
        }
        TAG_COUNTER32 => SnmpValue::Counter(decode_unsigned32(content)?),
        TAG_GAUGE32 => SnmpValue::Gauge(decode_unsigned32(content)?),
        TAG_TIMETICKS => SnmpValue::TimeTicks(decode_unsigned32(content)?),
        TAG_NO_SUCH_OBJECT | TAG_NO_SUCH_INSTANCE => SnmpValue::NoSuchObject,
        TAG_END_OF_MIB_VIEW => SnmpValue::EndOfMibView,
        other => return Err(BerError::UnexpectedTag(other)),
    };
    Ok(Some(value))
}

pub fn decode_message(data: &[u8]) -> Result<Message, BerError> {
    let mut outer = Reader::new(data);
    let body = outer.expect(TAG_SEQUENCE)?;
    if !outer.done() {
        return Err(BerError::TrailingBytes);
    }

    let mut r = Reader::new(body);
    let version = decode_integer(r.expect(TAG_INTEGER)?)?;
    let community = r.expect(TAG_OCTET_STRING)?.to_vec();
    let (pdu_tag, pdu_body) = r.tlv()?;
    let kind = PduKind::from_tag(pdu_tag).ok_or(BerError::UnexpectedTag(pdu_tag))?;
    if !r.done() {
        return Err(BerError::TrailingBytes);
    }

    let mut p = Reader::new(pdu_body);
    let request_id = decode_integer(p.expect(TAG_INTEGER)?)?;
    let request_id = i32::try_from(request_id).map_err(|_| BerError::IntegerRange)?;
    let error_status = decode_integer(p.expect(TAG_INTEGER)?)?;
    let error_index = decode_integer(p.expect(TAG_INTEGER)?)?;
    let list = p.expect(TAG_SEQUENCE)?;
    if !p.done() {
        return Err(BerError::TrailingBytes);
    }

    let mut varbinds = Vec::new();
    let mut l = Reader::new(list);
    while !l.done() {
        let vb = l.expect(TAG_SEQUENCE)?;
        let mut v = Reader::new(vb);
        let oid = decode_oid(v.expect(TAG_OID)?)?;
        let (tag, content) = v.tlv()?;
        let value = decode_value(tag, content)?;
        if !v.done() {
            return Err(BerError::TrailingBytes);
        }
        varbinds.push((oid, value));
    }

    Ok(Message {
        version,
        community,
        pdu: Pdu {
            kind,
            request_id,
            error_status,
            error_index,
            varbinds,
        },
    })
}

//! CDP neighbor-cache table rows and their varbind codec.
//!
//! The cache table is indexed by (local interface index, per-interface row
//! index). The columns used here are address type, address, device id, and
//! device port; rows are only meaningful when the address columns say IPv4.

use std::collections::BTreeMap;
use std::net::Ipv4Addr;
use std::sync::LazyLock;

use super::{MibError, Oid, SnmpValue, VarBind};

/// cdpCacheTable.
pub static CDP_CACHE_TABLE: LazyLock<Oid> =
    LazyLock::new(|| Oid::new(vec![1, 3, 6, 1, 4, 1, 9, 9, 23, 1, 2, 1]).unwrap());
/// cdpCacheEntry, parent of all cache columns.
pub static CDP_CACHE_ENTRY: LazyLock<Oid> = LazyLock::new(|| CDP_CACHE_TABLE.child(1));

/// sysName.0 scalar instance.
pub static SYS_NAME: LazyLock<Oid> =
    LazyLock::new(|| Oid::new(vec![1, 3, 6, 1, 2, 1, 1, 5, 0]).unwrap());
/// ifDescr column of the interfaces table.
pub static IF_DESCR: LazyLock<Oid> =
    LazyLock::new(|| Oid::new(vec![1, 3, 6, 1, 2, 1, 2, 2, 1, 2]).unwrap());
/// ifAdminStatus column of the interfaces table.
pub static IF_ADMIN_STATUS: LazyLock<Oid> =
    LazyLock::new(|| Oid::new(vec![1, 3, 6, 1, 2, 1, 2, 2, 1, 7]).unwrap());
/// dot1dBasePortIfIndex: bridge port number to interface index.
pub static BRIDGE_PORT_IF_INDEX: LazyLock<Oid> =
    LazyLock::new(|| Oid::new(vec![1, 3, 6, 1, 2, 1, 17, 1, 4, 1, 2]).unwrap());
/// dot1dStpPortState: spanning-tree state per bridge port.
pub static STP_PORT_STATE: LazyLock<Oid> =
    LazyLock::new(|| Oid::new(vec![1, 3, 6, 1, 2, 1, 17, 2, 15, 1, 3]).unwrap());

/// Cache table column numbers under cdpCacheEntry.
pub const COL_ADDRESS_TYPE: u32 = 3;
pub const COL_ADDRESS: u32 = 4;
pub const COL_DEVICE_ID: u32 = 6;
pub const COL_DEVICE_PORT: u32 = 7;

/// cdpCacheAddressType value for IPv4.
pub const ADDRESS_TYPE_IP: i64 = 1;

/// One decoded row of a device's CDP neighbor cache.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct CdpNeighborEntry {
    pub local_if_index: u32,
    pub device_index: u32,
    pub neighbor_address: Ipv4Addr,
    pub neighbor_device_id: String,
    pub neighbor_port: String,
}

impl CdpNeighborEntry {
    pub fn new(
        local_if_index: u32,
        device_index: u32,
        neighbor_address: Ipv4Addr,
        neighbor_device_id: impl Into<String>,
        neighbor_port: impl Into<String>,
    ) -> Result<Self, MibError> {
        if local_if_index == 0 || device_index == 0 {
            return Err(MibError::InvalidEntry {
                reason: "cache row indexes must be positive".to_string(),
            });
        }
        if neighbor_address.is_unspecified() {
            return Err(MibError::InvalidEntry {
                reason: "neighbor address 0.0.0.0 is not a usable management address".to_string(),
            });
        }
        Ok(Self {
            local_if_index,
            device_index,
            neighbor_address,
            neighbor_device_id: neighbor_device_id.into(),
            neighbor_port: neighbor_port.into(),
        })
    }

    /// The instance OID of one of this row's columns.
    pub fn column_oid(&self, column: u32) -> Oid {
        CDP_CACHE_ENTRY.extend(&[column, self.local_if_index, self.device_index])
    }
}

/// Encodes a cache row as its four column varbinds, in column order.
///
/// The inverse of [`decode_cdp_cache_rows`] for a single row; the simulator
/// uses it to materialize agent views.
pub fn encode_cache_entry(entry: &CdpNeighborEntry) -> Vec<VarBind> {
    vec![
        VarBind::new(
            entry.column_oid(COL_ADDRESS_TYPE),
            SnmpValue::Integer(ADDRESS_TYPE_IP),
        ),
        VarBind::new(
            entry.column_oid(COL_ADDRESS),
            SnmpValue::OctetString(entry.neighbor_address.octets().to_vec()),
        ),
        VarBind::new(
            entry.column_oid(COL_DEVICE_ID),
            SnmpValue::OctetString(entry.neighbor_device_id.as_bytes().to_vec()),
        ),
        VarBind::new(
            entry.column_oid(COL_DEVICE_PORT),
            SnmpValue::OctetString(entry.neighbor_port.as_bytes().to_vec()),
        ),
    ]
}

/// A problem with a single cache row that did not abort decoding.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RowWarning {
    pub local_if_index: u32,
    pub device_index: u32,
    pub reason: String,
}

#[derive(Default)]
struct RowColumns {
    address_type: Option<i64>,
    address: Option<Vec<u8>>,
    device_id: Option<String>,
    device_port: Option<String>,
}

/// Strict decode of a cache-table WALK result into rows.
///
/// Input must be strictly increasing by OID (as any well-formed WALK result
/// is). Rows missing any of the address/device-id/port columns are skipped
/// silently; an address column whose payload is not 4 octets is an error
/// naming the row.
pub fn decode_cdp_cache_rows(varbinds: &[VarBind]) -> Result<Vec<CdpNeighborEntry>, MibError> {
    let (rows, _warnings) = decode_rows_inner(varbinds, true)?;
    Ok(rows)
}

/// Tolerant decode: bad rows are dropped and reported instead of failing the
/// whole table. The crawl uses this so one ragged row cannot hide a device's
/// remaining neighbors.
pub fn decode_cdp_cache_rows_lossy(
    varbinds: &[VarBind],
) -> Result<(Vec<CdpNeighborEntry>, Vec<RowWarning>), MibError> {
    decode_rows_inner(varbinds, false)
}

fn decode_rows_inner(
    varbinds: &[VarBind],
    strict: bool,
) -> Result<(Vec<CdpNeighborEntry>, Vec<RowWarning>), MibError> {
    for pair in varbinds.windows(2) {
        if pair[1].oid <= pair[0].oid {
            return Err(MibError::VarbindOrder {
                previous: pair[0].oid.to_string(),
                next: pair[1].oid.to_string(),
            });
        }
    }

    // Group columns by the (ifIndex, deviceIndex) instance suffix.
    let mut grouped: BTreeMap<(u32, u32), RowColumns> = BTreeMap::new();
    for vb in varbinds {
        let Some(suffix) = vb.oid.suffix_of(&CDP_CACHE_ENTRY) else {
            continue;
        };
        let [column, if_index, device_index] = suffix else {
            continue;
        };
        if *if_index == 0 || *device_index == 0 {
            continue;
        }
        let row = grouped.entry((*if_index, *device_index)).or_default();
        match *column {
            COL_ADDRESS_TYPE => row.address_type = vb.value.as_integer(),
            COL_ADDRESS => {
                if let SnmpValue::OctetString(bytes) = &vb.value {
                    row.address = Some(bytes.clone());
                }
            }
            COL_DEVICE_ID => row.device_id = vb.value.as_text(),
            COL_DEVICE_PORT => row.device_port = vb.value.as_text(),
            _ => {}
        }
    }

    let mut rows = Vec::new();
    let mut warnings = Vec::new();
    for ((if_index, device_index), cols) in grouped {
        let mut skip = |reason: String| {
            warnings.push(RowWarning {
                local_if_index: if_index,
                device_index,
                reason,
            });
        };
        if let Some(kind) = cols.address_type {
            if kind != ADDRESS_TYPE_IP {
                skip(format!("non-IPv4 address type {kind}"));
                continue;
            }
        }
        let (Some(address), Some(device_id), Some(device_port)) =
            (cols.address, cols.device_id, cols.device_port)
        else {
            // Ragged row, e.g. caught mid-update; not worth a warning.
            continue;
        };
        let octets: [u8; 4] = match address.as_slice().try_into() {
            Ok(octets) => octets,
            Err(_) => {
                if strict {
                    return Err(MibError::AddressLength {
                        local_if_index: if_index,
                        device_index,
                        length: address.len(),
                    });
                }
                skip(format!("address payload has {} octets", address.len()));
                continue;
            }
        };
        match CdpNeighborEntry::new(
            if_index,
            device_index,
            Ipv4Addr::from(octets),
            device_id,
            device_port,
        ) {
            Ok(entry) => rows.push(entry),
            Err(err) => skip(err.to_string()),
        }
    }
    Ok((rows, warnings))
}

//! MIB object model: OIDs, SNMP values, varbinds, and the CDP cache codec.

mod cdp;
mod oid;
mod value;

pub use cdp::{
    decode_cdp_cache_rows, decode_cdp_cache_rows_lossy, encode_cache_entry, CdpNeighborEntry,
    RowWarning, ADDRESS_TYPE_IP, BRIDGE_PORT_IF_INDEX, CDP_CACHE_ENTRY, CDP_CACHE_TABLE,
    COL_ADDRESS, COL_ADDRESS_TYPE, COL_DEVICE_ID, COL_DEVICE_PORT, IF_ADMIN_STATUS, IF_DESCR,
    STP_PORT_STATE, SYS_NAME,
};
pub use oid::{compare_oids, parse_oid, Oid};
pub use value::{SnmpValue, VarBind};

#[derive(Debug, thiserror::Error)]
pub enum MibError {
    #[error("OID parse error at arc {position}: {reason}")]
    OidParse { position: usize, reason: String },

    #[error("invalid OID: {reason}")]
    InvalidOid { reason: String },

    #[error("varbinds not strictly increasing: {next} follows {previous}")]
    VarbindOrder { previous: String, next: String },

    #[error(
        "cache row ({local_if_index}, {device_index}): address payload has {length} octets, expected 4"
    )]
    AddressLength {
        local_if_index: u32,
        device_index: u32,
        length: usize,
    },

    #[error("invalid cache entry: {reason}")]
    InvalidEntry { reason: String },
}

//! Command-line entry point.
//!
//! Exit codes: 0 success (unreachable non-root devices included, reported
//! in stats), 2 bad flags, 3 fixture or validation errors, 4 root
//! unreachable.

use std::ffi::OsString;
use std::io::Write;
use std::net::Ipv4Addr;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::discovery::{discover, DiscoveryConfig, DiscoveryError, DiscoveryReport};
use crate::export;
use crate::simnet;
use crate::transport::{
    AgentAddress, Credentials, SnmpTransport, TransportConfig, UdpClient,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_FIXTURE: i32 = 3;
pub const EXIT_ROOT_UNREACHABLE: i32 = 4;

#[derive(Parser)]
#[command(
    name = "cdpmap",
    version,
    about = "Layer-2 topology discovery over CDP neighbor caches",
    long_about = "Crawls CDP neighbor caches over SNMP v2c from a root device and emits the \
                  physical topology, including links blocked by spanning tree. Runs against a \
                  real network or against a simulated one described by a fixture file."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Discover a real network over UDP, starting from a root address.
    Real(RealArgs),
    /// Discover a simulated network built from a fixture file.
    Sim(SimArgs),
}

#[derive(Args)]
struct RealArgs {
    /// Management address of the root device.
    #[arg(long)]
    root: Ipv4Addr,

    /// Agent UDP port.
    #[arg(long, default_value_t = 161)]
    port: u16,

    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct SimArgs {
    /// Fixture file describing the simulated network.
    #[arg(long)]
    fixture: PathBuf,

    /// Root device: a device id from the fixture, or its management address.
    #[arg(long)]
    root: String,

    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct CommonArgs {
    /// SNMP v2c community string.
    #[arg(long, env = "CDPMAP_COMMUNITY", default_value = "public")]
    community: String,

    /// Per-request timeout in milliseconds.
    #[arg(long, default_value_t = 2000)]
    timeout_ms: u64,

    /// Retransmissions after a timeout.
    #[arg(long, default_value_t = 1)]
    retries: u32,

    /// GETBULK batch size.
    #[arg(long, default_value_t = 20)]
    max_repetitions: u32,

    /// Devices queried concurrently within one crawl level.
    #[arg(long, default_value_t = 8)]
    parallelism: usize,

    /// Deepest level to query; 0 means unlimited.
    #[arg(long, default_value_t = 0)]
    max_level: u32,

    #[arg(long, value_enum, default_value_t = OutputFormat::Table)]
    format: OutputFormat,

    /// Output file; standard output when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Dot,
    Json,
    Table,
}

impl CommonArgs {
    fn discovery_config(&self) -> DiscoveryConfig {
        DiscoveryConfig {
            transport: TransportConfig {
                timeout: std::time::Duration::from_millis(self.timeout_ms),
                retries: self.retries,
                max_repetitions: self.max_repetitions,
            },
            parallelism: self.parallelism,
            max_level: self.max_level,
        }
    }
}

/// Parses `argv` and runs the tool, returning the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            return if err.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match cli.command {
        Command::Real(args) => run_real(args),
        Command::Sim(args) => run_sim(args),
    }
}

fn run_real(args: RealArgs) -> i32 {
    let root = match AgentAddress::with_port(args.root, args.port) {
        Ok(root) => root,
        Err(err) => return usage_error(&err.to_string()),
    };
    let client = UdpClient::new();
    run_discovery(root, &client, &args.common)
}

fn run_sim(args: SimArgs) -> i32 {
    let fixture = match simnet::load_fixture(&args.fixture) {
        Ok(fixture) => fixture,
        Err(err) => {
            eprintln!("cdpmap: {err}");
            return EXIT_FIXTURE;
        }
    };
    let root_ip = match resolve_sim_root(&fixture, &args.root) {
        Ok(ip) => ip,
        Err(message) => {
            eprintln!("cdpmap: {message}");
            return EXIT_FIXTURE;
        }
    };
    let registry = match simnet::registry_from_fixture(&fixture, AgentAddress::DEFAULT_PORT) {
        Ok(registry) => registry,
        Err(err) => {
            eprintln!("cdpmap: {err}");
            return EXIT_FIXTURE;
        }
    };
    run_discovery(AgentAddress::new(root_ip), &registry, &args.common)
}

fn resolve_sim_root(fixture: &simnet::NetworkFixture, root: &str) -> Result<Ipv4Addr, String> {
    if let Some(device) = fixture.device_by_id(root) {
        return Ok(device.management_ip);
    }
    if let Ok(ip) = root.parse::<Ipv4Addr>() {
        if fixture.device_by_ip(ip).is_some() {
            return Ok(ip);
        }
        return Err(format!("no fixture device has management address {ip}"));
    }
    Err(format!("no fixture device named {root:?}"))
}

fn run_discovery(root: AgentAddress, transport: &dyn SnmpTransport, common: &CommonArgs) -> i32 {
    let creds = match Credentials::new(common.community.clone()) {
        Ok(creds) => creds,
        Err(err) => return usage_error(&err.to_string()),
    };
    let cfg = common.discovery_config();
    let report = match discover(root, transport, &creds, &cfg) {
        Ok(report) => report,
        Err(err @ DiscoveryError::RootUnreachable { .. }) => {
            eprintln!("cdpmap: {err}");
            return EXIT_ROOT_UNREACHABLE;
        }
        Err(err) => return usage_error(&err.to_string()),
    };

    for warning in &report.warnings {
        eprintln!("cdpmap: warning: {warning}");
    }
    summarize(&report);

    let rendered = match common.format {
        OutputFormat::Json => {
            let mut text = export::to_json(&report);
            text.push('\n');
            text
        }
        OutputFormat::Dot => export::to_dot(&report.graph),
        OutputFormat::Table => export::to_table(&report),
    };
    match &common.output {
        None => {
            let mut stdout = std::io::stdout().lock();
            if stdout.write_all(rendered.as_bytes()).is_err() {
                return 1;
            }
        }
        Some(path) => {
            if let Err(err) = std::fs::write(path, rendered) {
                eprintln!("cdpmap: cannot write {}: {err}", path.display());
                return 1;
            }
        }
    }
    EXIT_OK
}

fn summarize(report: &DiscoveryReport) {
    let queried = report
        .outcomes
        .values()
        .filter(|o| matches!(o, crate::discovery::QueryOutcome::Queried))
        .count();
    let unreachable = report.outcomes.len() - queried;
    eprintln!(
        "cdpmap: {} devices ({} queried, {} unreachable), {} links ({} blocked); retrieval {} ms, assembly {} ms",
        report.graph.node_count(),
        queried,
        unreachable,
        report.graph.edge_count(),
        report.graph.blocked_count(),
        report.retrieval_duration.as_millis(),
        report.assembly_duration.as_millis(),
    );
}

fn usage_error(message: &str) -> i32 {
    eprintln!("cdpmap: {message}");
    EXIT_USAGE
}

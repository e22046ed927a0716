//! End-to-end runs of the `cdpmap` binary: exit codes, output formats, and
//! a real-mode crawl against a loopback UDP agent.

use std::net::Ipv4Addr;
use std::process::{Command, Output};

use cdpmap::export::parse_json;
use cdpmap::simnet::{build_agent_views, compute_stp_states, load_fixture};
use cdpmap::transport::UdpAgentServer;

const SIXSWITCH: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../../fixtures/sixswitch.toml");

fn cdpmap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cdpmap"))
        .args(args)
        .env_remove("CDPMAP_COMMUNITY")
        .output()
        .expect("binary should run")
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

fn stderr(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).into_owned()
}

#[test]
fn sim_run_emits_json_topology() {
    let output = cdpmap(&["sim", "--fixture", SIXSWITCH, "--root", "SW1", "--format", "json"]);
    assert_eq!(output.status.code(), Some(0), "stderr: {}", stderr(&output));
    let document = parse_json(&stdout(&output)).unwrap();
    assert_eq!(document.schema_version, "1");
    assert_eq!(document.root, Ipv4Addr::new(192, 168, 10, 1));
    assert_eq!(document.stats.node_count, 6);
    assert_eq!(document.stats.edge_count, 8);
    assert_eq!(document.stats.blocked_count, 3);
    assert_eq!(
        document.stats.blocked_count,
        document
            .edges
            .iter()
            .filter(|e| e.state == cdpmap::discovery::LinkState::StpBlocked)
            .count()
    );
}

#[test]
fn sim_accepts_root_by_address_too() {
    let by_id = cdpmap(&["sim", "--fixture", SIXSWITCH, "--root", "SW2", "--format", "json"]);
    let by_ip = cdpmap(&[
        "sim",
        "--fixture",
        SIXSWITCH,
        "--root",
        "192.168.10.2",
        "--format",
        "json",
    ]);
    assert_eq!(by_id.status.code(), Some(0));
    assert_eq!(by_ip.status.code(), Some(0));
    let a = parse_json(&stdout(&by_id)).unwrap().without_timings();
    let b = parse_json(&stdout(&by_ip)).unwrap().without_timings();
    assert_eq!(a, b);
}

#[test]
fn sim_json_is_deterministic_across_runs() {
    let first = cdpmap(&["sim", "--fixture", SIXSWITCH, "--root", "SW1", "--format", "json"]);
    let second = cdpmap(&["sim", "--fixture", SIXSWITCH, "--root", "SW1", "--format", "json"]);
    let a = parse_json(&stdout(&first)).unwrap().without_timings();
    let b = parse_json(&stdout(&second)).unwrap().without_timings();
    assert_eq!(
        serde_json::to_string(&a).unwrap(),
        serde_json::to_string(&b).unwrap()
    );
}

#[test]
fn sim_dot_output_is_renderable_and_stable() {
    let first = cdpmap(&["sim", "--fixture", SIXSWITCH, "--root", "SW1", "--format", "dot"]);
    let second = cdpmap(&["sim", "--fixture", SIXSWITCH, "--root", "SW1", "--format", "dot"]);
    assert_eq!(first.status.code(), Some(0));
    let dot = stdout(&first);
    assert_eq!(dot, stdout(&second), "DOT must be byte-identical");
    assert!(dot.starts_with("graph topology {"));
    assert_eq!(dot.matches("label=\"SW").count(), 6, "one label per switch");
    assert_eq!(dot.matches(" -- ").count(), 8, "one statement per link");
    assert_eq!(dot.matches("style=dashed").count(), 3, "blocked links dashed");
}

#[test]
fn sim_table_output_mentions_every_device() {
    let output = cdpmap(&["sim", "--fixture", SIXSWITCH, "--root", "SW1"]);
    assert_eq!(output.status.code(), Some(0));
    let table = stdout(&output);
    for device in ["SW1", "SW2", "SW3", "SW4", "SW5", "SW6"] {
        assert!(table.contains(device), "table missing {device}:\n{table}");
    }
}

#[test]
fn missing_fixture_exits_3_and_names_the_path() {
    let output = cdpmap(&["sim", "--fixture", "/no/such/fixture.toml", "--root", "SW1"]);
    assert_eq!(output.status.code(), Some(3));
    assert!(stderr(&output).contains("/no/such/fixture.toml"));
}

#[test]
fn unknown_root_device_exits_3() {
    let output = cdpmap(&["sim", "--fixture", SIXSWITCH, "--root", "SW99"]);
    assert_eq!(output.status.code(), Some(3));
    assert!(stderr(&output).contains("SW99"));
}

#[test]
fn invalid_fixture_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("broken.toml");
    std::fs::write(
        &path,
        r#"
        [[devices]]
        device_id = "SW1"
        management_ip = "10.0.0.1"
        interfaces = [{ name = "Gi0/1", if_index = 1 }]

        [[links]]
        a = "SW1:Gi0/1"
        b = "SW9:Gi0/1"
        "#,
    )
    .unwrap();
    let output = cdpmap(&["sim", "--fixture", path.to_str().unwrap(), "--root", "SW1"]);
    assert_eq!(output.status.code(), Some(3));
    assert!(stderr(&output).contains("SW9"));
}

#[test]
fn unknown_flag_exits_2() {
    let output = cdpmap(&["sim", "--fixture", SIXSWITCH, "--root", "SW1", "--frobnicate"]);
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn help_exits_0() {
    let output = cdpmap(&["--help"]);
    assert_eq!(output.status.code(), Some(0));
    assert!(stdout(&output).contains("cdpmap"));
}

#[test]
fn real_mode_root_unreachable_exits_4() {
    // Grab a loopback port with nothing listening on it.
    let port = {
        let socket = std::net::UdpSocket::bind("127.0.0.1:0").unwrap();
        socket.local_addr().unwrap().port()
    };
    let output = cdpmap(&[
        "real",
        "--root",
        "127.0.0.1",
        "--port",
        &port.to_string(),
        "--timeout-ms",
        "200",
        "--retries",
        "0",
    ]);
    assert_eq!(output.status.code(), Some(4), "stderr: {}", stderr(&output));
    assert!(stderr(&output).contains("root device"));
}

#[test]
fn real_mode_crawls_a_loopback_agent() {
    // Serve the root switch's view over UDP; its neighbors exist only in
    // fixture space, so cap the crawl at the root level.
    let fixture = load_fixture(SIXSWITCH).unwrap();
    let resolved = compute_stp_states(&fixture).unwrap();
    let views = build_agent_views(&resolved).unwrap();
    let server =
        UdpAgentServer::spawn(views[&Ipv4Addr::new(192, 168, 10, 1)].clone(), "public").unwrap();
    let port = server.agent_address().port;

    let output = cdpmap(&[
        "real",
        "--root",
        "127.0.0.1",
        "--port",
        &port.to_string(),
        "--timeout-ms",
        "500",
        "--max-level",
        "1",
        "--format",
        "json",
    ]);
    assert_eq!(output.status.code(), Some(0), "stderr: {}", stderr(&output));
    let document = parse_json(&stdout(&output)).unwrap();
    // Root plus its two reported (but unqueried) neighbors.
    assert_eq!(document.stats.node_count, 3);
    assert_eq!(document.nodes[0].device_id, "SW1");
}

#[test]
fn output_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("topology.json");
    let output = cdpmap(&[
        "sim",
        "--fixture",
        SIXSWITCH,
        "--root",
        "SW1",
        "--format",
        "json",
        "--output",
        path.to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(0));
    assert!(stdout(&output).is_empty());
    let document = parse_json(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(document.stats.node_count, 6);
}

#[test]
fn community_env_fallback_is_honored() {
    let output = Command::new(env!("CARGO_BIN_EXE_cdpmap"))
        .args(["sim", "--fixture", SIXSWITCH, "--root", "SW1", "--format", "json"])
        .env("CDPMAP_COMMUNITY", "labnet")
        .output()
        .unwrap();
    // The simulated registry accepts any community; this exercises the
    // flag plumbing, not authentication.
    assert_eq!(output.status.code(), Some(0));
}

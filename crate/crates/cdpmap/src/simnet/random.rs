//! Seeded random fixture generation: a spanning tree plus extra links, so
//! larger networks with redundant (blockable) paths can be conjured on
//! demand.

use std::net::Ipv4Addr;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_chacha::rand_core::SeedableRng;

use super::fixture::{
    FixtureDevice, FixtureInterface, FixtureLink, NetworkFixture, StpState,
    DEFAULT_BRIDGE_PRIORITY,
};

/// Builds a connected fixture with `device_count` devices: a random
/// spanning tree plus `extra_link_count` additional links between random
/// non-adjacent pairs. Deterministic for a given seed. Addresses run
/// sequentially from 10.0.0.1. An extra-link request beyond what the
/// complete graph holds is capped, with a note in the returned warnings.
pub fn generate_random_fixture(
    seed: u64,
    device_count: u32,
    extra_link_count: u32,
) -> (NetworkFixture, Vec<String>) {
    assert!(device_count >= 1, "need at least one device");
    let n = device_count as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut warnings = Vec::new();

    let base_ip = u32::from(Ipv4Addr::new(10, 0, 0, 1));
    let width = device_count.to_string().len().max(3);
    let mut devices: Vec<FixtureDevice> = (0..n)
        .map(|i| FixtureDevice {
            device_id: format!("SW{:0width$}", i + 1),
            management_ip: Ipv4Addr::from(base_ip + i as u32),
            bridge_priority: DEFAULT_BRIDGE_PRIORITY,
            cdp_enabled: true,
            interfaces: Vec::new(),
        })
        .collect();

    let mut pairs: Vec<(usize, usize)> = Vec::new();
    for child in 1..n {
        let parent = rng.gen_range(0..child);
        pairs.push((parent.min(child), parent.max(child)));
    }
    let tree: std::collections::BTreeSet<(usize, usize)> = pairs.iter().copied().collect();

    let mut complement: Vec<(usize, usize)> = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if !tree.contains(&(i, j)) {
                complement.push((i, j));
            }
        }
    }
    let mut extra = extra_link_count as usize;
    if extra > complement.len() {
        warnings.push(format!(
            "requested {extra} extra links but only {} device pairs remain; capped",
            complement.len()
        ));
        extra = complement.len();
    }
    complement.shuffle(&mut rng);
    let mut extras: Vec<(usize, usize)> = complement.into_iter().take(extra).collect();
    extras.sort_unstable();
    pairs.extend(extras);

    let mut links = Vec::with_capacity(pairs.len());
    for (i, j) in pairs {
        let pa = grow_interface(&mut devices[i]);
        let pb = grow_interface(&mut devices[j]);
        links.push(FixtureLink {
            a: format!("{}:{}", devices[i].device_id, pa),
            b: format!("{}:{}", devices[j].device_id, pb),
            stp_state: StpState::Auto,
        });
    }

    (
        NetworkFixture {
            devices,
            links,
            hosts: Vec::new(),
            hubs: Vec::new(),
        },
        warnings,
    )
}

fn grow_interface(device: &mut FixtureDevice) -> String {
    let index = device.interfaces.len() as u32 + 1;
    let name = format!("Gi0/{index}");
    device.interfaces.push(FixtureInterface {
        name: name.clone(),
        if_index: index,
        admin_status: Default::default(),
        routed: false,
    });
    name
}

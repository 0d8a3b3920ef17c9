#![allow(dead_code)]

use fleetcharge_core::domain::{ChargePlan, Facility, Region, ScenarioConfig, Schedule, Series, Session};
use fleetcharge_core::schedules::GenerationPolicy;

/// A path of `regions` regions with one facility in region 0.
pub fn line_config(regions: usize, horizon: usize) -> ScenarioConfig {
    let values = [15.0, 10.0, 5.0];
    ScenarioConfig {
        horizon,
        regions: (0..regions)
            .map(|id| Region {
                id,
                pickup_value: values[id % 3],
                vehicle_limit: Series::Constant(40),
                facility_id: (id == 0).then_some(0),
                soc_value_slope: None,
            })
            .collect(),
        adjacency: (1..regions).map(|r| [r - 1, r]).collect(),
        facilities: vec![Facility {
            id: 0,
            region: 0,
            evse_count: 2,
            cables_per_evse: 4,
            evse_energy_limit: 5.0,
            solar: Series::Constant(10.0),
            solar_capacity: 10.0,
            grid_price: Series::Constant(0.2),
            grid_limit: Series::Constant(20.0),
        }],
        out_of_service_cap: Series::Constant(100),
        out_of_service_penalty: Series::Constant(0.5),
        battery_capacity: 50.0,
        charge_increment: 12.5,
        charge_rate: 5.0,
        per_hop_energy: 1.0,
        per_hop_value_penalty: 2.0,
        soc_value_slope: 0.2,
        rng_seed: 0,
        policy: GenerationPolicy::default(),
        baseline_patience: 4,
        bounds: None,
    }
}

/// A schedule with an explicit value, for objective bookkeeping tests.
pub fn bare_schedule(
    session: &Session,
    arrival: usize,
    destination: usize,
    value: f64,
    charge: Option<ChargePlan>,
) -> Schedule {
    Schedule {
        session_id: session.id,
        start_slot: session.start_slot,
        origin: session.origin,
        charge,
        approach_hops: 0,
        departure_hops: 0,
        destination,
        arrival_slot: arrival,
        final_soc: session.soc,
        value,
    }
}

/// Breadth-first hop counts from `from`, written independently of the crate.
pub fn bfs(adjacency: &[[usize; 2]], regions: usize, from: usize) -> Vec<Option<u32>> {
    let mut dist = vec![None; regions];
    dist[from] = Some(0);
    let mut queue = std::collections::VecDeque::from([from]);
    while let Some(r) = queue.pop_front() {
        let next = dist[r].unwrap() + 1;
        for &[a, b] in adjacency {
            let other = if a == r {
                b
            } else if b == r {
                a
            } else {
                continue;
            };
            if dist[other].is_none() {
                dist[other] = Some(next);
                queue.push_back(other);
            }
        }
    }
    dist
}

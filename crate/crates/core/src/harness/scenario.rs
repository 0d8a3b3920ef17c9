use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::domain::{Facility, Region, ScenarioConfig, Series, Session};
use crate::error::{Error, Result};
use crate::schedules::GenerationPolicy;

/// Knobs for synthetic instances. Slots are assumed to be 15 minutes, so
/// daylight and peak windows scale with the horizon as fractions of a day.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScenarioParams {
    pub horizon: usize,
    pub grid_rows: usize,
    pub grid_cols: usize,
    /// Number of regions; the last grid row may be partial.
    pub regions: usize,
    pub facilities: usize,
    pub evse_count: usize,
    pub cables_per_evse: u32,
    pub evse_energy_limit: f64,
    pub solar_peak: f64,
    pub grid_limit: f64,
    pub off_peak_price: f64,
    pub peak_price: f64,
    /// Day-to-day multiplicative jitter on prices, drawn from `[1-j, 1+j]`.
    pub price_jitter: f64,
    pub vehicle_limit: u32,
    pub out_of_service_cap: u32,
    /// Mean session arrivals per slot.
    pub arrival_rate: f64,
    /// Exact session count; overrides `arrival_rate` when set.
    pub session_count: Option<usize>,
    pub battery_capacity: f64,
    pub charge_increment: f64,
    pub charge_rate: f64,
    pub per_hop_energy: f64,
    pub per_hop_value_penalty: f64,
    pub full_battery_value: f64,
    pub policy: GenerationPolicy,
}

impl Default for ScenarioParams {
    fn default() -> Self {
        Self::desk()
    }
}

impl ScenarioParams {
    /// One day at desk scale: 16 regions, 2 facilities, about 300 sessions.
    pub fn desk() -> Self {
        Self {
            horizon: 96,
            grid_rows: 4,
            grid_cols: 4,
            regions: 16,
            facilities: 2,
            evse_count: 10,
            cables_per_evse: 4,
            evse_energy_limit: 5.0,
            solar_peak: 30.0,
            grid_limit: 60.0,
            off_peak_price: 0.10,
            peak_price: 0.30,
            price_jitter: 0.2,
            vehicle_limit: 40,
            out_of_service_cap: 40,
            arrival_rate: 300.0 / 96.0,
            session_count: None,
            battery_capacity: 50.0,
            charge_increment: 12.5,
            charge_rate: 5.0,
            per_hop_energy: 1.0,
            per_hop_value_penalty: 2.0,
            full_battery_value: 10.0,
            policy: GenerationPolicy::default(),
        }
    }

    /// City scale: 46 regions, 8 facilities of 10 four-cable
    /// EVSEs, 256 kWh of solar and grid per facility.
    pub fn city() -> Self {
        Self {
            grid_rows: 7,
            grid_cols: 7,
            regions: 46,
            facilities: 8,
            solar_peak: 256.0,
            grid_limit: 256.0,
            out_of_service_cap: 400,
            arrival_rate: 1200.0 / 96.0,
            ..Self::desk()
        }
    }

    /// Small enough for exhaustive offline search.
    pub fn tiny() -> Self {
        Self {
            horizon: 12,
            grid_rows: 2,
            grid_cols: 2,
            regions: 4,
            facilities: 1,
            evse_count: 1,
            cables_per_evse: 2,
            solar_peak: 5.0,
            grid_limit: 5.0,
            vehicle_limit: 2,
            out_of_service_cap: 3,
            session_count: Some(6),
            policy: GenerationPolicy {
                max_candidate_facilities: 1,
                charge_targets: Some(vec![12.5]),
                max_start_offset: 1,
                max_candidates_total: 8,
                destination_radius: None,
            },
            ..Self::desk()
        }
    }

    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "desk" => Ok(Self::desk()),
            "city" => Ok(Self::city()),
            "tiny" => Ok(Self::tiny()),
            other => Err(Error::Invalid(format!("unknown preset `{other}` (desk, city, tiny)"))),
        }
    }

    fn check(&self) -> Result<()> {
        let mut problems = Vec::new();
        if self.horizon == 0 {
            problems.push("horizon must be >= 1");
        }
        if self.regions == 0 || self.regions > self.grid_rows * self.grid_cols {
            problems.push("regions must be in 1..=grid_rows*grid_cols");
        }
        if self.facilities > self.regions {
            problems.push("at most one facility per region");
        }
        if !(self.arrival_rate >= 0.0 && self.arrival_rate.is_finite()) {
            problems.push("arrival_rate must be finite and >= 0");
        }
        if !(self.off_peak_price > 0.0 && self.peak_price > 0.0) {
            problems.push("prices must be > 0");
        }
        if !(0.0..1.0).contains(&self.price_jitter) {
            problems.push("price_jitter must be in [0, 1)");
        }
        if !(self.solar_peak >= 0.0 && self.grid_limit >= 0.0) {
            problems.push("solar_peak and grid_limit must be >= 0");
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Invalid(format!(
                "invalid scenario params: {}",
                problems.join("; ")
            )))
        }
    }
}

/// Clipped sine between dawn (a quarter of the horizon) and dusk.
pub fn diurnal_solar(horizon: usize, peak: f64) -> Vec<f64> {
    let dawn = horizon as f64 * 6.0 / 24.0;
    let dusk = horizon as f64 * 19.0 / 24.0;
    (0..horizon)
        .map(|t| {
            let x = (t as f64 + 0.5 - dawn) / (dusk - dawn);
            if (0.0..=1.0).contains(&x) {
                (peak * (std::f64::consts::PI * x).sin()).clamp(0.0, peak)
            } else {
                0.0
            }
        })
        .collect()
}

/// Two-tier time-of-use price: `peak` from 16:00 to 21:00, `off_peak` otherwise.
pub fn time_of_use(horizon: usize, off_peak: f64, peak: f64) -> Vec<f64> {
    let start = horizon * 16 / 24;
    let end = horizon * 21 / 24;
    (0..horizon)
        .map(|t| if (start..end).contains(&t) { peak } else { off_peak })
        .collect()
}

fn grid_edges(regions: usize, cols: usize) -> Vec<[usize; 2]> {
    let mut edges = Vec::new();
    for r in 0..regions {
        if (r + 1) % cols != 0 && r + 1 < regions {
            edges.push([r, r + 1]);
        }
        if r + cols < regions {
            edges.push([r, r + cols]);
        }
    }
    edges
}

/// Deterministic synthetic instance for `seed`.
pub fn generate_scenario(seed: u64, params: &ScenarioParams) -> Result<(ScenarioConfig, Vec<Session>)> {
    params.check()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let horizon = params.horizon;

    let values = [15.0, 10.0, 5.0];
    let mut regions: Vec<Region> = (0..params.regions)
        .map(|id| Region {
            id,
            pickup_value: values[rng.random_range(0..values.len())],
            vehicle_limit: Series::Constant(params.vehicle_limit),
            facility_id: None,
            soc_value_slope: None,
        })
        .collect();

    let mut sites: Vec<usize> = (0..params.regions).collect();
    sites.shuffle(&mut rng);
    sites.truncate(params.facilities);
    sites.sort_unstable();

    let solar = diurnal_solar(horizon, params.solar_peak);
    let mut max_price: f64 = 0.0;
    let facilities: Vec<Facility> = sites
        .iter()
        .enumerate()
        .map(|(id, &region)| {
            regions[region].facility_id = Some(id);
            let scale = 1.0 + rng.random_range(-params.price_jitter..=params.price_jitter);
            let prices: Vec<f64> = time_of_use(horizon, params.off_peak_price, params.peak_price)
                .into_iter()
                .map(|p| p * scale)
                .collect();
            max_price = prices.iter().copied().fold(max_price, f64::max);
            Facility {
                id,
                region,
                evse_count: params.evse_count,
                cables_per_evse: params.cables_per_evse,
                evse_energy_limit: params.evse_energy_limit,
                solar: Series::PerSlot(solar.clone()),
                solar_capacity: params.solar_peak,
                grid_price: Series::PerSlot(prices),
                grid_limit: Series::Constant(params.grid_limit),
            }
        })
        .collect();
    if facilities.is_empty() {
        max_price = params.peak_price.max(params.off_peak_price);
    }

    let config = ScenarioConfig {
        horizon,
        regions,
        adjacency: grid_edges(params.regions, params.grid_cols),
        facilities,
        out_of_service_cap: Series::Constant(params.out_of_service_cap),
        out_of_service_penalty: Series::Constant(2.0 * max_price),
        battery_capacity: params.battery_capacity,
        charge_increment: params.charge_increment,
        charge_rate: params.charge_rate,
        per_hop_energy: params.per_hop_energy,
        per_hop_value_penalty: params.per_hop_value_penalty,
        soc_value_slope: params.full_battery_value / params.battery_capacity,
        rng_seed: seed,
        policy: params.policy.clone(),
        baseline_patience: 4,
        bounds: None,
    };

    let socs = [0.25, 0.5, 0.75];
    let mut starts: Vec<usize> = match params.session_count {
        Some(n) => (0..n).map(|_| rng.random_range(0..horizon)).collect(),
        None if params.arrival_rate > 0.0 => {
            let poisson =
                Poisson::new(params.arrival_rate).map_err(|e| Error::Invalid(format!("arrival rate: {e}")))?;
            (0..horizon)
                .flat_map(|t| {
                    let n = poisson.sample(&mut rng) as usize;
                    std::iter::repeat_n(t, n)
                })
                .collect()
        }
        None => Vec::new(),
    };
    starts.sort_unstable();
    let sessions = starts
        .into_iter()
        .enumerate()
        .map(|(id, start)| {
            let origin = rng.random_range(0..params.regions);
            let soc = socs[rng.random_range(0..socs.len())];
            Session::new(id as u64, start, origin, soc)
        })
        .collect();

    let violations = config.validate();
    if !violations.is_empty() {
        return Err(Error::InvalidConfig(violations));
    }
    Ok((config, sessions))
}

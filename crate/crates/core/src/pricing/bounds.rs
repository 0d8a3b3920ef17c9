use serde::{Deserialize, Serialize};

use super::PricingError;
use crate::domain::{ResourceFamily, ScenarioConfig};
use crate::tolerance::{BOUND_CLAMP_MARGIN, ENERGY_EPS};

/// Lower and upper value density for one resource family, `(L, U)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bound {
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PriceBounds {
    pub cable: Bound,
    pub energy: Bound,
    pub generation: Bound,
    pub destination: Bound,
    pub out_of_service: Bound,
}

impl PriceBounds {
    pub fn get(&self, family: ResourceFamily) -> Bound {
        match family {
            ResourceFamily::Cable => self.cable,
            ResourceFamily::Energy => self.energy,
            ResourceFamily::Generation => self.generation,
            ResourceFamily::Destination => self.destination,
            ResourceFamily::OutOfService => self.out_of_service,
        }
    }

    /// Broken bound invariants for `config`, as messages.
    pub fn check(&self, config: &ScenarioConfig, psi: u64) -> Vec<String> {
        let mut out = Vec::new();
        for family in ResourceFamily::ALL {
            let b = self.get(family);
            if !(b.lower > 0.0 && b.lower <= b.upper && b.upper.is_finite()) {
                out.push(format!("{family}: need 0 < L <= U, got L={} U={}", b.lower, b.upper));
            }
        }
        let two_psi = 2.0 * psi as f64;
        let max_pi = config.max_grid_price();
        if self.generation.lower <= max_pi {
            out.push(format!(
                "generation: L_g={} must exceed the largest grid price {max_pi}",
                self.generation.lower
            ));
        }
        for fac in &config.facilities {
            for t in 0..config.horizon {
                let pi = fac.grid_price.at(t);
                if fac.solar.at(t) > 0.0 && self.generation.lower >= two_psi * pi {
                    out.push(format!(
                        "generation: L_g/2Ψ={} must stay below grid price {pi} at facility {} slot {t}",
                        self.generation.lower / two_psi,
                        fac.id
                    ));
                }
            }
        }
        let max_phi = config.max_penalty();
        if self.out_of_service.lower <= max_phi {
            out.push(format!(
                "out_of_service: L_o={} must exceed the largest penalty {max_phi}",
                self.out_of_service.lower
            ));
        }
        out
    }
}

/// Competitive-ratio parameters of each resource family and their maximum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Alphas {
    pub cable: f64,
    pub energy: f64,
    pub generation: f64,
    pub destination: f64,
    pub out_of_service: f64,
    pub alpha: f64,
}

impl Alphas {
    pub fn get(&self, family: ResourceFamily) -> f64 {
        match family {
            ResourceFamily::Cable => self.cable,
            ResourceFamily::Energy => self.energy,
            ResourceFamily::Generation => self.generation,
            ResourceFamily::Destination => self.destination,
            ResourceFamily::OutOfService => self.out_of_service,
        }
    }
}

/// Bounds derived from the config alone.
///
/// The largest schedule value is the best pickup value plus a full battery.
/// Each `U` divides it by the smallest amount of its resource a schedule can
/// take in one slot, so a saturated resource prices every schedule out.
/// Each `L` divides the smallest positive pickup value by `Ψ` times the most
/// of that resource one schedule can hold over the horizon.
pub fn estimate_bounds(config: &ScenarioConfig) -> Result<PriceBounds, PricingError> {
    let psi = super::psi(config) as f64;
    let horizon = config.horizon as f64;
    let best_soc_value = (0..config.regions.len())
        .map(|d| config.soc_slope_at(d))
        .fold(0.0, f64::max)
        * config.battery_capacity;
    let vmax = config.regions.iter().map(|r| r.pickup_value).fold(0.0, f64::max) + best_soc_value;
    let vmin = config
        .regions
        .iter()
        .map(|r| r.pickup_value)
        .filter(|&v| v > 0.0)
        .fold(f64::INFINITY, f64::min);
    if !vmin.is_finite() {
        return Err(PricingError::Estimate(
            "no region has a positive pickup value, so schedules can be worth zero".into(),
        ));
    }
    let quantum = min_energy_quantum(config);
    if quantum.is_nan() || quantum <= 0.0 {
        return Err(PricingError::Estimate(
            "charge targets admit no positive energy quantum".into(),
        ));
    }

    let bound = |lower: f64, upper: f64| Bound {
        lower,
        upper: upper.max(lower),
    };
    let generation_floor = config.max_grid_price() * (1.0 + BOUND_CLAMP_MARGIN);
    let penalty_floor = config.max_penalty() * (1.0 + BOUND_CLAMP_MARGIN);
    let energy_lower = vmin / (psi * horizon * config.charge_rate);
    Ok(PriceBounds {
        cable: bound(vmin / (psi * horizon), vmax),
        energy: bound(energy_lower, vmax / quantum),
        generation: bound(energy_lower.max(generation_floor), vmax / quantum),
        destination: bound(vmin / psi, vmax),
        out_of_service: bound((vmin / (psi * horizon)).max(penalty_floor), vmax),
    })
}

/// Smallest nonzero energy a dispatcher schedule delivers in one slot: the
/// remainder of some charge target modulo the charge rate, or the full rate.
pub(crate) fn min_energy_quantum(config: &ScenarioConfig) -> f64 {
    let rate = config.charge_rate;
    config
        .charge_targets()
        .into_iter()
        .map(|target| {
            let rem = target - (target / rate).floor() * rate;
            if rem <= ENERGY_EPS || rate - rem <= ENERGY_EPS {
                rate
            } else {
                rem
            }
        })
        .fold(rate, f64::min)
}

/// Per-family competitive ratios. Generation and out-of-service take the
/// worst slot of their traces.
pub fn alphas(bounds: &PriceBounds, psi: u64, config: &ScenarioConfig) -> Alphas {
    let two_psi = 2.0 * psi as f64;
    let plain = |b: Bound| (two_psi * b.upper / b.lower).ln();
    let shifted = |b: Bound, floor: f64| (two_psi * (b.upper - floor) / (b.lower - floor)).ln();

    // A config without facilities has no generation resource; 1 is neutral.
    let generation = config
        .facilities
        .iter()
        .flat_map(|fac| fac.grid_price.values(config.horizon))
        .map(|pi| shifted(bounds.generation, pi))
        .reduce(f64::max)
        .unwrap_or(1.0);
    let out_of_service = config
        .out_of_service_penalty
        .values(config.horizon)
        .map(|phi| shifted(bounds.out_of_service, phi))
        .reduce(f64::max)
        .unwrap_or(1.0);

    let cable = plain(bounds.cable);
    let energy = plain(bounds.energy);
    let destination = plain(bounds.destination);
    let alpha = [cable, energy, generation, destination, out_of_service]
        .into_iter()
        .fold(1.0, f64::max);
    Alphas {
        cable,
        energy,
        generation,
        destination,
        out_of_service,
        alpha,
    }
}

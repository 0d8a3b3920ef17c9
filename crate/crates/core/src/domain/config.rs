use std::fmt;

use serde::{Deserialize, Serialize};

use super::graph::HopTable;
use super::series::Series;
use crate::pricing::PriceBounds;
use crate::schedules::GenerationPolicy;
use crate::tolerance::ENERGY_EPS;

/// Static description of one operating day: regions, travel graph,
/// charging facilities, traces and penalties.
///
/// Slots are zero-based: a config with `horizon = T` covers slots `0..T`.
/// Energy is in kWh and money in dollars.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub horizon: usize,
    pub regions: Vec<Region>,
    /// Undirected edges between region ids. One hop takes one slot.
    pub adjacency: Vec<[usize; 2]>,
    pub facilities: Vec<Facility>,
    /// Maximum number of out-of-service vehicles per slot, `I(t)`.
    pub out_of_service_cap: Series<u32>,
    /// Virtual cost per out-of-service vehicle per slot, `phi(t)`.
    pub out_of_service_penalty: Series<f64>,
    pub battery_capacity: f64,
    /// Charge requests are multiples of this amount.
    pub charge_increment: f64,
    /// Energy an EVSE delivers to a plugged vehicle in one charging slot.
    pub charge_rate: f64,
    pub per_hop_energy: f64,
    pub per_hop_value_penalty: f64,
    /// Value of stored energy at pickup, dollars per kWh.
    pub soc_value_slope: f64,
    pub rng_seed: u64,
    #[serde(default)]
    pub policy: GenerationPolicy,
    /// Slots a threshold baseline waits for a saturated facility before
    /// giving up and sending the vehicle to the depot.
    #[serde(default = "default_patience")]
    pub baseline_patience: usize,
    /// Explicit price bounds. When absent they are estimated from the config.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bounds: Option<PriceBounds>,
}

fn default_patience() -> usize {
    4
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub id: usize,
    /// Profit for picking up a customer here, `v_d`.
    pub pickup_value: f64,
    /// Vehicle arrivals allowed per slot, `Omega_d(t)`.
    pub vehicle_limit: Series<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub facility_id: Option<usize>,
    /// Per-region override of [`ScenarioConfig::soc_value_slope`].
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub soc_value_slope: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Facility {
    pub id: usize,
    pub region: usize,
    /// Number of single-output multiple-cable EVSEs, `M_f`.
    pub evse_count: usize,
    /// Cables per EVSE, `C_f`.
    pub cables_per_evse: u32,
    /// Energy one EVSE can deliver per slot, `E_f`.
    pub evse_energy_limit: f64,
    /// Solar energy available per slot, `delta_f(t)`.
    pub solar: Series<f64>,
    /// Rating of the on-site solar system, `Delta_f`.
    pub solar_capacity: f64,
    /// Grid price per kWh, `pi_f(t)`.
    pub grid_price: Series<f64>,
    /// Grid energy purchasable per slot, `mu_f(t)`.
    pub grid_limit: Series<f64>,
}

impl ScenarioConfig {
    pub fn region_count(&self) -> usize {
        self.regions.len()
    }

    pub fn soc_slope_at(&self, region: usize) -> f64 {
        self.regions[region].soc_value_slope.unwrap_or(self.soc_value_slope)
    }

    /// Charge targets offered by the config's own policy, in kWh, ascending.
    pub fn charge_targets(&self) -> Vec<f64> {
        self.policy.targets(self)
    }

    pub fn max_grid_price(&self) -> f64 {
        self.facilities
            .iter()
            .map(|f| f.grid_price.max(self.horizon))
            .fold(0.0, f64::max)
    }

    pub fn max_penalty(&self) -> f64 {
        self.out_of_service_penalty.max(self.horizon).max(0.0)
    }

    /// Checks every structural invariant. An empty list means the config is
    /// usable by every other module.
    // Negated comparisons so that NaN fails every check.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let horizon = self.horizon;
        if horizon == 0 {
            out.push(Violation::new("horizon", None, "must be at least one slot"));
            return out;
        }
        if self.regions.is_empty() {
            out.push(Violation::new("regions", None, "at least one region required"));
        }

        for (idx, region) in self.regions.iter().enumerate() {
            let field = |name: &str| format!("regions[{idx}].{name}");
            if region.id != idx {
                out.push(Violation::new(field("id"), None, "region ids must equal their index"));
            }
            if !(region.pickup_value >= 0.0) {
                out.push(Violation::new(field("pickup_value"), None, "must be >= 0"));
            }
            check_len(&mut out, field("vehicle_limit"), &region.vehicle_limit, horizon);
            if let Some(fid) = region.facility_id {
                if fid >= self.facilities.len() {
                    out.push(Violation::new(field("facility_id"), None, "unknown facility"));
                }
            }
            if let Some(slope) = region.soc_value_slope {
                if !(slope >= 0.0) {
                    out.push(Violation::new(field("soc_value_slope"), None, "must be >= 0"));
                }
            }
        }

        for (idx, edge) in self.adjacency.iter().enumerate() {
            if edge.iter().any(|&r| r >= self.regions.len()) {
                out.push(Violation::new(format!("adjacency[{idx}]"), None, "unknown region id"));
            }
        }

        for (idx, fac) in self.facilities.iter().enumerate() {
            let field = |name: &str| format!("facilities[{idx}].{name}");
            if fac.id != idx {
                out.push(Violation::new(field("id"), None, "facility ids must equal their index"));
            }
            if fac.region >= self.regions.len() {
                out.push(Violation::new(field("region"), None, "unknown region id"));
            }
            if fac.evse_count < 1 {
                out.push(Violation::new(field("evse_count"), None, "must be >= 1"));
            }
            if fac.cables_per_evse < 1 {
                out.push(Violation::new(field("cables_per_evse"), None, "must be >= 1"));
            }
            if !(fac.evse_energy_limit > 0.0) {
                out.push(Violation::new(field("evse_energy_limit"), None, "must be > 0"));
            }
            if !(fac.solar_capacity >= 0.0) {
                out.push(Violation::new(field("solar_capacity"), None, "must be >= 0"));
            }
            if check_len(&mut out, field("solar"), &fac.solar, horizon) {
                for (t, v) in fac.solar.values(horizon).enumerate() {
                    if !(v >= 0.0 && v <= fac.solar_capacity) {
                        out.push(Violation::new(
                            field("solar"),
                            Some(t),
                            format!("{v} outside [0, {}]", fac.solar_capacity),
                        ));
                    }
                }
            }
            if check_len(&mut out, field("grid_price"), &fac.grid_price, horizon) {
                for (t, v) in fac.grid_price.values(horizon).enumerate() {
                    if !(v > 0.0) {
                        out.push(Violation::new(field("grid_price"), Some(t), format!("{v} must be > 0")));
                    }
                }
            }
            if check_len(&mut out, field("grid_limit"), &fac.grid_limit, horizon) {
                for (t, v) in fac.grid_limit.values(horizon).enumerate() {
                    if !(v >= 0.0) {
                        out.push(Violation::new(
                            field("grid_limit"),
                            Some(t),
                            format!("{v} must be >= 0"),
                        ));
                    }
                }
            }
        }

        if check_len(&mut out, "out_of_service_cap".into(), &self.out_of_service_cap, horizon) {
            for (t, v) in self.out_of_service_cap.values(horizon).enumerate() {
                if v < 1 {
                    out.push(Violation::new("out_of_service_cap", Some(t), "must be >= 1"));
                }
            }
        }
        if check_len(
            &mut out,
            "out_of_service_penalty".into(),
            &self.out_of_service_penalty,
            horizon,
        ) {
            for (t, v) in self.out_of_service_penalty.values(horizon).enumerate() {
                if !(v >= 0.0) {
                    out.push(Violation::new(
                        "out_of_service_penalty",
                        Some(t),
                        format!("{v} must be >= 0"),
                    ));
                }
            }
        }

        if !(self.battery_capacity > 0.0) {
            out.push(Violation::new("battery_capacity", None, "must be > 0"));
        }
        if !(self.charge_increment > 0.0) {
            out.push(Violation::new("charge_increment", None, "must be > 0"));
        } else if self.battery_capacity > 0.0 && !is_multiple(self.battery_capacity, self.charge_increment) {
            out.push(Violation::new("charge_increment", None, "must divide battery_capacity"));
        }
        if !(self.charge_rate > 0.0) {
            out.push(Violation::new("charge_rate", None, "must be > 0"));
        }
        for (name, value) in [
            ("per_hop_energy", self.per_hop_energy),
            ("per_hop_value_penalty", self.per_hop_value_penalty),
            ("soc_value_slope", self.soc_value_slope),
        ] {
            if !(value >= 0.0) {
                out.push(Violation::new(name, None, "must be >= 0"));
            }
        }

        out.extend(self.policy.violations(self));

        if out.is_empty() {
            self.check_connectivity(&mut out);
            if let Some(bounds) = &self.bounds {
                let psi = crate::pricing::psi(self);
                for message in bounds.check(self, psi) {
                    out.push(Violation::new("bounds", None, message));
                }
            }
        }
        out
    }

    fn check_connectivity(&self, out: &mut Vec<Violation>) {
        let table = HopTable::new(self);
        let demand: Vec<usize> = self
            .regions
            .iter()
            .filter(|r| r.pickup_value > 0.0)
            .map(|r| r.id)
            .collect();
        if let Some(&anchor) = demand.first() {
            for &other in &demand[1..] {
                if table.hops(anchor, other).is_err() {
                    out.push(Violation::new(
                        "adjacency",
                        None,
                        format!("regions {anchor} and {other} with positive demand are disconnected"),
                    ));
                }
            }
        }
    }
}

fn check_len<T: Copy>(out: &mut Vec<Violation>, field: String, series: &Series<T>, horizon: usize) -> bool {
    if series.covers(horizon) {
        true
    } else {
        out.push(Violation::new(
            field,
            None,
            format!(
                "has {} entries, expected {horizon}",
                series.explicit_len().unwrap_or_default()
            ),
        ));
        false
    }
}

pub(crate) fn is_multiple(value: f64, unit: f64) -> bool {
    let ratio = value / unit;
    (ratio - ratio.round()).abs() <= ENERGY_EPS * ratio.abs().max(1.0)
}

/// One broken config invariant.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub field: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slot: Option<usize>,
    pub message: String,
}

impl Violation {
    pub fn new(field: impl Into<String>, slot: Option<usize>, message: impl Into<String>) -> Self {
        Self {
            field: field.into(),
            slot,
            message: message.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.slot {
            Some(t) => write!(f, "{} (slot {t}): {}", self.field, self.message),
            None => write!(f, "{}: {}", self.field, self.message),
        }
    }
}

/// Free-function form of [`ScenarioConfig::validate`].
pub fn validate(config: &ScenarioConfig) -> Vec<Violation> {
    config.validate()
}

use std::ops::RangeInclusive;

use serde::{Deserialize, Serialize};

use super::config::ScenarioConfig;
use super::graph::HopTable;
use super::session::Session;
use crate::tolerance::{ENERGY_EPS, MONEY_EPS};

/// Charging portion of a schedule: the vehicle holds one cable of EVSE
/// `evse` at `facility` for every slot of `[dwell_start, dwell_end]` and
/// receives `energy[i]` kWh in slot `dwell_start + i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChargePlan {
    pub facility: usize,
    pub evse: usize,
    pub dwell_start: usize,
    pub dwell_end: usize,
    pub energy: Vec<f64>,
}

impl ChargePlan {
    pub fn dwell(&self) -> RangeInclusive<usize> {
        self.dwell_start..=self.dwell_end
    }

    pub fn dwell_len(&self) -> usize {
        self.dwell_end + 1 - self.dwell_start
    }

    pub fn total_energy(&self) -> f64 {
        self.energy.iter().sum()
    }

    /// `(slot, kWh)` for every slot with nonzero delivery.
    pub fn charging_slots(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.energy
            .iter()
            .enumerate()
            .filter(|(_, &e)| e > 0.0)
            .map(move |(i, &e)| (self.dwell_start + i, e))
    }
}

/// One feasible plan for a between-ride session.
///
/// Timeline: the vehicle leaves the origin in the drop-off slot and each
/// hop takes one slot. With charging it first travels `approach_hops` to
/// the facility, dwells there, then travels `departure_hops` to the
/// destination; without charging all hops are departure hops. The pickup
/// happens in `arrival_slot`, and the vehicle is out of service on
/// `[start_slot, arrival_slot]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub session_id: u64,
    pub start_slot: usize,
    pub origin: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub charge: Option<ChargePlan>,
    pub approach_hops: u32,
    pub departure_hops: u32,
    pub destination: usize,
    pub arrival_slot: usize,
    /// State of charge at pickup, as a fraction of battery capacity.
    pub final_soc: f64,
    pub value: f64,
}

impl Schedule {
    pub fn out_of_service(&self) -> RangeInclusive<usize> {
        self.start_slot..=self.arrival_slot
    }

    pub fn out_of_service_len(&self) -> usize {
        self.arrival_slot + 1 - self.start_slot
    }

    pub fn total_hops(&self) -> u32 {
        self.approach_hops + self.departure_hops
    }

    pub fn charged_energy(&self) -> f64 {
        self.charge.as_ref().map_or(0.0, ChargePlan::total_energy)
    }

    /// Every invariant a schedule must satisfy, replaying its SoC trajectory
    /// slot by slot. Returns a description of each breach.
    pub fn check(&self, session: &Session, config: &ScenarioConfig, hops: &HopTable) -> Vec<String> {
        let mut problems = Vec::new();
        let capacity = config.battery_capacity;
        if self.session_id != session.id || self.start_slot != session.start_slot || self.origin != session.origin {
            problems.push("schedule does not belong to the session".to_string());
        }
        if self.arrival_slot >= config.horizon {
            problems.push(format!("arrival slot {} beyond horizon", self.arrival_slot));
        }
        if self.destination >= config.regions.len() {
            problems.push("unknown destination".to_string());
            return problems;
        }

        let mut energy = session.soc * capacity;
        let mut slot = self.start_slot;
        let track = |energy: f64, slot: usize, problems: &mut Vec<String>| {
            if energy < -ENERGY_EPS || energy > capacity + ENERGY_EPS {
                problems.push(format!("SoC {energy:.3} kWh out of range at slot {slot}"));
            }
        };
        let departure_from = match &self.charge {
            Some(plan) => {
                let Some(fac) = config.facilities.get(plan.facility) else {
                    problems.push("unknown facility".to_string());
                    return problems;
                };
                if plan.evse >= fac.evse_count {
                    problems.push(format!("EVSE {} out of range", plan.evse));
                }
                if hops.reach(self.origin, fac.region) != Some(self.approach_hops) {
                    problems.push("approach hops disagree with the region graph".to_string());
                }
                for _ in 0..self.approach_hops {
                    energy -= config.per_hop_energy;
                    track(energy, slot, &mut problems);
                    slot += 1;
                }
                if plan.dwell_start != slot || plan.dwell_end < plan.dwell_start {
                    problems.push("dwell window does not follow the approach".to_string());
                }
                if plan.energy.len() != plan.dwell_len() {
                    problems.push("energy vector does not span the dwell window".to_string());
                }
                let mut partial = 0;
                for &e in &plan.energy {
                    if e < 0.0 || e > config.charge_rate + ENERGY_EPS {
                        problems.push(format!("per-slot energy {e} not in [0, {}]", config.charge_rate));
                    }
                    if e > ENERGY_EPS && e < config.charge_rate - ENERGY_EPS {
                        partial += 1;
                    }
                    energy += e;
                    track(energy, slot, &mut problems);
                    slot += 1;
                }
                if partial > 1 {
                    problems.push("more than one partial-rate slot".to_string());
                }
                if plan.total_energy() <= ENERGY_EPS {
                    problems.push("charging plan delivers no energy".to_string());
                }
                fac.region
            }
            None => {
                if self.approach_hops != 0 {
                    problems.push("approach hops without a charging stop".to_string());
                }
                self.origin
            }
        };
        if hops.reach(departure_from, self.destination) != Some(self.departure_hops) {
            problems.push("departure hops disagree with the region graph".to_string());
        }
        for _ in 0..self.departure_hops {
            energy -= config.per_hop_energy;
            track(energy, slot, &mut problems);
            slot += 1;
        }
        if slot != self.arrival_slot {
            problems.push(format!("arrival slot {} but route ends at {slot}", self.arrival_slot));
        }
        if (energy - self.final_soc * capacity).abs() > 1e-6 {
            problems.push(format!(
                "final SoC {} disagrees with replayed {:.6}",
                self.final_soc,
                energy / capacity
            ));
        }
        let expected = schedule_value_of(config, self.destination, self.final_soc, self.total_hops());
        if (expected - self.value).abs() > MONEY_EPS * expected.abs().max(1.0) {
            problems.push(format!("value {} but formula gives {expected}", self.value));
        }
        problems
    }
}

/// `V_d(SoC) + v_d - penalty * hops`, with `V_d` linear in stored energy.
pub(crate) fn schedule_value_of(config: &ScenarioConfig, destination: usize, final_soc: f64, hops: u32) -> f64 {
    config.soc_slope_at(destination) * final_soc * config.battery_capacity + config.regions[destination].pickup_value
        - config.per_hop_value_penalty * f64::from(hops)
}

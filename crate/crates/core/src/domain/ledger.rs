use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::config::ScenarioConfig;
use super::report::DispatchDecision;
use super::schedule::Schedule;
use crate::tolerance::ENERGY_EPS;

/// The five families of shared resources a schedule consumes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResourceFamily {
    Cable,
    Energy,
    Generation,
    Destination,
    OutOfService,
}

impl ResourceFamily {
    pub const ALL: [ResourceFamily; 5] = [
        ResourceFamily::Cable,
        ResourceFamily::Energy,
        ResourceFamily::Generation,
        ResourceFamily::Destination,
        ResourceFamily::OutOfService,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ResourceFamily::Cable => "cable",
            ResourceFamily::Energy => "energy",
            ResourceFamily::Generation => "generation",
            ResourceFamily::Destination => "destination",
            ResourceFamily::OutOfService => "out_of_service",
        }
    }
}

impl fmt::Display for ResourceFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for ResourceFamily {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ResourceFamily::ALL
            .into_iter()
            .find(|f| f.name() == s || f.name().replace('_', "-") == s)
            .ok_or_else(|| format!("unknown resource family `{s}`"))
    }
}

/// A resource entry whose allocation exceeds its capacity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapacityViolation {
    pub family: ResourceFamily,
    /// Facility or region index; `None` for the fleet-wide out-of-service count.
    pub owner: Option<usize>,
    pub evse: Option<usize>,
    pub slot: usize,
    pub allocated: f64,
    pub capacity: f64,
}

impl fmt::Display for CapacityViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} at slot {} (owner {:?}, evse {:?}): {} > {}",
            self.family, self.slot, self.owner, self.evse, self.allocated, self.capacity
        )
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LedgerError {
    #[error("{} capacity violation(s), first: {}", .0.len(), .0[0])]
    CapacityExceeded(Vec<CapacityViolation>),
}

/// Running allocation counts for every shared resource and slot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResourceLedger {
    /// `y_c[f][m][t]`
    pub cables: Vec<Vec<Vec<u32>>>,
    /// `y_e[f][m][t]`
    pub energy: Vec<Vec<Vec<f64>>>,
    /// `y_g[f][t]`
    pub generation: Vec<Vec<f64>>,
    /// `y_o[t]`
    pub out_of_service: Vec<u32>,
    /// `y_d[d][t]`, arrivals per slot.
    pub destination: Vec<Vec<u32>>,
}

impl ResourceLedger {
    pub fn empty(config: &ScenarioConfig) -> Self {
        let t = config.horizon;
        Self {
            cables: config
                .facilities
                .iter()
                .map(|f| vec![vec![0; t]; f.evse_count])
                .collect(),
            energy: config
                .facilities
                .iter()
                .map(|f| vec![vec![0.0; t]; f.evse_count])
                .collect(),
            generation: vec![vec![0.0; t]; config.facilities.len()],
            out_of_service: vec![0; t],
            destination: vec![vec![0; t]; config.regions.len()],
        }
    }

    /// Adds the schedule's indicators to the counts without checking capacity.
    pub fn apply(&mut self, schedule: &Schedule) {
        self.shift(schedule, 1);
    }

    /// Removes a previously applied schedule.
    pub fn retract(&mut self, schedule: &Schedule) {
        self.shift(schedule, -1);
    }

    fn shift(&mut self, schedule: &Schedule, sign: i32) {
        let step = |v: &mut u32| {
            *v = v.checked_add_signed(sign).expect("ledger count underflow");
        };
        if let Some(plan) = &schedule.charge {
            for t in plan.dwell() {
                step(&mut self.cables[plan.facility][plan.evse][t]);
            }
            for (t, e) in plan.charging_slots() {
                self.energy[plan.facility][plan.evse][t] += f64::from(sign) * e;
                self.generation[plan.facility][t] += f64::from(sign) * e;
            }
        }
        for t in schedule.out_of_service() {
            step(&mut self.out_of_service[t]);
        }
        step(&mut self.destination[schedule.destination][schedule.arrival_slot]);
    }

    /// True when adding `schedule` keeps every count within capacity.
    pub fn fits(&self, schedule: &Schedule, config: &ScenarioConfig) -> bool {
        if let Some(plan) = &schedule.charge {
            let fac = &config.facilities[plan.facility];
            let cables = &self.cables[plan.facility][plan.evse];
            if plan.dwell().any(|t| cables[t] + 1 > fac.cables_per_evse) {
                return false;
            }
            for (t, e) in plan.charging_slots() {
                if self.energy[plan.facility][plan.evse][t] + e > fac.evse_energy_limit + ENERGY_EPS {
                    return false;
                }
                let supply = fac.solar.at(t) + fac.grid_limit.at(t);
                if self.generation[plan.facility][t] + e > supply + ENERGY_EPS {
                    return false;
                }
            }
        }
        if schedule
            .out_of_service()
            .any(|t| self.out_of_service[t] + 1 > config.out_of_service_cap.at(t))
        {
            return false;
        }
        let t = schedule.arrival_slot;
        self.destination[schedule.destination][t] < config.regions[schedule.destination].vehicle_limit.at(t)
    }

    /// Every entry above its capacity.
    pub fn capacity_violations(&self, config: &ScenarioConfig) -> Vec<CapacityViolation> {
        let mut out = Vec::new();
        for (f, fac) in config.facilities.iter().enumerate() {
            for m in 0..fac.evse_count {
                for t in 0..config.horizon {
                    let c = self.cables[f][m][t];
                    if c > fac.cables_per_evse {
                        out.push(CapacityViolation {
                            family: ResourceFamily::Cable,
                            owner: Some(f),
                            evse: Some(m),
                            slot: t,
                            allocated: f64::from(c),
                            capacity: f64::from(fac.cables_per_evse),
                        });
                    }
                    let e = self.energy[f][m][t];
                    if e > fac.evse_energy_limit + ENERGY_EPS || e < -ENERGY_EPS {
                        out.push(CapacityViolation {
                            family: ResourceFamily::Energy,
                            owner: Some(f),
                            evse: Some(m),
                            slot: t,
                            allocated: e,
                            capacity: fac.evse_energy_limit,
                        });
                    }
                }
            }
            for t in 0..config.horizon {
                let g = self.generation[f][t];
                let supply = fac.solar.at(t) + fac.grid_limit.at(t);
                if g > supply + ENERGY_EPS || g < -ENERGY_EPS {
                    out.push(CapacityViolation {
                        family: ResourceFamily::Generation,
                        owner: Some(f),
                        evse: None,
                        slot: t,
                        allocated: g,
                        capacity: supply,
                    });
                }
            }
        }
        for t in 0..config.horizon {
            let o = self.out_of_service[t];
            let cap = config.out_of_service_cap.at(t);
            if o > cap {
                out.push(CapacityViolation {
                    family: ResourceFamily::OutOfService,
                    owner: None,
                    evse: None,
                    slot: t,
                    allocated: f64::from(o),
                    capacity: f64::from(cap),
                });
            }
        }
        for (d, region) in config.regions.iter().enumerate() {
            for t in 0..config.horizon {
                let y = self.destination[d][t];
                let cap = region.vehicle_limit.at(t);
                if y > cap {
                    out.push(CapacityViolation {
                        family: ResourceFamily::Destination,
                        owner: Some(d),
                        evse: None,
                        slot: t,
                        allocated: f64::from(y),
                        capacity: f64::from(cap),
                    });
                }
            }
        }
        out
    }

    /// Largest `y / capacity` per family. Zero-capacity entries are skipped.
    pub fn peak_utilization(&self, config: &ScenarioConfig) -> Utilization {
        let mut peak = Utilization::default();
        let ratio = |y: f64, cap: f64| if cap > 0.0 { y / cap } else { 0.0 };
        for (f, fac) in config.facilities.iter().enumerate() {
            for m in 0..fac.evse_count {
                for t in 0..config.horizon {
                    peak.cable = peak
                        .cable
                        .max(ratio(f64::from(self.cables[f][m][t]), f64::from(fac.cables_per_evse)));
                    peak.energy = peak.energy.max(ratio(self.energy[f][m][t], fac.evse_energy_limit));
                }
            }
            for t in 0..config.horizon {
                let supply = fac.solar.at(t) + fac.grid_limit.at(t);
                peak.generation = peak.generation.max(ratio(self.generation[f][t], supply));
            }
        }
        for t in 0..config.horizon {
            peak.out_of_service = peak.out_of_service.max(ratio(
                f64::from(self.out_of_service[t]),
                f64::from(config.out_of_service_cap.at(t)),
            ));
            for (d, region) in config.regions.iter().enumerate() {
                peak.destination = peak.destination.max(ratio(
                    f64::from(self.destination[d][t]),
                    f64::from(region.vehicle_limit.at(t)),
                ));
            }
        }
        peak
    }

    /// `y_g[f][t]` equals the sum over EVSEs of `y_e[f][m][t]` everywhere.
    pub fn generation_consistent(&self) -> bool {
        self.generation.iter().zip(&self.energy).all(|(gen, evses)| {
            gen.iter().enumerate().all(|(t, &g)| {
                let sum: f64 = evses.iter().map(|e| e[t]).sum();
                (sum - g).abs() <= 1e-6
            })
        })
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Utilization {
    pub cable: f64,
    pub energy: f64,
    pub generation: f64,
    pub out_of_service: f64,
    pub destination: f64,
}

/// Rebuilds the ledger by summing the indicators of every committed
/// schedule in `decisions`. Over-capacity entries are reported, never clamped.
pub fn recompute_ledger(
    decisions: &[DispatchDecision],
    config: &ScenarioConfig,
) -> Result<ResourceLedger, LedgerError> {
    let ledger = ledger_of(decisions.iter().filter_map(|d| d.schedule.as_ref()), config);
    let violations = ledger.capacity_violations(config);
    if violations.is_empty() {
        Ok(ledger)
    } else {
        Err(LedgerError::CapacityExceeded(violations))
    }
}

/// Sums schedules into a fresh ledger without checking capacity.
pub fn ledger_of<'a>(schedules: impl IntoIterator<Item = &'a Schedule>, config: &ScenarioConfig) -> ResourceLedger {
    let mut ledger = ResourceLedger::empty(config);
    for schedule in schedules {
        ledger.apply(schedule);
    }
    ledger
}

use crate::domain::{ResourceLedger, Schedule};
use crate::model::SystemModel;

use super::{price_cable, price_destination, price_energy, price_generation, price_out_of_service};

/// Every dual price implied by one ledger state. Built at the start of a
/// dispatch and dropped with it; the ledger stays the only source of truth.
#[derive(Debug, Clone)]
pub struct PriceSnapshot {
    pub cable: Vec<Vec<Vec<f64>>>,
    pub energy: Vec<Vec<Vec<f64>>>,
    pub generation: Vec<Vec<f64>>,
    pub destination: Vec<Vec<f64>>,
    pub out_of_service: Vec<f64>,
    /// `oos_prefix[t]` is the sum of out-of-service prices over `0..t`.
    oos_prefix: Vec<f64>,
}

impl PriceSnapshot {
    pub fn new(model: &SystemModel, ledger: &ResourceLedger) -> Self {
        let config = &model.config;
        let (bounds, psi) = (&model.bounds, model.psi);
        let horizon = config.horizon;
        // Ledgers never exceed capacity; clamping only guards rounding.
        let clamp = |y: f64, cap: f64| y.clamp(0.0, cap.max(0.0));

        let mut cable = Vec::with_capacity(config.facilities.len());
        let mut energy = Vec::with_capacity(config.facilities.len());
        let mut generation = Vec::with_capacity(config.facilities.len());
        for (f, fac) in config.facilities.iter().enumerate() {
            let cables = f64::from(fac.cables_per_evse);
            cable.push(
                (0..fac.evse_count)
                    .map(|m| {
                        (0..horizon)
                            .map(|t| {
                                let y = clamp(f64::from(ledger.cables[f][m][t]), cables);
                                price_cable(y, cables, bounds, psi).unwrap_or(bounds.cable.upper)
                            })
                            .collect()
                    })
                    .collect(),
            );
            energy.push(
                (0..fac.evse_count)
                    .map(|m| {
                        (0..horizon)
                            .map(|t| {
                                let y = clamp(ledger.energy[f][m][t], fac.evse_energy_limit);
                                price_energy(y, fac.evse_energy_limit, bounds, psi).unwrap_or(bounds.energy.upper)
                            })
                            .collect()
                    })
                    .collect(),
            );
            generation.push(
                (0..horizon)
                    .map(|t| {
                        let (delta, mu, pi) = (fac.solar.at(t), fac.grid_limit.at(t), fac.grid_price.at(t));
                        let y = clamp(ledger.generation[f][t], delta + mu);
                        price_generation(y, delta, mu, pi, bounds, psi).unwrap_or(bounds.generation.upper)
                    })
                    .collect(),
            );
        }
        let destination = config
            .regions
            .iter()
            .enumerate()
            .map(|(d, region)| {
                (0..horizon)
                    .map(|t| {
                        let omega = f64::from(region.vehicle_limit.at(t));
                        let y = clamp(f64::from(ledger.destination[d][t]), omega);
                        price_destination(y, omega, bounds, psi).unwrap_or(bounds.destination.upper)
                    })
                    .collect()
            })
            .collect();
        let out_of_service: Vec<f64> = (0..horizon)
            .map(|t| {
                let cap = f64::from(config.out_of_service_cap.at(t));
                let y = clamp(f64::from(ledger.out_of_service[t]), cap);
                price_out_of_service(y, cap, config.out_of_service_penalty.at(t), bounds, psi)
                    .unwrap_or(bounds.out_of_service.upper)
            })
            .collect();
        let mut oos_prefix = Vec::with_capacity(horizon + 1);
        oos_prefix.push(0.0);
        let mut acc = 0.0;
        for p in &out_of_service {
            acc += p;
            oos_prefix.push(acc);
        }
        Self {
            cable,
            energy,
            generation,
            destination,
            out_of_service,
            oos_prefix,
        }
    }

    /// Sum of out-of-service prices over the inclusive slot range.
    pub fn out_of_service_range(&self, from: usize, to: usize) -> f64 {
        self.oos_prefix[to + 1] - self.oos_prefix[from]
    }

    /// What `schedule` pays at these prices, per family.
    pub fn charge_for(&self, schedule: &Schedule) -> crate::domain::PriceBreakdown {
        let mut out = crate::domain::PriceBreakdown {
            destination: self.destination[schedule.destination][schedule.arrival_slot],
            out_of_service: self.out_of_service[schedule.start_slot..=schedule.arrival_slot]
                .iter()
                .sum(),
            ..Default::default()
        };
        if let Some(plan) = &schedule.charge {
            out.cable = plan.dwell().map(|t| self.cable[plan.facility][plan.evse][t]).sum();
            for (t, e) in plan.charging_slots() {
                out.energy += e * self.energy[plan.facility][plan.evse][t];
                out.generation += e * self.generation[plan.facility][t];
            }
        }
        out
    }

    /// Utility of `schedule`: its value minus every price it pays.
    pub fn utility(&self, schedule: &Schedule) -> f64 {
        schedule.value - self.charge_for(schedule).total()
    }
}

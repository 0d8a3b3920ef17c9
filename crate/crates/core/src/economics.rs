//! Primal cost functions, their conjugates, and the primal and dual
//! objective evaluators.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{DispatchDecision, ResourceLedger, ScenarioConfig};
use crate::pricing::{self, PriceBounds, PricingError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EconomicsError {
    #[error("{name} must be non-negative, got {value}")]
    Negative { name: &'static str, value: f64 },
    #[error(transparent)]
    Pricing(#[from] PricingError),
}

/// A cost that is either a finite amount of money or outside the feasible
/// region of its constraint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CostValue {
    Finite(f64),
    Infeasible,
}

impl CostValue {
    pub fn finite(self) -> Option<f64> {
        match self {
            CostValue::Finite(v) => Some(v),
            CostValue::Infeasible => None,
        }
    }

    pub fn is_infeasible(self) -> bool {
        matches!(self, CostValue::Infeasible)
    }
}

impl std::ops::Add for CostValue {
    type Output = CostValue;

    fn add(self, rhs: CostValue) -> CostValue {
        match (self, rhs) {
            (CostValue::Finite(a), CostValue::Finite(b)) => CostValue::Finite(a + b),
            _ => CostValue::Infeasible,
        }
    }
}

fn non_negative(name: &'static str, value: f64) -> Result<(), EconomicsError> {
    if value >= 0.0 {
        Ok(())
    } else {
        Err(EconomicsError::Negative { name, value })
    }
}

/// Facility procurement cost: solar is free, grid energy costs `pi` per
/// unit up to `mu`, anything beyond is infeasible.
pub fn generation_cost(y: f64, delta: f64, mu: f64, pi: f64) -> Result<CostValue, EconomicsError> {
    non_negative("y_g", y)?;
    Ok(if y <= delta {
        CostValue::Finite(0.0)
    } else if y <= delta + mu {
        CostValue::Finite(pi * (y - delta))
    } else {
        CostValue::Infeasible
    })
}

pub fn out_of_service_cost(y: f64, phi: f64, cap: f64) -> Result<CostValue, EconomicsError> {
    non_negative("y_o", y)?;
    Ok(if y <= cap {
        CostValue::Finite(phi * y)
    } else {
        CostValue::Infeasible
    })
}

pub fn conj_cable(p: f64, cables: f64) -> Result<f64, EconomicsError> {
    non_negative("p_c", p)?;
    Ok(p * cables)
}

pub fn conj_energy(p: f64, energy_limit: f64) -> Result<f64, EconomicsError> {
    non_negative("p_e", p)?;
    Ok(p * energy_limit)
}

pub fn conj_generation(p: f64, delta: f64, mu: f64, pi: f64) -> Result<f64, EconomicsError> {
    non_negative("p_g", p)?;
    Ok(if p < pi { delta * p } else { (delta + mu) * p - mu * pi })
}

pub fn conj_destination(p: f64, omega: f64) -> Result<f64, EconomicsError> {
    non_negative("p_d", p)?;
    Ok(p * omega)
}

pub fn conj_out_of_service(p: f64, phi: f64, cap: f64) -> Result<f64, EconomicsError> {
    non_negative("p_o", p)?;
    Ok(if p < phi { 0.0 } else { (p - phi) * cap })
}

/// Total generation cost over every facility and slot of `ledger`.
pub fn total_generation_cost(ledger: &ResourceLedger, config: &ScenarioConfig) -> CostValue {
    let mut total = CostValue::Finite(0.0);
    for (f, fac) in config.facilities.iter().enumerate() {
        for t in 0..config.horizon {
            let y = ledger.generation[f][t].max(0.0);
            total = total
                + generation_cost(y, fac.solar.at(t), fac.grid_limit.at(t), fac.grid_price.at(t))
                    .unwrap_or(CostValue::Infeasible);
        }
    }
    total
}

pub fn total_out_of_service_cost(ledger: &ResourceLedger, config: &ScenarioConfig) -> CostValue {
    let mut total = CostValue::Finite(0.0);
    for t in 0..config.horizon {
        total = total
            + out_of_service_cost(
                f64::from(ledger.out_of_service[t]),
                config.out_of_service_penalty.at(t),
                f64::from(config.out_of_service_cap.at(t)),
            )
            .unwrap_or(CostValue::Infeasible);
    }
    total
}

/// Dispatcher welfare: schedule values minus procurement and
/// out-of-service costs. Destination, cable and energy limits have no cost
/// inside their capacity, so a ledger that breaches them is infeasible.
pub fn primal_objective(decisions: &[DispatchDecision], ledger: &ResourceLedger, config: &ScenarioConfig) -> CostValue {
    let value: f64 = decisions
        .iter()
        .filter_map(|d| d.schedule.as_ref())
        .map(|s| s.value)
        .sum();
    let hard_limits_hold = ledger.capacity_violations(config).iter().all(|v| {
        matches!(
            v.family,
            crate::domain::ResourceFamily::Generation | crate::domain::ResourceFamily::OutOfService
        )
    });
    if !hard_limits_hold {
        return CostValue::Infeasible;
    }
    match (
        total_generation_cost(ledger, config),
        total_out_of_service_cost(ledger, config),
    ) {
        (CostValue::Finite(g), CostValue::Finite(o)) => CostValue::Finite(value - g - o),
        _ => CostValue::Infeasible,
    }
}

/// Sum of every conjugate term at the prices implied by `ledger`.
pub fn conjugate_sum(
    ledger: &ResourceLedger,
    config: &ScenarioConfig,
    bounds: &PriceBounds,
    psi: u64,
) -> Result<f64, EconomicsError> {
    let mut total = 0.0;
    for (d, region) in config.regions.iter().enumerate() {
        for t in 0..config.horizon {
            let omega = f64::from(region.vehicle_limit.at(t));
            let p = pricing::price_destination(f64::from(ledger.destination[d][t]), omega, bounds, psi)?;
            total += conj_destination(p, omega)?;
        }
    }
    for (f, fac) in config.facilities.iter().enumerate() {
        let cables = f64::from(fac.cables_per_evse);
        for t in 0..config.horizon {
            let (delta, mu, pi) = (fac.solar.at(t), fac.grid_limit.at(t), fac.grid_price.at(t));
            let p = pricing::price_generation(ledger.generation[f][t], delta, mu, pi, bounds, psi)?;
            total += conj_generation(p, delta, mu, pi)?;
            for m in 0..fac.evse_count {
                let pc = pricing::price_cable(f64::from(ledger.cables[f][m][t]), cables, bounds, psi)?;
                let pe = pricing::price_energy(ledger.energy[f][m][t], fac.evse_energy_limit, bounds, psi)?;
                total += conj_cable(pc, cables)? + conj_energy(pe, fac.evse_energy_limit)?;
            }
        }
    }
    for t in 0..config.horizon {
        let (phi, cap) = (
            config.out_of_service_penalty.at(t),
            f64::from(config.out_of_service_cap.at(t)),
        );
        let p = pricing::price_out_of_service(f64::from(ledger.out_of_service[t]), cap, phi, bounds, psi)?;
        total += conj_out_of_service(p, phi, cap)?;
    }
    Ok(total)
}

/// Dual objective: the utilities plus all conjugate terms evaluated at the
/// prices the ledger implies.
pub fn dual_objective(
    utilities: &[f64],
    ledger: &ResourceLedger,
    config: &ScenarioConfig,
    bounds: &PriceBounds,
    psi: u64,
) -> Result<f64, EconomicsError> {
    for &u in utilities {
        non_negative("u_j", u)?;
    }
    Ok(utilities.iter().sum::<f64>() + conjugate_sum(ledger, config, bounds, psi)?)
}

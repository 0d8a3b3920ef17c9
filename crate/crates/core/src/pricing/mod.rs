//! Dual price update functions, price bounds, competitive-ratio
//! parameters, and the allocation-payment verifier.

mod bounds;
mod dapr;
mod snapshot;

use thiserror::Error;

use crate::domain::ScenarioConfig;

pub use bounds::{alphas, estimate_bounds, Alphas, Bound, PriceBounds};
pub use dapr::{
    family_params, verify_dapr, verify_dapr_on_grid, verify_family, verify_model, DaprParams, DaprReport,
    DAPR_TOLERANCE,
};
pub use snapshot::PriceSnapshot;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PricingError {
    #[error("allocation {y} exceeds capacity {capacity}")]
    OverCapacity { y: f64, capacity: f64 },
    #[error("allocation must be non-negative, got {0}")]
    NegativeAllocation(f64),
    #[error("invalid bounds: {0}")]
    InvalidBounds(String),
    #[error("cannot estimate bounds: {0}")]
    Estimate(String),
    #[error("grid increment [{from}, {to}] straddles the branch point {at}")]
    StraddlesBranch { from: f64, to: f64, at: f64 },
    #[error("grid needs at least {min} points, got {got}")]
    GridTooSmall { min: usize, got: usize },
}

/// Total number of shared resources: `2 * sum(M_f) + D + F + 1`.
pub fn psi(config: &ScenarioConfig) -> u64 {
    let evses: usize = config.facilities.iter().map(|f| f.evse_count).sum();
    (2 * evses + config.regions.len() + config.facilities.len() + 1) as u64
}

fn check_allocation(y: f64, capacity: f64) -> Result<(), PricingError> {
    if y < 0.0 {
        return Err(PricingError::NegativeAllocation(y));
    }
    if y > capacity * (1.0 + 1e-12) + 1e-12 {
        return Err(PricingError::OverCapacity { y, capacity });
    }
    Ok(())
}

/// `(L/2Ψ)(2ΨU/L)^{y/cap}` shifted up by `floor`. A zero capacity is
/// permanently saturated and reads `upper`.
fn exponential(y: f64, capacity: f64, bound: Bound, floor: f64, psi: u64) -> f64 {
    if capacity <= 0.0 {
        return bound.upper;
    }
    let two_psi = 2.0 * psi as f64;
    let (lo, hi) = (bound.lower - floor, bound.upper - floor);
    (lo / two_psi) * (two_psi * hi / lo).powf(y / capacity) + floor
}

pub fn price_cable(y: f64, cables: f64, bounds: &PriceBounds, psi: u64) -> Result<f64, PricingError> {
    check_allocation(y, cables)?;
    Ok(exponential(y, cables, bounds.cable, 0.0, psi))
}

pub fn price_energy(y: f64, energy_limit: f64, bounds: &PriceBounds, psi: u64) -> Result<f64, PricingError> {
    check_allocation(y, energy_limit)?;
    Ok(exponential(y, energy_limit, bounds.energy, 0.0, psi))
}

pub fn price_destination(y: f64, omega: f64, bounds: &PriceBounds, psi: u64) -> Result<f64, PricingError> {
    check_allocation(y, omega)?;
    Ok(exponential(y, omega, bounds.destination, 0.0, psi))
}

pub fn price_out_of_service(y: f64, cap: f64, phi: f64, bounds: &PriceBounds, psi: u64) -> Result<f64, PricingError> {
    check_allocation(y, cap)?;
    Ok(exponential(y, cap, bounds.out_of_service, phi, psi))
}

/// Two-branch generation price. Below the solar level it climbs from
/// `L_g/2Ψ` toward `pi`; from the solar level on it climbs from just above
/// `pi` to `U_g` at `delta + mu`. With no solar only the second branch exists.
pub fn price_generation(
    y: f64,
    delta: f64,
    mu: f64,
    pi: f64,
    bounds: &PriceBounds,
    psi: u64,
) -> Result<f64, PricingError> {
    check_allocation(y, delta + mu)?;
    Ok(if delta > 0.0 && y < delta {
        generation_solar_branch(y, delta, pi, bounds.generation.lower, psi)
    } else {
        exponential(y, delta + mu, bounds.generation, pi, psi)
    })
}

/// First generation branch, also valid at `y = delta` where it equals `pi`.
pub fn generation_solar_branch(y: f64, delta: f64, pi: f64, lower: f64, psi: u64) -> f64 {
    let two_psi = 2.0 * psi as f64;
    (lower / two_psi) * (two_psi * pi / lower).powf(y / delta)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bounds(lower: f64, upper: f64) -> PriceBounds {
        let b = Bound { lower, upper };
        PriceBounds {
            cable: b,
            energy: b,
            generation: b,
            destination: b,
            out_of_service: b,
        }
    }

    #[test]
    fn cable_price_anchors() {
        let b = bounds(0.1, 15.0);
        let base = price_cable(0.0, 4.0, &b, 215).unwrap();
        assert!((base - 0.1 / 430.0).abs() < 1e-15);
        assert!((price_cable(4.0, 4.0, &b, 215).unwrap() - 15.0).abs() < 15.0 * 1e-12);
        let half = price_cable(2.0, 4.0, &b, 215).unwrap();
        // geometric mean of the endpoint prices
        let oracle = (0.1f64 / 430.0 * 15.0).sqrt();
        assert!((half - oracle).abs() < 1e-12);
        assert!((half - 0.05906).abs() < 5e-6);
        assert!(price_cable(5.0, 4.0, &b, 215).is_err());
    }

    #[test]
    fn generation_branches_meet_pi_and_upper() {
        let b = bounds(0.25, 20.0);
        let at_delta = generation_solar_branch(10.0, 10.0, 0.2, 0.25, 215);
        assert!((at_delta - 0.2).abs() < 1e-12);
        let top = price_generation(30.0, 10.0, 20.0, 0.2, &b, 215).unwrap();
        assert!((top - 20.0).abs() < 1e-9);
        let base = price_generation(0.0, 10.0, 20.0, 0.2, &b, 215).unwrap();
        assert!((base - 0.25 / 430.0).abs() < 1e-15);
        // no solar: second branch from zero
        let dark = price_generation(0.0, 0.0, 20.0, 0.2, &b, 215).unwrap();
        assert!((dark - (0.05 / 430.0 + 0.2)).abs() < 1e-12);
    }

    #[test]
    fn out_of_service_price_anchors() {
        let b = bounds(1.0, 25.0);
        let base = price_out_of_service(0.0, 100.0, 0.5, &b, 215).unwrap();
        assert!((base - (0.5 / 430.0 + 0.5)).abs() < 1e-12);
        assert!((base - 0.50116).abs() < 1e-5);
        let top = price_out_of_service(100.0, 100.0, 0.5, &b, 215).unwrap();
        assert!((top - 25.0).abs() < 1e-9);
        // zero penalty collapses to the plain exponential form
        let plain = price_out_of_service(30.0, 100.0, 0.0, &b, 215).unwrap();
        let cable_form = price_cable(30.0, 100.0, &b, 215).unwrap();
        assert!((plain - cable_form).abs() < 1e-12);
    }

    #[test]
    fn zero_capacity_is_saturated() {
        let b = bounds(0.1, 15.0);
        assert_eq!(price_destination(0.0, 0.0, &b, 10).unwrap(), 15.0);
    }
}

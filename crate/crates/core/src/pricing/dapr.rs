use serde::{Deserialize, Serialize};

use super::{exponential, generation_solar_branch, Bound, PricingError};
use crate::domain::ResourceFamily;
use crate::model::SystemModel;

/// Parameters of one resource entry for the allocation-payment check.
///
/// `capacity` is `C_f`, `E_f`, `Ω`, `I` or `δ + μ`. `solar` is `δ` and only
/// matters for generation. `floor` is `π` for generation, `φ` for
/// out-of-service and 0 otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DaprParams {
    pub capacity: f64,
    pub bound: Bound,
    pub psi: u64,
    #[serde(default)]
    pub solar: f64,
    #[serde(default)]
    pub floor: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DaprReport {
    pub family: ResourceFamily,
    pub alpha: f64,
    /// Increments checked.
    pub increments: usize,
    /// Smallest `lhs - rhs` seen.
    pub worst_margin: f64,
    /// Allocation at the left end of the worst increment.
    pub worst_at: f64,
    pub passed: bool,
}

impl DaprReport {
    fn merge(mut self, other: DaprReport) -> DaprReport {
        if other.worst_margin < self.worst_margin {
            self.worst_margin = other.worst_margin;
            self.worst_at = other.worst_at;
        }
        self.increments += other.increments;
        self.passed &= other.passed;
        self
    }
}

pub const DAPR_TOLERANCE: f64 = 1e-9;

/// Marginal cost `f'(y)`, constant on each branch.
fn cost_slope(family: ResourceFamily, params: &DaprParams, on_solar: bool) -> f64 {
    match family {
        ResourceFamily::Generation if !on_solar => params.floor,
        ResourceFamily::OutOfService => params.floor,
        _ => 0.0,
    }
}

/// Derivative of the conjugate at price `p`.
fn conjugate_slope(family: ResourceFamily, params: &DaprParams, p: f64) -> f64 {
    match family {
        ResourceFamily::Generation => {
            if p < params.floor {
                params.solar
            } else {
                params.capacity
            }
        }
        ResourceFamily::OutOfService => {
            if p < params.floor {
                0.0
            } else {
                params.capacity
            }
        }
        _ => params.capacity,
    }
}

fn price(family: ResourceFamily, params: &DaprParams, y: f64, on_solar: bool) -> f64 {
    match family {
        ResourceFamily::Generation if on_solar => {
            generation_solar_branch(y, params.solar, params.floor, params.bound.lower, params.psi)
        }
        ResourceFamily::Generation | ResourceFamily::OutOfService => {
            exponential(y, params.capacity, params.bound, params.floor, params.psi)
        }
        _ => exponential(y, params.capacity, params.bound, 0.0, params.psi),
    }
}

/// Checks the allocation-payment inequality on every increment of `ys`.
///
/// The payment side integrates `p - f'` over the increment by the trapezoid
/// rule; the allocation side is `f*'(p(y)) Δp / α` with the conjugate slope
/// taken at the left end. Increments that cross the solar level of a
/// generation entry are rejected.
pub fn verify_dapr_on_grid(
    family: ResourceFamily,
    params: &DaprParams,
    alpha: f64,
    ys: &[f64],
) -> Result<DaprReport, PricingError> {
    let solar = params.solar;
    let mut report = DaprReport {
        family,
        alpha,
        increments: 0,
        worst_margin: f64::INFINITY,
        worst_at: 0.0,
        passed: true,
    };
    for pair in ys.windows(2) {
        let (y0, y1) = (pair[0], pair[1]);
        let split = family == ResourceFamily::Generation && solar > 0.0;
        if split && y0 < solar && y1 > solar {
            return Err(PricingError::StraddlesBranch {
                from: y0,
                to: y1,
                at: solar,
            });
        }
        let on_solar = split && y0 < solar;
        let (p0, p1) = (price(family, params, y0, on_solar), price(family, params, y1, on_solar));
        let dy = y1 - y0;
        let lhs = dy * (0.5 * (p0 + p1) - cost_slope(family, params, on_solar));
        let rhs = conjugate_slope(family, params, p0) * (p1 - p0) / alpha;
        let margin = lhs - rhs;
        if margin < report.worst_margin {
            report.worst_margin = margin;
            report.worst_at = y0;
        }
        report.increments += 1;
    }
    report.passed = report.worst_margin >= -DAPR_TOLERANCE;
    Ok(report)
}

fn uniform(from: f64, to: f64, points: usize) -> Vec<f64> {
    let step = (to - from) / (points - 1) as f64;
    let mut ys: Vec<f64> = (0..points).map(|i| from + step * i as f64).collect();
    ys[points - 1] = to;
    ys
}

/// Uniform-grid check over the whole domain. Generation grids are split at
/// the solar level with `grid_points` points on each branch.
pub fn verify_dapr(
    family: ResourceFamily,
    params: &DaprParams,
    alpha: f64,
    grid_points: usize,
) -> Result<DaprReport, PricingError> {
    const MIN_POINTS: usize = 100;
    if grid_points < MIN_POINTS {
        return Err(PricingError::GridTooSmall {
            min: MIN_POINTS,
            got: grid_points,
        });
    }
    let cap = params.capacity;
    if family == ResourceFamily::Generation && params.solar > 0.0 {
        let mut report = verify_dapr_on_grid(family, params, alpha, &uniform(0.0, params.solar, grid_points))?;
        if cap > params.solar {
            let upper = verify_dapr_on_grid(family, params, alpha, &uniform(params.solar, cap, grid_points))?;
            report = report.merge(upper);
        }
        Ok(report)
    } else {
        verify_dapr_on_grid(family, params, alpha, &uniform(0.0, cap, grid_points))
    }
}

/// Every distinct parameter set of `family` appearing in the model.
pub fn family_params(model: &SystemModel, family: ResourceFamily) -> Vec<DaprParams> {
    let config = &model.config;
    let bound = model.bounds.get(family);
    let make = |capacity: f64, solar: f64, floor: f64| DaprParams {
        capacity,
        bound,
        psi: model.psi,
        solar,
        floor,
    };
    let mut out: Vec<DaprParams> = match family {
        ResourceFamily::Cable => config
            .facilities
            .iter()
            .map(|f| make(f64::from(f.cables_per_evse), 0.0, 0.0))
            .collect(),
        ResourceFamily::Energy => config
            .facilities
            .iter()
            .map(|f| make(f.evse_energy_limit, 0.0, 0.0))
            .collect(),
        ResourceFamily::Destination => config
            .regions
            .iter()
            .flat_map(|r| r.vehicle_limit.values(config.horizon))
            .filter(|&omega| omega > 0)
            .map(|omega| make(f64::from(omega), 0.0, 0.0))
            .collect(),
        ResourceFamily::Generation => config
            .facilities
            .iter()
            .flat_map(|f| (0..config.horizon).map(move |t| (f.solar.at(t), f.grid_limit.at(t), f.grid_price.at(t))))
            .filter(|&(delta, mu, _)| delta + mu > 0.0)
            .map(|(delta, mu, pi)| make(delta + mu, delta, pi))
            .collect(),
        ResourceFamily::OutOfService => (0..config.horizon)
            .map(|t| {
                make(
                    f64::from(config.out_of_service_cap.at(t)),
                    0.0,
                    config.out_of_service_penalty.at(t),
                )
            })
            .collect(),
    };
    out.sort_by(|a, b| {
        a.capacity
            .total_cmp(&b.capacity)
            .then(a.solar.total_cmp(&b.solar))
            .then(a.floor.total_cmp(&b.floor))
    });
    out.dedup();
    out
}

/// Worst case of `family` over every parameter set in the model.
pub fn verify_family(
    model: &SystemModel,
    family: ResourceFamily,
    alpha: f64,
    grid_points: usize,
) -> Result<Option<DaprReport>, PricingError> {
    let mut merged: Option<DaprReport> = None;
    for params in family_params(model, family) {
        let report = verify_dapr(family, &params, alpha, grid_points)?;
        merged = Some(match merged {
            Some(prev) => prev.merge(report),
            None => report,
        });
    }
    Ok(merged)
}

/// All five families, each against its own competitive ratio.
pub fn verify_model(model: &SystemModel, grid_points: usize) -> Result<Vec<DaprReport>, PricingError> {
    let mut out = Vec::new();
    for family in ResourceFamily::ALL {
        if let Some(report) = verify_family(model, family, model.alphas.get(family), grid_points)? {
            out.push(report);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cable_params() -> DaprParams {
        DaprParams {
            capacity: 4.0,
            bound: Bound {
                lower: 0.1,
                upper: 15.0,
            },
            psi: 215,
            solar: 0.0,
            floor: 0.0,
        }
    }

    #[test]
    fn cable_passes_with_its_alpha_and_fails_halved() {
        let params = cable_params();
        let alpha = (64500.0f64).ln();
        assert!((alpha - 11.0745).abs() < 1e-4);
        let ok = verify_dapr(ResourceFamily::Cable, &params, alpha, 10_000).unwrap();
        assert!(ok.passed, "{ok:?}");
        assert!(ok.worst_margin >= 0.0);
        let bad = verify_dapr(ResourceFamily::Cable, &params, alpha / 2.0, 10_000).unwrap();
        assert!(!bad.passed);
    }

    #[test]
    fn generation_split_passes_both_branches() {
        let params = DaprParams {
            capacity: 30.0,
            bound: Bound {
                lower: 0.25,
                upper: 20.0,
            },
            psi: 215,
            solar: 10.0,
            floor: 0.2,
        };
        let alpha = (430.0f64 * (20.0 - 0.2) / (0.25 - 0.2)).ln();
        let report = verify_dapr(ResourceFamily::Generation, &params, alpha, 10_000).unwrap();
        assert!(report.passed, "{report:?}");
        assert_eq!(report.increments, 2 * 9_999);
    }

    #[test]
    fn straddling_increment_is_rejected() {
        let params = DaprParams {
            capacity: 30.0,
            bound: Bound {
                lower: 0.25,
                upper: 20.0,
            },
            psi: 215,
            solar: 10.0,
            floor: 0.2,
        };
        let err = verify_dapr_on_grid(ResourceFamily::Generation, &params, 10.0, &[9.0, 11.0]).unwrap_err();
        assert!(matches!(err, PricingError::StraddlesBranch { .. }));
    }

    #[test]
    fn small_grids_are_refused() {
        assert!(verify_dapr(ResourceFamily::Cable, &cable_params(), 10.0, 10).is_err());
    }
}

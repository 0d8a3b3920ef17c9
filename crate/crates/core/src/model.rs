use serde::{Deserialize, Serialize};

use crate::domain::{HopTable, ScenarioConfig};
use crate::error::{Error, Result};
use crate::pricing::{self, Alphas, PriceBounds};

/// A validated config together with everything derived from it once:
/// hop distances, `Ψ`, price bounds and competitive ratios.
#[derive(Debug, Clone)]
pub struct SystemModel {
    pub config: ScenarioConfig,
    pub hops: HopTable,
    pub psi: u64,
    pub bounds: PriceBounds,
    pub alphas: Alphas,
}

/// The derived pricing parameters, as reported by the service.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSummary {
    pub psi: u64,
    pub bounds: PriceBounds,
    pub alphas: Alphas,
}

impl SystemModel {
    /// Validates `config` and derives the pricing parameters. Explicit
    /// bounds in the config win over estimated ones.
    pub fn new(config: ScenarioConfig) -> Result<Self> {
        let violations = config.validate();
        if !violations.is_empty() {
            return Err(Error::InvalidConfig(violations));
        }
        let psi = pricing::psi(&config);
        let bounds = match config.bounds {
            Some(bounds) => bounds,
            None => {
                let bounds = pricing::estimate_bounds(&config)?;
                let problems = bounds.check(&config, psi);
                if !problems.is_empty() {
                    return Err(pricing::PricingError::InvalidBounds(problems.join("; ")).into());
                }
                bounds
            }
        };
        let alphas = pricing::alphas(&bounds, psi, &config);
        let hops = HopTable::new(&config);
        Ok(Self {
            config,
            hops,
            psi,
            bounds,
            alphas,
        })
    }

    pub fn summary(&self) -> ModelSummary {
        ModelSummary {
            psi: self.psi,
            bounds: self.bounds,
            alphas: self.alphas,
        }
    }
}

use serde::{Deserialize, Serialize};

use super::ledger::Utilization;
use super::schedule::Schedule;
use crate::pricing::{Alphas, PriceBounds};

/// Prices paid by a chosen schedule, one entry per resource family.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct PriceBreakdown {
    pub destination: f64,
    pub out_of_service: f64,
    pub cable: f64,
    pub energy: f64,
    pub generation: f64,
}

impl PriceBreakdown {
    pub fn total(&self) -> f64 {
        self.destination + self.out_of_service + self.cable + self.energy + self.generation
    }
}

/// Outcome of one session. `schedule == None` is the depot action.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DispatchDecision {
    pub session_id: u64,
    pub start_slot: usize,
    pub origin: usize,
    pub schedule: Option<Schedule>,
    /// `u_j` for the online dispatcher; always 0 for threshold baselines.
    pub utility: f64,
    /// Change in the primal objective caused by this decision.
    pub welfare_delta: f64,
    pub prices: PriceBreakdown,
    /// Candidate schedules considered.
    pub candidates: usize,
}

impl DispatchDecision {
    pub fn depot(session_id: u64, start_slot: usize, origin: usize, candidates: usize) -> Self {
        Self {
            session_id,
            start_slot,
            origin,
            schedule: None,
            utility: 0.0,
            welfare_delta: 0.0,
            prices: PriceBreakdown::default(),
            candidates,
        }
    }

    pub fn is_depot(&self) -> bool {
        self.schedule.is_none()
    }
}

/// Everything a run produces: decision log, objective trajectories and the
/// pricing parameters used.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    /// `online`, `baseline-25`, `baseline-50` or `baseline-75`.
    pub algorithm: String,
    pub instance_hash: String,
    pub decisions: Vec<DispatchDecision>,
    /// `P^0..P^J`.
    pub primal: Vec<f64>,
    /// `D^0..D^J`, offset so that `D^0 = 0`. Empty for baselines, which
    /// maintain no dual variables.
    pub dual: Vec<f64>,
    /// Sum of all conjugate terms at the empty-ledger prices. The full dual
    /// objective after session `j` is `dual_base + dual[j]`.
    pub dual_base: f64,
    pub utility_sum: f64,
    pub welfare: f64,
    pub accepted: usize,
    pub depot: usize,
    pub peak_utilization: Utilization,
    pub psi: u64,
    pub bounds: PriceBounds,
    pub alphas: Alphas,
}

impl RunReport {
    pub fn sessions(&self) -> usize {
        self.decisions.len()
    }

    /// Full dual objective at the end of the run.
    pub fn final_dual(&self) -> Option<f64> {
        self.dual.last().map(|d| d + self.dual_base)
    }
}

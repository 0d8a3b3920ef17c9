use serde::{Deserialize, Serialize};

/// A between-ride session: a vehicle has just dropped off a passenger and
/// needs a schedule. Field names follow the session-trace CSV columns.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Session {
    pub id: u64,
    /// Drop-off slot, zero-based.
    #[serde(rename = "t_minus")]
    pub start_slot: usize,
    #[serde(rename = "origin_region")]
    pub origin: usize,
    /// State of charge as a fraction of battery capacity.
    pub soc: f64,
}

impl Session {
    pub fn new(id: u64, start_slot: usize, origin: usize, soc: f64) -> Self {
        Self {
            id,
            start_slot,
            origin,
            soc,
        }
    }
}

//! Shared data types, instance validation and the region travel model.

mod config;
mod graph;
mod ledger;
mod report;
mod schedule;
mod series;
mod session;

pub(crate) use config::is_multiple;
pub use config::{validate, Facility, Region, ScenarioConfig, Violation};
pub use graph::{hops, GraphError, HopTable};
pub use ledger::{
    ledger_of, recompute_ledger, CapacityViolation, LedgerError, ResourceFamily, ResourceLedger, Utilization,
};
pub use report::{DispatchDecision, PriceBreakdown, RunReport};
pub(crate) use schedule::schedule_value_of;
pub use schedule::{ChargePlan, Schedule};
pub use series::Series;
pub use session::Session;

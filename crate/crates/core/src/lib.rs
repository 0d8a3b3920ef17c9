//! Online primal-dual charge scheduling for autonomous-mobility-on-demand
//! electric fleets.
//!
//! Between-ride sessions arrive one at a time. For each session the
//! [`dispatcher`] enumerates candidate charging/pickup schedules, prices
//! every shared resource with an exponential dual-price update function
//! ([`pricing`]), and either commits the schedule with the largest positive
//! utility or sends the vehicle to the depot. [`offline`] provides the
//! clairvoyant references (capacity-relaxed upper bound and an exhaustive
//! solver for tiny instances), [`baselines`] the threshold charging
//! policies, and [`harness`] scenario generation, trace ingestion and
//! reporting.

pub mod api;
pub mod baselines;
pub mod dispatcher;
pub mod domain;
pub mod economics;
pub mod error;
pub mod harness;
pub mod model;
pub mod offline;
pub mod pricing;
pub mod schedules;
pub mod tolerance;

pub use error::Error;
pub use model::SystemModel;

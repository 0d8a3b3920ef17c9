//! Numeric tolerances. Money is carried as `f64` dollars throughout.

/// Absolute tolerance for comparisons between money amounts.
pub const MONEY_EPS: f64 = 1e-9;

/// Absolute tolerance for energy bookkeeping (kWh).
pub const ENERGY_EPS: f64 = 1e-9;

/// Relative margin by which `L_g` and `L_o` are lifted above the largest
/// grid price and out-of-service penalty when bounds are estimated.
pub const BOUND_CLAMP_MARGIN: f64 = 1e-6;

/// Relative tolerance used when checking that prices hit their upper bound
/// exactly at capacity.
pub const BOUNDARY_REL_EPS: f64 = 1e-9;

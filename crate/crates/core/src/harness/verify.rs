use serde::{Deserialize, Serialize};

use crate::dispatcher::run_online;
use crate::domain::{recompute_ledger, ResourceFamily, RunReport, Session};
use crate::economics::{self, CostValue};
use crate::error::{Error, Result};
use crate::model::SystemModel;
use crate::pricing::{self, family_params, verify_family, DaprReport, DAPR_TOLERANCE};
use crate::tolerance::{BOUNDARY_REL_EPS, MONEY_EPS};

/// One named pass/fail outcome with a short explanation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &str, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.to_string(),
            passed,
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Dapr,
    Invariants,
    #[default]
    All,
}

impl std::str::FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dapr" => Ok(Suite::Dapr),
            "invariants" => Ok(Suite::Invariants),
            "all" => Ok(Suite::All),
            other => Err(Error::Invalid(format!(
                "unknown suite `{other}` (dapr, invariants, all)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct VerifyOptions {
    pub suite: Suite,
    pub grid_points: usize,
    /// Restrict the allocation-payment check to one family.
    pub family: Option<ResourceFamily>,
    /// Replace every family's ratio with this value.
    pub alpha: Option<f64>,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            suite: Suite::All,
            grid_points: 10_000,
            family: None,
            alpha: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub instance_hash: String,
    pub checks: Vec<Check>,
    pub dapr: Vec<DaprReport>,
    pub passed: bool,
}

/// Prices at capacity equal `U`, and the solar branch reaches `π` at `δ`,
/// for every parameter set in the model.
pub fn boundary_check(model: &SystemModel) -> Check {
    let (bounds, psi) = (&model.bounds, model.psi);
    let close = |a: f64, b: f64| (a - b).abs() <= BOUNDARY_REL_EPS * b.abs().max(1e-300);
    let mut failures = Vec::new();
    let mut checked = 0usize;
    for family in ResourceFamily::ALL {
        let upper = bounds.get(family).upper;
        for p in family_params(model, family) {
            checked += 1;
            let at_cap = match family {
                ResourceFamily::Cable => pricing::price_cable(p.capacity, p.capacity, bounds, psi),
                ResourceFamily::Energy => pricing::price_energy(p.capacity, p.capacity, bounds, psi),
                ResourceFamily::Destination => pricing::price_destination(p.capacity, p.capacity, bounds, psi),
                ResourceFamily::OutOfService => {
                    pricing::price_out_of_service(p.capacity, p.capacity, p.floor, bounds, psi)
                }
                ResourceFamily::Generation => {
                    pricing::price_generation(p.capacity, p.solar, p.capacity - p.solar, p.floor, bounds, psi)
                }
            };
            match at_cap {
                Ok(price) if close(price, upper) => {}
                Ok(price) => failures.push(format!("{family} at capacity {}: {price} != {upper}", p.capacity)),
                Err(e) => failures.push(format!("{family}: {e}")),
            }
            if family == ResourceFamily::Generation && p.solar > 0.0 {
                let at_solar =
                    pricing::generation_solar_branch(p.solar, p.solar, p.floor, bounds.generation.lower, psi);
                if !close(at_solar, p.floor) {
                    failures.push(format!("generation at solar {}: {at_solar} != {}", p.solar, p.floor));
                }
            }
        }
    }
    match failures.first() {
        None => Check::new("boundary_identities", true, format!("{checked} parameter sets")),
        Some(first) => Check::new(
            "boundary_identities",
            false,
            format!("{} failures, first: {first}", failures.len()),
        ),
    }
}

/// `P^j - P^{j-1} >= (D^j - D^{j-1}) / α` at every step of an online run.
pub fn per_step_check(report: &RunReport, alpha: f64) -> Check {
    let name = "per_step_inequality";
    if report.dual.len() != report.primal.len() {
        return Check::new(name, false, "report has no matching dual trajectory");
    }
    let worst = report
        .primal
        .windows(2)
        .zip(report.dual.windows(2))
        .enumerate()
        .map(|(j, (p, d))| (j, (p[1] - p[0]) - (d[1] - d[0]) / alpha))
        .min_by(|a, b| a.1.total_cmp(&b.1));
    match worst {
        None => Check::new(name, true, "no sessions"),
        Some((j, margin)) => Check::new(
            name,
            margin >= -MONEY_EPS,
            format!("worst margin {margin:.3e} at session index {j}"),
        ),
    }
}

/// The full dual objective bounds the final welfare from above.
pub fn weak_duality_check(report: &RunReport) -> Check {
    let name = "weak_duality";
    match report.final_dual() {
        None => Check::new(name, false, "report has no dual trajectory"),
        Some(dual) => Check::new(
            name,
            dual >= report.welfare - MONEY_EPS,
            format!("dual {dual} vs primal {}", report.welfare),
        ),
    }
}

/// Invariant checks on a finished online report.
pub fn run_checks(report: &RunReport, sessions: &[Session], model: &SystemModel) -> Result<Vec<Check>> {
    let config = &model.config;
    let mut checks = Vec::new();

    let ledger = recompute_ledger(&report.decisions, config);
    checks.push(match &ledger {
        Ok(_) => Check::new("capacity", true, "no capacity violations"),
        Err(e) => Check::new("capacity", false, e.to_string()),
    });

    let mut bad_schedules = Vec::new();
    for (decision, session) in report.decisions.iter().zip(sessions) {
        if decision.session_id != session.id {
            bad_schedules.push(format!(
                "decision {} out of step with session {}",
                decision.session_id, session.id
            ));
        } else if let Some(s) = &decision.schedule {
            if let Some(problem) = s.check(session, config, &model.hops).into_iter().next() {
                bad_schedules.push(format!("session {}: {problem}", session.id));
            }
        }
    }
    checks.push(Check::new(
        "schedules",
        bad_schedules.is_empty() && report.decisions.len() == sessions.len(),
        bad_schedules
            .first()
            .cloned()
            .unwrap_or_else(|| format!("{} decisions", report.decisions.len())),
    ));

    if let Ok(ledger) = &ledger {
        let welfare = economics::primal_objective(&report.decisions, ledger, config);
        checks.push(match welfare {
            CostValue::Finite(w) => Check::new(
                "primal_recomputed",
                (w - report.welfare).abs() <= MONEY_EPS * w.abs().max(1.0) * 1e3,
                format!("recomputed {w} vs tracked {}", report.welfare),
            ),
            CostValue::Infeasible => Check::new("primal_recomputed", false, "final ledger is infeasible"),
        });
        let utilities: Vec<f64> = report.decisions.iter().map(|d| d.utility).collect();
        let dual = economics::dual_objective(&utilities, ledger, config, &model.bounds, model.psi)?;
        let tracked = report.final_dual().unwrap_or(f64::NAN);
        checks.push(Check::new(
            "dual_recomputed",
            (dual - tracked).abs() <= MONEY_EPS * dual.abs().max(1.0) * 1e3,
            format!("recomputed {dual} vs tracked {tracked}"),
        ));
    }

    checks.push(boundary_check(model));
    checks.push(per_step_check(report, model.alphas.alpha));
    checks.push(weak_duality_check(report));
    Ok(checks)
}

/// Allocation-payment reports for the selected families.
fn dapr_reports(model: &SystemModel, options: &VerifyOptions) -> Result<Vec<DaprReport>> {
    let mut out = Vec::new();
    for family in ResourceFamily::ALL {
        if options.family.is_some_and(|f| f != family) {
            continue;
        }
        let alpha = options.alpha.unwrap_or_else(|| model.alphas.get(family));
        if let Some(report) = verify_family(model, family, alpha, options.grid_points)? {
            out.push(report);
        }
    }
    Ok(out)
}

/// Runs the selected suites on one instance. The invariant suite runs the
/// online dispatcher first.
pub fn verify_instance(sessions: &[Session], model: &SystemModel, options: &VerifyOptions) -> Result<VerifyReport> {
    let mut checks = Vec::new();
    let mut dapr = Vec::new();
    if matches!(options.suite, Suite::Dapr | Suite::All) {
        dapr = dapr_reports(model, options)?;
        for r in &dapr {
            checks.push(Check::new(
                &format!("dapr_{}", r.family.name()),
                r.passed,
                format!(
                    "alpha {:.4}, {} increments, worst margin {:.3e} (tolerance {DAPR_TOLERANCE:e})",
                    r.alpha, r.increments, r.worst_margin
                ),
            ));
        }
    }
    if matches!(options.suite, Suite::Invariants | Suite::All) {
        let report = run_online(sessions, model)?;
        checks.extend(run_checks(&report, sessions, model)?);
    }
    Ok(VerifyReport {
        instance_hash: super::instance_hash(&model.config, sessions),
        passed: checks.iter().all(|c| c.passed),
        checks,
        dapr,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::{generate_scenario, ScenarioParams};

    #[test]
    fn tiny_instance_passes_everything() {
        let (config, sessions) = generate_scenario(2, &ScenarioParams::tiny()).unwrap();
        let model = SystemModel::new(config).unwrap();
        let options = VerifyOptions {
            grid_points: 200,
            ..VerifyOptions::default()
        };
        let report = verify_instance(&sessions, &model, &options).unwrap();
        let failed: Vec<_> = report.checks.iter().filter(|c| !c.passed).collect();
        assert!(failed.is_empty(), "{failed:?}");
        assert_eq!(report.dapr.len(), 5);
    }

    #[test]
    fn halved_alpha_fails_dapr() {
        let (config, sessions) = generate_scenario(2, &ScenarioParams::tiny()).unwrap();
        let model = SystemModel::new(config).unwrap();
        let options = VerifyOptions {
            suite: Suite::Dapr,
            grid_points: 200,
            family: Some(ResourceFamily::Cable),
            alpha: Some(model.alphas.cable / 2.0),
        };
        let report = verify_instance(&sessions, &model, &options).unwrap();
        assert!(!report.passed);
    }
}

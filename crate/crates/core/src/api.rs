//! Request and response bodies shared by the HTTP service and its client,
//! plus the few operations that only exist at that boundary.

use serde::{Deserialize, Serialize};

use crate::baselines::run_baseline;
use crate::dispatcher::run_online_recorded;
use crate::domain::{RunReport, ScenarioConfig, Session, Violation};
use crate::error::Result;
use crate::harness::{
    bound_schedule_sets, comparison_csv, instance_hash, plot_data, Comparison, ExperimentResult, PlotData,
    ScenarioParams, VerifyOptions,
};
use crate::model::{ModelSummary, SystemModel};
use crate::offline::{assignment_count, exact_offline, upper_bound};

/// Thresholds the upper bound always covers, so it bounds every baseline
/// the harness can run by default.
pub const BOUND_THRESHOLDS: [f64; 3] = [0.25, 0.5, 0.75];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub config: ScenarioConfig,
    pub sessions: Vec<Session>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerateRequest {
    pub seed: u64,
    #[serde(default)]
    pub params: ScenarioParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerateResponse {
    pub instance_hash: String,
    pub config: ScenarioConfig,
    pub sessions: Vec<Session>,
    pub summary: ModelSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidateResponse {
    pub valid: bool,
    pub instance_hash: String,
    pub violations: Vec<Violation>,
    /// Present when the config builds a model.
    pub summary: Option<ModelSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineRequest {
    #[serde(flatten)]
    pub instance: Instance,
    /// SoC fraction in `[0, 1]`.
    pub threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OfflineResponse {
    pub algorithm: String,
    pub instance_hash: String,
    pub welfare: f64,
    pub sessions: usize,
    /// Total schedules across all sets the solver saw.
    pub schedules: usize,
    /// Number of joint assignments the exact solver enumerates.
    pub assignments: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyRequest {
    #[serde(flatten)]
    pub instance: Instance,
    #[serde(default)]
    pub options: VerifyOptions,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareRequest {
    pub reports: Vec<RunReport>,
    pub upper_bound: f64,
    #[serde(default)]
    pub optimum: Option<f64>,
    /// Defaults to the ratio recorded in the first report.
    #[serde(default)]
    pub alpha: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareResponse {
    pub comparison: Comparison,
    pub csv: String,
    pub plot: PlotData,
}

/// Experiment output without the per-day reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub comparisons: Vec<Comparison>,
    pub csv: String,
    pub plot: PlotData,
}

impl ExperimentSummary {
    pub fn from_result(result: &ExperimentResult) -> Result<Self> {
        Ok(Self {
            csv: comparison_csv(&result.comparisons)?,
            comparisons: result.comparisons.clone(),
            plot: result.plot.clone(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IngestRequest {
    pub config: ScenarioConfig,
    #[serde(default)]
    pub price_csv: Option<String>,
    #[serde(default)]
    pub solar_csv: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DispatcherCreated {
    pub id: u64,
    pub summary: ModelSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionBatch {
    pub sessions: Vec<Session>,
}

/// Error body returned with every non-2xx response.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub kind: String,
    pub message: String,
}

/// Config violations plus per-session problems, without running anything.
pub fn validate_instance(instance: &Instance) -> ValidateResponse {
    let config = &instance.config;
    let mut violations = config.validate();
    let mut previous = 0;
    for (i, s) in instance.sessions.iter().enumerate() {
        let field = format!("sessions[{i}]");
        if !(0.0..=1.0).contains(&s.soc) {
            violations.push(Violation::new(&field, None, format!("SoC {} outside [0, 1]", s.soc)));
        }
        if s.origin >= config.regions.len() {
            violations.push(Violation::new(
                &field,
                None,
                format!("unknown origin region {}", s.origin),
            ));
        }
        if s.start_slot >= config.horizon {
            violations.push(Violation::new(&field, Some(s.start_slot), "starts after the horizon"));
        }
        if s.start_slot < previous {
            violations.push(Violation::new(
                &field,
                Some(s.start_slot),
                format!("out of order after slot {previous}"),
            ));
        }
        previous = previous.max(s.start_slot);
    }
    let summary = if violations.is_empty() {
        match SystemModel::new(config.clone()) {
            Ok(model) => Some(model.summary()),
            Err(e) => {
                violations.push(Violation::new("bounds", None, e.to_string()));
                None
            }
        }
    } else {
        None
    };
    ValidateResponse {
        valid: violations.is_empty(),
        instance_hash: instance_hash(config, &instance.sessions),
        violations,
        summary,
    }
}

/// Capacity-relaxed upper bound over the online candidate sets, the
/// empty-ledger schedules and the default baselines' choices.
pub fn offline_upper_bound(instance: &Instance) -> Result<OfflineResponse> {
    let model = SystemModel::new(instance.config.clone())?;
    let sessions = &instance.sessions;
    let recorded = run_online_recorded(sessions, &model)?;
    let baselines = BOUND_THRESHOLDS
        .iter()
        .map(|&k| run_baseline(sessions, &model, k))
        .collect::<Result<Vec<_>>>()?;
    let sets = bound_schedule_sets(sessions, &model, &recorded.candidates, &baselines);
    Ok(OfflineResponse {
        algorithm: "offline-ub".into(),
        instance_hash: recorded.report.instance_hash,
        welfare: upper_bound(sessions, &sets, &model)?,
        sessions: sessions.len(),
        schedules: sets.iter().map(Vec::len).sum(),
        assignments: assignment_count(&sets),
    })
}

/// Exhaustive optimum over the online candidate sets.
pub fn offline_exact(instance: &Instance) -> Result<OfflineResponse> {
    let model = SystemModel::new(instance.config.clone())?;
    let sessions = &instance.sessions;
    let recorded = run_online_recorded(sessions, &model)?;
    let sets = recorded.candidates;
    Ok(OfflineResponse {
        algorithm: "offline-exact".into(),
        instance_hash: recorded.report.instance_hash,
        welfare: exact_offline(sessions, &sets, &model)?,
        sessions: sessions.len(),
        schedules: sets.iter().map(Vec::len).sum(),
        assignments: assignment_count(&sets),
    })
}

pub fn compare_reports(request: &CompareRequest) -> Result<CompareResponse> {
    let alpha = match (request.alpha, request.reports.first()) {
        (Some(a), _) => a,
        (None, Some(r)) => r.alphas.alpha,
        (None, None) => f64::NAN,
    };
    let comparison = crate::harness::compare(&request.reports, request.upper_bound, request.optimum, alpha)?;
    let both = [comparison];
    Ok(CompareResponse {
        csv: comparison_csv(&both)?,
        plot: plot_data(&both),
        comparison: both.into_iter().next().expect("one comparison"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::generate_scenario;

    fn tiny() -> Instance {
        let (config, sessions) = generate_scenario(3, &ScenarioParams::tiny()).unwrap();
        Instance { config, sessions }
    }

    #[test]
    fn validation_flags_bad_sessions() {
        let mut instance = tiny();
        assert!(validate_instance(&instance).valid);
        instance.sessions.push(Session::new(99, 0, 1000, 1.5));
        let report = validate_instance(&instance);
        assert!(!report.valid);
        assert_eq!(report.violations.len(), 3, "{:?}", report.violations);
        assert!(report.summary.is_none());
    }

    #[test]
    fn offline_values_bracket_online() {
        let instance = tiny();
        let ub = offline_upper_bound(&instance).unwrap();
        let opt = offline_exact(&instance).unwrap();
        let model = SystemModel::new(instance.config.clone()).unwrap();
        let online = crate::dispatcher::run_online(&instance.sessions, &model).unwrap();
        assert!(ub.welfare + 1e-9 >= opt.welfare);
        assert!(opt.welfare + 1e-9 >= online.welfare);
        assert_eq!(ub.instance_hash, online.instance_hash);
    }

    #[test]
    fn compare_defaults_alpha_from_report() {
        let instance = tiny();
        let model = SystemModel::new(instance.config.clone()).unwrap();
        let online = crate::dispatcher::run_online(&instance.sessions, &model).unwrap();
        let request = CompareRequest {
            reports: vec![online.clone()],
            upper_bound: online.welfare + 1.0,
            optimum: None,
            alpha: None,
        };
        let out = compare_reports(&request).unwrap();
        assert!(out.csv.lines().count() >= 2);
        assert_eq!(out.comparison.alpha, online.alphas.alpha);
    }
}

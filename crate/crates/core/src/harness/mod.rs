//! Scenario generation, trace ingestion, experiments and report analysis.

mod compare;
mod experiment;
mod export;
mod scenario;
mod traces;
mod verify;

pub use compare::{compare, comparison_csv, plot_data, Comparison, ComparisonRow, PlotData};
pub use experiment::{run_day, run_experiment, Algorithm, DayOutcome, ExperimentResult, ExperimentSpec};
pub use export::{decisions_csv, instance_hash, read_sessions_csv, report_json, write_sessions_csv};
pub use scenario::{diurnal_solar, generate_scenario, time_of_use, ScenarioParams};
pub use traces::{ingest_traces, parse_trace, Trace};
pub use verify::{
    boundary_check, per_step_check, run_checks, verify_instance, weak_duality_check, Check, Suite, VerifyOptions,
    VerifyReport,
};

use crate::domain::{ResourceLedger, RunReport, Schedule, Session};
use crate::model::SystemModel;
use crate::schedules::feasible_schedules;

/// Schedule sets for the relaxed upper bound: the online candidates, the
/// candidates an empty ledger would offer, and whatever any other run
/// committed. A superset of every action taken, so the bound covers them all.
pub fn bound_schedule_sets(
    sessions: &[Session],
    model: &SystemModel,
    recorded: &[Vec<Schedule>],
    reports: &[RunReport],
) -> Vec<Vec<Schedule>> {
    let empty = ResourceLedger::empty(&model.config);
    let policy = &model.config.policy;
    sessions
        .iter()
        .enumerate()
        .map(|(j, session)| {
            let mut set = recorded.get(j).cloned().unwrap_or_default();
            set.extend(feasible_schedules(session, model, &empty, policy));
            for report in reports {
                if let Some(s) = report.decisions.get(j).and_then(|d| d.schedule.as_ref()) {
                    set.push(s.clone());
                }
            }
            set
        })
        .collect()
}

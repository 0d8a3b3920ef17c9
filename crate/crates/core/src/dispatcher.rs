//! The online engine: price every candidate, commit the best one if its
//! utility is positive, and track the primal and dual objectives.

use serde::{Deserialize, Serialize};

use crate::domain::{DispatchDecision, ResourceLedger, RunReport, Schedule, Session};
use crate::economics::{self, CostValue};
use crate::error::{Error, Result};
use crate::harness::instance_hash;
use crate::model::SystemModel;
use crate::pricing::{self, PriceSnapshot};
use crate::schedules::{candidates_at, GenerationPolicy};

/// Mutable state of one online run.
#[derive(Debug, Clone)]
pub struct DispatcherState {
    pub ledger: ResourceLedger,
    pub decisions: Vec<DispatchDecision>,
    /// `P^0..P^j`.
    pub primal: Vec<f64>,
    /// `D^0..D^j`, offset so that `D^0 = 0`.
    pub dual: Vec<f64>,
    /// Conjugate sum of the empty ledger.
    pub dual_base: f64,
    pub utility_sum: f64,
    last_start: Option<usize>,
    /// Candidate sets in dispatch order, kept when requested.
    pub candidate_log: Option<Vec<Vec<Schedule>>>,
}

impl DispatcherState {
    pub fn new(model: &SystemModel) -> Result<Self> {
        let ledger = ResourceLedger::empty(&model.config);
        let dual_base = economics::conjugate_sum(&ledger, &model.config, &model.bounds, model.psi)?;
        Ok(Self {
            ledger,
            decisions: Vec::new(),
            primal: vec![0.0],
            dual: vec![0.0],
            dual_base,
            utility_sum: 0.0,
            last_start: None,
            candidate_log: None,
        })
    }

    /// Keep every candidate set so offline solvers can reuse them.
    pub fn recording(mut self) -> Self {
        self.candidate_log = Some(Vec::new());
        self
    }

    pub fn welfare(&self) -> f64 {
        self.primal.last().copied().unwrap_or_default()
    }
}

/// Utility of `schedule` at the prices implied by `state`'s ledger.
pub fn utility(schedule: &Schedule, model: &SystemModel, state: &DispatcherState) -> f64 {
    PriceSnapshot::new(model, &state.ledger).utility(schedule)
}

/// Index of the best candidate: highest utility, then earliest arrival,
/// then lowest index.
pub fn argmax(utilities: &[f64], candidates: &[Schedule]) -> Option<usize> {
    (0..candidates.len()).reduce(|best, i| {
        let better = utilities[i] > utilities[best]
            || (utilities[i] == utilities[best] && candidates[i].arrival_slot < candidates[best].arrival_slot);
        if better {
            i
        } else {
            best
        }
    })
}

/// Primal change from adding `schedule` to `ledger`: its value minus the
/// extra generation cost and the out-of-service penalty it incurs.
pub fn primal_increment(schedule: &Schedule, ledger: &ResourceLedger, model: &SystemModel) -> Result<f64> {
    let config = &model.config;
    let mut delta = schedule.value;
    if let Some(plan) = &schedule.charge {
        let fac = &config.facilities[plan.facility];
        for (t, e) in plan.charging_slots() {
            let y = ledger.generation[plan.facility][t];
            let cost = |y: f64| {
                economics::generation_cost(y.max(0.0), fac.solar.at(t), fac.grid_limit.at(t), fac.grid_price.at(t))
            };
            match (cost(y)?, cost(y + e)?) {
                (CostValue::Finite(before), CostValue::Finite(after)) => delta -= after - before,
                _ => return Err(Error::Invalid("schedule exceeds generation capacity".into())),
            }
        }
    }
    for t in schedule.out_of_service() {
        delta -= config.out_of_service_penalty.at(t);
    }
    Ok(delta)
}

/// Change in the conjugate sum when `schedule` moves the ledger from
/// `before` to `after`. Only entries the schedule touches can change.
pub fn conjugate_increment(
    schedule: &Schedule,
    before: &ResourceLedger,
    after: &ResourceLedger,
    model: &SystemModel,
) -> Result<f64> {
    let config = &model.config;
    let (bounds, psi) = (&model.bounds, model.psi);
    let mut delta = 0.0;

    let d = schedule.destination;
    let t = schedule.arrival_slot;
    let omega = f64::from(config.regions[d].vehicle_limit.at(t));
    let conj_d = |y: u32| -> Result<f64> {
        let p = pricing::price_destination(f64::from(y), omega, bounds, psi)?;
        Ok(economics::conj_destination(p, omega)?)
    };
    delta += conj_d(after.destination[d][t])? - conj_d(before.destination[d][t])?;

    for t in schedule.out_of_service() {
        let cap = f64::from(config.out_of_service_cap.at(t));
        let phi = config.out_of_service_penalty.at(t);
        let conj_o = |y: u32| -> Result<f64> {
            let p = pricing::price_out_of_service(f64::from(y), cap, phi, bounds, psi)?;
            Ok(economics::conj_out_of_service(p, phi, cap)?)
        };
        delta += conj_o(after.out_of_service[t])? - conj_o(before.out_of_service[t])?;
    }

    if let Some(plan) = &schedule.charge {
        let (f, m) = (plan.facility, plan.evse);
        let fac = &config.facilities[f];
        let cables = f64::from(fac.cables_per_evse);
        for t in plan.dwell() {
            let conj_c = |y: u32| -> Result<f64> {
                let p = pricing::price_cable(f64::from(y), cables, bounds, psi)?;
                Ok(economics::conj_cable(p, cables)?)
            };
            delta += conj_c(after.cables[f][m][t])? - conj_c(before.cables[f][m][t])?;
        }
        for (t, _) in plan.charging_slots() {
            let limit = fac.evse_energy_limit;
            let conj_e = |y: f64| -> Result<f64> {
                let p = pricing::price_energy(y.clamp(0.0, limit), limit, bounds, psi)?;
                Ok(economics::conj_energy(p, limit)?)
            };
            delta += conj_e(after.energy[f][m][t])? - conj_e(before.energy[f][m][t])?;

            let (delta_s, mu, pi) = (fac.solar.at(t), fac.grid_limit.at(t), fac.grid_price.at(t));
            let conj_g = |y: f64| -> Result<f64> {
                let p = pricing::price_generation(y.clamp(0.0, delta_s + mu), delta_s, mu, pi, bounds, psi)?;
                Ok(economics::conj_generation(p, delta_s, mu, pi)?)
            };
            delta += conj_g(after.generation[f][t])? - conj_g(before.generation[f][t])?;
        }
    }
    Ok(delta)
}

/// Processes one session. Sessions must arrive in nondecreasing start slot.
pub fn dispatch(
    session: &Session,
    model: &SystemModel,
    state: &mut DispatcherState,
    policy: &GenerationPolicy,
) -> Result<DispatchDecision> {
    if !(0.0..=1.0).contains(&session.soc) {
        return Err(Error::InvalidSession {
            id: session.id,
            reason: format!("SoC {} outside [0, 1]", session.soc),
        });
    }
    if session.origin >= model.config.regions.len() {
        return Err(Error::InvalidSession {
            id: session.id,
            reason: format!("unknown origin region {}", session.origin),
        });
    }
    if let Some(previous) = state.last_start {
        if session.start_slot < previous {
            return Err(Error::OutOfOrder {
                id: session.id,
                start: session.start_slot,
                previous,
            });
        }
    }
    state.last_start = Some(session.start_slot);

    let prices = PriceSnapshot::new(model, &state.ledger);
    let candidates = candidates_at(session, model, &state.ledger, policy, &prices);
    let utilities: Vec<f64> = candidates.iter().map(|s| prices.utility(s)).collect();
    let chosen = argmax(&utilities, &candidates).filter(|&i| utilities[i] > 0.0);

    let decision = match chosen {
        Some(i) if state.ledger.fits(&candidates[i], &model.config) => {
            let schedule = candidates[i].clone();
            let u = utilities[i];
            let welfare_delta = primal_increment(&schedule, &state.ledger, model)?;
            let before = state.ledger.clone();
            state.ledger.apply(&schedule);
            let violations = state.ledger.capacity_violations(&model.config);
            assert!(violations.is_empty(), "dispatcher breached capacity: {}", violations[0]);
            let dual_delta = u + conjugate_increment(&schedule, &before, &state.ledger, model)?;
            let breakdown = prices.charge_for(&schedule);
            state.utility_sum += u;
            state.primal.push(state.welfare() + welfare_delta);
            let last_dual = state.dual.last().copied().unwrap_or_default();
            state.dual.push(last_dual + dual_delta);
            DispatchDecision {
                session_id: session.id,
                start_slot: session.start_slot,
                origin: session.origin,
                schedule: Some(schedule),
                utility: u,
                welfare_delta,
                prices: breakdown,
                candidates: candidates.len(),
            }
        }
        _ => {
            state.primal.push(state.welfare());
            let last_dual = state.dual.last().copied().unwrap_or_default();
            state.dual.push(last_dual);
            DispatchDecision::depot(session.id, session.start_slot, session.origin, candidates.len())
        }
    };
    if let Some(log) = &mut state.candidate_log {
        log.push(candidates);
    }
    state.decisions.push(decision.clone());
    Ok(decision)
}

/// Output of [`run_online_recorded`]: the report plus every candidate set.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RecordedRun {
    pub report: RunReport,
    pub candidates: Vec<Vec<Schedule>>,
}

/// Runs every session through a fresh dispatcher.
pub fn run_online(sessions: &[Session], model: &SystemModel) -> Result<RunReport> {
    let state = run_sessions(sessions, model, DispatcherState::new(model)?)?;
    Ok(finish_report(
        state,
        model,
        "online",
        instance_hash(&model.config, sessions),
    ))
}

/// Like [`run_online`], also returning the candidate set of every session.
pub fn run_online_recorded(sessions: &[Session], model: &SystemModel) -> Result<RecordedRun> {
    let mut state = run_sessions(sessions, model, DispatcherState::new(model)?.recording())?;
    let candidates = state.candidate_log.take().unwrap_or_default();
    Ok(RecordedRun {
        report: finish_report(state, model, "online", instance_hash(&model.config, sessions)),
        candidates,
    })
}

fn run_sessions(sessions: &[Session], model: &SystemModel, mut state: DispatcherState) -> Result<DispatcherState> {
    let policy = model.config.policy.clone();
    for session in sessions {
        dispatch(session, model, &mut state, &policy)?;
    }
    Ok(state)
}

/// Builds the report for a finished run.
pub fn finish_report(state: DispatcherState, model: &SystemModel, algorithm: &str, instance_hash: String) -> RunReport {
    let accepted = state.decisions.iter().filter(|d| !d.is_depot()).count();
    RunReport {
        algorithm: algorithm.to_string(),
        instance_hash,
        depot: state.decisions.len() - accepted,
        accepted,
        welfare: state.welfare(),
        peak_utilization: state.ledger.peak_utilization(&model.config),
        decisions: state.decisions,
        primal: state.primal,
        dual: state.dual,
        dual_base: state.dual_base,
        utility_sum: state.utility_sum,
        psi: model.psi,
        bounds: model.bounds,
        alphas: model.alphas,
    }
}

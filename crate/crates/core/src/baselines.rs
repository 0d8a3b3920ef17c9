//! Threshold policies: charge at the nearest facility whenever the SoC is
//! below a threshold, always to full, then head for the best destination.

use crate::dispatcher::primal_increment;
use crate::domain::{ChargePlan, DispatchDecision, ResourceLedger, RunReport, Schedule, Session};
use crate::error::{Error, Result};
use crate::harness::instance_hash;
use crate::model::SystemModel;
use crate::tolerance::ENERGY_EPS;

/// Running state of a threshold baseline.
#[derive(Debug, Clone)]
pub struct BaselineState {
    pub ledger: ResourceLedger,
    pub decisions: Vec<DispatchDecision>,
    pub primal: Vec<f64>,
    last_start: Option<usize>,
}

impl BaselineState {
    pub fn new(model: &SystemModel) -> Self {
        Self {
            ledger: ResourceLedger::empty(&model.config),
            decisions: Vec::new(),
            primal: vec![0.0],
            last_start: None,
        }
    }

    pub fn welfare(&self) -> f64 {
        self.primal.last().copied().unwrap_or_default()
    }
}

/// Highest-value destination reachable from `from` when leaving at
/// `depart` with `energy` on board; ties go to fewer hops, then lower id.
fn best_destination(
    model: &SystemModel,
    ledger: &ResourceLedger,
    t0: usize,
    from: usize,
    depart: usize,
    energy: f64,
) -> Option<(usize, u32)> {
    let config = &model.config;
    let mut best: Option<(usize, u32)> = None;
    for (d, region) in config.regions.iter().enumerate() {
        let Some(h) = model.hops.reach(from, d) else { continue };
        let arrival = depart + h as usize;
        if arrival >= config.horizon || energy - f64::from(h) * config.per_hop_energy < -ENERGY_EPS {
            continue;
        }
        if ledger.destination[d][arrival] >= region.vehicle_limit.at(arrival) {
            continue;
        }
        if (t0..=arrival).any(|t| ledger.out_of_service[t] >= config.out_of_service_cap.at(t)) {
            continue;
        }
        let better = match best {
            None => true,
            Some((b, bh)) => {
                let bv = config.regions[b].pickup_value;
                region.pickup_value > bv || (region.pickup_value == bv && h < bh)
            }
        };
        if better {
            best = Some((d, h));
        }
    }
    best
}

fn route(
    model: &SystemModel,
    session: &Session,
    charge: Option<ChargePlan>,
    approach: u32,
    destination: usize,
    departure: u32,
    final_energy: f64,
) -> Schedule {
    let config = &model.config;
    let depart = charge.as_ref().map_or(session.start_slot, |p| p.dwell_end + 1);
    let final_soc = (final_energy.max(0.0) / config.battery_capacity).min(1.0);
    Schedule {
        session_id: session.id,
        start_slot: session.start_slot,
        origin: session.origin,
        charge,
        approach_hops: approach,
        departure_hops: departure,
        destination,
        arrival_slot: depart + departure as usize,
        final_soc,
        value: crate::domain::schedule_value_of(config, destination, final_soc, approach + departure),
    }
}

/// The schedule a threshold policy would pick, or `None` for the depot.
pub fn threshold_schedule(
    session: &Session,
    ledger: &ResourceLedger,
    threshold: f64,
    model: &SystemModel,
) -> Option<Schedule> {
    let config = &model.config;
    let t0 = session.start_slot;
    if t0 >= config.horizon {
        return None;
    }
    let capacity = config.battery_capacity;
    let initial = session.soc * capacity;

    if session.soc >= threshold {
        let (d, h) = best_destination(model, ledger, t0, session.origin, t0, initial)?;
        return Some(route(
            model,
            session,
            None,
            0,
            d,
            h,
            initial - f64::from(h) * config.per_hop_energy,
        ));
    }

    let (approach, f) = config
        .facilities
        .iter()
        .filter_map(|f| model.hops.reach(session.origin, f.region).map(|h| (h, f.id)))
        .min()?;
    let fac = &config.facilities[f];
    let arrive_energy = initial - f64::from(approach) * config.per_hop_energy;
    if arrive_energy < -ENERGY_EPS {
        return None;
    }
    let need = capacity - arrive_energy.max(0.0);
    let rate = config.charge_rate;
    // Below the threshold there is always something to charge.
    let k = (need / rate - ENERGY_EPS).ceil().max(1.0) as usize;
    let plug_in = t0 + approach as usize;
    for wait in 0..=config.baseline_patience {
        let dwell_end = plug_in + wait + k - 1;
        if dwell_end + 1 >= config.horizon {
            break;
        }
        let mut energy = vec![0.0; wait + k];
        for slot in energy.iter_mut().skip(wait) {
            *slot = rate;
        }
        let partial = need - (k - 1) as f64 * rate;
        if partial < rate - ENERGY_EPS {
            energy[wait + k - 1] = partial;
        }
        for m in 0..fac.evse_count {
            let plan = ChargePlan {
                facility: f,
                evse: m,
                dwell_start: plug_in,
                dwell_end,
                energy: energy.clone(),
            };
            let Some((d, h)) = best_destination(model, ledger, t0, fac.region, dwell_end + 1, capacity) else {
                continue;
            };
            let schedule = route(
                model,
                session,
                Some(plan),
                approach,
                d,
                h,
                capacity - f64::from(h) * config.per_hop_energy,
            );
            if ledger.fits(&schedule, config) {
                return Some(schedule);
            }
        }
    }
    None
}

/// Processes one session under the threshold policy.
pub fn threshold_dispatch(
    session: &Session,
    state: &mut BaselineState,
    threshold: f64,
    model: &SystemModel,
) -> Result<DispatchDecision> {
    if !(0.0..=1.0).contains(&session.soc) {
        return Err(Error::InvalidSession {
            id: session.id,
            reason: format!("SoC {} outside [0, 1]", session.soc),
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

    let decision = match threshold_schedule(session, &state.ledger, threshold, model) {
        Some(schedule) if state.ledger.fits(&schedule, &model.config) => {
            let welfare_delta = primal_increment(&schedule, &state.ledger, model)?;
            state.ledger.apply(&schedule);
            let violations = state.ledger.capacity_violations(&model.config);
            assert!(violations.is_empty(), "baseline breached capacity: {}", violations[0]);
            state.primal.push(state.welfare() + welfare_delta);
            DispatchDecision {
                session_id: session.id,
                start_slot: session.start_slot,
                origin: session.origin,
                schedule: Some(schedule),
                utility: 0.0,
                welfare_delta,
                prices: Default::default(),
                candidates: 1,
            }
        }
        _ => {
            state.primal.push(state.welfare());
            DispatchDecision::depot(session.id, session.start_slot, session.origin, 0)
        }
    };
    state.decisions.push(decision.clone());
    Ok(decision)
}

/// Runs every session through a threshold baseline.
pub fn run_baseline(sessions: &[Session], model: &SystemModel, threshold: f64) -> Result<RunReport> {
    if !(0.0..=1.0).contains(&threshold) {
        return Err(Error::Invalid(format!("threshold {threshold} outside [0, 1]")));
    }
    let mut state = BaselineState::new(model);
    for session in sessions {
        threshold_dispatch(session, &mut state, threshold, model)?;
    }
    let accepted = state.decisions.iter().filter(|d| !d.is_depot()).count();
    Ok(RunReport {
        algorithm: baseline_name(threshold),
        instance_hash: instance_hash(&model.config, sessions),
        depot: state.decisions.len() - accepted,
        accepted,
        welfare: state.welfare(),
        peak_utilization: state.ledger.peak_utilization(&model.config),
        decisions: state.decisions,
        primal: state.primal,
        dual: Vec::new(),
        dual_base: 0.0,
        utility_sum: 0.0,
        psi: model.psi,
        bounds: model.bounds,
        alphas: model.alphas,
    })
}

pub fn baseline_name(threshold: f64) -> String {
    format!("baseline-{}", (threshold * 100.0).round() as u32)
}

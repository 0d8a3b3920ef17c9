//! Candidate schedule generation for one session.

use serde::{Deserialize, Serialize};

use crate::domain::{
    is_multiple, schedule_value_of, ChargePlan, ResourceLedger, ScenarioConfig, Schedule, Session, Violation,
};
use crate::model::SystemModel;
use crate::pricing::PriceSnapshot;
use crate::tolerance::ENERGY_EPS;

/// Knobs that bound the candidate enumeration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GenerationPolicy {
    /// Facilities considered per session, nearest first.
    pub max_candidate_facilities: usize,
    /// Energy to add, in kWh. `None` means every multiple of the charge
    /// increment up to the battery capacity.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub charge_targets: Option<Vec<f64>>,
    /// Extra slots a dwell window may span beyond the charging slots it needs.
    pub max_start_offset: usize,
    pub max_candidates_total: usize,
    /// Destinations further than this many hops from the departure region
    /// are skipped. `None` admits the whole graph.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub destination_radius: Option<u32>,
}

impl Default for GenerationPolicy {
    fn default() -> Self {
        Self {
            max_candidate_facilities: 3,
            charge_targets: None,
            max_start_offset: 4,
            max_candidates_total: 4096,
            destination_radius: None,
        }
    }
}

impl GenerationPolicy {
    /// Charge targets in kWh, ascending.
    pub fn targets(&self, config: &ScenarioConfig) -> Vec<f64> {
        match &self.charge_targets {
            Some(targets) => {
                let mut targets = targets.clone();
                targets.sort_by(f64::total_cmp);
                targets
            }
            None => {
                let steps = (config.battery_capacity / config.charge_increment).round() as usize;
                (1..=steps).map(|k| k as f64 * config.charge_increment).collect()
            }
        }
    }

    pub fn violations(&self, config: &ScenarioConfig) -> Vec<Violation> {
        let mut out = Vec::new();
        if self.max_candidate_facilities < 1 {
            out.push(Violation::new("policy.max_candidate_facilities", None, "must be >= 1"));
        }
        if self.max_candidates_total < 1 {
            out.push(Violation::new("policy.max_candidates_total", None, "must be >= 1"));
        }
        if let Some(targets) = &self.charge_targets {
            if targets.is_empty() {
                out.push(Violation::new("policy.charge_targets", None, "must not be empty"));
            }
            for &target in targets {
                let multiple = config.charge_increment > 0.0 && is_multiple(target, config.charge_increment);
                if !(target > 0.0 && target <= config.battery_capacity + ENERGY_EPS && multiple) {
                    out.push(Violation::new(
                        "policy.charge_targets",
                        None,
                        format!("{target} is not a positive multiple of the charge increment within capacity"),
                    ));
                }
            }
        }
        out
    }
}

/// `soc_value_slope * final_soc * capacity + v_d - penalty * hops`.
pub fn schedule_value(schedule: &Schedule, config: &ScenarioConfig) -> f64 {
    schedule_value_of(config, schedule.destination, schedule.final_soc, schedule.total_hops())
}

/// Capacity headroom the candidate generator needs at each slot.
struct Room<'a> {
    model: &'a SystemModel,
    ledger: &'a ResourceLedger,
}

impl Room<'_> {
    fn out_of_service(&self, from: usize, to: usize) -> bool {
        let cap = &self.model.config.out_of_service_cap;
        (from..=to).all(|t| self.ledger.out_of_service[t] < cap.at(t))
    }

    fn destination(&self, d: usize, t: usize) -> bool {
        self.ledger.destination[d][t] < self.model.config.regions[d].vehicle_limit.at(t)
    }

    fn cable(&self, f: usize, m: usize, from: usize, to: usize) -> bool {
        let cap = self.model.config.facilities[f].cables_per_evse;
        (from..=to).all(|t| self.ledger.cables[f][m][t] < cap)
    }

    fn charge_slot(&self, f: usize, m: usize, t: usize, amount: f64) -> bool {
        let fac = &self.model.config.facilities[f];
        self.ledger.energy[f][m][t] + amount <= fac.evse_energy_limit + ENERGY_EPS
            && self.ledger.generation[f][t] + amount <= fac.solar.at(t) + fac.grid_limit.at(t) + ENERGY_EPS
    }
}

/// Picks `k` charging slots inside `[start, end]` on EVSE `m` by ascending
/// `p_e + p_g`, ties to the earlier slot. The last partial slot, if any, is
/// the most expensive pick.
fn place_charge(
    room: &Room<'_>,
    prices: &PriceSnapshot,
    f: usize,
    m: usize,
    start: usize,
    end: usize,
    target: f64,
) -> Option<Vec<f64>> {
    let rate = room.model.config.charge_rate;
    let k = (target / rate - ENERGY_EPS).ceil().max(1.0) as usize;
    let mut slots: Vec<(f64, usize)> = (start..=end)
        .filter(|&t| room.charge_slot(f, m, t, rate))
        .map(|t| (prices.energy[f][m][t] + prices.generation[f][t], t))
        .collect();
    if slots.len() < k {
        return None;
    }
    slots.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    slots.truncate(k);
    let mut energy = vec![0.0; end + 1 - start];
    for &(_, t) in &slots {
        energy[t - start] = rate;
    }
    let partial = target - (k - 1) as f64 * rate;
    if partial < rate - ENERGY_EPS {
        let last = slots.last().map(|s| s.1)?;
        energy[last - start] = partial;
    }
    Some(energy)
}

/// Candidate schedules for `session` against the current ledger.
///
/// Emits one direct (no-charge) schedule per reachable destination and,
/// for each of the nearest facilities, charge target and dwell slack, one
/// schedule per destination with charging placed greedily on the cheapest
/// energy-plus-generation slots. Every candidate fits the ledger. The list
/// is stably sorted by descending value and truncated.
pub fn feasible_schedules(
    session: &Session,
    model: &SystemModel,
    ledger: &ResourceLedger,
    policy: &GenerationPolicy,
) -> Vec<Schedule> {
    candidates_at(session, model, ledger, policy, &PriceSnapshot::new(model, ledger))
}

/// [`feasible_schedules`] with prices already computed for `ledger`.
pub(crate) fn candidates_at(
    session: &Session,
    model: &SystemModel,
    ledger: &ResourceLedger,
    policy: &GenerationPolicy,
    prices: &PriceSnapshot,
) -> Vec<Schedule> {
    let config = &model.config;
    let horizon = config.horizon;
    let t0 = session.start_slot;
    if t0 >= horizon || session.origin >= config.regions.len() {
        return Vec::new();
    }
    let room = Room { model, ledger };
    let capacity = config.battery_capacity;
    let hop_energy = config.per_hop_energy;
    let initial = session.soc * capacity;
    let within_radius = |h: u32| policy.destination_radius.is_none_or(|r| h <= r);
    let mut out = Vec::new();

    // Routes from `from` leaving at slot `depart` with `energy` on board.
    let push_routes = |out: &mut Vec<Schedule>,
                       from: usize,
                       depart: usize,
                       energy: f64,
                       charge: Option<&ChargePlan>,
                       approach: u32| {
        for d in 0..config.regions.len() {
            let Some(h) = model.hops.reach(from, d) else { continue };
            if !within_radius(h) {
                continue;
            }
            let arrival = depart + h as usize;
            let remaining = energy - f64::from(h) * hop_energy;
            if arrival >= horizon || remaining < -ENERGY_EPS {
                continue;
            }
            if !room.out_of_service(t0, arrival) || !room.destination(d, arrival) {
                continue;
            }
            let final_soc = (remaining.max(0.0) / capacity).min(1.0);
            out.push(Schedule {
                session_id: session.id,
                start_slot: t0,
                origin: session.origin,
                charge: charge.cloned(),
                approach_hops: approach,
                departure_hops: h,
                destination: d,
                arrival_slot: arrival,
                final_soc,
                value: schedule_value_of(config, d, final_soc, approach + h),
            });
        }
    };

    push_routes(&mut out, session.origin, t0, initial, None, 0);

    let mut facilities: Vec<(u32, usize)> = config
        .facilities
        .iter()
        .filter_map(|f| model.hops.reach(session.origin, f.region).map(|h| (h, f.id)))
        .collect();
    facilities.sort_unstable();
    facilities.truncate(policy.max_candidate_facilities);

    let targets = policy.targets(config);
    for &(approach, f) in &facilities {
        let fac = &config.facilities[f];
        let arrive_energy = initial - f64::from(approach) * hop_energy;
        if arrive_energy < -ENERGY_EPS {
            continue;
        }
        let dwell_start = t0 + approach as usize;
        for &target in &targets {
            if arrive_energy + target > capacity + ENERGY_EPS {
                break;
            }
            let k = (target / config.charge_rate - ENERGY_EPS).ceil().max(1.0) as usize;
            for slack in 0..=policy.max_start_offset {
                let dwell_end = dwell_start + k + slack - 1;
                if dwell_end + 1 >= horizon {
                    break;
                }
                // EVSE with cable room over the window and enough chargeable
                // slots, cheapest total cable price first.
                let mut best: Option<(f64, usize, Vec<f64>)> = None;
                for m in 0..fac.evse_count {
                    if !room.cable(f, m, dwell_start, dwell_end) {
                        continue;
                    }
                    let cable_price: f64 = (dwell_start..=dwell_end).map(|t| prices.cable[f][m][t]).sum();
                    if best.as_ref().is_some_and(|b| b.0 <= cable_price) {
                        continue;
                    }
                    if let Some(energy) = place_charge(&room, prices, f, m, dwell_start, dwell_end, target) {
                        best = Some((cable_price, m, energy));
                    }
                }
                let Some((_, evse, energy)) = best else { continue };
                let plan = ChargePlan {
                    facility: f,
                    evse,
                    dwell_start,
                    dwell_end,
                    energy,
                };
                push_routes(
                    &mut out,
                    fac.region,
                    dwell_end + 1,
                    arrive_energy + target,
                    Some(&plan),
                    approach,
                );
            }
        }
    }

    out.sort_by(|a, b| b.value.total_cmp(&a.value));
    out.truncate(policy.max_candidates_total);
    out
}

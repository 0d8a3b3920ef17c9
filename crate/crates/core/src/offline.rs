//! Offline reference points: a capacity-relaxed upper bound and an
//! exhaustive exact solver for tiny instances.

use crate::domain::{ResourceLedger, Schedule, Session};
use crate::economics::{generation_cost, CostValue};
use crate::error::{Error, Result};
use crate::model::SystemModel;

/// Refusal threshold for [`exact_offline`].
pub const EXACT_LIMIT: f64 = 1e7;

/// Net value of `schedule` with every capacity relaxed and all energy free:
/// its value minus the out-of-service penalty it accrues.
pub fn relaxed_net(schedule: &Schedule, model: &SystemModel) -> f64 {
    let phi = &model.config.out_of_service_penalty;
    schedule.value - schedule.out_of_service().map(|t| phi.at(t)).sum::<f64>()
}

/// Sum over sessions of the best relaxed net value, floored at zero (the
/// depot). Valid as an upper bound on the constrained optimum over the
/// same schedule sets.
pub fn upper_bound(sessions: &[Session], schedule_sets: &[Vec<Schedule>], model: &SystemModel) -> Result<f64> {
    check_shapes(sessions, schedule_sets)?;
    Ok(schedule_sets
        .iter()
        .map(|set| set.iter().map(|s| relaxed_net(s, model)).fold(0.0, f64::max))
        .sum())
}

fn check_shapes(sessions: &[Session], schedule_sets: &[Vec<Schedule>]) -> Result<()> {
    if sessions.len() != schedule_sets.len() {
        return Err(Error::Invalid(format!(
            "{} sessions but {} schedule sets",
            sessions.len(),
            schedule_sets.len()
        )));
    }
    for (session, set) in sessions.iter().zip(schedule_sets) {
        if let Some(s) = set.iter().find(|s| s.session_id != session.id) {
            return Err(Error::Invalid(format!(
                "schedule for session {} listed under session {}",
                s.session_id, session.id
            )));
        }
    }
    Ok(())
}

/// Number of assignments an exhaustive search would visit.
pub fn assignment_count(schedule_sets: &[Vec<Schedule>]) -> f64 {
    schedule_sets.iter().map(|s| (s.len() + 1) as f64).product()
}

struct Search<'a> {
    model: &'a SystemModel,
    sets: &'a [Vec<Schedule>],
    /// Best relaxed net of sessions `j..`, used to prune.
    tail_bound: Vec<f64>,
    ledger: ResourceLedger,
    best: f64,
}

impl Search<'_> {
    /// Objective change from adding `schedule`; `None` if it breaks a limit.
    fn gain(&self, schedule: &Schedule) -> Option<f64> {
        if !self.ledger.fits(schedule, &self.model.config) {
            return None;
        }
        let config = &self.model.config;
        let mut gain = relaxed_net(schedule, self.model);
        if let Some(plan) = &schedule.charge {
            let fac = &config.facilities[plan.facility];
            for (t, e) in plan.charging_slots() {
                let y = self.ledger.generation[plan.facility][t];
                let cost =
                    |y: f64| generation_cost(y.max(0.0), fac.solar.at(t), fac.grid_limit.at(t), fac.grid_price.at(t));
                match (cost(y), cost(y + e)) {
                    (Ok(CostValue::Finite(a)), Ok(CostValue::Finite(b))) => gain -= b - a,
                    _ => return None,
                }
            }
        }
        Some(gain)
    }

    fn run(&mut self, j: usize, value: f64) {
        if value > self.best {
            self.best = value;
        }
        if j == self.sets.len() || value + self.tail_bound[j] <= self.best {
            return;
        }
        for s in &self.sets[j] {
            if let Some(gain) = self.gain(s) {
                self.ledger.apply(s);
                self.run(j + 1, value + gain);
                self.ledger.retract(s);
            }
        }
        self.run(j + 1, value);
    }
}

/// Best welfare over every joint choice of one schedule or the depot per
/// session that respects all capacity limits. Refuses instances with more
/// than [`EXACT_LIMIT`] assignments.
pub fn exact_offline(sessions: &[Session], schedule_sets: &[Vec<Schedule>], model: &SystemModel) -> Result<f64> {
    check_shapes(sessions, schedule_sets)?;
    let combinations = assignment_count(schedule_sets);
    if combinations > EXACT_LIMIT {
        return Err(Error::TooLarge {
            combinations,
            limit: EXACT_LIMIT,
        });
    }
    let mut tail_bound = vec![0.0; schedule_sets.len() + 1];
    for j in (0..schedule_sets.len()).rev() {
        let best = schedule_sets[j]
            .iter()
            .map(|s| relaxed_net(s, model))
            .fold(0.0, f64::max);
        tail_bound[j] = tail_bound[j + 1] + best;
    }
    let mut search = Search {
        model,
        sets: schedule_sets,
        tail_bound,
        ledger: ResourceLedger::empty(&model.config),
        best: 0.0,
    };
    search.run(0, 0.0);
    Ok(search.best)
}

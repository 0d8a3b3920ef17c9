use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use super::bound_schedule_sets;
use super::compare::{compare, plot_data, Comparison, PlotData};
use super::scenario::{generate_scenario, ScenarioParams};
use crate::baselines::run_baseline;
use crate::dispatcher::run_online_recorded;
use crate::domain::RunReport;
use crate::error::{Error, Result};
use crate::model::SystemModel;
use crate::offline::{exact_offline, upper_bound};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Algorithm {
    Online,
    /// Threshold baseline; the SoC threshold in percent.
    Baseline(u32),
    OfflineUpperBound,
    OfflineExact,
}

impl Algorithm {
    /// Online plus the three threshold baselines and the upper bound.
    pub fn standard() -> Vec<Algorithm> {
        vec![
            Algorithm::Online,
            Algorithm::Baseline(25),
            Algorithm::Baseline(50),
            Algorithm::Baseline(75),
            Algorithm::OfflineUpperBound,
        ]
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Algorithm::Online => f.write_str("online"),
            Algorithm::Baseline(k) => write!(f, "baseline-{k}"),
            Algorithm::OfflineUpperBound => f.write_str("offline-ub"),
            Algorithm::OfflineExact => f.write_str("offline-exact"),
        }
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "online" => Ok(Algorithm::Online),
            "offline-ub" => Ok(Algorithm::OfflineUpperBound),
            "offline-exact" => Ok(Algorithm::OfflineExact),
            _ => s
                .strip_prefix("baseline-")
                .and_then(|k| k.parse::<u32>().ok())
                .filter(|k| *k <= 100)
                .map(Algorithm::Baseline)
                .ok_or_else(|| Error::Invalid(format!("unknown algorithm `{s}`"))),
        }
    }
}

impl TryFrom<String> for Algorithm {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Algorithm> for String {
    fn from(a: Algorithm) -> String {
        a.to_string()
    }
}

/// A batch of seeded days. Day `i` uses seed `seed + i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub seed: u64,
    #[serde(default)]
    pub params: ScenarioParams,
    #[serde(default = "one")]
    pub repetitions: usize,
    #[serde(default = "Algorithm::standard")]
    pub algorithms: Vec<Algorithm>,
    /// Worker threads; 0 picks the available parallelism.
    #[serde(default)]
    pub workers: usize,
}

fn one() -> usize {
    1
}

impl ExperimentSpec {
    pub fn new(seed: u64, params: ScenarioParams, repetitions: usize) -> Self {
        Self {
            seed,
            params,
            repetitions,
            algorithms: Algorithm::standard(),
            workers: 0,
        }
    }

    fn check(&self) -> Result<()> {
        if self.repetitions == 0 {
            return Err(Error::Invalid("repetitions must be >= 1".into()));
        }
        if !self.algorithms.contains(&Algorithm::Online) {
            return Err(Error::Invalid("experiments need the online algorithm".into()));
        }
        Ok(())
    }
}

/// Everything produced for one seeded day.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DayOutcome {
    pub seed: u64,
    pub instance_hash: String,
    pub sessions: usize,
    pub alpha: f64,
    pub reports: Vec<RunReport>,
    pub upper_bound: f64,
    pub optimum: Option<f64>,
    pub comparison: Comparison,
}

/// Generates the instance for `seed` and runs the selected algorithms on it.
/// The online run always happens since the offline solvers reuse its
/// candidate sets.
pub fn run_day(seed: u64, params: &ScenarioParams, algorithms: &[Algorithm]) -> Result<DayOutcome> {
    let (config, sessions) = generate_scenario(seed, params)?;
    let model = SystemModel::new(config)?;
    let recorded = run_online_recorded(&sessions, &model)?;
    let mut reports = vec![recorded.report];
    for algorithm in algorithms {
        if let Algorithm::Baseline(k) = algorithm {
            reports.push(run_baseline(&sessions, &model, f64::from(*k) / 100.0)?);
        }
    }
    let sets = bound_schedule_sets(&sessions, &model, &recorded.candidates, &reports[1..]);
    let ub = upper_bound(&sessions, &sets, &model)?;
    let optimum = if algorithms.contains(&Algorithm::OfflineExact) {
        Some(exact_offline(&sessions, &recorded.candidates, &model)?)
    } else {
        None
    };
    let comparison = compare(&reports, ub, optimum, model.alphas.alpha)?;
    Ok(DayOutcome {
        seed,
        instance_hash: reports[0].instance_hash.clone(),
        sessions: sessions.len(),
        alpha: model.alphas.alpha,
        reports,
        upper_bound: ub,
        optimum,
        comparison,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub days: Vec<DayOutcome>,
    pub comparisons: Vec<Comparison>,
    pub plot: PlotData,
}

/// Runs every day of `spec`, in parallel across days. Output order follows
/// the day index regardless of scheduling.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentResult> {
    spec.check()?;
    let days = spec.repetitions;
    let workers = match spec.workers {
        0 => std::thread::available_parallelism().map_or(1, |n| n.get()),
        n => n,
    }
    .min(days);
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<Result<DayOutcome>>>> = Mutex::new((0..days).map(|_| None).collect());
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let day = next.fetch_add(1, Ordering::Relaxed);
                if day >= days {
                    break;
                }
                let outcome = run_day(spec.seed.wrapping_add(day as u64), &spec.params, &spec.algorithms);
                slots.lock().expect("no worker panicked")[day] = Some(outcome);
            });
        }
    });
    let outcomes = slots
        .into_inner()
        .expect("no worker panicked")
        .into_iter()
        .map(|o| o.expect("every day ran"))
        .collect::<Result<Vec<_>>>()?;
    let comparisons: Vec<Comparison> = outcomes.iter().map(|d| d.comparison.clone()).collect();
    Ok(ExperimentResult {
        plot: plot_data(&comparisons),
        comparisons,
        days: outcomes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn algorithm_names_round_trip() {
        for a in Algorithm::standard().into_iter().chain([Algorithm::OfflineExact]) {
            assert_eq!(a.to_string().parse::<Algorithm>().unwrap(), a);
        }
        assert!("baseline-x".parse::<Algorithm>().is_err());
        assert!("greedy".parse::<Algorithm>().is_err());
    }

    #[test]
    fn parallel_days_match_sequential() {
        let mut spec = ExperimentSpec::new(5, ScenarioParams::tiny(), 3);
        spec.algorithms.push(Algorithm::OfflineExact);
        spec.workers = 3;
        let parallel = run_experiment(&spec).unwrap();
        spec.workers = 1;
        let sequential = run_experiment(&spec).unwrap();
        assert_eq!(
            serde_json::to_string(&parallel.comparisons).unwrap(),
            serde_json::to_string(&sequential.comparisons).unwrap()
        );
        assert_eq!(parallel.plot.days, vec![1, 2, 3]);
    }

    #[test]
    fn zero_repetitions_rejected() {
        assert!(run_experiment(&ExperimentSpec::new(1, ScenarioParams::tiny(), 0)).is_err());
    }
}

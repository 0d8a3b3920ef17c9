use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::domain::RunReport;
use crate::error::{Error, Result};
use crate::tolerance::MONEY_EPS;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub algorithm: String,
    pub welfare: f64,
    /// Welfare over the upper bound; 1 when both are zero.
    pub ratio_to_upper_bound: f64,
    pub accepted: usize,
    pub depot: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub instance_hash: String,
    pub upper_bound: f64,
    pub optimum: Option<f64>,
    pub alpha: f64,
    pub rows: Vec<ComparisonRow>,
    /// `alpha * online >= optimum`, when both an online report and the
    /// optimum are present.
    pub competitive_ok: Option<bool>,
}

/// Tabulates reports from one instance against its upper bound and, when
/// known, the offline optimum.
pub fn compare(reports: &[RunReport], upper_bound: f64, optimum: Option<f64>, alpha: f64) -> Result<Comparison> {
    let Some(first) = reports.first() else {
        return Err(Error::Invalid("nothing to compare".into()));
    };
    for r in &reports[1..] {
        if r.instance_hash != first.instance_hash {
            return Err(Error::InstanceMismatch(
                first.instance_hash.clone(),
                r.instance_hash.clone(),
            ));
        }
    }
    let tolerance = MONEY_EPS * upper_bound.abs().max(1.0);
    let mut rows = Vec::new();
    for r in reports {
        if r.welfare > upper_bound + tolerance {
            return Err(Error::BoundViolated {
                algorithm: r.algorithm.clone(),
                welfare: r.welfare,
                bound: upper_bound,
            });
        }
        rows.push(ComparisonRow {
            algorithm: r.algorithm.clone(),
            welfare: r.welfare,
            ratio_to_upper_bound: if upper_bound.abs() <= MONEY_EPS {
                1.0
            } else {
                r.welfare / upper_bound
            },
            accepted: r.accepted,
            depot: r.depot,
        });
    }
    // The optimum is taken over the online candidate sets, so only the
    // online run is bounded by it.
    if let Some(opt) = optimum {
        if let Some(r) = reports
            .iter()
            .find(|r| r.algorithm == "online" && r.welfare > opt + MONEY_EPS * opt.abs().max(1.0))
        {
            return Err(Error::BoundViolated {
                algorithm: r.algorithm.clone(),
                welfare: r.welfare,
                bound: opt,
            });
        }
    }
    let competitive_ok = optimum.and_then(|opt| {
        reports
            .iter()
            .find(|r| r.algorithm == "online")
            .map(|r| alpha * r.welfare >= opt - MONEY_EPS)
    });
    Ok(Comparison {
        instance_hash: first.instance_hash.clone(),
        upper_bound,
        optimum,
        alpha,
        rows,
        competitive_ok,
    })
}

pub fn comparison_csv(comparisons: &[Comparison]) -> Result<String> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record([
        "instance_hash",
        "algorithm",
        "welfare",
        "upper_bound",
        "ratio_to_upper_bound",
        "optimum",
        "alpha",
        "competitive_ok",
        "accepted",
        "depot",
    ])?;
    for c in comparisons {
        for row in &c.rows {
            writer.write_record([
                c.instance_hash.clone(),
                row.algorithm.clone(),
                row.welfare.to_string(),
                c.upper_bound.to_string(),
                row.ratio_to_upper_bound.to_string(),
                c.optimum.map(|o| o.to_string()).unwrap_or_default(),
                c.alpha.to_string(),
                c.competitive_ok.map(|b| b.to_string()).unwrap_or_default(),
                row.accepted.to_string(),
                row.depot.to_string(),
            ])?;
        }
    }
    let bytes = writer.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Welfare per day and algorithm, ready to plot as one line per series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlotData {
    pub days: Vec<usize>,
    pub series: BTreeMap<String, Vec<f64>>,
}

pub fn plot_data(comparisons: &[Comparison]) -> PlotData {
    let mut series: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for c in comparisons {
        for row in &c.rows {
            series.entry(row.algorithm.clone()).or_default().push(row.welfare);
        }
        series.entry("upper-bound".into()).or_default().push(c.upper_bound);
        if let Some(opt) = c.optimum {
            series.entry("offline-exact".into()).or_default().push(opt);
        }
    }
    PlotData {
        days: (1..=comparisons.len()).collect(),
        series,
    }
}

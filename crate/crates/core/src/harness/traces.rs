use std::collections::BTreeMap;

use crate::domain::{ScenarioConfig, Series};
use crate::error::{Error, Result};

/// Parsed trace: one full-horizon series per facility. A trace without a
/// `facility` column applies to every facility.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub per_facility: BTreeMap<usize, Vec<f64>>,
    pub shared: Option<Vec<f64>>,
}

impl Trace {
    fn for_facility(&self, f: usize) -> Option<&Vec<f64>> {
        self.shared.as_ref().or_else(|| self.per_facility.get(&f))
    }
}

fn trace_error(file: &str, row: usize, message: impl Into<String>) -> Error {
    Error::Trace {
        file: file.to_string(),
        row,
        message: message.into(),
    }
}

/// Parses a trace CSV with columns `slot,value` or `facility,slot,value`.
/// Row numbers in errors count the header as row 1.
pub fn parse_trace(name: &str, csv_text: &str, horizon: usize, facilities: usize) -> Result<Trace> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(csv_text.as_bytes());
    let headers = reader.headers()?.clone();
    let column = |key: &str| headers.iter().position(|h| h.eq_ignore_ascii_case(key));
    let slot_col = column("slot").ok_or_else(|| trace_error(name, 1, "missing `slot` column"))?;
    let value_col = column("value").ok_or_else(|| trace_error(name, 1, "missing `value` column"))?;
    let facility_col = column("facility");

    let mut series: BTreeMap<usize, Vec<Option<f64>>> = BTreeMap::new();
    for (i, record) in reader.records().enumerate() {
        let row = i + 2;
        let record = record?;
        let field = |col: usize| record.get(col).unwrap_or("");
        let facility = match facility_col {
            Some(col) => field(col)
                .parse::<usize>()
                .map_err(|_| trace_error(name, row, format!("bad facility `{}`", field(col))))?,
            None => 0,
        };
        if facility_col.is_some() && facility >= facilities {
            return Err(trace_error(name, row, format!("unknown facility {facility}")));
        }
        let slot: usize = field(slot_col)
            .parse()
            .map_err(|_| trace_error(name, row, format!("bad slot `{}`", field(slot_col))))?;
        if slot >= horizon {
            return Err(trace_error(name, row, format!("slot {slot} outside 0..{horizon}")));
        }
        let value: f64 = field(value_col)
            .parse()
            .map_err(|_| trace_error(name, row, format!("bad value `{}`", field(value_col))))?;
        if !value.is_finite() {
            return Err(trace_error(name, row, format!("value {value} is not finite")));
        }
        let entry = series.entry(facility).or_insert_with(|| vec![None; horizon]);
        if entry[slot].replace(value).is_some() {
            return Err(trace_error(
                name,
                row,
                format!("duplicate slot {slot} for facility {facility}"),
            ));
        }
    }

    let mut complete = BTreeMap::new();
    for (facility, values) in series {
        let present = values.iter().filter(|v| v.is_some()).count();
        if present != horizon {
            return Err(trace_error(
                name,
                0,
                format!("facility {facility} has {present} slots, expected {horizon}"),
            ));
        }
        complete.insert(facility, values.into_iter().flatten().collect());
    }
    if facility_col.is_none() {
        return Ok(Trace {
            shared: complete.remove(&0),
            per_facility: BTreeMap::new(),
        });
    }
    Ok(Trace {
        per_facility: complete,
        shared: None,
    })
}

/// Replaces grid prices and/or solar traces in `config`. Prices must be
/// positive and solar must lie within each facility's rating.
pub fn ingest_traces(
    price_csv: Option<&str>,
    solar_csv: Option<&str>,
    config: &ScenarioConfig,
) -> Result<ScenarioConfig> {
    let mut out = config.clone();
    let horizon = config.horizon;
    let count = config.facilities.len();
    if let Some(text) = price_csv {
        let trace = parse_trace("prices", text, horizon, count)?;
        for (f, fac) in out.facilities.iter_mut().enumerate() {
            if let Some(values) = trace.for_facility(f) {
                if let Some(t) = values.iter().position(|&p| p <= 0.0) {
                    return Err(trace_error(
                        "prices",
                        0,
                        format!("facility {f} slot {t}: price {} must be > 0", values[t]),
                    ));
                }
                fac.grid_price = Series::PerSlot(values.clone());
            }
        }
    }
    if let Some(text) = solar_csv {
        let trace = parse_trace("solar", text, horizon, count)?;
        for (f, fac) in out.facilities.iter_mut().enumerate() {
            if let Some(values) = trace.for_facility(f) {
                if let Some(t) = values.iter().position(|&s| s < 0.0 || s > fac.solar_capacity) {
                    return Err(trace_error(
                        "solar",
                        0,
                        format!(
                            "facility {f} slot {t}: solar {} outside [0, {}]",
                            values[t], fac.solar_capacity
                        ),
                    ));
                }
                fac.solar = Series::PerSlot(values.clone());
            }
        }
    }
    let violations = out.validate();
    if !violations.is_empty() {
        return Err(Error::InvalidConfig(violations));
    }
    Ok(out)
}

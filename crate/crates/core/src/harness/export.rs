use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::domain::{RunReport, ScenarioConfig, Session};
use crate::error::Result;

/// SHA-256 over the canonical JSON of the config and session stream.
pub fn instance_hash(config: &ScenarioConfig, sessions: &[Session]) -> String {
    #[derive(Serialize)]
    struct Instance<'a> {
        config: &'a ScenarioConfig,
        sessions: &'a [Session],
    }
    let bytes = serde_json::to_vec(&Instance { config, sessions }).expect("instance serializes");
    hex::encode(Sha256::digest(&bytes))
}

pub fn report_json(report: &RunReport) -> Result<String> {
    Ok(serde_json::to_string_pretty(report)? + "\n")
}

/// One row per decision.
pub fn decisions_csv(report: &RunReport) -> Result<String> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record([
        "session_id",
        "start_slot",
        "origin",
        "action",
        "facility",
        "evse",
        "dwell_start",
        "dwell_end",
        "charged_kwh",
        "destination",
        "arrival_slot",
        "final_soc",
        "value",
        "utility",
        "welfare_delta",
        "candidates",
    ])?;
    let opt = |v: Option<usize>| v.map(|v| v.to_string()).unwrap_or_default();
    for d in &report.decisions {
        let s = d.schedule.as_ref();
        let plan = s.and_then(|s| s.charge.as_ref());
        let action = match (s, plan) {
            (None, _) => "depot",
            (Some(_), Some(_)) => "charge",
            (Some(_), None) => "rebalance",
        };
        writer.write_record([
            d.session_id.to_string(),
            d.start_slot.to_string(),
            d.origin.to_string(),
            action.to_string(),
            opt(plan.map(|p| p.facility)),
            opt(plan.map(|p| p.evse)),
            opt(plan.map(|p| p.dwell_start)),
            opt(plan.map(|p| p.dwell_end)),
            s.map(|s| s.charged_energy().to_string()).unwrap_or_default(),
            opt(s.map(|s| s.destination)),
            opt(s.map(|s| s.arrival_slot)),
            s.map(|s| s.final_soc.to_string()).unwrap_or_default(),
            s.map(|s| s.value.to_string()).unwrap_or_default(),
            d.utility.to_string(),
            d.welfare_delta.to_string(),
            d.candidates.to_string(),
        ])?;
    }
    let bytes = writer.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Parses a session trace with columns `id,t_minus,origin_region,soc`.
pub fn read_sessions_csv(text: &str) -> Result<Vec<Session>> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut out = Vec::new();
    for record in reader.deserialize() {
        out.push(record?);
    }
    Ok(out)
}

pub fn write_sessions_csv(sessions: &[Session]) -> Result<String> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    for s in sessions {
        writer.serialize(s)?;
    }
    let bytes = writer.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

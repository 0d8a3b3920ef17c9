use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use fleetcharge_client::Client;
use fleetcharge_core::api::{CompareRequest, Instance, OfflineResponse};
use fleetcharge_core::domain::{RunReport, ScenarioConfig, Session};
use fleetcharge_core::harness::{
    decisions_csv, read_sessions_csv, report_json, write_sessions_csv, Algorithm, ExperimentSpec, ScenarioParams,
    VerifyOptions,
};
use serde::Serialize;

use crate::{Command, Source};

pub async fn execute(client: &Client, command: Command) -> Result<ExitCode> {
    match command {
        Command::Serve { .. } => unreachable!("handled before connecting"),
        Command::Generate { source, out } => {
            let instance = load(client, &source).await?;
            let summary = client.validate(&instance).await?;
            emit(
                out.as_deref(),
                &[
                    ("config.json", pretty(&instance.config)?),
                    ("sessions.csv", write_sessions_csv(&instance.sessions)?),
                ],
                &summary,
            )?;
        }
        Command::Run { source, out } => {
            let instance = load(client, &source).await?;
            let report = client.run_online(&instance).await?;
            write_report(out.as_deref(), &report)?;
        }
        Command::RunBaseline { source, threshold, out } => {
            let threshold = if threshold > 1.0 { threshold / 100.0 } else { threshold };
            let instance = load(client, &source).await?;
            let report = client.run_baseline(&instance, threshold).await?;
            write_report(out.as_deref(), &report)?;
        }
        Command::OfflineUb { source, out } => {
            let instance = load(client, &source).await?;
            let bound = client.upper_bound(&instance).await?;
            emit(out.as_deref(), &[("offline-ub.json", pretty(&bound)?)], &bound)?;
        }
        Command::OfflineExact { source, out } => {
            let instance = load(client, &source).await?;
            let exact = client.exact(&instance).await?;
            emit(out.as_deref(), &[("offline-exact.json", pretty(&exact)?)], &exact)?;
        }
        Command::Verify {
            source,
            suite,
            grid_points,
            family,
            alpha,
            out,
        } => {
            let options = VerifyOptions {
                suite: suite.parse()?,
                grid_points,
                family: family.map(|f| f.parse()).transpose().map_err(anyhow::Error::msg)?,
                alpha,
            };
            let instance = load(client, &source).await?;
            let report = client.verify(&instance, &options).await?;
            for check in &report.checks {
                let mark = if check.passed { "ok  " } else { "FAIL" };
                eprintln!("{mark} {}: {}", check.name, check.detail);
            }
            emit(out.as_deref(), &[("verify.json", pretty(&report)?)], &report)?;
            if !report.passed {
                return Ok(ExitCode::from(2));
            }
        }
        Command::Compare {
            reports,
            upper_bound,
            optimum,
            alpha,
            out,
        } => {
            let reports = reports
                .iter()
                .map(|p| read_json::<RunReport>(p))
                .collect::<Result<Vec<_>>>()?;
            let request = CompareRequest {
                reports,
                upper_bound: welfare_arg(&upper_bound)?,
                optimum: optimum.as_deref().map(welfare_arg).transpose()?,
                alpha,
            };
            let result = client.compare(&request).await?;
            emit(
                out.as_deref(),
                &[
                    ("comparison.csv", result.csv.clone()),
                    ("comparison.json", pretty(&result.comparison)?),
                    ("plot.json", pretty(&result.plot)?),
                ],
                &result.comparison,
            )?;
        }
        Command::Experiment {
            seed,
            preset,
            repetitions,
            exact,
            workers,
            out,
        } => {
            let mut spec = ExperimentSpec::new(seed, ScenarioParams::preset(&preset)?, repetitions);
            if exact {
                spec.algorithms.push(Algorithm::OfflineExact);
            }
            spec.workers = workers;
            let summary = client.experiment(&spec).await?;
            emit(
                out.as_deref(),
                &[
                    ("comparison.csv", summary.csv.clone()),
                    ("comparisons.json", pretty(&summary.comparisons)?),
                    ("plot.json", pretty(&summary.plot)?),
                ],
                &summary.plot,
            )?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

async fn load(client: &Client, source: &Source) -> Result<Instance> {
    let mut instance = match (&source.config, source.seed) {
        (Some(path), _) => read_instance(path, source.sessions.as_deref())?,
        (None, Some(seed)) => {
            let generated = client.generate(seed, &ScenarioParams::preset(&source.preset)?).await?;
            Instance {
                config: generated.config,
                sessions: generated.sessions,
            }
        }
        (None, None) => bail!("give either --seed or --config"),
    };
    if source.prices.is_some() || source.solar.is_some() {
        let prices = source.prices.as_deref().map(read_text).transpose()?;
        let solar = source.solar.as_deref().map(read_text).transpose()?;
        instance.config = client.ingest_traces(&instance.config, prices, solar).await?;
    }
    Ok(instance)
}

fn read_instance(config: &Path, sessions: Option<&Path>) -> Result<Instance> {
    let text = read_text(config)?;
    let value: serde_json::Value =
        serde_json::from_str(&text).with_context(|| format!("{} is not JSON", config.display()))?;
    if value.get("sessions").is_some() && value.get("config").is_some() {
        if sessions.is_some() {
            bail!("{} already holds sessions; drop --sessions", config.display());
        }
        return serde_json::from_value(value).with_context(|| format!("reading instance {}", config.display()));
    }
    let config: ScenarioConfig =
        serde_json::from_value(value).with_context(|| format!("reading config {}", config.display()))?;
    let Some(path) = sessions else {
        bail!("--config needs --sessions unless it holds a whole instance");
    };
    let text = read_text(path)?;
    let sessions: Vec<Session> = if path.extension().is_some_and(|e| e == "json") {
        serde_json::from_str(&text)?
    } else {
        read_sessions_csv(&text).with_context(|| format!("reading sessions {}", path.display()))?
    };
    Ok(Instance { config, sessions })
}

/// A literal number or the `welfare` field of an offline result file.
fn welfare_arg(arg: &str) -> Result<f64> {
    if let Ok(v) = arg.parse::<f64>() {
        return Ok(v);
    }
    Ok(read_json::<OfflineResponse>(Path::new(arg))?.welfare)
}

fn write_report(out: Option<&Path>, report: &RunReport) -> Result<()> {
    let files = [
        ("report.json", report_json(report)?),
        ("decisions.csv", decisions_csv(report)?),
    ];
    #[derive(Serialize)]
    struct Summary<'a> {
        algorithm: &'a str,
        instance_hash: &'a str,
        welfare: f64,
        accepted: usize,
        depot: usize,
    }
    let summary = Summary {
        algorithm: &report.algorithm,
        instance_hash: &report.instance_hash,
        welfare: report.welfare,
        accepted: report.accepted,
        depot: report.depot,
    };
    emit(out, &files, &summary)
}

/// Writes `files` into `out`, or prints `stdout` as JSON when there is no
/// output directory.
fn emit<T: Serialize>(out: Option<&Path>, files: &[(&str, String)], stdout: &T) -> Result<()> {
    match out {
        Some(dir) => {
            fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            for (name, body) in files {
                let path: PathBuf = dir.join(name);
                fs::write(&path, body).with_context(|| format!("writing {}", path.display()))?;
                eprintln!("wrote {}", path.display());
            }
            println!("{}", serde_json::to_string(stdout)?);
        }
        None => println!("{}", pretty(stdout)?.trim_end()),
    }
    Ok(())
}

fn pretty<T: Serialize>(value: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    serde_json::from_str(&read_text(path)?).with_context(|| format!("parsing {}", path.display()))
}

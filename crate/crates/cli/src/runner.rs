//! Runs a scenario and writes its output directory.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use thiserror::Error;

use oppsim_core::engine::{EngineError, Purpose, RngStream};
use oppsim_core::metrics::{Ledger, MetricsReport};
use oppsim_core::mobility::{parse_bonnmotion, Mobility, MobilityError};
use oppsim_core::{Point, SimConfig, Simulation};

use crate::config::{serialize_scenario, ConfigError, MobilitySpec, Scenario};
use crate::eventlog::{write_event_log_with_header, EventLogError};

pub const OUTPUT_DIR_ENV: &str = "OPPSIM_OUTPUT_DIR";
pub const EVENTS_FILE: &str = "events.csv";
pub const REPORT_FILE: &str = "report.json";
pub const CDF_FILE: &str = "delay_cdf.txt";
pub const SCENARIO_FILE: &str = "scenario.cfg";
/// Present in an output directory whose run did not complete.
pub const PARTIAL_MARKER: &str = "PARTIAL";

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("mobility: {0}")]
    Mobility(#[from] MobilityError),
    #[error("engine: {0}")]
    Engine(#[from] EngineError),
    #[error("event log: {0}")]
    EventLog(#[from] EventLogError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("report: {0}")]
    Json(#[from] serde_json::Error),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> RunError + '_ {
    move |source| RunError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Movement of every node for `[0, s.t_end]`.
pub fn build_mobility(s: &Scenario) -> Result<Mobility, RunError> {
    let n = s.node_count;
    let m = match &s.mobility {
        MobilitySpec::Rwp(cfg) => Mobility::random_waypoint(cfg, n, s.t_end, s.seed)?,
        MobilitySpec::Swim(cfg) => Mobility::swim(cfg, n, s.t_end, s.seed)?,
        MobilitySpec::Trace { path, dims } => {
            let text = fs::read_to_string(path).map_err(io_err(path))?;
            let mut trajectories = parse_bonnmotion::<f64>(&text, *dims)?;
            if trajectories.len() < n {
                return Err(ConfigError::InvalidValue {
                    key: "mobility.trace_path".into(),
                    line: 0,
                    reason: format!("trace has {} nodes, need {n}", trajectories.len()),
                }
                .into());
            }
            trajectories.truncate(n);
            Mobility::new(trajectories)
        }
        MobilitySpec::Static { width, height } => {
            let points: Vec<Point> = (0..n)
                .map(|i| {
                    let mut rng = RngStream::indexed(s.seed, Purpose::Mobility, i as u32);
                    Point::planar(rng.unit() * width, rng.unit() * height)
                })
                .collect();
            Mobility::stationary(&points)
        }
    };
    Ok(m)
}

pub fn sim_config(s: &Scenario) -> SimConfig {
    let mut cfg = SimConfig::new(s.seed, s.forwarding, s.cache_capacity);
    cfg.link = s.link;
    cfg.app = Some(s.app.clone());
    cfg
}

/// Runs the simulation in memory.
pub fn simulate(s: &Scenario) -> Result<Ledger, RunError> {
    let mobility = build_mobility(s)?;
    let mut sim = Simulation::new(sim_config(s), mobility)?;
    Ok(sim.run_until(s.t_end)?)
}

/// Two columns, `delay_seconds cumulative_fraction`.
pub fn format_cdf(cdf: &[(f64, f64)]) -> String {
    let mut out = String::from("# delay_seconds cumulative_fraction\n");
    for (d, f) in cdf {
        out.push_str(&format!("{d} {f}\n"));
    }
    out
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub dir: PathBuf,
    pub report: MetricsReport,
}

/// Runs `s` and writes the event log, report, delay CDF and the effective
/// scenario into `dir`. On failure a [`PARTIAL_MARKER`] file holding the
/// error is left in `dir`.
pub fn run_scenario(
    s: &Scenario,
    defaults: &[(String, String)],
    dir: &Path,
) -> Result<RunOutput, RunError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let marker = dir.join(PARTIAL_MARKER);
    fs::write(&marker, "run in progress\n").map_err(io_err(&marker))?;
    match write_outputs(s, defaults, dir) {
        Ok(report) => {
            fs::remove_file(&marker).map_err(io_err(&marker))?;
            Ok(RunOutput {
                dir: dir.to_path_buf(),
                report,
            })
        }
        Err(e) => {
            // best effort: the original error matters more
            let _ = fs::write(&marker, format!("{e}\n"));
            Err(e)
        }
    }
}

fn write_outputs(
    s: &Scenario,
    defaults: &[(String, String)],
    dir: &Path,
) -> Result<MetricsReport, RunError> {
    let scenario_path = dir.join(SCENARIO_FILE);
    fs::write(&scenario_path, serialize_scenario(s)).map_err(io_err(&scenario_path))?;

    let ledger = simulate(s)?;
    let report = MetricsReport::from_ledger(&ledger);

    let events_path = dir.join(EVENTS_FILE);
    let file = fs::File::create(&events_path).map_err(io_err(&events_path))?;
    let header: Vec<(String, String)> = defaults
        .iter()
        .map(|(k, v)| (format!("default {k}"), v.clone()))
        .collect();
    let mut w = BufWriter::new(file);
    write_event_log_with_header(&ledger, &header, &mut w)?;
    w.flush().map_err(io_err(&events_path))?;

    write_report_files(&report, dir)?;
    Ok(report)
}

/// Writes `report.json` and `delay_cdf.txt`.
pub fn write_report_files(report: &MetricsReport, dir: &Path) -> Result<(), RunError> {
    let report_path = dir.join(REPORT_FILE);
    let mut json = serde_json::to_string_pretty(report)?;
    json.push('\n');
    fs::write(&report_path, json).map_err(io_err(&report_path))?;
    let cdf_path = dir.join(CDF_FILE);
    fs::write(&cdf_path, format_cdf(&report.delay_cdf)).map_err(io_err(&cdf_path))?;
    Ok(())
}

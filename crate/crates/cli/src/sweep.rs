//! Cartesian parameter sweeps over a base scenario.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use thiserror::Error;

use oppsim_core::metrics::MetricsReport;

use crate::config::{parse_scenario, with_override, ConfigError, SWEEP_KEYS};
use crate::runner::{format_cdf, run_scenario, RunError};

pub const SUMMARY_FILE: &str = "summary.tsv";

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("axis {0:?}: expected `key=v1,v2,...`")]
    AxisSyntax(String),
    #[error("`{0}` cannot be swept; allowed: {allowed}", allowed = SWEEP_KEYS.join(", "))]
    AxisKey(String),
    #[error("axis `{0}` given twice")]
    DuplicateAxis(String),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Axis {
    pub key: String,
    pub values: Vec<String>,
}

impl std::str::FromStr for Axis {
    type Err = SweepError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (k, vs) = s
            .split_once('=')
            .ok_or_else(|| SweepError::AxisSyntax(s.to_string()))?;
        let key = k.trim().to_string();
        if !SWEEP_KEYS.contains(&key.as_str()) {
            return Err(SweepError::AxisKey(key));
        }
        let values: Vec<String> = vs
            .split(',')
            .map(|v| v.trim().to_string())
            .filter(|v| !v.is_empty())
            .collect();
        if values.is_empty() {
            return Err(SweepError::AxisSyntax(s.to_string()));
        }
        Ok(Axis { key, values })
    }
}

/// One combination of axis values.
#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub assignments: Vec<(String, String)>,
}

impl Cell {
    /// Directory-safe name, e.g. `app.traffic=uniform_seed=3`.
    pub fn name(&self) -> String {
        if self.assignments.is_empty() {
            return "base".to_string();
        }
        self.assignments
            .iter()
            .map(|(k, v)| {
                let v: String = v
                    .chars()
                    .map(|c| {
                        if c.is_ascii_alphanumeric() || c == '.' || c == '-' {
                            c
                        } else {
                            '_'
                        }
                    })
                    .collect();
                format!("{k}={v}")
            })
            .collect::<Vec<_>>()
            .join("_")
    }
}

pub fn cells(axes: &[Axis]) -> Result<Vec<Cell>, SweepError> {
    for (i, a) in axes.iter().enumerate() {
        if axes[..i].iter().any(|b| b.key == a.key) {
            return Err(SweepError::DuplicateAxis(a.key.clone()));
        }
    }
    let mut out = vec![Cell {
        assignments: Vec::new(),
    }];
    for axis in axes {
        out = out
            .into_iter()
            .flat_map(|c| {
                axis.values.iter().map(move |v| {
                    let mut assignments = c.assignments.clone();
                    assignments.push((axis.key.clone(), v.clone()));
                    Cell { assignments }
                })
            })
            .collect();
    }
    Ok(out)
}

#[derive(Debug)]
pub struct CellOutcome {
    pub cell: Cell,
    pub dir: PathBuf,
    pub result: Result<MetricsReport, RunError>,
}

#[derive(Debug)]
pub struct SweepOutcome {
    pub cells: Vec<CellOutcome>,
}

impl SweepOutcome {
    pub fn failures(&self) -> impl Iterator<Item = &CellOutcome> {
        self.cells.iter().filter(|c| c.result.is_err())
    }
}

fn cell_text(base: &str, cell: &Cell) -> String {
    cell.assignments
        .iter()
        .fold(base.to_string(), |t, (k, v)| with_override(&t, k, v))
}

/// Runs every cell (in parallel) under `out_dir/<cell name>/` and writes
/// `summary.tsv` plus one `cdf_<cell name>.txt` per successful cell into
/// `out_dir`. A failing cell does not stop the others.
pub fn sweep(
    base_text: &str,
    base_dir: Option<&Path>,
    axes: &[Axis],
    out_dir: &Path,
) -> Result<SweepOutcome, SweepError> {
    // surface errors in the base config once instead of once per cell
    parse_scenario(base_text, base_dir)?;
    let cells = cells(axes)?;
    fs::create_dir_all(out_dir).map_err(|source| SweepError::Io {
        path: out_dir.to_path_buf(),
        source,
    })?;
    let outcomes: Vec<CellOutcome> = cells
        .into_par_iter()
        .map(|cell| {
            let dir = out_dir.join(cell.name());
            let result = parse_scenario(&cell_text(base_text, &cell), base_dir)
                .map_err(RunError::from)
                .and_then(|p| run_scenario(&p.scenario, &p.defaults, &dir))
                .map(|o| o.report);
            CellOutcome { cell, dir, result }
        })
        .collect();
    let outcome = SweepOutcome { cells: outcomes };
    write_summary(&outcome, axes, out_dir)?;
    Ok(outcome)
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_else(|| "NA".into())
}

/// One row per cell; the metric columns follow the mobility comparison
/// layout (delivery rate, delay, contacts, contact duration).
pub fn summary_table(outcome: &SweepOutcome, axes: &[Axis]) -> String {
    let mut out = String::new();
    for a in axes {
        let _ = write!(out, "{}\t", a.key);
    }
    out.push_str(
        "status\tdelivery_ratio\tavg_delivery_time\tcontact_count\tavg_contact_time\tliked_ratio\tnonliked_ratio\tcov\tgenerated\tdelivered\n",
    );
    for c in &outcome.cells {
        for (_, v) in &c.cell.assignments {
            let _ = write!(out, "{v}\t");
        }
        match &c.result {
            Ok(r) => {
                let _ = writeln!(
                    out,
                    "ok\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
                    opt(r.delivery_ratio),
                    opt(r.avg_delivery_time),
                    r.contact_count,
                    opt(r.avg_contact_time),
                    opt(r.liked_ratio),
                    opt(r.nonliked_ratio),
                    r.cov,
                    r.generated,
                    r.delivered
                );
            }
            Err(e) => {
                let msg = e.to_string().replace(['\t', '\n'], " ");
                let _ = writeln!(out, "failed: {msg}\tNA\tNA\tNA\tNA\tNA\tNA\tNA\tNA\tNA");
            }
        }
    }
    out
}

fn write_summary(outcome: &SweepOutcome, axes: &[Axis], out_dir: &Path) -> Result<(), SweepError> {
    let write = |name: String, text: String| {
        let path = out_dir.join(name);
        fs::write(&path, text).map_err(|source| SweepError::Io { path, source })
    };
    for c in &outcome.cells {
        if let Ok(r) = &c.result {
            write(
                format!("cdf_{}.txt", c.cell.name()),
                format_cdf(&r.delay_cdf),
            )?;
        }
    }
    write(SUMMARY_FILE.to_string(), summary_table(outcome, axes))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_axis() {
        let a: Axis = "seed=1, 2,3".parse().unwrap();
        assert_eq!(a.values, ["1", "2", "3"]);
        assert!(matches!(
            "link.range=1".parse::<Axis>(),
            Err(SweepError::AxisKey(_))
        ));
        assert!(matches!(
            "seed".parse::<Axis>(),
            Err(SweepError::AxisSyntax(_))
        ));
    }

    #[test]
    fn cartesian_product() {
        let axes = [
            "app.traffic=constant,uniform,exponential".parse().unwrap(),
            "forwarding.cache_capacity=1000,2000".parse().unwrap(),
        ];
        let cs = cells(&axes).unwrap();
        assert_eq!(cs.len(), 6);
        assert_eq!(
            cs[1].name(),
            "app.traffic=constant_forwarding.cache_capacity=2000"
        );
        let mut names: Vec<_> = cs.iter().map(Cell::name).collect();
        names.dedup();
        assert_eq!(names.len(), 6);
    }

    #[test]
    fn duplicate_axis() {
        let axes: [Axis; 2] = ["seed=1".parse().unwrap(), "seed=2".parse().unwrap()];
        assert!(matches!(cells(&axes), Err(SweepError::DuplicateAxis(_))));
    }
}

//! Machine-readable run report and CSV dumps.
//!
//! `report.json` is byte-stable for a fixed config and seed: it carries no
//! wall-clock data (timings go to stderr) and every collection is emitted in
//! deterministic order.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use schwarz_core::{ComparisonRecord, GridDomain};

use crate::config::{ExperimentConfig, RunError};
use crate::suites::SuiteOutcome;

#[derive(Serialize)]
pub struct RunReport<'a> {
    pub schema: u32,
    pub config: &'a ExperimentConfig,
    pub grid: GridMeta,
    pub suites: Vec<SuiteReport<'a>>,
    pub overall: &'static str,
}

#[derive(Serialize)]
pub struct GridMeta {
    pub h: f64,
    pub cells: usize,
    pub area: f64,
    pub perimeter: f64,
    pub raster: [usize; 2],
}

#[derive(Serialize)]
pub struct SuiteReport<'a> {
    pub name: &'static str,
    pub records: &'a [ComparisonRecord],
    #[serde(skip_serializing_if = "serde_json::Value::is_null")]
    pub extra: &'a serde_json::Value,
}

/// Overall verdict: holds iff every asserted record holds; probe records
/// never participate.
pub fn overall_verdict(outcomes: &[SuiteOutcome]) -> &'static str {
    let ok = outcomes
        .iter()
        .flat_map(|o| o.records.iter())
        .all(|r| r.is_probe() || r.holds());
    if ok {
        "holds"
    } else {
        "violated"
    }
}

pub fn assemble<'a>(
    config: &'a ExperimentConfig,
    domain: &GridDomain,
    outcomes: &'a [SuiteOutcome],
) -> RunReport<'a> {
    let (nx, ny) = domain.raster_size();
    RunReport {
        schema: 1,
        config,
        grid: GridMeta {
            h: domain.spacing(),
            cells: domain.n_cells(),
            area: domain.area(),
            perimeter: domain.perimeter(),
            raster: [nx, ny],
        },
        suites: outcomes
            .iter()
            .map(|o| SuiteReport { name: o.name, records: &o.records, extra: &o.extra })
            .collect(),
        overall: overall_verdict(outcomes),
    }
}

pub fn write_outputs(
    out_dir: &Path,
    report: &RunReport,
    outcomes: &[SuiteOutcome],
) -> Result<(), RunError> {
    let io = |e: std::io::Error| RunError::Runtime(format!("writing outputs: {e}"));
    fs::create_dir_all(out_dir).map_err(io)?;
    let json = serde_json::to_string_pretty(report).map_err(RunError::runtime)?;
    fs::write(out_dir.join("report.json"), json + "\n").map_err(io)?;

    let has_profiles = outcomes.iter().any(|o| !o.profiles.is_empty());
    if has_profiles {
        let dir = out_dir.join("profiles");
        fs::create_dir_all(&dir).map_err(io)?;
        for o in outcomes {
            for p in &o.profiles {
                let mut f =
                    fs::File::create(dir.join(format!("{}__{}.csv", o.name, p.name))).map_err(io)?;
                writeln!(f, "s,value").map_err(io)?;
                for (s, v) in &p.rows {
                    writeln!(f, "{s},{v}").map_err(io)?;
                }
            }
        }
    }
    let has_solutions = outcomes.iter().any(|o| !o.solutions.is_empty());
    if has_solutions {
        let dir = out_dir.join("solutions");
        fs::create_dir_all(&dir).map_err(io)?;
        for o in outcomes {
            for s in &o.solutions {
                let mut f =
                    fs::File::create(dir.join(format!("{}.csv", s.name))).map_err(io)?;
                writeln!(f, "x,y,u").map_err(io)?;
                for (x, y, u) in &s.rows {
                    writeln!(f, "{x},{y},{u}").map_err(io)?;
                }
            }
        }
    }
    Ok(())
}

//! Report documents and their JSON/CSV encodings.
//!
//! Latencies are emitted in milliseconds rounded to six significant digits;
//! rates and utilizations are emitted unrounded.

use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::error::{CliError, Result};
use crate::experiment::{AnalyticCutoff, Crossover, PointResult, SideStats, SweepResult};
use crate::scenario::Scenario;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Format {
    #[default]
    Json,
    Csv,
}

/// Seconds to milliseconds, rounded to six significant digits.
pub fn ms(seconds: f64) -> f64 {
    round_sig6(seconds * 1e3)
}

pub fn round_sig6(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.5e}").parse().unwrap_or(x)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SideReport {
    pub mean_ms: f64,
    pub p50_ms: f64,
    pub p95_ms: f64,
    pub p99_ms: f64,
    /// Confidence half-width of the mean.
    pub ci_ms: f64,
    pub p95_ci_ms: f64,
    pub mean_wait_ms: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub measured_utilization: Option<f64>,
    pub requests: usize,
}

impl From<&SideStats> for SideReport {
    fn from(s: &SideStats) -> Self {
        Self {
            mean_ms: ms(s.mean.mean),
            p50_ms: ms(s.p50),
            p95_ms: ms(s.p95.mean),
            p99_ms: ms(s.p99),
            ci_ms: ms(s.mean.half_width),
            p95_ci_ms: ms(s.p95.half_width),
            mean_wait_ms: ms(s.mean_wait),
            measured_utilization: s.measured_utilization,
            requests: s.count,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointReport {
    pub rate: f64,
    pub rho_edge: f64,
    pub warmup_s: f64,
    pub edge: SideReport,
    pub cloud: SideReport,
}

impl From<&PointResult> for PointReport {
    fn from(p: &PointResult) -> Self {
        Self {
            rate: p.rate,
            rho_edge: p.rho_edge,
            warmup_s: p.warmup_s,
            edge: (&p.edge).into(),
            cloud: (&p.cloud).into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepReport {
    pub scenario: Scenario,
    pub seed: u64,
    pub points: Vec<PointReport>,
    pub crossover: Crossover,
    pub analytic: AnalyticCutoff,
}

impl SweepReport {
    pub fn new(scenario: &Scenario, result: &SweepResult) -> Self {
        Self {
            scenario: scenario.resolved(),
            seed: scenario.seed,
            points: result.points.iter().map(PointReport::from).collect(),
            crossover: result.crossover.clone(),
            analytic: result.analytic,
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "rate,rho_edge,edge_mean_ms,edge_p50_ms,edge_p95_ms,edge_p99_ms,edge_ci_ms,\
             cloud_mean_ms,cloud_p50_ms,cloud_p95_ms,cloud_p99_ms,cloud_ci_ms\n",
        );
        for p in &self.points {
            out.push_str(&format!("{},{},{},{}\n", p.rate, p.rho_edge, side_csv(&p.edge), side_csv(&p.cloud)));
        }
        out
    }
}

fn side_csv(s: &SideReport) -> String {
    format!("{},{},{},{},{}", s.mean_ms, s.p50_ms, s.p95_ms, s.p99_ms, s.ci_ms)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SiteReport {
    pub site: usize,
    #[serde(flatten)]
    pub stats: Option<SideReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulateReport {
    pub scenario: Scenario,
    pub seed: u64,
    #[serde(flatten)]
    pub point: PointReport,
    pub sites: Vec<SiteReport>,
    pub analytic: AnalyticCutoff,
}

impl SimulateReport {
    pub fn new(scenario: &Scenario, point: &PointResult, analytic: AnalyticCutoff) -> Self {
        Self {
            scenario: scenario.resolved(),
            seed: scenario.seed,
            point: point.into(),
            sites: point
                .sites
                .iter()
                .enumerate()
                .map(|(site, s)| SiteReport {
                    site,
                    stats: s.as_ref().map(SideReport::from),
                })
                .collect(),
            analytic,
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("station,mean_ms,p50_ms,p95_ms,p99_ms,ci_ms\n");
        out.push_str(&format!("edge,{}\n", side_csv(&self.point.edge)));
        out.push_str(&format!("cloud,{}\n", side_csv(&self.point.cloud)));
        for s in &self.sites {
            if let Some(stats) = &s.stats {
                out.push_str(&format!("site-{},{}\n", s.site, side_csv(stats)));
            }
        }
        out
    }
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    Ok(text)
}

/// Writes `contents` to `path` through a temporary file in the same
/// directory, so readers never observe a partial report.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| CliError::io(dir, e))?;
    tmp.write_all(contents).map_err(|e| CliError::io(path, e))?;
    tmp.flush().map_err(|e| CliError::io(path, e))?;
    tmp.persist(path).map_err(|e| CliError::io(path, e.error))?;
    Ok(())
}

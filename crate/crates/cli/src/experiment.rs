//! Replicated edge-versus-cloud runs, sweep aggregation and crossover
//! detection.

use edge_inversion::analytic::{cutoff_utilization, to_service_units, ConstantMode};
use edge_inversion::distributions::{derive_seed, RandomStream};
use edge_inversion::simulator::{run_edge_vs_cloud, Comparison, LatencySummary, SimConfig, Workload};
use edge_inversion::workload::{generate_arrivals, split_by_sites};
use log::info;
use serde::Serialize;

use crate::error::{CliError, Result};
use crate::scenario::Scenario;

const SPLIT_STREAM: u64 = 0x4000;

/// Builds the per-site arrival streams of one replication.
///
/// Without skew weights every site runs its own process at `rate`. With
/// weights, one aggregate process at `k_sites * rate` is split across sites.
pub fn build_workload(scenario: &Scenario, rate: f64, seed: u64) -> Result<Workload> {
    let horizon = scenario.horizon_s;
    let per_site = match &scenario.skew_weights {
        None => (0..scenario.k_sites)
            .map(|site| {
                let plan = scenario.arrival.plan(rate, horizon)?;
                Ok(generate_arrivals(&plan, &mut RandomStream::new(seed, u64::from(site)))?)
            })
            .collect::<Result<Vec<_>>>()?,
        Some(weights) => {
            let plan = scenario.arrival.plan(rate * f64::from(scenario.k_sites), horizon)?;
            let epochs = generate_arrivals(&plan, &mut RandomStream::new(seed, 0))?;
            split_by_sites(&epochs, weights, &mut RandomStream::new(seed, SPLIT_STREAM))?
        }
    };
    Ok(Workload::from_sites(&per_site))
}

pub fn replication_seed(scenario: &Scenario, rep: u32) -> u64 {
    derive_seed(scenario.seed, u64::from(rep))
}

/// Runs a single replication at `rate` requests per second per site.
pub fn run_replication(scenario: &Scenario, rate: f64, rep: u32) -> Result<Comparison> {
    scenario.check_stable(rate)?;
    let seed = replication_seed(scenario, rep);
    let workload = build_workload(scenario, rate, seed)?;
    let config = SimConfig {
        warmup_s: scenario.warmup_for(rate)?,
        horizon_s: scenario.horizon_s,
        seed,
    };
    Ok(run_edge_vs_cloud(
        &scenario.edge_deployment(),
        &scenario.cloud_deployment(),
        &workload,
        &config,
    )?)
}

/// Headline metrics of one replication, in seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RepMetrics {
    pub edge_mean: f64,
    pub edge_p95: f64,
    pub cloud_mean: f64,
    pub cloud_p95: f64,
}

/// Across-replication mean and confidence half-width (2 standard errors).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub mean: f64,
    pub half_width: f64,
}

impl Estimate {
    pub fn of(values: &[f64]) -> Self {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let half_width = if values.len() > 1 {
            let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
            2.0 * (var / n).sqrt()
        } else {
            0.0
        };
        Self { mean, half_width }
    }

    pub fn lower(&self) -> f64 {
        self.mean - self.half_width
    }

    pub fn upper(&self) -> f64 {
        self.mean + self.half_width
    }
}

/// Replication-averaged view of one side (edge aggregate, cloud, or a site).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SideStats {
    pub mean: Estimate,
    pub p50: f64,
    pub p95: Estimate,
    pub p99: f64,
    pub mean_wait: f64,
    pub measured_utilization: Option<f64>,
    pub count: usize,
}

impl SideStats {
    pub fn from_summaries(summaries: &[&LatencySummary]) -> Self {
        let avg = |f: fn(&LatencySummary) -> f64| summaries.iter().map(|s| f(s)).sum::<f64>() / summaries.len() as f64;
        let utils: Option<Vec<f64>> = summaries.iter().map(|s| s.measured_utilization).collect();
        Self {
            mean: Estimate::of(&summaries.iter().map(|s| s.mean).collect::<Vec<_>>()),
            p50: avg(|s| s.p50),
            p95: Estimate::of(&summaries.iter().map(|s| s.p95).collect::<Vec<_>>()),
            p99: avg(|s| s.p99),
            mean_wait: avg(|s| s.mean_wait),
            measured_utilization: utils.map(|u| u.iter().sum::<f64>() / u.len() as f64),
            count: summaries.iter().map(|s| s.count).sum(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointResult {
    pub rate: f64,
    pub rho_edge: f64,
    pub warmup_s: f64,
    pub edge: SideStats,
    pub cloud: SideStats,
    /// Per-site statistics; `None` for a site that saw no requests.
    pub sites: Vec<Option<SideStats>>,
    pub reps: Vec<RepMetrics>,
}

/// Summaries kept from one replication once its records are dropped.
struct RepSummary {
    edge: LatencySummary,
    cloud: LatencySummary,
    sites: Vec<Option<LatencySummary>>,
}

impl RepSummary {
    fn from_comparison(c: Comparison) -> Self {
        let sites = c.edge.stations.into_iter().map(|s| s.summary).collect();
        Self {
            edge: c.edge_aggregate,
            cloud: c.cloud_summary,
            sites,
        }
    }
}

/// Runs every replication at one load level.
pub fn run_point(scenario: &Scenario, rate: f64) -> Result<PointResult> {
    scenario.check_stable(rate)?;
    let reps = (0..scenario.replications)
        .map(|rep| run_replication(scenario, rate, rep).map(RepSummary::from_comparison))
        .collect::<Result<Vec<_>>>()?;
    let edge: Vec<&LatencySummary> = reps.iter().map(|r| &r.edge).collect();
    let cloud: Vec<&LatencySummary> = reps.iter().map(|r| &r.cloud).collect();
    let sites = (0..scenario.k_sites as usize)
        .map(|site| {
            let per_rep: Option<Vec<&LatencySummary>> = reps.iter().map(|r| r.sites[site].as_ref()).collect();
            per_rep.map(|s| SideStats::from_summaries(&s))
        })
        .collect();
    let point = PointResult {
        rate,
        rho_edge: scenario.rho_edge(rate),
        warmup_s: scenario.warmup_for(rate)?,
        edge: SideStats::from_summaries(&edge),
        cloud: SideStats::from_summaries(&cloud),
        sites,
        reps: reps
            .iter()
            .map(|r| RepMetrics {
                edge_mean: r.edge.mean,
                edge_p95: r.edge.p95,
                cloud_mean: r.cloud.mean,
                cloud_p95: r.cloud.p95,
            })
            .collect(),
    };
    info!(
        "rate {rate}: edge mean {:.4} s, cloud mean {:.4} s",
        point.edge.mean.mean, point.cloud.mean.mean
    );
    Ok(point)
}

/// Rate at which `diffs` (edge minus cloud) first turns positive, linearly
/// interpolated between the bracketing points. `None` without a sign change
/// from `<= 0` to `> 0`.
pub fn interpolated_crossover(rates: &[f64], diffs: &[f64]) -> Option<f64> {
    rates
        .windows(2)
        .zip(diffs.windows(2))
        .find(|(_, d)| d[0] <= 0.0 && d[1] > 0.0)
        .map(|(r, d)| r[0] + (r[1] - r[0]) * (-d[0]) / (d[1] - d[0]))
}

/// Smallest rate at which the edge is worse with non-overlapping intervals.
pub fn significant_crossover(rates: &[f64], edge: &[Estimate], cloud: &[Estimate]) -> Option<f64> {
    rates
        .iter()
        .zip(edge.iter().zip(cloud))
        .find(|(_, (e, c))| e.lower() > c.upper())
        .map(|(r, _)| *r)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RepCrossover {
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean_rate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p95_rate: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Crossover {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean_rate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p95_rate: Option<f64>,
    /// Crossover rates expressed as edge utilization.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean_rho: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p95_rho: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean_rate_significant: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p95_rate_significant: Option<f64>,
    /// Whether the tail inverts no later than the mean; absent unless both
    /// crossovers exist.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p95_le_mean: Option<bool>,
    pub replications: Vec<RepCrossover>,
}

/// Analytic cutoff utilizations for the scenario's network gap; the gap is
/// measured in mean service times.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AnalyticCutoff {
    pub k: u32,
    pub delta_n_service_units: f64,
    pub cutoff_paper: f64,
    pub cutoff_exact: f64,
}

impl AnalyticCutoff {
    pub fn for_scenario(scenario: &Scenario) -> Result<Self> {
        let dn = to_service_units(scenario.delta_n_s()?, scenario.mu_req_per_s);
        Ok(Self {
            k: scenario.k_sites,
            delta_n_service_units: dn,
            cutoff_paper: cutoff_utilization(scenario.k_sites, dn, ConstantMode::Paper),
            cutoff_exact: cutoff_utilization(scenario.k_sites, dn, ConstantMode::Exact),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub points: Vec<PointResult>,
    pub crossover: Crossover,
    pub analytic: AnalyticCutoff,
}

pub fn sweep_rates(scenario: &Scenario) -> Result<Vec<f64>> {
    let rates = scenario
        .rate_sweep_req_per_s
        .clone()
        .ok_or_else(|| CliError::Config("sweep requires rate_sweep_req_per_s".into()))?;
    if rates.len() < 2 {
        return Err(CliError::Config("rate_sweep_req_per_s needs at least 2 rates".into()));
    }
    Ok(rates)
}

/// Runs the full sweep. Every load level reuses the same replication seeds.
pub fn run_sweep(scenario: &Scenario) -> Result<SweepResult> {
    let rates = sweep_rates(scenario)?;
    for &rate in &rates {
        scenario.check_stable(rate)?;
        scenario.warmup_for(rate)?;
    }
    let points = rates
        .iter()
        .map(|&rate| run_point(scenario, rate))
        .collect::<Result<Vec<_>>>()?;
    let crossover = crossover_of(scenario, &rates, &points);
    Ok(SweepResult {
        points,
        crossover,
        analytic: AnalyticCutoff::for_scenario(scenario)?,
    })
}

fn crossover_of(scenario: &Scenario, rates: &[f64], points: &[PointResult]) -> Crossover {
    let diffs = |f: fn(&PointResult) -> f64| points.iter().map(f).collect::<Vec<_>>();
    let mean_rate = interpolated_crossover(rates, &diffs(|p| p.edge.mean.mean - p.cloud.mean.mean));
    let p95_rate = interpolated_crossover(rates, &diffs(|p| p.edge.p95.mean - p.cloud.p95.mean));
    let est = |f: fn(&SideStats) -> Estimate, side: fn(&PointResult) -> &SideStats| {
        points.iter().map(|p| f(side(p))).collect::<Vec<_>>()
    };
    let mean_rate_significant = significant_crossover(rates, &est(|s| s.mean, |p| &p.edge), &est(|s| s.mean, |p| &p.cloud));
    let p95_rate_significant = significant_crossover(rates, &est(|s| s.p95, |p| &p.edge), &est(|s| s.p95, |p| &p.cloud));
    let replications = (0..scenario.replications)
        .map(|rep| {
            let r = rep as usize;
            let of = |f: fn(&RepMetrics) -> f64| points.iter().map(|p| f(&p.reps[r])).collect::<Vec<_>>();
            RepCrossover {
                seed: replication_seed(scenario, rep),
                mean_rate: interpolated_crossover(rates, &of(|m| m.edge_mean - m.cloud_mean)),
                p95_rate: interpolated_crossover(rates, &of(|m| m.edge_p95 - m.cloud_p95)),
            }
        })
        .collect();
    Crossover {
        mean_rate,
        p95_rate,
        mean_rho: mean_rate.map(|r| scenario.rho_edge(r)),
        p95_rho: p95_rate.map(|r| scenario.rho_edge(r)),
        mean_rate_significant,
        p95_rate_significant,
        p95_le_mean: mean_rate.zip(p95_rate).map(|(m, p)| p <= m),
        replications,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interpolation_between_brackets() {
        let rates = [6.0, 7.0, 8.0, 9.0];
        assert_eq!(interpolated_crossover(&rates, &[-3.0, -1.0, 1.0, 2.0]), Some(7.5));
        assert_eq!(interpolated_crossover(&rates, &[-3.0, 0.0, 2.0, 3.0]), Some(7.0));
        assert_eq!(interpolated_crossover(&rates, &[-3.0, -2.0, -1.0, -0.5]), None);
        assert_eq!(interpolated_crossover(&rates, &[1.0, 2.0, 3.0, 4.0]), None);
    }

    #[test]
    fn significance_requires_separation() {
        let e = |mean, half_width| Estimate { mean, half_width };
        let rates = [1.0, 2.0, 3.0];
        let edge = [e(1.0, 0.1), e(2.0, 0.5), e(3.0, 0.1)];
        let cloud = [e(1.5, 0.1), e(1.8, 0.1), e(2.0, 0.1)];
        assert_eq!(significant_crossover(&rates, &edge, &cloud), Some(3.0));
    }

    #[test]
    fn estimate_half_width() {
        let est = Estimate::of(&[1.0, 2.0, 3.0, 4.0, 5.0]);
        assert_eq!(est.mean, 3.0);
        assert!((est.half_width - 2.0 * (2.5f64 / 5.0).sqrt()).abs() < 1e-15);
        assert_eq!(Estimate::of(&[7.0]).half_width, 0.0);
    }
}

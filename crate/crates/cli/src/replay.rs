//! Trace replay: every trace site drives one edge site, and the pooled cloud
//! receives the superposition of all sites.

use edge_inversion::distributions::{DistributionSpec, RandomStream};
use edge_inversion::simulator::{
    run_edge_vs_cloud, Deployment, LatencySummary, Routing, SampleRecord, SimConfig, StationSpec, Workload,
};
use edge_inversion::workload::{generate_arrivals, ArrivalPlan, TraceTable, TRACE_BIN_S};
use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};
use crate::report::ms;
use crate::scenario::Scenario;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceSetup {
    pub trace: String,
    pub servers_per_site: u32,
    pub cloud_servers: u32,
    pub mu_req_per_s: f64,
    pub service: DistributionSpec,
    pub n_edge: DistributionSpec,
    pub n_cloud: DistributionSpec,
    pub seed: u64,
    pub warmup_s: f64,
}

impl TraceSetup {
    /// Takes deployment parameters from a scenario; its `k_sites` must match
    /// the trace.
    pub fn from_scenario(scenario: &Scenario, trace: &TraceTable, trace_name: String) -> Result<Self> {
        let sites = trace.sites().len();
        if scenario.k_sites as usize != sites {
            return Err(CliError::Config(format!(
                "trace has {sites} sites but the scenario has k_sites = {}",
                scenario.k_sites
            )));
        }
        Ok(Self {
            trace: trace_name,
            servers_per_site: scenario.servers_per_site,
            cloud_servers: scenario.cloud_servers(),
            mu_req_per_s: scenario.mu_req_per_s,
            service: scenario.service(),
            n_edge: scenario.n_edge.clone(),
            n_cloud: scenario.n_cloud.clone(),
            seed: scenario.seed,
            warmup_s: scenario.warmup_s.unwrap_or(0.0),
        })
    }
}

/// Statistics of one one-minute window of a station.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Window {
    pub minute: usize,
    pub count: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean_ms: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoxStats {
    pub count: usize,
    pub mean_ms: f64,
    pub min_ms: f64,
    pub q1_ms: f64,
    pub median_ms: f64,
    pub q3_ms: f64,
    pub p95_ms: f64,
    pub max_ms: f64,
}

impl From<&LatencySummary> for BoxStats {
    fn from(s: &LatencySummary) -> Self {
        Self {
            count: s.count,
            mean_ms: ms(s.mean),
            min_ms: ms(s.min),
            q1_ms: ms(s.q1),
            median_ms: ms(s.p50),
            q3_ms: ms(s.q3),
            p95_ms: ms(s.p95),
            max_ms: ms(s.max),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StationReport {
    pub station: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub summary: Option<BoxStats>,
    /// Variance (ms²) of the per-window means over non-empty windows.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub window_mean_variance: Option<f64>,
    pub windows: Vec<Window>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceReport {
    pub setup: TraceSetup,
    pub seed: u64,
    pub sites: Vec<StationReport>,
    pub cloud: StationReport,
    /// Request-weighted merge of all edge sites.
    pub edge_aggregate: BoxStats,
}

impl TraceReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("station,minute,count,mean_ms\n");
        for st in self.sites.iter().chain(std::iter::once(&self.cloud)) {
            for w in &st.windows {
                let mean = w.mean_ms.map(|m| m.to_string()).unwrap_or_default();
                out.push_str(&format!("{},{},{},{mean}\n", st.station, w.minute, w.count));
            }
        }
        out
    }
}

fn windows(records: &[SampleRecord], warmup: f64, bins: usize) -> Vec<Window> {
    let mut sums = vec![(0usize, 0.0f64); bins];
    for r in records.iter().filter(|r| r.arrival_time >= warmup) {
        let bin = ((r.arrival_time / TRACE_BIN_S) as usize).min(bins - 1);
        sums[bin].0 += 1;
        sums[bin].1 += r.total;
    }
    sums.into_iter()
        .enumerate()
        .map(|(minute, (count, sum))| Window {
            minute,
            count,
            mean_ms: (count > 0).then(|| ms(sum / count as f64)),
        })
        .collect()
}

fn window_variance(windows: &[Window]) -> Option<f64> {
    let means: Vec<f64> = windows.iter().filter_map(|w| w.mean_ms).collect();
    if means.len() < 2 {
        return None;
    }
    let n = means.len() as f64;
    let mean = means.iter().sum::<f64>() / n;
    Some(means.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / (n - 1.0))
}

fn station_report(name: String, records: &[SampleRecord], summary: Option<&LatencySummary>, warmup: f64, bins: usize) -> StationReport {
    let windows = windows(records, warmup, bins);
    StationReport {
        station: name,
        summary: summary.map(BoxStats::from),
        window_mean_variance: window_variance(&windows),
        windows,
    }
}

pub fn replay(trace: &TraceTable, setup: &TraceSetup) -> Result<TraceReport> {
    if trace.is_empty() || trace.bins() == 0 {
        return Err(CliError::Config("trace has no bins to replay".into()));
    }
    let horizon = trace.duration_s();
    let capacity = f64::from(setup.servers_per_site) * setup.mu_req_per_s;
    for site in trace.sites() {
        let rate = site.counts.iter().sum::<u64>() as f64 / horizon;
        if rate >= capacity {
            warn!("site {} averages {rate:.3} req/s, at or above its capacity {capacity}", site.site);
        }
    }
    let per_site = trace
        .sites()
        .iter()
        .enumerate()
        .map(|(i, site)| {
            let plan = ArrivalPlan::trace(trace.clone(), site.site.clone());
            Ok(generate_arrivals(&plan, &mut RandomStream::new(setup.seed, i as u64))?)
        })
        .collect::<Result<Vec<_>>>()?;
    let workload = Workload::from_sites(&per_site);
    let station = StationSpec::new(setup.servers_per_site, setup.service.clone(), setup.n_edge.clone());
    let edge = Deployment::sites(vec![station; trace.sites().len()], Routing::PerSite);
    let cloud = Deployment::pooled(StationSpec::new(setup.cloud_servers, setup.service.clone(), setup.n_cloud.clone()));
    let config = SimConfig {
        warmup_s: setup.warmup_s,
        horizon_s: horizon,
        seed: setup.seed,
    };
    let cmp = run_edge_vs_cloud(&edge, &cloud, &workload, &config)?;
    let bins = trace.bins();
    let sites = trace
        .sites()
        .iter()
        .zip(&cmp.edge.stations)
        .map(|(site, st)| station_report(site.site.clone(), &st.records, st.summary.as_ref(), setup.warmup_s, bins))
        .collect();
    let cloud_station = &cmp.cloud.stations[0];
    Ok(TraceReport {
        setup: setup.clone(),
        seed: setup.seed,
        sites,
        cloud: station_report(
            "cloud".into(),
            &cloud_station.records,
            Some(&cmp.cloud_summary),
            setup.warmup_s,
            bins,
        ),
        edge_aggregate: (&cmp.edge_aggregate).into(),
    })
}

//! Discrete-event simulation of FCFS multi-server stations behind additive,
//! contention-free network round trips.
//!
//! A [`Deployment`] is a set of stations plus a routing rule. Requests are
//! supplied up front as a sorted list of [`Arrival`]s; each request may carry
//! its own service demand so that two deployments can be driven by identical
//! work (common random numbers, see [`run_edge_vs_cloud`]).
//!
//! Events are processed in `(time, sequence)` order. All arrivals are
//! scheduled before the first departure, so at equal timestamps arrivals are
//! handled first, in input order, and departures in the order they were
//! scheduled.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, VecDeque};
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::analytic::check_weights;
use crate::distributions::{DistributionSpec, RandomStream, Sampler};
use crate::{Error, Result};

const NETWORK_STREAM: u64 = 0x1000;
const SERVICE_STREAM: u64 = 0x2000;
const ROUTING_STREAM: u64 = 0x3000;

/// Number of fixed-width histogram bins in a [`LatencySummary`].
pub const HISTOGRAM_BINS: usize = 40;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationSpec {
    pub servers: u32,
    pub service: DistributionSpec,
    /// Round-trip network latency in seconds, sampled once per request.
    pub rtt: DistributionSpec,
}

impl StationSpec {
    pub fn new(servers: u32, service: DistributionSpec, rtt: DistributionSpec) -> Self {
        Self { servers, service, rtt }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Routing {
    /// Each request goes to the station matching its origin site.
    PerSite,
    /// Each request independently picks station `i` with probability `w_i`.
    Weighted(Vec<f64>),
    /// Each request joins the station with the fewest requests in system
    /// relative to its server count; ties go to the lowest index.
    JoinShortestQueue,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Deployment {
    pub stations: Vec<StationSpec>,
    pub routing: Routing,
}

impl Deployment {
    /// A single pooled station; routing is irrelevant.
    pub fn pooled(station: StationSpec) -> Self {
        Self {
            stations: vec![station],
            routing: Routing::PerSite,
        }
    }

    pub fn sites(stations: Vec<StationSpec>, routing: Routing) -> Self {
        Self { stations, routing }
    }

    pub fn total_servers(&self) -> u64 {
        self.stations.iter().map(|s| u64::from(s.servers)).sum()
    }

    pub fn validate(&self) -> Result<()> {
        if self.stations.is_empty() {
            return Err(Error::config("deployment has no stations"));
        }
        for (i, s) in self.stations.iter().enumerate() {
            if s.servers == 0 {
                return Err(Error::config(format!("station {i} has no servers")));
            }
            if s.service.mean()? <= 0.0 {
                return Err(Error::config(format!("station {i} service mean must be > 0")));
            }
            s.rtt.validate()?;
        }
        if let Routing::Weighted(w) = &self.routing {
            check_weights(w)?;
            if w.len() != self.stations.len() {
                return Err(Error::config(format!(
                    "{} routing weights for {} stations",
                    w.len(),
                    self.stations.len()
                )));
            }
        }
        Ok(())
    }
}

/// One request offered to a deployment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Arrival {
    pub time: f64,
    /// Site the request originates from; used by [`Routing::PerSite`].
    pub origin: usize,
    /// Service demand in seconds; drawn from the station's service
    /// distribution when absent.
    pub service: Option<f64>,
}

impl Arrival {
    pub fn new(time: f64, origin: usize) -> Self {
        Self {
            time,
            origin,
            service: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub arrival_time: f64,
    pub wait: f64,
    pub service: f64,
    pub network: f64,
    /// `wait + service + network`.
    pub total: f64,
    pub station: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    /// Records arriving before this time are excluded from summaries.
    pub warmup_s: f64,
    /// End of the observation window; arrivals should lie in `[0, horizon)`.
    pub horizon_s: f64,
    pub seed: u64,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.warmup_s.is_finite() && self.warmup_s >= 0.0) {
            return Err(Error::config(format!("warmup must be >= 0, got {}", self.warmup_s)));
        }
        if !(self.horizon_s.is_finite() && self.horizon_s > self.warmup_s) {
            return Err(Error::config(format!(
                "horizon {} must exceed warmup {}",
                self.horizon_s, self.warmup_s
            )));
        }
        Ok(())
    }

    pub fn window(&self) -> f64 {
        self.horizon_s - self.warmup_s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub bin_width: f64,
    pub counts: Vec<u64>,
}

/// Distribution of end-to-end latency plus component means.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatencySummary {
    pub count: usize,
    pub mean: f64,
    pub variance: f64,
    pub min: f64,
    pub q1: f64,
    pub p50: f64,
    pub q3: f64,
    pub p95: f64,
    pub p99: f64,
    pub max: f64,
    pub mean_wait: f64,
    pub p95_wait: f64,
    pub mean_service: f64,
    pub mean_network: f64,
    /// Busy server-time over `servers x window`; only for simulated stations.
    pub measured_utilization: Option<f64>,
    /// `[0, max]` split into [`HISTOGRAM_BINS`] equal bins.
    pub histogram: Histogram,
}

/// Nearest-rank percentile of an ascending slice: the value at rank
/// `ceil(p/100 * n)`, with rank at least 1.
pub fn nearest_rank(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty());
    let n = sorted.len();
    let rank = ((p / 100.0) * n as f64).ceil() as usize;
    sorted[rank.clamp(1, n) - 1]
}

fn sorted_by(records: &[SampleRecord], f: impl Fn(&SampleRecord) -> f64) -> Vec<f64> {
    let mut v: Vec<f64> = records.iter().map(f).collect();
    v.sort_by(f64::total_cmp);
    v
}

/// Summarizes records; every record passed in is counted.
pub fn summarize(records: &[SampleRecord]) -> Result<LatencySummary> {
    if records.is_empty() {
        return Err(Error::input("cannot summarize an empty record set"));
    }
    let n = records.len() as f64;
    let totals = sorted_by(records, |r| r.total);
    let waits = sorted_by(records, |r| r.wait);
    let mean = totals.iter().sum::<f64>() / n;
    let variance = if records.len() > 1 {
        totals.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    let max = *totals.last().unwrap();
    let bin_width = max / HISTOGRAM_BINS as f64;
    let mut counts = vec![0u64; HISTOGRAM_BINS];
    for t in &totals {
        let bin = if bin_width > 0.0 {
            ((t / bin_width) as usize).min(HISTOGRAM_BINS - 1)
        } else {
            0
        };
        counts[bin] += 1;
    }
    let mean_of = |f: fn(&SampleRecord) -> f64| records.iter().map(f).sum::<f64>() / n;
    Ok(LatencySummary {
        count: records.len(),
        mean,
        variance,
        min: totals[0],
        q1: nearest_rank(&totals, 25.0),
        p50: nearest_rank(&totals, 50.0),
        q3: nearest_rank(&totals, 75.0),
        p95: nearest_rank(&totals, 95.0),
        p99: nearest_rank(&totals, 99.0),
        max,
        mean_wait: mean_of(|r| r.wait),
        p95_wait: nearest_rank(&waits, 95.0),
        mean_service: mean_of(|r| r.service),
        mean_network: mean_of(|r| r.network),
        measured_utilization: None,
        histogram: Histogram { bin_width, counts },
    })
}

/// Time-averaged quantities of one station over the observation window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StationStats {
    /// Integral of busy servers over the window.
    pub busy_time: f64,
    /// Integral of requests in system (queue + service) over the window.
    pub occupancy_time: f64,
    pub window: f64,
    pub servers: u32,
    /// Requests that arrived inside the window.
    pub window_arrivals: usize,
}

impl StationStats {
    pub fn utilization(&self) -> f64 {
        self.busy_time / (f64::from(self.servers) * self.window)
    }

    pub fn mean_in_system(&self) -> f64 {
        self.occupancy_time / self.window
    }

    pub fn arrival_rate(&self) -> f64 {
        self.window_arrivals as f64 / self.window
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationResult {
    /// Every request served by the station, warmup included, in arrival order.
    pub records: Vec<SampleRecord>,
    /// `None` when no request arrived after the warmup.
    pub summary: Option<LatencySummary>,
    pub stats: StationStats,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimOutput {
    pub stations: Vec<StationResult>,
    pub warmup_s: f64,
}

impl SimOutput {
    /// Post-warmup records of all stations, in station order.
    pub fn observed_records(&self) -> Vec<SampleRecord> {
        self.stations
            .iter()
            .flat_map(|s| s.records.iter().filter(|r| r.arrival_time >= self.warmup_s))
            .copied()
            .collect()
    }

    /// Request-weighted merge of every station's post-warmup records.
    pub fn aggregate(&self) -> Result<LatencySummary> {
        let mut summary = summarize(&self.observed_records())?;
        let busy: f64 = self.stations.iter().map(|s| s.stats.busy_time).sum();
        let capacity: f64 = self
            .stations
            .iter()
            .map(|s| f64::from(s.stats.servers) * s.stats.window)
            .sum();
        summary.measured_utilization = Some(busy / capacity);
        Ok(summary)
    }

    pub fn total_records(&self) -> usize {
        self.stations.iter().map(|s| s.records.len()).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Departure {
    time: f64,
    seq: u64,
    station: usize,
    record: usize,
}

impl Eq for Departure {}

impl Ord for Departure {
    // Reversed so that BinaryHeap pops the earliest (time, seq) first.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .time
            .total_cmp(&self.time)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

impl PartialOrd for Departure {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

struct StationState {
    servers: u32,
    service: Sampler,
    rtt: Sampler,
    service_stream: RandomStream,
    network_stream: RandomStream,
    busy: u32,
    queue: VecDeque<usize>,
    in_system: u64,
    last_change: f64,
    stats: StationStats,
    records: Vec<SampleRecord>,
}

impl StationState {
    // Integrates busy servers and occupancy up to `now`, clipped to the window.
    fn advance(&mut self, now: f64, warmup: f64, horizon: f64) {
        let lo = self.last_change.max(warmup);
        let hi = now.min(horizon);
        if hi > lo {
            let dt = hi - lo;
            self.stats.busy_time += f64::from(self.busy) * dt;
            self.stats.occupancy_time += self.in_system as f64 * dt;
        }
        self.last_change = now;
    }

    fn load(&self) -> f64 {
        self.in_system as f64 / f64::from(self.servers)
    }
}

/// Runs one deployment against a sorted arrival sequence.
///
/// Queues are unbounded and the run drains every request, so each arrival
/// appears in exactly one record. Output is a pure function of the inputs.
pub fn simulate(deployment: &Deployment, arrivals: &[Arrival], config: &SimConfig) -> Result<SimOutput> {
    deployment.validate()?;
    config.validate()?;
    if let Some(i) = arrivals.windows(2).position(|w| !(w[0].time <= w[1].time)) {
        return Err(Error::input(format!(
            "arrivals are not sorted at index {}: {} then {}",
            i + 1,
            arrivals[i].time,
            arrivals[i + 1].time
        )));
    }
    if let Some(a) = arrivals.iter().find(|a| !(a.time.is_finite() && a.time >= 0.0)) {
        return Err(Error::input(format!("arrival time {} is not a finite nonnegative number", a.time)));
    }
    if let Some(a) = arrivals.iter().find(|a| a.service.is_some_and(|s| !(s.is_finite() && s >= 0.0))) {
        return Err(Error::input(format!("invalid service demand {:?}", a.service)));
    }
    let n_stations = deployment.stations.len();
    if n_stations > 1 && deployment.routing == Routing::PerSite {
        if let Some(a) = arrivals.iter().find(|a| a.origin >= n_stations) {
            return Err(Error::config(format!(
                "arrival from site {} but the deployment has {n_stations} stations",
                a.origin
            )));
        }
    }

    let (warmup, horizon) = (config.warmup_s, config.horizon_s);
    let mut stations = deployment
        .stations
        .iter()
        .enumerate()
        .map(|(i, s)| {
            Ok(StationState {
                servers: s.servers,
                service: s.service.sampler()?,
                rtt: s.rtt.sampler()?,
                service_stream: RandomStream::new(config.seed, SERVICE_STREAM + i as u64),
                network_stream: RandomStream::new(config.seed, NETWORK_STREAM + i as u64),
                busy: 0,
                queue: VecDeque::new(),
                in_system: 0,
                last_change: 0.0,
                stats: StationStats {
                    busy_time: 0.0,
                    occupancy_time: 0.0,
                    window: config.window(),
                    servers: s.servers,
                    window_arrivals: 0,
                },
                records: Vec::new(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let weights = match &deployment.routing {
        Routing::Weighted(w) => {
            let mut acc = 0.0;
            Some(w.iter().map(|x| {
                acc += x;
                acc
            }).collect::<Vec<_>>())
        }
        _ => None,
    };
    let mut routing_stream = RandomStream::new(config.seed, ROUTING_STREAM);
    let mut departures: BinaryHeap<Departure> = BinaryHeap::new();
    let mut seq = 0u64;
    let mut next = 0usize;

    loop {
        let arrival_due = match (arrivals.get(next), departures.peek()) {
            (None, None) => break,
            (Some(_), None) => true,
            (None, Some(_)) => false,
            (Some(a), Some(d)) => a.time <= d.time,
        };
        if arrival_due {
            let a = &arrivals[next];
            next += 1;
            let now = a.time;
            let target = if n_stations == 1 {
                0
            } else {
                match &deployment.routing {
                    Routing::PerSite => a.origin,
                    Routing::Weighted(_) => {
                        let u = routing_stream.next_f64();
                        let cum = weights.as_ref().unwrap();
                        cum.iter().position(|c| u < *c).unwrap_or(n_stations - 1)
                    }
                    Routing::JoinShortestQueue => {
                        let mut best = 0;
                        for i in 1..n_stations {
                            if stations[i].load() < stations[best].load() {
                                best = i;
                            }
                        }
                        best
                    }
                }
            };
            let st = &mut stations[target];
            st.advance(now, warmup, horizon);
            let service = a.service.unwrap_or_else(|| st.service.sample(&mut st.service_stream));
            let network = st.rtt.sample(&mut st.network_stream);
            let idx = st.records.len();
            st.records.push(SampleRecord {
                arrival_time: now,
                wait: 0.0,
                service,
                network,
                total: 0.0,
                station: target,
            });
            if now >= warmup && now < horizon {
                st.stats.window_arrivals += 1;
            }
            st.in_system += 1;
            if st.busy < st.servers {
                st.busy += 1;
                departures.push(Departure { time: now + service, seq, station: target, record: idx });
                seq += 1;
            } else {
                st.queue.push_back(idx);
            }
        } else {
            let d = departures.pop().unwrap();
            let now = d.time;
            let st = &mut stations[d.station];
            st.advance(now, warmup, horizon);
            st.in_system -= 1;
            let rec = &mut st.records[d.record];
            rec.total = rec.wait + rec.service + rec.network;
            if let Some(waiting) = st.queue.pop_front() {
                let rec = &mut st.records[waiting];
                rec.wait = now - rec.arrival_time;
                departures.push(Departure {
                    time: now + rec.service,
                    seq,
                    station: d.station,
                    record: waiting,
                });
                seq += 1;
            } else {
                st.busy -= 1;
            }
        }
    }

    let stations = stations
        .into_iter()
        .map(|st| {
            let observed: Vec<SampleRecord> = st
                .records
                .iter()
                .filter(|r| r.arrival_time >= warmup)
                .copied()
                .collect();
            let summary = if observed.is_empty() {
                None
            } else {
                let mut s = summarize(&observed)?;
                s.measured_utilization = Some(st.stats.utilization());
                Some(s)
            };
            Ok(StationResult {
                records: st.records,
                summary,
                stats: st.stats,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SimOutput { stations, warmup_s: warmup })
}

/// Edge sites and the pooled cloud driven by the same requests.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub edge: SimOutput,
    pub cloud: SimOutput,
    pub edge_aggregate: LatencySummary,
    pub cloud_summary: LatencySummary,
}

/// A multi-site arrival stream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Workload {
    pub sites: usize,
    /// Sorted by time.
    pub arrivals: Vec<Arrival>,
}

impl Workload {
    /// Merges per-site epoch lists into one stream. Ties keep site order.
    pub fn from_sites(per_site: &[Vec<f64>]) -> Self {
        let mut arrivals: Vec<Arrival> = per_site
            .iter()
            .enumerate()
            .flat_map(|(site, epochs)| epochs.iter().map(move |&t| Arrival::new(t, site)))
            .collect();
        arrivals.sort_by(|a, b| a.time.total_cmp(&b.time).then(a.origin.cmp(&b.origin)));
        Self {
            sites: per_site.len(),
            arrivals,
        }
    }

    /// Draws a service demand for every request lacking one.
    pub fn attach_service(&mut self, service: &DistributionSpec, stream: &mut RandomStream) -> Result<()> {
        let sampler = service.sampler()?;
        for a in self.arrivals.iter_mut().filter(|a| a.service.is_none()) {
            a.service = Some(sampler.sample(stream));
        }
        Ok(())
    }
}

/// Simulates the edge deployment and the cloud deployment on the same
/// arrival epochs and service demands.
///
/// The cloud sees the superposition of all site streams. Requests without a
/// demand get one drawn from the service distribution of their origin site
/// (station 0 when routing is not per-site).
pub fn run_edge_vs_cloud(edge: &Deployment, cloud: &Deployment, workload: &Workload, config: &SimConfig) -> Result<Comparison> {
    edge.validate()?;
    cloud.validate()?;
    if edge.routing == Routing::PerSite && edge.stations.len() != workload.sites {
        return Err(Error::config(format!(
            "workload has {} sites but the edge deployment has {} stations",
            workload.sites,
            edge.stations.len()
        )));
    }
    if workload.arrivals.iter().any(|a| a.origin >= workload.sites) {
        return Err(Error::config("arrival origin outside the workload's sites"));
    }
    let mut arrivals = workload.arrivals.clone();
    if arrivals.iter().any(|a| a.service.is_none()) {
        let samplers = edge
            .stations
            .iter()
            .map(|s| s.service.sampler())
            .collect::<Result<Vec<_>>>()?;
        let mut stream = RandomStream::new(config.seed, SERVICE_STREAM - 1);
        for a in arrivals.iter_mut().filter(|a| a.service.is_none()) {
            let station = if edge.routing == Routing::PerSite { a.origin } else { 0 };
            a.service = Some(samplers[station].sample(&mut stream));
        }
    }
    let edge_out = simulate(edge, &arrivals, config)?;
    let cloud_out = simulate(cloud, &arrivals, config)?;
    let edge_aggregate = edge_out.aggregate()?;
    let cloud_summary = cloud_out.aggregate()?;
    Ok(Comparison {
        edge: edge_out,
        cloud: cloud_out,
        edge_aggregate,
        cloud_summary,
    })
}

/// Writes records as `station_id,arrival_s,wait_s,service_s,network_s,total_s`
/// with nine significant digits.
pub fn write_samples_csv(records: &[SampleRecord], mut out: impl Write) -> std::io::Result<()> {
    writeln!(out, "station_id,arrival_s,wait_s,service_s,network_s,total_s")?;
    for r in records {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            r.station,
            sig_digits(r.arrival_time, 9),
            sig_digits(r.wait, 9),
            sig_digits(r.service, 9),
            sig_digits(r.network, 9),
            sig_digits(r.total, 9)
        )?;
    }
    Ok(())
}

/// Formats `x` with `digits` significant digits in plain decimal notation.
pub fn sig_digits(x: f64, digits: usize) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let magnitude = x.abs().log10().floor() as i64;
    let decimals = (digits as i64 - 1 - magnitude).max(0) as usize;
    let s = format!("{x:.decimals$}");
    // Rounding can carry into a new leading digit (9.99.. -> 10.0).
    let rounded: f64 = s.parse().unwrap_or(x);
    let mag2 = rounded.abs().log10().floor() as i64;
    if mag2 != magnitude {
        let decimals = (digits as i64 - 1 - mag2).max(0) as usize;
        format!("{x:.decimals$}")
    } else {
        s
    }
}

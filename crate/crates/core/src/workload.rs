//! Arrival streams: Poisson and renewal processes, spatial splitting across
//! sites and replay of per-minute request-count traces.

use std::collections::BTreeMap;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::analytic::check_weights;
use crate::distributions::{DistributionSpec, RandomStream};
use crate::{Error, Result};

/// Width of one trace bin in seconds.
pub const TRACE_BIN_S: f64 = 60.0;

/// Per-site request counts in consecutive one-minute bins.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SiteSeries {
    pub site: String,
    pub counts: Vec<u64>,
}

/// A trace of per-minute request counts, one series per site, in the
/// order sites first appear.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct TraceTable {
    sites: Vec<SiteSeries>,
}

impl TraceTable {
    pub fn new(sites: Vec<SiteSeries>) -> Result<Self> {
        let mut seen = std::collections::HashSet::new();
        for s in &sites {
            if !seen.insert(s.site.as_str()) {
                return Err(Error::input(format!("duplicate site `{}`", s.site)));
            }
        }
        Ok(Self { sites })
    }

    pub fn sites(&self) -> &[SiteSeries] {
        &self.sites
    }

    pub fn site_ids(&self) -> impl Iterator<Item = &str> {
        self.sites.iter().map(|s| s.site.as_str())
    }

    pub fn site(&self, id: &str) -> Option<&SiteSeries> {
        self.sites.iter().find(|s| s.site == id)
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    /// Number of bins in the longest series.
    pub fn bins(&self) -> usize {
        self.sites.iter().map(|s| s.counts.len()).max().unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.sites.iter().flat_map(|s| &s.counts).sum()
    }

    pub fn duration_s(&self) -> f64 {
        self.bins() as f64 * TRACE_BIN_S
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ArrivalKind {
    Poisson { rate: f64 },
    Renewal { interarrival: DistributionSpec },
    /// One site of a trace, replayed as a Poisson process whose rate is
    /// constant within each minute (`count / 60` req/s).
    Trace { table: TraceTable, site: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArrivalPlan {
    pub kind: ArrivalKind,
    /// Epochs are generated on `[0, duration_s)`.
    pub duration_s: f64,
}

impl ArrivalPlan {
    pub fn poisson(rate: f64, duration_s: f64) -> Self {
        Self {
            kind: ArrivalKind::Poisson { rate },
            duration_s,
        }
    }

    pub fn renewal(interarrival: DistributionSpec, duration_s: f64) -> Self {
        Self {
            kind: ArrivalKind::Renewal { interarrival },
            duration_s,
        }
    }

    /// Replays `site` of `table` over the table's full length.
    pub fn trace(table: TraceTable, site: impl Into<String>) -> Self {
        let duration_s = table.duration_s();
        Self {
            kind: ArrivalKind::Trace {
                table,
                site: site.into(),
            },
            duration_s,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.duration_s.is_finite() && self.duration_s >= 0.0) {
            return Err(Error::config(format!(
                "arrival duration must be >= 0, got {}",
                self.duration_s
            )));
        }
        match &self.kind {
            ArrivalKind::Poisson { rate } => {
                if !(rate.is_finite() && *rate > 0.0) {
                    return Err(Error::config(format!("poisson rate must be > 0, got {rate}")));
                }
            }
            ArrivalKind::Renewal { interarrival } => {
                if interarrival.mean()? <= 0.0 {
                    return Err(Error::config("renewal inter-arrival mean must be > 0"));
                }
            }
            ArrivalKind::Trace { table, site } => {
                if table.site(site).is_none() {
                    return Err(Error::config(format!("trace has no site `{site}`")));
                }
            }
        }
        Ok(())
    }
}

// Compensated running sum, so that e.g. ten gaps of 0.1 land exactly on 1.0.
#[derive(Default)]
struct Clock {
    sum: f64,
    carry: f64,
}

impl Clock {
    fn starting_at(t: f64) -> Self {
        Self { sum: t, carry: 0.0 }
    }

    fn advance(&mut self, dt: f64) -> f64 {
        let t = self.sum + dt;
        if self.sum.abs() >= dt.abs() {
            self.carry += (self.sum - t) + dt;
        } else {
            self.carry += (dt - t) + self.sum;
        }
        self.sum = t;
        self.now()
    }

    fn now(&self) -> f64 {
        self.sum + self.carry
    }
}

/// Generates sorted arrival epochs on `[0, duration)`.
///
/// Poisson processes start empty at time 0. Renewal processes place their
/// first arrival at 0 and then advance by i.i.d. gaps.
pub fn generate_arrivals(plan: &ArrivalPlan, stream: &mut RandomStream) -> Result<Vec<f64>> {
    plan.validate()?;
    let end = plan.duration_s;
    let mut epochs = Vec::new();
    match &plan.kind {
        ArrivalKind::Poisson { rate } => {
            let gap = DistributionSpec::exponential(*rate).sampler()?;
            epochs.reserve((rate * end * 1.05) as usize + 16);
            let mut clock = Clock::default();
            loop {
                let t = clock.advance(gap.sample(stream));
                if t >= end {
                    break;
                }
                epochs.push(t);
            }
        }
        ArrivalKind::Renewal { interarrival } => {
            let gap = interarrival.sampler()?;
            let mut clock = Clock::default();
            let mut t = 0.0;
            while t < end {
                epochs.push(t);
                t = clock.advance(gap.sample(stream));
            }
        }
        ArrivalKind::Trace { table, site } => {
            let series = table
                .site(site)
                .ok_or_else(|| Error::config(format!("trace has no site `{site}`")))?;
            for (bin, &count) in series.counts.iter().enumerate() {
                let start = bin as f64 * TRACE_BIN_S;
                if start >= end {
                    break;
                }
                if count == 0 {
                    continue;
                }
                let stop = (start + TRACE_BIN_S).min(end);
                let rate = count as f64 / TRACE_BIN_S;
                let gap = DistributionSpec::exponential(rate).sampler()?;
                let mut clock = Clock::starting_at(start);
                loop {
                    let t = clock.advance(gap.sample(stream));
                    if t >= stop {
                        break;
                    }
                    epochs.push(t);
                }
            }
        }
    }
    Ok(epochs)
}

/// Assigns each epoch independently to site `i` with probability `w_i`.
pub fn split_by_sites(epochs: &[f64], weights: &[f64], stream: &mut RandomStream) -> Result<Vec<Vec<f64>>> {
    check_weights(weights)?;
    let mut cumulative = Vec::with_capacity(weights.len());
    let mut acc = 0.0;
    for w in weights {
        acc += w;
        cumulative.push(acc);
    }
    let last_nonzero = weights.iter().rposition(|w| *w > 0.0).unwrap_or(0);
    let mut out = vec![Vec::new(); weights.len()];
    for &t in epochs {
        let u = stream.next_f64();
        let site = cumulative
            .iter()
            .position(|c| u < *c)
            .unwrap_or(last_nonzero);
        out[site].push(t);
    }
    Ok(out)
}

/// Sums all sites bin by bin into a single site named `cloud`. Sites of
/// unequal length are padded with zeros.
pub fn aggregate_sites(trace: &TraceTable) -> TraceTable {
    let mut counts = vec![0u64; trace.bins()];
    for s in &trace.sites {
        for (bin, c) in s.counts.iter().enumerate() {
            counts[bin] += c;
        }
    }
    TraceTable {
        sites: vec![SiteSeries {
            site: "cloud".into(),
            counts,
        }],
    }
}

/// Squared coefficient of variation of successive inter-arrival gaps.
pub fn empirical_scv(epochs: &[f64]) -> Result<f64> {
    if epochs.len() < 3 {
        return Err(Error::input(format!(
            "need at least 3 epochs for an scv, got {}",
            epochs.len()
        )));
    }
    let gaps: Vec<f64> = epochs.windows(2).map(|w| w[1] - w[0]).collect();
    let n = gaps.len() as f64;
    let mean = gaps.iter().sum::<f64>() / n;
    if mean <= 0.0 {
        return Err(Error::input("epochs do not advance"));
    }
    let var = gaps.iter().map(|g| (g - mean).powi(2)).sum::<f64>() / n;
    Ok(var / (mean * mean))
}

/// Reads a `site,minute,count` CSV trace. Extra columns are ignored.
pub fn load_trace_csv(path: impl AsRef<Path>) -> Result<TraceTable> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_trace_csv(file, path)
}

/// Parses a trace from any reader; `origin` is used in error messages.
pub fn parse_trace_csv(reader: impl Read, origin: impl AsRef<Path>) -> Result<TraceTable> {
    let origin = origin.as_ref();
    let parse_err = |line: u64, message: String| Error::Parse {
        path: origin.to_path_buf(),
        line,
        message,
    };
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| parse_err(1, format!("cannot read header: {e}")))?
        .clone();
    let column = |name: &str| headers.iter().position(|h| h.eq_ignore_ascii_case(name));
    let (site_col, minute_col, count_col) = match (column("site"), column("minute"), column("count")) {
        (Some(s), Some(m), Some(c)) => (s, m, c),
        _ => {
            return Err(parse_err(
                1,
                format!("header must contain site,minute,count; got `{}`", headers.iter().collect::<Vec<_>>().join(",")),
            ))
        }
    };
    for (i, h) in headers.iter().enumerate() {
        if i != site_col && i != minute_col && i != count_col {
            log::warn!("{}: ignoring unknown trace column `{h}`", origin.display());
        }
    }

    let mut order: Vec<String> = Vec::new();
    let mut bins: BTreeMap<String, BTreeMap<u64, u64>> = BTreeMap::new();
    for record in rdr.records() {
        let record = record.map_err(|e| {
            let line = e.position().map(|p| p.line()).unwrap_or(0);
            parse_err(line, format!("malformed row: {e}"))
        })?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let field = |col: usize| record.get(col).unwrap_or("");
        let site = field(site_col).to_string();
        if site.is_empty() {
            return Err(parse_err(line, "empty site id".into()));
        }
        let minute: u64 = field(minute_col)
            .parse()
            .map_err(|_| parse_err(line, format!("minute `{}` is not a nonnegative integer", field(minute_col))))?;
        let count: u64 = field(count_col)
            .parse()
            .map_err(|_| parse_err(line, format!("count `{}` is not a nonnegative integer", field(count_col))))?;
        let series = bins.entry(site.clone()).or_insert_with(|| {
            order.push(site.clone());
            BTreeMap::new()
        });
        if series.insert(minute, count).is_some() {
            return Err(parse_err(line, format!("duplicate minute {minute} for site `{site}`")));
        }
    }
    if order.is_empty() {
        return Err(parse_err(1, "trace has no data rows".into()));
    }

    let mut sites = Vec::with_capacity(order.len());
    for id in order {
        let series = &bins[&id];
        for (expected, minute) in series.keys().enumerate() {
            if *minute != expected as u64 {
                return Err(Error::Input(format!(
                    "{}: site `{id}` bins are not contiguous from 0 (missing minute {expected})",
                    origin.display()
                )));
            }
        }
        sites.push(SiteSeries {
            site: id,
            counts: series.values().copied().collect(),
        });
    }
    TraceTable::new(sites)
}

/// Writes a trace in the `site,minute,count` schema.
pub fn write_trace_csv(trace: &TraceTable, out: impl std::io::Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::Io {
        path: "<trace>".into(),
        source: std::io::Error::other(e),
    };
    w.write_record(["site", "minute", "count"]).map_err(io)?;
    for s in &trace.sites {
        for (minute, count) in s.counts.iter().enumerate() {
            w.write_record([s.site.clone(), minute.to_string(), count.to_string()])
                .map_err(io)?;
        }
    }
    w.flush().map_err(|source| Error::Io {
        path: "<trace>".into(),
        source,
    })
}

/// Parameters of a synthetic multi-site trace with spatial and temporal
/// variation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticTrace {
    /// Mean request rate of each site, req/s.
    pub site_rates: Vec<f64>,
    pub minutes: usize,
    /// Minute-to-minute multiplicative noise: each bin's rate is scaled by a
    /// lognormal factor with unit mean and this squared CoV.
    pub burst_scv: f64,
}

/// Draws a synthetic trace; bin counts are Poisson given the modulated rate.
pub fn synthetic_trace(spec: &SyntheticTrace, stream: &mut RandomStream) -> Result<TraceTable> {
    if spec.site_rates.iter().any(|r| !(r.is_finite() && *r >= 0.0)) {
        return Err(Error::config("synthetic site rates must be >= 0"));
    }
    let noise = if spec.burst_scv > 0.0 {
        Some(DistributionSpec::lognormal_with_moments(1.0, spec.burst_scv)?.sampler()?)
    } else {
        None
    };
    let mut sites = Vec::with_capacity(spec.site_rates.len());
    for (i, rate) in spec.site_rates.iter().enumerate() {
        let counts = (0..spec.minutes)
            .map(|_| {
                let factor = noise.as_ref().map_or(1.0, |n| n.sample(stream));
                poisson_count(rate * TRACE_BIN_S * factor, stream)
            })
            .collect();
        sites.push(SiteSeries {
            site: format!("site-{i}"),
            counts,
        });
    }
    TraceTable::new(sites)
}

// Counts unit-rate exponential gaps in [0, mean).
fn poisson_count(mean: f64, stream: &mut RandomStream) -> u64 {
    let mut t = 0.0;
    let mut n = 0;
    loop {
        t -= (1.0 - stream.next_f64()).ln();
        if t >= mean {
            return n;
        }
        n += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::fit_scv;

    #[test]
    fn poisson_count_concentrates() {
        let plan = ArrivalPlan::poisson(10.0, 1000.0);
        let epochs = generate_arrivals(&plan, &mut RandomStream::new(1, 0)).unwrap();
        let n = epochs.len() as f64;
        assert!((n - 10_000.0).abs() < 4.0 * 10_000f64.sqrt(), "{n}");
        assert!(epochs.windows(2).all(|w| w[0] <= w[1]));
        assert!(epochs.iter().all(|t| (0.0..1000.0).contains(t)));
    }

    #[test]
    fn deterministic_renewal_is_exact() {
        let plan = ArrivalPlan::renewal(DistributionSpec::deterministic(0.1), 1.0);
        let epochs = generate_arrivals(&plan, &mut RandomStream::new(1, 0)).unwrap();
        assert_eq!(epochs.len(), 10);
        for (i, t) in epochs.iter().enumerate() {
            assert!((t - 0.1 * i as f64).abs() < 1e-12, "{i}: {t}");
        }
    }

    #[test]
    fn trace_replay_follows_bins() {
        let table = TraceTable::new(vec![SiteSeries {
            site: "A".into(),
            counts: vec![60, 0],
        }])
        .unwrap();
        let plan = ArrivalPlan::trace(table, "A");
        assert_eq!(plan.duration_s, 120.0);
        let mut total = 0usize;
        for seed in 0..50 {
            let epochs = generate_arrivals(&plan, &mut RandomStream::new(seed, 0)).unwrap();
            assert!(epochs.iter().all(|t| *t < 60.0));
            total += epochs.len();
        }
        let mean = total as f64 / 50.0;
        assert!((mean - 60.0).abs() < 4.0 * (60.0f64 / 50.0).sqrt(), "mean {mean}");
    }

    #[test]
    fn split_single_site() {
        let epochs: Vec<f64> = (0..100).map(f64::from).collect();
        let out = split_by_sites(&epochs, &[1.0], &mut RandomStream::new(3, 0)).unwrap();
        assert_eq!(out, vec![epochs]);
    }

    #[test]
    fn split_balanced_and_skewed() {
        let epochs: Vec<f64> = (0..1_000_000).map(f64::from).collect();
        let out = split_by_sites(&epochs, &[0.5, 0.5], &mut RandomStream::new(3, 0)).unwrap();
        for site in &out {
            assert!((site.len() as f64 - 500_000.0).abs() < 4.0 * 500.0);
        }
        let out = split_by_sites(&epochs, &[0.9, 0.1], &mut RandomStream::new(4, 0)).unwrap();
        assert!((out[0].len() as f64 / 1e6 - 0.9).abs() < 0.01);
        assert!((out[1].len() as f64 / 1e6 - 0.1).abs() < 0.01);
        assert!(split_by_sites(&epochs, &[0.5, 0.6], &mut RandomStream::new(4, 0)).is_err());
        assert!(split_by_sites(&epochs, &[1.5, -0.5], &mut RandomStream::new(4, 0)).is_err());
    }

    #[test]
    fn aggregation() {
        let t = TraceTable::new(vec![
            SiteSeries { site: "a".into(), counts: vec![3] },
            SiteSeries { site: "b".into(), counts: vec![4, 2] },
        ])
        .unwrap();
        let cloud = aggregate_sites(&t);
        assert_eq!(cloud.sites()[0].site, "cloud");
        assert_eq!(cloud.sites()[0].counts, vec![7, 2]);

        let single = TraceTable::new(vec![SiteSeries { site: "x".into(), counts: vec![1, 5, 0] }]).unwrap();
        assert_eq!(aggregate_sites(&single).sites()[0].counts, vec![1, 5, 0]);
    }

    #[test]
    fn csv_parsing() {
        let t = parse_trace_csv("site,minute,count\nA,0,12\nA,1,0\n".as_bytes(), "t.csv").unwrap();
        assert_eq!(t.sites().len(), 1);
        assert_eq!(t.sites()[0].counts, vec![12, 0]);

        let extra = parse_trace_csv("minute,site,count,app\n1,A,2,x\n0,A,3,y\n".as_bytes(), "t.csv").unwrap();
        assert_eq!(extra.sites()[0].counts, vec![3, 2]);

        let err = parse_trace_csv("site,minute,count\n".as_bytes(), "t.csv").unwrap_err();
        assert!(err.to_string().contains("no data rows"), "{err}");

        let err = parse_trace_csv("site,minute,count\nB,0,1\nB,2,1\n".as_bytes(), "t.csv").unwrap_err();
        assert!(err.to_string().contains("`B`") && err.to_string().contains("contiguous"), "{err}");

        let err = parse_trace_csv("site,minute,count\nA,0,1\nA,1,-3\n".as_bytes(), "t.csv").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");

        let err = parse_trace_csv("site,count\nA,1\n".as_bytes(), "t.csv").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }), "{err}");
    }

    #[test]
    fn csv_write_then_read() {
        let t = TraceTable::new(vec![
            SiteSeries { site: "east".into(), counts: vec![1, 2, 3] },
            SiteSeries { site: "west".into(), counts: vec![0, 9, 4] },
        ])
        .unwrap();
        let mut buf = Vec::new();
        write_trace_csv(&t, &mut buf).unwrap();
        assert_eq!(parse_trace_csv(buf.as_slice(), "mem").unwrap(), t);
    }

    #[test]
    fn scv_of_gaps() {
        let det: Vec<f64> = (0..=100).map(f64::from).collect();
        assert!(empirical_scv(&det).unwrap().abs() < 1e-20);
        assert!(empirical_scv(&[0.0, 1.0]).is_err());

        let plan = ArrivalPlan::poisson(1.0, 1_000_000.0);
        let epochs = generate_arrivals(&plan, &mut RandomStream::new(8, 0)).unwrap();
        assert!((empirical_scv(&epochs).unwrap() - 1.0).abs() < 0.02);

        let h2 = fit_scv(1.0, 4.0).unwrap();
        let plan = ArrivalPlan::renewal(h2, 1_000_000.0);
        let epochs = generate_arrivals(&plan, &mut RandomStream::new(9, 0)).unwrap();
        assert!((empirical_scv(&epochs).unwrap() - 4.0).abs() < 0.4);
    }

    #[test]
    fn synthetic_trace_shape() {
        let spec = SyntheticTrace { site_rates: vec![1.0, 2.0, 0.0], minutes: 30, burst_scv: 0.5 };
        let t = synthetic_trace(&spec, &mut RandomStream::new(5, 0)).unwrap();
        assert_eq!(t.sites().len(), 3);
        assert_eq!(t.bins(), 30);
        assert!(t.sites()[2].counts.iter().all(|c| *c == 0));
        let again = synthetic_trace(&spec, &mut RandomStream::new(5, 0)).unwrap();
        assert_eq!(t, again);
    }
}

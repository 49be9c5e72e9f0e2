//! Scenario files: a flat TOML table describing an edge deployment, its
//! pooled cloud counterpart and the offered load.
//!
//! ```toml
//! k_sites = 5
//! servers_per_site = 2
//! mu_req_per_s = 12.0
//! rate_sweep_req_per_s = [6, 7, 8, 9, 10, 11, 12]
//! n_edge = "det(0.001)"
//! n_cloud = "det(0.026)"
//! arrival = "poisson"
//! seed = 7
//! horizon_s = 2000
//! ```

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use edge_inversion::distributions::{fit_scv, DistributionSpec};
use edge_inversion::simulator::{Deployment, Routing, StationSpec};
use edge_inversion::workload::ArrivalPlan;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

pub const DEFAULT_REPLICATIONS: u32 = 5;
pub const DEFAULT_SEED: u64 = 1;

/// Arrival process at each edge site.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum ArrivalProcess {
    #[default]
    Poisson,
    /// Renewal process whose inter-arrival gaps have this squared CoV.
    Renewal(f64),
}

impl ArrivalProcess {
    pub fn scv(self) -> f64 {
        match self {
            ArrivalProcess::Poisson => 1.0,
            ArrivalProcess::Renewal(scv) => scv,
        }
    }

    pub fn plan(self, rate: f64, duration_s: f64) -> Result<ArrivalPlan> {
        Ok(match self {
            ArrivalProcess::Poisson => ArrivalPlan::poisson(rate, duration_s),
            ArrivalProcess::Renewal(scv) => ArrivalPlan::renewal(fit_scv(1.0 / rate, scv)?, duration_s),
        })
    }
}

impl fmt::Display for ArrivalProcess {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ArrivalProcess::Poisson => write!(f, "poisson"),
            ArrivalProcess::Renewal(scv) => write!(f, "renewal({scv})"),
        }
    }
}

impl FromStr for ArrivalProcess {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let t: String = s.chars().filter(|c| !c.is_whitespace()).collect::<String>().to_ascii_lowercase();
        if t == "poisson" {
            return Ok(ArrivalProcess::Poisson);
        }
        let inner = t
            .strip_prefix("renewal(")
            .and_then(|r| r.strip_suffix(')'))
            .ok_or_else(|| format!("unknown arrival process {s:?}; expected \"poisson\" or \"renewal(<scv>)\""))?;
        let scv: f64 = inner.parse().map_err(|_| format!("invalid renewal scv {inner:?}"))?;
        if !(scv.is_finite() && scv >= 0.0) {
            return Err(format!("renewal scv must be >= 0, got {scv}"));
        }
        Ok(ArrivalProcess::Renewal(scv))
    }
}

impl TryFrom<String> for ArrivalProcess {
    type Error = String;

    fn try_from(s: String) -> Result<Self, String> {
        s.parse()
    }
}

impl From<ArrivalProcess> for String {
    fn from(a: ArrivalProcess) -> String {
        a.to_string()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RoutingKind {
    /// Requests are served at the site they arrive at.
    #[default]
    PerSite,
    /// Requests are spread over sites by `skew_weights`, regardless of origin.
    Weighted,
    /// A global balancer sends each request to the least-loaded site.
    Jsq,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub k_sites: u32,
    pub servers_per_site: u32,
    /// Defaults to `k_sites * servers_per_site`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cloud_servers: Option<u32>,
    pub mu_req_per_s: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub per_site_rate_req_per_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rate_sweep_req_per_s: Option<Vec<f64>>,
    /// Round-trip latency to an edge site, seconds.
    pub n_edge: DistributionSpec,
    /// Round-trip latency to the cloud, seconds.
    pub n_cloud: DistributionSpec,
    #[serde(default)]
    pub arrival: ArrivalProcess,
    /// Defaults to `exp(mu_req_per_s)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub service: Option<DistributionSpec>,
    /// Share of the aggregate load originating at each site.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub skew_weights: Option<Vec<f64>>,
    #[serde(default)]
    pub routing: RoutingKind,
    #[serde(default = "default_seed")]
    pub seed: u64,
    pub horizon_s: f64,
    /// Defaults per load level; see [`Scenario::warmup_for`].
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub warmup_s: Option<f64>,
    #[serde(default = "default_replications")]
    pub replications: u32,
}

fn default_seed() -> u64 {
    DEFAULT_SEED
}

fn default_replications() -> u32 {
    DEFAULT_REPLICATIONS
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text, path)
    }

    pub fn parse(text: &str, origin: &Path) -> Result<Self> {
        let scenario: Scenario = toml::from_str(text).map_err(|source| CliError::Toml {
            path: origin.to_path_buf(),
            source,
        })?;
        scenario.validate()?;
        Ok(scenario)
    }

    /// Fills every defaulted field so that the scenario can be re-run as is.
    pub fn resolved(&self) -> Self {
        let mut s = self.clone();
        s.cloud_servers = Some(self.cloud_servers());
        s.service = Some(self.service());
        s
    }

    pub fn cloud_servers(&self) -> u32 {
        self.cloud_servers.unwrap_or(self.k_sites * self.servers_per_site)
    }

    pub fn service(&self) -> DistributionSpec {
        self.service
            .clone()
            .unwrap_or_else(|| DistributionSpec::exponential(self.mu_req_per_s))
    }

    pub fn weights(&self) -> Vec<f64> {
        self.skew_weights
            .clone()
            .unwrap_or_else(|| vec![1.0 / f64::from(self.k_sites); self.k_sites as usize])
    }

    /// Utilization of an edge site receiving the per-site rate.
    pub fn rho_edge(&self, rate: f64) -> f64 {
        rate / (f64::from(self.servers_per_site) * self.mu_req_per_s)
    }

    /// Network advantage of the edge in seconds, from the latency means.
    pub fn delta_n_s(&self) -> Result<f64> {
        Ok(self.n_cloud.mean()? - self.n_edge.mean()?)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(CliError::Config(m));
        if self.k_sites == 0 {
            return bad("k_sites must be >= 1".into());
        }
        if self.servers_per_site == 0 {
            return bad("servers_per_site must be >= 1".into());
        }
        if self.cloud_servers == Some(0) {
            return bad("cloud_servers must be >= 1".into());
        }
        if !(self.mu_req_per_s.is_finite() && self.mu_req_per_s > 0.0) {
            return bad(format!("mu_req_per_s must be > 0, got {}", self.mu_req_per_s));
        }
        for (key, rates) in [
            ("per_site_rate_req_per_s", self.per_site_rate_req_per_s.map(|r| vec![r])),
            ("rate_sweep_req_per_s", self.rate_sweep_req_per_s.clone()),
        ] {
            if let Some(rates) = rates {
                if let Some(r) = rates.iter().find(|r| !(r.is_finite() && **r > 0.0)) {
                    return bad(format!("{key}: rates must be > 0, got {r}"));
                }
            }
        }
        if let Some(sweep) = &self.rate_sweep_req_per_s {
            if sweep.windows(2).any(|w| w[0] >= w[1]) {
                return bad("rate_sweep_req_per_s must be strictly increasing".into());
            }
        }
        for (key, d) in [("n_edge", &self.n_edge), ("n_cloud", &self.n_cloud)] {
            d.validate().map_err(|e| CliError::Config(format!("{key}: {e}")))?;
        }
        let service = self.service();
        let mean = service.mean().map_err(|e| CliError::Config(format!("service: {e}")))?;
        let expected = 1.0 / self.mu_req_per_s;
        if (mean - expected).abs() > 0.01 * expected {
            return bad(format!(
                "service: mean {mean} s does not match 1/mu_req_per_s = {expected} s"
            ));
        }
        if let Some(w) = &self.skew_weights {
            if w.len() != self.k_sites as usize {
                return bad(format!("skew_weights: {} weights for {} sites", w.len(), self.k_sites));
            }
            edge_inversion::analytic::check_weights(w)
                .map_err(|e| CliError::Config(format!("skew_weights: {e}")))?;
        }
        if self.routing == RoutingKind::Weighted && self.skew_weights.is_none() {
            return bad("routing = \"weighted\" requires skew_weights".into());
        }
        if !(self.horizon_s.is_finite() && self.horizon_s > 0.0) {
            return bad(format!("horizon_s must be > 0, got {}", self.horizon_s));
        }
        if let Some(w) = self.warmup_s {
            if !(w.is_finite() && w >= 0.0 && w < self.horizon_s) {
                return bad(format!("warmup_s must lie in [0, horizon_s), got {w}"));
            }
        }
        if self.replications == 0 {
            return bad("replications must be >= 1".into());
        }
        Ok(())
    }

    /// Rejects a load level at which any station would be saturated.
    pub fn check_stable(&self, rate: f64) -> Result<()> {
        let unstable = |m: String| Err(CliError::Core(edge_inversion::Error::Unstable(m)));
        let total = rate * f64::from(self.k_sites);
        let site_capacity = f64::from(self.servers_per_site) * self.mu_req_per_s;
        match self.routing {
            RoutingKind::PerSite | RoutingKind::Weighted => {
                for (i, w) in self.weights().iter().enumerate() {
                    let rho = total * w / site_capacity;
                    if rho >= 1.0 {
                        return unstable(format!(
                            "edge site {i}: utilization {rho:.4} >= 1 at {rate} req/s per site"
                        ));
                    }
                }
            }
            RoutingKind::Jsq => {
                let rho = total / (site_capacity * f64::from(self.k_sites));
                if rho >= 1.0 {
                    return unstable(format!("edge sites: utilization {rho:.4} >= 1 at {rate} req/s per site"));
                }
            }
        }
        let rho_cloud = total / (f64::from(self.cloud_servers()) * self.mu_req_per_s);
        if rho_cloud >= 1.0 {
            return unstable(format!("cloud: utilization {rho_cloud:.4} >= 1 at {rate} req/s per site"));
        }
        Ok(())
    }

    /// Warmup for a run at `rate`: the configured value, or
    /// `max(0.1 horizon, 10 c / (mu (1 - rho)))` with `c` the largest
    /// station size and `rho` the busiest station's utilization.
    pub fn warmup_for(&self, rate: f64) -> Result<f64> {
        if let Some(w) = self.warmup_s {
            return Ok(w);
        }
        let total = rate * f64::from(self.k_sites);
        let w_max = self.weights().into_iter().fold(0.0, f64::max);
        let rho_edge = total * w_max / (f64::from(self.servers_per_site) * self.mu_req_per_s);
        let rho_cloud = total / (f64::from(self.cloud_servers()) * self.mu_req_per_s);
        let rho = rho_edge.max(rho_cloud);
        let c = f64::from(self.servers_per_site.max(self.cloud_servers()));
        let warmup = (0.1 * self.horizon_s).max(10.0 * c / (self.mu_req_per_s * (1.0 - rho)));
        if warmup >= self.horizon_s {
            return Err(CliError::Config(format!(
                "horizon_s = {} is too short: default warmup at {rate} req/s is {warmup:.1} s",
                self.horizon_s
            )));
        }
        Ok(warmup)
    }

    pub fn edge_deployment(&self) -> Deployment {
        let station = StationSpec::new(self.servers_per_site, self.service(), self.n_edge.clone());
        let routing = match self.routing {
            RoutingKind::PerSite => Routing::PerSite,
            RoutingKind::Weighted => Routing::Weighted(self.weights()),
            RoutingKind::Jsq => Routing::JoinShortestQueue,
        };
        Deployment::sites(vec![station; self.k_sites as usize], routing)
    }

    pub fn cloud_deployment(&self) -> Deployment {
        Deployment::pooled(StationSpec::new(self.cloud_servers(), self.service(), self.n_cloud.clone()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario fields are always representable in TOML")
    }
}

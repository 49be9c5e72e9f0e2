//! Closed-form queueing results for edge versus cloud deployments.
//!
//! Units: the M/M/k inversion results ([`whitt_conditional_wait`],
//! [`inversion_gap_mmk`], [`cutoff_utilization`], [`inversion_gap_skewed`],
//! [`min_servers_per_site`]) are dimensionless, with time measured in mean
//! service times `1/mu`. Use [`to_wall_clock`] and [`to_service_units`] to
//! convert. The Allen-Cunneen family takes an explicit `mu` and works in
//! seconds.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Absolute tolerance used when classifying utilizations at a boundary.
pub const BOUNDARY_TOL: f64 = 1e-12;

const SQRT_2: f64 = std::f64::consts::SQRT_2;

/// Utilization above which the high-load branch of [`ps_approx`] applies.
pub const PS_HIGH_LOAD_THRESHOLD: f64 = 0.7;

/// Converts a dimensionless time (multiples of `1/mu`) to seconds.
pub fn to_wall_clock(dimensionless: f64, mu: f64) -> f64 {
    dimensionless / mu
}

/// Converts seconds to multiples of the mean service time `1/mu`.
pub fn to_service_units(seconds: f64, mu: f64) -> f64 {
    seconds * mu
}

fn check_utilization(name: &str, rho: f64) -> Result<()> {
    if !rho.is_finite() || rho < 0.0 {
        return Err(Error::config(format!("{name} must be >= 0, got {rho}")));
    }
    if rho >= 1.0 - BOUNDARY_TOL {
        return Err(Error::unstable(format!("{name} = {rho} is not below 1")));
    }
    Ok(())
}

fn check_servers(k: u32) -> Result<()> {
    if k == 0 {
        Err(Error::config("server count k must be >= 1"))
    } else {
        Ok(())
    }
}

fn check_rate(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::config(format!("{name} must be finite and > 0, got {v}")))
    }
}

fn check_scv(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(Error::config(format!("{name} must be finite and >= 0, got {v}")))
    }
}

/// `k` homogeneous servers of rate `mu` fed at total rate `lambda`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QueueParams {
    pub k: u32,
    pub lambda: f64,
    pub mu: f64,
}

impl QueueParams {
    pub fn new(k: u32, lambda: f64, mu: f64) -> Self {
        Self { k, lambda, mu }
    }

    /// Builds the parameters that give utilization `rho` with `k` servers.
    pub fn from_utilization(k: u32, rho: f64, mu: f64) -> Self {
        Self {
            k,
            lambda: rho * f64::from(k) * mu,
            mu,
        }
    }

    pub fn utilization(&self) -> f64 {
        self.lambda / (f64::from(self.k) * self.mu)
    }

    pub fn offered_load(&self) -> f64 {
        self.lambda / self.mu
    }

    /// Checks `k >= 1`, `mu > 0`, `lambda >= 0` and `rho < 1`.
    pub fn check_stable(&self) -> Result<()> {
        check_servers(self.k)?;
        check_rate("mu", self.mu)?;
        if !(self.lambda.is_finite() && self.lambda >= 0.0) {
            return Err(Error::config(format!("lambda must be >= 0, got {}", self.lambda)));
        }
        check_utilization("utilization", self.utilization())
    }
}

/// Network round trips of the two deployments, in seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NetworkGap {
    pub n_edge: f64,
    pub n_cloud: f64,
}

impl NetworkGap {
    pub fn new(n_edge: f64, n_cloud: f64) -> Result<Self> {
        if !(n_edge.is_finite() && n_cloud.is_finite() && n_edge >= 0.0) {
            return Err(Error::config("network latencies must be finite and >= 0"));
        }
        if n_cloud < n_edge {
            return Err(Error::config(format!(
                "cloud RTT {n_cloud} is below edge RTT {n_edge}"
            )));
        }
        Ok(Self { n_edge, n_cloud })
    }

    pub fn delta_n(&self) -> f64 {
        self.n_cloud - self.n_edge
    }

    /// The gap in multiples of the mean service time.
    pub fn delta_n_service_units(&self, mu: f64) -> f64 {
        to_service_units(self.delta_n(), mu)
    }
}

/// Probability that an arrival waits in an M/M/k queue with offered load `a`.
///
/// Uses the Erlang-B recursion `B(n) = a B(n-1) / (n + a B(n-1))`, which is
/// stable for large `k`, then `C = B / (1 - (a/k)(1 - B))`.
pub fn erlang_c(k: u32, a: f64) -> Result<f64> {
    check_servers(k)?;
    if !(a.is_finite() && a >= 0.0) {
        return Err(Error::config(format!("offered load must be >= 0, got {a}")));
    }
    let kf = f64::from(k);
    if a >= kf * (1.0 - BOUNDARY_TOL) {
        return Err(Error::unstable(format!("offered load {a} is not below k = {k}")));
    }
    let mut b = 1.0;
    for n in 1..=k {
        b = a * b / (f64::from(n) + a * b);
    }
    Ok(b / (1.0 - (a / kf) * (1.0 - b)))
}

/// Exact mean waiting time in queue of an M/M/k system, in seconds.
pub fn mmk_mean_wait(p: &QueueParams) -> Result<f64> {
    p.check_stable()?;
    if p.lambda == 0.0 {
        return Ok(0.0);
    }
    let c = erlang_c(p.k, p.offered_load())?;
    Ok(c / (f64::from(p.k) * p.mu - p.lambda))
}

/// Conditional wait `E[w | w > 0] = sqrt(2) / ((1 - rho) sqrt(k))`, in mean
/// service times.
pub fn whitt_conditional_wait(k: u32, rho: f64) -> Result<f64> {
    check_servers(k)?;
    check_utilization("rho", rho)?;
    Ok(SQRT_2 / ((1.0 - rho) * f64::from(k).sqrt()))
}

/// Network gap below which `k` single-server edge sites lose to a pooled
/// `k`-server cloud: `sqrt(2) (1/(1-rho_edge) - 1/(sqrt(k)(1-rho_cloud)))`.
///
/// Dimensionless; inversion is predicted iff `delta_n` (in mean service
/// times) is below the returned value.
pub fn inversion_gap_mmk(k: u32, rho_edge: f64, rho_cloud: f64) -> Result<f64> {
    check_servers(k)?;
    check_utilization("rho_edge", rho_edge)?;
    check_utilization("rho_cloud", rho_cloud)?;
    Ok(SQRT_2 * (1.0 / (1.0 - rho_edge) - 1.0 / (f64::from(k).sqrt() * (1.0 - rho_cloud))))
}

/// Smallest cloud RTT (dimensionless, with `n_edge = 0`) that still lets
/// the cloud lose; below it the edge always yields worse end-to-end latency.
/// Same expression as [`inversion_gap_mmk`].
pub fn cloud_latency_lower_bound(k: u32, rho_edge: f64, rho_cloud: f64) -> Result<f64> {
    inversion_gap_mmk(k, rho_edge, rho_cloud)
}

/// Which constant multiplies `1/delta_n` in the cutoff utilization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConstantMode {
    /// The rounded constant 2.
    #[default]
    Paper,
    /// `sqrt(2)`, the exact rearrangement of [`inversion_gap_mmk`].
    Exact,
}

impl ConstantMode {
    pub fn constant(self) -> f64 {
        match self {
            ConstantMode::Paper => 2.0,
            ConstantMode::Exact => SQRT_2,
        }
    }
}

impl std::fmt::Display for ConstantMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ConstantMode::Paper => "paper",
            ConstantMode::Exact => "exact",
        })
    }
}

impl std::str::FromStr for ConstantMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "paper" => Ok(ConstantMode::Paper),
            "exact" => Ok(ConstantMode::Exact),
            other => Err(Error::config(format!("unknown constant mode `{other}`"))),
        }
    }
}

fn clamp_utilization(rho: f64) -> f64 {
    if rho.is_nan() {
        0.0
    } else {
        rho.clamp(0.0, 1.0)
    }
}

/// Edge utilization above which inversion is predicted for a balanced
/// workload: `1 - (c/delta_n)(1 - 1/sqrt(k))`, clamped to `[0, 1]`.
///
/// Returns exactly 1 for `k = 1`: a single site never inverts. A
/// non-positive `delta_n` yields 0 for `k > 1`.
pub fn cutoff_utilization(k: u32, delta_n: f64, mode: ConstantMode) -> f64 {
    if k <= 1 {
        return 1.0;
    }
    if delta_n <= 0.0 {
        return 0.0;
    }
    let kf = f64::from(k);
    clamp_utilization(1.0 - (mode.constant() / delta_n) * (1.0 - 1.0 / kf.sqrt()))
}

/// Large-`k` limit of [`cutoff_utilization`]: `1 - c/delta_n`.
pub fn cutoff_utilization_limit(delta_n: f64, mode: ConstantMode) -> f64 {
    if delta_n <= 0.0 {
        return 0.0;
    }
    clamp_utilization(1.0 - mode.constant() / delta_n)
}

/// Approximate probability of waiting in a G/G/k queue:
/// `(rho^k + rho)/2` when `rho >= 0.7`, else `rho^((k+1)/2)`.
pub fn ps_approx(k: u32, rho: f64) -> Result<f64> {
    check_servers(k)?;
    check_utilization("rho", rho)?;
    let kf = f64::from(k);
    if rho >= PS_HIGH_LOAD_THRESHOLD - BOUNDARY_TOL {
        Ok((rho.powf(kf) + rho) / 2.0)
    } else {
        Ok(rho.powf((kf + 1.0) / 2.0))
    }
}

/// Allen-Cunneen mean wait of a G/G/1 queue, in seconds:
/// `rho/(mu(1-rho)) * (ca2 + cb2)/2`.
pub fn ac_wait_gg1(rho: f64, mu: f64, ca2: f64, cb2: f64) -> Result<f64> {
    check_rate("mu", mu)?;
    check_scv("ca2", ca2)?;
    check_scv("cb2", cb2)?;
    check_utilization("rho", rho)?;
    Ok(rho / (mu * (1.0 - rho)) * (ca2 + cb2) / 2.0)
}

/// Allen-Cunneen mean wait of a G/G/k queue, in seconds:
/// `P_s/(mu(1-rho)) * (ca2 + cb2)/(2k)` with `P_s` from [`ps_approx`].
pub fn ac_wait_ggk(p: &QueueParams, ca2: f64, cb2: f64) -> Result<f64> {
    p.check_stable()?;
    check_scv("ca2", ca2)?;
    check_scv("cb2", cb2)?;
    let rho = p.utilization();
    let ps = ps_approx(p.k, rho)?;
    Ok(ps / (p.mu * (1.0 - rho)) * (ca2 + cb2) / (2.0 * f64::from(p.k)))
}

/// Workload seen by one G/G/1 edge site.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdgeWorkload {
    pub rho: f64,
    pub mu: f64,
    pub ca2: f64,
    pub cb2: f64,
}

/// Workload seen by the pooled G/G/k cloud. Service variability is shared
/// with the edge, so only the arrival scv is carried here.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CloudWorkload {
    pub rho: f64,
    pub mu: f64,
    pub ca2: f64,
}

/// Network gap in seconds below which G/G/1 edge sites lose to a G/G/k
/// cloud: edge G/G/1 wait minus cloud G/G/k wait, both Allen-Cunneen.
///
/// Both sides run identical hardware, so the cloud term uses the edge
/// service rate and service scv; a cloud `mu` that differs is rejected.
pub fn inversion_gap_ggk(k: u32, edge: &EdgeWorkload, cloud: &CloudWorkload) -> Result<f64> {
    check_rate("cloud mu", cloud.mu)?;
    if (cloud.mu - edge.mu).abs() > 1e-12 * edge.mu.abs().max(1.0) {
        return Err(Error::config(format!(
            "edge and cloud service rates must match ({} vs {})",
            edge.mu, cloud.mu
        )));
    }
    let edge_wait = ac_wait_gg1(edge.rho, edge.mu, edge.ca2, edge.cb2)?;
    check_utilization("cloud rho", cloud.rho)?;
    let cloud_params = QueueParams::from_utilization(k, cloud.rho, edge.mu);
    let cloud_wait = ac_wait_ggk(&cloud_params, cloud.ca2, edge.cb2)?;
    Ok(edge_wait - cloud_wait)
}

/// Large-`k` limit of [`inversion_gap_ggk`]: the edge waiting time alone.
pub fn inversion_gap_ggk_limit(rho_edge: f64, mu: f64, ca2: f64, cb2: f64) -> Result<f64> {
    ac_wait_gg1(rho_edge, mu, ca2, cb2)
}

/// Spatial split of an aggregate workload across edge sites.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkewProfile {
    weights: Vec<f64>,
    utilizations: Vec<f64>,
    rates: Vec<f64>,
}

impl SkewProfile {
    /// From per-site arrival rates and a per-site service rate `mu`
    /// (one server per site): `w_i = lambda_i / sum(lambda)`,
    /// `rho_i = lambda_i / mu`.
    pub fn from_rates(rates: &[f64], mu: f64) -> Result<Self> {
        check_rate("mu", mu)?;
        if rates.is_empty() {
            return Err(Error::config("skew profile needs at least one site"));
        }
        if rates.iter().any(|r| !(r.is_finite() && *r >= 0.0)) {
            return Err(Error::config("site rates must be finite and >= 0"));
        }
        let total: f64 = rates.iter().sum();
        if total <= 0.0 {
            return Err(Error::config("total site rate must be > 0"));
        }
        let profile = Self {
            weights: rates.iter().map(|r| r / total).collect(),
            utilizations: rates.iter().map(|r| r / mu).collect(),
            rates: rates.to_vec(),
        };
        profile.check_utilizations()?;
        Ok(profile)
    }

    /// From explicit weights and site utilizations; `rates` are set to the
    /// weights, i.e. a unit total rate.
    pub fn from_weights(weights: &[f64], utilizations: &[f64]) -> Result<Self> {
        check_weights(weights)?;
        if weights.len() != utilizations.len() {
            return Err(Error::config(format!(
                "{} weights but {} site utilizations",
                weights.len(),
                utilizations.len()
            )));
        }
        let profile = Self {
            weights: weights.to_vec(),
            utilizations: utilizations.to_vec(),
            rates: weights.to_vec(),
        };
        profile.check_utilizations()?;
        Ok(profile)
    }

    fn check_utilizations(&self) -> Result<()> {
        for (i, rho) in self.utilizations.iter().enumerate() {
            check_utilization(&format!("utilization of edge site {i}"), *rho)?;
        }
        Ok(())
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn utilizations(&self) -> &[f64] {
        &self.utilizations
    }

    pub fn rates(&self) -> &[f64] {
        &self.rates
    }

    pub fn sites(&self) -> usize {
        self.weights.len()
    }
}

/// Checks that weights are nonnegative and sum to one within 1e-9.
pub fn check_weights(weights: &[f64]) -> Result<()> {
    if weights.is_empty() {
        return Err(Error::config("weights must be nonempty"));
    }
    if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
        return Err(Error::config("weights must be finite and >= 0"));
    }
    let sum: f64 = weights.iter().sum();
    if (sum - 1.0).abs() > 1e-9 {
        return Err(Error::config(format!("weights sum to {sum}, expected 1")));
    }
    Ok(())
}

/// Skewed analogue of [`inversion_gap_mmk`]: the edge term becomes the
/// request-weighted average `sum w_i sqrt(2)/(1 - rho_i)`.
pub fn inversion_gap_skewed(profile: &SkewProfile, k: u32, rho_cloud: f64) -> Result<f64> {
    check_servers(k)?;
    profile.check_utilizations()?;
    check_utilization("rho_cloud", rho_cloud)?;
    let edge: f64 = profile
        .weights
        .iter()
        .zip(&profile.utilizations)
        .map(|(w, rho)| w / (1.0 - rho))
        .sum();
    Ok(SQRT_2 * (edge - 1.0 / (f64::from(k).sqrt() * (1.0 - rho_cloud))))
}

/// Upper end of the server-count search in [`min_servers_per_site`].
pub const MAX_SITE_SERVERS: u32 = 1_000_000;

/// Smallest server count `k_i` at a site with rate `lambda_i` such that
/// `delta_n >= sqrt(2)(1/(sqrt(k_i)(1 - lambda_i/(mu k_i)))
///                    - 1/(sqrt(k)(1 - lambda/(mu k))))`.
///
/// `delta_n` is in mean service times. The search scans upward from the
/// smallest stable `k_i` without assuming the gap is monotone in `k_i`. A
/// site with no load needs one server.
pub fn min_servers_per_site(
    delta_n: f64,
    lambda_i: f64,
    mu: f64,
    k: u32,
    lambda_total: f64,
) -> Result<u32> {
    check_servers(k)?;
    check_rate("mu", mu)?;
    if !(delta_n.is_finite() && delta_n >= 0.0) {
        return Err(Error::config(format!("delta_n must be >= 0, got {delta_n}")));
    }
    if !(lambda_i.is_finite() && lambda_i >= 0.0) {
        return Err(Error::config(format!("lambda_i must be >= 0, got {lambda_i}")));
    }
    let cloud = QueueParams::new(k, lambda_total, mu);
    cloud.check_stable()?;
    if lambda_i == 0.0 {
        return Ok(1);
    }
    let cloud_term = 1.0 / (f64::from(k).sqrt() * (1.0 - cloud.utilization()));
    let load = lambda_i / mu;
    let first = (load.floor() as u32).saturating_add(1).max(1);
    for ki in first..=MAX_SITE_SERVERS {
        let kf = f64::from(ki);
        let rho_i = load / kf;
        if rho_i >= 1.0 - BOUNDARY_TOL {
            continue;
        }
        let gap = SQRT_2 * (1.0 / (kf.sqrt() * (1.0 - rho_i)) - cloud_term);
        if delta_n >= gap {
            return Ok(ki);
        }
    }
    Err(Error::NoSolution(format!(
        "no server count up to {MAX_SITE_SERVERS} satisfies delta_n = {delta_n}"
    )))
}

/// Two-sigma peak capacities for Poisson load `lambda` spread over `k` sites.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeakCapacity {
    /// `lambda + 2 sqrt(lambda)`
    pub cloud: f64,
    /// `k (lambda/k + 2 sqrt(lambda/k)) = lambda + 2 sqrt(k lambda)`
    pub edge: f64,
}

pub fn peak_capacity(lambda: f64, k: u32) -> Result<PeakCapacity> {
    check_servers(k)?;
    if !(lambda.is_finite() && lambda >= 0.0) {
        return Err(Error::config(format!("lambda must be >= 0, got {lambda}")));
    }
    Ok(PeakCapacity {
        cloud: lambda + 2.0 * lambda.sqrt(),
        edge: lambda + 2.0 * (f64::from(k) * lambda).sqrt(),
    })
}

/// Constants of the spatial-skew capacity model. All positive; `gamma`
/// cancels out of the capacity equations but is kept for completeness.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SkewConstants {
    /// Standard deviation of the edge service time.
    pub sigma_s: f64,
    pub beta: f64,
    /// Service area.
    pub area: f64,
    /// Travel speed of the repair-person analogue.
    pub speed: f64,
    /// Batch size of VM arrivals.
    pub batch: f64,
    pub gamma: f64,
}

/// Inputs of the packing-capacity model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapacityParams {
    /// Packing factor: lower bound on VMs hosted per edge site.
    pub q: f64,
    pub rho_edge: f64,
    pub rho_cloud: f64,
    /// Expected VM upload time to an edge site.
    pub tau_edge: f64,
    /// Aggregate edge capacity in servers.
    pub c_edge: f64,
    pub skew: SkewConstants,
}

/// Edge-to-cloud capacity ratio for dense packing: `1 + 1/q`.
pub fn dtrp_capacity_ratio(q: f64) -> Result<f64> {
    if !(q.is_finite() && q >= 1.0) {
        return Err(Error::config(format!("packing factor q must be >= 1, got {q}")));
    }
    Ok(1.0 + 1.0 / q)
}

/// Cloud capacity matching the packing performance of the edge:
/// `C_edge (1 - rho_edge - tau/C_edge)^2 / ((1 + 1/q)(1 - rho_cloud)^2)`.
///
/// The result is below `C_edge` whenever `rho_cloud <= rho_edge + tau/C_edge`.
pub fn dtrp_cloud_capacity(cp: &CapacityParams) -> Result<f64> {
    let ratio = dtrp_capacity_ratio(cp.q)?;
    check_rate("c_edge", cp.c_edge)?;
    if !(cp.tau_edge.is_finite() && cp.tau_edge >= 0.0) {
        return Err(Error::config(format!("tau_edge must be >= 0, got {}", cp.tau_edge)));
    }
    check_utilization("rho_cloud", cp.rho_cloud)?;
    if !(cp.rho_edge.is_finite() && cp.rho_edge >= 0.0) {
        return Err(Error::config(format!("rho_edge must be >= 0, got {}", cp.rho_edge)));
    }
    let slack = 1.0 - cp.rho_edge - cp.tau_edge / cp.c_edge;
    if slack <= 0.0 {
        return Err(Error::unstable(format!(
            "1 - rho_edge - tau_edge/c_edge = {slack} is not positive"
        )));
    }
    let denom = ratio * (1.0 - cp.rho_cloud).powi(2);
    if denom <= 0.0 {
        return Err(Error::unstable("cloud denominator is not positive"));
    }
    Ok(cp.c_edge * slack * slack / denom)
}

/// Coefficients of `a C^2 + b C + c = 0` whose positive root is the edge
/// capacity required under spatial skew.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SkewQuadratic {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl SkewQuadratic {
    pub fn discriminant(&self) -> f64 {
        self.b * self.b - 4.0 * self.a * self.c
    }
}

/// Inputs of the skewed capacity equation beyond [`CapacityParams`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SkewedCapacityInputs {
    /// VM arrival rate at an edge site.
    pub lambda_edge: f64,
    /// Number of edge sites; each holds `C_edge / k_edge` servers.
    pub k_edge: u32,
    pub mu_cloud: f64,
    /// Cloud capacity in servers.
    pub c_cloud: f64,
}

/// Both sides of the skewed capacity balance at a candidate edge capacity:
/// heavy-traffic edge wait (left) and high-load Allen-Cunneen cloud wait
/// with Poisson arrivals and exponential lifetimes (right).
pub fn skew_balance(cp: &CapacityParams, inputs: &SkewedCapacityInputs, c_edge: f64) -> (f64, f64) {
    let s = &cp.skew;
    let lam = inputs.lambda_edge;
    let per_site = c_edge / f64::from(inputs.k_edge);
    let geometry = s.beta * s.area.sqrt() / (s.speed * s.batch.sqrt());
    let lhs = lam * (1.0 / (lam * lam) + s.sigma_s * s.sigma_s / (per_site * per_site))
        / (2.0 * (1.0 - cp.rho_edge - lam / c_edge * geometry));
    (lhs, cloud_wait_term(cp.rho_cloud, inputs))
}

fn cloud_wait_term(rho_cloud: f64, inputs: &SkewedCapacityInputs) -> f64 {
    (rho_cloud * rho_cloud + rho_cloud) / (2.0 * inputs.c_cloud * inputs.mu_cloud * (1.0 - rho_cloud))
}

/// Clears denominators in [`skew_balance`] to get a quadratic in `C_edge`.
pub fn skew_quadratic(cp: &CapacityParams, inputs: &SkewedCapacityInputs) -> Result<SkewQuadratic> {
    let s = &cp.skew;
    check_rate("lambda_edge", inputs.lambda_edge)?;
    check_servers(inputs.k_edge)?;
    check_rate("mu_cloud", inputs.mu_cloud)?;
    check_rate("c_cloud", inputs.c_cloud)?;
    check_rate("area", s.area)?;
    check_rate("speed", s.speed)?;
    check_rate("batch", s.batch)?;
    if !(s.beta.is_finite() && s.beta >= 0.0 && s.sigma_s.is_finite() && s.sigma_s >= 0.0) {
        return Err(Error::config("beta and sigma_s must be finite and >= 0"));
    }
    check_utilization("rho_cloud", cp.rho_cloud)?;
    check_utilization("rho_edge", cp.rho_edge)?;
    let lam = inputs.lambda_edge;
    let k = f64::from(inputs.k_edge);
    let r = cloud_wait_term(cp.rho_cloud, inputs);
    let geometry = s.beta * s.area.sqrt() / (s.speed * s.batch.sqrt());
    Ok(SkewQuadratic {
        a: 2.0 * r * (1.0 - cp.rho_edge) - 1.0 / lam,
        b: -2.0 * r * lam * geometry,
        c: -lam * s.sigma_s * s.sigma_s * k * k,
    })
}

/// Total edge capacity required to match the cloud under spatial skew,
/// i.e. the positive root of [`skew_quadratic`].
pub fn dtrp_skewed_edge_capacity(cp: &CapacityParams, inputs: &SkewedCapacityInputs) -> Result<f64> {
    let quad = skew_quadratic(cp, inputs)?;
    let disc = quad.discriminant();
    if disc < 0.0 {
        return Err(Error::NoSolution(format!(
            "skewed capacity quadratic has negative discriminant {disc}"
        )));
    }
    let root = if quad.a.abs() <= f64::EPSILON * (quad.b.abs() + quad.c.abs()) {
        if quad.b == 0.0 {
            return Err(Error::NoSolution("skewed capacity equation is degenerate".into()));
        }
        -quad.c / quad.b
    } else if quad.b == 0.0 {
        // Pure quadratic: the skew geometry term vanished.
        let sq = -quad.c / quad.a;
        if sq <= 0.0 {
            return Err(Error::NoSolution("no positive edge capacity balances the cloud".into()));
        }
        sq.sqrt()
    } else {
        // Numerically stable pair: q = -(b + sign(b) sqrt(disc))/2.
        let qv = -0.5 * (quad.b + quad.b.signum() * disc.sqrt());
        let r1 = qv / quad.a;
        let r2 = quad.c / qv;
        r1.max(r2)
    };
    if !(root.is_finite() && root > 0.0) {
        return Err(Error::NoSolution("no positive edge capacity balances the cloud".into()));
    }
    Ok(root)
}

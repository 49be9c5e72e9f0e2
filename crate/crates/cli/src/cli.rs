use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use edge_inversion::analytic::{self, CapacityParams, ConstantMode, QueueParams, SkewConstants, SkewProfile};
use edge_inversion::distributions::DistributionSpec;
use edge_inversion::simulator::write_samples_csv;
use edge_inversion::workload::load_trace_csv;
use serde::Serialize;
use serde_json::Value;

use crate::error::{CliError, Result};
use crate::experiment::{run_point, run_replication, run_sweep, AnalyticCutoff};
use crate::replay::{replay, TraceSetup};
use crate::report::{to_json, write_atomic, Format, SimulateReport, SweepReport};
use crate::scenario::Scenario;

#[derive(Debug, Parser)]
#[command(name = "edgeinv", version, about = "Edge versus cloud latency: queueing formulas, simulation and sweeps")]
pub struct Cli {
    /// Root seed; overrides the scenario's `seed`.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Report file; written atomically.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Suppress the human-readable summary.
    #[arg(long, global = true)]
    pub quiet: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate a closed-form queueing expression.
    Analytic {
        #[command(subcommand)]
        query: AnalyticQuery,
    },
    /// Capacity provisioning calculators.
    Capacity {
        #[command(subcommand)]
        query: CapacityQuery,
    },
    /// Simulate a scenario at its `per_site_rate_req_per_s`.
    Simulate {
        config: PathBuf,
        /// Write raw samples of the first replication to
        /// `<PREFIX>-edge.csv` and `<PREFIX>-cloud.csv`.
        #[arg(long, value_name = "PREFIX")]
        samples: Option<PathBuf>,
    },
    /// Sweep `rate_sweep_req_per_s` and locate the crossover.
    Sweep { config: PathBuf },
    /// Replay a per-minute request trace on the edge sites and the cloud.
    Trace(TraceArgs),
}

#[derive(Debug, Args)]
pub struct TraceArgs {
    /// CSV with columns `site,minute,count`.
    pub trace: PathBuf,
    /// Scenario supplying deployment parameters; flags below override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub servers_per_site: Option<u32>,
    #[arg(long)]
    pub cloud_servers: Option<u32>,
    #[arg(long)]
    pub mu: Option<f64>,
    #[arg(long)]
    pub service: Option<DistributionSpec>,
    #[arg(long)]
    pub n_edge: Option<DistributionSpec>,
    #[arg(long)]
    pub n_cloud: Option<DistributionSpec>,
    #[arg(long)]
    pub warmup_s: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum AnalyticQuery {
    /// Probability of waiting in M/M/k with offered load `a`.
    ErlangC {
        #[arg(long)]
        k: u32,
        #[arg(long)]
        a: f64,
    },
    /// Exact M/M/k mean waiting time.
    MmkWait {
        #[arg(long)]
        k: u32,
        #[arg(long)]
        lambda: f64,
        #[arg(long)]
        mu: f64,
    },
    /// Conditional waiting time approximation, in mean service times.
    Whitt {
        #[arg(long)]
        k: u32,
        #[arg(long)]
        rho: f64,
    },
    /// Network gap below which M/M/1 edge sites lose to an M/M/k cloud.
    GapMmk {
        #[arg(long)]
        k: u32,
        #[arg(long)]
        rho_edge: f64,
        #[arg(long)]
        rho_cloud: f64,
    },
    /// Edge utilization above which the cloud wins.
    Cutoff {
        #[arg(long)]
        k: u32,
        #[arg(long)]
        delta_n: f64,
        #[arg(long, default_value = "paper")]
        mode: ConstantMode,
    },
    /// Large-k limit of the cutoff utilization.
    CutoffLimit {
        #[arg(long)]
        delta_n: f64,
        #[arg(long, default_value = "paper")]
        mode: ConstantMode,
    },
    /// Minimum cloud network latency at which the edge always loses.
    CloudBound {
        #[arg(long)]
        k: u32,
        #[arg(long)]
        rho_edge: f64,
        #[arg(long)]
        rho_cloud: f64,
    },
    /// Allen-Cunneen waiting-probability approximation.
    Ps {
        #[arg(long)]
        k: u32,
        #[arg(long)]
        rho: f64,
    },
    /// Allen-Cunneen G/G/1 mean wait.
    AcGg1 {
        #[arg(long)]
        rho: f64,
        #[arg(long)]
        mu: f64,
        #[arg(long)]
        ca2: f64,
        #[arg(long)]
        cb2: f64,
    },
    /// Allen-Cunneen G/G/k mean wait.
    AcGgk {
        #[arg(long)]
        k: u32,
        #[arg(long)]
        rho: f64,
        #[arg(long)]
        mu: f64,
        #[arg(long)]
        ca2: f64,
        #[arg(long)]
        cb2: f64,
    },
    /// Network gap, seconds, below which G/G/1 edge sites lose to a G/G/k cloud.
    GapGgk {
        #[arg(long)]
        k: u32,
        #[arg(long)]
        rho_edge: f64,
        #[arg(long)]
        rho_cloud: f64,
        #[arg(long)]
        mu: f64,
        #[arg(long)]
        ca2_edge: f64,
        #[arg(long)]
        ca2_cloud: f64,
        #[arg(long)]
        cb2: f64,
    },
    /// Large-k limit of gap-ggk.
    GapGgkLimit {
        #[arg(long)]
        rho_edge: f64,
        #[arg(long)]
        mu: f64,
        #[arg(long)]
        ca2: f64,
        #[arg(long)]
        cb2: f64,
    },
    /// Inversion gap with unequal per-site load.
    GapSkewed {
        #[arg(long)]
        k: u32,
        /// Per-site arrival rates, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        rates: Vec<f64>,
        #[arg(long)]
        mu: f64,
        #[arg(long)]
        rho_cloud: f64,
    },
    /// Smallest server count keeping a skewed site ahead of the cloud.
    MinServers {
        #[arg(long)]
        delta_n: f64,
        #[arg(long)]
        lambda_i: f64,
        #[arg(long)]
        mu: f64,
        #[arg(long)]
        k: u32,
        #[arg(long)]
        lambda_total: f64,
    },
    /// Edge-to-cloud capacity ratio `1 + 1/q`.
    CapacityRatio {
        #[arg(long)]
        q: f64,
    },
}

#[derive(Debug, Args)]
pub struct DtrpArgs {
    #[arg(long)]
    pub q: f64,
    #[arg(long)]
    pub rho_edge: f64,
    #[arg(long)]
    pub rho_cloud: f64,
    #[arg(long, default_value_t = 0.0)]
    pub tau: f64,
}

#[derive(Debug, Subcommand)]
pub enum CapacityQuery {
    /// Two-sigma peak capacity for the cloud and for `k` edge sites.
    Peak {
        #[arg(long)]
        lambda: f64,
        #[arg(long)]
        k: u32,
    },
    /// Edge-to-cloud capacity ratio `1 + 1/q`.
    Ratio {
        #[arg(long)]
        q: f64,
    },
    /// Cloud capacity matching an edge deployment of `c_edge` servers.
    Dtrp {
        #[command(flatten)]
        common: DtrpArgs,
        #[arg(long)]
        c_edge: f64,
    },
    /// Total edge capacity required under spatial skew.
    Skewed {
        #[command(flatten)]
        common: DtrpArgs,
        #[arg(long)]
        lambda_edge: f64,
        #[arg(long)]
        k_edge: u32,
        #[arg(long)]
        mu_cloud: f64,
        #[arg(long)]
        c_cloud: f64,
        #[arg(long)]
        sigma_s: f64,
        #[arg(long, default_value_t = 0.0)]
        beta: f64,
        #[arg(long, default_value_t = 1.0)]
        area: f64,
        #[arg(long, default_value_t = 1.0)]
        speed: f64,
        #[arg(long, default_value_t = 1.0)]
        batch: f64,
        #[arg(long, default_value_t = 1.0)]
        gamma: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Quantity {
    pub name: String,
    pub value: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub unit: Option<&'static str>,
}

/// Inputs and results of an analytic or capacity query.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QueryReport {
    pub query: String,
    pub inputs: Vec<Quantity>,
    pub results: Vec<Quantity>,
}

impl QueryReport {
    fn new(query: &str) -> Self {
        Self {
            query: query.into(),
            inputs: Vec::new(),
            results: Vec::new(),
        }
    }

    fn input(mut self, name: &str, value: impl Into<Value>, unit: Option<&'static str>) -> Self {
        self.inputs.push(Quantity { name: name.into(), value: value.into(), unit });
        self
    }

    fn result(mut self, name: &str, value: impl Into<Value>, unit: Option<&'static str>) -> Self {
        self.results.push(Quantity { name: name.into(), value: value.into(), unit });
        self
    }

    pub fn table(&self) -> String {
        let width = self
            .inputs
            .iter()
            .chain(&self.results)
            .map(|q| q.name.len())
            .max()
            .unwrap_or(0);
        let mut out = format!("{}\n", self.query);
        let mut row = |prefix: &str, q: &Quantity| {
            let value = match &q.value {
                Value::String(s) => s.clone(),
                v => v.to_string(),
            };
            let unit = q.unit.map(|u| format!("  [{u}]")).unwrap_or_default();
            let _ = writeln!(out, "{prefix} {:<width$}  {value}{unit}", q.name);
        };
        for q in &self.inputs {
            row(" ", q);
        }
        for q in &self.results {
            row("=", q);
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("kind,name,value,unit\n");
        for (kind, list) in [("input", &self.inputs), ("result", &self.results)] {
            for q in list {
                let value = match &q.value {
                    Value::String(s) => s.clone(),
                    v => v.to_string(),
                };
                let _ = writeln!(out, "{kind},{},{value},{}", q.name, q.unit.unwrap_or(""));
            }
        }
        out
    }
}

const SERVERS: Option<&str> = Some("servers");
const UTIL: Option<&str> = Some("utilization");
const RATE: Option<&str> = Some("req/s");
const SECONDS: Option<&str> = Some("s");
const SERVICE_TIMES: Option<&str> = Some("mean service times");
const SCV: Option<&str> = Some("squared CoV");

fn analytic_report(query: &AnalyticQuery) -> Result<QueryReport> {
    use AnalyticQuery as Q;
    let r = match *query {
        Q::ErlangC { k, a } => QueryReport::new("erlang-c")
            .input("k", k, SERVERS)
            .input("a", a, Some("erlangs"))
            .result("wait_probability", analytic::erlang_c(k, a)?, None),
        Q::MmkWait { k, lambda, mu } => QueryReport::new("mmk-wait")
            .input("k", k, SERVERS)
            .input("lambda", lambda, RATE)
            .input("mu", mu, RATE)
            .result("mean_wait", analytic::mmk_mean_wait(&QueueParams::new(k, lambda, mu))?, SECONDS),
        Q::Whitt { k, rho } => QueryReport::new("whitt")
            .input("k", k, SERVERS)
            .input("rho", rho, UTIL)
            .result("conditional_wait", analytic::whitt_conditional_wait(k, rho)?, SERVICE_TIMES),
        Q::GapMmk { k, rho_edge, rho_cloud } => QueryReport::new("gap-mmk")
            .input("k", k, SERVERS)
            .input("rho_edge", rho_edge, UTIL)
            .input("rho_cloud", rho_cloud, UTIL)
            .result("gap", analytic::inversion_gap_mmk(k, rho_edge, rho_cloud)?, SERVICE_TIMES),
        Q::Cutoff { k, delta_n, mode } => QueryReport::new("cutoff")
            .input("k", k, SERVERS)
            .input("delta_n", delta_n, SERVICE_TIMES)
            .input("mode", mode.to_string(), None)
            .result("cutoff_utilization", analytic::cutoff_utilization(k, delta_n, mode), UTIL),
        Q::CutoffLimit { delta_n, mode } => QueryReport::new("cutoff-limit")
            .input("delta_n", delta_n, SERVICE_TIMES)
            .input("mode", mode.to_string(), None)
            .result("cutoff_utilization", analytic::cutoff_utilization_limit(delta_n, mode), UTIL),
        Q::CloudBound { k, rho_edge, rho_cloud } => QueryReport::new("cloud-bound")
            .input("k", k, SERVERS)
            .input("rho_edge", rho_edge, UTIL)
            .input("rho_cloud", rho_cloud, UTIL)
            .result(
                "min_cloud_latency",
                analytic::cloud_latency_lower_bound(k, rho_edge, rho_cloud)?,
                SERVICE_TIMES,
            ),
        Q::Ps { k, rho } => QueryReport::new("ps")
            .input("k", k, SERVERS)
            .input("rho", rho, UTIL)
            .result("wait_probability", analytic::ps_approx(k, rho)?, None),
        Q::AcGg1 { rho, mu, ca2, cb2 } => QueryReport::new("ac-gg1")
            .input("rho", rho, UTIL)
            .input("mu", mu, RATE)
            .input("ca2", ca2, SCV)
            .input("cb2", cb2, SCV)
            .result("mean_wait", analytic::ac_wait_gg1(rho, mu, ca2, cb2)?, SECONDS),
        Q::AcGgk { k, rho, mu, ca2, cb2 } => QueryReport::new("ac-ggk")
            .input("k", k, SERVERS)
            .input("rho", rho, UTIL)
            .input("mu", mu, RATE)
            .input("ca2", ca2, SCV)
            .input("cb2", cb2, SCV)
            .result(
                "mean_wait",
                analytic::ac_wait_ggk(&QueueParams::from_utilization(k, rho, mu), ca2, cb2)?,
                SECONDS,
            ),
        Q::GapGgk { k, rho_edge, rho_cloud, mu, ca2_edge, ca2_cloud, cb2 } => {
            let edge = analytic::EdgeWorkload { rho: rho_edge, mu, ca2: ca2_edge, cb2 };
            let cloud = analytic::CloudWorkload { rho: rho_cloud, mu, ca2: ca2_cloud };
            QueryReport::new("gap-ggk")
                .input("k", k, SERVERS)
                .input("rho_edge", rho_edge, UTIL)
                .input("rho_cloud", rho_cloud, UTIL)
                .input("mu", mu, RATE)
                .input("ca2_edge", ca2_edge, SCV)
                .input("ca2_cloud", ca2_cloud, SCV)
                .input("cb2", cb2, SCV)
                .result("gap", analytic::inversion_gap_ggk(k, &edge, &cloud)?, SECONDS)
        }
        Q::GapGgkLimit { rho_edge, mu, ca2, cb2 } => QueryReport::new("gap-ggk-limit")
            .input("rho_edge", rho_edge, UTIL)
            .input("mu", mu, RATE)
            .input("ca2", ca2, SCV)
            .input("cb2", cb2, SCV)
            .result("gap", analytic::inversion_gap_ggk_limit(rho_edge, mu, ca2, cb2)?, SECONDS),
        Q::GapSkewed { k, ref rates, mu, rho_cloud } => {
            let profile = SkewProfile::from_rates(rates, mu)?;
            QueryReport::new("gap-skewed")
                .input("k", k, SERVERS)
                .input("rates", rates.clone(), RATE)
                .input("mu", mu, RATE)
                .input("rho_cloud", rho_cloud, UTIL)
                .result("gap", analytic::inversion_gap_skewed(&profile, k, rho_cloud)?, SERVICE_TIMES)
        }
        Q::MinServers { delta_n, lambda_i, mu, k, lambda_total } => QueryReport::new("min-servers")
            .input("delta_n", delta_n, SERVICE_TIMES)
            .input("lambda_i", lambda_i, RATE)
            .input("mu", mu, RATE)
            .input("k", k, SERVERS)
            .input("lambda_total", lambda_total, RATE)
            .result(
                "servers",
                analytic::min_servers_per_site(delta_n, lambda_i, mu, k, lambda_total)?,
                SERVERS,
            ),
        Q::CapacityRatio { q } => QueryReport::new("capacity-ratio")
            .input("q", q, None)
            .result("ratio", analytic::dtrp_capacity_ratio(q)?, None),
    };
    Ok(r)
}

fn capacity_params(common: &DtrpArgs, c_edge: f64, skew: SkewConstants) -> CapacityParams {
    CapacityParams {
        q: common.q,
        rho_edge: common.rho_edge,
        rho_cloud: common.rho_cloud,
        tau_edge: common.tau,
        c_edge,
        skew,
    }
}

fn with_common(r: QueryReport, c: &DtrpArgs) -> QueryReport {
    r.input("q", c.q, None)
        .input("rho_edge", c.rho_edge, UTIL)
        .input("rho_cloud", c.rho_cloud, UTIL)
        .input("tau", c.tau, SECONDS)
}

const NO_SKEW: SkewConstants = SkewConstants {
    sigma_s: 0.0,
    beta: 0.0,
    area: 1.0,
    speed: 1.0,
    batch: 1.0,
    gamma: 1.0,
};

fn capacity_report(query: &CapacityQuery) -> Result<QueryReport> {
    use CapacityQuery as Q;
    let r = match query {
        Q::Peak { lambda, k } => {
            let p = analytic::peak_capacity(*lambda, *k)?;
            QueryReport::new("peak")
                .input("lambda", *lambda, RATE)
                .input("k", *k, Some("sites"))
                .result("cloud", p.cloud, RATE)
                .result("edge", p.edge, RATE)
        }
        Q::Ratio { q } => QueryReport::new("ratio")
            .input("q", *q, None)
            .result("ratio", analytic::dtrp_capacity_ratio(*q)?, None),
        Q::Dtrp { common, c_edge } => {
            let cp = capacity_params(common, *c_edge, NO_SKEW);
            with_common(QueryReport::new("dtrp"), common)
                .input("c_edge", *c_edge, SERVERS)
                .result("c_cloud", analytic::dtrp_cloud_capacity(&cp)?, SERVERS)
        }
        Q::Skewed {
            common,
            lambda_edge,
            k_edge,
            mu_cloud,
            c_cloud,
            sigma_s,
            beta,
            area,
            speed,
            batch,
            gamma,
        } => {
            let skew = SkewConstants {
                sigma_s: *sigma_s,
                beta: *beta,
                area: *area,
                speed: *speed,
                batch: *batch,
                gamma: *gamma,
            };
            let cp = capacity_params(common, 0.0, skew);
            let inputs = analytic::SkewedCapacityInputs {
                lambda_edge: *lambda_edge,
                k_edge: *k_edge,
                mu_cloud: *mu_cloud,
                c_cloud: *c_cloud,
            };
            with_common(QueryReport::new("skewed"), common)
                .input("lambda_edge", *lambda_edge, RATE)
                .input("k_edge", *k_edge, Some("sites"))
                .input("mu_cloud", *mu_cloud, RATE)
                .input("c_cloud", *c_cloud, SERVERS)
                .input("sigma_s", *sigma_s, SECONDS)
                .input("beta", *beta, None)
                .input("area", *area, None)
                .input("speed", *speed, None)
                .input("batch", *batch, None)
                .input("gamma", *gamma, None)
                .result("c_edge", analytic::dtrp_skewed_edge_capacity(&cp, &inputs)?, SERVERS)
        }
    };
    Ok(r)
}

fn load_scenario(path: &Path, seed: Option<u64>) -> Result<Scenario> {
    let mut scenario = Scenario::load(path)?;
    if let Some(seed) = seed {
        scenario.seed = seed;
    }
    Ok(scenario)
}

/// Writes the report to `--out`, or prints it when no file is given.
fn emit(cli: &Cli, report: String, summary: &str) -> Result<()> {
    match &cli.out {
        Some(path) => {
            write_atomic(path, report.as_bytes())?;
            if !cli.quiet {
                print!("{summary}");
            }
        }
        None => print!("{report}"),
    }
    Ok(())
}

fn encode<T: Serialize>(cli: &Cli, value: &T, csv: impl FnOnce() -> String) -> Result<String> {
    match cli.format {
        Format::Json => to_json(value),
        Format::Csv => Ok(csv()),
    }
}

fn emit_query(cli: &Cli, report: &QueryReport) -> Result<()> {
    if !cli.quiet {
        print!("{}", report.table());
    }
    if let Some(path) = &cli.out {
        let text = encode(cli, report, || report.to_csv())?;
        write_atomic(path, text.as_bytes())?;
    }
    Ok(())
}

fn point_line(label: &str, mean_ms: f64, p95_ms: f64, ci_ms: f64) -> String {
    format!("{label:<6} mean {mean_ms} ms (+/- {ci_ms}), p95 {p95_ms} ms\n")
}

pub fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Analytic { query } => emit_query(cli, &analytic_report(query)?),
        Command::Capacity { query } => emit_query(cli, &capacity_report(query)?),
        Command::Simulate { config, samples } => {
            let scenario = load_scenario(config, cli.seed)?;
            let rate = scenario
                .per_site_rate_req_per_s
                .ok_or_else(|| CliError::Config("simulate requires per_site_rate_req_per_s".into()))?;
            scenario.check_stable(rate)?;
            let point = run_point(&scenario, rate)?;
            let report = SimulateReport::new(&scenario, &point, AnalyticCutoff::for_scenario(&scenario)?);
            if let Some(prefix) = samples {
                let cmp = run_replication(&scenario, rate, 0)?;
                for (side, out) in [("edge", &cmp.edge), ("cloud", &cmp.cloud)] {
                    let path = PathBuf::from(format!("{}-{side}.csv", prefix.display()));
                    let records: Vec<_> = out.stations.iter().flat_map(|s| s.records.iter().copied()).collect();
                    let mut buf = Vec::new();
                    write_samples_csv(&records, &mut buf).map_err(|e| CliError::io(&path, e))?;
                    write_atomic(&path, &buf)?;
                }
            }
            let text = encode(cli, &report, || report.to_csv())?;
            let p = &report.point;
            let summary = format!(
                "rate {} req/s per site, rho_edge {:.4}\n{}{}",
                p.rate,
                p.rho_edge,
                point_line("edge", p.edge.mean_ms, p.edge.p95_ms, p.edge.ci_ms),
                point_line("cloud", p.cloud.mean_ms, p.cloud.p95_ms, p.cloud.ci_ms)
            );
            emit(cli, text, &summary)
        }
        Command::Sweep { config } => {
            let scenario = load_scenario(config, cli.seed)?;
            let result = run_sweep(&scenario)?;
            let report = SweepReport::new(&scenario, &result);
            let text = encode(cli, &report, || report.to_csv())?;
            let mut summary = String::new();
            for p in &report.points {
                let winner = if p.edge.mean_ms <= p.cloud.mean_ms { "edge" } else { "cloud" };
                let _ = writeln!(
                    summary,
                    "{:>8} req/s  rho {:.3}  edge {:>10} ms  cloud {:>10} ms  {winner}",
                    p.rate, p.rho_edge, p.edge.mean_ms, p.cloud.mean_ms
                );
            }
            let fmt_rate = |r: Option<f64>| r.map(|r| format!("{r:.3} req/s")).unwrap_or_else(|| "none".into());
            let _ = writeln!(summary, "mean crossover: {}", fmt_rate(report.crossover.mean_rate));
            let _ = writeln!(summary, "p95 crossover:  {}", fmt_rate(report.crossover.p95_rate));
            emit(cli, text, &summary)
        }
        Command::Trace(args) => {
            let trace = load_trace_csv(&args.trace)?;
            let setup = trace_setup(cli, args, &trace)?;
            let report = replay(&trace, &setup)?;
            let text = encode(cli, &report, || report.to_csv())?;
            let mut summary = String::new();
            for st in report.sites.iter().chain(std::iter::once(&report.cloud)) {
                if let Some(b) = &st.summary {
                    let _ = writeln!(
                        summary,
                        "{:<12} n {:>8}  mean {} ms  p95 {} ms",
                        st.station, b.count, b.mean_ms, b.p95_ms
                    );
                }
            }
            emit(cli, text, &summary)
        }
    }
}

fn trace_setup(cli: &Cli, args: &TraceArgs, trace: &edge_inversion::workload::TraceTable) -> Result<TraceSetup> {
    let name = args.trace.display().to_string();
    let mut setup = match &args.config {
        Some(path) => TraceSetup::from_scenario(&load_scenario(path, None)?, trace, name)?,
        None => {
            let mu = args
                .mu
                .ok_or_else(|| CliError::Config("trace needs --mu or --config".into()))?;
            let servers = args.servers_per_site.unwrap_or(1);
            TraceSetup {
                trace: name,
                servers_per_site: servers,
                cloud_servers: servers * trace.sites().len() as u32,
                mu_req_per_s: mu,
                service: DistributionSpec::exponential(mu),
                n_edge: DistributionSpec::deterministic(0.0),
                n_cloud: DistributionSpec::deterministic(0.0),
                seed: crate::scenario::DEFAULT_SEED,
                warmup_s: 0.0,
            }
        }
    };
    if let Some(s) = args.servers_per_site {
        setup.servers_per_site = s;
        if args.cloud_servers.is_none() && args.config.is_none() {
            setup.cloud_servers = s * trace.sites().len() as u32;
        }
    }
    if let Some(c) = args.cloud_servers {
        setup.cloud_servers = c;
    }
    if let Some(mu) = args.mu {
        setup.mu_req_per_s = mu;
        if args.service.is_none() && args.config.is_none() {
            setup.service = DistributionSpec::exponential(mu);
        }
    }
    if let Some(s) = &args.service {
        setup.service = s.clone();
    }
    if let Some(n) = &args.n_edge {
        setup.n_edge = n.clone();
    }
    if let Some(n) = &args.n_cloud {
        setup.n_cloud = n.clone();
    }
    if let Some(w) = args.warmup_s {
        setup.warmup_s = w;
    }
    if let Some(seed) = cli.seed {
        setup.seed = seed;
    }
    if setup.servers_per_site == 0 || setup.cloud_servers == 0 {
        return Err(CliError::Config("server counts must be >= 1".into()));
    }
    Ok(setup)
}

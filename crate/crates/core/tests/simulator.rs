use edge_inversion::analytic::{erlang_c, mmk_mean_wait, QueueParams};
use edge_inversion::distributions::{DistributionSpec, RandomStream};
use edge_inversion::simulator::{
    run_edge_vs_cloud, simulate, summarize, Arrival, Deployment, Routing, SimConfig, StationSpec, Workload,
};
use edge_inversion::workload::{generate_arrivals, ArrivalPlan};
use proptest::prelude::*;

fn exp(rate: f64) -> DistributionSpec {
    DistributionSpec::exponential(rate)
}

fn det(v: f64) -> DistributionSpec {
    DistributionSpec::deterministic(v)
}

fn site_epochs(sites: u32, rate: f64, horizon: f64, seed: u64) -> Vec<Vec<f64>> {
    (0..sites)
        .map(|s| generate_arrivals(&ArrivalPlan::poisson(rate, horizon), &mut RandomStream::new(seed, u64::from(s))).unwrap())
        .collect()
}

fn pooled_run(k: u32, rho: f64, horizon: f64, warmup: f64, seed: u64) -> edge_inversion::simulator::SimOutput {
    let arrivals: Vec<Arrival> = generate_arrivals(&ArrivalPlan::poisson(f64::from(k) * rho, horizon), &mut RandomStream::new(seed, 0))
        .unwrap()
        .into_iter()
        .map(|t| Arrival::new(t, 0))
        .collect();
    let dep = Deployment::pooled(StationSpec::new(k, exp(1.0), det(0.0)));
    simulate(&dep, &arrivals, &SimConfig { warmup_s: warmup, horizon_s: horizon, seed }).unwrap()
}

#[test]
fn littles_law() {
    for (k, rho) in [(1, 0.7), (5, 0.8)] {
        let out = pooled_run(k, rho, 160_000.0, 10_000.0, 20 + u64::from(k));
        let st = &out.stations[0];
        let s = st.summary.as_ref().unwrap();
        assert!(s.count >= 100_000);
        let sojourn = s.mean_wait + s.mean_service;
        let l = st.stats.mean_in_system();
        let little = st.stats.arrival_rate() * sojourn;
        assert!((l - little).abs() / little < 0.03, "k={k}: L {l} vs lambda W {little}");
    }
}

#[test]
fn measured_utilization_matches_offered_load() {
    for (k, rho) in [(1, 0.5), (4, 0.9), (10, 0.3)] {
        let out = pooled_run(k, rho, 60_000.0, 5_000.0, 30 + u64::from(k));
        let u = out.stations[0].summary.as_ref().unwrap().measured_utilization.unwrap();
        assert!((u - rho).abs() / rho < 0.02, "k={k}: {u} vs {rho}");
        assert!((0.0..=1.0).contains(&u));
    }
}

#[test]
fn mm5_against_erlang_c() {
    let out = pooled_run(5, 0.5, 220_000.0, 20_000.0, 5);
    let w = out.stations[0].summary.as_ref().unwrap().mean_wait;
    let exact = erlang_c(5, 2.5).unwrap() / 2.5;
    assert!((w - exact).abs() / exact < 0.05, "{w} vs {exact}");
}

/// Per-site M/M/1 sites versus one pooled M/M/k station on the same requests.
fn split_versus_pooled(k: u32, rho: f64, routing: Routing, seed: u64) -> (f64, f64, Vec<f64>) {
    let horizon = 40_000.0;
    let workload = Workload::from_sites(&site_epochs(k, rho, horizon, seed));
    let edge = Deployment::sites(vec![StationSpec::new(1, exp(1.0), det(0.0)); k as usize], routing);
    let cloud = Deployment::pooled(StationSpec::new(k, exp(1.0), det(0.0)));
    let cmp = run_edge_vs_cloud(&edge, &cloud, &workload, &SimConfig { warmup_s: 4_000.0, horizon_s: horizon, seed }).unwrap();
    let per_site = cmp
        .edge
        .stations
        .iter()
        .map(|s| s.summary.as_ref().unwrap().mean_wait)
        .collect();
    (cmp.edge_aggregate.mean_wait, cmp.cloud_summary.mean_wait, per_site)
}

#[test]
fn pooling_never_loses() {
    for k in [2, 5, 10] {
        for rho in [0.3, 0.6, 0.9] {
            let (_, pooled, sites) = split_versus_pooled(k, rho, Routing::PerSite, 40 + u64::from(k));
            for (i, w) in sites.iter().enumerate() {
                assert!(pooled <= *w, "k={k} rho={rho} site {i}: pooled {pooled} vs {w}");
            }
        }
    }
}

#[test]
fn join_shortest_queue_beats_static_split() {
    for k in [2, 5] {
        let seed = 50 + u64::from(k);
        let (per_site, _, _) = split_versus_pooled(k, 0.8, Routing::PerSite, seed);
        let (jsq, _, _) = split_versus_pooled(k, 0.8, Routing::JoinShortestQueue, seed);
        assert!(jsq <= per_site, "k={k}: jsq {jsq} vs per-site {per_site}");
    }
}

#[test]
fn edge_and_cloud_regimes() {
    // Two servers per site keep 12 req/s per site stable; lognormal service
    // with squared CoV 2.
    let service = DistributionSpec::lognormal_with_moments(1.0 / 12.0, 2.0).unwrap();
    let edge = Deployment::sites(vec![StationSpec::new(2, service.clone(), det(0.001)); 5], Routing::PerSite);
    let cloud = Deployment::pooled(StationSpec::new(10, service, det(0.026)));
    let cfg = SimConfig { warmup_s: 200.0, horizon_s: 2_000.0, seed: 60 };
    let at = |rate: f64| {
        let workload = Workload::from_sites(&site_epochs(5, rate, 2_000.0, 60));
        let cmp = run_edge_vs_cloud(&edge, &cloud, &workload, &cfg).unwrap();
        (cmp.edge_aggregate.mean, cmp.cloud_summary.mean)
    };
    let (e, c) = at(6.0);
    assert!(e < c, "6 req/s: edge {e} vs cloud {c}");
    let (e, c) = at(12.0);
    assert!(e > c, "12 req/s: edge {e} vs cloud {c}");
}

#[test]
fn summaries_are_reproducible() {
    let a = pooled_run(3, 0.7, 5_000.0, 500.0, 70);
    let b = pooled_run(3, 0.7, 5_000.0, 500.0, 70);
    assert_eq!(a, b);
    let sa = a.aggregate().unwrap();
    let sb = b.aggregate().unwrap();
    assert_eq!(format!("{sa:?}"), format!("{sb:?}"));
}

#[test]
fn summary_orders_percentiles() {
    let out = pooled_run(2, 0.8, 20_000.0, 2_000.0, 80);
    let s = summarize(&out.observed_records()).unwrap();
    assert!(s.min <= s.q1 && s.q1 <= s.p50 && s.p50 <= s.q3 && s.q3 <= s.p95 && s.p95 <= s.p99 && s.p99 <= s.max);
    assert_eq!(s.histogram.counts.iter().sum::<u64>() as usize, s.count);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn records_conserve_requests_and_components(
        seed in any::<u64>(),
        sites in 1u32..5,
        servers in 1u32..4,
        rate in 0.1f64..3.0,
        routing in 0usize..3,
    ) {
        let per_site = site_epochs(sites, rate, 200.0, seed);
        let total: usize = per_site.iter().map(Vec::len).sum();
        let workload = Workload::from_sites(&per_site);
        let n = sites as usize;
        let routing = match routing {
            0 => Routing::PerSite,
            1 => Routing::Weighted(vec![1.0 / n as f64; n]),
            _ => Routing::JoinShortestQueue,
        };
        let dep = Deployment::sites(vec![StationSpec::new(servers, exp(1.0), exp(50.0)); n], routing);
        let out = simulate(&dep, &workload.arrivals, &SimConfig { warmup_s: 0.0, horizon_s: 200.0, seed }).unwrap();
        prop_assert_eq!(out.total_records(), total);
        for r in out.stations.iter().flat_map(|s| &s.records) {
            prop_assert!(r.wait >= 0.0 && r.service >= 0.0 && r.network >= 0.0);
            prop_assert_eq!(r.total, r.wait + r.service + r.network);
        }
        let again = simulate(&dep, &workload.arrivals, &SimConfig { warmup_s: 0.0, horizon_s: 200.0, seed }).unwrap();
        prop_assert_eq!(out, again);
    }

    #[test]
    fn idle_server_starts_immediately(gaps in proptest::collection::vec(1.0f64..5.0, 1..50), s in 0.0f64..1.0) {
        let mut t = 0.0;
        let arrivals: Vec<Arrival> = gaps.iter().map(|g| { t += g; Arrival::new(t, 0) }).collect();
        let dep = Deployment::pooled(StationSpec::new(1, det(s), det(0.0)));
        let out = simulate(&dep, &arrivals, &SimConfig { warmup_s: 0.0, horizon_s: t + 1.0, seed: 0 }).unwrap();
        prop_assert!(out.stations[0].records.iter().all(|r| r.wait == 0.0));
    }
}

#[test]
fn mm1_wait_against_closed_form() {
    let out = pooled_run(1, 0.5, 2_200_000.0, 100_000.0, 90);
    let s = out.stations[0].summary.as_ref().unwrap();
    assert!(s.count >= 1_000_000);
    let exact = mmk_mean_wait(&QueueParams::new(1, 0.5, 1.0)).unwrap();
    assert!((s.mean_wait - exact).abs() / exact < 0.05, "{}", s.mean_wait);
}

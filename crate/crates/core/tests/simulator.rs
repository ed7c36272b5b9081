mod common;

use common::{rel_err, waste};
use cvm::failure::FailureModel;
use cvm::periodic::optimal_period;
use cvm::sim::{simulate, Policy, SimConfig};
use cvm::spares::{availability_params, min_spares, SpareMethod};
use cvm::throughput::{
    throughput_checkpoint_sequential, throughput_migration_sequential, CostParams,
};
use cvm::units::{DAY, MONTH};

fn today() -> CostParams {
    CostParams::new(25.0, 25.0, 2.5, 1.0).unwrap()
}

fn config(machines: u64, policy: Policy) -> SimConfig {
    SimConfig {
        machines,
        horizon: 1e6,
        failure_model: FailureModel::exponential(DAY).unwrap(),
        costs: today(),
        policy,
        seed: 7,
        replications: 10,
    }
}

#[test]
fn predicted_checkpoint_matches_closed_form() {
    let r = simulate(&config(200, Policy::PredictedCheckpoint)).unwrap();
    let expect = throughput_checkpoint_sequential(200, DAY, &today()).unwrap();
    assert!(
        rel_err(r.mean_throughput, expect) < 0.01,
        "{} vs {expect}",
        r.mean_throughput
    );
    assert!(r.ci95_halfwidth.is_finite());
}

#[test]
fn migration_matches_closed_form_and_availability() {
    let n = 200;
    let params = availability_params(DAY, 1.0, 2.5).unwrap();
    let m = min_spares(n, params, 1e-4, SpareMethod::Exact).unwrap().m;
    // Generous pool so that no replication exhausts it.
    let r = simulate(&config(n, Policy::Migration { spares: m + 6 })).unwrap();
    assert_eq!(r.run_failure_rate, 0.0);
    let expect = throughput_migration_sequential(n, m + 6, DAY, 1.0).unwrap();
    assert!(
        rel_err(r.mean_throughput, expect) < 0.01,
        "{} vs {expect}",
        r.mean_throughput
    );
    let v = r.unavailable_fraction.unwrap();
    assert!(rel_err(v, params.v) < 0.05, "{v} vs {}", params.v);
}

#[test]
fn instant_success_meets_target() {
    let n = 500;
    let params = availability_params(DAY, 1.0, 2.5).unwrap();
    for eps in [1e-2, 1e-3] {
        let m = min_spares(n, params, eps, SpareMethod::Exact).unwrap().m;
        let mut c = config(n, Policy::Migration { spares: m });
        c.replications = 4;
        let r = simulate(&c).unwrap();
        let s = r.instant_success.unwrap();
        assert!(s >= 1.0 - eps, "eps={eps}: {s}");
    }
}

#[test]
fn short_runs_rarely_exhaust_the_pool() {
    let n = 500;
    let params = availability_params(DAY, 1.0, 2.5).unwrap();
    let eps = 1e-2;
    let m = min_spares(n, params, eps, SpareMethod::Exact).unwrap().m;
    let mut c = config(n, Policy::Migration { spares: m });
    // Starting from an empty outage set, a run shorter than one outage
    // exhausts the pool only if more than m failures land in it.
    c.horizon = 3.5;
    c.replications = 2000;
    let r = simulate(&c).unwrap();
    assert!(r.run_failure_rate <= eps, "{}", r.run_failure_rate);
    assert!(r.warnings.iter().any(|w| w.contains("horizon")));
}

#[test]
fn zero_cost_migration_keeps_every_machine_busy() {
    let mut c = config(50, Policy::Migration { spares: 0 });
    c.costs = CostParams::new(25.0, 25.0, 0.0, 0.0).unwrap();
    c.horizon = 100.0 * DAY;
    let r = simulate(&c).unwrap();
    assert_eq!(r.run_failure_rate, 0.0);
    assert!((r.mean_throughput - 50.0).abs() < 1e-9);
    assert!(r.failures > 0);
}

#[test]
fn migration_warns_when_not_sensible() {
    let mut c = config(50, Policy::Migration { spares: 10 });
    c.costs = CostParams::new(1.0, 1.0, 1.0, 5.0).unwrap();
    c.horizon = 100.0 * DAY;
    c.replications = 2;
    let r = simulate(&c).unwrap();
    assert!(r.warnings.iter().any(|w| w.contains("M < C+D+R")));
}

#[test]
fn periodic_single_node_waste() {
    let costs = CostParams::new(1.0, 1.0, 1.0, 0.0).unwrap();
    let t = optimal_period(1.0, MONTH).unwrap();
    let c = SimConfig {
        machines: 1,
        horizon: 400.0 * MONTH,
        failure_model: FailureModel::exponential(MONTH).unwrap(),
        costs,
        policy: Policy::Periodic {
            period: t,
            job_size_log2: 0,
        },
        seed: 3,
        replications: 8,
    };
    let r = simulate(&c).unwrap();
    let expect = waste(1.0, t, MONTH, 1.0, 1.0);
    let got = r.measured_waste.unwrap();
    assert!(rel_err(got, expect) < 0.1, "{got} vs {expect}");
    let loss = r.mean_loss_per_failure.unwrap();
    assert!(rel_err(loss, t / 2.0) < 0.05, "{loss} vs {}", t / 2.0);
}

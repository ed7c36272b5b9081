//! Seeded Monte Carlo simulation of the three resilience policies.
//!
//! The simulator is an independent check on the closed forms: it never calls
//! into the analytic modules. Failure prediction is perfect, costless and has
//! zero lead time. Failure clocks run on exposure time: a machine (or job)
//! cannot fail while it is checkpointing, migrating, rebooting or recovering.
//!
//! Each replication owns its random stream (`rng_stream(seed, replication)`)
//! and its event state, so replications run in parallel and merge in index
//! order; identical configurations give bit-identical results.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, VecDeque};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{ensure_positive, ModelError, Result};
use crate::failure::{rng_stream, FailureModel, FailureSampler, SimRng};
use crate::throughput::CostParams;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Policy {
    /// Checkpoint just before each predicted failure, then reboot and recover.
    PredictedCheckpoint,
    /// Move the job to a spare before each predicted failure.
    Migration { spares: u64 },
    /// One job of `2^job_size_log2` processors checkpointing every `period`
    /// minutes, with no prediction.
    Periodic { period: f64, job_size_log2: u32 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub machines: u64,
    /// Simulated wall-clock length of each replication, in minutes.
    pub horizon: f64,
    pub failure_model: FailureModel,
    pub costs: CostParams,
    pub policy: Policy,
    pub seed: u64,
    pub replications: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    /// Mean throughput over completed replications, in machine-equivalents.
    pub mean_throughput: f64,
    /// 95% Student-t half-width of `mean_throughput`; infinite with fewer
    /// than two completed replications.
    pub ci95_halfwidth: f64,
    /// Fraction of replications in which the spare pool ran dry.
    pub run_failure_rate: f64,
    pub replications: u32,
    pub completed_replications: u32,
    /// Failures over all replications.
    pub failures: u64,
    /// Periodic policy: `1 - useful / elapsed`, averaged over replications.
    pub measured_waste: Option<f64>,
    /// Periodic policy: mean work lost per failure, i.e. time since the last
    /// committed checkpoint.
    pub mean_loss_per_failure: Option<f64>,
    /// Migration policy: fraction of non-idle machine time spent migrating
    /// or rebooting.
    pub unavailable_fraction: Option<f64>,
    /// Migration policy: fraction of time during which at most `m` machines
    /// were migrating or rebooting.
    pub instant_success: Option<f64>,
    pub warnings: Vec<String>,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.machines == 0 {
            return Err(ModelError::domain("N must be >= 1"));
        }
        ensure_positive("horizon", self.horizon)?;
        if self.replications == 0 {
            return Err(ModelError::domain("replications must be >= 1"));
        }
        self.failure_model.validate()?;
        self.costs.validate()?;
        match self.policy {
            Policy::PredictedCheckpoint => Ok(()),
            Policy::Migration { spares } if spares > self.machines => Err(ModelError::domain(
                format!("m = {spares} exceeds N = {}", self.machines),
            )),
            Policy::Migration { .. } => Ok(()),
            Policy::Periodic {
                period,
                job_size_log2,
            } => {
                if !(period.is_finite() && period > 0.0) {
                    return Err(ModelError::domain(format!(
                        "period T must be > 0, got {period}"
                    )));
                }
                if job_size_log2 >= 40 || (1u64 << job_size_log2) > self.machines {
                    return Err(ModelError::domain(format!(
                        "job of 2^{job_size_log2} processors does not fit on N = {}",
                        self.machines
                    )));
                }
                Ok(())
            }
        }
    }
}

#[derive(Debug, Default, Clone, Copy)]
struct Replication {
    throughput: f64,
    exhausted: bool,
    failures: u64,
    waste: f64,
    lost_work: f64,
    unavailable_time: f64,
    busy_time: f64,
    within_spares_time: f64,
}

pub fn simulate(config: &SimConfig) -> Result<SimResult> {
    config.validate()?;
    let sampler = config.failure_model.sampler()?;
    let runs: Vec<Replication> = (0..config.replications)
        .into_par_iter()
        .map(|r| {
            let mut rng = rng_stream(config.seed, u64::from(r));
            match config.policy {
                Policy::PredictedCheckpoint => predicted_checkpoint(config, &sampler, &mut rng),
                Policy::Migration { spares } => migration(config, spares, &sampler, &mut rng),
                Policy::Periodic {
                    period,
                    job_size_log2,
                } => periodic(config, period, job_size_log2, &sampler, &mut rng),
            }
        })
        .collect();
    Ok(aggregate(config, &runs))
}

fn aggregate(config: &SimConfig, runs: &[Replication]) -> SimResult {
    let completed: Vec<f64> = runs
        .iter()
        .filter(|r| !r.exhausted)
        .map(|r| r.throughput)
        .collect();
    let n_ok = completed.len();
    let mean = if n_ok == 0 {
        0.0
    } else {
        completed.iter().sum::<f64>() / n_ok as f64
    };
    let ci = if n_ok < 2 {
        f64::INFINITY
    } else {
        let var = completed.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n_ok - 1) as f64;
        let t = StudentsT::new(0.0, 1.0, (n_ok - 1) as f64)
            .map(|d| d.inverse_cdf(0.975))
            .unwrap_or(1.96);
        t * (var / n_ok as f64).sqrt()
    };
    let reps = runs.len() as f64;
    let failures: u64 = runs.iter().map(|r| r.failures).sum();
    let exhausted = runs.iter().filter(|r| r.exhausted).count();

    let mut result = SimResult {
        mean_throughput: mean,
        ci95_halfwidth: ci,
        run_failure_rate: exhausted as f64 / reps,
        replications: config.replications,
        completed_replications: n_ok as u32,
        failures,
        measured_waste: None,
        mean_loss_per_failure: None,
        unavailable_fraction: None,
        instant_success: None,
        warnings: Vec::new(),
    };
    match config.policy {
        Policy::PredictedCheckpoint => {}
        Policy::Migration { .. } => {
            let unavailable: f64 = runs.iter().map(|r| r.unavailable_time).sum();
            let busy: f64 = runs.iter().map(|r| r.busy_time).sum();
            result.unavailable_fraction = Some(unavailable / (unavailable + busy));
            result.instant_success = Some(
                runs.iter().map(|r| r.within_spares_time).sum::<f64>() / (reps * config.horizon),
            );
        }
        Policy::Periodic { .. } => {
            result.measured_waste = Some(runs.iter().map(|r| r.waste).sum::<f64>() / reps);
            if failures > 0 {
                result.mean_loss_per_failure =
                    Some(runs.iter().map(|r| r.lost_work).sum::<f64>() / failures as f64);
            }
        }
    }

    let mtbf = config.failure_model.mtbf();
    if config.horizon < 100.0 * mtbf {
        result.warnings.push(format!(
            "horizon {} is shorter than 100 x MTBF ({}); estimates may be biased",
            config.horizon,
            100.0 * mtbf
        ));
    }
    if let Some(w) = config.costs.sensibility_warning() {
        if matches!(config.policy, Policy::Migration { .. }) {
            result.warnings.push(w);
        }
    }
    if exhausted > 0 {
        result.warnings.push(format!(
            "spare pool exhausted in {exhausted} of {} replications; those runs are excluded from the throughput mean",
            runs.len()
        ));
    }
    result
}

/// Every machine alternates a failure-free work span with a `C + D + R`
/// outage; the next failure time is drawn afresh after each outage.
fn predicted_checkpoint(
    config: &SimConfig,
    sampler: &FailureSampler,
    rng: &mut SimRng,
) -> Replication {
    let horizon = config.horizon;
    let outage = config.costs.checkpoint_outage();
    let mut useful = 0.0;
    let mut failures = 0;
    for _ in 0..config.machines {
        let mut t = 0.0;
        while t < horizon {
            let work = sampler.sample(rng);
            if t + work >= horizon {
                useful += horizon - t;
                break;
            }
            useful += work;
            failures += 1;
            t += work + outage;
        }
    }
    Replication {
        throughput: useful / horizon,
        failures,
        ..Default::default()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum EventKind {
    /// Predicted failure of a working machine.
    Failure,
    /// A machine starts (or resumes) hosting a job.
    Resume { after_outage: bool },
    /// A rebooted machine returns to the spare pool.
    Rejoin,
}

impl EventKind {
    fn rank(self) -> u8 {
        match self {
            EventKind::Rejoin => 0,
            EventKind::Resume { .. } => 1,
            EventKind::Failure => 2,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Event {
    time: f64,
    machine: usize,
    kind: EventKind,
}

// Min-heap order on (time, machine, kind).
impl Ord for Event {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .time
            .total_cmp(&self.time)
            .then_with(|| other.machine.cmp(&self.machine))
            .then_with(|| other.kind.rank().cmp(&self.kind.rank()))
    }
}

impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for Event {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Event {}

/// `N - m` machines host jobs and `m` wait in the pool. On a predicted
/// failure the job moves to a pooled spare, unavailable for `M`; the victim
/// reboots for `D` and joins the pool. If the pool is empty the replication
/// is marked exhausted; the job then waits for its own host to reboot so that
/// occupancy statistics stay defined for the rest of the horizon.
fn migration(
    config: &SimConfig,
    spares: u64,
    sampler: &FailureSampler,
    rng: &mut SimRng,
) -> Replication {
    let horizon = config.horizon;
    let n = config.machines as usize;
    let m = spares as usize;
    let mig = config.costs.migration;
    let down = config.costs.downtime;
    let outage = mig + down;

    let mut queue = BinaryHeap::new();
    let mut pool: VecDeque<usize> = (n - m..n).collect();
    let mut work_start = vec![f64::NAN; n];
    for (machine, start) in work_start.iter_mut().enumerate().take(n - m) {
        *start = 0.0;
        queue.push(Event {
            time: sampler.sample(rng),
            machine,
            kind: EventKind::Failure,
        });
    }

    let mut rep = Replication::default();
    let mut unavailable = 0usize;
    let mut last_time = 0.0;

    while let Some(ev) = queue.pop() {
        if ev.time >= horizon {
            break;
        }
        let dt = ev.time - last_time;
        rep.unavailable_time += unavailable as f64 * dt;
        if unavailable <= m {
            rep.within_spares_time += dt;
        }
        last_time = ev.time;

        match ev.kind {
            EventKind::Failure => {
                let i = ev.machine;
                rep.busy_time += ev.time - work_start[i];
                work_start[i] = f64::NAN;
                rep.failures += 1;
                if outage == 0.0 {
                    // Nothing to wait for: the host restarts on the spot.
                    work_start[i] = ev.time;
                    queue.push(Event {
                        time: ev.time + sampler.sample(rng),
                        machine: i,
                        kind: EventKind::Failure,
                    });
                    continue;
                }
                unavailable += 1;
                match pool.pop_front() {
                    Some(j) => {
                        queue.push(Event {
                            time: ev.time + mig,
                            machine: j,
                            kind: EventKind::Resume {
                                after_outage: false,
                            },
                        });
                        queue.push(Event {
                            time: ev.time + outage,
                            machine: i,
                            kind: EventKind::Rejoin,
                        });
                    }
                    None => {
                        rep.exhausted = true;
                        queue.push(Event {
                            time: ev.time + outage,
                            machine: i,
                            kind: EventKind::Resume { after_outage: true },
                        });
                    }
                }
            }
            EventKind::Resume { after_outage } => {
                if after_outage {
                    unavailable -= 1;
                }
                work_start[ev.machine] = ev.time;
                queue.push(Event {
                    time: ev.time + sampler.sample(rng),
                    machine: ev.machine,
                    kind: EventKind::Failure,
                });
            }
            EventKind::Rejoin => {
                unavailable -= 1;
                pool.push_back(ev.machine);
            }
        }
    }

    let dt = horizon - last_time;
    rep.unavailable_time += unavailable as f64 * dt;
    if unavailable <= m {
        rep.within_spares_time += dt;
    }
    rep.busy_time += work_start
        .iter()
        .filter(|s| !s.is_nan())
        .map(|s| horizon - s)
        .sum::<f64>();
    rep.throughput = rep.busy_time / horizon;
    rep
}

#[derive(Debug, Clone, Copy)]
struct NodeClock {
    at: f64,
    node: usize,
}

impl Ord for NodeClock {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .at
            .total_cmp(&self.at)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for NodeClock {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for NodeClock {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for NodeClock {}

/// One job on `2^k` nodes. Each period is `T - C` of work followed by a
/// checkpoint of length `C`; work is committed when the checkpoint ends. A
/// failure loses everything since the last commit, then costs `R + D`, and the
/// job restarts with a fresh period. Only the failed node is renewed; the
/// other nodes keep their accumulated exposure.
fn periodic(
    config: &SimConfig,
    period: f64,
    k: u32,
    sampler: &FailureSampler,
    rng: &mut SimRng,
) -> Replication {
    let horizon = config.horizon;
    let nodes = 1usize << k;
    let work_per_period = (period - config.costs.checkpoint).max(0.0);
    let restart = config.costs.recovery + config.costs.downtime;

    let mut clocks: BinaryHeap<NodeClock> = (0..nodes)
        .map(|node| NodeClock {
            at: sampler.sample(rng),
            node,
        })
        .collect();

    let mut rep = Replication::default();
    let mut useful = 0.0;
    let mut wall = 0.0;
    let mut exposed = 0.0;
    while wall < horizon {
        let next = *clocks.peek().expect("at least one node");
        let span = next.at - exposed;
        if wall + span >= horizon {
            let left = horizon - wall;
            let full = (left / period).floor();
            useful += full * work_per_period + (left - full * period).min(work_per_period);
            break;
        }
        let full = (span / period).floor();
        useful += full * work_per_period;
        rep.lost_work += span - full * period;
        rep.failures += 1;
        wall += span + restart;
        exposed = next.at;
        clocks.pop();
        clocks.push(NodeClock {
            at: exposed + sampler.sample(rng),
            node: next.node,
        });
    }
    rep.waste = 1.0 - useful / horizon;
    rep.throughput = useful / horizon * nodes as f64;
    rep
}

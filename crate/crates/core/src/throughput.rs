//! Closed-form platform throughput under checkpointing and under migration.
//!
//! Throughputs are machine-equivalents. With perfect failure prediction,
//! checkpointing costs `C + D + R` per failure while migration costs `M` per
//! failure but reserves `m` machines as spares.

use serde::{Deserialize, Serialize};

use crate::error::{ensure_non_negative, ensure_positive, ModelError, Result};
use crate::failure::{FailureModel, GroupMtbfRule};
use crate::jobmix::JobMix;

/// Resilience costs, in minutes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostParams {
    /// Checkpoint save time.
    pub checkpoint: f64,
    /// Recovery time.
    pub recovery: f64,
    /// Down/reboot time.
    pub downtime: f64,
    /// Migration time.
    pub migration: f64,
}

impl CostParams {
    pub fn new(checkpoint: f64, recovery: f64, downtime: f64, migration: f64) -> Result<Self> {
        let costs = Self {
            checkpoint,
            recovery,
            downtime,
            migration,
        };
        costs.validate()?;
        Ok(costs)
    }

    pub fn validate(&self) -> Result<()> {
        ensure_non_negative("C", self.checkpoint)?;
        ensure_non_negative("R", self.recovery)?;
        ensure_non_negative("D", self.downtime)?;
        ensure_non_negative("M", self.migration)
    }

    /// Time lost per failure under checkpointing, `C + D + R`.
    pub fn checkpoint_outage(&self) -> f64 {
        self.checkpoint + self.downtime + self.recovery
    }

    /// Migration only pays off when it is cheaper than checkpointing through
    /// the failure: `M < C + D + R`.
    pub fn migration_sensible(&self) -> bool {
        self.migration < self.checkpoint_outage()
    }

    /// Warning text when migration is not cheaper than checkpointing.
    pub fn sensibility_warning(&self) -> Option<String> {
        (!self.migration_sensible()).then(|| {
            format!(
                "migration makes sense only if M < C+D+R (M = {}, C+D+R = {})",
                self.migration,
                self.checkpoint_outage()
            )
        })
    }
}

/// One cell of a comparison table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThroughputReport {
    pub rho_cp: f64,
    pub rho_m: f64,
    pub spares_m: u64,
    pub improvement_pct: f64,
}

impl ThroughputReport {
    pub fn new(rho_cp: f64, rho_m: f64, spares_m: u64) -> Result<Self> {
        Ok(Self {
            rho_cp,
            rho_m,
            spares_m,
            improvement_pct: improvement_pct(rho_m, rho_cp)?,
        })
    }
}

fn check_machines(n: u64) -> Result<()> {
    if n == 0 {
        Err(ModelError::domain("N must be >= 1"))
    } else {
        Ok(())
    }
}

/// `N mu / (mu + C + D + R)`.
pub fn throughput_checkpoint_sequential(n: u64, mu: f64, costs: &CostParams) -> Result<f64> {
    check_machines(n)?;
    ensure_positive("mu", mu)?;
    costs.validate()?;
    Ok(n as f64 * mu / (mu + costs.checkpoint_outage()))
}

/// `(N - m) mu / (mu + M)`.
pub fn throughput_migration_sequential(n: u64, m: u64, mu: f64, migration: f64) -> Result<f64> {
    check_machines(n)?;
    if m > n {
        return Err(ModelError::domain(format!("m = {m} exceeds N = {n}")));
    }
    ensure_positive("mu", mu)?;
    ensure_non_negative("M", migration)?;
    Ok((n - m) as f64 * mu / (mu + migration))
}

/// `sum_k beta_k 2^k mu_k / (mu_k + C + D + R)`, where `mu_k` is the MTBF of
/// a job spanning `2^k` processors.
pub fn throughput_checkpoint_parallel(
    mix: &JobMix,
    model: &FailureModel,
    costs: &CostParams,
    rule: GroupMtbfRule,
) -> Result<f64> {
    model.validate()?;
    costs.validate()?;
    let outage = costs.checkpoint_outage();
    mix.sizes().try_fold(0.0, |acc, (k, size, beta)| {
        let mu_k = model.group_mtbf(k, rule)?;
        Ok(acc + beta * size * mu_k / (mu_k + outage))
    })
}

/// Exponential form of [`throughput_checkpoint_parallel`]:
/// `sum_k beta_k 2^k (1/lambda) / (1/lambda + 2^k (C + D + R))`.
pub fn throughput_checkpoint_parallel_exponential(
    mix: &JobMix,
    mu: f64,
    costs: &CostParams,
) -> Result<f64> {
    ensure_positive("mu", mu)?;
    costs.validate()?;
    let outage = costs.checkpoint_outage();
    Ok(mix
        .sizes()
        .map(|(_, size, beta)| beta * size * mu / (mu + size * outage))
        .sum())
}

/// `(sum_k beta_k 2^k mu / (mu + 2^k M)) (N - m) / N`.
///
/// The per-machine `mu` enters here, not the group MTBF; the `2^k M` term is
/// the job-level migration penalty.
pub fn throughput_migration_parallel(mix: &JobMix, mu: f64, migration: f64, m: u64) -> Result<f64> {
    ensure_positive("mu", mu)?;
    ensure_non_negative("M", migration)?;
    let n = mix.machines;
    if m as f64 > n {
        return Err(ModelError::domain(format!("m = {m} exceeds N = {n}")));
    }
    let busy: f64 = mix
        .sizes()
        .map(|(_, size, beta)| beta * size * mu / (mu + size * migration))
        .sum();
    Ok(busy * (n - m as f64) / n)
}

/// Percentage improvement of migration over checkpointing.
pub fn improvement_pct(rho_m: f64, rho_cp: f64) -> Result<f64> {
    if rho_cp == 0.0 {
        return Err(ModelError::UndefinedImprovement);
    }
    if !rho_cp.is_finite() || rho_cp < 0.0 || !rho_m.is_finite() {
        return Err(ModelError::domain(format!(
            "throughputs must be finite and non-negative (rho_cp = {rho_cp}, rho_m = {rho_m})"
        )));
    }
    Ok(100.0 * (rho_m - rho_cp) / rho_cp)
}

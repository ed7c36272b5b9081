//! Periodic checkpointing when failures are not predicted.
//!
//! With a checkpoint of cost `C` every `T` minutes and a failure every `mu`
//! minutes on average, the wasted fraction of time is `C/T + T/(2 mu)`;
//! charging recovery and reboot per failure gives
//! `C/T + (T/2 + R + D)/mu`. Both are minimised at `T = sqrt(2 C mu)`.

use serde::{Deserialize, Serialize};

use crate::error::{ensure_non_negative, ensure_positive, ModelError, Result};
use crate::jobmix::JobMix;

/// Minimum waste at the optimal period.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MinWaste {
    /// `(R + D)/mu + sqrt(2 C / mu)`, possibly above 1.
    pub unclamped: f64,
    /// `min(unclamped, 1)`.
    pub clamped: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityThreshold {
    /// Threshold on `1/sqrt(mu)`; `None` when `R + D = 0`.
    pub nu_b: Option<f64>,
    /// Smallest MTBF at which the minimum waste stays at or below 1.
    pub mu_min: f64,
}

fn ensure_period(period: f64) -> Result<()> {
    if period.is_finite() && period > 0.0 {
        Ok(())
    } else {
        Err(ModelError::domain(format!(
            "period T must be > 0, got {period}"
        )))
    }
}

/// `C/T + T/(2 mu)`.
pub fn waste_young(checkpoint: f64, period: f64, mu: f64) -> Result<f64> {
    ensure_period(period)?;
    ensure_non_negative("C", checkpoint)?;
    ensure_positive("mu", mu)?;
    Ok(checkpoint / period + period / (2.0 * mu))
}

/// `sqrt(2 C mu)`.
pub fn optimal_period(checkpoint: f64, mu: f64) -> Result<f64> {
    ensure_non_negative("C", checkpoint)?;
    ensure_positive("mu", mu)?;
    Ok((2.0 * checkpoint * mu).sqrt())
}

/// `C/T + (T/2 + R + D)/mu`.
pub fn waste_extended(
    checkpoint: f64,
    period: f64,
    mu: f64,
    recovery: f64,
    downtime: f64,
) -> Result<f64> {
    ensure_period(period)?;
    ensure_non_negative("C", checkpoint)?;
    ensure_positive("mu", mu)?;
    ensure_non_negative("R", recovery)?;
    ensure_non_negative("D", downtime)?;
    Ok(checkpoint / period + (period / 2.0 + recovery + downtime) / mu)
}

pub fn min_waste_extended(
    checkpoint: f64,
    mu: f64,
    recovery: f64,
    downtime: f64,
) -> Result<MinWaste> {
    ensure_non_negative("C", checkpoint)?;
    ensure_positive("mu", mu)?;
    ensure_non_negative("R", recovery)?;
    ensure_non_negative("D", downtime)?;
    let unclamped = (recovery + downtime) / mu + (2.0 * checkpoint / mu).sqrt();
    Ok(MinWaste {
        unclamped,
        clamped: unclamped.min(1.0),
    })
}

/// Smallest MTBF for which a job still progresses (`W_min <= 1`).
///
/// With `nu = 1/sqrt(mu)` the condition is
/// `nu^2 (R+D) + nu sqrt(2C) - 1 <= 0`, whose positive root is `nu_b`.
/// Without recovery or downtime only `sqrt(2C/mu) <= 1` remains, i.e.
/// `mu >= 2C`.
pub fn mtbf_feasibility_threshold(
    checkpoint: f64,
    recovery: f64,
    downtime: f64,
) -> Result<FeasibilityThreshold> {
    ensure_non_negative("C", checkpoint)?;
    ensure_non_negative("R", recovery)?;
    ensure_non_negative("D", downtime)?;
    let rd = recovery + downtime;
    if rd == 0.0 {
        return Ok(FeasibilityThreshold {
            nu_b: None,
            mu_min: 2.0 * checkpoint,
        });
    }
    let s = (2.0 * checkpoint).sqrt();
    let nu_b = (-s + (2.0 * checkpoint + 4.0 * rd).sqrt()) / (2.0 * rd);
    Ok(FeasibilityThreshold {
        nu_b: Some(nu_b),
        mu_min: 1.0 / (nu_b * nu_b),
    })
}

/// `N (1 - min(W_min, 1))` for independent sequential jobs.
pub fn yield_independent(
    n: u64,
    checkpoint: f64,
    mu: f64,
    recovery: f64,
    downtime: f64,
) -> Result<f64> {
    if n == 0 {
        return Err(ModelError::domain("N must be >= 1"));
    }
    let w = min_waste_extended(checkpoint, mu, recovery, downtime)?;
    Ok(n as f64 * (1.0 - w.clamped))
}

/// `sum_k (1 - min(W_min(k), 1)) 2^k beta_k`, where `W_min(k)` uses the
/// exponential group MTBF `mu / 2^k`.
pub fn yield_parallel(
    mix: &JobMix,
    checkpoint: f64,
    mu: f64,
    recovery: f64,
    downtime: f64,
) -> Result<f64> {
    ensure_positive("mu", mu)?;
    yield_parallel_with(mix, checkpoint, recovery, downtime, |k| {
        Ok(mu / 2f64.powi(k as i32))
    })
}

/// [`yield_parallel`] with the group MTBF supplied by the caller.
pub fn yield_parallel_with<F>(
    mix: &JobMix,
    checkpoint: f64,
    recovery: f64,
    downtime: f64,
    group_mtbf: F,
) -> Result<f64>
where
    F: Fn(u32) -> Result<f64>,
{
    mix.sizes().try_fold(0.0, |acc, (k, size, beta)| {
        let w = min_waste_extended(checkpoint, group_mtbf(k)?, recovery, downtime)?;
        Ok(acc + (1.0 - w.clamped) * size * beta)
    })
}

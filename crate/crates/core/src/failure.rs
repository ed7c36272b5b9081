//! Failure-time distributions and the MTBF of processor groups.
//!
//! A job spanning `2^k` processors is interrupted by the first failure among
//! them, so its MTBF is the mean of the minimum of `2^k` i.i.d. failure times.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Weibull};
use serde::{Deserialize, Serialize};

use crate::error::{ensure_positive, ModelError, Result};
use crate::special::gamma;

/// Random stream owned by a single simulation replication.
pub type SimRng = ChaCha8Rng;

/// Stream `index` of the generator family identified by `seed`. Streams with
/// different indices are independent and reproducible.
pub fn rng_stream(seed: u64, index: u64) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Per-machine failure law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum FailureModel {
    Exponential { mtbf: f64 },
    Weibull { scale: f64, shape: f64 },
}

/// Which formula to use for the group MTBF of Weibull failures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GroupMtbfRule {
    /// `λ Γ(1 + 1/(a 2^k))`, as used by the original analysis.
    #[default]
    ScaledShape,
    /// `λ (2^k)^(-1/a) Γ(1 + 1/a)`, the mean of the minimum of `2^k` draws.
    Exact,
}

impl FailureModel {
    pub fn exponential(mtbf: f64) -> Result<Self> {
        ensure_positive("mtbf", mtbf)?;
        Ok(FailureModel::Exponential { mtbf })
    }

    pub fn weibull(scale: f64, shape: f64) -> Result<Self> {
        ensure_positive("weibull scale", scale)?;
        ensure_positive("weibull shape", shape)?;
        Ok(FailureModel::Weibull { scale, shape })
    }

    /// Weibull law with the given shape whose mean equals `mtbf`.
    pub fn weibull_with_mean(mtbf: f64, shape: f64) -> Result<Self> {
        ensure_positive("mtbf", mtbf)?;
        ensure_positive("weibull shape", shape)?;
        Self::weibull(mtbf / gamma(1.0 + 1.0 / shape), shape)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            FailureModel::Exponential { mtbf } => ensure_positive("mtbf", mtbf),
            FailureModel::Weibull { scale, shape } => {
                ensure_positive("weibull scale", scale)?;
                ensure_positive("weibull shape", shape)
            }
        }
    }

    /// Mean time between failures of a single machine.
    pub fn mtbf(&self) -> f64 {
        match *self {
            FailureModel::Exponential { mtbf } => mtbf,
            FailureModel::Weibull { scale, shape } => scale * gamma(1.0 + 1.0 / shape),
        }
    }

    /// MTBF of a group of `2^k` machines.
    pub fn group_mtbf(&self, k: u32, rule: GroupMtbfRule) -> Result<f64> {
        match (*self, rule) {
            (FailureModel::Exponential { mtbf }, _) => mtbf_of_group_exponential(mtbf, k),
            (FailureModel::Weibull { scale, shape }, GroupMtbfRule::ScaledShape) => {
                mtbf_of_group_weibull_scaled_shape(scale, shape, k)
            }
            (FailureModel::Weibull { scale, shape }, GroupMtbfRule::Exact) => {
                mtbf_of_group_weibull_exact(scale, shape, k)
            }
        }
    }

    /// A sampler that can be reused for many draws.
    pub fn sampler(&self) -> Result<FailureSampler> {
        match *self {
            FailureModel::Exponential { mtbf } => Exp::new(1.0 / mtbf)
                .map(FailureSampler::Exponential)
                .map_err(|e| ModelError::domain(e.to_string())),
            FailureModel::Weibull { scale, shape } => Weibull::new(scale, shape)
                .map(FailureSampler::Weibull)
                .map_err(|e| ModelError::domain(e.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub enum FailureSampler {
    Exponential(Exp<f64>),
    Weibull(Weibull<f64>),
}

impl FailureSampler {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            FailureSampler::Exponential(d) => d.sample(rng),
            FailureSampler::Weibull(d) => d.sample(rng),
        }
    }
}

/// One failure time drawn from `model`.
pub fn sample_failure_time<R: Rng + ?Sized>(model: &FailureModel, rng: &mut R) -> Result<f64> {
    Ok(model.sampler()?.sample(rng))
}

fn group_size(k: u32) -> f64 {
    2f64.powi(k as i32)
}

/// `mtbf / 2^k`: the minimum of `2^k` exponentials is exponential with a
/// `2^k`-fold rate.
pub fn mtbf_of_group_exponential(mtbf: f64, k: u32) -> Result<f64> {
    ensure_positive("mtbf", mtbf)?;
    Ok(mtbf / group_size(k))
}

/// `λ Γ(1 + 1/(a 2^k))`.
///
/// This is the group MTBF formula from the original analysis. It does not
/// equal the mean of the minimum of `2^k` Weibull variables (at `a = 1`,
/// `k = 1` it gives `0.886 λ` instead of `0.5 λ`); see
/// [`mtbf_of_group_weibull_exact`] for that quantity.
pub fn mtbf_of_group_weibull_scaled_shape(scale: f64, shape: f64, k: u32) -> Result<f64> {
    ensure_positive("weibull scale", scale)?;
    ensure_positive("weibull shape", shape)?;
    Ok(scale * gamma(1.0 + 1.0 / (shape * group_size(k))))
}

/// `λ (2^k)^(-1/a) Γ(1 + 1/a)`: the minimum of `2^k` Weibull(λ, a) variables
/// is Weibull with scale `λ (2^k)^(-1/a)` and the same shape.
pub fn mtbf_of_group_weibull_exact(scale: f64, shape: f64, k: u32) -> Result<f64> {
    ensure_positive("weibull scale", scale)?;
    ensure_positive("weibull shape", shape)?;
    Ok(scale * group_size(k).powf(-1.0 / shape) * gamma(1.0 + 1.0 / shape))
}

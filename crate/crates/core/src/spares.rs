//! Spare-pool sizing for migration.
//!
//! A machine alternates between useful work (mean `mu`) and an unavailable
//! phase of length `M + D` (migrating its job away, then rebooting). At a
//! random instant it is unavailable with probability `v = (M+D)/(mu+M+D)`.
//! Migration never stalls as long as at most `m` of the `N` machines are
//! unavailable at once, which happens with probability `P[X <= m]` for
//! `X ~ Binomial(N, v)`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{ensure_non_negative, ensure_positive, ModelError, Result};
use crate::special::binomial_pmf;

/// Availability of a single machine.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AvailabilityParams {
    /// Probability that a machine is neither migrating nor rebooting.
    pub u: f64,
    /// Probability that it is.
    pub v: f64,
}

impl AvailabilityParams {
    /// Builds the pair from the unavailable probability directly.
    pub fn from_unavailability(v: f64) -> Result<Self> {
        crate::error::ensure_probability("v", v)?;
        Ok(Self { u: 1.0 - v, v })
    }
}

pub fn availability_params(mu: f64, migration: f64, downtime: f64) -> Result<AvailabilityParams> {
    ensure_positive("mu", mu)?;
    ensure_non_negative("M", migration)?;
    ensure_non_negative("D", downtime)?;
    let total = mu + migration + downtime;
    Ok(AvailabilityParams {
        u: mu / total,
        v: (migration + downtime) / total,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpareMethod {
    /// The binomial sum.
    Exact,
    /// The sum with `C(N,k)` replaced by `(N/k)^k`, which underestimates the
    /// success probability and therefore overestimates the spares needed.
    LowerBound,
}

impl SpareMethod {
    pub fn name(self) -> &'static str {
        match self {
            SpareMethod::Exact => "exact",
            SpareMethod::LowerBound => "lower-bound",
        }
    }
}

impl fmt::Display for SpareMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpareSizing {
    pub m: u64,
    pub achieved_success: f64,
    pub epsilon: f64,
    pub method: SpareMethod,
}

fn check_counts(n: u64, m: u64) -> Result<()> {
    if n == 0 {
        return Err(ModelError::domain("N must be >= 1"));
    }
    if m > n {
        return Err(ModelError::domain(format!("m = {m} exceeds N = {n}")));
    }
    Ok(())
}

/// `sum_{k=0}^{m} C(N,k) u^(N-k) v^k`.
///
/// The tail on the far side of `m` from the mode is never summed: below the
/// mode the lower tail is accumulated from `m` downward, above it the upper
/// tail from `m+1` upward and subtracted from one. Each tail starts from a
/// saddle-point pmf and continues by the ratio recurrence, so binomial
/// coefficients are never formed.
pub fn success_probability(n: u64, m: u64, params: AvailabilityParams) -> Result<f64> {
    check_counts(n, m)?;
    let AvailabilityParams { u, v } = params;
    if m == n || v == 0.0 {
        return Ok(1.0);
    }
    if u == 0.0 {
        return Ok(0.0);
    }
    let nf = n as f64;
    let mode = (((nf + 1.0) * v).floor() as u64).min(n);
    let odds = v / u;
    if m < mode {
        // Lower tail, walking down from m: t_{k-1} = t_k * k / ((N-k+1) odds).
        let mut term = binomial_pmf(m, n, v, u);
        let mut sum = term;
        let mut k = m;
        while k > 0 && term > 0.0 {
            term *= k as f64 / ((n - k + 1) as f64 * odds);
            sum += term;
            if term <= sum * 1e-17 {
                break;
            }
            k -= 1;
        }
        Ok(sum.min(1.0))
    } else {
        // Upper tail, walking up from m+1: t_{k+1} = t_k * (N-k)/(k+1) * odds.
        let mut k = m + 1;
        let mut term = binomial_pmf(k, n, v, u);
        let mut sum = term;
        while k < n && term > 0.0 {
            term *= (n - k) as f64 / (k + 1) as f64 * odds;
            sum += term;
            if term <= sum * 1e-17 {
                break;
            }
            k += 1;
        }
        Ok((1.0 - sum).clamp(0.0, 1.0))
    }
}

/// `sum_{k=0}^{m} (N/k)^k u^(N-k) v^k`, with the `k = 0` factor taken as 1.
pub fn success_probability_lower_bound(n: u64, m: u64, params: AvailabilityParams) -> Result<f64> {
    check_counts(n, m)?;
    Ok(lower_bound_sum(n, m, params))
}

fn lower_bound_sum(n: u64, m: u64, params: AvailabilityParams) -> f64 {
    let AvailabilityParams { u, v } = params;
    if v == 0.0 {
        return 1.0;
    }
    if u == 0.0 {
        // Only the k = N term survives, and it equals 1.
        return if m == n { 1.0 } else { 0.0 };
    }
    let nf = n as f64;
    let (ln_u, ln_v) = (u.ln(), v.ln());
    let mut sum = 0.0;
    let mut prev_log = f64::NEG_INFINITY;
    for k in 0..=m {
        let kf = k as f64;
        let log_term = if k == 0 {
            nf * ln_u
        } else {
            kf * (nf / kf).ln() + (nf - kf) * ln_u + kf * ln_v
        };
        sum += log_term.exp();
        // The log-term is concave in k: once past its peak and negligible,
        // the remaining terms cannot matter.
        if log_term < prev_log && (log_term.exp() <= sum * 1e-17 || log_term < -745.0) {
            break;
        }
        prev_log = log_term;
    }
    sum.min(1.0)
}

fn method_success(method: SpareMethod, n: u64, m: u64, params: AvailabilityParams) -> Result<f64> {
    match method {
        SpareMethod::Exact => success_probability(n, m, params),
        SpareMethod::LowerBound => success_probability_lower_bound(n, m, params),
    }
}

/// Smallest `m` whose success probability under `method` is at least
/// `1 - epsilon`.
///
/// The search starts at `ceil(N v)`, expands in geometrically growing steps
/// until the target is met, then bisects the bracket.
pub fn min_spares(
    n: u64,
    params: AvailabilityParams,
    epsilon: f64,
    method: SpareMethod,
) -> Result<SpareSizing> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(ModelError::domain(format!(
            "epsilon must lie in (0, 1), got {epsilon}"
        )));
    }
    check_counts(n, 0)?;
    let target = 1.0 - epsilon;
    let ok = |m: u64| -> Result<(bool, f64)> {
        let s = method_success(method, n, m, params)?;
        Ok((s >= target, s))
    };

    let (full_ok, full_success) = ok(n)?;
    if !full_ok {
        return Err(ModelError::NoFeasibleSpares {
            method: method.name(),
            machines: n,
            epsilon,
            best: full_success,
        });
    }

    let start = ((n as f64 * params.v).ceil() as u64).min(n);
    let (mut lo, mut hi);
    if ok(start)?.0 {
        // Answer in [0, start].
        lo = 0;
        hi = start;
        if ok(0)?.0 {
            hi = 0;
        }
    } else {
        let sigma = (n as f64 * params.u * params.v).sqrt();
        let mut step = (sigma.ceil() as u64).max(1);
        lo = start;
        loop {
            let probe = lo.saturating_add(step).min(n);
            if ok(probe)?.0 {
                hi = probe;
                break;
            }
            lo = probe;
            step = step.saturating_mul(2);
        }
    }
    // Invariant: hi meets the target and, unless lo == hi == 0, lo does not.
    while lo + 1 < hi {
        let mid = lo + (hi - lo) / 2;
        if ok(mid)?.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let achieved_success = method_success(method, n, hi, params)?;
    Ok(SpareSizing {
        m: hi,
        achieved_success,
        epsilon,
        method,
    })
}

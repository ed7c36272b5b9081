//! Steady-state mix of job sizes on a saturated platform of `N = 2^Z`
//! processors.
//!
//! A job is sequential with probability `p1`; otherwise it uses `2^j`
//! processors with `j` uniform on `1..=Z`. With every processor busy and the
//! size proportions fixed, the expected number of jobs of size `2^j` is
//! `beta_j = alpha_j K`, where `K` is fixed by `sum_j 2^j beta_j = N`.

use serde::{Deserialize, Serialize};

use crate::error::{ensure_probability, ModelError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JobMix {
    /// log2 of the largest job size.
    pub z: u32,
    pub p1: f64,
    /// Probability that a job uses `2^j` processors, `j = 0..=z`.
    pub alpha: Vec<f64>,
    /// Expected number of running jobs.
    pub total_jobs: f64,
    /// Expected number of running jobs of size `2^j`.
    pub beta: Vec<f64>,
    /// Processors covered by the mix, `sum_j 2^j beta_j`.
    pub machines: f64,
}

/// Solves the job mix for `N = 2^z` processors.
pub fn solve_job_mix(z: u32, p1: f64) -> Result<JobMix> {
    ensure_probability("p1", p1)?;
    if z == 0 && p1 < 1.0 {
        return Err(ModelError::domain(
            "Z = 0 leaves no parallel job sizes; p1 must be 1",
        ));
    }
    if z > 62 {
        return Err(ModelError::domain(format!("Z = {z} is too large")));
    }
    let n = 2f64.powi(z as i32);
    let parallel_share = if z == 0 {
        0.0
    } else {
        (1.0 - p1) / f64::from(z)
    };
    let alpha: Vec<f64> = (0..=z)
        .map(|j| if j == 0 { p1 } else { parallel_share })
        .collect();
    // N / K = p1 + (1 - p1)(2N - 2) / Z
    let machines_per_job = if z == 0 {
        1.0
    } else {
        p1 + (1.0 - p1) * (2.0 * n - 2.0) / f64::from(z)
    };
    let total_jobs = n / machines_per_job;
    let beta = alpha.iter().map(|a| a * total_jobs).collect();
    Ok(JobMix {
        z,
        p1,
        alpha,
        total_jobs,
        beta,
        machines: n,
    })
}

impl JobMix {
    /// Mix for an arbitrary machine count: job sizes go up to the largest
    /// power of two not exceeding `machines`, and the job counts are scaled
    /// so the mix covers exactly `machines` processors.
    pub fn for_machines(machines: u64, p1: f64) -> Result<Self> {
        if machines == 0 {
            return Err(ModelError::domain("N must be >= 1"));
        }
        let z = 63 - machines.leading_zeros();
        let mut mix = if z == 0 {
            solve_job_mix(0, 1.0)?
        } else {
            solve_job_mix(z, p1)?
        };
        let scale = machines as f64 / mix.machines;
        if scale != 1.0 {
            mix.total_jobs *= scale;
            for b in &mut mix.beta {
                *b *= scale;
            }
            mix.machines = machines as f64;
        }
        Ok(mix)
    }

    /// `(k, 2^k, beta_k)` for every job size.
    pub fn sizes(&self) -> impl Iterator<Item = (u32, f64, f64)> + '_ {
        self.beta
            .iter()
            .enumerate()
            .map(|(k, &b)| (k as u32, 2f64.powi(k as i32), b))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn z8_default_share() {
        let mix = solve_job_mix(8, 0.25).unwrap();
        assert!(close(256.0 / mix.total_jobs, 48.0625, 1e-14));
        assert!(close(mix.total_jobs, 5.326_397_919_375_813, 1e-13));
        assert_eq!(mix.alpha.len(), 9);
        assert_eq!(mix.alpha[0], 0.25);
        assert!(close(mix.alpha[3], 0.75 / 8.0, 1e-15));
    }

    #[test]
    fn all_sequential() {
        for z in [0, 1, 5, 20] {
            let mix = solve_job_mix(z, 1.0).unwrap();
            let n = 2f64.powi(z as i32);
            assert_eq!(mix.total_jobs, n);
            assert_eq!(mix.beta[0], n);
            assert!(mix.beta[1..].iter().all(|&b| b == 0.0));
        }
    }

    #[test]
    fn z2_all_parallel() {
        let mix = solve_job_mix(2, 0.0).unwrap();
        assert!(close(mix.total_jobs, 4.0 / 3.0, 1e-15));
        assert_eq!(mix.beta[0], 0.0);
        assert!(close(mix.beta[1], 2.0 / 3.0, 1e-15));
        assert!(close(mix.beta[2], 2.0 / 3.0, 1e-15));
        assert!(close(2.0 * mix.beta[1] + 4.0 * mix.beta[2], 4.0, 1e-15));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(solve_job_mix(0, 0.5).is_err());
        assert!(solve_job_mix(4, -0.1).is_err());
        assert!(solve_job_mix(4, 1.5).is_err());
        assert!(solve_job_mix(4, f64::NAN).is_err());
        assert!(JobMix::for_machines(0, 0.25).is_err());
    }

    #[test]
    fn non_power_of_two_platform() {
        let mix = JobMix::for_machines(10_000, 0.25).unwrap();
        assert_eq!(mix.z, 13);
        let covered: f64 = mix.sizes().map(|(_, size, b)| size * b).sum();
        assert!(close(covered, 10_000.0, 1e-12));
        assert!(close(mix.beta.iter().sum::<f64>(), mix.total_jobs, 1e-12));
        let single = JobMix::for_machines(1, 0.25).unwrap();
        assert_eq!(single.total_jobs, 1.0);
    }

    // K itself grows with Z; the job density K/N is what shrinks.
    #[test]
    fn job_density_decreases_with_z() {
        for p1 in [0.0, 0.25, 0.9] {
            let mut prev = f64::INFINITY;
            for z in 1..=30 {
                let mix = solve_job_mix(z, p1).unwrap();
                let density = mix.total_jobs / mix.machines;
                assert!(density <= prev * (1.0 + 1e-15), "p1={p1} z={z}");
                prev = density;
            }
        }
    }

    proptest! {
        #[test]
        fn satisfies_balance_equations(z in 1u32..=40, p1 in 0.0f64..=1.0) {
            let mix = solve_job_mix(z, p1).unwrap();
            let n = 2f64.powi(z as i32);
            let alpha_sum: f64 = mix.alpha.iter().sum();
            prop_assert!((alpha_sum - 1.0).abs() <= 1e-12);
            let beta_sum: f64 = mix.beta.iter().sum();
            prop_assert!(((beta_sum - mix.total_jobs) / mix.total_jobs).abs() <= 1e-9);
            let covered: f64 = (0..=z).map(|j| 2f64.powi(j as i32) * mix.beta[j as usize]).sum();
            prop_assert!(((covered - n) / n).abs() <= 1e-9);
            for j in 0..=z as usize {
                prop_assert!((mix.beta[j] - mix.alpha[j] * mix.total_jobs).abs() <= 1e-12 * mix.total_jobs);
            }
        }
    }
}

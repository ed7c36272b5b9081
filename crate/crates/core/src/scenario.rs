//! Scenario presets and the two table generators: migration-vs-checkpoint
//! comparison grids and the periodic-checkpointing yield table.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{ensure_positive, ModelError, Result};
use crate::failure::{FailureModel, GroupMtbfRule};
use crate::jobmix::JobMix;
use crate::periodic::yield_parallel;
use crate::spares::{availability_params, min_spares, SpareMethod};
use crate::throughput::{
    improvement_pct, throughput_checkpoint_parallel, throughput_checkpoint_sequential,
    throughput_migration_parallel, throughput_migration_sequential, CostParams,
};
use crate::units::{parse_minutes, DAY, MONTH, WEEK, YEAR};

/// Preset file shipped with the crate.
pub const DEFAULT_PRESETS: &str = include_str!("../presets.toml");

/// A named set of resilience costs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    #[serde(rename = "C")]
    pub checkpoint: f64,
    #[serde(rename = "R")]
    pub recovery: f64,
    #[serde(rename = "D")]
    pub downtime: f64,
    #[serde(rename = "M")]
    pub migration: f64,
}

impl Scenario {
    pub fn costs(&self) -> Result<CostParams> {
        CostParams::new(
            self.checkpoint,
            self.recovery,
            self.downtime,
            self.migration,
        )
    }
}

/// The `(mu, N, epsilon)` grid a scenario is evaluated on.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub mtbf: Vec<f64>,
    pub machines: Vec<u64>,
    pub epsilon: Vec<f64>,
}

impl Default for Grid {
    fn default() -> Self {
        Self {
            mtbf: vec![DAY, WEEK, MONTH, YEAR],
            machines: vec![10_000, 100_000, 1_000_000],
            epsilon: vec![1e-4, 1e-6],
        }
    }
}

#[derive(Debug, Deserialize)]
struct RawGrid {
    mtbf: Vec<String>,
    machines: Vec<u64>,
    epsilon: Vec<f64>,
}

#[derive(Debug, Deserialize)]
struct RawBook {
    grid: Option<RawGrid>,
    #[serde(default)]
    preset: Vec<Scenario>,
}

/// Presets and the default grid, as loaded from a TOML file.
#[derive(Debug, Clone, PartialEq)]
pub struct PresetBook {
    pub grid: Grid,
    pub presets: Vec<Scenario>,
}

impl PresetBook {
    pub fn builtin() -> Self {
        Self::from_toml_str(DEFAULT_PRESETS).expect("bundled presets parse")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ModelError::Preset(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let raw: RawBook = toml::from_str(text).map_err(|e| ModelError::Preset(e.to_string()))?;
        let grid = match raw.grid {
            None => Grid::default(),
            Some(g) => Grid {
                mtbf: g
                    .mtbf
                    .iter()
                    .map(|s| parse_minutes(s))
                    .collect::<Result<_>>()?,
                machines: g.machines,
                epsilon: g.epsilon,
            },
        };
        for p in &raw.preset {
            p.costs()
                .map_err(|e| ModelError::Preset(format!("preset `{}`: {e}", p.name)))?;
        }
        Ok(Self {
            grid,
            presets: raw.preset,
        })
    }

    pub fn get(&self, name: &str) -> Result<&Scenario> {
        self.presets
            .iter()
            .find(|p| p.name == name)
            .ok_or_else(|| ModelError::UnknownPreset(name.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Workload {
    Sequential,
    /// Parallel jobs; `p1` is the probability that a job is sequential.
    Parallel {
        p1: f64,
    },
}

impl fmt::Display for Workload {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Workload::Sequential => write!(f, "sequential"),
            Workload::Parallel { p1 } => write!(f, "parallel (p1 = {p1})"),
        }
    }
}

/// One `(mu, N, epsilon)` cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScenarioCell {
    pub mu_minutes: f64,
    #[serde(rename = "N")]
    pub machines: u64,
    pub epsilon: f64,
    /// Spares from the exact binomial criterion.
    pub spares: u64,
    /// Spares from the `(N/k)^k` bound; `None` when the bound never reaches
    /// `1 - epsilon`.
    pub spares_lower_bound: Option<u64>,
    pub rho_cp: f64,
    pub rho_m: f64,
    pub improvement_pct: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioTable {
    pub scenario: Scenario,
    pub workload: Workload,
    pub grid: Vec<ScenarioCell>,
    pub warnings: Vec<String>,
}

/// Evaluates every cell of `grid` for `scenario`. Spare counts use the exact
/// criterion; the lower-bound count is reported alongside.
pub fn run_scenario(scenario: &Scenario, grid: &Grid, workload: Workload) -> Result<ScenarioTable> {
    let costs = scenario.costs()?;
    let mut warnings: Vec<String> = costs.sensibility_warning().into_iter().collect();
    if let Workload::Parallel { .. } = workload {
        for &n in &grid.machines {
            if !n.is_power_of_two() {
                warnings.push(format!(
                    "N = {n} is not a power of two: job sizes stop at 2^{} and job counts are scaled to cover N",
                    63 - n.leading_zeros()
                ));
            }
        }
    }
    let mut cells = Vec::with_capacity(grid.mtbf.len() * grid.machines.len() * grid.epsilon.len());
    for &mu in &grid.mtbf {
        ensure_positive("mu", mu)?;
        let avail = availability_params(mu, costs.migration, costs.downtime)?;
        let model = FailureModel::exponential(mu)?;
        for &n in &grid.machines {
            let mix = match workload {
                Workload::Sequential => None,
                Workload::Parallel { p1 } => Some(JobMix::for_machines(n, p1)?),
            };
            let rho_cp = match &mix {
                None => throughput_checkpoint_sequential(n, mu, &costs)?,
                Some(mix) => {
                    throughput_checkpoint_parallel(mix, &model, &costs, GroupMtbfRule::ScaledShape)?
                }
            };
            for &epsilon in &grid.epsilon {
                let exact = min_spares(n, avail, epsilon, SpareMethod::Exact)?;
                let bound = match min_spares(n, avail, epsilon, SpareMethod::LowerBound) {
                    Ok(s) => Some(s.m),
                    Err(e) if e.is_infeasible() => None,
                    Err(e) => return Err(e),
                };
                let rho_m = match &mix {
                    None => throughput_migration_sequential(n, exact.m, mu, costs.migration)?,
                    Some(mix) => throughput_migration_parallel(mix, mu, costs.migration, exact.m)?,
                };
                cells.push(ScenarioCell {
                    mu_minutes: mu,
                    machines: n,
                    epsilon,
                    spares: exact.m,
                    spares_lower_bound: bound,
                    rho_cp,
                    rho_m,
                    improvement_pct: improvement_pct(rho_m, rho_cp)?,
                });
            }
        }
    }
    Ok(ScenarioTable {
        scenario: scenario.clone(),
        workload,
        grid: cells,
        warnings,
    })
}

/// Parameters of the periodic-checkpointing yield table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct YieldSpec {
    #[serde(rename = "C")]
    pub checkpoint: f64,
    #[serde(rename = "R")]
    pub recovery: f64,
    #[serde(rename = "D")]
    pub downtime: f64,
    pub p1: f64,
    pub machines: Vec<u64>,
    pub mtbf: Vec<f64>,
}

impl Default for YieldSpec {
    fn default() -> Self {
        Self {
            checkpoint: 1.0,
            recovery: 1.0,
            downtime: 1.0,
            p1: 0.25,
            machines: [8, 11, 14, 17, 20].iter().map(|z| 1u64 << z).collect(),
            mtbf: vec![MONTH, YEAR],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct YieldCell {
    #[serde(rename = "N")]
    pub machines: u64,
    pub mu_minutes: f64,
    pub rho: f64,
    /// `100 rho / N`.
    pub yield_pct: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct YieldTable {
    pub spec: YieldSpec,
    pub cells: Vec<YieldCell>,
}

impl YieldTable {
    pub fn cell(&self, machines: u64, mu: f64) -> Option<&YieldCell> {
        self.cells
            .iter()
            .find(|c| c.machines == machines && c.mu_minutes == mu)
    }
}

/// Yield of parallel jobs under optimally periodic checkpointing, one cell
/// per `(N, mu)`.
pub fn run_yield_table(spec: &YieldSpec) -> Result<YieldTable> {
    let mut cells = Vec::with_capacity(spec.machines.len() * spec.mtbf.len());
    for &n in &spec.machines {
        let mix = JobMix::for_machines(n, spec.p1)?;
        for &mu in &spec.mtbf {
            let rho = yield_parallel(&mix, spec.checkpoint, mu, spec.recovery, spec.downtime)?;
            cells.push(YieldCell {
                machines: n,
                mu_minutes: mu,
                rho,
                yield_pct: 100.0 * rho / n as f64,
            });
        }
    }
    Ok(YieldTable {
        spec: spec.clone(),
        cells,
    })
}

impl FromStr for Workload {
    type Err = ModelError;

    /// `seq` or `par`; `par` uses `p1 = 0.25`.
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "seq" | "sequential" => Ok(Workload::Sequential),
            "par" | "parallel" => Ok(Workload::Parallel { p1: 0.25 }),
            other => Err(ModelError::domain(format!("unknown workload `{other}`"))),
        }
    }
}

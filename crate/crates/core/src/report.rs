//! Text, CSV and JSON renderings of the scenario and yield tables.
//!
//! The text form follows the comparison-table convention: one row per MTBF,
//! one column per `(N, epsilon)` pair, cells as `x.x% (m)`.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{ModelError, Result};
use crate::scenario::{ScenarioCell, ScenarioTable, Workload, YieldTable};
use crate::units::label_minutes;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Table,
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "table" => Ok(Format::Table),
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(ModelError::domain(format!("unknown format `{other}`"))),
        }
    }
}

/// Cell text for the comparison table.
pub fn format_cell(cell: &ScenarioCell) -> String {
    let pct = format!("{:.1}", cell.improvement_pct);
    let pct = if pct == "-0.0" { "0.0" } else { &pct };
    format!("{pct}% ({})", cell.spares)
}

fn format_epsilon(eps: f64) -> String {
    let exp = eps.log10();
    if (exp - exp.round()).abs() < 1e-12 {
        format!("1e{}", exp.round() as i32)
    } else {
        format!("{eps:e}")
    }
}

fn dedup<T: PartialEq + Copy>(items: impl Iterator<Item = T>) -> Vec<T> {
    let mut out = Vec::new();
    for x in items {
        if !out.contains(&x) {
            out.push(x);
        }
    }
    out
}

fn render_grid(header: &[String], rows: &[Vec<String>]) -> String {
    let cols = header.len();
    let widths: Vec<usize> = (0..cols)
        .map(|c| {
            rows.iter()
                .map(|r| r[c].chars().count())
                .chain(std::iter::once(header[c].chars().count()))
                .max()
                .unwrap_or(0)
        })
        .collect();
    let line = |cells: &[String]| {
        cells
            .iter()
            .zip(&widths)
            .map(|(s, w)| format!("{s:>w$}"))
            .collect::<Vec<_>>()
            .join(" | ")
    };
    let mut out = String::new();
    out.push_str(&line(header));
    out.push('\n');
    out.push_str(
        &widths
            .iter()
            .map(|w| "-".repeat(*w))
            .collect::<Vec<_>>()
            .join("-+-"),
    );
    out.push('\n');
    for r in rows {
        out.push_str(&line(r));
        out.push('\n');
    }
    out
}

#[derive(Serialize)]
struct ScenarioJson<'a> {
    scenario: &'a str,
    #[serde(rename = "C")]
    checkpoint: f64,
    #[serde(rename = "R")]
    recovery: f64,
    #[serde(rename = "D")]
    downtime: f64,
    #[serde(rename = "M")]
    migration: f64,
    workload: &'a Workload,
    grid: &'a [ScenarioCell],
    warnings: &'a [String],
}

pub fn render_scenario(table: &ScenarioTable, format: Format) -> Result<String> {
    match format {
        Format::Json => {
            let s = &table.scenario;
            let view = ScenarioJson {
                scenario: &s.name,
                checkpoint: s.checkpoint,
                recovery: s.recovery,
                downtime: s.downtime,
                migration: s.migration,
                workload: &table.workload,
                grid: &table.grid,
                warnings: &table.warnings,
            };
            serde_json::to_string_pretty(&view)
                .map(|mut s| {
                    s.push('\n');
                    s
                })
                .map_err(|e| ModelError::domain(e.to_string()))
        }
        Format::Csv => to_csv(&table.grid),
        Format::Table => Ok(scenario_text(table)),
    }
}

fn scenario_text(table: &ScenarioTable) -> String {
    let s = &table.scenario;
    let mus = dedup(table.grid.iter().map(|c| c.mu_minutes));
    let columns = dedup(table.grid.iter().map(|c| (c.machines, c.epsilon)));
    let mut header = vec!["mu".to_string()];
    header.extend(
        columns
            .iter()
            .map(|(n, e)| format!("N={n} eps={}", format_epsilon(*e))),
    );
    let rows: Vec<Vec<String>> = mus
        .iter()
        .map(|&mu| {
            let mut row = vec![label_minutes(mu)];
            for &(n, e) in &columns {
                let text = table
                    .grid
                    .iter()
                    .find(|c| c.mu_minutes == mu && c.machines == n && c.epsilon == e)
                    .map(format_cell)
                    .unwrap_or_else(|| "n/a".to_string());
                row.push(text);
            }
            row
        })
        .collect();

    let mut out = String::new();
    let _ = writeln!(
        out,
        "Scenario {} (C={}, R={}, D={}, M={}), {} workload",
        s.name, s.checkpoint, s.recovery, s.downtime, s.migration, table.workload
    );
    let _ = writeln!(
        out,
        "Percentage improvement of migration over checkpointing; required spares in parentheses."
    );
    out.push('\n');
    out.push_str(&render_grid(&header, &rows));
    for w in &table.warnings {
        let _ = writeln!(out, "warning: {w}");
    }
    out
}

fn to_csv<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    for row in rows {
        writer
            .serialize(row)
            .map_err(|e| ModelError::domain(e.to_string()))?;
    }
    let bytes = writer
        .into_inner()
        .map_err(|e| ModelError::domain(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| ModelError::domain(e.to_string()))
}

pub fn render_yield(table: &YieldTable, format: Format) -> Result<String> {
    match format {
        Format::Json => serde_json::to_string_pretty(table)
            .map(|mut s| {
                s.push('\n');
                s
            })
            .map_err(|e| ModelError::domain(e.to_string())),
        Format::Csv => to_csv(&table.cells),
        Format::Table => {
            let spec = &table.spec;
            let mut header = vec!["N".to_string()];
            header.extend(
                spec.mtbf
                    .iter()
                    .map(|mu| format!("Yield (mu = {})", label_minutes(*mu))),
            );
            let rows: Vec<Vec<String>> = spec
                .machines
                .iter()
                .map(|&n| {
                    let label = if n.is_power_of_two() {
                        format!("2^{}", n.trailing_zeros())
                    } else {
                        n.to_string()
                    };
                    let mut row = vec![label];
                    for &mu in &spec.mtbf {
                        row.push(
                            table
                                .cell(n, mu)
                                .map(|c| format!("{:.1}%", c.yield_pct))
                                .unwrap_or_else(|| "n/a".to_string()),
                        );
                    }
                    row
                })
                .collect();
            let mut out = String::new();
            let _ = writeln!(
                out,
                "Yield rho/N under periodic checkpointing (C={}, R={}, D={}, p1={})",
                spec.checkpoint, spec.recovery, spec.downtime, spec.p1
            );
            out.push('\n');
            out.push_str(&render_grid(&header, &rows));
            Ok(out)
        }
    }
}

//! Experiment matrix: generate workloads, apply strategies, simulate and
//! collect one row per (cell, repetition).
//!
//! CSV columns, in order:
//! `topology,special_ops,fib_step,strategy,seed,rep,cold,group_count,
//! inter_edges,plan_cost,setup_time,execution_time,total_time,error`.
//! Times are printed with 4 decimals. Metric columns are empty on error
//! rows; `plan_cost` is empty for strategies that do not plan.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{map_ordered, Execution};
use crate::model::{Cost, GroupingConfig};
use crate::simulator::{run_repetitions, SimParams};
use crate::strategies::{run_strategy, StrategyKind};
use crate::workload::{generate_pipeline, CatalogMode, Topology, Workload, WorkloadParams};

pub const CSV_HEADER: &str = "topology,special_ops,fib_step,strategy,seed,rep,cold,group_count,inter_edges,plan_cost,setup_time,execution_time,total_time,error";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentSpec {
    pub topologies: Vec<Topology>,
    pub special_ops: Vec<usize>,
    pub fib_steps: Vec<u32>,
    pub strategies: Vec<StrategyKind>,
    pub seeds: Vec<u64>,
    pub reps: usize,
    pub sim: SimParams,
    /// Lets the default strategy fall back to a simulation-only image.
    pub allow_universal: bool,
    pub catalog: CatalogMode,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        ExperimentSpec {
            topologies: Topology::ALL.to_vec(),
            special_ops: vec![2, 4],
            fib_steps: vec![1, 2, 3],
            strategies: StrategyKind::ALL.to_vec(),
            seeds: vec![1, 2, 3],
            reps: 5,
            sim: SimParams::default(),
            allow_universal: false,
            catalog: CatalogMode::Exclusive,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Cell {
    pub topology: Topology,
    pub special_ops: usize,
    pub fib_step: u32,
    pub seed: u64,
    pub strategy: StrategyKind,
}

impl Cell {
    pub fn workload_params(&self, catalog: CatalogMode) -> WorkloadParams {
        let mut p = WorkloadParams::new(self.topology, self.special_ops, self.fib_step, self.seed);
        p.catalog = catalog;
        p
    }
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        if self.reps == 0 {
            return Err(Error::InvalidParams("reps must be at least 1".into()));
        }
        let empty = [
            ("topologies", self.topologies.is_empty()),
            ("special_ops", self.special_ops.is_empty()),
            ("fib_steps", self.fib_steps.is_empty()),
            ("strategies", self.strategies.is_empty()),
            ("seeds", self.seeds.is_empty()),
        ];
        if let Some((name, _)) = empty.iter().find(|(_, e)| *e) {
            return Err(Error::InvalidParams(format!("{name} list is empty")));
        }
        self.sim.validate()
    }

    /// Cross product in topology, special_ops, fib_step, seed, strategy order.
    pub fn cells(&self) -> Vec<Cell> {
        let mut cells = Vec::new();
        for &topology in &self.topologies {
            for &special_ops in &self.special_ops {
                for &fib_step in &self.fib_steps {
                    for &seed in &self.seeds {
                        for &strategy in &self.strategies {
                            cells.push(Cell {
                                topology,
                                special_ops,
                                fib_step,
                                seed,
                                strategy,
                            });
                        }
                    }
                }
            }
        }
        cells
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub topology: Topology,
    pub special_ops: usize,
    pub fib_step: u32,
    pub strategy: StrategyKind,
    pub seed: u64,
    pub rep: usize,
    pub cold: bool,
    pub group_count: Option<usize>,
    pub inter_edges: Option<usize>,
    pub plan_cost: Option<Cost>,
    pub setup_time: Option<f64>,
    pub execution_time: Option<f64>,
    pub total_time: Option<f64>,
    pub error: Option<String>,
}

impl ResultRow {
    fn blank(cell: &Cell, rep: usize) -> Self {
        ResultRow {
            topology: cell.topology,
            special_ops: cell.special_ops,
            fib_step: cell.fib_step,
            strategy: cell.strategy,
            seed: cell.seed,
            rep,
            cold: rep == 0,
            group_count: None,
            inter_edges: None,
            plan_cost: None,
            setup_time: None,
            execution_time: None,
            total_time: None,
            error: None,
        }
    }

    pub fn is_error(&self) -> bool {
        self.error.is_some()
    }

    pub fn cell(&self) -> Cell {
        Cell {
            topology: self.topology,
            special_ops: self.special_ops,
            fib_step: self.fib_step,
            seed: self.seed,
            strategy: self.strategy,
        }
    }
}

/// Runs one cell. Failures become error rows, one per repetition.
pub fn run_cell(spec: &ExperimentSpec, cell: &Cell) -> Vec<ResultRow> {
    let attempt = || -> Result<Vec<ResultRow>> {
        let workload = generate_pipeline(&cell.workload_params(spec.catalog))?;
        let outcome = run_strategy(
            cell.strategy,
            &workload.instance,
            cell.seed,
            spec.allow_universal,
        )?;
        let plan_cost = outcome.plan.as_ref().map(|p| p.total_cost);
        evaluate_config(
            cell,
            &workload,
            &outcome.config,
            plan_cost,
            &spec.sim,
            spec.reps,
        )
    };
    attempt().unwrap_or_else(|e| {
        (0..spec.reps)
            .map(|rep| ResultRow {
                error: Some(e.to_string()),
                ..ResultRow::blank(cell, rep)
            })
            .collect()
    })
}

/// Validates a grouping and simulates it `reps` times, the first cold.
pub fn evaluate_config(
    cell: &Cell,
    workload: &Workload,
    config: &GroupingConfig,
    plan_cost: Option<Cost>,
    sim: &SimParams,
    reps: usize,
) -> Result<Vec<ResultRow>> {
    workload.instance.validate_config(config).into_result()?;
    let counts = workload.instance.edge_counts(config)?;
    let results = run_repetitions(config, workload, sim, reps)?;
    Ok(results
        .into_iter()
        .enumerate()
        .map(|(rep, r)| ResultRow {
            group_count: Some(config.group_count()),
            inter_edges: Some(counts.inter),
            plan_cost,
            setup_time: Some(r.setup_time),
            execution_time: Some(r.execution_time),
            total_time: Some(r.total_time),
            ..ResultRow::blank(cell, rep)
        })
        .collect())
}

/// Every cell's rows, in matrix order whatever the execution mode.
pub fn run_matrix(spec: &ExperimentSpec, execution: Execution) -> Result<Vec<ResultRow>> {
    spec.validate()?;
    let cells = spec.cells();
    Ok(map_ordered(&cells, execution, |cell| run_cell(spec, cell))
        .into_iter()
        .flatten()
        .collect())
}

fn opt<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map(T::to_string).unwrap_or_default()
}

fn opt_time(v: Option<f64>) -> String {
    v.map(|t| format!("{t:.4}")).unwrap_or_default()
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn rows_to_csv(rows: &[ResultRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.topology,
            r.special_ops,
            r.fib_step,
            r.strategy,
            r.seed,
            r.rep,
            r.cold,
            opt(&r.group_count),
            opt(&r.inter_edges),
            opt(&r.plan_cost),
            opt_time(r.setup_time),
            opt_time(r.execution_time),
            opt_time(r.total_time),
            csv_field(r.error.as_deref().unwrap_or("")),
        );
    }
    out
}

pub fn rows_from_csv(text: &str) -> Result<Vec<ResultRow>> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    reader
        .deserialize()
        .map(|r| {
            let mut row: ResultRow = r?;
            row.error = row.error.filter(|e| !e.is_empty());
            Ok(row)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

pub fn render_rows(rows: &[ResultRow], format: Format) -> Result<String> {
    match format {
        Format::Csv => Ok(rows_to_csv(rows)),
        Format::Json => Ok(serde_json::to_string_pretty(rows)? + "\n"),
    }
}

/// Reads rows from a CSV or JSON file; JSON is recognised by its first
/// non-blank character.
pub fn read_rows(path: &Path) -> Result<Vec<ResultRow>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    if text.trim_start().starts_with('[') {
        Ok(serde_json::from_str(&text)?)
    } else {
        rows_from_csv(&text)
    }
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub mean: f64,
    /// Sample (n - 1) standard deviation; absent for a single value.
    pub std: Option<f64>,
}

/// Mean and sample standard deviation.
pub fn stat(values: &[f64]) -> Option<Stat> {
    if values.is_empty() {
        return None;
    }
    let n = values.len() as f64;
    // running mean: a constant column averages to exactly that constant
    let mut mean = 0.0;
    for (k, v) in values.iter().enumerate() {
        mean += (v - mean) / (k + 1) as f64;
    }
    let std = (values.len() > 1).then(|| {
        let ss: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
        (ss / (n - 1.0)).sqrt()
    });
    Some(Stat { mean, std })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub cell: Cell,
    pub cold: bool,
    pub n: usize,
    pub setup_time: Stat,
    pub execution_time: Stat,
    pub total_time: Stat,
}

/// Per cell and cache state. Cold statistics cover rep 0, warm ones the
/// remaining reps; error rows are skipped.
pub fn summarize(rows: &[ResultRow]) -> Result<Vec<SummaryRow>> {
    if rows.is_empty() {
        return Err(Error::EmptyInput("no result rows to summarize"));
    }
    // keyed by first appearance so output follows the input's matrix order
    let mut order: Vec<(Cell, bool)> = Vec::new();
    let mut buckets: BTreeMap<(Cell, bool), [Vec<f64>; 3]> = BTreeMap::new();
    for r in rows.iter().filter(|r| !r.is_error()) {
        let (Some(s), Some(e), Some(t)) = (r.setup_time, r.execution_time, r.total_time) else {
            continue;
        };
        let key = (r.cell(), r.cold);
        let bucket = buckets.entry(key).or_insert_with(|| {
            order.push(key);
            Default::default()
        });
        bucket[0].push(s);
        bucket[1].push(e);
        bucket[2].push(t);
    }
    Ok(order
        .into_iter()
        .map(|key| {
            let [s, e, t] = &buckets[&key];
            SummaryRow {
                cell: key.0,
                cold: key.1,
                n: s.len(),
                setup_time: stat(s).expect("non-empty"),
                execution_time: stat(e).expect("non-empty"),
                total_time: stat(t).expect("non-empty"),
            }
        })
        .collect())
}

pub const SUMMARY_HEADER: &str = "topology,special_ops,fib_step,strategy,seed,cold,n,setup_mean,setup_std,execution_mean,execution_std,total_mean,total_std";

pub fn summary_to_csv(summary: &[SummaryRow]) -> String {
    let mut out = String::from(SUMMARY_HEADER);
    out.push('\n');
    for s in summary {
        let c = &s.cell;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            c.topology,
            c.special_ops,
            c.fib_step,
            c.strategy,
            c.seed,
            s.cold,
            s.n,
            opt_time(Some(s.setup_time.mean)),
            opt_time(s.setup_time.std),
            opt_time(Some(s.execution_time.mean)),
            opt_time(s.execution_time.std),
            opt_time(Some(s.total_time.mean)),
            opt_time(s.total_time.std),
        );
    }
    out
}

pub fn render_summary(summary: &[SummaryRow], format: Format) -> Result<String> {
    match format {
        Format::Csv => Ok(summary_to_csv(summary)),
        Format::Json => Ok(serde_json::to_string_pretty(summary)? + "\n"),
    }
}

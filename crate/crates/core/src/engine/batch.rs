use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{compare_scenarios, prepare_dataset, ComparisonTable, Metric, ScenarioKind, SimConfig};
use crate::ingest::{IngestError, TimeSeriesTable};

/// One (seed, target) cell of a batch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchCell {
    pub seed: u64,
    pub target: Option<f64>,
    pub comparison: ComparisonTable,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellStats {
    pub mean: f64,
    pub min: f64,
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchReport {
    pub scenarios: Vec<ScenarioKind>,
    /// Ordered target-major, then by seed.
    pub cells: Vec<BatchCell>,
}

impl BatchReport {
    pub fn targets(&self) -> Vec<Option<f64>> {
        let mut out: Vec<Option<f64>> = Vec::new();
        for c in &self.cells {
            if !out.contains(&c.target) {
                out.push(c.target);
            }
        }
        out
    }

    pub fn cells_for(&self, target: Option<f64>) -> impl Iterator<Item = &BatchCell> {
        self.cells.iter().filter(move |c| c.target == target)
    }

    /// Mean, min and max of a metric across seeds.
    pub fn stats(&self, target: Option<f64>, scenario: ScenarioKind, metric: Metric) -> Option<CellStats> {
        let values: Vec<f64> = self
            .cells_for(target)
            .filter_map(|c| c.comparison.column(scenario))
            .map(|m| m.get(metric))
            .collect();
        summarize(&values)
    }

    /// Mean, min and max across seeds of the relative reduction of `metric`
    /// from `from` to `to`.
    pub fn reduction_stats(&self, target: Option<f64>, metric: Metric, from: ScenarioKind, to: ScenarioKind) -> Option<CellStats> {
        let values: Vec<f64> = self
            .cells_for(target)
            .filter_map(|c| c.comparison.reduction(metric, from, to))
            .collect();
        summarize(&values)
    }
}

fn summarize(values: &[f64]) -> Option<CellStats> {
    if values.is_empty() {
        return None;
    }
    Some(CellStats {
        mean: values.iter().sum::<f64>() / values.len() as f64,
        min: values.iter().copied().fold(f64::INFINITY, f64::min),
        max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    })
}

/// Runs every (seed, target) combination in parallel. An empty `targets`
/// list means a single uncalibrated pass, unless `config` already names a
/// target.
///
/// # Panics
///
/// Panics if `seeds` or `scenarios` is empty.
pub fn run_batch(
    table: &TimeSeriesTable,
    config: &SimConfig,
    scenarios: &[ScenarioKind],
    seeds: &[u64],
    targets: &[f64],
) -> Result<BatchReport, IngestError> {
    assert!(!seeds.is_empty(), "no seeds");
    let targets: Vec<Option<f64>> = if targets.is_empty() {
        vec![config.target_generation_ratio]
    } else {
        targets.iter().copied().map(Some).collect()
    };
    let jobs: Vec<(u64, Option<f64>)> = targets
        .iter()
        .flat_map(|&target| seeds.iter().map(move |&seed| (seed, target)))
        .collect();
    let cells = jobs
        .into_par_iter()
        .map(|(seed, target)| {
            let cfg = SimConfig {
                seed,
                target_generation_ratio: target,
                ..config.clone()
            };
            let dataset = prepare_dataset(table, &cfg)?;
            Ok(BatchCell {
                seed,
                target,
                comparison: compare_scenarios(&dataset, &cfg, scenarios),
            })
        })
        .collect::<Result<Vec<_>, IngestError>>()?;
    Ok(BatchReport {
        scenarios: scenarios.to_vec(),
        cells,
    })
}

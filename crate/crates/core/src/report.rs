//! CSV and JSON report files for a batch of scenario comparisons.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::config::RunConfig;
use crate::engine::{BatchReport, Metric, ScenarioKind};
use crate::ingest::HouseProfile;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("cannot write {path}: {source}")]
    IoFailure { path: PathBuf, source: std::io::Error },
    #[error("nothing to report")]
    Empty,
}

pub const SUMMARY_FILE: &str = "summary.csv";
pub const PER_HOUSE_FILE: &str = "per_house.csv";
pub const TIMESERIES_FILE: &str = "timeseries.csv";
pub const CONTRACT_FILE: &str = "contract.csv";
pub const BATCH_STATS_FILE: &str = "batch_stats.csv";
pub const MANIFEST_FILE: &str = "run_manifest.json";

fn target_cell(target: Option<f64>) -> String {
    target.map(|t| t.to_string()).unwrap_or_default()
}

/// Metric rows by scenario columns, one block per (seed, target) cell.
/// Values are rounded to two decimals.
pub fn summary_csv(batch: &BatchReport) -> String {
    let mut out = String::from("seed,target_ratio,metric");
    for s in &batch.scenarios {
        write!(out, ",{}", s.label()).unwrap();
    }
    out.push('\n');
    for cell in &batch.cells {
        for metric in Metric::ALL {
            write!(out, "{},{},\"{}\"", cell.seed, target_cell(cell.target), metric.label()).unwrap();
            for col in &cell.comparison.columns {
                write!(out, ",{:.2}", col.get(metric)).unwrap();
            }
            out.push('\n');
        }
    }
    out
}

/// Shared energy sent and received per house, for each sharing scenario.
pub fn per_house_csv(batch: &BatchReport, profiles: &dyn Fn(u64) -> Option<Vec<HouseProfile>>) -> String {
    let sharing: Vec<ScenarioKind> = batch.scenarios.iter().copied().filter(|s| s.sharing().is_some()).collect();
    let mut out = String::from("seed,target_ratio,house,is_prosumer");
    for s in &sharing {
        write!(out, ",{k}_shared_sent_wh,{k}_shared_received_wh", k = s.key()).unwrap();
    }
    out.push('\n');
    for cell in &batch.cells {
        let Some(first) = cell.comparison.columns.first() else { continue };
        let houses = first.per_house_shared_sent_wh.len();
        let prof = profiles(cell.seed);
        for h in 0..houses {
            let prosumer = prof.as_ref().and_then(|p| p.get(h)).map(|p| p.is_prosumer);
            write!(
                out,
                "{},{},{},{}",
                cell.seed,
                target_cell(cell.target),
                h,
                prosumer.map(|b| b.to_string()).unwrap_or_default()
            )
            .unwrap();
            for s in &sharing {
                let m = cell.comparison.column(*s).expect("scenario column");
                write!(out, ",{},{}", m.per_house_shared_sent_wh[h], m.per_house_shared_received_wh[h]).unwrap();
            }
            out.push('\n');
        }
    }
    out
}

/// One row per (cell, scenario, timestep) at full precision.
pub fn timeseries_csv(batch: &BatchReport) -> String {
    let mut out = String::from(
        "seed,target_ratio,scenario,t,p_t,up_t,grid_wh,wasted_wh,paid_to_grid_eur,earned_trading_eur,shared_wh,earned_sharing_eur\n",
    );
    for cell in &batch.cells {
        let target = target_cell(cell.target);
        for col in &cell.comparison.columns {
            for r in &col.series {
                writeln!(
                    out,
                    "{},{},{},{},{},{},{},{},{},{},{},{}",
                    cell.seed,
                    target,
                    col.scenario.key(),
                    r.t,
                    r.price,
                    r.utility_price,
                    r.grid_wh,
                    r.wasted_wh,
                    r.paid_to_grid_eur,
                    r.earned_trading_eur,
                    r.shared_wh,
                    r.earned_sharing_eur
                )
                .unwrap();
            }
        }
    }
    out
}

/// Contract ledger totals for every centralized-sharing run.
pub fn contract_csv(batch: &BatchReport) -> String {
    let mut out = String::from("seed,target_ratio,fees_total,sales_total,disbursed_total,balance,net_earnings\n");
    for cell in &batch.cells {
        if let Some(m) = cell.comparison.column(ScenarioKind::CSE) {
            let c = &m.contract;
            writeln!(
                out,
                "{},{},{:.2},{:.2},{:.2},{:.2},{:.2}",
                cell.seed,
                target_cell(cell.target),
                c.fees_total,
                c.sales_total,
                c.disbursed_total,
                c.balance,
                c.net_earnings()
            )
            .unwrap();
        }
    }
    out
}

/// Mean/min/max across seeds for every (target, scenario, metric).
pub fn batch_stats_csv(batch: &BatchReport) -> String {
    let mut out = String::from("target_ratio,scenario,metric,mean,min,max\n");
    for target in batch.targets() {
        for &s in &batch.scenarios {
            for metric in Metric::ALL {
                if let Some(st) = batch.stats(target, s, metric) {
                    writeln!(
                        out,
                        "{},{},\"{}\",{:.2},{:.2},{:.2}",
                        target_cell(target),
                        s.key(),
                        metric.label(),
                        st.mean,
                        st.min,
                        st.max
                    )
                    .unwrap();
                }
            }
        }
    }
    out
}

fn write_file(dir: &Path, name: &str, body: &str) -> Result<PathBuf, ReportError> {
    let path = dir.join(name);
    fs::write(&path, body).map_err(|source| ReportError::IoFailure {
        path: path.clone(),
        source,
    })?;
    Ok(path)
}

/// Writes every report file into `config.output` and returns their paths.
pub fn write_reports(config: &RunConfig, batch: &BatchReport) -> Result<Vec<PathBuf>, ReportError> {
    if batch.cells.is_empty() || batch.scenarios.is_empty() {
        return Err(ReportError::Empty);
    }
    let dir = &config.output;
    fs::create_dir_all(dir).map_err(|source| ReportError::IoFailure {
        path: dir.clone(),
        source,
    })?;
    let sim = config.sim.clone();
    let profiles = move |seed: u64| {
        Some(crate::ingest::generate_profiles_with(
            sim.n_houses,
            sim.pr,
            seed,
            &sim.profile_params,
        ))
    };
    let mut written = vec![
        write_file(dir, SUMMARY_FILE, &summary_csv(batch))?,
        write_file(dir, PER_HOUSE_FILE, &per_house_csv(batch, &profiles))?,
        write_file(dir, TIMESERIES_FILE, &timeseries_csv(batch))?,
    ];
    if batch.scenarios.contains(&ScenarioKind::CSE) {
        written.push(write_file(dir, CONTRACT_FILE, &contract_csv(batch))?);
    }
    if config.seeds.len() > 1 {
        written.push(write_file(dir, BATCH_STATS_FILE, &batch_stats_csv(batch))?);
    }
    written.push(write_file(dir, MANIFEST_FILE, &config.to_manifest_json())?);
    Ok(written)
}

/// Plain-text comparison table for the terminal.
pub fn render_text(batch: &BatchReport) -> String {
    let mut out = String::new();
    for cell in &batch.cells {
        let c = &cell.comparison;
        writeln!(
            out,
            "seed {}  generation ratio {:.3}  prosumers {}",
            cell.seed, c.generation_ratio, c.n_prosumers
        )
        .unwrap();
        write!(out, "{:<38}", "Metric").unwrap();
        for col in &c.columns {
            write!(out, "{:>18}", col.scenario.label()).unwrap();
        }
        out.push('\n');
        for metric in Metric::ALL {
            write!(out, "{:<38}", metric.label()).unwrap();
            for col in &c.columns {
                write!(out, "{:>18.2}", col.get(metric)).unwrap();
            }
            out.push('\n');
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{run_batch, SimConfig};
    use crate::ingest::synth::synthetic_table;

    fn small_batch(scenarios: &[ScenarioKind]) -> BatchReport {
        let table = synthetic_table(24 * 10, 2);
        let cfg = SimConfig {
            n_houses: 6,
            initial_balance: 0.2,
            ..SimConfig::default()
        };
        run_batch(&table, &cfg, scenarios, &[4], &[0.9]).unwrap()
    }

    #[test]
    fn summary_has_one_column_per_scenario() {
        let b = small_batch(&[ScenarioKind::Trading]);
        let s = summary_csv(&b);
        let lines: Vec<_> = s.lines().collect();
        assert_eq!(lines[0], "seed,target_ratio,metric,Trading");
        assert_eq!(lines.len(), 7);
        assert!(lines[1].starts_with("4,0.9,\"Total Energy from Grid (Wh)\","));
    }

    #[test]
    fn per_house_cross_foots() {
        let b = small_batch(&[ScenarioKind::CSE, ScenarioKind::P2PSE]);
        let csv = per_house_csv(&b, &|_| None);
        let mut sent = [0.0, 0.0];
        let mut recv = [0.0, 0.0];
        for line in csv.lines().skip(1) {
            let f: Vec<f64> = line.split(',').skip(4).map(|x| x.parse().unwrap()).collect();
            sent[0] += f[0];
            recv[0] += f[1];
            sent[1] += f[2];
            recv[1] += f[3];
        }
        for (i, s) in [ScenarioKind::CSE, ScenarioKind::P2PSE].iter().enumerate() {
            let total = b.cells[0].comparison.column(*s).unwrap().shared_by_prosumers_wh;
            assert!((sent[i] - total).abs() < 1e-6 * total.max(1.0));
            assert!((recv[i] - total).abs() < 1e-6 * total.max(1.0));
        }
    }

    #[test]
    fn timeseries_row_count() {
        let b = small_batch(&[ScenarioKind::Trading, ScenarioKind::P2PSE]);
        assert_eq!(timeseries_csv(&b).lines().count(), 1 + 2 * 240);
    }
}

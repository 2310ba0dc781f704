use std::fs::File;
use std::io::Read;
use std::path::Path;

use chrono::DateTime;
use serde::{Deserialize, Serialize};

use super::IngestError;

pub const TIME_COLUMN: &str = "time";
pub const SOLAR_COLUMN: &str = "generation solar";
pub const LOAD_COLUMN: &str = "total load actual";
pub const PRICE_COLUMN: &str = "price actual";

const HOUR_SECS: i64 = 3600;

/// Hourly community-level series.
///
/// `timestamps` are unix seconds. Tables read without a `time` column get
/// synthetic timestamps `0, 3600, 7200, ...`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeriesTable {
    pub timestamps: Vec<i64>,
    /// Solar generation per hour.
    pub solar_generation: Vec<f64>,
    /// Total community load per hour.
    pub total_load: Vec<f64>,
    /// Utility price in EUR/MWh.
    pub utility_price: Vec<f64>,
}

impl TimeSeriesTable {
    pub fn len(&self) -> usize {
        self.solar_generation.len()
    }

    pub fn is_empty(&self) -> bool {
        self.solar_generation.is_empty()
    }

    pub fn max_solar(&self) -> f64 {
        self.solar_generation.iter().copied().fold(0.0, f64::max)
    }

    pub fn mean_load(&self) -> f64 {
        if self.total_load.is_empty() {
            return 0.0;
        }
        self.total_load.iter().sum::<f64>() / self.total_load.len() as f64
    }

    /// Writes the table in the same CSV layout [`load_table`] reads.
    pub fn write_csv<W: std::io::Write>(&self, writer: W) -> Result<(), IngestError> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record([TIME_COLUMN, SOLAR_COLUMN, LOAD_COLUMN, PRICE_COLUMN])?;
        for t in 0..self.len() {
            let ts = DateTime::from_timestamp(self.timestamps[t], 0)
                .map(|d| d.format("%Y-%m-%d %H:%M:%S%:z").to_string())
                .unwrap_or_default();
            w.write_record([
                ts,
                self.solar_generation[t].to_string(),
                self.total_load[t].to_string(),
                self.utility_price[t].to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

pub fn load_table_path(path: impl AsRef<Path>) -> Result<TimeSeriesTable, IngestError> {
    load_table(File::open(path)?)
}

/// Reads the hourly table from CSV.
///
/// Extra columns are ignored. Empty or `NaN` cells are filled by linear
/// interpolation between the nearest valid neighbours; leading and trailing
/// gaps take the nearest valid value.
pub fn load_table<R: Read>(source: R) -> Result<TimeSeriesTable, IngestError> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(source);
    let headers = reader.headers()?.clone();
    let find = |name: &str| headers.iter().position(|h| h == name);
    let col = |name: &str| find(name).ok_or_else(|| IngestError::MissingColumn(name.to_string()));
    let solar_idx = col(SOLAR_COLUMN)?;
    let load_idx = col(LOAD_COLUMN)?;
    let price_idx = col(PRICE_COLUMN)?;
    let time_idx = find(TIME_COLUMN);

    let mut solar = Vec::new();
    let mut load = Vec::new();
    let mut price = Vec::new();
    let mut timestamps = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record?;
        let cell = |idx: usize, name: &str| parse_cell(record.get(idx).unwrap_or(""), row, name);
        solar.push(cell(solar_idx, SOLAR_COLUMN)?);
        load.push(cell(load_idx, LOAD_COLUMN)?);
        price.push(cell(price_idx, PRICE_COLUMN)?);
        if let Some(idx) = time_idx {
            let raw = record.get(idx).unwrap_or("");
            let parsed = DateTime::parse_from_str(raw, "%Y-%m-%d %H:%M:%S%:z")
                .or_else(|_| DateTime::parse_from_rfc3339(raw))
                .map_err(|_| IngestError::InvalidCell {
                    row,
                    column: TIME_COLUMN.to_string(),
                    value: raw.to_string(),
                })?;
            timestamps.push(parsed.timestamp());
        }
    }
    if solar.is_empty() {
        return Err(IngestError::EmptyTable);
    }
    if time_idx.is_none() {
        timestamps = (0..solar.len() as i64).map(|i| i * HOUR_SECS).collect();
    }
    for row in 1..timestamps.len() {
        let step = timestamps[row] - timestamps[row - 1];
        if step <= 0 {
            return Err(IngestError::NonMonotonicTimestamps { row });
        }
        if step != HOUR_SECS {
            return Err(IngestError::IrregularSpacing { row });
        }
    }

    Ok(TimeSeriesTable {
        timestamps,
        solar_generation: interpolate(solar, SOLAR_COLUMN)?,
        total_load: interpolate(load, LOAD_COLUMN)?,
        utility_price: interpolate(price, PRICE_COLUMN)?,
    })
}

fn parse_cell(raw: &str, row: usize, column: &str) -> Result<Option<f64>, IngestError> {
    if raw.is_empty() || raw.eq_ignore_ascii_case("nan") {
        return Ok(None);
    }
    match raw.parse::<f64>() {
        Ok(v) if v.is_finite() && v >= 0.0 => Ok(Some(v)),
        _ => Err(IngestError::InvalidCell {
            row,
            column: column.to_string(),
            value: raw.to_string(),
        }),
    }
}

fn interpolate(cells: Vec<Option<f64>>, column: &str) -> Result<Vec<f64>, IngestError> {
    let valid: Vec<usize> = (0..cells.len()).filter(|&i| cells[i].is_some()).collect();
    let (Some(&first), Some(&last)) = (valid.first(), valid.last()) else {
        return Err(IngestError::NoValidValues(column.to_string()));
    };
    let mut out = vec![0.0; cells.len()];
    for (i, v) in out.iter_mut().enumerate() {
        *v = match cells[i] {
            Some(x) => x,
            None if i < first => cells[first].unwrap(),
            None if i > last => cells[last].unwrap(),
            None => {
                // valid is sorted; locate the bracketing valid indices
                let hi = valid[valid.partition_point(|&j| j < i)];
                let lo = valid[valid.partition_point(|&j| j < i) - 1];
                let (a, b) = (cells[lo].unwrap(), cells[hi].unwrap());
                a + (b - a) * (i - lo) as f64 / (hi - lo) as f64
            }
        };
    }
    Ok(out)
}

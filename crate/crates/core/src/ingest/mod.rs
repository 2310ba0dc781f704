//! Input data: the hourly community time series, synthesized houses, and the
//! per-house generation/load matrices the simulator consumes.

mod dataset;
mod profiles;
pub mod synth;
mod table;

pub use dataset::{build_dataset, house_load, solar_output, Dataset};
pub use profiles::{generate_profiles, generate_profiles_with, peak_solar_capacity, HouseProfile, ProfileParams};
pub use table::{load_table, load_table_path, TimeSeriesTable, LOAD_COLUMN, PRICE_COLUMN, SOLAR_COLUMN, TIME_COLUMN};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("missing column '{0}'")]
    MissingColumn(String),
    #[error("table has no data rows")]
    EmptyTable,
    #[error("column '{0}' has no valid values")]
    NoValidValues(String),
    #[error("timestamps not strictly increasing at row {row}")]
    NonMonotonicTimestamps { row: usize },
    #[error("timestamps not spaced one hour apart at row {row}")]
    IrregularSpacing { row: usize },
    #[error("invalid value '{value}' in column '{column}' at row {row}")]
    InvalidCell { row: usize, column: String, value: String },
    #[error("degenerate table: {0}")]
    DegenerateTable(&'static str),
    #[error("horizon {horizon} exceeds table length {len}")]
    HorizonTooLong { horizon: usize, len: usize },
    #[error("dataset has no generation to calibrate")]
    NoGeneration,
    #[error("invalid calibration target {0}")]
    InvalidTarget(f64),
    #[error("timestep {t} out of range for table of length {len}")]
    OutOfRange { t: usize, len: usize },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

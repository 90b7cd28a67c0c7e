//! Persistence: run configuration files, binary snapshots and the text
//! time series.

pub mod config;
pub mod snapshot;
pub mod timeseries;

pub use config::RunConfig;
pub use snapshot::SnapshotFile;
pub use timeseries::{read_time_series, TimeSeriesWriter, COLUMNS};

//! Comma-separated diagnostics time series, 17 significant digits.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::diagnostics::DiagnosticsRecord;
use crate::error::{Error, Result};

pub const COLUMNS: [&str; 12] = [
    "t",
    "E",
    "D",
    "E_w",
    "D_w",
    "norm_l2",
    "norm_h1h",
    "norm_h2h_gamma",
    "norm_h3h_gamma",
    "budget_residual",
    "weighted_budget_residual",
    "cfl",
];

pub struct TimeSeriesWriter<W: Write> {
    out: W,
    last_t: Option<f64>,
}

impl<W: Write> TimeSeriesWriter<W> {
    pub fn new(mut out: W) -> Result<Self> {
        writeln!(out, "{}", COLUMNS.join(","))?;
        Ok(Self { out, last_t: None })
    }

    pub fn write_record(&mut self, r: &DiagnosticsRecord) -> Result<()> {
        if let Some(prev) = self.last_t {
            if r.t <= prev {
                return Err(Error::Diagnostic(format!("time series rows must increase in t ({} after {prev})", r.t)));
            }
        }
        self.last_t = Some(r.t);
        let vals = [
            r.t,
            r.energy,
            r.dissipation,
            r.energy_w,
            r.dissipation_w,
            r.norm_l2,
            r.norm_h1h,
            r.norm_h2h_gamma,
            r.norm_h3h_gamma,
            r.budget_residual,
            r.weighted_budget_residual,
            r.cfl,
        ];
        let row: Vec<String> = vals.iter().map(|v| format!("{v:.16e}")).collect();
        writeln!(self.out, "{}", row.join(","))?;
        Ok(())
    }

    pub fn flush(&mut self) -> Result<()> {
        self.out.flush()?;
        Ok(())
    }

    pub fn into_inner(self) -> W {
        self.out
    }
}

/// Parse a time series back into rows of numbers.
pub fn read_time_series(path: impl AsRef<Path>) -> Result<Vec<Vec<f64>>> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| Error::Format("empty time series".into()))?;
    if header != COLUMNS.join(",") {
        return Err(Error::Format(format!("unexpected time series header '{header}'")));
    }
    lines
        .enumerate()
        .map(|(i, l)| {
            let row: std::result::Result<Vec<f64>, _> = l.split(',').map(str::parse).collect();
            let row = row.map_err(|_| Error::Format(format!("row {}: not numeric", i + 2)))?;
            if row.len() != COLUMNS.len() {
                return Err(Error::Format(format!("row {} has {} columns", i + 2, row.len())));
            }
            Ok(row)
        })
        .collect()
}

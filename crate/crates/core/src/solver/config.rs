use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::{make_grid, Field, Grid, StripDomain};
use crate::io::snapshot::SnapshotFile;
use crate::solver::mms::MmsReference;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scheme {
    /// Backward Euler on the viscous term, forward Euler on the rest.
    ImexEuler,
    /// Crank–Nicolson on the viscous term, Adams–Bashforth 2 on `B`.
    ImexCnab2,
}

impl Scheme {
    pub fn order(&self) -> u32 {
        match self {
            Scheme::ImexEuler => 1,
            Scheme::ImexCnab2 => 2,
        }
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "imex_euler" => Ok(Scheme::ImexEuler),
            "imex_cnab2" => Ok(Scheme::ImexCnab2),
            other => Err(Error::Config(format!(
                "unknown scheme '{other}' (expected imex_euler or imex_cnab2)"
            ))),
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::ImexEuler => "imex_euler",
            Scheme::ImexCnab2 => "imex_cnab2",
        })
    }
}

/// Analytic or stored scalar field used as forcing or initial data.
#[derive(Clone, Debug, PartialEq)]
pub enum FieldSource {
    Zero,
    /// `A·sin(2πk₁x₁/Lx)·(1 − (x₂/M)²)²·cos(πk₂x₂/M)`.
    TrigClamped { amplitude: f64, k1: u32, k2: u32 },
    /// Manufactured solution: the field itself as initial data, its
    /// residual as (time-dependent) forcing.
    Mms(MmsReference),
    /// Snapshot file.
    File(PathBuf),
}

pub type ForcingSpec = FieldSource;
pub type InitialConditionSpec = FieldSource;

impl FieldSource {
    pub fn trig_clamped(amplitude: f64, k1: u32, k2: u32) -> Self {
        FieldSource::TrigClamped { amplitude, k1, k2 }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            FieldSource::Zero => true,
            FieldSource::TrigClamped { amplitude, .. } => *amplitude == 0.0,
            _ => false,
        }
    }

    /// Sample as initial data. Wall values are zeroed and the result is
    /// flagged clamped.
    pub fn initial_field(&self, grid: &Arc<Grid>) -> Result<Field> {
        let f = match self {
            FieldSource::Zero => Field::zeros(grid),
            FieldSource::TrigClamped { amplitude, k1, k2 } => trig_clamped_field(grid, *amplitude, *k1, *k2),
            FieldSource::Mms(r) => r.field(grid, 0.0),
            FieldSource::File(path) => {
                let snap = SnapshotFile::read(path)?;
                let f = snap.into_field(grid)?;
                let wall = f
                    .values()
                    .column(0)
                    .iter()
                    .chain(f.values().column(grid.ny() - 1).iter())
                    .fold(0.0_f64, |m, v| m.max(v.abs()));
                if wall > 1e-12 * (1.0 + f.max_abs()) {
                    return Err(Error::Config(format!(
                        "initial field from {} does not vanish on the walls (max |v| = {wall:e})",
                        path.display()
                    )));
                }
                f
            }
        };
        Ok(f.into_clamped())
    }
}

pub(crate) fn trig_clamped_field(grid: &Arc<Grid>, amplitude: f64, k1: u32, k2: u32) -> Field {
    let lx = grid.domain().lx();
    let m = grid.domain().m();
    let two_pi = 2.0 * std::f64::consts::PI;
    Field::from_fn(grid, |x1, x2| {
        let s = x2 / m;
        let bump = (1.0 - s * s).powi(2);
        amplitude
            * (two_pi * k1 as f64 * x1 / lx).sin()
            * bump
            * (std::f64::consts::PI * k2 as f64 * s).cos()
    })
    .into_clamped()
}

/// Everything a run needs.
#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig {
    pub lx: f64,
    pub m: f64,
    pub nx: usize,
    pub ny: usize,
    pub alpha: f64,
    pub nu: f64,
    pub dt: f64,
    pub t_end: f64,
    pub scheme: Scheme,
    pub forcing: ForcingSpec,
    pub ic: InitialConditionSpec,
    /// Diagnostics cadence in steps.
    pub output_every: usize,
    /// 2/3-rule truncation of products (on by default).
    pub dealias: bool,
    /// Drop `B` entirely (linear Stokes-type dynamics).
    pub nonlinear: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            lx: 2.0 * std::f64::consts::PI,
            m: 1.0,
            nx: 64,
            ny: 65,
            alpha: 0.5,
            nu: 0.01,
            dt: 1e-3,
            t_end: 1.0,
            scheme: Scheme::ImexEuler,
            forcing: FieldSource::Zero,
            ic: FieldSource::trig_clamped(1.0, 1, 1),
            output_every: 1,
            dealias: true,
            nonlinear: true,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [("lx", self.lx), ("m", self.m), ("nu", self.nu), ("dt", self.dt)];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.t_end.is_finite() && self.t_end >= 0.0) {
            return Err(Error::Config(format!("t_end must be >= 0, got {}", self.t_end)));
        }
        if !(self.alpha.is_finite() && self.alpha >= 0.0) {
            return Err(Error::Config(format!("alpha must be >= 0, got {}", self.alpha)));
        }
        if self.output_every == 0 {
            return Err(Error::Config("output.every must be at least 1".into()));
        }
        Ok(())
    }

    pub fn domain(&self) -> Result<StripDomain> {
        StripDomain::new(self.lx, self.m)
    }

    pub fn grid(&self) -> Result<Arc<Grid>> {
        make_grid(self.domain()?, self.nx, self.ny)
    }

    /// Number of steps to reach `t_end` (rounded to the nearest integer).
    pub fn n_steps(&self) -> usize {
        (self.t_end / self.dt).round() as usize
    }
}

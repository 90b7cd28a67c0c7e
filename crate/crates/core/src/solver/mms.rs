//! Manufactured solutions: separable references `Σ T(t)·cos(κx₁ + θ)·P(x₂)`
//! with polynomial profiles vanishing to second order on the walls, and
//! the forcing that makes them exact solutions of the filtered model.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::{Field, Grid};
use crate::solver::config::SolverConfig;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TimeProfile {
    Constant,
    /// `e^{-rate·t}`.
    Exp { rate: f64 },
    /// `cos(ω t)`.
    Cos { omega: f64 },
}

impl TimeProfile {
    pub fn value(&self, t: f64) -> f64 {
        match *self {
            TimeProfile::Constant => 1.0,
            TimeProfile::Exp { rate } => (-rate * t).exp(),
            TimeProfile::Cos { omega } => (omega * t).cos(),
        }
    }

    pub fn derivative(&self, t: f64) -> f64 {
        match *self {
            TimeProfile::Constant => 0.0,
            TimeProfile::Exp { rate } => -rate * (-rate * t).exp(),
            TimeProfile::Cos { omega } => -omega * (omega * t).sin(),
        }
    }
}

fn poly_eval(c: &[f64], y: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, a| acc * y + a)
}

fn poly_deriv(c: &[f64]) -> Vec<f64> {
    c.iter().enumerate().skip(1).map(|(i, a)| i as f64 * a).collect()
}

fn poly_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// `(1 − (y/M)²)²·q(y)`.
pub fn clamped_profile(m: f64, q: &[f64]) -> Vec<f64> {
    let bump = [1.0, 0.0, -2.0 / (m * m), 0.0, 1.0 / m.powi(4)];
    poly_mul(&bump, q)
}

/// One separable term `amplitude·T(t)·cos(κ_k x₁ + phase)·P(x₂)`.
#[derive(Clone, Debug, PartialEq)]
pub struct MmsTerm {
    pub amplitude: f64,
    pub k: u32,
    pub phase: f64,
    /// Ascending coefficients of `P`.
    pub profile: Vec<f64>,
    pub time: TimeProfile,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MmsReference {
    id: String,
    terms: Vec<MmsTerm>,
}

// Pointwise values of one term: v, ∂₁v, ∂₂v, Δv, ∂₁Δv, ∂₂Δv, Δ²v with the
// amplitude but without the time factor.
struct Jet {
    v: f64,
    d1: f64,
    d2: f64,
    lap: f64,
    d1_lap: f64,
    d2_lap: f64,
    bih: f64,
}

impl MmsReference {
    /// Reject profiles that do not satisfy `P = P' = 0` at `±m`.
    pub fn new(id: impl Into<String>, terms: Vec<MmsTerm>, m: f64) -> Result<Self> {
        for t in &terms {
            let dp = poly_deriv(&t.profile);
            let scale = t.profile.iter().fold(1.0_f64, |s, c| s.max(c.abs() * m.powi(4)));
            for y in [-m, m] {
                if poly_eval(&t.profile, y).abs() > 1e-12 * scale || poly_eval(&dp, y).abs() > 1e-12 * scale {
                    return Err(Error::Config("manufactured profile must be clamped at the walls".into()));
                }
            }
        }
        Ok(Self { id: id.into(), terms })
    }

    /// Built-in references: `steady` and `unsteady`.
    pub fn by_id(id: &str, m: f64) -> Result<Self> {
        let base = |t1: TimeProfile, t2: TimeProfile| {
            vec![
                MmsTerm {
                    amplitude: 1.0,
                    k: 1,
                    phase: 0.0,
                    profile: clamped_profile(m, &[1.0, 0.5 / m]),
                    time: t1,
                },
                MmsTerm {
                    amplitude: 0.5,
                    k: 2,
                    phase: 0.3,
                    profile: clamped_profile(m, &[0.0, 1.0 / m]),
                    time: t2,
                },
            ]
        };
        let terms = match id {
            "steady" => base(TimeProfile::Constant, TimeProfile::Constant),
            "unsteady" => base(TimeProfile::Cos { omega: 2.0 }, TimeProfile::Exp { rate: 0.5 }),
            other => {
                return Err(Error::Config(format!(
                    "unknown manufactured solution '{other}' (expected steady or unsteady)"
                )))
            }
        };
        Self::new(id, terms, m)
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn terms(&self) -> &[MmsTerm] {
        &self.terms
    }

    pub fn is_steady(&self) -> bool {
        self.terms.iter().all(|t| t.time == TimeProfile::Constant)
    }

    fn jet(term: &MmsTerm, kappa: f64, x1: f64, x2: f64) -> Jet {
        let p0 = &term.profile;
        let p1 = poly_deriv(p0);
        let p2 = poly_deriv(&p1);
        let p3 = poly_deriv(&p2);
        let p4 = poly_deriv(&p3);
        let [v0, v1, v2, v3, v4] = [p0, &p1, &p2, &p3, &p4].map(|p| poly_eval(p, x2));
        let arg = kappa * x1 + term.phase;
        let (s, c) = arg.sin_cos();
        let a = term.amplitude;
        let k2 = kappa * kappa;
        let lap_p = v2 - k2 * v0;
        Jet {
            v: a * c * v0,
            d1: -a * kappa * s * v0,
            d2: a * c * v1,
            lap: a * c * lap_p,
            d1_lap: -a * kappa * s * lap_p,
            d2_lap: a * c * (v3 - k2 * v1),
            bih: a * c * (v4 - 2.0 * k2 * v2 + k2 * k2 * v0),
        }
    }

    /// `v*(·, t)` at the grid nodes, flagged clamped.
    pub fn field(&self, grid: &Arc<Grid>, t: f64) -> Field {
        Field::from_fn(grid, |x1, x2| {
            self.terms
                .iter()
                .map(|term| term.time.value(t) * Self::jet(term, grid.wavenumber(term.k as usize), x1, x2).v)
                .sum()
        })
        .into_clamped()
    }

    /// Residual `(1−α²∂₁²)Δ∂ₜv* + B(v*,v*) − ν(1−α²∂₁²)Δ²v*` in closed form.
    pub fn forcing(&self, grid: &Arc<Grid>, t: f64, alpha: f64, nu: f64) -> Field {
        Field::from_fn(grid, |x1, x2| {
            let (mut d1, mut d2, mut d1_lap, mut d2_lap, mut linear) = (0.0, 0.0, 0.0, 0.0, 0.0);
            for term in &self.terms {
                let kappa = grid.wavenumber(term.k as usize);
                let j = Self::jet(term, kappa, x1, x2);
                let filt = 1.0 + alpha * alpha * kappa * kappa;
                let (tv, tdot) = (term.time.value(t), term.time.derivative(t));
                d1 += tv * j.d1;
                d2 += tv * j.d2;
                d1_lap += tv * j.d1_lap;
                d2_lap += tv * j.d2_lap;
                linear += filt * (tdot * j.lap - nu * tv * j.bih);
            }
            linear + d2 * d1_lap - d1 * d2_lap
        })
    }
}

/// Forcing that makes `reference` exact for the model of `config`.
pub fn mms_forcing(reference: &MmsReference, t: f64, config: &SolverConfig) -> Result<Field> {
    let grid = config.grid()?;
    Ok(reference.forcing(&grid, t, config.alpha, config.nu))
}

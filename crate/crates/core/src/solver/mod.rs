//! IMEX time integration of the horizontally filtered model
//! `(1−α²∂₁²)Δ∂ₜv + B(v,v) − ν(1−α²∂₁²)Δ²v = g` with clamped walls.
//!
//! Per Fourier mode `k` the interior unknowns obey
//! `M v̂' = −ν S v̂ − N̂`, where `M = κ² − D₂²` (tridiagonal),
//! `S = (D₂² − κ²)²` with the clamped ghost rows (pentadiagonal), and
//! `N̂ = (ĝ − B̂)/(1 + α²κ²)`. Each step solves for the increment
//! `δ = v̂ⁿ⁺¹ − v̂ⁿ`:
//!
//! - Euler: `(M + ν dt S) δ = −ν dt S v̂ⁿ − dt N̂(gⁿ⁺¹, Bⁿ)`
//! - CNAB2: `(M + ½ν dt S) δ = −ν dt S v̂ⁿ − dt N̂(gⁿ⁺½, 3/2 Bⁿ − 1/2 Bⁿ⁻¹)`
//!
//! The wall values never enter the unknowns, so `v = ∂₂v = 0` holds by
//! construction. The state is kept inside the dealiasing band, which
//! together with the conservative form of `B` makes `(B(v,v), v)`
//! vanish in the discrete pairing.

pub mod config;
pub mod mms;

use std::cell::Cell;
use std::sync::Arc;

use log::warn;
use ndarray::Zip;
use num_complex::Complex64;

use crate::banded::{PentaLdl, SymPenta};
use crate::error::{Error, Result};
use crate::filter::FilterSpec;
use crate::grid::{Field, Grid, ModalField};
use crate::operators::OperatorSet;

pub use config::{FieldSource, ForcingSpec, InitialConditionSpec, Scheme, SolverConfig};
pub use mms::{mms_forcing, MmsReference, MmsTerm, TimeProfile};

/// Advective CFL number above which a warning is logged.
pub const CFL_LIMIT: f64 = 0.5;

#[derive(Clone, Debug)]
pub struct SolverState {
    pub t: f64,
    pub step: usize,
    pub v: Field,
    pub v_hat: ModalField,
    /// `B̂` of the previous step, for the Adams–Bashforth extrapolation.
    pub b_prev: Option<ModalField>,
    /// CFL number measured at the start of the last step.
    pub cfl: f64,
}

/// Interior-node mass operator `κ² − D₂²`.
pub fn mass_matrix(n: usize, dy: f64, kappa: f64) -> SymPenta {
    let h2 = 1.0 / (dy * dy);
    let mut m = SymPenta::zeros(n);
    m.diag.fill(2.0 * h2 + kappa * kappa);
    m.off1.fill(-h2);
    m
}

/// Interior-node clamped biharmonic `(D₂² − κ²)²`.
pub fn stiffness_matrix(n: usize, dy: f64, kappa: f64) -> SymPenta {
    let h2 = 1.0 / (dy * dy);
    let h4 = h2 * h2;
    let k2 = kappa * kappa;
    let mut s = SymPenta::zeros(n);
    s.diag.fill(6.0 * h4 + 4.0 * k2 * h2 + k2 * k2);
    // ghost reflection from ∂₂v = 0
    s.diag[0] += h4;
    s.diag[n - 1] += h4;
    s.off1.fill(-4.0 * h4 - 2.0 * k2 * h2);
    s.off2.fill(h4);
    s
}

pub struct Solver {
    config: SolverConfig,
    grid: Arc<Grid>,
    ops: OperatorSet,
    filter: FilterSpec,
    band: usize,
    mass: Vec<SymPenta>,
    stiff: Vec<SymPenta>,
    factors: Vec<PentaLdl>,
    steady_forcing: Option<ModalField>,
    mms: Option<MmsReference>,
    cfl_warned: Cell<bool>,
}

impl Solver {
    pub fn new(config: &SolverConfig) -> Result<Self> {
        config.validate()?;
        let grid = config.grid()?;
        let ops = OperatorSet::new(&grid, config.dealias);
        let filter = FilterSpec::new(config.alpha)?;
        // the Nyquist mode is never carried
        let band = ops.band_limit().min(grid.nyquist() - 1);
        let n = grid.ny() - 2;
        let theta = match config.scheme {
            Scheme::ImexEuler => 1.0,
            Scheme::ImexCnab2 => 0.5,
        };
        let mut mass = Vec::with_capacity(band + 1);
        let mut stiff = Vec::with_capacity(band + 1);
        let mut factors = Vec::with_capacity(band + 1);
        for k in 0..=band {
            let kappa = grid.wavenumber(k);
            let m = mass_matrix(n, grid.dy(), kappa);
            let s = stiffness_matrix(n, grid.dy(), kappa);
            let a = m.combine(1.0, &s, theta * config.nu * config.dt);
            factors.push(a.factor().ok_or(Error::Singular { mode: k })?);
            mass.push(m);
            stiff.push(s);
        }

        let mut steady_forcing = None;
        let mut mms = None;
        match &config.forcing {
            FieldSource::Mms(r) if !r.is_steady() => mms = Some(r.clone()),
            FieldSource::Mms(r) => {
                let g = r.forcing(&grid, 0.0, config.alpha, config.nu);
                steady_forcing = Some(project(&g.to_modal(), band));
            }
            src if src.is_zero() => {}
            src => {
                let g = src.initial_field(&grid)?;
                steady_forcing = Some(project(&g.to_modal(), band));
            }
        }
        Ok(Self {
            config: config.clone(),
            grid,
            ops,
            filter,
            band,
            mass,
            stiff,
            factors,
            steady_forcing,
            mms,
            cfl_warned: Cell::new(false),
        })
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn ops(&self) -> &OperatorSet {
        &self.ops
    }

    pub fn filter(&self) -> &FilterSpec {
        &self.filter
    }

    /// Highest Fourier mode carried by the state.
    pub fn band(&self) -> usize {
        self.band
    }

    pub fn mass(&self, k: usize) -> &SymPenta {
        &self.mass[k]
    }

    pub fn stiffness(&self, k: usize) -> &SymPenta {
        &self.stiff[k]
    }

    /// State from a clamped field, projected onto the carried band.
    pub fn state_from_field(&self, v: &Field, t: f64) -> Result<SolverState> {
        if **v.grid() != *self.grid {
            return Err(Error::GridMismatch);
        }
        let v_hat = project(&v.clone().into_clamped().to_modal(), self.band).with_clamped_flag(true);
        let v = v_hat.to_physical().into_clamped();
        Ok(SolverState {
            t,
            step: 0,
            v,
            v_hat,
            b_prev: None,
            cfl: 0.0,
        })
    }

    pub fn initial_state(&self) -> Result<SolverState> {
        let v0 = self.config.ic.initial_field(&self.grid)?;
        self.state_from_field(&v0, 0.0)
    }

    /// Modal forcing at time `t`, projected onto the band; `None` when zero.
    pub fn forcing_modal(&self, t: f64) -> Option<ModalField> {
        if let Some(r) = &self.mms {
            let g = r.forcing(&self.grid, t, self.config.alpha, self.config.nu);
            return Some(project(&g.to_modal(), self.band));
        }
        self.steady_forcing.clone()
    }

    /// Time at which the forcing enters a step starting at `t`.
    fn forcing_time(&self, t: f64) -> f64 {
        match self.config.scheme {
            Scheme::ImexEuler => t + self.config.dt,
            Scheme::ImexCnab2 => t + 0.5 * self.config.dt,
        }
    }

    /// Conservative `B̂(v,v)` and the advective CFL number of `v`.
    pub fn nonlinear_term(&self, v_hat: &ModalField) -> Result<(ModalField, f64)> {
        if !self.config.nonlinear {
            return Ok((ModalField::zeros(&self.grid), 0.0));
        }
        let parts = self.ops.conservative_b_parts(v_hat, v_hat)?;
        let mut speed: f64 = 0.0;
        Zip::from(parts.d1_v.values())
            .and(parts.d2_v.values())
            .for_each(|a, b| speed = speed.max(a.hypot(*b)));
        let h = self.grid.dx().min(self.grid.dy());
        Ok((project(&parts.b, self.band), self.config.dt * speed / h))
    }

    /// Advance one step in place.
    pub fn step(&self, state: &mut SolverState) -> Result<()> {
        let cfg = &self.config;
        let (b_now, cfl) = self.nonlinear_term(&state.v_hat)?;
        if cfl > CFL_LIMIT && !self.cfl_warned.replace(true) {
            warn!(
                "advective CFL number {cfl:.3} exceeds {CFL_LIMIT} at t = {:.6}; consider a smaller dt",
                state.t
            );
        }
        let b_star = match (cfg.scheme, &state.b_prev) {
            (Scheme::ImexCnab2, Some(prev)) => {
                let mut b = b_now.clone();
                Zip::from(b.coeffs_mut())
                    .and(prev.coeffs())
                    .for_each(|x, p| *x = *x * 1.5 - *p * 0.5);
                b
            }
            _ => b_now.clone(),
        };
        let g = self.forcing_modal(self.forcing_time(state.t));

        let ny = self.grid.ny();
        let n = ny - 2;
        let (nu, dt) = (cfg.nu, cfg.dt);
        let mut rhs = vec![Complex64::new(0.0, 0.0); n];
        let mut sv = vec![Complex64::new(0.0, 0.0); n];
        let mut cur = vec![Complex64::new(0.0, 0.0); n];
        let coeffs = state.v_hat.coeffs_mut();
        for k in 0..=self.band {
            let filt = self.filter.multiplier(self.grid.wavenumber(k));
            for j in 0..n {
                cur[j] = coeffs[[k, j + 1]];
            }
            self.stiff[k].matvec(&cur, &mut sv);
            for j in 0..n {
                let mut explicit = -b_star.coeffs()[[k, j + 1]];
                if let Some(g) = &g {
                    explicit += g.coeffs()[[k, j + 1]];
                }
                rhs[j] = sv[j] * (-nu * dt) - explicit * (dt / filt);
            }
            self.factors[k].solve_in_place(&mut rhs);
            for j in 0..n {
                coeffs[[k, j + 1]] = cur[j] + rhs[j];
            }
        }
        // k = 0 carries real data only
        for j in 0..ny {
            coeffs[[0, j]].im = 0.0;
        }
        if coeffs.iter().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(Error::BlowUp {
                last_good_time: state.t,
            });
        }
        state.step += 1;
        state.t = state.step as f64 * dt;
        state.cfl = cfl;
        state.b_prev = Some(b_now);
        state.v = state.v_hat.to_physical().into_clamped();
        Ok(())
    }

    /// Step until `t_end`, calling `observer` on the initial state and after
    /// every step.
    pub fn run_from<F>(&self, mut state: SolverState, mut observer: F) -> Result<SolverState>
    where
        F: FnMut(&Solver, &SolverState) -> Result<()>,
    {
        observer(self, &state)?;
        let n_steps = self.config.n_steps();
        while state.step < n_steps {
            self.step(&mut state)?;
            observer(self, &state)?;
        }
        Ok(state)
    }
}

/// Zero every mode above `band` and the Nyquist row.
fn project(m: &ModalField, band: usize) -> ModalField {
    let mut out = m.clone();
    out.truncate_above(band);
    out
}

/// Run a configuration from its initial condition.
pub fn run<F>(config: &SolverConfig, observer: F) -> Result<SolverState>
where
    F: FnMut(&Solver, &SolverState) -> Result<()>,
{
    let solver = Solver::new(config)?;
    let state = solver.initial_state()?;
    solver.run_from(state, observer)
}

/// Unfiltered Navier–Stokes in stream-function form: the same path with `α = 0`.
pub fn nse_run<F>(config: &SolverConfig, observer: F) -> Result<SolverState>
where
    F: FnMut(&Solver, &SolverState) -> Result<()>,
{
    let mut cfg = config.clone();
    cfg.alpha = 0.0;
    run(&cfg, observer)
}

#[cfg(test)]
mod tests;

//! Energy, dissipation and weighted-norm diagnostics of solver runs, the
//! budgets they satisfy, and the convergence and compactness studies
//! built on top of them.
//!
//! `E = ‖∇v‖² + α²‖∂₁∇v‖²` uses the staggered `x₂` difference and
//! `D = ν(‖Δv‖² + α²‖∂₁Δv‖²)` the clamped Laplacian with trapezoid
//! weights. These are exactly the quadratic forms of the solver's mass and
//! stiffness operators, so the discrete budget
//! `(Eⁿ⁺¹ − Eⁿ)/dt + 2Dⁿ⁺¹ + 2(g, vⁿ⁺¹)` only carries time-stepping error.

pub mod poincare;
mod refinement;
mod translation;

pub use poincare::{lambda1, poincare_check, random_clamped_field, Lambda1Estimate, PoincareReport};
pub use refinement::{galerkin_refinement_study, prolong, restrict, RefinementReport};
pub use translation::{
    fit_loglog_slope, translation_modulus, TranslationAccumulator, TranslationNorm, TranslationReport,
};

use crate::error::{Error, Result};
use crate::grid::{inner_product, Field, ModalField};
use crate::operators::WallClosure;
use crate::solver::{Scheme, Solver, SolverConfig, SolverState};
use crate::weights::{quad_sq, staggered_d2_sq, weighted_sobolev_norms, WeightField, WeightSpec};

/// One diagnostics sample.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub energy: f64,
    pub dissipation: f64,
    /// `(g, v)`.
    pub forcing_work: f64,
    pub energy_w: f64,
    pub dissipation_w: f64,
    /// `(g, v)` with weight `φ`.
    pub forcing_work_w: f64,
    pub norm_l2: f64,
    /// `‖v_t‖` by backward difference (0 on the first record).
    pub norm_vt: f64,
    /// `‖∇v_t‖` by backward difference.
    pub norm_grad_vt: f64,
    pub norm_h1h: f64,
    pub norm_h2h_gamma: f64,
    pub norm_h3h_gamma: f64,
    pub budget_residual: f64,
    pub weighted_budget_residual: f64,
    pub cfl: f64,
}

/// `E`, `D` and `(g, v)` from the modal state through Parseval, using
/// the solver's per-mode operators.
pub fn modal_energy(solver: &Solver, v_hat: &ModalField, g_hat: Option<&ModalField>) -> (f64, f64, f64) {
    let grid = solver.grid();
    let cfg = solver.config();
    let n = grid.ny() - 2;
    let scale = grid.dx() * grid.dy() / grid.nx() as f64;
    let (mut e, mut d, mut w) = (0.0, 0.0, 0.0);
    let mut col = vec![num_complex::Complex64::new(0.0, 0.0); n];
    let mut mv = col.clone();
    let mut sv = col.clone();
    for k in 0..=solver.band() {
        let c = grid.mode_multiplicity(k) * solver.filter().multiplier(grid.wavenumber(k));
        for j in 0..n {
            col[j] = v_hat.coeffs()[[k, j + 1]];
        }
        solver.mass(k).matvec(&col, &mut mv);
        solver.stiffness(k).matvec(&col, &mut sv);
        let (mut em, mut dm) = (0.0, 0.0);
        for j in 0..n {
            em += (col[j].conj() * mv[j]).re;
            dm += (col[j].conj() * sv[j]).re;
        }
        e += c * em;
        d += c * dm;
        if let Some(g) = g_hat {
            let mult = grid.mode_multiplicity(k);
            w += mult * (1..=n).map(|j| (g.coeffs()[[k, j]] * v_hat.coeffs()[[k, j]].conj()).re).sum::<f64>();
        }
    }
    (e * scale, cfg.nu * d * scale, w * scale)
}

/// `E_w`, `D_w` and the weighted norms of a clamped field.
pub struct WeightedEnergy {
    pub energy: f64,
    pub dissipation: f64,
    pub h2h: f64,
    pub h3h: f64,
}

pub fn weighted_energy(v: &Field, weights: &WeightField, alpha: f64, nu: f64) -> Result<WeightedEnergy> {
    let n = weighted_sobolev_norms(v, weights)?;
    let a2 = alpha * alpha;
    let h2h_sq = n.psi_f.powi(2) + n.psi_d1.powi(2) + n.psi_d1_grad.powi(2);
    Ok(WeightedEnergy {
        energy: n.psi_grad.powi(2) + a2 * n.psi_d1_grad.powi(2),
        dissipation: nu * (n.psi_lap.powi(2) + a2 * n.psi_d1_lap.powi(2)),
        h2h: h2h_sq.sqrt(),
        h3h: (h2h_sq + n.psi_d1_lap.powi(2)).sqrt(),
    })
}

/// `(∇a, ∇b)` with spectral `∂₁` and the staggered `∂₂`.
pub fn grad_pairing(a: &Field, b: &Field) -> Result<f64> {
    let ops = crate::operators::OperatorSet::new(a.grid(), false);
    let x = inner_product(&ops.d1(a), &ops.d1(b), None)?;
    let grid = a.grid();
    let (va, vb) = (a.values(), b.values());
    let mut y = 0.0;
    for i in 0..grid.nx() {
        for j in 0..grid.ny() - 1 {
            y += (va[[i, j + 1]] - va[[i, j]]) * (vb[[i, j + 1]] - vb[[i, j]]);
        }
    }
    Ok(x + y * grid.dx() / grid.dy())
}

/// `(Δa, Δb)` with the clamped wall closure.
pub fn lap_pairing(a: &Field, b: &Field) -> Result<f64> {
    let ops = crate::operators::OperatorSet::new(a.grid(), false);
    let la = ops.laplacian_modal_with(&a.to_modal(), WallClosure::Clamped).to_physical();
    let lb = ops.laplacian_modal_with(&b.to_modal(), WallClosure::Clamped).to_physical();
    inner_product(&la, &lb, None)
}

/// Relative residual of the discrete weak formulation over one step,
/// tested against the clamped field `h`:
/// `(∇v_t,∇h) + α²(∂₁∇v_t,∂₁∇h) + ν(Δv,Δh) + να²(∂₁Δv,∂₁Δh) − (B,h) + (g,h)`,
/// with `v`, `B` and `g` taken at the scheme's evaluation points. The
/// pairings are evaluated with grid operators, independently of the
/// solver's matrices.
pub fn weak_form_residual(solver: &Solver, before: &SolverState, after: &SolverState, h: &Field) -> Result<f64> {
    if !h.is_clamped() {
        return Err(Error::Diagnostic("weak-form test field must be clamped".into()));
    }
    let cfg = solver.config();
    let ops = crate::operators::OperatorSet::new(solver.grid(), false);
    let dt = cfg.dt;
    let vt = after.v.sub(&before.v)?.scaled(1.0 / dt).into_clamped();
    let (b_now, _) = solver.nonlinear_term(&before.v_hat)?;
    let (v_eval, b_eval, t_g) = match (cfg.scheme, &before.b_prev) {
        (Scheme::ImexEuler, _) => (after.v.clone(), b_now.to_physical(), after.t),
        (Scheme::ImexCnab2, prev) => {
            let mid = after.v.lin_comb(0.5, &before.v, 0.5)?.into_clamped();
            let b = match prev {
                Some(p) => b_now.to_physical().lin_comb(1.5, &p.to_physical(), -0.5)?,
                None => b_now.to_physical(),
            };
            (mid, b, before.t + 0.5 * dt)
        }
    };
    let a2 = cfg.alpha * cfg.alpha;
    let d1h = ops.d1(h).into_clamped();
    let terms = [
        grad_pairing(&vt, h)?,
        a2 * grad_pairing(&ops.d1(&vt).into_clamped(), &d1h)?,
        cfg.nu * lap_pairing(&v_eval, h)?,
        cfg.nu * a2 * lap_pairing(&ops.d1(&v_eval).into_clamped(), &d1h)?,
        -inner_product(&b_eval, h, None)?,
        solver
            .forcing_modal(t_g)
            .map_or(Ok(0.0), |g| inner_product(&g.to_physical(), h, None))?,
    ];
    let scale: f64 = terms.iter().map(|t| t.abs()).sum();
    let total: f64 = terms.iter().sum();
    Ok(if scale > 0.0 { total.abs() / scale } else { 0.0 })
}

/// Computes a [`DiagnosticsRecord`] for every state it sees, filling the
/// budget residuals from the previous one.
pub struct Recorder {
    weights: WeightField,
    prev: Option<(DiagnosticsRecord, Field)>,
}

impl Recorder {
    pub fn new(weights: WeightField) -> Self {
        Self { weights, prev: None }
    }

    pub fn weights(&self) -> &WeightField {
        &self.weights
    }

    pub fn observe(&mut self, solver: &Solver, state: &SolverState) -> Result<DiagnosticsRecord> {
        let cfg = solver.config();
        // the forcing paired with vⁿ⁺¹ is the one the step used
        let g_time = match (cfg.scheme, state.step) {
            (_, 0) => state.t,
            (Scheme::ImexEuler, _) => state.t,
            (Scheme::ImexCnab2, _) => state.t - 0.5 * cfg.dt,
        };
        let g_hat = solver.forcing_modal(g_time);
        let (energy, dissipation, forcing_work) = modal_energy(solver, &state.v_hat, g_hat.as_ref());
        let we = weighted_energy(&state.v, &self.weights, cfg.alpha, cfg.nu)?;
        let forcing_work_w = match &g_hat {
            Some(g) => inner_product(&g.to_physical(), &state.v, Some(&self.weights))?,
            None => 0.0,
        };
        let v = &state.v;
        let ops = solver.ops();
        let d1v = ops.d1(v);
        let norm_l2 = quad_sq(v, None).sqrt();
        let mut rec = DiagnosticsRecord {
            t: state.t,
            energy,
            dissipation,
            forcing_work,
            energy_w: we.energy,
            dissipation_w: we.dissipation,
            forcing_work_w,
            norm_l2,
            norm_h1h: (norm_l2.powi(2) + quad_sq(&d1v, None)).sqrt(),
            norm_h2h_gamma: we.h2h,
            norm_h3h_gamma: we.h3h,
            cfl: state.cfl,
            ..DiagnosticsRecord::default()
        };
        if let Some((p, pv)) = &self.prev {
            let dt = rec.t - p.t;
            if dt > 0.0 {
                rec.budget_residual = (rec.energy - p.energy) / dt + 2.0 * rec.dissipation + 2.0 * rec.forcing_work;
                rec.weighted_budget_residual =
                    (rec.energy_w - p.energy_w) / dt + 2.0 * rec.dissipation_w + 2.0 * rec.forcing_work_w;
                let vt = v.sub(pv)?.scaled(1.0 / dt);
                rec.norm_vt = quad_sq(&vt, None).sqrt();
                rec.norm_grad_vt = (quad_sq(&ops.d1(&vt), None) + staggered_d2_sq(&vt, None)).sqrt();
            }
        }
        self.prev = Some((rec, v.clone()));
        Ok(rec)
    }
}

pub struct RunOutput {
    pub state: SolverState,
    /// One record per step, including the initial state.
    pub records: Vec<DiagnosticsRecord>,
}

/// Run `config` recording diagnostics after every step. `hook` sees each
/// state with its record.
pub fn run_with_diagnostics<F>(config: &SolverConfig, spec: &WeightSpec, mut hook: F) -> Result<RunOutput>
where
    F: FnMut(&Solver, &SolverState, &DiagnosticsRecord) -> Result<()>,
{
    let solver = Solver::new(config)?;
    let mut recorder = Recorder::new(WeightField::new(solver.grid(), spec));
    let mut records = Vec::with_capacity(config.n_steps() + 1);
    let state = solver.run_from(solver.initial_state()?, |s, st| {
        let rec = recorder.observe(s, st)?;
        hook(s, st, &rec)?;
        records.push(rec);
        Ok(())
    })?;
    Ok(RunOutput { state, records })
}

/// Summary of the unweighted budget over a cadence-1 trajectory.
#[derive(Clone, Debug, PartialEq)]
pub struct BudgetReport {
    /// `rⁿ = (Eⁿ⁺¹ − Eⁿ)/dt + 2Dⁿ⁺¹ + 2(g, vⁿ⁺¹)` per step.
    pub residuals: Vec<f64>,
    /// `max(dt·rⁿ, 0)`: energy created beyond the exact balance in one step.
    pub max_excess: f64,
    /// `max(Eⁿ⁺¹ − Eⁿ, 0)`.
    pub max_increase: f64,
    /// Right side of `dE/dt + D ≤ ‖g‖²/(νλ₁²)`.
    pub bound: f64,
    /// `max((Eⁿ⁺¹ − Eⁿ)/dt + Dⁿ⁺¹ − bound, 0)`.
    pub bound_excess: f64,
}

/// Budget of a cadence-1 trajectory. `bound` is `‖g‖²/(νλ₁²)`.
pub fn energy_budget(trajectory: &[DiagnosticsRecord], bound: f64) -> Result<BudgetReport> {
    budget_over(trajectory, bound, |r| (r.energy, r.dissipation, r.forcing_work))
}

fn budget_over(
    trajectory: &[DiagnosticsRecord],
    bound: f64,
    pick: impl Fn(&DiagnosticsRecord) -> (f64, f64, f64),
) -> Result<BudgetReport> {
    let mut rep = BudgetReport {
        residuals: Vec::with_capacity(trajectory.len().saturating_sub(1)),
        max_excess: 0.0,
        max_increase: 0.0,
        bound,
        bound_excess: 0.0,
    };
    for w in trajectory.windows(2) {
        let dt = w[1].t - w[0].t;
        if !(dt > 0.0) {
            return Err(Error::Diagnostic("trajectory times must increase".into()));
        }
        let (e0, _, _) = pick(&w[0]);
        let (e1, d1, g1) = pick(&w[1]);
        let r = (e1 - e0) / dt + 2.0 * d1 + 2.0 * g1;
        rep.max_excess = rep.max_excess.max(dt * r);
        rep.max_increase = rep.max_increase.max(e1 - e0);
        rep.bound_excess = rep.bound_excess.max((e1 - e0) / dt + d1 - bound);
        rep.residuals.push(r);
    }
    Ok(rep)
}

#[derive(Clone, Debug, PartialEq)]
pub struct WeightedBudgetReport {
    pub budget: BudgetReport,
    pub energy_w0: f64,
    pub sup_energy_w: f64,
    /// Trapezoid `∫ D_w dt`.
    pub integral_dw: f64,
    /// Trapezoid `∫ ‖∇v_t‖² dt`.
    pub integral_grad_vt_sq: f64,
}

impl WeightedBudgetReport {
    /// `sup E_w / E_w(0)`.
    pub fn growth(&self) -> f64 {
        self.sup_energy_w / self.energy_w0
    }
}

/// Weighted analogue of [`energy_budget`]; reduces to it when `γ = 0`.
pub fn weighted_energy_budget(trajectory: &[DiagnosticsRecord]) -> Result<WeightedBudgetReport> {
    let first = trajectory
        .first()
        .ok_or_else(|| Error::Diagnostic("empty trajectory".into()))?;
    let budget = budget_over(trajectory, f64::INFINITY, |r| (r.energy_w, r.dissipation_w, r.forcing_work_w))?;
    let sup_energy_w = trajectory.iter().fold(0.0_f64, |m, r| m.max(r.energy_w));
    let mut integral_dw = 0.0;
    let mut integral_grad_vt_sq = 0.0;
    for w in trajectory.windows(2) {
        let dt = w[1].t - w[0].t;
        integral_dw += 0.5 * dt * (w[0].dissipation_w + w[1].dissipation_w);
        integral_grad_vt_sq += dt * w[1].norm_grad_vt.powi(2);
    }
    Ok(WeightedBudgetReport {
        budget,
        energy_w0: first.energy_w,
        sup_energy_w,
        integral_dw,
        integral_grad_vt_sq,
    })
}

/// `‖v‖_∞ / (‖v‖^{1/2} ‖Δv‖^{1/2})`, reported for information.
pub fn agmon_ratio(v: &Field) -> Result<f64> {
    let ops = crate::operators::OperatorSet::new(v.grid(), false);
    let lap = ops.laplacian(v);
    let denom = (l2(v) * l2(&lap)).sqrt();
    if denom == 0.0 {
        return Err(Error::Diagnostic("Agmon ratio undefined for v = 0".into()));
    }
    Ok(v.max_abs() / denom)
}

fn l2(f: &Field) -> f64 {
    quad_sq(f, None).sqrt()
}

#[cfg(test)]
mod tests;

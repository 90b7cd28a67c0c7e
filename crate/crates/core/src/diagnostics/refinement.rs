//! Galerkin-style refinement study: run the same problem on a ladder of
//! grids and measure successive differences after transfer to the finer
//! grid.

use std::sync::Arc;

use ndarray::Array2;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{Field, Grid, ModalField};
use crate::solver::{run, SolverConfig};
use crate::weights::{weighted_sobolev_norms, WeightField, WeightSpec};

/// Transfer `f` onto `fine`: trigonometric interpolation in `x₁` (modes
/// below the coarse Nyquist) and linear interpolation in `x₂`.
pub fn prolong(f: &Field, fine: &Arc<Grid>) -> Result<Field> {
    let coarse = f.grid();
    if coarse.domain() != fine.domain() {
        return Err(Error::GridMismatch);
    }
    if fine.nx() < coarse.nx() {
        return Err(Error::Grid("prolongation target must not be coarser in x1".into()));
    }
    let src = f.to_modal();
    let scale = fine.nx() as f64 / coarse.nx() as f64;
    let keep = coarse.nyquist().min(fine.nyquist());
    let mut coeffs = Array2::<Complex64>::zeros((fine.n_modes(), fine.ny()));
    let cy = coarse.ny() - 1;
    for jf in 0..fine.ny() {
        // position in coarse cell units
        let s = (fine.x2(jf) - coarse.x2(0)) / coarse.dy();
        let j0 = (s.floor() as usize).min(cy - 1);
        let w = (s - j0 as f64).clamp(0.0, 1.0);
        for k in 0..keep {
            let c = src.coeffs()[[k, j0]] * (1.0 - w) + src.coeffs()[[k, j0 + 1]] * w;
            coeffs[[k, jf]] = c * scale;
        }
    }
    let out = ModalField::from_coeffs(fine, coeffs)?.to_physical();
    Ok(if f.is_clamped() { out.into_clamped() } else { out })
}

/// Transfer a fine field onto the nested `coarse` grid: trigonometric
/// truncation in `x₁` and injection in `x₂`.
pub fn restrict(f: &Field, coarse: &Arc<Grid>) -> Result<Field> {
    let fine = f.grid();
    if coarse.domain() != fine.domain() {
        return Err(Error::GridMismatch);
    }
    let (cy, fy) = (coarse.ny() - 1, fine.ny() - 1);
    if fine.nx() < coarse.nx() || fy % cy != 0 {
        return Err(Error::Grid("restriction needs a nested coarse grid".into()));
    }
    let stride = fy / cy;
    let src = f.to_modal();
    let scale = coarse.nx() as f64 / fine.nx() as f64;
    let keep = coarse.nyquist();
    let mut coeffs = Array2::<Complex64>::zeros((coarse.n_modes(), coarse.ny()));
    for j in 0..coarse.ny() {
        for k in 0..keep {
            coeffs[[k, j]] = src.coeffs()[[k, j * stride]] * scale;
        }
    }
    let out = ModalField::from_coeffs(coarse, coeffs)?.to_physical();
    Ok(if f.is_clamped() { out.into_clamped() } else { out })
}

/// `‖f‖_{H^{2,h}}` without weight.
fn h2h(f: &Field, weights: &WeightField) -> Result<f64> {
    let n = weighted_sobolev_norms(f, weights)?;
    Ok((n.psi_f.powi(2) + n.psi_d1.powi(2) + n.psi_d1_grad.powi(2)).sqrt())
}

#[derive(Clone, Debug, PartialEq)]
pub struct RefinementReport {
    pub resolutions: Vec<(usize, usize)>,
    /// `sup_t ‖P v_l − v_{l+1}‖_{H^{2,h}}` over samples with `t ≥ τ`.
    pub deltas_sup: Vec<f64>,
    /// `(∫_τ^T ‖P v_l − v_{l+1}‖²_{H^{2,h}})^{1/2}` by the rectangle rule.
    pub deltas_l2: Vec<f64>,
    /// `sup_t ‖P v_l − v_finest‖_{H^{2,h}}`.
    pub error_to_finest: Vec<f64>,
    /// `sup_t ‖v_l − R v_{l+1}‖_{H^{2,h}}` on the coarser grid. Free of
    /// the interpolation error of `P`, so it shows the scheme's own order.
    pub deltas_restricted: Vec<f64>,
}

impl RefinementReport {
    /// Successive differences shrink along the ladder.
    pub fn is_cauchy(&self) -> bool {
        self.deltas_sup.windows(2).all(|w| w[1] < w[0]) && self.deltas_l2.windows(2).all(|w| w[1] < w[0])
    }

    /// `log₂(Δ_l / Δ_{l+1})`, meaningful when the ladder doubles.
    pub fn observed_orders(&self) -> Vec<f64> {
        log2_ratios(&self.deltas_sup)
    }

    /// Same for [`RefinementReport::deltas_restricted`].
    pub fn restricted_orders(&self) -> Vec<f64> {
        log2_ratios(&self.deltas_restricted)
    }
}

fn log2_ratios(v: &[f64]) -> Vec<f64> {
    v.windows(2).map(|w| (w[0] / w[1]).log2()).collect()
}

/// Run `config` at every `(nx, ny)` in `resolutions`, sampling every
/// `record_every` steps from `tau` on, and compare levels on the finer grid.
pub fn galerkin_refinement_study(
    config: &SolverConfig,
    resolutions: &[(usize, usize)],
    record_every: usize,
    tau: f64,
) -> Result<RefinementReport> {
    if resolutions.len() < 2 {
        return Err(Error::Diagnostic("refinement study needs at least two resolutions".into()));
    }
    for w in resolutions.windows(2) {
        let ((nx0, ny0), (nx1, ny1)) = (w[0], w[1]);
        if nx1 < nx0 || nx1 % nx0 != 0 || ny1 < ny0 || (ny1 - 1) % (ny0 - 1) != 0 {
            return Err(Error::Diagnostic(format!(
                "resolutions {nx0}x{ny0} and {nx1}x{ny1} are not nested"
            )));
        }
    }
    if record_every == 0 {
        return Err(Error::Diagnostic("record_every must be positive".into()));
    }
    let mut levels: Vec<Vec<Field>> = Vec::with_capacity(resolutions.len());
    let mut times: Vec<f64> = Vec::new();
    for (l, &(nx, ny)) in resolutions.iter().enumerate() {
        let cfg = SolverConfig { nx, ny, ..config.clone() };
        let mut snaps = Vec::new();
        let mut ts = Vec::new();
        run(&cfg, |_, st| {
            if st.step % record_every == 0 && st.t >= tau - 1e-12 {
                snaps.push(st.v.clone());
                ts.push(st.t);
            }
            Ok(())
        })?;
        if l == 0 {
            times = ts;
        } else if ts.len() != times.len() {
            return Err(Error::Diagnostic("levels sampled at different times".into()));
        }
        levels.push(snaps);
    }
    let sample_dt = config.dt * record_every as f64;
    let finest = levels.last().expect("non-empty");
    let fine_grid = finest[0].grid().clone();
    let trivial = WeightSpec::trivial();
    let mut rep = RefinementReport {
        resolutions: resolutions.to_vec(),
        deltas_sup: Vec::new(),
        deltas_l2: Vec::new(),
        error_to_finest: Vec::new(),
        deltas_restricted: Vec::new(),
    };
    for l in 0..levels.len() - 1 {
        let target = levels[l + 1][0].grid().clone();
        let w_next = WeightField::new(&target, &trivial);
        let w_fine = WeightField::new(&fine_grid, &trivial);
        let here = levels[l][0].grid().clone();
        let w_here = WeightField::new(&here, &trivial);
        let (mut sup, mut sq, mut err, mut res) = (0.0_f64, 0.0, 0.0_f64, 0.0_f64);
        for (n, v) in levels[l].iter().enumerate() {
            res = res.max(h2h(&v.sub(&restrict(&levels[l + 1][n], &here)?)?, &w_here)?);
            let d = h2h(&prolong(v, &target)?.sub(&levels[l + 1][n])?, &w_next)?;
            sup = sup.max(d);
            sq += sample_dt * d * d;
            err = err.max(h2h(&prolong(v, &fine_grid)?.sub(&finest[n])?, &w_fine)?);
        }
        rep.deltas_sup.push(sup);
        rep.deltas_l2.push(sq.sqrt());
        rep.error_to_finest.push(err);
        rep.deltas_restricted.push(res);
    }
    Ok(rep)
}

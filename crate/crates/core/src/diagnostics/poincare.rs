//! First Dirichlet eigenvalue of the discrete strip and the weighted
//! Poincaré-type inequalities `‖ψv‖ ≤ 2λ₁⁻¹‖ψ∇v‖`, `‖ψ∇v‖ ≤ 2λ₁^{-1/2}‖ψΔv‖`.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::banded::SymPenta;
use crate::error::{Error, Result};
use crate::grid::{Field, Grid};
use crate::operators::OperatorSet;
use crate::weights::{quad_sq, weighted_sobolev_norms, WeightField, WeightSpec};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Lambda1Estimate {
    pub value: f64,
    /// `(π/(2M))²`.
    pub continuum: f64,
}

impl Lambda1Estimate {
    pub fn relative_error(&self) -> f64 {
        (self.value - self.continuum).abs() / self.continuum
    }
}

/// Smallest eigenvalue of `−D₂²` with Dirichlet walls, by inverse iteration.
pub fn lambda1(grid: &Grid) -> Result<Lambda1Estimate> {
    let n = grid.ny() - 2;
    let h2 = 1.0 / (grid.dy() * grid.dy());
    let mut a = SymPenta::zeros(n);
    a.diag.fill(2.0 * h2);
    a.off1.fill(-h2);
    let f = a.factor().ok_or(Error::Singular { mode: 0 })?;
    let mut x = vec![1.0; n];
    let mut value = 0.0;
    let mut y = vec![0.0; n];
    for _ in 0..200 {
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        x.iter_mut().for_each(|v| *v /= norm);
        let prev = x.clone();
        f.solve_in_place(&mut x);
        a.matvec(&x, &mut y);
        let rq = x.iter().zip(&y).map(|(p, q)| p * q).sum::<f64>() / x.iter().map(|v| v * v).sum::<f64>();
        let converged = (rq - value).abs() <= 1e-15 * rq;
        value = rq;
        if converged && prev.iter().zip(&x).all(|(a, b)| a.is_finite() && b.is_finite()) {
            break;
        }
    }
    let m = grid.domain().m();
    Ok(Lambda1Estimate {
        value,
        continuum: (std::f64::consts::PI / (2.0 * m)).powi(2),
    })
}

/// Random clamped field: a few Fourier modes in `x₁` times random
/// polynomials carrying the factor `(1 − (x₂/M)²)²`.
pub fn random_clamped_field(grid: &Arc<Grid>, rng: &mut ChaCha8Rng) -> Field {
    let m = grid.domain().m();
    let kmax = grid.dealias_cutoff().clamp(1, 4);
    let lx = grid.domain().lx();
    let modes: Vec<(usize, f64, f64, [f64; 3])> = (0..=kmax)
        .map(|k| {
            (
                k,
                rng.random_range(-1.0..1.0),
                rng.random_range(0.0..std::f64::consts::TAU),
                [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)],
            )
        })
        .collect();
    Field::from_fn(grid, |x1, x2| {
        let s = x2 / m;
        let bump = (1.0 - s * s).powi(2);
        modes
            .iter()
            .map(|(k, a, ph, c)| {
                a * (std::f64::consts::TAU * *k as f64 * x1 / lx + ph).cos() * (c[0] + c[1] * s + c[2] * s * s)
            })
            .sum::<f64>()
            * bump
    })
    .into_clamped()
}

#[derive(Clone, Debug, PartialEq)]
pub struct PoincareReport {
    pub lambda1: Lambda1Estimate,
    pub samples: usize,
    pub rejected: usize,
    /// `max ‖ψv‖/‖ψ∇v‖` against its bound `2/λ₁`.
    pub max_ratio_l2: f64,
    pub bound_l2: f64,
    /// `max ‖ψ∇v‖/‖ψΔv‖` against its bound `2/λ₁^{1/2}`.
    pub max_ratio_grad: f64,
    pub bound_grad: f64,
    /// `max ‖ψv‖_{L⁴} / ‖∇(ψv)‖`, for information.
    pub l4_ratio: f64,
}

impl PoincareReport {
    pub fn holds(&self) -> bool {
        self.max_ratio_l2 <= self.bound_l2 && self.max_ratio_grad <= self.bound_grad
    }
}

/// Audit both inequalities over `sample_count` random clamped fields.
pub fn poincare_check(grid: &Arc<Grid>, spec: &WeightSpec, sample_count: usize, seed: u64) -> Result<PoincareReport> {
    let lam = lambda1(grid)?;
    let weights = WeightField::new(grid, spec);
    let ops = OperatorSet::new(grid, false);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rep = PoincareReport {
        lambda1: lam,
        samples: 0,
        rejected: 0,
        max_ratio_l2: 0.0,
        bound_l2: 2.0 / lam.value,
        max_ratio_grad: 0.0,
        bound_grad: 2.0 / lam.value.sqrt(),
        l4_ratio: 0.0,
    };
    while rep.samples < sample_count {
        let v = random_clamped_field(grid, &mut rng);
        match poincare_ratios(&v, &weights, &ops)? {
            Some((r1, r2, r4)) => {
                rep.max_ratio_l2 = rep.max_ratio_l2.max(r1);
                rep.max_ratio_grad = rep.max_ratio_grad.max(r2);
                rep.l4_ratio = rep.l4_ratio.max(r4);
                rep.samples += 1;
            }
            None => rep.rejected += 1,
        }
        if rep.rejected > 10 * sample_count + 10 {
            return Err(Error::Diagnostic("too many degenerate samples".into()));
        }
    }
    Ok(rep)
}

/// `(‖ψv‖/‖ψ∇v‖, ‖ψ∇v‖/‖ψΔv‖, ‖ψv‖_{L⁴}/‖∇(ψv)‖)`, or `None` for `v = 0`.
pub fn poincare_ratios(v: &Field, weights: &WeightField, ops: &OperatorSet) -> Result<Option<(f64, f64, f64)>> {
    let n = weighted_sobolev_norms(v, weights)?;
    if n.psi_grad == 0.0 || n.psi_lap == 0.0 {
        return Ok(None);
    }
    let mut pv = v.clone();
    pv.values_mut().zip_mut_with(weights.psi(), |a, b| *a *= b);
    let p4 = pv.values().mapv(|x| x.powi(4));
    let l4 = quad_sq(&Field::from_values(v.grid(), p4.mapv(f64::sqrt))?, None).powf(0.25);
    let grad_pv = (quad_sq(&ops.d1(&pv), None) + crate::weights::staggered_d2_sq(&pv, None)).sqrt();
    Ok(Some((n.psi_f / n.psi_grad, n.psi_grad / n.psi_lap, l4 / grad_pv)))
}

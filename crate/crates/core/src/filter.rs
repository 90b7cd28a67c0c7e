//! Horizontal Helmholtz operator `A_h = I − α²∂₁²` and its inverse.
//!
//! Both act diagonally on the `x₁` Fourier modes, as the multipliers
//! `1 + α²κ²` and `1/(1 + α²κ²)`. No condition in `x₂` is needed.

use ndarray::Axis;

use crate::error::{Error, Result};
use crate::grid::{Field, ModalField};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FilterSpec {
    alpha: f64,
}

impl FilterSpec {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha >= 0.0) {
            return Err(Error::Config(format!("alpha must be finite and >= 0, got {alpha}")));
        }
        Ok(Self { alpha })
    }

    pub fn identity() -> Self {
        Self { alpha: 0.0 }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// `1 + α²κ²`.
    pub fn multiplier(&self, kappa: f64) -> f64 {
        1.0 + self.alpha * self.alpha * kappa * kappa
    }

    fn scale_modes(&self, m: &ModalField, invert: bool) -> ModalField {
        let mut out = m.clone();
        let grid = m.grid().clone();
        for (k, mut row) in out.coeffs_mut().axis_iter_mut(Axis(0)).enumerate() {
            let mult = self.multiplier(grid.wavenumber(k));
            let s = if invert { 1.0 / mult } else { mult };
            row.mapv_inplace(|c| c * s);
        }
        out
    }

    pub fn apply_modal(&self, m: &ModalField) -> ModalField {
        self.scale_modes(m, false)
    }

    pub fn invert_modal(&self, m: &ModalField) -> ModalField {
        self.scale_modes(m, true)
    }
}

/// `A_h f`.
pub fn apply_ah(f: &Field, spec: &FilterSpec) -> Field {
    let clamped = f.is_clamped();
    spec.apply_modal(&f.to_modal()).to_physical().with_clamped_flag(clamped)
}

/// `A_h⁻¹ f`, the horizontally filtered field.
pub fn invert_ah(f: &Field, spec: &FilterSpec) -> Field {
    let clamped = f.is_clamped();
    spec.invert_modal(&f.to_modal()).to_physical().with_clamped_flag(clamped)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{inner_product, make_grid, Grid, StripDomain};
    use crate::operators::OperatorSet;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;
    use std::sync::Arc;

    fn grid() -> Arc<Grid> {
        make_grid(StripDomain::new(2.0 * PI, 1.0).unwrap(), 32, 17).unwrap()
    }

    fn random_field(g: &Arc<Grid>, rng: &mut ChaCha8Rng) -> Field {
        Field::from_fn(g, |_, _| rng.random_range(-1.0..1.0))
    }

    #[test]
    fn eigenfunction_scaling() {
        let g = grid();
        let spec = FilterSpec::new(1.0).unwrap();
        let f = Field::from_fn(&g, |x, y| x.cos() * (1.0 + y * y));
        let af = apply_ah(&f, &spec);
        assert!(af.lin_comb(1.0, &f, -2.0).unwrap().max_abs() < 1e-12);
        let inv = invert_ah(&Field::from_fn(&g, |x, _| x.cos()), &spec);
        assert!(inv.lin_comb(1.0, &Field::from_fn(&g, |x, _| x.cos()), -0.5).unwrap().max_abs() < 1e-13);
    }

    #[test]
    fn alpha_zero_and_k0_untouched() {
        let g = grid();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let f = random_field(&g, &mut rng);
        let id = FilterSpec::identity();
        assert!(apply_ah(&f, &id).sub(&f).unwrap().max_abs() < 1e-13);
        let prof = Field::from_fn(&g, |_, y| y.sin() + 2.0);
        for a in [0.1, 1.0, 10.0] {
            let s = FilterSpec::new(a).unwrap();
            assert!(invert_ah(&prof, &s).sub(&prof).unwrap().max_abs() < 1e-13);
        }
        assert!(FilterSpec::new(-1.0).is_err());
        assert!(FilterSpec::new(f64::NAN).is_err());
    }

    #[test]
    fn round_trip_self_adjoint_contractive() {
        let g = grid();
        let ops = OperatorSet::new(&g, false);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for alpha in [0.0, 0.05, 0.5, 3.0] {
            let spec = FilterSpec::new(alpha).unwrap();
            for _ in 0..100 {
                let f = random_field(&g, &mut rng);
                let h = random_field(&g, &mut rng);
                let back = invert_ah(&apply_ah(&f, &spec), &spec);
                assert!(back.sub(&f).unwrap().max_abs() <= 1e-12 * f.max_abs());

                let lhs = inner_product(&invert_ah(&f, &spec), &h, None).unwrap();
                let rhs = inner_product(&f, &invert_ah(&h, &spec), None).unwrap();
                let scale = inner_product(&f, &f, None).unwrap().sqrt() * inner_product(&h, &h, None).unwrap().sqrt();
                assert!((lhs - rhs).abs() <= 1e-12 * scale);

                let nf = inner_product(&f, &f, None).unwrap();
                let fi = invert_ah(&f, &spec);
                assert!(inner_product(&fi, &fi, None).unwrap() <= nf * (1.0 + 1e-14));
            }
            // commutes with both derivatives
            let f = random_field(&g, &mut rng);
            let a = ops.d1(&invert_ah(&f, &spec));
            let b = invert_ah(&ops.d1(&f), &spec);
            assert!(a.sub(&b).unwrap().max_abs() < 1e-12 * (1.0 + a.max_abs()));
            let a = ops.d2(&invert_ah(&f, &spec));
            let b = invert_ah(&ops.d2(&f), &spec);
            assert!(a.sub(&b).unwrap().max_abs() < 1e-11 * (1.0 + a.max_abs()));
        }
    }

    #[test]
    fn modal_magnitudes_never_grow() {
        let g = grid();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let f = random_field(&g, &mut rng);
        let spec = FilterSpec::new(0.7).unwrap();
        let m = f.to_modal();
        let mi = spec.invert_modal(&m);
        for (a, b) in m.coeffs().iter().zip(mi.coeffs()) {
            assert!(b.norm() <= a.norm());
        }
    }
}

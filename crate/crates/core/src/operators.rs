//! Discrete differential operators on the strip and the advection form `B`.
//!
//! `∂₁` is spectral (exact on resolved modes, Nyquist mode dropped). `∂₂`
//! and `∂₂²` are centered second-order differences with second-order
//! one-sided closures at the walls. For fields flagged clamped, the wall
//! value of `∂₂²f` comes from the ghost reflection `f₋₁ = f₁` implied by
//! `∂₂f = 0`, which is the same closure the solver's biharmonic rows use.

use std::ops::{Add, Mul, Sub};
use std::sync::Arc;

use ndarray::{ArrayView1, ArrayViewMut1, Axis, Zip};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{inner_product, Field, Grid, ModalField};

/// How the wall values of `∂₂²` are closed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WallClosure {
    /// Second-order one-sided differences, no assumption on the data.
    General,
    /// Ghost reflection for data with `f = ∂₂f = 0` on the walls.
    Clamped,
}

impl WallClosure {
    fn of(clamped: bool) -> Self {
        if clamped {
            WallClosure::Clamped
        } else {
            WallClosure::General
        }
    }
}

pub(crate) fn d2_column<T>(src: ArrayView1<T>, mut dst: ArrayViewMut1<T>, dy: f64)
where
    T: Copy + Add<Output = T> + Sub<Output = T> + Mul<f64, Output = T>,
{
    let n = src.len();
    let h = 0.5 / dy;
    dst[0] = (src[1] * 4.0 - src[0] * 3.0 - src[2]) * h;
    for j in 1..n - 1 {
        dst[j] = (src[j + 1] - src[j - 1]) * h;
    }
    dst[n - 1] = (src[n - 1] * 3.0 - src[n - 2] * 4.0 + src[n - 3]) * h;
}

pub(crate) fn d22_column<T>(src: ArrayView1<T>, mut dst: ArrayViewMut1<T>, dy: f64, closure: WallClosure)
where
    T: Copy + Add<Output = T> + Sub<Output = T> + Mul<f64, Output = T>,
{
    let n = src.len();
    let h2 = 1.0 / (dy * dy);
    for j in 1..n - 1 {
        dst[j] = (src[j - 1] + src[j + 1] - src[j] * 2.0) * h2;
    }
    match closure {
        WallClosure::General => {
            dst[0] = (src[0] * 2.0 - src[1] * 5.0 + src[2] * 4.0 - src[3]) * h2;
            dst[n - 1] = (src[n - 1] * 2.0 - src[n - 2] * 5.0 + src[n - 3] * 4.0 - src[n - 4]) * h2;
        }
        WallClosure::Clamped => {
            dst[0] = (src[1] - src[0]) * (2.0 * h2);
            dst[n - 1] = (src[n - 2] - src[n - 1]) * (2.0 * h2);
        }
    }
}

/// Output of [`OperatorSet::conservative_b_parts`].
#[derive(Clone, Debug)]
pub struct ConservativeParts {
    pub b: ModalField,
    pub d1_v: Field,
    pub d2_v: Field,
}

/// Operator bundle bound to one grid.
#[derive(Clone, Debug)]
pub struct OperatorSet {
    grid: Arc<Grid>,
    dealias: bool,
}

impl OperatorSet {
    pub fn new(grid: &Arc<Grid>, dealias: bool) -> Self {
        Self {
            grid: Arc::clone(grid),
            dealias,
        }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn dealias(&self) -> bool {
        self.dealias
    }

    /// Highest mode retained in products.
    pub fn band_limit(&self) -> usize {
        if self.dealias {
            self.grid.dealias_cutoff()
        } else {
            self.grid.nyquist()
        }
    }

    fn check(&self, f: &Field) -> Result<()> {
        if **f.grid() == *self.grid {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    pub fn d1_modal(&self, m: &ModalField) -> ModalField {
        let mut out = m.clone();
        let nyq = self.grid.nyquist();
        for (k, mut row) in out.coeffs_mut().axis_iter_mut(Axis(0)).enumerate() {
            if k == nyq {
                row.fill(Complex64::new(0.0, 0.0));
            } else {
                let ik = Complex64::new(0.0, self.grid.wavenumber(k));
                row.mapv_inplace(|c| c * ik);
            }
        }
        out
    }

    /// `∂₁²` as the multiplier `-κ²` (Nyquist included).
    pub fn d11_modal(&self, m: &ModalField) -> ModalField {
        let mut out = m.clone();
        for (k, mut row) in out.coeffs_mut().axis_iter_mut(Axis(0)).enumerate() {
            let kk = self.grid.wavenumber(k).powi(2);
            row.mapv_inplace(|c| c * (-kk));
        }
        out
    }

    pub fn d2_modal(&self, m: &ModalField) -> ModalField {
        let mut out = m.clone();
        let dy = self.grid.dy();
        Zip::from(out.coeffs_mut().rows_mut())
            .and(m.coeffs().rows())
            .for_each(|dst, src| d2_column(src, dst, dy));
        out.with_clamped_flag(false)
    }

    /// `Δ = ∂₁² + ∂₂²` with the wall closure selected by the input's
    /// clamped flag. The output is never flagged clamped.
    pub fn laplacian_modal(&self, m: &ModalField) -> ModalField {
        self.laplacian_modal_with(m, WallClosure::of(m.is_clamped()))
    }

    pub fn laplacian_modal_with(&self, m: &ModalField, closure: WallClosure) -> ModalField {
        let mut out = m.clone();
        let dy = self.grid.dy();
        for (k, (dst, src)) in out
            .coeffs_mut()
            .rows_mut()
            .into_iter()
            .zip(m.coeffs().rows())
            .enumerate()
        {
            let kk = self.grid.wavenumber(k).powi(2);
            let mut dst = dst;
            d22_column(src, dst.view_mut(), dy, closure);
            Zip::from(&mut dst).and(&src).for_each(|d, s| *d -= *s * kk);
        }
        out.with_clamped_flag(false)
    }

    pub fn biharmonic_modal(&self, m: &ModalField) -> ModalField {
        let lap = self.laplacian_modal(m);
        self.laplacian_modal_with(&lap, WallClosure::General)
    }

    /// Spectral `∂₁`.
    pub fn d1(&self, f: &Field) -> Field {
        let clamped = f.is_clamped();
        self.d1_modal(&f.to_modal()).to_physical().with_clamped_flag(clamped)
    }

    /// Second-order `∂₂`.
    pub fn d2(&self, f: &Field) -> Field {
        let mut out = f.clone().with_clamped_flag(false);
        let dy = self.grid.dy();
        Zip::from(out.values_mut().rows_mut())
            .and(f.values().rows())
            .for_each(|dst, src| d2_column(src, dst, dy));
        out
    }

    pub fn laplacian(&self, f: &Field) -> Field {
        self.laplacian_modal(&f.to_modal()).to_physical()
    }

    /// `Δ∘Δ`; for clamped input the inner wall values use the ghost closure.
    pub fn biharmonic(&self, f: &Field) -> Field {
        self.biharmonic_modal(&f.to_modal()).to_physical()
    }

    /// Zero the modes above the product band limit.
    pub fn project_modal(&self, m: &ModalField) -> ModalField {
        let mut out = m.clone();
        out.truncate_above(self.band_limit());
        out
    }

    fn to_physical_projected(&self, m: &ModalField) -> Field {
        if self.dealias {
            self.project_modal(m).to_physical()
        } else {
            m.to_physical()
        }
    }

    fn to_modal_projected(&self, f: &Field) -> ModalField {
        let m = f.to_modal();
        if self.dealias {
            self.project_modal(&m)
        } else {
            m
        }
    }

    /// Product with 2/3-rule truncation of both inputs and of the result
    /// (plain pointwise product when dealiasing is off).
    pub fn dealiased_product(&self, f: &Field, h: &Field) -> Result<Field> {
        self.check(f)?;
        self.check(h)?;
        if !self.dealias {
            return f.pointwise(h);
        }
        let pf = self.to_physical_projected(&f.to_modal());
        let ph = self.to_physical_projected(&h.to_modal());
        let prod = pf.pointwise(&ph)?;
        Ok(self.to_modal_projected(&prod).to_physical())
    }

    /// Pointwise form `B(u,v) = ∂₂v ∂₁Δu − ∂₁v ∂₂Δu`, modal in and out.
    pub fn bilinear_b_modal(&self, u: &ModalField, v: &ModalField) -> Result<ModalField> {
        let lap_u = self.laplacian_modal(u);
        let d1_lap_u = self.to_physical_projected(&self.d1_modal(&lap_u));
        let d2_lap_u = self.to_physical_projected(&self.d2_modal(&lap_u));
        let d1_v = self.to_physical_projected(&self.d1_modal(v));
        let d2_v = self.to_physical_projected(&self.d2_modal(v));
        let prod = d2_v
            .pointwise(&d1_lap_u)?
            .lin_comb(1.0, &d1_v.pointwise(&d2_lap_u)?, -1.0)?;
        Ok(self.to_modal_projected(&prod).with_clamped_flag(false))
    }

    /// Conservative form `B(u,v) = ∂₁(∂₂v Δu) − ∂₂(∂₁v Δu)`, modal in and out.
    ///
    /// With discrete `∂₁` skew-adjoint and `∂₁v = 0` on the walls, the
    /// quadrature pairing `(B(u,v), v)` vanishes to rounding.
    pub fn conservative_b_modal(&self, u: &ModalField, v: &ModalField) -> Result<ModalField> {
        self.conservative_b_parts(u, v).map(|p| p.b)
    }

    /// Conservative `B(u,v)` together with the physical `∂₁v`, `∂₂v` it
    /// was built from.
    pub fn conservative_b_parts(&self, u: &ModalField, v: &ModalField) -> Result<ConservativeParts> {
        let lap_u = self.to_physical_projected(&self.laplacian_modal(u));
        let d1_v = self.to_physical_projected(&self.d1_modal(v));
        let d2_v = self.to_physical_projected(&self.d2_modal(v));
        let a = self.to_modal_projected(&d2_v.pointwise(&lap_u)?);
        let b = self.to_modal_projected(&d1_v.pointwise(&lap_u)?);
        let mut out = self.d1_modal(&a);
        let d2_b = self.d2_modal(&b);
        Zip::from(out.coeffs_mut())
            .and(d2_b.coeffs())
            .for_each(|o, d| *o -= *d);
        Ok(ConservativeParts {
            b: out.with_clamped_flag(false),
            d1_v,
            d2_v,
        })
    }

    pub fn bilinear_b(&self, u: &Field, v: &Field) -> Result<Field> {
        self.check(u)?;
        self.check(v)?;
        Ok(self.bilinear_b_modal(&u.to_modal(), &v.to_modal())?.to_physical())
    }

    pub fn bilinear_b_conservative(&self, u: &Field, v: &Field) -> Result<Field> {
        self.check(u)?;
        self.check(v)?;
        Ok(self.conservative_b_modal(&u.to_modal(), &v.to_modal())?.to_physical())
    }

    /// `(r1, r2) = (|(B(u,v),w) + (B(u,w),v)|, |(B(u,v),v)|)` with the
    /// conservative form and trapezoid quadrature. `v` and `w` must be clamped.
    pub fn trilinear_identity_residuals(&self, u: &Field, v: &Field, w: &Field) -> Result<(f64, f64)> {
        if !(v.is_clamped() && w.is_clamped()) {
            return Err(Error::Diagnostic(
                "trilinear identities require clamped v and w".into(),
            ));
        }
        let buv = self.bilinear_b_conservative(u, v)?;
        let buw = self.bilinear_b_conservative(u, w)?;
        let r1 = (inner_product(&buv, w, None)? + inner_product(&buw, v, None)?).abs();
        let r2 = inner_product(&buv, v, None)?.abs();
        Ok((r1, r2))
    }

    /// Same residuals for the pointwise form, kept for cross-validation.
    pub fn trilinear_identity_residuals_pointwise(
        &self,
        u: &Field,
        v: &Field,
        w: &Field,
    ) -> Result<(f64, f64)> {
        if !(v.is_clamped() && w.is_clamped()) {
            return Err(Error::Diagnostic(
                "trilinear identities require clamped v and w".into(),
            ));
        }
        let buv = self.bilinear_b(u, v)?;
        let buw = self.bilinear_b(u, w)?;
        let r1 = (inner_product(&buv, w, None)? + inner_product(&buw, v, None)?).abs();
        let r2 = inner_product(&buv, v, None)?.abs();
        Ok((r1, r2))
    }

    /// Hölder scale `‖Δu‖·‖∇v‖_∞·‖∇w‖` bounding `|(B(u,v),w)|`; used to
    /// normalize the trilinear residuals.
    pub fn trilinear_scale(&self, u: &Field, v: &Field, w: &Field) -> Result<f64> {
        let lap_u = self.laplacian(u);
        let grad_inf = self.d1(v).max_abs().max(self.d2(v).max_abs());
        let gw1 = self.d1(w);
        let gw2 = self.d2(w);
        let grad_w = (inner_product(&gw1, &gw1, None)? + inner_product(&gw2, &gw2, None)?).sqrt();
        Ok(inner_product(&lap_u, &lap_u, None)?.sqrt() * grad_inf * grad_w)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{make_grid, StripDomain};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn grid(nx: usize, ny: usize) -> Arc<Grid> {
        make_grid(StripDomain::new(2.0 * PI, 1.0).unwrap(), nx, ny).unwrap()
    }

    fn max_interior_err(a: &Field, b: &Field) -> f64 {
        let ny = a.grid().ny();
        a.sub(b)
            .unwrap()
            .values()
            .indexed_iter()
            .filter(|((_, j), _)| *j > 0 && *j < ny - 1)
            .fold(0.0_f64, |m, (_, v)| m.max(v.abs()))
    }

    #[test]
    fn d1_exact_on_resolved_modes() {
        let g = grid(32, 9);
        let ops = OperatorSet::new(&g, true);
        let f = Field::from_fn(&g, |x, _| x.sin());
        let d = ops.d1(&f);
        let exact = Field::from_fn(&g, |x, _| x.cos());
        assert!(d.sub(&exact).unwrap().max_abs() < 1e-12);
        let c = Field::from_fn(&g, |_, _| 3.0);
        assert!(ops.d1(&c).max_abs() < 1e-13);
    }

    #[test]
    fn d1_matches_naive_dft_derivative() {
        let g = grid(16, 9);
        let ops = OperatorSet::new(&g, false);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        // band-limited: modes 0..=6
        let amps: Vec<(f64, f64)> = (0..7).map(|_| (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
        let f = Field::from_fn(&g, |x, y| {
            amps.iter().enumerate().map(|(k, (a, b))| a * (k as f64 * x).cos() + b * (k as f64 * x).sin()).sum::<f64>() * (1.0 + y)
        });
        let d = ops.d1(&f);
        let nx = g.nx();
        for j in 0..g.ny() {
            for i in 0..nx {
                // naive DFT oracle: derivative of the trigonometric interpolant
                let mut acc = 0.0;
                for k in 1..nx / 2 {
                    let (mut re, mut im) = (0.0, 0.0);
                    for l in 0..nx {
                        let ang = 2.0 * PI * (k * l) as f64 / nx as f64;
                        re += f.values()[[l, j]] * ang.cos();
                        im -= f.values()[[l, j]] * ang.sin();
                    }
                    let ang = 2.0 * PI * (k * i) as f64 / nx as f64;
                    let kk = k as f64;
                    // 2 Re(i k c e^{i ang}) / nx
                    acc += 2.0 * kk * (-im * ang.cos() - re * ang.sin()) / nx as f64;
                }
                assert!((acc - d.values()[[i, j]]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn d2_exact_on_quadratics() {
        let g = grid(8, 17);
        let ops = OperatorSet::new(&g, false);
        let f = Field::from_fn(&g, |_, y| y * y);
        let d = ops.d2(&f);
        for ((_, j), v) in d.values().indexed_iter() {
            assert!((v - 2.0 * g.x2(j)).abs() < 1e-12);
        }
        let c = Field::from_fn(&g, |_, _| 4.0);
        assert!(ops.d2(&c).max_abs() < 1e-12);
    }

    #[test]
    fn d2_second_order() {
        let mut errs = Vec::new();
        for ny in [33, 65, 129] {
            let g = grid(8, ny);
            let ops = OperatorSet::new(&g, false);
            let f = Field::from_fn(&g, |_, y| (PI * y / 2.0).sin());
            let exact = Field::from_fn(&g, |_, y| PI / 2.0 * (PI * y / 2.0).cos());
            errs.push(ops.d2(&f).sub(&exact).unwrap().max_abs());
        }
        for w in errs.windows(2) {
            let p = (w[0] / w[1]).log2();
            assert!((p - 2.0).abs() < 0.1, "order {p}");
        }
    }

    #[test]
    fn laplacian_and_biharmonic_eigen() {
        let mut errs = Vec::new();
        for ny in [33, 65, 129] {
            let g = grid(16, ny);
            let ops = OperatorSet::new(&g, false);
            let q = PI / 2.0;
            let f = Field::from_fn(&g, |x, y| x.sin() * (q * (y + 1.0)).sin());
            let lam = 1.0 + q * q;
            let lap = ops.laplacian(&f);
            let bih = ops.biharmonic(&f);
            let e1 = lap.lin_comb(1.0, &f, lam).unwrap().max_abs();
            // one-sided wall values of Δf carry a different O(dy²) constant,
            // which the outer second difference turns into O(1) one row in
            let diff = bih.lin_comb(1.0, &f, -lam * lam).unwrap();
            let e2 = diff
                .values()
                .indexed_iter()
                .filter(|((_, j), _)| *j >= 2 && *j + 2 < ny)
                .fold(0.0_f64, |m, (_, v)| m.max(v.abs()));
            errs.push((e1, e2));
        }
        for w in errs.windows(2) {
            assert!((w[0].0 / w[1].0).log2() > 1.8);
            assert!((w[0].1 / w[1].1).log2() > 1.8);
        }
        assert!(errs[2].0 < 1e-3 && errs[2].1 < 1e-2);
        let g = grid(8, 9);
        let ops = OperatorSet::new(&g, false);
        let z = Field::zeros(&g);
        assert_eq!(ops.laplacian(&z).max_abs(), 0.0);
        assert_eq!(ops.biharmonic(&z).max_abs(), 0.0);
    }

    #[test]
    fn b_vanishes_for_x1_independent_field() {
        let g = grid(16, 17);
        let ops = OperatorSet::new(&g, true);
        let v = Field::from_fn(&g, |_, y| (1.0 - y * y).powi(2)).into_clamped();
        assert!(ops.bilinear_b(&v, &v).unwrap().max_abs() < 1e-12);
        assert!(ops.bilinear_b_conservative(&v, &v).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn pointwise_and_conservative_forms_agree() {
        let mut errs = Vec::new();
        for ny in [33, 65, 129] {
            let g = grid(32, ny);
            let ops = OperatorSet::new(&g, true);
            let v = Field::from_fn(&g, |x, y| (x.sin() + 0.3 * (2.0 * x).cos()) * (1.0 - y * y).powi(2) * (1.0 + 0.5 * y))
                .into_clamped();
            let a = ops.bilinear_b(&v, &v).unwrap();
            let b = ops.bilinear_b_conservative(&v, &v).unwrap();
            errs.push(max_interior_err(&a, &b) / a.max_abs());
        }
        assert!(errs[2] < 1e-2, "{errs:?}");
        assert!(errs[0] > errs[1] && errs[1] > errs[2], "{errs:?}");
    }

    #[test]
    fn dealiased_product_matches_padded_oracle() {
        let g = grid(24, 9);
        let ops = OperatorSet::new(&g, true);
        let kmax = g.dealias_cutoff();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut coef = || -> Vec<(f64, f64)> { (0..=kmax).map(|_| (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect() };
        let (cf, ch) = (coef(), coef());
        let eval = |c: &[(f64, f64)], x: f64| c.iter().enumerate().map(|(k, (a, b))| a * (k as f64 * x).cos() + b * (k as f64 * x).sin()).sum::<f64>();
        let f = Field::from_fn(&g, |x, y| eval(&cf, x) * (1.0 + y));
        let h = Field::from_fn(&g, |x, y| eval(&ch, x) * (2.0 - y));
        let p = ops.dealiased_product(&f, &h).unwrap();
        // padded oracle: sample exact product on a 3x finer x₁ grid, project
        let fine = make_grid(*g.domain(), 3 * g.nx(), g.ny()).unwrap();
        let exact = Field::from_fn(&fine, |x, y| eval(&cf, x) * (1.0 + y) * eval(&ch, x) * (2.0 - y));
        let em = exact.to_modal();
        let pm = p.to_modal();
        for k in 0..g.n_modes() {
            for j in 0..g.ny() {
                let want = if k <= kmax { em.coeffs()[[k, j]] / 3.0 } else { Complex64::new(0.0, 0.0) };
                assert!((pm.coeffs()[[k, j]] - want).norm() < 1e-12 * g.nx() as f64);
            }
        }
    }

    #[test]
    fn trilinear_residuals_zero_for_zero_fields() {
        let g = grid(16, 17);
        let ops = OperatorSet::new(&g, true);
        let z = Field::zeros(&g).into_clamped();
        assert_eq!(ops.trilinear_identity_residuals(&z, &z, &z).unwrap(), (0.0, 0.0));
        let nc = Field::zeros(&g);
        assert!(ops.trilinear_identity_residuals(&z, &nc, &z).is_err());
    }

    #[test]
    fn trilinear_r1_symmetric_in_v_w() {
        let g = grid(32, 33);
        let ops = OperatorSet::new(&g, true);
        let u = Field::from_fn(&g, |x, y| x.sin() * (PI * y / 2.0).cos());
        let v = Field::from_fn(&g, |x, y| (2.0 * x).cos() * (1.0 - y * y).powi(2)).into_clamped();
        let w = Field::from_fn(&g, |x, y| (x + 0.3).sin() * (1.0 - y * y).powi(2) * (1.0 + y)).into_clamped();
        let (a, _) = ops.trilinear_identity_residuals(&u, &v, &w).unwrap();
        let (b, _) = ops.trilinear_identity_residuals(&u, &w, &v).unwrap();
        assert!((a - b).abs() <= 1e-15 * (1.0 + a.abs()) + 1e-16);
    }
}

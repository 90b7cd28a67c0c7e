//! Flat channel geometry, its tensor grid, physical and modal fields.
//!
//! The strip `x₂ ∈ [-M, M]` is truncated periodically in `x₁` with period
//! `Lx`. Fields are stored as `nx × ny` arrays (row index = `x₁` node,
//! column index = `x₂` node). The modal representation keeps the
//! non-negative Fourier wavenumbers of every `x₂` column; the transform
//! is unnormalized in the forward direction.

use std::fmt;
use std::sync::Arc;

use ndarray::{Array1, Array2, Axis};
use num_complex::Complex64;
use realfft::{ComplexToReal, RealFftPlanner, RealToComplex};

use crate::error::{Error, Result};
use crate::weights::WeightField;

/// Strip `{(x₁, x₂) : -M ≤ x₂ ≤ M}` truncated to a period `Lx` in `x₁`.
///
/// The walls are the constant graphs `b_lo = -M` and `b_hi = +M`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StripDomain {
    lx: f64,
    m: f64,
}

impl StripDomain {
    pub fn new(lx: f64, m: f64) -> Result<Self> {
        if !(lx.is_finite() && lx > 0.0) {
            return Err(Error::Grid(format!("Lx must be positive, got {lx}")));
        }
        if !(m.is_finite() && m > 0.0) {
            return Err(Error::Grid(format!("M must be positive, got {m}")));
        }
        Ok(Self { lx, m })
    }

    pub fn lx(&self) -> f64 {
        self.lx
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    /// Lower wall `b_lo(x₁) ≡ -M`.
    pub fn b_lo(&self) -> f64 {
        -self.m
    }

    /// Upper wall `b_hi(x₁) ≡ +M`.
    pub fn b_hi(&self) -> f64 {
        self.m
    }

    pub fn area(&self) -> f64 {
        2.0 * self.lx * self.m
    }
}

/// Discretization of a [`StripDomain`]: uniform periodic `x₁` nodes and
/// uniform `x₂` nodes including both walls.
pub struct Grid {
    domain: StripDomain,
    nx: usize,
    ny: usize,
    dx: f64,
    dy: f64,
    quad_weights: Vec<f64>,
    r2c: Arc<dyn RealToComplex<f64>>,
    c2r: Arc<dyn ComplexToReal<f64>>,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("domain", &self.domain)
            .field("nx", &self.nx)
            .field("ny", &self.ny)
            .field("dx", &self.dx)
            .field("dy", &self.dy)
            .finish()
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.domain == other.domain && self.nx == other.nx && self.ny == other.ny
    }
}

/// Build a grid. `nx` must be even and at least 8, `ny` at least 9.
pub fn make_grid(domain: StripDomain, nx: usize, ny: usize) -> Result<Arc<Grid>> {
    Grid::new(domain, nx, ny).map(Arc::new)
}

impl Grid {
    pub fn new(domain: StripDomain, nx: usize, ny: usize) -> Result<Self> {
        if !nx.is_multiple_of(2) {
            return Err(Error::Grid(format!("nx must be even, got {nx}")));
        }
        if nx < 8 {
            return Err(Error::Grid(format!("nx must be at least 8, got {nx}")));
        }
        if ny < 9 {
            return Err(Error::Grid(format!(
                "ny must be at least 9 (biharmonic stencil under-resolved), got {ny}"
            )));
        }
        let dx = domain.lx() / nx as f64;
        let dy = 2.0 * domain.m() / (ny - 1) as f64;
        let mut quad_weights = vec![dy; ny];
        quad_weights[0] = 0.5 * dy;
        quad_weights[ny - 1] = 0.5 * dy;

        let mut planner = RealFftPlanner::<f64>::new();
        let r2c = planner.plan_fft_forward(nx);
        let c2r = planner.plan_fft_inverse(nx);
        Ok(Self {
            domain,
            nx,
            ny,
            dx,
            dy,
            quad_weights,
            r2c,
            c2r,
        })
    }

    pub fn domain(&self) -> &StripDomain {
        &self.domain
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn dy(&self) -> f64 {
        self.dy
    }

    /// Trapezoidal weights in `x₂`; they sum to `2M`.
    pub fn quad_weights(&self) -> &[f64] {
        &self.quad_weights
    }

    pub fn x1(&self, i: usize) -> f64 {
        i as f64 * self.dx
    }

    pub fn x2(&self, j: usize) -> f64 {
        -self.domain.m() + j as f64 * self.dy
    }

    pub fn x1_nodes(&self) -> Array1<f64> {
        Array1::from_shape_fn(self.nx, |i| self.x1(i))
    }

    pub fn x2_nodes(&self) -> Array1<f64> {
        Array1::from_shape_fn(self.ny, |j| self.x2(j))
    }

    /// Number of stored Fourier modes, `nx/2 + 1`.
    pub fn n_modes(&self) -> usize {
        self.nx / 2 + 1
    }

    /// Index of the Nyquist mode.
    pub fn nyquist(&self) -> usize {
        self.nx / 2
    }

    /// Wavenumber `κ_k = 2πk/Lx`.
    pub fn wavenumber(&self, k: usize) -> f64 {
        2.0 * std::f64::consts::PI * k as f64 / self.domain.lx()
    }

    /// Largest mode kept by the 2/3 rule: `3·k_max < nx`.
    pub fn dealias_cutoff(&self) -> usize {
        (self.nx - 1) / 3
    }

    /// Multiplicity of a half-spectrum mode in Parseval sums.
    pub fn mode_multiplicity(&self, k: usize) -> f64 {
        if k == 0 || k == self.nyquist() {
            1.0
        } else {
            2.0
        }
    }
}

fn check_finite(values: &Array2<f64>) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::Grid("field contains non-finite entries".into()))
    }
}

/// Real scalar sampled on a [`Grid`].
#[derive(Clone, Debug)]
pub struct Field {
    grid: Arc<Grid>,
    values: Array2<f64>,
    clamped: bool,
}

impl Field {
    pub fn zeros(grid: &Arc<Grid>) -> Self {
        Self {
            grid: Arc::clone(grid),
            values: Array2::zeros((grid.nx(), grid.ny())),
            clamped: false,
        }
    }

    pub fn from_fn(grid: &Arc<Grid>, mut f: impl FnMut(f64, f64) -> f64) -> Self {
        let values = Array2::from_shape_fn((grid.nx(), grid.ny()), |(i, j)| f(grid.x1(i), grid.x2(j)));
        Self {
            grid: Arc::clone(grid),
            values,
            clamped: false,
        }
    }

    pub fn from_values(grid: &Arc<Grid>, values: Array2<f64>) -> Result<Self> {
        if values.dim() != (grid.nx(), grid.ny()) {
            return Err(Error::Grid(format!(
                "field shape {:?} does not match grid {}x{}",
                values.dim(),
                grid.nx(),
                grid.ny()
            )));
        }
        check_finite(&values)?;
        Ok(Self {
            grid: Arc::clone(grid),
            values,
            clamped: false,
        })
    }

    /// Zero the wall rows and flag the field as satisfying the clamped
    /// wall conditions.
    pub fn into_clamped(mut self) -> Self {
        let ny = self.grid.ny();
        self.values.column_mut(0).fill(0.0);
        self.values.column_mut(ny - 1).fill(0.0);
        self.clamped = true;
        self
    }

    pub fn with_clamped_flag(mut self, clamped: bool) -> Self {
        self.clamped = clamped;
        self
    }

    pub fn is_clamped(&self) -> bool {
        self.clamped
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut Array2<f64> {
        &mut self.values
    }

    pub fn into_values(self) -> Array2<f64> {
        self.values
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn same_grid(&self, other: &Field) -> bool {
        Arc::ptr_eq(&self.grid, &other.grid) || *self.grid == *other.grid
    }

    /// `a·self + b·other`; the result is clamped only if both inputs are.
    pub fn lin_comb(&self, a: f64, other: &Field, b: f64) -> Result<Field> {
        if !self.same_grid(other) {
            return Err(Error::GridMismatch);
        }
        let values = &self.values * a + &other.values * b;
        Ok(Field {
            grid: Arc::clone(&self.grid),
            values,
            clamped: self.clamped && other.clamped,
        })
    }

    pub fn sub(&self, other: &Field) -> Result<Field> {
        self.lin_comb(1.0, other, -1.0)
    }

    pub fn scaled(&self, a: f64) -> Field {
        Field {
            grid: Arc::clone(&self.grid),
            values: &self.values * a,
            clamped: self.clamped,
        }
    }

    /// Pointwise product (no dealiasing; see `OperatorSet::dealiased_product`).
    pub fn pointwise(&self, other: &Field) -> Result<Field> {
        if !self.same_grid(other) {
            return Err(Error::GridMismatch);
        }
        Ok(Field {
            grid: Arc::clone(&self.grid),
            values: &self.values * &other.values,
            clamped: self.clamped || other.clamped,
        })
    }

    /// Real DFT along `x₁` for every `x₂` node.
    pub fn to_modal(&self) -> ModalField {
        let grid = &self.grid;
        let nk = grid.n_modes();
        let mut coeffs = Array2::<Complex64>::zeros((nk, grid.ny()));
        let mut input = grid.r2c.make_input_vec();
        let mut output = grid.r2c.make_output_vec();
        let mut scratch = grid.r2c.make_scratch_vec();
        for j in 0..grid.ny() {
            for (dst, src) in input.iter_mut().zip(self.values.column(j)) {
                *dst = *src;
            }
            grid.r2c
                .process_with_scratch(&mut input, &mut output, &mut scratch)
                .expect("buffer sizes come from the plan");
            for (dst, src) in coeffs.column_mut(j).iter_mut().zip(&output) {
                *dst = *src;
            }
        }
        ModalField {
            grid: Arc::clone(grid),
            coeffs,
            clamped: self.clamped,
        }
    }
}

/// Fourier-in-`x₁` coefficients over the `x₂` nodes, shape `(nx/2+1) × ny`.
///
/// Only non-negative wavenumbers are stored; the imaginary parts of the
/// `k = 0` and Nyquist rows are ignored on the way back to physical space.
#[derive(Clone, Debug)]
pub struct ModalField {
    grid: Arc<Grid>,
    coeffs: Array2<Complex64>,
    clamped: bool,
}

impl ModalField {
    pub fn zeros(grid: &Arc<Grid>) -> Self {
        Self {
            grid: Arc::clone(grid),
            coeffs: Array2::zeros((grid.n_modes(), grid.ny())),
            clamped: false,
        }
    }

    pub fn from_coeffs(grid: &Arc<Grid>, coeffs: Array2<Complex64>) -> Result<Self> {
        if coeffs.dim() != (grid.n_modes(), grid.ny()) {
            return Err(Error::Grid(format!(
                "modal shape {:?} does not match grid ({}, {})",
                coeffs.dim(),
                grid.n_modes(),
                grid.ny()
            )));
        }
        Ok(Self {
            grid: Arc::clone(grid),
            coeffs,
            clamped: false,
        })
    }

    pub fn with_clamped_flag(mut self, clamped: bool) -> Self {
        self.clamped = clamped;
        self
    }

    pub fn is_clamped(&self) -> bool {
        self.clamped
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn coeffs(&self) -> &Array2<Complex64> {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut Array2<Complex64> {
        &mut self.coeffs
    }

    pub fn wavenumber(&self, k: usize) -> f64 {
        self.grid.wavenumber(k)
    }

    pub fn to_physical(&self) -> Field {
        let grid = &self.grid;
        let nx = grid.nx();
        let mut input = grid.c2r.make_input_vec();
        let mut output = grid.c2r.make_output_vec();
        let mut scratch = grid.c2r.make_scratch_vec();
        let mut values = Array2::<f64>::zeros((nx, grid.ny()));
        let scale = 1.0 / nx as f64;
        for j in 0..grid.ny() {
            for (dst, src) in input.iter_mut().zip(self.coeffs.column(j)) {
                *dst = *src;
            }
            input[0].im = 0.0;
            input[nx / 2].im = 0.0;
            grid.c2r
                .process_with_scratch(&mut input, &mut output, &mut scratch)
                .expect("buffer sizes come from the plan");
            for (dst, src) in values.column_mut(j).iter_mut().zip(&output) {
                *dst = *src * scale;
            }
        }
        Field {
            grid: Arc::clone(grid),
            values,
            clamped: self.clamped,
        }
    }

    /// Zero every mode above `k_max`.
    pub fn truncate_above(&mut self, k_max: usize) {
        for k in (k_max + 1)..self.grid.n_modes() {
            self.coeffs.row_mut(k).fill(Complex64::new(0.0, 0.0));
        }
    }

    /// Quadrature inner product evaluated through Parseval; equals
    /// `inner_product` of the physical fields up to rounding.
    pub fn quad_inner(&self, other: &ModalField) -> Result<f64> {
        if *self.grid != *other.grid {
            return Err(Error::GridMismatch);
        }
        let grid = &self.grid;
        let scale = grid.dx() / grid.nx() as f64;
        let mut total = 0.0;
        for (k, (a_row, b_row)) in self
            .coeffs
            .axis_iter(Axis(0))
            .zip(other.coeffs.axis_iter(Axis(0)))
            .enumerate()
        {
            let c = grid.mode_multiplicity(k);
            let row: f64 = a_row
                .iter()
                .zip(b_row.iter())
                .zip(grid.quad_weights())
                .map(|((a, b), w)| w * (a * b.conj()).re)
                .sum();
            total += c * row;
        }
        Ok(total * scale)
    }
}

/// Quadrature inner product `∫ f h w dx`: rectangle rule in `x₁`,
/// trapezoid rule in `x₂`.
pub fn inner_product(f: &Field, h: &Field, w: Option<&WeightField>) -> Result<f64> {
    if !f.same_grid(h) {
        return Err(Error::GridMismatch);
    }
    let grid = f.grid();
    let qw = grid.quad_weights();
    let mut total = 0.0;
    match w {
        None => {
            for (row_f, row_h) in f.values.outer_iter().zip(h.values.outer_iter()) {
                for j in 0..grid.ny() {
                    total += row_f[j] * row_h[j] * qw[j];
                }
            }
        }
        Some(w) => {
            if **w.grid() != **grid {
                return Err(Error::GridMismatch);
            }
            let wv = w.phi();
            for i in 0..grid.nx() {
                for j in 0..grid.ny() {
                    total += f.values[[i, j]] * h.values[[i, j]] * wv[[i, j]] * qw[j];
                }
            }
        }
    }
    Ok(total * grid.dx())
}

/// `sqrt(inner_product(f, f, w))`.
pub fn l2_norm(f: &Field, w: Option<&WeightField>) -> Result<f64> {
    inner_product(f, f, w).map(|v| v.max(0.0).sqrt())
}

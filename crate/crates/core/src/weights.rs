//! Polynomial weights for the anisotropic weighted norms.
//!
//! The limit weight is `(1 + |εx₁|³ + |εx₂|²)^γ`. The cutoff weight
//! composes the radical `τ = (1 + |εx₁|³ + |εx₂|²)^{1/2}` with the `C¹`
//! profile [`g_profile`], which is the identity on `[1/2, ρ]` and constant
//! past `ρ + 1`, and raises the result to `2γ`. `ψ` is the square root of
//! whichever weight is in use.
//!
//! On the periodic grid the weight is evaluated at the centered
//! coordinate `x₁ ∈ [-Lx/2, Lx/2)`, which keeps it continuous across the
//! periodic seam.

use std::fmt;
use std::sync::Arc;

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::grid::{Field, Grid};
use crate::operators::{OperatorSet, WallClosure};

/// Largest `γ` accepted without the override flag.
pub const GAMMA_THRESHOLD: f64 = 2.0 / 3.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WeightSpec {
    epsilon: f64,
    rho: f64,
    gamma: f64,
}

impl WeightSpec {
    /// `rho = f64::INFINITY` selects the limit weight. `γ > 2/3` is
    /// rejected unless `allow_large_gamma` is set.
    pub fn new(epsilon: f64, rho: f64, gamma: f64, allow_large_gamma: bool) -> Result<Self> {
        if !(epsilon.is_finite() && epsilon > 0.0) {
            return Err(Error::Weight(format!("epsilon must be positive, got {epsilon}")));
        }
        if rho.is_nan() || rho < 1.0 {
            return Err(Error::Weight(format!("rho must be >= 1 or inf, got {rho}")));
        }
        if !(gamma.is_finite() && gamma >= 0.0) {
            return Err(Error::Weight(format!("gamma must be >= 0, got {gamma}")));
        }
        if gamma > GAMMA_THRESHOLD + 1e-15 && !allow_large_gamma {
            return Err(Error::Weight(format!(
                "gamma = {gamma} exceeds 2/3; pass the gamma override to run sharpness experiments"
            )));
        }
        Ok(Self { epsilon, rho, gamma })
    }

    /// `γ = 0`: every weight is identically 1.
    pub fn trivial() -> Self {
        Self {
            epsilon: 1.0,
            rho: f64::INFINITY,
            gamma: 0.0,
        }
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn is_limit(&self) -> bool {
        self.rho.is_infinite()
    }

    pub fn with_rho(&self, rho: f64) -> Result<Self> {
        Self::new(self.epsilon, rho, self.gamma, true)
    }

    /// `1 + |εx₁|³ + |εx₂|²`.
    pub fn radical_sq(&self, x1: f64, x2: f64) -> f64 {
        let a = (self.epsilon * x1).abs();
        let b = self.epsilon * x2;
        1.0 + a * a * a + b * b
    }

    /// Weight value: the cutoff weight for finite `ρ`, the limit weight otherwise.
    pub fn weight(&self, x1: f64, x2: f64) -> f64 {
        if self.is_limit() {
            phi_limit(x1, x2, self)
        } else {
            varphi_unchecked(x1, x2, self)
        }
    }
}

/// Cutoff profile: `1/4 + τ²` up to `1/2`, identity up to `ρ`, a quadratic
/// cap up to `ρ + 1`, then the constant `ρ + 1/2`.
pub fn g_profile(tau: f64, rho: f64) -> Result<f64> {
    if !(tau >= 0.0) {
        return Err(Error::Weight(format!("profile argument must be >= 0, got {tau}")));
    }
    if !(rho >= 1.0) {
        return Err(Error::Weight(format!("rho must be >= 1, got {rho}")));
    }
    Ok(profile(tau, rho))
}

fn profile(tau: f64, rho: f64) -> f64 {
    if tau <= 0.5 {
        0.25 + tau * tau
    } else if tau <= rho {
        tau
    } else if tau <= rho + 1.0 {
        let s = rho + 1.0 - tau;
        rho + 0.5 - 0.5 * s * s
    } else {
        rho + 0.5
    }
}

/// Which profile branch `τ` falls in (0..=3).
fn profile_branch(tau: f64, rho: f64) -> u8 {
    if tau <= 0.5 {
        0
    } else if tau <= rho {
        1
    } else if tau <= rho + 1.0 {
        2
    } else {
        3
    }
}

/// `(1 + |εx₁|³ + |εx₂|²)^γ`.
pub fn phi_limit(x1: f64, x2: f64, spec: &WeightSpec) -> f64 {
    spec.radical_sq(x1, x2).powf(spec.gamma)
}

/// `g(τ)^{2γ}` with `τ` the radical; requires finite `ρ`.
pub fn varphi(x1: f64, x2: f64, spec: &WeightSpec) -> Result<f64> {
    if spec.is_limit() {
        return Err(Error::Weight("cutoff weight needs a finite rho".into()));
    }
    Ok(varphi_unchecked(x1, x2, spec))
}

fn varphi_unchecked(x1: f64, x2: f64, spec: &WeightSpec) -> f64 {
    let tau = spec.radical_sq(x1, x2).sqrt();
    profile(tau, spec.rho).powf(2.0 * spec.gamma)
}

/// Weight samples on a grid: `φ` and `ψ` at nodes, `φ` at `x₂` midpoints.
#[derive(Clone, Debug)]
pub struct WeightField {
    grid: Arc<Grid>,
    spec: WeightSpec,
    phi: Array2<f64>,
    psi: Array2<f64>,
    phi_mid: Array2<f64>,
}

impl WeightField {
    pub fn new(grid: &Arc<Grid>, spec: &WeightSpec) -> Self {
        let lx = grid.domain().lx();
        let centered = |i: usize| {
            let x = grid.x1(i);
            if x < 0.5 * lx {
                x
            } else {
                x - lx
            }
        };
        let (nx, ny) = (grid.nx(), grid.ny());
        let phi = Array2::from_shape_fn((nx, ny), |(i, j)| spec.weight(centered(i), grid.x2(j)));
        let psi = phi.mapv(f64::sqrt);
        let phi_mid = Array2::from_shape_fn((nx, ny - 1), |(i, j)| {
            spec.weight(centered(i), grid.x2(j) + 0.5 * grid.dy())
        });
        Self {
            grid: Arc::clone(grid),
            spec: *spec,
            phi,
            psi,
            phi_mid,
        }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn spec(&self) -> &WeightSpec {
        &self.spec
    }

    pub fn phi(&self) -> &Array2<f64> {
        &self.phi
    }

    pub fn psi(&self) -> &Array2<f64> {
        &self.psi
    }

    /// `φ` at `(x₁ᵢ, x₂ⱼ + dy/2)`, shape `nx × (ny-1)`.
    pub fn phi_mid(&self) -> &Array2<f64> {
        &self.phi_mid
    }
}

/// Trapezoid-in-`x₂` quadrature of `w·f²`.
pub(crate) fn quad_sq(f: &Field, w: Option<&Array2<f64>>) -> f64 {
    let grid = f.grid();
    let qw = grid.quad_weights();
    let v = f.values();
    let mut total = 0.0;
    for i in 0..grid.nx() {
        for j in 0..grid.ny() {
            let s = v[[i, j]] * v[[i, j]] * qw[j];
            total += match w {
                Some(w) => s * w[[i, j]],
                None => s,
            };
        }
    }
    total * grid.dx()
}

/// `‖∂₂f‖²` with the staggered difference `(f_{j+1} - f_j)/dy` sampled at
/// the `x₂` midpoints and weighted by `w_mid` there. For clamped data this
/// is the quadratic form of the solver's mass operator.
pub(crate) fn staggered_d2_sq(f: &Field, w_mid: Option<&Array2<f64>>) -> f64 {
    let grid = f.grid();
    let v = f.values();
    let dy = grid.dy();
    let mut total = 0.0;
    for i in 0..grid.nx() {
        for j in 0..grid.ny() - 1 {
            let d = v[[i, j + 1]] - v[[i, j]];
            let s = d * d;
            total += match w_mid {
                Some(w) => s * w[[i, j]],
                None => s,
            };
        }
    }
    total * grid.dx() / dy
}

/// Weighted norms entering the anisotropic spaces.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct WeightedNorms {
    pub psi_f: f64,
    pub psi_d1: f64,
    pub psi_d1_grad: f64,
    pub psi_d1_lap: f64,
    pub psi_grad: f64,
    pub psi_lap: f64,
}

/// Quadrature norms with weight `ψ² = φ`. Gradients use the staggered
/// `x₂` difference; Laplacians use the wall closure of the input's flag.
pub fn weighted_sobolev_norms(f: &Field, weights: &WeightField) -> Result<WeightedNorms> {
    if **f.grid() != **weights.grid() {
        return Err(Error::GridMismatch);
    }
    let ops = OperatorSet::new(f.grid(), false);
    let phi = Some(weights.phi());
    let mid = Some(weights.phi_mid());
    let closure = if f.is_clamped() {
        WallClosure::Clamped
    } else {
        WallClosure::General
    };

    let m = f.to_modal();
    let d1 = ops.d1_modal(&m);
    let lap = ops.laplacian_modal_with(&m, closure);
    let d1_lap = ops.d1_modal(&lap).to_physical();
    let d1f = d1.to_physical();
    let d11f = ops.d1_modal(&d1).to_physical();

    let grad_sq = quad_sq(&d1f, phi) + staggered_d2_sq(f, mid);
    let d1_grad_sq = quad_sq(&d11f, phi) + staggered_d2_sq(&d1f, mid);
    Ok(WeightedNorms {
        psi_f: quad_sq(f, phi).sqrt(),
        psi_d1: quad_sq(&d1f, phi).sqrt(),
        psi_d1_grad: d1_grad_sq.sqrt(),
        psi_d1_lap: quad_sq(&d1_lap, phi).sqrt(),
        psi_grad: grad_sq.sqrt(),
        psi_lap: quad_sq(&lap.to_physical(), phi).sqrt(),
    })
}

/// Derivative multi-index `(β₁, β₂)` with `0 < |β| ≤ 3`, `β₂ ≤ 2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct MultiIndex {
    pub d1: usize,
    pub d2: usize,
}

impl MultiIndex {
    pub fn new(d1: usize, d2: usize) -> Result<Self> {
        let order = d1 + d2;
        if order == 0 {
            return Err(Error::Weight("multi-index must have positive order".into()));
        }
        if order > 3 {
            return Err(Error::Weight(format!("multi-index ({d1},{d2}) has order above 3")));
        }
        if d2 > 2 {
            return Err(Error::Weight(format!("multi-index ({d1},{d2}) has more than two x2 derivatives")));
        }
        Ok(Self { d1, d2 })
    }

    pub fn order(&self) -> usize {
        self.d1 + self.d2
    }

    /// All admissible indices.
    pub fn admissible() -> Vec<MultiIndex> {
        [(1, 0), (0, 1), (2, 0), (1, 1), (0, 2), (3, 0), (2, 1), (1, 2)]
            .iter()
            .map(|&(a, b)| MultiIndex { d1: a, d2: b })
            .collect()
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.d1, self.d2)
    }
}

/// Sampling lattice for derivative certification: centers at
/// `x₁ ∈ [0, x1_max]`, `x₂ ∈ [0, x2_max]` with steps `h1`, `h2`. The
/// weights are even in both variables, so this quadrant suffices.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CertLattice {
    pub x1_max: f64,
    pub x2_max: f64,
    pub h1: f64,
    pub h2: f64,
}

impl CertLattice {
    pub fn new(x1_max: f64, x2_max: f64, h1: f64, h2: f64) -> Result<Self> {
        if !(x1_max > 0.0 && x2_max > 0.0 && h1 > 0.0 && h2 > 0.0) {
            return Err(Error::Weight("lattice extents and steps must be positive".into()));
        }
        Ok(Self { x1_max, x2_max, h1, h2 })
    }

    /// Lattice reaching past the whole transition region of the cutoff,
    /// `τ ≤ ρ + 1`, with strip half-width `m`.
    pub fn covering(spec: &WeightSpec, m: f64) -> Result<Self> {
        if spec.is_limit() {
            return Err(Error::Weight("covering lattice needs a finite rho".into()));
        }
        let x1_max = 1.3 * (spec.rho() + 1.0).powf(2.0 / 3.0) / spec.epsilon() + 5.0;
        let h1 = (x1_max / 15_000.0).max(0.002 / spec.epsilon());
        Self::new(x1_max, m, h1, m / 25.0)
    }
}

// Fourth-order central stencils (offsets, coefficients), step-free.
fn stencil(order: usize) -> (&'static [i64], &'static [f64]) {
    match order {
        0 => (&[0], &[1.0]),
        1 => (&[-2, -1, 1, 2], &[1.0 / 12.0, -8.0 / 12.0, 8.0 / 12.0, -1.0 / 12.0]),
        2 => (
            &[-2, -1, 0, 1, 2],
            &[-1.0 / 12.0, 16.0 / 12.0, -30.0 / 12.0, 16.0 / 12.0, -1.0 / 12.0],
        ),
        3 => (
            &[-3, -2, -1, 1, 2, 3],
            &[1.0 / 8.0, -1.0, 13.0 / 8.0, -13.0 / 8.0, 1.0, -1.0 / 8.0],
        ),
        _ => unreachable!("multi-index orders are validated"),
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CertificationRow {
    pub beta: MultiIndex,
    /// `max |∂^β w| / (ε^{|β|} ψ)`.
    pub c_emp: f64,
    /// `max |∂^β w| / (ε^{|β|} ψ²)`, the weaker regularity ratio.
    pub c_emp_relative: f64,
    /// Where `c_emp` is attained.
    pub at: (f64, f64),
}

#[derive(Clone, Debug, PartialEq)]
pub struct CertificationReport {
    pub spec: WeightSpec,
    pub lattice: CertLattice,
    pub rows: Vec<CertificationRow>,
}

impl CertificationReport {
    pub fn row(&self, beta: MultiIndex) -> Option<&CertificationRow> {
        self.rows.iter().find(|r| r.beta == beta)
    }

    /// Largest `c_emp` over all indices.
    pub fn aggregate(&self) -> f64 {
        self.rows.iter().fold(0.0, |m, r| m.max(r.c_emp))
    }
}

impl fmt::Display for CertificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "# eps={} rho={} gamma={:.6} lattice x1<={:.3} x2<={:.3}",
            self.spec.epsilon, self.spec.rho, self.spec.gamma, self.lattice.x1_max, self.lattice.x2_max
        )?;
        writeln!(f, "{:<8} {:>14} {:>14} {:>12} {:>10}", "beta", "C_emp", "C_emp_rel", "x1*", "x2*")?;
        for r in &self.rows {
            writeln!(
                f,
                "{:<8} {:>14.6e} {:>14.6e} {:>12.4} {:>10.4}",
                r.beta.to_string(),
                r.c_emp,
                r.c_emp_relative,
                r.at.0,
                r.at.1
            )?;
        }
        write!(f, "aggregate {:.6e}", self.aggregate())
    }
}

/// Empirical derivative constants of the given weight function. Stencils
/// that straddle a branch junction or the kink at `x₁ = 0` are skipped, so
/// the derivatives are the piecewise ones.
fn certify_with(
    spec: &WeightSpec,
    lattice: &CertLattice,
    betas: &[MultiIndex],
    weight: impl Fn(f64, f64) -> f64,
    branch: impl Fn(f64, f64) -> u8,
) -> Result<CertificationReport> {
    for b in betas {
        MultiIndex::new(b.d1, b.d2)?;
    }
    const PAD: i64 = 3;
    let n1 = (lattice.x1_max / lattice.h1).ceil() as i64;
    let n2 = (lattice.x2_max / lattice.h2).round().max(1.0) as i64;
    let w1 = (n1 + 2 * PAD + 1) as usize;
    let w2 = (n2 + 2 * PAD + 1) as usize;
    let x1 = |i: i64| i as f64 * lattice.h1;
    let x2 = |j: i64| j as f64 * lattice.h2;
    let mut vals = Array2::<f64>::zeros((w1, w2));
    let mut tags = Array2::<u8>::zeros((w1, w2));
    for a in 0..w1 {
        for b in 0..w2 {
            let (p, q) = (x1(a as i64 - PAD), x2(b as i64 - PAD));
            vals[[a, b]] = weight(p, q);
            // sign of x₁ is part of the tag: |x₁|³ has a jump in its third derivative at 0
            let side = if p > 0.0 {
                2
            } else if p < 0.0 {
                0
            } else {
                1
            };
            tags[[a, b]] = branch(p, q) * 3 + side;
        }
    }

    let eps = spec.epsilon();
    let mut rows = Vec::with_capacity(betas.len());
    for beta in betas {
        let (o1, c1) = stencil(beta.d1);
        let (o2, c2) = stencil(beta.d2);
        let scale = lattice.h1.powi(beta.d1 as i32) * lattice.h2.powi(beta.d2 as i32);
        let eps_pow = eps.powi(beta.order() as i32);
        let mut row = CertificationRow {
            beta: *beta,
            c_emp: 0.0,
            c_emp_relative: 0.0,
            at: (0.0, 0.0),
        };
        for i in 0..=n1 {
            for j in 0..=n2 {
                let (a, b) = ((i + PAD) as usize, (j + PAD) as usize);
                let tag = tags[[a, b]];
                let mut acc = 0.0;
                let mut clean = true;
                'st: for (di, ci) in o1.iter().zip(c1) {
                    for (dj, cj) in o2.iter().zip(c2) {
                        let (p, q) = ((a as i64 + di) as usize, (b as i64 + dj) as usize);
                        if tags[[p, q]] != tag {
                            clean = false;
                            break 'st;
                        }
                        acc += ci * cj * vals[[p, q]];
                    }
                }
                if !clean {
                    continue;
                }
                let d = (acc / scale).abs();
                let w = vals[[a, b]];
                let r = d / (eps_pow * w.sqrt());
                if r > row.c_emp {
                    row.c_emp = r;
                    row.at = (x1(i), x2(j));
                }
                row.c_emp_relative = row.c_emp_relative.max(d / (eps_pow * w));
            }
        }
        rows.push(row);
    }
    Ok(CertificationReport {
        spec: *spec,
        lattice: *lattice,
        rows,
    })
}

/// Certify `|∂^β ψ²| ≤ C ε^{|β|} ψ` for the cutoff weight.
pub fn certify_lemma_wfuncs(
    spec: &WeightSpec,
    lattice: &CertLattice,
    betas: &[MultiIndex],
) -> Result<CertificationReport> {
    if spec.is_limit() {
        return Err(Error::Weight("cutoff certification needs a finite rho".into()));
    }
    let rho = spec.rho();
    certify_with(
        spec,
        lattice,
        betas,
        |a, b| varphi_unchecked(a, b, spec),
        |a, b| profile_branch(spec.radical_sq(a, b).sqrt(), rho),
    )
}

/// Certify `|∂^β φ| ≤ C ε^{|β|} φ^{1/2}` for the limit weight (`ρ` is ignored).
pub fn certify_phi_control(
    spec: &WeightSpec,
    lattice: &CertLattice,
    betas: &[MultiIndex],
) -> Result<CertificationReport> {
    certify_with(spec, lattice, betas, |a, b| phi_limit(a, b, spec), |_, _| 0)
}

/// Cutoff certification repeated over several `ρ`, each on its covering lattice.
#[derive(Clone, Debug)]
pub struct RhoStudy {
    pub reports: Vec<CertificationReport>,
}

impl RhoStudy {
    pub fn run(spec: &WeightSpec, rhos: &[f64], m: f64, betas: &[MultiIndex]) -> Result<Self> {
        let mut reports = Vec::with_capacity(rhos.len());
        for &rho in rhos {
            let s = spec.with_rho(rho)?;
            let lattice = CertLattice::covering(&s, m)?;
            reports.push(certify_lemma_wfuncs(&s, &lattice, betas)?);
        }
        Ok(Self { reports })
    }

    /// `max_ρ C_emp(β, ρ) / C_emp(β, ρ_first)`.
    pub fn ratio(&self, beta: MultiIndex) -> Option<f64> {
        let first = self.reports.first()?.row(beta)?.c_emp;
        let max = self
            .reports
            .iter()
            .filter_map(|r| r.row(beta))
            .fold(0.0_f64, |m, r| m.max(r.c_emp));
        Some(max / first)
    }

    /// Aggregate constant at the last `ρ` over the one at the first.
    pub fn aggregate_ratio(&self) -> Option<f64> {
        Some(self.reports.last()?.aggregate() / self.reports.first()?.aggregate())
    }
}

impl fmt::Display for RhoStudy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.reports {
            writeln!(f, "{r}")?;
        }
        if let Some(first) = self.reports.first() {
            writeln!(f, "{:<8} {:>12}", "beta", "rho_ratio")?;
            for row in &first.rows {
                writeln!(f, "{:<8} {:>12.4}", row.beta.to_string(), self.ratio(row.beta).unwrap_or(f64::NAN))?;
            }
        }
        write!(f, "aggregate_ratio {:.4}", self.aggregate_ratio().unwrap_or(f64::NAN))
    }
}

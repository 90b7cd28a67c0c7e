//! Property suites: each study measures one structural property of the
//! discretization and reports it as a list of checks with measured value,
//! bound and verdict.

use std::fmt;
use std::str::FromStr;

use crate::diagnostics::{
    energy_budget, fit_loglog_slope, galerkin_refinement_study, poincare_check, run_with_diagnostics,
    weighted_energy_budget, PoincareReport, RefinementReport, TranslationAccumulator, TranslationNorm,
    TranslationReport,
};
use crate::error::{Error, Result};
use crate::grid::{make_grid, Field, StripDomain};
use crate::io::RunConfig;
use crate::operators::OperatorSet;
use crate::solver::{nse_run, run, FieldSource, MmsReference, Scheme, Solver, SolverConfig};
use crate::weights::{
    certify_phi_control, quad_sq, staggered_d2_sq, CertLattice, MultiIndex, RhoStudy, WeightField, WeightSpec,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    Operators,
    Weights,
    Poincare,
    Budget,
    Compactness,
    Mms,
    AlphaSweep,
}

impl Suite {
    pub const ALL: [Suite; 7] = [
        Suite::Operators,
        Suite::Weights,
        Suite::Poincare,
        Suite::Budget,
        Suite::Compactness,
        Suite::Mms,
        Suite::AlphaSweep,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Suite::Operators => "operators",
            Suite::Weights => "weights",
            Suite::Poincare => "poincare",
            Suite::Budget => "budget",
            Suite::Compactness => "compactness",
            Suite::Mms => "mms",
            Suite::AlphaSweep => "alpha_sweep",
        }
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown suite '{s}'")))
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One assertion of a suite.
#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    /// Human-readable bound, e.g. `<= 1e-3`.
    pub bound: String,
    pub passed: bool,
}

impl Check {
    pub fn at_most(name: impl Into<String>, measured: f64, bound: f64) -> Self {
        Self {
            name: name.into(),
            measured,
            bound: format!("<= {bound:e}"),
            passed: measured <= bound,
        }
    }

    pub fn at_least(name: impl Into<String>, measured: f64, bound: f64) -> Self {
        Self {
            name: name.into(),
            measured,
            bound: format!(">= {bound:e}"),
            passed: measured >= bound,
        }
    }

    pub fn within(name: impl Into<String>, measured: f64, lo: f64, hi: f64) -> Self {
        Self {
            name: name.into(),
            measured,
            bound: format!("in [{lo}, {hi}]"),
            passed: (lo..=hi).contains(&measured),
        }
    }

    /// A yes/no property; `measured` is reported alongside.
    pub fn holds(name: impl Into<String>, measured: f64, bound: impl Into<String>, passed: bool) -> Self {
        Self {
            name: name.into(),
            measured,
            bound: bound.into(),
            passed,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SuiteReport {
    pub suite: Suite,
    pub checks: Vec<Check>,
    /// Free-form tables printed after the checks.
    pub notes: Vec<String>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

impl fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "suite {}", self.suite)?;
        for c in &self.checks {
            writeln!(
                f,
                "  [{}] {:<44} measured {:>14.6e}  bound {}",
                if c.passed { "PASS" } else { "FAIL" },
                c.name,
                c.measured,
                c.bound
            )?;
        }
        for n in &self.notes {
            for line in n.lines() {
                writeln!(f, "  | {line}")?;
            }
        }
        write!(f, "suite {}: {}", self.suite, if self.passed() { "PASS" } else { "FAIL" })
    }
}

/// Normalized residuals below this are rounding, not truncation error.
pub const ROUNDING_FLOOR: f64 = 1e-12;

/// Errors or residuals against a mesh parameter, with the fitted order.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceStudy {
    pub h: Vec<f64>,
    pub errors: Vec<f64>,
}

impl ConvergenceStudy {
    /// Least-squares order over all levels.
    pub fn order(&self) -> f64 {
        fit_loglog_slope(&self.h, &self.errors)
    }

    /// Every error below [`ROUNDING_FLOOR`].
    pub fn at_rounding_floor(&self) -> bool {
        self.errors.iter().all(|e| *e <= ROUNDING_FLOOR)
    }

    pub fn table(&self, label: &str) -> String {
        let mut s = format!("{label:>12} {:>16}", "error");
        for (h, e) in self.h.iter().zip(&self.errors) {
            s.push_str(&format!("\n{h:>12.6e} {e:>16.6e}"));
        }
        s.push_str(&format!("\norder {:.4}", self.order()));
        s
    }
}

/// Normalized trilinear residuals under `x₂` refinement.
#[derive(Clone, Debug, PartialEq)]
pub struct IdentityStudy {
    pub ny: Vec<usize>,
    /// Conservative form, as used by the solver.
    pub r1: ConvergenceStudy,
    pub r2: ConvergenceStudy,
    /// Pointwise form, for comparison.
    pub r1_pointwise: ConvergenceStudy,
    pub r2_pointwise: ConvergenceStudy,
}

impl IdentityStudy {
    /// Residuals small at the finest level and either converging at
    /// `min_order` or already at rounding.
    pub fn passes(&self, tol: f64, min_order: f64) -> bool {
        [&self.r1, &self.r2].iter().all(|s| {
            *s.errors.last().unwrap_or(&f64::INFINITY) <= tol
                && (s.at_rounding_floor() || s.order() >= min_order)
        })
    }
}

/// `(B(u,v),w) + (B(u,w),v)` and `(B(u,v),v)` for a smooth clamped triple,
/// normalized by the Hölder scale, over the given `x₂` node counts.
pub fn operator_identity_study(lx: f64, m: f64, nx: usize, nys: &[usize]) -> Result<IdentityStudy> {
    let domain = StripDomain::new(lx, m)?;
    let kappa = 2.0 * std::f64::consts::PI / lx;
    let mut out = IdentityStudy {
        ny: nys.to_vec(),
        r1: ConvergenceStudy { h: vec![], errors: vec![] },
        r2: ConvergenceStudy { h: vec![], errors: vec![] },
        r1_pointwise: ConvergenceStudy { h: vec![], errors: vec![] },
        r2_pointwise: ConvergenceStudy { h: vec![], errors: vec![] },
    };
    for &ny in nys {
        let g = make_grid(domain, nx, ny)?;
        let ops = OperatorSet::new(&g, true);
        let u = Field::from_fn(&g, |x, y| {
            (kappa * x).sin() * (std::f64::consts::PI * y / (2.0 * m)).cos().powi(2)
        });
        let v = Field::from_fn(&g, |x, y| (2.0 * kappa * x).cos() * (1.0 - (y / m).powi(2)).powi(2)).into_clamped();
        let w = Field::from_fn(&g, |x, y| {
            let s = y / m;
            (kappa * x + 0.3).sin() * (1.0 - s * s).powi(2) * (1.0 + 0.5 * s)
        })
        .into_clamped();
        let scale_w = ops.trilinear_scale(&u, &v, &w)?;
        let scale_v = ops.trilinear_scale(&u, &v, &v)?;
        let (r1, r2) = ops.trilinear_identity_residuals(&u, &v, &w)?;
        let (p1, p2) = ops.trilinear_identity_residuals_pointwise(&u, &v, &w)?;
        for (s, val) in [
            (&mut out.r1, r1 / scale_w),
            (&mut out.r2, r2 / scale_v),
            (&mut out.r1_pointwise, p1 / scale_w),
            (&mut out.r2_pointwise, p2 / scale_v),
        ] {
            s.h.push(g.dy());
            s.errors.push(val);
        }
    }
    Ok(out)
}

fn relative_l2(a: &Field, b: &Field) -> Result<f64> {
    let d = quad_sq(&a.sub(b)?, None).sqrt();
    let n = quad_sq(b, None).sqrt();
    Ok(if n > 0.0 { d / n } else { d })
}

fn h1_norm(f: &Field, ops: &OperatorSet) -> f64 {
    (quad_sq(f, None) + quad_sq(&ops.d1(f), None) + staggered_d2_sq(f, None)).sqrt()
}

fn final_state(cfg: &SolverConfig) -> Result<Field> {
    Ok(run(cfg, |_, _| Ok(()))?.v)
}

/// MMS configuration: the reference drives both forcing and initial data.
pub fn mms_config(base: &SolverConfig, reference: &str) -> Result<SolverConfig> {
    let r = MmsReference::by_id(reference, base.m)?;
    Ok(SolverConfig {
        forcing: FieldSource::Mms(r.clone()),
        ic: FieldSource::Mms(r),
        ..base.clone()
    })
}

/// Relative `L²` error at `t_end` against the manufactured solution over
/// `x₂` node counts `nys`.
pub fn mms_spatial_study(base: &SolverConfig, reference: &str, nys: &[usize]) -> Result<ConvergenceStudy> {
    let mut study = ConvergenceStudy { h: vec![], errors: vec![] };
    for &ny in nys {
        let cfg = SolverConfig { ny, ..mms_config(base, reference)? };
        let solver = Solver::new(&cfg)?;
        let st = solver.run_from(solver.initial_state()?, |_, _| Ok(()))?;
        let exact = MmsReference::by_id(reference, cfg.m)?.field(solver.grid(), st.t);
        study.h.push(solver.grid().dy());
        study.errors.push(relative_l2(&st.v, &exact)?);
    }
    Ok(study)
}

/// Relative `L²` error at `t_end` over time steps `dts`, measured against a
/// CNAB2 run on the same grid with step `min(dts)/16`, so the spatial
/// error cancels.
pub fn mms_temporal_study(base: &SolverConfig, reference: &str, dts: &[f64]) -> Result<ConvergenceStudy> {
    let cfg = mms_config(base, reference)?;
    let dt_min = dts.iter().cloned().fold(f64::INFINITY, f64::min);
    let reference_run = final_state(&SolverConfig {
        dt: dt_min / 16.0,
        scheme: Scheme::ImexCnab2,
        ..cfg.clone()
    })?;
    let mut study = ConvergenceStudy { h: vec![], errors: vec![] };
    for &dt in dts {
        let c = SolverConfig { dt, ..cfg.clone() };
        if ((c.t_end / dt).round() * dt - c.t_end).abs() > 1e-9 * c.t_end {
            return Err(Error::Config(format!("dt = {dt} does not divide t_end = {}", c.t_end)));
        }
        study.h.push(dt);
        study.errors.push(relative_l2(&final_state(&c)?, &reference_run)?);
    }
    Ok(study)
}

/// `‖v_α(T) − v₀(T)‖` over a descending `α` list.
#[derive(Clone, Debug, PartialEq)]
pub struct AlphaSweep {
    pub alphas: Vec<f64>,
    /// Relative `L²` differences to the unfiltered run.
    pub differences: Vec<f64>,
}

impl AlphaSweep {
    /// Fitted slope over the strictly positive `α` entries.
    pub fn slope(&self) -> f64 {
        let (a, d): (Vec<f64>, Vec<f64>) = self
            .alphas
            .iter()
            .zip(&self.differences)
            .filter(|(a, _)| **a > 0.0)
            .map(|(a, d)| (*a, *d))
            .unzip();
        fit_loglog_slope(&a, &d)
    }

    /// Differences strictly decrease along the list.
    pub fn monotone(&self) -> bool {
        self.differences.windows(2).all(|w| w[1] < w[0])
    }

    pub fn table(&self) -> String {
        let mut s = format!("{:>10} {:>16}", "alpha", "|v_a - v_0|");
        for (a, d) in self.alphas.iter().zip(&self.differences) {
            s.push_str(&format!("\n{a:>10.4} {d:>16.6e}"));
        }
        s.push_str(&format!("\nslope {:.4}", self.slope()));
        s
    }
}

pub fn alpha_sweep(base: &SolverConfig, alphas: &[f64]) -> Result<AlphaSweep> {
    if alphas.windows(2).any(|w| w[1] >= w[0]) || alphas.iter().any(|a| *a < 0.0) {
        return Err(Error::Config("alpha list must be non-negative and strictly descending".into()));
    }
    let v0 = nse_run(base, |_, _| Ok(()))?.v;
    let mut differences = Vec::with_capacity(alphas.len());
    for &alpha in alphas {
        let va = final_state(&SolverConfig { alpha, ..base.clone() })?;
        differences.push(relative_l2(&va, &v0)?);
    }
    Ok(AlphaSweep {
        alphas: alphas.to_vec(),
        differences,
    })
}

/// Energy decay of a forcing-free run and of the same run at `dt/2`.
#[derive(Clone, Debug, PartialEq)]
pub struct DecayStudy {
    pub energy0: f64,
    /// `max(Eⁿ⁺¹ − Eⁿ, 0) / E(0)`.
    pub max_increase: f64,
    /// `max |dt·rⁿ| / E(0)` at `dt` and at `dt/2`.
    pub budget_defect: [f64; 2],
    /// `max(dt·rⁿ, 0) / E(0)`: energy created beyond the exact balance.
    pub positive_excess: [f64; 2],
    pub final_energy: f64,
    /// `max ‖∇v_t‖²·dt` summed, a finite `v_t` estimate.
    pub integral_grad_vt_sq: f64,
}

impl DecayStudy {
    pub fn shrink_factor(&self) -> f64 {
        self.budget_defect[0] / self.budget_defect[1]
    }
}

struct DecayStats {
    e0: f64,
    increase: f64,
    defect: f64,
    excess: f64,
    last: f64,
    grad_vt: f64,
}

fn decay_stats(cfg: &SolverConfig) -> Result<DecayStats> {
    let out = run_with_diagnostics(cfg, &WeightSpec::trivial(), |_, _, _| Ok(()))?;
    let rep = energy_budget(&out.records, f64::INFINITY)?;
    let e0 = out.records[0].energy;
    let defect = rep.residuals.iter().fold(0.0_f64, |m, r| m.max((r * cfg.dt).abs())) / e0;
    let wb = weighted_energy_budget(&out.records)?;
    Ok(DecayStats {
        e0,
        increase: rep.max_increase / e0,
        defect,
        excess: rep.max_excess / e0,
        last: out.records.last().expect("non-empty").energy,
        grad_vt: wb.integral_grad_vt_sq,
    })
}

pub fn energy_decay_study(cfg: &SolverConfig) -> Result<DecayStudy> {
    if !cfg.forcing.is_zero() {
        return Err(Error::Config("energy decay study needs zero forcing".into()));
    }
    let a = decay_stats(cfg)?;
    let b = decay_stats(&SolverConfig { dt: cfg.dt / 2.0, ..cfg.clone() })?;
    Ok(DecayStudy {
        energy0: a.e0,
        max_increase: a.increase,
        budget_defect: [a.defect, b.defect],
        positive_excess: [a.excess, b.excess],
        final_energy: a.last,
        integral_grad_vt_sq: a.grad_vt,
    })
}

/// Weighted energy bounds at the configured resolution and at double it.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedStudy {
    /// `sup E_w / E_w(0)` at base and doubled resolution.
    pub growth: [f64; 2],
    /// `∫ D_w dt` at base and doubled resolution.
    pub integral_dw: [f64; 2],
}

impl WeightedStudy {
    pub fn growth_change(&self) -> f64 {
        (self.growth[1] - self.growth[0]).abs() / self.growth[0]
    }

    pub fn integral_change(&self) -> f64 {
        (self.integral_dw[1] - self.integral_dw[0]).abs() / self.integral_dw[0]
    }
}

/// `(nx, ny)` with both mesh steps halved.
pub fn doubled(nx: usize, ny: usize) -> (usize, usize) {
    (2 * nx, 2 * ny - 1)
}

pub fn weighted_study(cfg: &SolverConfig, spec: &WeightSpec) -> Result<WeightedStudy> {
    let mut growth = [0.0; 2];
    let mut integral_dw = [0.0; 2];
    let (nx2, ny2) = doubled(cfg.nx, cfg.ny);
    for (i, c) in [cfg.clone(), SolverConfig { nx: nx2, ny: ny2, ..cfg.clone() }].iter().enumerate() {
        let out = run_with_diagnostics(c, spec, |_, _, _| Ok(()))?;
        let rep = weighted_energy_budget(&out.records)?;
        growth[i] = rep.growth();
        integral_dw[i] = rep.integral_dw;
    }
    Ok(WeightedStudy { growth, integral_dw })
}

/// Translation modulus over lags `2, 4, …, 2^p` steps, recorded at every step.
pub fn compactness_study(cfg: &SolverConfig, spec: &WeightSpec, max_lag_pow: u32) -> Result<TranslationReport> {
    let lags: Vec<usize> = (1..=max_lag_pow).map(|p| 1usize << p).collect();
    let solver = Solver::new(cfg)?;
    let weights = WeightField::new(solver.grid(), spec);
    let mut acc = TranslationAccumulator::new(&lags, TranslationNorm::H2h, 0.0, cfg.dt)?;
    solver.run_from(solver.initial_state()?, |_, st| acc.push(st.t, &st.v, &weights))?;
    acc.finish()
}

/// Three nested levels ending at the configured resolution.
pub fn nested_ladder(nx: usize, ny: usize) -> Result<Vec<(usize, usize)>> {
    if !nx.is_multiple_of(4) || !(ny - 1).is_multiple_of(4) || nx < 16 || ny < 17 {
        return Err(Error::Config(format!(
            "refinement ladder needs nx and ny - 1 divisible by 4 (got {nx} x {ny})"
        )));
    }
    Ok(vec![(nx / 4, (ny - 1) / 4 + 1), (nx / 2, (ny - 1) / 2 + 1), (nx, ny)])
}

pub fn galerkin_study(cfg: &SolverConfig, ladder: &[(usize, usize)]) -> Result<RefinementReport> {
    let every = ((0.05 / cfg.dt).round() as usize).max(1);
    galerkin_refinement_study(cfg, ladder, every, 0.0)
}

/// Separation of runs whose initial data differ by `δ` in `H¹`.
#[derive(Clone, Debug, PartialEq)]
pub struct DependenceStudy {
    pub deltas: Vec<f64>,
    /// `‖v(T) − v_δ(T)‖_{H¹} / δ`.
    pub constants: Vec<f64>,
    /// `sup_t ‖v − v_δ‖_{H¹} / δ`.
    pub sup_constants: Vec<f64>,
}

impl DependenceStudy {
    /// `max C / min C − 1`.
    pub fn spread(&self) -> f64 {
        let max = self.constants.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let min = self.constants.iter().cloned().fold(f64::INFINITY, f64::min);
        max / min - 1.0
    }
}

pub fn continuous_dependence(cfg: &SolverConfig, deltas: &[f64]) -> Result<DependenceStudy> {
    let solver = Solver::new(cfg)?;
    let ops = OperatorSet::new(solver.grid(), false);
    let v0 = solver.initial_state()?.v;
    let bump = crate::solver::config::trig_clamped_field(solver.grid(), 1.0, 2, 1);
    let dir = bump.scaled(1.0 / h1_norm(&bump, &ops));
    let mut base = Vec::new();
    solver.run_from(solver.initial_state()?, |_, st| {
        base.push(st.v.clone());
        Ok(())
    })?;
    let mut constants = Vec::with_capacity(deltas.len());
    let mut sup_constants = Vec::with_capacity(deltas.len());
    for &delta in deltas {
        let start = v0.lin_comb(1.0, &dir, delta)?.into_clamped();
        let (mut sup, mut last) = (0.0_f64, 0.0);
        let mut n = 0;
        solver.run_from(solver.state_from_field(&start, 0.0)?, |_, st| {
            last = h1_norm(&st.v.sub(&base[n])?, &ops);
            sup = sup.max(last);
            n += 1;
            Ok(())
        })?;
        constants.push(last / delta);
        sup_constants.push(sup / delta);
    }
    Ok(DependenceStudy {
        deltas: deltas.to_vec(),
        constants,
        sup_constants,
    })
}

/// Admissible indices with `|β| ≤ 2`, where the limit-weight control
/// extends to `γ ≤ 4/3`.
fn low_order() -> Vec<MultiIndex> {
    MultiIndex::admissible().into_iter().filter(|b| b.order() <= 2).collect()
}

fn rhos() -> [f64; 3] {
    [1.0, 10.0, 100.0]
}

/// Cutoff certification across `ρ ∈ {1, 10, 100}` and the explicit
/// first-derivative constant of the limit weight.
pub fn weights_checks(spec: &WeightSpec, m: f64) -> Result<(Vec<Check>, Vec<String>)> {
    let gamma = spec.gamma();
    let betas = MultiIndex::admissible();
    let study = RhoStudy::run(spec, &rhos(), m, &betas)?;
    let mut checks = Vec::new();
    if gamma <= crate::weights::GAMMA_THRESHOLD + 1e-12 {
        for b in &betas {
            let r = study.ratio(*b).unwrap_or(f64::NAN);
            checks.push(Check::at_most(format!("cutoff C_emp rho ratio beta={b}"), r, 2.0));
        }
    } else {
        let r = study.aggregate_ratio().unwrap_or(f64::NAN);
        checks.push(Check::at_least("cutoff aggregate rho ratio (growth)", r, 3.0));
    }
    let limit = spec.with_rho(f64::INFINITY)?;
    let lattice = CertLattice::covering(&spec.with_rho(100.0)?, m)?;
    let d1 = MultiIndex::new(1, 0)?;
    let rep = certify_phi_control(&limit, &lattice, &[d1])?;
    if gamma <= crate::weights::GAMMA_THRESHOLD + 1e-12 {
        let c = rep.row(d1).map_or(f64::NAN, |r| r.c_emp);
        checks.push(Check::at_most("limit weight C_emp beta=(1,0)", c, 3.0));
    } else if gamma <= 4.0 / 3.0 {
        let near = certify_phi_control(&limit, &CertLattice::covering(&spec.with_rho(10.0)?, m)?, &low_order())?;
        let far = certify_phi_control(&limit, &lattice, &low_order())?;
        let r = far.aggregate() / near.aggregate();
        checks.push(Check::at_most("limit weight |beta|<=2 C_emp lattice ratio", r, 2.0));
    }
    Ok((checks, vec![study.to_string(), rep.to_string()]))
}

fn poincare_checks(rep: &PoincareReport) -> Vec<Check> {
    vec![
        Check::at_most("lambda1 relative error vs (pi/2M)^2", rep.lambda1.relative_error(), 0.01),
        Check::at_most("max |psi v|/|psi grad v| (bound 2/lambda1)", rep.max_ratio_l2, rep.bound_l2),
        Check::at_most("max |psi grad v|/|psi lap v| (bound 2/lambda1^1/2)", rep.max_ratio_grad, rep.bound_grad),
        Check::holds(
            "L4 ratio finite",
            rep.l4_ratio,
            "finite",
            rep.l4_ratio.is_finite(),
        ),
    ]
}

/// Run one suite at the resolution of `cfg`.
pub fn run_suite(suite: Suite, cfg: &RunConfig, allow_large_gamma: bool) -> Result<SuiteReport> {
    let sc = &cfg.solver;
    let mut checks = Vec::new();
    let mut notes = Vec::new();
    match suite {
        Suite::Operators => {
            let nys = [sc.ny, 2 * sc.ny - 1, 4 * sc.ny - 3];
            let st = operator_identity_study(sc.lx, sc.m, sc.nx, &nys)?;
            for (name, s) in [("r1", &st.r1), ("r2", &st.r2)] {
                checks.push(Check::at_most(format!("{name} normalized at ny={}", sc.ny), s.errors[0], 1e-3));
                let ok = s.at_rounding_floor() || s.order() >= 1.8;
                checks.push(Check::holds(
                    format!("{name} order (or at rounding floor)"),
                    s.order(),
                    format!(">= 1.8 or all <= {ROUNDING_FLOOR:e}"),
                    ok,
                ));
            }
            notes.push(st.r1.table("dy (r1)"));
            notes.push(st.r2.table("dy (r2)"));
            notes.push(st.r1_pointwise.table("dy (r1 pw)"));
            notes.push(st.r2_pointwise.table("dy (r2 pw)"));
        }
        Suite::Weights => {
            let spec = cfg.weight_spec(allow_large_gamma)?;
            let (c, n) = weights_checks(&spec, sc.m)?;
            checks.extend(c);
            notes.extend(n);
        }
        Suite::Poincare => {
            let grid = sc.grid()?;
            let spec = cfg.weight_spec(allow_large_gamma)?;
            let rep = poincare_check(&grid, &spec, 100, cfg.seed)?;
            checks.extend(poincare_checks(&rep));
            notes.push(format!("{rep:?}"));
        }
        Suite::Budget => {
            let plain = SolverConfig {
                forcing: FieldSource::Zero,
                ..sc.clone()
            };
            let d = energy_decay_study(&plain)?;
            checks.push(Check::at_most("max energy increase / E(0)", d.max_increase, 1e-8));
            checks.push(Check::at_least("budget defect shrink under dt/2", d.shrink_factor(), 2.0));
            checks.push(Check::holds("final E < E(0)", d.final_energy / d.energy0, "< 1", d.final_energy < d.energy0));
            let spec = cfg.weight_spec(allow_large_gamma)?;
            let w = weighted_study(&plain, &spec)?;
            checks.push(Check::at_most("sup E_w / E_w(0)", w.growth[0], 1.05));
            checks.push(Check::at_most("sup E_w / E_w(0) change under doubling", w.growth_change(), 0.05));
            checks.push(Check::holds("int D_w finite", w.integral_dw[0], "finite", w.integral_dw[0].is_finite()));
            checks.push(Check::at_most("int D_w change under doubling", w.integral_change(), 0.05));
            let dep = continuous_dependence(&SolverConfig { t_end: sc.t_end.min(1.0), ..plain }, &[1e-3, 1e-4])?;
            checks.push(Check::at_most("continuous dependence constant spread", dep.spread(), 0.2));
            notes.push(format!("{d:?}\n{w:?}\n{dep:?}"));
        }
        Suite::Compactness => {
            let spec = cfg.weight_spec(allow_large_gamma)?;
            let rep = compactness_study(sc, &spec, 6)?;
            checks.push(Check::at_least("translation modulus log-log slope", rep.slope, 0.5));
            checks.push(Check::holds(
                "calibrated k^1/2 envelope dominates",
                rep.envelope_constant,
                "M(k) <= C k^1/2",
                rep.envelope_holds(),
            ));
            let ladder = nested_ladder(sc.nx, sc.ny)?;
            let g = galerkin_study(sc, &ladder)?;
            checks.push(Check::holds(
                "refinement differences strictly decrease",
                g.deltas_l2.last().copied().unwrap_or(f64::NAN),
                "Cauchy",
                g.is_cauchy(),
            ));
            notes.push(format!("{rep:?}\n{g:?}"));
        }
        Suite::Mms => {
            let nys = [33, 65, 129];
            let spatial = mms_spatial_study(
                &SolverConfig {
                    dt: 1e-3,
                    t_end: 1.0,
                    nx: 32,
                    scheme: Scheme::ImexCnab2,
                    ..sc.clone()
                },
                "unsteady",
                &nys,
            )?;
            checks.push(Check::within("spatial order in dy", spatial.order(), 1.7, 2.3));
            notes.push(spatial.table("dy"));
            let dts = [0.01, 0.005, 0.0025, 0.00125];
            let temporal = mms_temporal_study(
                &SolverConfig {
                    t_end: 0.5,
                    nx: 32,
                    ny: 33,
                    ..sc.clone()
                },
                "unsteady",
                &dts,
            )?;
            let p = sc.scheme.order() as f64;
            checks.push(Check::within(format!("temporal order ({})", sc.scheme), temporal.order(), p - 0.3, p + 0.3));
            notes.push(temporal.table("dt"));
        }
        Suite::AlphaSweep => {
            let sweep = alpha_sweep(sc, &[0.4, 0.2, 0.1, 0.05])?;
            checks.push(Check::holds(
                "differences decrease with alpha",
                sweep.differences.last().copied().unwrap_or(f64::NAN),
                "monotone",
                sweep.monotone(),
            ));
            checks.push(Check::within("log-log slope", sweep.slope(), 1.5, 2.5));
            notes.push(sweep.table());
        }
    }
    Ok(SuiteReport { suite, checks, notes })
}

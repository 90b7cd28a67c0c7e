//! End-to-end behaviour of solver runs and their diagnostics.

use bardina::diagnostics::{energy_budget, galerkin_refinement_study, run_with_diagnostics, weighted_energy_budget};
use bardina::solver::{FieldSource, MmsReference, Scheme, SolverConfig};
use bardina::weights::WeightSpec;

// ∫(|∇v|² + ¼|∂₁∇v|²) for v = sin x₁ (1 − x₂²)² cos(πx₂), by computer algebra
const TRIG_ENERGY: f64 = 21.920169349305148;

fn cfg(nx: usize, ny: usize) -> SolverConfig {
    SolverConfig {
        nx,
        ny,
        t_end: 0.0,
        ..SolverConfig::default()
    }
}

#[test]
fn initial_energy_converges_to_exact_integral() {
    let mut errs = Vec::new();
    for (nx, ny) in [(32, 33), (64, 65), (128, 129)] {
        let out = run_with_diagnostics(&cfg(nx, ny), &WeightSpec::trivial(), |_, _, _| Ok(())).unwrap();
        assert_eq!(out.records.len(), 1);
        errs.push((out.records[0].energy - TRIG_ENERGY).abs() / TRIG_ENERGY);
    }
    assert!(errs[0] < 1e-2, "{errs:?}");
    for w in errs.windows(2) {
        assert!(((w[0] / w[1]).log2() - 2.0).abs() < 0.2, "{errs:?}");
    }
}

#[test]
fn steady_manufactured_state_balances_dissipation_and_forcing() {
    let r = MmsReference::by_id("steady", 1.0).unwrap();
    let c = SolverConfig {
        nx: 32,
        ny: 65,
        nu: 0.1,
        dt: 1e-3,
        t_end: 0.05,
        scheme: Scheme::ImexCnab2,
        forcing: FieldSource::Mms(r.clone()),
        ic: FieldSource::Mms(r),
        ..SolverConfig::default()
    };
    let out = run_with_diagnostics(&c, &WeightSpec::trivial(), |_, _, _| Ok(())).unwrap();
    let e0 = out.records[0].energy;
    for rec in &out.records[1..] {
        assert!((rec.energy - e0).abs() < 2e-3 * e0, "{} vs {e0}", rec.energy);
        let balance = (rec.dissipation + rec.forcing_work).abs();
        assert!(balance < 2e-2 * rec.dissipation, "{balance} vs {}", rec.dissipation);
    }
}

#[test]
fn cadence_one_budget_matches_recorded_residuals() {
    let c = SolverConfig { t_end: 0.05, ..cfg(32, 33) };
    let out = run_with_diagnostics(&c, &WeightSpec::trivial(), |_, _, _| Ok(())).unwrap();
    let rep = energy_budget(&out.records, f64::INFINITY).unwrap();
    for (r, rec) in rep.residuals.iter().zip(&out.records[1..]) {
        assert!((r - rec.budget_residual).abs() <= 1e-9 * rec.dissipation);
    }
    assert!(rep.max_increase == 0.0);
    let w = weighted_energy_budget(&out.records).unwrap();
    assert!(w.integral_grad_vt_sq.is_finite() && w.integral_dw > 0.0);
}

#[test]
fn weighted_energy_grows_with_cutoff_radius() {
    let c = SolverConfig { t_end: 0.01, ..cfg(32, 33) };
    let mut last = 0.0;
    for rho in [1.0, 2.0, 10.0, f64::INFINITY] {
        let spec = WeightSpec::new(1.0, rho, 2.0 / 3.0, false).unwrap();
        let out = run_with_diagnostics(&c, &spec, |_, _, _| Ok(())).unwrap();
        let e = out.records[0].energy_w;
        assert!(e >= last, "rho = {rho}: {e} < {last}");
        assert!(e >= out.records[0].energy);
        last = e;
    }
}

#[test]
fn refinement_rejects_non_nested_levels() {
    let c = SolverConfig { t_end: 0.01, ..cfg(16, 17) };
    assert!(galerkin_refinement_study(&c, &[(16, 17), (24, 25)], 1, 0.0).is_err());
    assert!(galerkin_refinement_study(&c, &[(16, 17), (32, 34)], 1, 0.0).is_err());
}

#[test]
fn linear_refinement_differences_shrink() {
    // without B the problem is linear and the ladder converges cleanly
    let c = SolverConfig {
        nonlinear: false,
        t_end: 0.2,
        nu: 0.05,
        ..cfg(16, 17)
    };
    let rep = galerkin_refinement_study(&c, &[(16, 17), (32, 33), (64, 65)], 20, 0.0).unwrap();
    assert!(rep.is_cauchy(), "{rep:?}");
    assert!(rep.error_to_finest[0] > rep.error_to_finest[1]);
    // the scheme itself converges at second order in dy
    for p in rep.restricted_orders() {
        assert!((1.7..=2.3).contains(&p), "{rep:?}");
    }
    // linear x₂ interpolation limits the prolonged differences to first
    // order in a norm containing ∂₁∂₂
    for p in rep.observed_orders() {
        assert!((0.8..=1.2).contains(&p), "{rep:?}");
    }
}

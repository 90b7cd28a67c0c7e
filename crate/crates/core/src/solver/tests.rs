use super::*;
use crate::grid::inner_product;
use nalgebra::{DMatrix, DVector};
use std::f64::consts::PI;

fn small(scheme: Scheme) -> SolverConfig {
    SolverConfig {
        nx: 16,
        ny: 33,
        nu: 0.05,
        alpha: 0.3,
        dt: 0.01,
        t_end: 0.2,
        scheme,
        ..SolverConfig::default()
    }
}

#[test]
fn zero_data_is_a_fixed_point() {
    for scheme in [Scheme::ImexEuler, Scheme::ImexCnab2] {
        let cfg = SolverConfig {
            ic: FieldSource::Zero,
            ..small(scheme)
        };
        let mut rows = 0;
        let end = run(&cfg, |_, s| {
            rows += 1;
            assert_eq!(s.v.max_abs(), 0.0);
            Ok(())
        })
        .unwrap();
        assert_eq!(rows, 21);
        assert_eq!(end.step, 20);
        assert!((end.t - 0.2).abs() < 1e-15);
    }
}

#[test]
fn zero_end_time_returns_initial_state() {
    let cfg = SolverConfig {
        t_end: 0.0,
        ..small(Scheme::ImexEuler)
    };
    let mut rows = 0;
    let end = run(&cfg, |_, _| {
        rows += 1;
        Ok(())
    })
    .unwrap();
    assert_eq!(rows, 1);
    assert_eq!(end.t, 0.0);
    let v0 = cfg.ic.initial_field(&cfg.grid().unwrap()).unwrap();
    assert!(end.v.sub(&v0).unwrap().max_abs() < 1e-14);
}

#[test]
fn matrices_match_grid_operators() {
    let cfg = small(Scheme::ImexEuler);
    let solver = Solver::new(&cfg).unwrap();
    let g = solver.grid().clone();
    let v = Field::from_fn(&g, |x, y| {
        ((x).sin() + 0.4 * (3.0 * x + 1.0).cos()) * (1.0 - y * y).powi(2) * (1.0 + y + y * y * y)
    })
    .into_clamped();
    let m = v.to_modal();
    let lap = solver.ops().laplacian_modal(&m);
    let bih = solver.ops().biharmonic_modal(&m);
    let n = g.ny() - 2;
    for k in 0..=solver.band() {
        let col: Vec<Complex64> = (1..=n).map(|j| m.coeffs()[[k, j]]).collect();
        let mut mv = vec![Complex64::new(0.0, 0.0); n];
        let mut sv = vec![Complex64::new(0.0, 0.0); n];
        solver.mass(k).matvec(&col, &mut mv);
        solver.stiffness(k).matvec(&col, &mut sv);
        let scale = bih.coeffs().iter().fold(0.0_f64, |a, c| a.max(c.norm()));
        for j in 0..n {
            assert!((mv[j] + lap.coeffs()[[k, j + 1]]).norm() <= 1e-12 * scale);
            assert!((sv[j] - bih.coeffs()[[k, j + 1]]).norm() <= 1e-12 * scale);
        }
    }
}

#[test]
fn walls_stay_clamped_and_tangential_derivatives_vanish() {
    let cfg = SolverConfig {
        forcing: FieldSource::trig_clamped(0.5, 2, 1),
        ..small(Scheme::ImexCnab2)
    };
    let solver = Solver::new(&cfg).unwrap();
    let end = solver
        .run_from(solver.initial_state().unwrap(), |s, st| {
            let ny = s.grid().ny();
            for j in [0, ny - 1] {
                assert!(st.v.values().column(j).iter().all(|&x| x == 0.0));
            }
            let d1 = s.ops().d1(&st.v);
            for j in [0, ny - 1] {
                assert!(d1.values().column(j).iter().all(|x| x.abs() <= 1e-12));
            }
            Ok(())
        })
        .unwrap();
    assert!(end.v.is_clamped() && end.v.is_finite());
}

#[test]
fn nonlinear_term_is_energy_neutral() {
    let cfg = SolverConfig {
        nx: 32,
        ny: 33,
        ..small(Scheme::ImexEuler)
    };
    let solver = Solver::new(&cfg).unwrap();
    let g = solver.grid().clone();
    let v = Field::from_fn(&g, |x, y| {
        (x.sin() + 0.7 * (2.0 * x + 0.4).cos() + 0.2 * (5.0 * x).sin()) * (1.0 - y * y).powi(2) * (1.0 + 0.6 * y)
    });
    let st = solver.state_from_field(&v, 0.0).unwrap();
    let (b, _) = solver.nonlinear_term(&st.v_hat).unwrap();
    let pairing = b.quad_inner(&st.v_hat).unwrap();
    let bp = b.to_physical();
    let scale = inner_product(&bp, &bp, None).unwrap().sqrt() * inner_product(&st.v, &st.v, None).unwrap().sqrt();
    assert!(pairing.abs() <= 1e-13 * scale, "pairing {pairing:e}, scale {scale:e}");
}

#[test]
fn runs_are_deterministic_and_nse_matches_alpha_zero() {
    let cfg = SolverConfig {
        alpha: 0.0,
        ..small(Scheme::ImexCnab2)
    };
    let a = run(&cfg, |_, _| Ok(())).unwrap();
    let b = run(&cfg, |_, _| Ok(())).unwrap();
    assert_eq!(a.v.values(), b.v.values());
    let filtered = SolverConfig { alpha: 0.3, ..cfg.clone() };
    let c = nse_run(&filtered, |_, _| Ok(())).unwrap();
    assert_eq!(a.v.values(), c.v.values());
}

#[test]
fn invalid_configs_rejected() {
    let bad = [
        SolverConfig { nu: 0.0, ..SolverConfig::default() },
        SolverConfig { dt: -1.0, ..SolverConfig::default() },
        SolverConfig { alpha: -0.1, ..SolverConfig::default() },
        SolverConfig { output_every: 0, ..SolverConfig::default() },
        SolverConfig { nx: 7, ..SolverConfig::default() },
    ];
    for cfg in bad {
        assert!(Solver::new(&cfg).is_err(), "{cfg:?}");
    }
    let err = Solver::new(&SolverConfig { nu: 0.0, ..SolverConfig::default() }).err().unwrap();
    assert!(err.to_string().contains("nu must be positive"));
}

#[test]
fn blow_up_reports_last_good_time() {
    let cfg = SolverConfig {
        nx: 16,
        ny: 17,
        nu: 1e-6,
        alpha: 0.0,
        dt: 0.5,
        t_end: 2000.0,
        ic: FieldSource::trig_clamped(50.0, 1, 1),
        ..SolverConfig::default()
    };
    match run(&cfg, |_, _| Ok(())) {
        Err(Error::BlowUp { last_good_time }) => assert!((0.0..2000.0).contains(&last_good_time)),
        other => panic!("expected blow-up, got {:?}", other.map(|s| s.t)),
    }
}

// Dense oracle for the linear dynamics of one mode: M v' = -ν S v.
fn exact_linear(m: &SymPenta, s: &SymPenta, nu: f64, t: f64, v0: &[f64]) -> Vec<f64> {
    let n = m.len();
    let md = DMatrix::from_fn(n, n, |i, j| m.get(i, j));
    let sd = DMatrix::from_fn(n, n, |i, j| s.get(i, j));
    let l = md.cholesky().unwrap().l();
    let linv = l.clone().try_inverse().unwrap();
    let c = &linv * sd * linv.transpose();
    let c = (&c + c.transpose()) * 0.5;
    let eig = c.symmetric_eigen();
    let decay = DMatrix::from_diagonal(&eig.eigenvalues.map(|lam| (-nu * t * lam).exp()));
    let prop = linv.transpose() * &eig.eigenvectors * decay * eig.eigenvectors.transpose() * l.transpose();
    (prop * DVector::from_column_slice(v0)).as_slice().to_vec()
}

#[test]
fn linear_dynamics_match_matrix_exponential() {
    for (scheme, order) in [(Scheme::ImexEuler, 1.0), (Scheme::ImexCnab2, 2.0)] {
        let mut errs = Vec::new();
        for dt in [0.02, 0.01, 0.005] {
            let cfg = SolverConfig {
                nx: 16,
                ny: 33,
                nu: 0.05,
                alpha: 0.7,
                dt,
                t_end: 0.4,
                scheme,
                nonlinear: false,
                ic: FieldSource::trig_clamped(1.0, 1, 1),
                ..SolverConfig::default()
            };
            let solver = Solver::new(&cfg).unwrap();
            let st0 = solver.initial_state().unwrap();
            let n = solver.grid().ny() - 2;
            let k = 1;
            let re0: Vec<f64> = (1..=n).map(|j| st0.v_hat.coeffs()[[k, j]].re).collect();
            let im0: Vec<f64> = (1..=n).map(|j| st0.v_hat.coeffs()[[k, j]].im).collect();
            let end = solver.run_from(st0, |_, _| Ok(())).unwrap();
            let re = exact_linear(solver.mass(k), solver.stiffness(k), cfg.nu, end.t, &re0);
            let im = exact_linear(solver.mass(k), solver.stiffness(k), cfg.nu, end.t, &im0);
            let err = (0..n)
                .map(|j| (end.v_hat.coeffs()[[k, j + 1]] - Complex64::new(re[j], im[j])).norm())
                .fold(0.0, f64::max);
            errs.push(err);
        }
        for w in errs.windows(2) {
            let p = (w[0] / w[1]).log2();
            assert!((p - order).abs() < 0.15, "{scheme}: {errs:?}");
        }
    }
}

#[test]
fn trig_initial_condition_is_clamped() {
    let mut slopes = Vec::new();
    for ny in [17, 33] {
        let g = crate::grid::make_grid(crate::grid::StripDomain::new(2.0 * PI, 1.0).unwrap(), 16, ny).unwrap();
        let f = FieldSource::trig_clamped(1.0, 1, 2).initial_field(&g).unwrap();
        assert!(f.is_clamped());
        assert_eq!(f.values().column(0).iter().fold(0.0_f64, |m, v| m.max(v.abs())), 0.0);
        let v = f.values();
        // one-sided ∂₂ at the wall, O(dy²) since the profile has a double root
        slopes.push(((4.0 * v[[4, 1]] - v[[4, 2]]) / (2.0 * g.dy())).abs());
    }
    assert!(slopes[0] / slopes[1] > 3.5, "{slopes:?}");
}

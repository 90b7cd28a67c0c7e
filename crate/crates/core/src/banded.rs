//! Symmetric pentadiagonal matrices and their `LDLᵀ` factorization.
//!
//! The per-mode implicit operators of the solver are symmetric and
//! definite with bandwidth 2, so no pivoting is needed.

use std::ops::{Add, Mul, Sub};

/// Symmetric matrix with nonzero diagonals at offsets 0, ±1, ±2.
#[derive(Clone, Debug, PartialEq)]
pub struct SymPenta {
    pub diag: Vec<f64>,
    pub off1: Vec<f64>,
    pub off2: Vec<f64>,
}

impl SymPenta {
    pub fn zeros(n: usize) -> Self {
        assert!(n >= 3, "pentadiagonal system needs n >= 3, got {n}");
        Self {
            diag: vec![0.0; n],
            off1: vec![0.0; n - 1],
            off2: vec![0.0; n - 2],
        }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// `a·self + b·other`.
    pub fn combine(&self, a: f64, other: &SymPenta, b: f64) -> SymPenta {
        let mix = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(p, q)| a * p + b * q).collect();
        SymPenta {
            diag: mix(&self.diag, &other.diag),
            off1: mix(&self.off1, &other.off1),
            off2: mix(&self.off2, &other.off2),
        }
    }

    pub fn matvec<T>(&self, x: &[T], y: &mut [T])
    where
        T: Copy + Add<Output = T> + Mul<f64, Output = T>,
    {
        let n = self.len();
        for i in 0..n {
            let mut acc = x[i] * self.diag[i];
            if i >= 1 {
                acc = acc + x[i - 1] * self.off1[i - 1];
            }
            if i >= 2 {
                acc = acc + x[i - 2] * self.off2[i - 2];
            }
            if i + 1 < n {
                acc = acc + x[i + 1] * self.off1[i];
            }
            if i + 2 < n {
                acc = acc + x[i + 2] * self.off2[i];
            }
            y[i] = acc;
        }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (lo, hi) = if i <= j { (i, j) } else { (j, i) };
        match hi - lo {
            0 => self.diag[lo],
            1 => self.off1[lo],
            2 => self.off2[lo],
            _ => 0.0,
        }
    }

    /// Factor as `L D Lᵀ`. Returns `None` when a pivot vanishes relative
    /// to the matrix scale.
    pub fn factor(&self) -> Option<PentaLdl> {
        let n = self.len();
        let scale = self.diag.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let tiny = scale * 1e-14;
        let mut d = vec![0.0; n];
        let mut l1 = vec![0.0; n.saturating_sub(1)];
        let mut l2 = vec![0.0; n.saturating_sub(2)];
        for i in 0..n {
            let li2 = if i >= 2 { self.off2[i - 2] / d[i - 2] } else { 0.0 };
            let li1 = if i >= 1 {
                let corr = if i >= 2 { li2 * l1[i - 2] * d[i - 2] } else { 0.0 };
                (self.off1[i - 1] - corr) / d[i - 1]
            } else {
                0.0
            };
            let mut di = self.diag[i];
            if i >= 2 {
                di -= li2 * li2 * d[i - 2];
                l2[i - 2] = li2;
            }
            if i >= 1 {
                di -= li1 * li1 * d[i - 1];
                l1[i - 1] = li1;
            }
            if !di.is_finite() || di.abs() <= tiny {
                return None;
            }
            d[i] = di;
        }
        Some(PentaLdl { d, l1, l2 })
    }
}

/// `LDLᵀ` factors of a [`SymPenta`]: `l1[i] = L[i+1, i]`, `l2[i] = L[i+2, i]`.
#[derive(Clone, Debug)]
pub struct PentaLdl {
    d: Vec<f64>,
    l1: Vec<f64>,
    l2: Vec<f64>,
}

impl PentaLdl {
    pub fn len(&self) -> usize {
        self.d.len()
    }

    pub fn is_empty(&self) -> bool {
        self.d.is_empty()
    }

    /// Solve in place.
    pub fn solve_in_place<T>(&self, x: &mut [T])
    where
        T: Copy + Sub<Output = T> + Mul<f64, Output = T>,
    {
        let n = self.len();
        assert_eq!(x.len(), n);
        for i in 1..n {
            let mut v = x[i] - x[i - 1] * self.l1[i - 1];
            if i >= 2 {
                v = v - x[i - 2] * self.l2[i - 2];
            }
            x[i] = v;
        }
        for (xi, di) in x.iter_mut().zip(&self.d) {
            *xi = *xi * (1.0 / di);
        }
        for i in (0..n.saturating_sub(1)).rev() {
            let mut v = x[i] - x[i + 1] * self.l1[i];
            if i + 2 < n {
                v = v - x[i + 2] * self.l2[i];
            }
            x[i] = v;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{DMatrix, DVector};
    use num_complex::Complex64;
    use proptest::prelude::*;

    fn dense(m: &SymPenta) -> DMatrix<f64> {
        let n = m.len();
        DMatrix::from_fn(n, n, |i, j| m.get(i, j))
    }

    fn spd(n: usize, seed: &[f64]) -> SymPenta {
        let mut m = SymPenta::zeros(n);
        for i in 0..n {
            m.diag[i] = 6.0 + seed[i % seed.len()].abs();
        }
        for i in 0..n - 1 {
            m.off1[i] = -2.0 + 0.5 * seed[(i + 1) % seed.len()];
        }
        for i in 0..n - 2 {
            m.off2[i] = 0.5 * seed[(i + 2) % seed.len()];
        }
        m
    }

    proptest! {
        #[test]
        fn solve_matches_dense_lu(n in 3usize..40, seed in prop::collection::vec(-1.0f64..1.0, 5..12),
                                  rhs in prop::collection::vec(-10.0f64..10.0, 40)) {
            let m = spd(n, &seed);
            let f = m.factor().expect("diagonally dominant");
            let mut x = rhs[..n].to_vec();
            f.solve_in_place(&mut x);
            let want = dense(&m).lu().solve(&DVector::from_column_slice(&rhs[..n])).unwrap();
            for i in 0..n {
                prop_assert!((x[i] - want[i]).abs() <= 1e-10 * (1.0 + want[i].abs()));
            }
            let mut y = vec![0.0; n];
            m.matvec(&x, &mut y);
            for i in 0..n {
                prop_assert!((y[i] - rhs[i]).abs() <= 1e-9 * (1.0 + rhs[i].abs()));
            }
        }
    }

    #[test]
    fn complex_rhs_solves_componentwise() {
        let m = spd(9, &[0.3, -0.7, 0.1]);
        let f = m.factor().unwrap();
        let mut z: Vec<Complex64> = (0..9).map(|i| Complex64::new(i as f64, 1.0 - i as f64)).collect();
        let mut re: Vec<f64> = z.iter().map(|c| c.re).collect();
        let mut im: Vec<f64> = z.iter().map(|c| c.im).collect();
        f.solve_in_place(&mut z);
        f.solve_in_place(&mut re);
        f.solve_in_place(&mut im);
        for i in 0..9 {
            assert!((z[i].re - re[i]).abs() < 1e-14 && (z[i].im - im[i]).abs() < 1e-14);
        }
    }

    #[test]
    fn singular_matrix_detected() {
        let m = SymPenta::zeros(5);
        assert!(m.factor().is_none());
    }
}

//! Time-translation modulus `M(k)² = Σₙ Δt ‖v(tₙ + k) − v(tₙ)‖²` over
//! `tₙ ∈ [τ, T − k]`, in a weighted anisotropic norm.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::grid::Field;
use crate::weights::{weighted_sobolev_norms, WeightField};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TranslationNorm {
    /// `‖ψf‖² + ‖ψ∂₁f‖²`.
    H1h,
    /// `‖ψf‖² + ‖ψ∂₁f‖² + ‖ψ∂₁∇f‖²`.
    H2h,
}

impl TranslationNorm {
    pub fn squared(&self, f: &Field, weights: &WeightField) -> Result<f64> {
        let n = weighted_sobolev_norms(f, weights)?;
        let base = n.psi_f.powi(2) + n.psi_d1.powi(2);
        Ok(match self {
            TranslationNorm::H1h => base,
            TranslationNorm::H2h => base + n.psi_d1_grad.powi(2),
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TranslationReport {
    /// Lags in time units.
    pub lags: Vec<f64>,
    pub modulus: Vec<f64>,
    /// Least-squares slope of `log M` against `log k`.
    pub slope: f64,
    /// `C` in `M(k) ≤ C k^{1/2}`, calibrated at the largest lag.
    pub envelope_constant: f64,
}

impl TranslationReport {
    fn build(lags: Vec<f64>, modulus: Vec<f64>) -> Self {
        let slope = fit_loglog_slope(&lags, &modulus);
        let (kmax, mmax) = (lags[lags.len() - 1], modulus[modulus.len() - 1]);
        Self {
            lags,
            modulus,
            slope,
            envelope_constant: mmax / kmax.sqrt(),
        }
    }

    /// Every measured `M(k)` lies under the calibrated `C k^{1/2}`.
    pub fn envelope_holds(&self) -> bool {
        self.lags
            .iter()
            .zip(&self.modulus)
            .all(|(k, m)| *m <= self.envelope_constant * k.sqrt() * (1.0 + 1e-12))
    }
}

/// Least-squares slope of `log y` against `log x`. Returns NaN when any
/// value is not positive.
pub fn fit_loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    if x.len() < 2 || x.iter().chain(y).any(|v| !(*v > 0.0)) {
        return f64::NAN;
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

/// Batch modulus over equally spaced samples `(tₙ, vₙ)`; `lags` are in
/// sample counts.
pub fn translation_modulus(
    samples: &[(f64, Field)],
    lags: &[usize],
    norm: TranslationNorm,
    weights: &WeightField,
    tau: f64,
) -> Result<TranslationReport> {
    if samples.len() < 2 {
        return Err(Error::Diagnostic("need at least two samples".into()));
    }
    let spacing = samples[1].0 - samples[0].0;
    let mut acc = TranslationAccumulator::new(lags, norm, tau, spacing)?;
    for (t, v) in samples {
        acc.push(*t, v, weights)?;
    }
    acc.finish()
}

/// Streaming version of [`translation_modulus`]: keeps only the last
/// `max(lags) + 1` samples.
pub struct TranslationAccumulator {
    lags: Vec<usize>,
    norm: TranslationNorm,
    tau: f64,
    spacing: f64,
    window: VecDeque<(f64, Field)>,
    sums: Vec<f64>,
    last_t: Option<f64>,
}

impl TranslationAccumulator {
    pub fn new(lags: &[usize], norm: TranslationNorm, tau: f64, spacing: f64) -> Result<Self> {
        if lags.is_empty() || lags.contains(&0) {
            return Err(Error::Diagnostic("lags must be positive sample counts".into()));
        }
        if !(spacing > 0.0) {
            return Err(Error::Diagnostic("sample spacing must be positive".into()));
        }
        Ok(Self {
            lags: lags.to_vec(),
            norm,
            tau,
            spacing,
            window: VecDeque::new(),
            sums: vec![0.0; lags.len()],
            last_t: None,
        })
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn push(&mut self, t: f64, v: &Field, weights: &WeightField) -> Result<()> {
        if let Some(prev) = self.last_t {
            if ((t - prev) - self.spacing).abs() > 1e-9 * self.spacing {
                return Err(Error::Diagnostic(format!(
                    "samples must be spaced by {} (got {} -> {t})",
                    self.spacing, prev
                )));
            }
        }
        self.last_t = Some(t);
        let max_lag = *self.lags.iter().max().expect("non-empty");
        self.window.push_back((t, v.clone()));
        if self.window.len() > max_lag + 1 {
            self.window.pop_front();
        }
        let newest = self.window.len() - 1;
        for (sum, &lag) in self.sums.iter_mut().zip(&self.lags) {
            if lag > newest {
                continue;
            }
            let (t0, v0) = &self.window[newest - lag];
            if *t0 < self.tau - 1e-12 {
                continue;
            }
            let diff = v.sub(v0)?.with_clamped_flag(v.is_clamped() && v0.is_clamped());
            *sum += self.spacing * self.norm.squared(&diff, weights)?;
        }
        Ok(())
    }

    pub fn finish(&self) -> Result<TranslationReport> {
        let span = self.last_t.map_or(0.0, |t| t - self.tau);
        let lags: Vec<f64> = self.lags.iter().map(|&l| l as f64 * self.spacing).collect();
        if let Some(k) = lags.iter().find(|&&k| k > span + 1e-12) {
            return Err(Error::Diagnostic(format!("lag {k} exceeds T - tau = {span}")));
        }
        Ok(TranslationReport::build(lags, self.sums.iter().map(|s| s.sqrt()).collect()))
    }
}

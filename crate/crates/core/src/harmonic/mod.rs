//! Fourier analysis of the boundary function and evaluation of the Schwarz
//! integral `G(z) = (1/2pi) int (e^{it} + z)/(e^{it} - z) phi(t) dt`.
//!
//! `G` is carried as a truncated trigonometric series: with
//! `phi ~ c0 + sum c_n cos(n t) + s_n sin(n t)` we have
//! `G(z) = c0 + sum (c_n - i s_n) z^n`, whose boundary values are
//! `phi + i H{phi}`.

mod analyze;
mod hilbert;
mod schwarz;

pub use analyze::{analyze, DEFAULT_GRID, DEFAULT_TERMS};
pub use hilbert::{hilbert_pv, hilbert_series, PvOutcome, PV_TOLERANCE};
pub use schwarz::{boundary_value, schwarz_eval, schwarz_quadrature, DiscPoint};

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Finite cosine/sine series; `cos[k]` and `sin[k]` multiply `n = k + 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SeriesFile", into = "SeriesFile")]
pub struct TrigSeries {
    c0: f64,
    cos: Vec<f64>,
    sin: Vec<f64>,
    grid_size: usize,
    tail_estimate: Option<f64>,
}

#[derive(Serialize, Deserialize)]
struct SeriesFile {
    n: usize,
    c0: f64,
    cos: Vec<f64>,
    sin: Vec<f64>,
    grid_size: usize,
    tail_estimate: Option<f64>,
}

impl TryFrom<SeriesFile> for TrigSeries {
    type Error = Error;

    fn try_from(f: SeriesFile) -> Result<Self> {
        if f.cos.len() != f.n || f.sin.len() != f.n {
            return Err(Error::Parse(format!(
                "series declares n = {} but has {} cosine and {} sine coefficients",
                f.n,
                f.cos.len(),
                f.sin.len()
            )));
        }
        Ok(Self {
            c0: f.c0,
            cos: f.cos,
            sin: f.sin,
            grid_size: f.grid_size,
            tail_estimate: f.tail_estimate,
        })
    }
}

impl From<TrigSeries> for SeriesFile {
    fn from(s: TrigSeries) -> Self {
        Self {
            n: s.cos.len(),
            c0: s.c0,
            cos: s.cos,
            sin: s.sin,
            grid_size: s.grid_size,
            tail_estimate: s.tail_estimate,
        }
    }
}

/// Power-law fit `|a_n| ~ amplitude * n^-exponent` over the last decade of
/// nonzero coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayFit {
    pub amplitude: f64,
    pub exponent: f64,
    /// Fraction of nonzero coefficients in the fitted window.
    pub density: f64,
}

impl TrigSeries {
    pub fn new(c0: f64, cos: Vec<f64>, sin: Vec<f64>, grid_size: usize) -> Result<Self> {
        if cos.len() != sin.len() {
            return Err(Error::InvalidArgument(
                "cosine and sine coefficient vectors differ in length".into(),
            ));
        }
        let mut s = Self { c0, cos, sin, grid_size, tail_estimate: None };
        s.tail_estimate = s.estimate_tail_l1();
        Ok(s)
    }

    pub fn n(&self) -> usize {
        self.cos.len()
    }

    pub fn c0(&self) -> f64 {
        self.c0
    }

    pub fn cos_coeffs(&self) -> &[f64] {
        &self.cos
    }

    pub fn sin_coeffs(&self) -> &[f64] {
        &self.sin
    }

    pub fn grid_size(&self) -> usize {
        self.grid_size
    }

    /// Estimated `sum_{n > N} |a_n|`; `None` when the fitted decay is too
    /// slow for the tail to be summable.
    pub fn tail_estimate(&self) -> Option<f64> {
        self.tail_estimate
    }

    pub fn is_zero_mean(&self) -> bool {
        self.c0 == 0.0
    }

    /// Keeps the first `n` harmonics.
    pub fn truncated(&self, n: usize) -> Self {
        let n = n.min(self.n());
        Self::new(self.c0, self.cos[..n].to_vec(), self.sin[..n].to_vec(), self.grid_size)
            .expect("lengths match")
    }

    /// Fejér (Cesàro) means: `a_n (1 - n / (N + 1))`.
    pub fn fejer(&self) -> Self {
        let big = self.n() as f64 + 1.0;
        let damp = |k: usize| 1.0 - (k + 1) as f64 / big;
        let cos = self.cos.iter().enumerate().map(|(k, c)| c * damp(k)).collect();
        let sin = self.sin.iter().enumerate().map(|(k, s)| s * damp(k)).collect();
        Self::new(self.c0, cos, sin, self.grid_size).expect("lengths match")
    }

    pub fn decay_fit(&self) -> Option<DecayFit> {
        let n = self.n();
        if n < 10 {
            return None;
        }
        let mags: Vec<f64> = self.cos.iter().zip(&self.sin).map(|(c, s)| c.hypot(*s)).collect();
        let peak = mags.iter().copied().fold(0.0, f64::max);
        if peak == 0.0 {
            return None;
        }
        let start = (n / 10).max(1);
        let window = &mags[start - 1..];
        let pts: Vec<(f64, f64)> = window
            .iter()
            .enumerate()
            .filter(|(_, &m)| m > 1e-14 * peak)
            .map(|(k, &m)| (((start + k) as f64).ln(), m.ln()))
            .collect();
        if pts.len() < 3 {
            return None;
        }
        let count = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / count;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / count;
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let slope = sxy / sxx;
        Some(DecayFit {
            amplitude: (my - slope * mx).exp(),
            exponent: -slope,
            density: count / window.len() as f64,
        })
    }

    fn estimate_tail_l1(&self) -> Option<f64> {
        let fit = self.decay_fit()?;
        if fit.exponent <= 1.0 {
            return None;
        }
        let edge = self.n() as f64 + 0.5;
        Some(fit.density * fit.amplitude * edge.powf(1.0 - fit.exponent) / (fit.exponent - 1.0))
    }

    /// `(c_n - i s_n)` for `n = 0..=N` (with `c0` at index 0).
    pub(crate) fn analytic_coeffs(&self) -> Vec<Complex64> {
        std::iter::once(Complex64::new(self.c0, 0.0))
            .chain(self.cos.iter().zip(&self.sin).map(|(c, s)| Complex64::new(*c, -*s)))
            .collect()
    }

    /// Boundary values `phi_N + i H{phi}_N` at `theta_k = 2 pi k / m`.
    pub fn boundary_grid(&self, m: usize) -> Vec<Complex64> {
        assert!(m > self.n(), "grid of {m} points cannot resolve {} harmonics", self.n());
        let mut buf = vec![Complex64::new(0.0, 0.0); m];
        for (k, a) in self.analytic_coeffs().into_iter().enumerate() {
            buf[k] = a;
        }
        FftPlanner::new().plan_fft_inverse(m).process(&mut buf);
        buf
    }

    /// Sum of squared coefficients `c0^2 + (1/2) sum (c_n^2 + s_n^2)`,
    /// the mean square of the boundary real part.
    pub fn mean_square(&self) -> f64 {
        self.c0 * self.c0
            + 0.5 * self.cos.iter().zip(&self.sin).map(|(c, s)| c * c + s * s).sum::<f64>()
    }
}

/// The series whose boundary values stand in for `phi` when sampling and
/// drawing the domain. Partial sums of a `phi` with jumps or unbounded ends
/// ring everywhere (the coefficients decay too slowly) and the image curve
/// loops; Fejer means converge wherever `phi` is continuous and stay close
/// to it in law. Continuous bounded `phi` keeps its partial sums.
pub fn boundary_series(phi: &crate::quantile::BoundaryFunction, s: &TrigSeries) -> TrigSeries {
    if phi.has_singularities() || !phi.jumps().is_empty() {
        s.fejer()
    } else {
        s.clone()
    }
}

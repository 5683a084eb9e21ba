//! Goodness-of-fit and moment diagnostics for exit samples.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};

/// Coefficient of the asymptotic 99% Kolmogorov band.
pub const KS_BAND_99: f64 = 1.63;
pub const MIN_KS_SAMPLES: usize = 10;
pub const DEFAULT_RESAMPLES: usize = 1000;
pub const DEFAULT_BOOTSTRAP_SEED: u64 = 0x5eed_b007;

/// Sorted sample with its right-continuous empirical CDF.
#[derive(Debug, Clone, PartialEq)]
pub struct EcdfView {
    sorted: Vec<f64>,
}

impl EcdfView {
    /// Sorts a copy of `samples`. NaN is rejected.
    pub fn new(samples: &[f64]) -> Result<Self> {
        if let Some(i) = samples.iter().position(|x| x.is_nan()) {
            return Err(Error::InvalidArgument(format!("sample {i} is NaN")));
        }
        let mut sorted = samples.to_vec();
        sorted.sort_by(f64::total_cmp);
        Ok(Self { sorted })
    }

    /// Takes an already sorted sample; unsorted or NaN input is rejected.
    pub fn from_sorted(sorted: Vec<f64>) -> Result<Self> {
        if let Some(i) = sorted.iter().position(|x| x.is_nan()) {
            return Err(Error::InvalidArgument(format!("sample {i} is NaN")));
        }
        if let Some(i) = sorted.windows(2).position(|w| w[0] > w[1]) {
            return Err(Error::InvalidArgument(format!("samples are unsorted at index {}", i + 1)));
        }
        Ok(Self { sorted })
    }

    pub fn n(&self) -> usize {
        self.sorted.len()
    }

    pub fn sorted(&self) -> &[f64] {
        &self.sorted
    }

    /// Fraction of the sample `<= x`.
    pub fn eval(&self, x: f64) -> f64 {
        if self.sorted.is_empty() {
            return 0.0;
        }
        self.sorted.partition_point(|&s| s <= x) as f64 / self.n() as f64
    }
}

/// Report fragment for one KS comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KsResult {
    pub test: String,
    pub statistic: f64,
    pub band: f64,
    pub pass: bool,
    pub n: usize,
    #[serde(skip)]
    n_eff: f64,
}

impl KsResult {
    /// Asymptotic Kolmogorov p-value of the statistic.
    pub fn p_value(&self) -> f64 {
        kolmogorov_p_value(self.statistic, self.n_eff)
    }
}

/// `P(D > d)` for the Kolmogorov statistic at effective sample size `n`,
/// with the usual finite-`n` argument correction.
pub fn kolmogorov_p_value(d: f64, n: f64) -> f64 {
    if !(n > 0.0) {
        return f64::NAN;
    }
    let sn = n.sqrt();
    let lambda = (sn + 0.12 + 0.11 / sn) * d;
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let term = (-2.0 * (k * k) as f64 * lambda * lambda).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Sup-distance between the empirical CDF and `cdf`, judged against the 99%
/// band `1.63 / sqrt(n)`.
pub fn ks_one_sample<F: Fn(f64) -> f64>(test: &str, ecdf: &EcdfView, cdf: F) -> Result<KsResult> {
    let n = ecdf.n();
    if n < MIN_KS_SAMPLES {
        return Err(Error::InvalidArgument(format!("KS test needs at least {MIN_KS_SAMPLES} samples, got {n}")));
    }
    let nf = n as f64;
    let mut d = 0.0_f64;
    for (i, &x) in ecdf.sorted().iter().enumerate() {
        let f = cdf(x);
        if f.is_nan() {
            return Err(Error::InvalidArgument(format!("cdf is NaN at {x}")));
        }
        d = d.max((i + 1) as f64 / nf - f).max(f - i as f64 / nf);
    }
    let band = KS_BAND_99 / nf.sqrt();
    Ok(KsResult { test: test.to_string(), statistic: d, band, pass: d < band, n, n_eff: nf })
}

/// Two-sample sup-distance against the band `1.63 sqrt((n_a + n_b) / (n_a n_b))`.
/// Reported `n` is `n_a + n_b`.
pub fn ks_two_sample(test: &str, a: &EcdfView, b: &EcdfView) -> Result<KsResult> {
    let (na, nb) = (a.n(), b.n());
    if na < MIN_KS_SAMPLES || nb < MIN_KS_SAMPLES {
        return Err(Error::InvalidArgument(format!(
            "KS test needs at least {MIN_KS_SAMPLES} samples per side, got {na} and {nb}"
        )));
    }
    let (xa, xb) = (a.sorted(), b.sorted());
    let (mut i, mut j) = (0, 0);
    let mut d = 0.0_f64;
    while i < na && j < nb {
        let x = xa[i].min(xb[j]);
        while i < na && xa[i] == x {
            i += 1;
        }
        while j < nb && xb[j] == x {
            j += 1;
        }
        d = d.max((i as f64 / na as f64 - j as f64 / nb as f64).abs());
    }
    let (fa, fb) = (na as f64, nb as f64);
    let band = KS_BAND_99 * ((fa + fb) / (fa * fb)).sqrt();
    Ok(KsResult {
        test: test.to_string(),
        statistic: d,
        band,
        pass: d < band,
        n: na + nb,
        n_eff: fa * fb / (fa + fb),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BootstrapOptions {
    pub resamples: usize,
    pub seed: u64,
    /// Two-sided confidence level.
    pub level: f64,
}

impl Default for BootstrapOptions {
    fn default() -> Self {
        Self { resamples: DEFAULT_RESAMPLES, seed: DEFAULT_BOOTSTRAP_SEED, level: 0.95 }
    }
}

/// Percentile bootstrap interval for the mean of `values`. Resample `r` draws
/// from its own ChaCha stream, so the result does not depend on thread count.
pub fn bootstrap_mean_ci(values: &[f64], opts: &BootstrapOptions) -> Result<(f64, f64)> {
    let n = values.len();
    if n == 0 {
        return Err(Error::InvalidArgument("bootstrap of an empty sample".into()));
    }
    if opts.resamples == 0 || !(opts.level > 0.0 && opts.level < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "bootstrap needs resamples > 0 and level in (0, 1), got {} and {}",
            opts.resamples, opts.level
        )));
    }
    let mut means: Vec<f64> = (0..opts.resamples)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            rng.set_stream(r as u64);
            (0..n).map(|_| values[rng.random_range(0..n)]).sum::<f64>() / n as f64
        })
        .collect();
    means.sort_by(f64::total_cmp);
    let alpha = 0.5 * (1.0 - opts.level);
    let pick = |p: f64| means[((p * opts.resamples as f64).floor() as usize).min(opts.resamples - 1)];
    Ok((pick(alpha), pick(1.0 - alpha)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentEstimate {
    pub k: f64,
    pub n: usize,
    /// Mean of `|x|^k`.
    pub value: f64,
    pub ci: (f64, f64),
    /// Mean of `x`, reported for `k = 1`.
    pub signed_mean: Option<f64>,
    pub signed_ci: Option<(f64, f64)>,
    /// Set when the estimate on the full sample is at least twice the
    /// estimate on its first tenth.
    pub unstable: bool,
}

impl MomentEstimate {
    pub fn contains(&self, x: f64) -> bool {
        self.ci.0 <= x && x <= self.ci.1
    }
}

pub fn empirical_moment(samples: &[f64], k: f64, opts: &BootstrapOptions) -> Result<MomentEstimate> {
    if !(k > 0.0) {
        return Err(Error::InvalidArgument(format!("moment order must be positive, got {k}")));
    }
    if samples.is_empty() {
        return Err(Error::InvalidArgument("moment of an empty sample".into()));
    }
    let powered: Vec<f64> = samples.iter().map(|x| x.abs().powf(k)).collect();
    let n = samples.len();
    let value = powered.iter().sum::<f64>() / n as f64;
    let ci = bootstrap_mean_ci(&powered, opts)?;
    let (signed_mean, signed_ci) = if k == 1.0 {
        let m = samples.iter().sum::<f64>() / n as f64;
        (Some(m), Some(bootstrap_mean_ci(samples, opts)?))
    } else {
        (None, None)
    };
    let tenth = n / 10;
    let unstable = tenth >= MIN_KS_SAMPLES && {
        let head = powered[..tenth].iter().sum::<f64>() / tenth as f64;
        value >= 2.0 * head
    };
    Ok(MomentEstimate { k, n, value, ci, signed_mean, signed_ci, unstable })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChiSquare {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

/// Pearson test that `counts` are equally likely categories.
pub fn chi_square_uniform(counts: &[u64]) -> Result<ChiSquare> {
    let total: u64 = counts.iter().sum();
    if counts.len() < 2 || total == 0 {
        return Err(Error::InvalidArgument("chi-square needs two or more categories and data".into()));
    }
    let expected = total as f64 / counts.len() as f64;
    let statistic = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
    let dof = counts.len() - 1;
    let dist = ChiSquared::new(dof as f64).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    Ok(ChiSquare { statistic, dof, p_value: dist.sf(statistic) })
}

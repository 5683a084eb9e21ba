//! Exit position and exit time of planar Brownian motion from the domain:
//! exact boundary sampling through the Schwarz series, and two independent
//! path simulators on the boundary polyline.

mod io;
mod samplers;

pub use io::{
    read_binary, read_csv, write_binary, write_csv, SampleFormat, SampleWriter, BINARY_MAGIC, BINARY_VERSION, RECORD_SIZE,
};
pub use samplers::{
    boundary_function_sample, euler_exit_sample, exact_exit_sample, wos_position_sample, EulerOptions, WosOptions,
    DEFAULT_EULER_BUDGET, DEFAULT_EULER_STEP, DEFAULT_EPS_SHELL_RELATIVE, DEFAULT_WOS_BUDGET,
};

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, TracePoint};
use crate::harmonic::TrigSeries;
use crate::stats::{empirical_moment, BootstrapOptions, MomentEstimate};

/// Samples per stream, and per write to a sink.
pub const BATCH_SIZE: usize = 10_000;
/// Below this fitted decay exponent the coefficient tail of `sum c_n^2` is
/// treated as non-convergent.
pub const MIN_SQUARE_DECAY: f64 = 0.6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Method {
    Exact,
    Euler,
    WosHybrid,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Exact => "EXACT",
            Method::Euler => "EULER",
            Method::WosHybrid => "WOS_HYBRID",
        }
    }

    pub fn code(self) -> u32 {
        match self {
            Method::Exact => 0,
            Method::Euler => 1,
            Method::WosHybrid => 2,
        }
    }

    pub fn from_code(code: u32) -> Option<Self> {
        match code {
            0 => Some(Method::Exact),
            1 => Some(Method::Euler),
            2 => Some(Method::WosHybrid),
            _ => None,
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [Method::Exact, Method::Euler, Method::WosHybrid].into_iter().find(|m| m.as_str() == s)
    }

    /// Known systematic error of the method.
    pub fn bias_note(self) -> &'static str {
        match self {
            Method::Exact => "exact in law up to Fourier truncation of the boundary series",
            Method::Euler => {
                "discretely monitored Euler path: exit is detected late, overshoot bias in tau is O(sqrt(h)); \
                 position is the crossing of the last step with the polyline"
            }
            Method::WosHybrid => "walk-on-spheres stopped in the eps-shell: position error at most eps_shell; no exit time",
        }
    }
}

/// Seed and stream identifying one reproducible random sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngStream {
    pub seed: u64,
    pub stream_id: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        Self { seed, stream_id }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        rng
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExitSample {
    pub position: Complex64,
    /// Exit time; `None` for samplers that do not simulate time.
    pub tau: Option<f64>,
    pub method: Method,
    pub stream: u64,
    /// Position within the stream.
    pub index: u64,
}

impl ExitSample {
    pub fn new(position: Complex64, tau: Option<f64>, method: Method) -> Self {
        Self { position, tau, method, stream: 0, index: 0 }
    }

    pub fn bias_note(&self) -> &'static str {
        self.method.bias_note()
    }
}

/// What a batched run produced. On failure, the samples drawn before the
/// failing path are kept.
#[derive(Debug)]
pub struct RunOutcome {
    pub written: usize,
    pub error: Option<Error>,
}

/// Draws `n` samples as `ceil(n / BATCH_SIZE)` streams of `BATCH_SIZE`,
/// stream `b` seeded by `(seed, b)`. Batches run in parallel on the current
/// rayon pool and reach `sink` in stream order, so the output does not
/// depend on the thread count.
pub fn run_batches<F, S>(n: usize, seed: u64, sampler: F, mut sink: S) -> RunOutcome
where
    F: Fn(&mut ChaCha8Rng) -> Result<ExitSample> + Sync,
    S: FnMut(&[ExitSample]) -> Result<()>,
{
    let batches = n.div_ceil(BATCH_SIZE);
    let wave = rayon::current_num_threads().max(1) * 2;
    let mut written = 0;
    let mut start = 0;
    while start < batches {
        let end = (start + wave).min(batches);
        let results: Vec<(Vec<ExitSample>, Option<Error>)> = (start..end)
            .into_par_iter()
            .map(|b| {
                let count = BATCH_SIZE.min(n - b * BATCH_SIZE);
                let mut rng = RngStream::new(seed, b as u64).rng();
                let mut out = Vec::with_capacity(count);
                for i in 0..count {
                    match sampler(&mut rng) {
                        Ok(mut s) => {
                            s.stream = b as u64;
                            s.index = i as u64;
                            out.push(s);
                        }
                        Err(e) => return (out, Some(e)),
                    }
                }
                (out, None)
            })
            .collect();
        for (batch, err) in results {
            if let Err(e) = sink(&batch) {
                return RunOutcome { written, error: Some(e) };
            }
            written += batch.len();
            if err.is_some() {
                return RunOutcome { written, error: err };
            }
        }
        start = end;
    }
    RunOutcome { written, error: None }
}

/// In-memory form of [`run_batches`].
pub fn collect_samples<F>(n: usize, seed: u64, sampler: F) -> Result<Vec<ExitSample>>
where
    F: Fn(&mut ChaCha8Rng) -> Result<ExitSample> + Sync,
{
    let mut all = Vec::with_capacity(n);
    let outcome = run_batches(n, seed, sampler, |b| {
        all.extend_from_slice(b);
        Ok(())
    });
    match outcome.error {
        Some(e) => Err(e),
        None => Ok(all),
    }
}

/// Mean of `tau^{p/2}` with a bootstrap confidence interval.
pub fn tau_moment(samples: &[ExitSample], p: f64, opts: &BootstrapOptions) -> Result<MomentEstimate> {
    if samples.is_empty() {
        return Err(Error::InvalidArgument("tau moment of an empty sample".into()));
    }
    let taus = samples
        .iter()
        .map(|s| s.tau.ok_or_else(|| Error::InvalidArgument(format!("{} samples carry no exit time", s.method.as_str()))))
        .collect::<Result<Vec<f64>>>()?;
    empirical_moment(&taus, 0.5 * p, opts)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TauSeries {
    pub value: f64,
    /// Partial sums at `N/4`, `N/2`, `N`.
    pub trace: Vec<TracePoint>,
}

/// `E[tau] = (1/2) sum (c_n^2 + s_n^2)`, from Ito's isometry and Parseval.
/// Not available when the coefficients decay too slowly for the sum to
/// converge.
pub fn expected_tau_series(s: &TrigSeries) -> Result<TauSeries> {
    let n = s.n();
    let partial = |m: usize| {
        0.5 * s.cos_coeffs()[..m]
            .iter()
            .zip(&s.sin_coeffs()[..m])
            .map(|(c, d)| c * c + d * d)
            .sum::<f64>()
    };
    let trace: Vec<TracePoint> = [n / 4, n / 2, n]
        .into_iter()
        .filter(|&m| m > 0)
        .map(|m| TracePoint { grid: m as f64, value: partial(m) })
        .collect();
    if let Some(fit) = s.decay_fit() {
        if fit.exponent <= MIN_SQUARE_DECAY {
            return Err(Error::NotAvailable {
                reason: format!(
                    "coefficients decay like n^-{:.3}; sum of squares does not converge",
                    fit.exponent
                ),
                trace,
            });
        }
    }
    Ok(TauSeries { value: partial(n), trace })
}

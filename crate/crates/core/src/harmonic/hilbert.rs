use std::f64::consts::PI;

use super::TrigSeries;
use crate::quadrature::gl16;
use crate::quantile::BoundaryFunction;

/// Relative agreement demanded between successive extrapolated values.
pub const PV_TOLERANCE: f64 = 1e-6;

/// Conjugate series: `cos(n t) -> sin(n t)`, `sin(n t) -> -cos(n t)`,
/// constants vanish. Applying it twice negates a zero-mean series exactly.
pub fn hilbert_series(s: &TrigSeries) -> TrigSeries {
    let cos = s.sin_coeffs().iter().map(|v| -v).collect();
    let sin = s.cos_coeffs().to_vec();
    TrigSeries::new(0.0, cos, sin, s.grid_size()).expect("lengths match")
}

#[derive(Debug, Clone, PartialEq)]
pub enum PvOutcome {
    Converged { value: f64, eta: f64 },
    /// The extrapolated values kept moving; `oscillation` is the last change.
    NotConverged { oscillation: f64, last: f64 },
}

impl PvOutcome {
    pub fn value(&self) -> Option<f64> {
        match self {
            PvOutcome::Converged { value, .. } => Some(*value),
            PvOutcome::NotConverged { .. } => None,
        }
    }
}

/// Default excision schedule `eta_k = pi 2^-k`, `k = 6..=14`.
pub fn default_eta_schedule() -> Vec<f64> {
    (6..=14).map(|k| PI * 0.5f64.powi(k)).collect()
}

/// Principal value `(1/2pi) lim int_{eta <= |t| <= pi} phi(x - t) cot(t/2) dt`
/// by direct quadrature with symmetric excision.
///
/// The folded integrand `[phi(x-t) - phi(x+t)] cot(t/2)` is even and smooth
/// at `t = 0` for smooth `phi`, so the truncation error is odd in `eta`;
/// one Richardson step per halving removes the leading term.
pub fn hilbert_pv(phi: &BoundaryFunction, x: f64, eta_schedule: &[f64]) -> PvOutcome {
    let schedule: Vec<f64> = if eta_schedule.is_empty() {
        default_eta_schedule()
    } else {
        eta_schedule.to_vec()
    };
    let raw: Vec<(f64, f64)> = schedule.iter().map(|&eta| (eta, truncated_pv(phi, x, eta))).collect();
    let extrapolated: Vec<(f64, f64)> = raw
        .windows(2)
        .map(|w| {
            let (e0, i0) = w[0];
            let (e1, i1) = w[1];
            let ratio = e0 / e1;
            (e1, (ratio * i1 - i0) / (ratio - 1.0))
        })
        .collect();
    let values: &[(f64, f64)] = if extrapolated.len() >= 2 { &extrapolated } else { &raw };
    match values {
        [.., (_, prev), (eta, last)] => {
            let diff = (last - prev).abs();
            if diff < PV_TOLERANCE * last.abs().max(1.0) {
                PvOutcome::Converged { value: *last, eta: *eta }
            } else {
                PvOutcome::NotConverged { oscillation: diff, last: *last }
            }
        }
        [(_, only)] => PvOutcome::NotConverged { oscillation: f64::NAN, last: *only },
        [] => PvOutcome::NotConverged { oscillation: f64::NAN, last: f64::NAN },
    }
}

fn truncated_pv(phi: &BoundaryFunction, x: f64, eta: f64) -> f64 {
    // panel cuts: dyadic from eta, plus every t where x -+ t meets a breakpoint
    let mut cuts = vec![eta];
    let mut t = eta;
    while t < PI {
        t *= 2.0;
        cuts.push(t.min(PI));
    }
    let mut breaks: Vec<f64> = vec![0.0, PI];
    breaks.extend(phi.jumps());
    breaks.extend(phi.kinks());
    breaks.extend(phi.singular_endpoints());
    for b in breaks {
        for k in -2..=2 {
            let shift = 2.0 * PI * k as f64;
            for cand in [x - (b + shift), (b + shift) - x] {
                if cand > eta && cand < PI {
                    cuts.push(cand);
                }
            }
        }
    }
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
    let integrand = |t: f64| (phi.phi(x - t) - phi.phi(x + t)) / (0.5 * t).tan();
    let mut acc = 0.0;
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        let sub = ((b - a) / 0.2).ceil().max(1.0) as usize;
        let width = (b - a) / sub as f64;
        for k in 0..sub {
            let lo = a + k as f64 * width;
            acc += gl16().integrate(lo, lo + width, integrand);
        }
    }
    acc / (2.0 * PI)
}

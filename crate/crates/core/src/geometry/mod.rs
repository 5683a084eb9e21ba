//! The domain `U = G(D)` as a boundary polyline, with membership and distance
//! queries for the path simulators.

mod domain;
mod index;
mod polygon;
mod simple;
mod svg;

pub use domain::{BoundingBox, DomainModel, Membership, NearestPoint};
pub use polygon::winding_number;
pub use simple::{is_simple, SimplicityReport};
pub use svg::render_svg;

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harmonic::{boundary_value, TrigSeries};
use crate::quantile::BoundaryFunction;

pub const DEFAULT_RESOLUTION: usize = 16384;
pub const DEFAULT_MAX_TAIL_MASS: f64 = 1e-3;
pub const SNAP_RELATIVE: f64 = 1e-9;

/// How unbounded boundaries are cut off.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TruncationPolicy {
    None,
    Radius(f64),
    /// Pick `R` so the excluded arcs carry harmonic measure below the bound.
    /// Bounded boundary functions are left untouched.
    Auto { max_tail_mass: f64 },
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        Self::Auto { max_tail_mass: DEFAULT_MAX_TAIL_MASS }
    }
}

/// Record of a clipped boundary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Truncation {
    pub radius: f64,
    /// Excluded arcs `(start, end)` in radians, `start < end`, within `[-pi, pi]`.
    pub excluded_arcs: Vec<(f64, f64)>,
    /// Excluded arc length over `2 pi`: a bound on the harmonic measure lost.
    pub tail_mass: f64,
}

#[derive(Debug, Clone)]
pub struct BoundaryCurve {
    thetas: Vec<f64>,
    vertices: Vec<Complex64>,
    chords: Vec<usize>,
    truncation: Option<Truncation>,
    resolution: usize,
    resolution_error: f64,
}

fn grid_values(s: &TrigSeries, m: usize) -> Vec<Complex64> {
    if m > s.n() {
        s.boundary_grid(m)
    } else {
        (0..m).map(|k| boundary_value(s, 2.0 * PI * k as f64 / m as f64)).collect()
    }
}

fn signed_angle(k: usize, m: usize) -> f64 {
    let t = 2.0 * PI * k as f64 / m as f64;
    if t > PI {
        t - 2.0 * PI
    } else {
        t
    }
}

/// Samples `G` on `theta_k = 2 pi k / m_b` and clips per `policy`, using only
/// the series.
pub fn build_curve(s: &TrigSeries, m_b: usize, policy: TruncationPolicy) -> Result<BoundaryCurve> {
    build(s, None, m_b, policy)
}

/// Like [`build_curve`], but the exact boundary function decides which arcs
/// are unbounded, so `|phi| > R` arcs are excluded even where the truncated
/// series stays small.
pub fn build_curve_for(
    phi: &BoundaryFunction,
    s: &TrigSeries,
    m_b: usize,
    policy: TruncationPolicy,
) -> Result<BoundaryCurve> {
    build(s, Some(phi), m_b, policy)
}

fn phi_arcs(phi: &BoundaryFunction, radius: f64) -> Vec<(f64, f64)> {
    let Some(q) = phi.quantile() else {
        return phi
            .singular_endpoints()
            .iter()
            .map(|&t| (t, t))
            .collect();
    };
    // phi(theta) = q(|theta|/pi) and q is nondecreasing, so |phi| > R exactly
    // for |theta| < pi F(-R) and |theta| > pi F(R).
    let mut arcs = Vec::new();
    let lo = q.cdf(-radius);
    if lo > 0.0 {
        arcs.push((-PI * lo, PI * lo));
    }
    let hi = q.cdf(radius);
    if hi < 1.0 {
        arcs.push((PI * hi, PI));
        arcs.push((-PI, -PI * hi));
    }
    arcs
}

fn auto_radius(phi: Option<&BoundaryFunction>, values: &[Complex64], max_tail: f64) -> Option<f64> {
    let phi = phi?;
    if !phi.has_singularities() && phi.jumps().is_empty() {
        return None;
    }
    let budget = 0.5 * max_tail;
    let mut r = 0.0_f64;
    if let Some(q) = phi.quantile() {
        let u = 0.25 * max_tail;
        r = q.quantile_clamped(u, u).abs().max(q.quantile_clamped(1.0 - u, u).abs());
    }
    let mut mags: Vec<f64> = values.iter().map(|v| v.norm()).collect();
    mags.sort_by(f64::total_cmp);
    let keep = mags.len() - (budget * mags.len() as f64).floor() as usize;
    r = r.max(mags[keep.saturating_sub(1)]);
    Some(r)
}

fn in_arc(theta: f64, arc: (f64, f64)) -> bool {
    theta >= arc.0 && theta <= arc.1
}

fn merge_arcs(mut arcs: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    arcs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out: Vec<(f64, f64)> = Vec::new();
    for a in arcs {
        match out.last_mut() {
            Some(last) if a.0 <= last.1 => last.1 = last.1.max(a.1),
            _ => out.push(a),
        }
    }
    out
}

fn build(
    s: &TrigSeries,
    phi: Option<&BoundaryFunction>,
    m_b: usize,
    policy: TruncationPolicy,
) -> Result<BoundaryCurve> {
    if m_b < 3 {
        return Err(Error::InvalidArgument(format!("curve resolution {m_b} is below 3")));
    }
    let values = grid_values(s, m_b);
    let radius = match policy {
        TruncationPolicy::None => None,
        TruncationPolicy::Radius(r) if r > 0.0 && r.is_finite() => Some(r),
        TruncationPolicy::Radius(r) => {
            return Err(Error::InvalidArgument(format!("truncation radius {r} must be positive")))
        }
        TruncationPolicy::Auto { max_tail_mass } => auto_radius(phi, &values, max_tail_mass),
    };
    let h = 2.0 * PI / m_b as f64;
    let thetas_all: Vec<f64> = (0..m_b).map(|k| signed_angle(k, m_b)).collect();

    let (keep, truncation) = match radius {
        None => (vec![true; m_b], None),
        Some(r) => {
            let exact = phi.map(|p| phi_arcs(p, r)).unwrap_or_default();
            let mut arcs = exact.clone();
            let keep: Vec<bool> = values
                .iter()
                .zip(&thetas_all)
                .map(|(v, &t)| v.norm() <= r && !exact.iter().any(|&a| in_arc(t, a)))
                .collect();
            for k in (0..m_b).filter(|&k| !keep[k]) {
                let t = thetas_all[k];
                arcs.push((t - 0.5 * h, t + 0.5 * h));
            }
            // Fold anything past +-pi back into range before measuring.
            let mut folded = Vec::new();
            for (a, b) in arcs {
                if a < -PI {
                    folded.push((a + 2.0 * PI, PI));
                    folded.push((-PI, b));
                } else if b > PI {
                    folded.push((a, PI));
                    folded.push((-PI, b - 2.0 * PI));
                } else {
                    folded.push((a, b));
                }
            }
            let arcs = merge_arcs(folded);
            let tail_mass = arcs.iter().map(|a| a.1 - a.0).sum::<f64>() / (2.0 * PI);
            if keep.iter().filter(|&&k| k).count() < 3 {
                return Err(Error::InvalidArgument(format!(
                    "truncation radius {r} leaves fewer than 3 vertices"
                )));
            }
            (keep, Some(Truncation { radius: r, excluded_arcs: arcs, tail_mass }))
        }
    };

    let mids = grid_values(s, 2 * m_b);
    let mut thetas = Vec::new();
    let mut vertices = Vec::new();
    let mut chords = Vec::new();
    let mut resolution_error = 0.0_f64;
    for k in 0..m_b {
        if !keep[k] {
            continue;
        }
        let next = (k + 1) % m_b;
        if keep[next] {
            let chord_mid = 0.5 * (values[k] + values[next]);
            resolution_error = resolution_error.max((mids[2 * k + 1] - chord_mid).norm());
        } else {
            chords.push(vertices.len());
        }
        thetas.push(thetas_all[k]);
        vertices.push(values[k]);
    }
    Ok(BoundaryCurve {
        thetas,
        vertices,
        chords,
        truncation,
        resolution: m_b,
        resolution_error,
    })
}

impl BoundaryCurve {
    /// A closed polygon through `vertices`, parametrised by equally spaced
    /// angles. Used for synthetic domains.
    pub fn from_vertices(vertices: Vec<Complex64>) -> Result<Self> {
        let n = vertices.len();
        if n < 3 {
            return Err(Error::InvalidArgument(format!("polygon needs at least 3 vertices, got {n}")));
        }
        if vertices.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::InvalidArgument("polygon has a non-finite vertex".into()));
        }
        Ok(Self {
            thetas: (0..n).map(|k| signed_angle(k, n)).collect(),
            vertices,
            chords: Vec::new(),
            truncation: None,
            resolution: n,
            resolution_error: 0.0,
        })
    }

    /// Regular `n`-gon inscribed in the circle `|w| = radius`.
    pub fn circle(radius: f64, n: usize) -> Result<Self> {
        Self::from_vertices((0..n).map(|k| Complex64::from_polar(radius, 2.0 * PI * k as f64 / n as f64)).collect())
    }

    pub fn vertices(&self) -> &[Complex64] {
        &self.vertices
    }

    /// Angles of the stored vertices, in `(-pi, pi]`.
    pub fn thetas(&self) -> &[f64] {
        &self.thetas
    }


    /// `true` when no part of the boundary was cut away.
    pub fn closed(&self) -> bool {
        self.truncation.is_none()
    }

    pub fn truncation(&self) -> Option<&Truncation> {
        self.truncation.as_ref()
    }

    pub fn tail_mass(&self) -> f64 {
        self.truncation.as_ref().map_or(0.0, |t| t.tail_mass)
    }

    /// Segment indices `k` (from vertex `k` to `k + 1`) that bridge an
    /// excluded arc.
    pub fn chords(&self) -> &[usize] {
        &self.chords
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    /// Largest distance between a segment midpoint and the series value at
    /// the mid-angle.
    pub fn resolution_error(&self) -> f64 {
        self.resolution_error
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn segment(&self, k: usize) -> (Complex64, Complex64) {
        (self.vertices[k], self.vertices[(k + 1) % self.vertices.len()])
    }

    pub fn winding_number(&self, w: Complex64) -> i32 {
        winding_number(&self.vertices, w)
    }

    /// Writes `theta,re,im` rows.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "theta,re,im")?;
        for (t, v) in self.thetas.iter().zip(&self.vertices) {
            writeln!(out, "{t},{},{}", v.re, v.im)?;
        }
        Ok(())
    }
}

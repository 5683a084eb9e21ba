use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::polygon::{orient, segments_intersect};
use super::BoundaryCurve;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimplicityReport {
    pub simple: bool,
    /// First crossing found by the sweep, as segment indices `(i, j)`, `i < j`.
    pub crossing: Option<(usize, usize)>,
}

/// Sweep-line self-intersection test of the closed polyline, on the very
/// vertices the domain model uses.
///
/// Segments sharing a vertex are exempt unless they fold back onto each
/// other. Touching segments count as a crossing.
pub fn is_simple(curve: &BoundaryCurve) -> Result<SimplicityReport> {
    simple_polyline(curve.vertices())
}

pub(crate) fn simple_polyline(v: &[Complex64]) -> Result<SimplicityReport> {
    let n = v.len();
    let seg = |k: usize| (v[k], v[(k + 1) % n]);
    for k in 0..n {
        let (a, b) = seg(k);
        if a == b {
            return Err(Error::DegenerateSegment(k));
        }
    }
    let adjacent = |i: usize, j: usize| {
        let d = i.abs_diff(j);
        d == 1 || d == n - 1
    };
    let folds_back = |i: usize, j: usize| {
        // Segments i and j share one vertex; overlap only if collinear and reversed.
        let (first, second) = if (i + 1) % n == j { (i, j) } else { (j, i) };
        let (a, b) = seg(first);
        let (_, c) = seg(second);
        orient(a, b, c) == 0.0 && ((b - a).re * (c - b).re + (b - a).im * (c - b).im) < 0.0
    };

    let xmin = |k: usize| seg(k).0.re.min(seg(k).1.re);
    let xmax = |k: usize| seg(k).0.re.max(seg(k).1.re);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| xmin(i).total_cmp(&xmin(j)).then(i.cmp(&j)));

    let mut active: Vec<usize> = Vec::new();
    for &k in &order {
        let x = xmin(k);
        active.retain(|&j| xmax(j) >= x);
        let (a, b) = seg(k);
        let (ylo, yhi) = (a.im.min(b.im), a.im.max(b.im));
        for &j in &active {
            let (c, d) = seg(j);
            if c.im.max(d.im) < ylo || c.im.min(d.im) > yhi {
                continue;
            }
            let hit = if adjacent(j, k) { n > 3 && folds_back(j, k) } else { segments_intersect(a, b, c, d) };
            if hit {
                return Ok(SimplicityReport { simple: false, crossing: Some((j.min(k), j.max(k))) });
            }
        }
        active.push(k);
    }
    Ok(SimplicityReport { simple: true, crossing: None })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_curve, TruncationPolicy};
    use crate::harmonic::analyze;
    use crate::quantile::QuantileSpec;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn circle_is_simple() {
        let r = is_simple(&BoundaryCurve::circle(1.0, 512).unwrap()).unwrap();
        assert!(r.simple);
        assert_eq!(r.crossing, None);
    }

    #[test]
    fn figure_eight_is_not() {
        let pts: Vec<_> = (0..200)
            .map(|k| {
                let t = 2.0 * std::f64::consts::PI * k as f64 / 200.0;
                c(t.sin(), (2.0 * t).sin() / 2.0)
            })
            .collect();
        let r = is_simple(&BoundaryCurve::from_vertices(pts).unwrap()).unwrap();
        assert!(!r.simple);
        let (i, j) = r.crossing.unwrap();
        // The lobes cross at the origin, near t = 0 and t = pi.
        let near = |k: usize, t: usize| k.abs_diff(t) <= 1 || k.abs_diff(t) >= 199;
        assert!(near(i, 0) || near(i, 100) || near(i, 99), "{i} {j}");
        assert!(near(j, 0) || near(j, 100) || near(j, 199), "{i} {j}");
    }

    #[test]
    fn bow_tie_crossing_pair() {
        let r = simple_polyline(&[c(0., 0.), c(1., 1.), c(1., 0.), c(0., 1.)]).unwrap();
        assert_eq!(r.crossing, Some((0, 2)));
    }

    #[test]
    fn slit_touching_fails() {
        // A square with a spike that folds straight back on itself.
        let r = simple_polyline(&[c(0., 0.), c(2., 0.), c(3., 0.), c(2., 0.), c(2., 2.), c(0., 2.)]).unwrap();
        assert!(!r.simple);
    }

    #[test]
    fn degenerate_segment_is_reported() {
        let err = simple_polyline(&[c(0., 0.), c(1., 0.), c(1., 0.), c(0., 1.)]).unwrap_err();
        assert!(matches!(err, Error::DegenerateSegment(1)));
    }

    #[test]
    fn uniform_curve_at_8192_is_simple() {
        let spec = QuantileSpec::uniform(1.0).unwrap().into_validated(1024, None).unwrap();
        let s = analyze(&spec.fold_to_boundary().unwrap(), 2048, 16384).unwrap();
        let curve = build_curve(&s, 8192, TruncationPolicy::None).unwrap();
        assert!(is_simple(&curve).unwrap().simple);
        assert!(simple_polyline(curve.vertices()).unwrap().simple);
    }
}

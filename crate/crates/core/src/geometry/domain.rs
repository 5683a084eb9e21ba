use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::index::{CellState, SegmentGrid};
use super::polygon::{crossing_parameter, segment_distance};
use super::simple::{is_simple, SimplicityReport};
use super::{BoundaryCurve, SNAP_RELATIVE};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub min: Complex64,
    pub max: Complex64,
}

impl BoundingBox {
    fn of(v: &[Complex64]) -> Self {
        let mut b = Self { min: v[0], max: v[0] };
        for p in v {
            b.min = Complex64::new(b.min.re.min(p.re), b.min.im.min(p.im));
            b.max = Complex64::new(b.max.re.max(p.re), b.max.im.max(p.im));
        }
        b
    }

    pub fn diagonal(&self) -> f64 {
        (self.max - self.min).norm()
    }

    pub fn contains(&self, w: Complex64) -> bool {
        w.re >= self.min.re && w.re <= self.max.re && w.im >= self.min.im && w.im <= self.max.im
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Membership {
    Inside,
    Outside,
    Boundary,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NearestPoint {
    pub point: Complex64,
    pub distance: f64,
    pub segment: usize,
    /// How far the polyline may sit from the true boundary near here.
    pub resolution_error: f64,
}

/// A simple boundary polyline containing the origin, indexed for fast
/// membership and distance queries. Immutable once built.
#[derive(Debug, Clone)]
pub struct DomainModel {
    curve: BoundaryCurve,
    origin_inside: bool,
    bbox: BoundingBox,
    snap: f64,
    simplicity: SimplicityReport,
    grid: SegmentGrid,
}

impl DomainModel {
    /// Indexes `curve`. A non-simple curve is rejected, as is one whose
    /// interior misses the origin.
    pub fn new(curve: BoundaryCurve) -> Result<Self> {
        let simplicity = is_simple(&curve)?;
        if let Some((first, second)) = simplicity.crossing {
            return Err(Error::NonSimple { first, second });
        }
        let bbox = BoundingBox::of(curve.vertices());
        let snap = SNAP_RELATIVE * bbox.diagonal();
        let grid = SegmentGrid::build(curve.vertices(), snap);
        let mut model = Self { curve, origin_inside: false, bbox, snap, simplicity, grid };
        model.origin_inside = model.classify(Complex64::new(0.0, 0.0)) == Membership::Inside;
        if !model.origin_inside {
            return Err(Error::Domain("the origin is not inside the domain".into()));
        }
        Ok(model)
    }

    pub fn curve(&self) -> &BoundaryCurve {
        &self.curve
    }

    pub fn origin_inside(&self) -> bool {
        self.origin_inside
    }

    pub fn bounding_box(&self) -> BoundingBox {
        self.bbox
    }

    pub fn snap_tolerance(&self) -> f64 {
        self.snap
    }

    pub fn simplicity(&self) -> SimplicityReport {
        self.simplicity
    }

    pub fn tail_mass(&self) -> f64 {
        self.curve.tail_mass()
    }

    /// Parity membership; points within the snap tolerance of the polyline
    /// are `Boundary`.
    pub fn classify(&self, w: Complex64) -> Membership {
        if !self.grid.contains(w) {
            return Membership::Outside;
        }
        let c = self.grid.locate(w);
        match self.grid.state(c) {
            CellState::Inside => return Membership::Inside,
            CellState::Outside => return Membership::Outside,
            CellState::Mixed => {}
        }
        let v = self.curve.vertices();
        let n = v.len();
        let near = self
            .grid
            .segments(c)
            .iter()
            .any(|&k| segment_distance(w, v[k as usize], v[(k as usize + 1) % n]) <= self.snap);
        if near {
            Membership::Boundary
        } else if self.grid.parity_inside(v, w) {
            Membership::Inside
        } else {
            Membership::Outside
        }
    }

    pub fn is_inside(&self, w: Complex64) -> bool {
        self.classify(w) == Membership::Inside
    }

    /// Closest point of the polyline to `w`, without the membership check.
    pub fn nearest_boundary_point(&self, w: Complex64) -> NearestPoint {
        let (point, distance, segment) = self.grid.nearest(self.curve.vertices(), w);
        NearestPoint { point, distance, segment, resolution_error: self.curve.resolution_error() }
    }

    /// Exact distance from an interior `w` to the polyline.
    pub fn distance_to_boundary(&self, w: Complex64) -> Result<NearestPoint> {
        match self.classify(w) {
            Membership::Outside => Err(Error::Domain(format!("{w} lies outside the domain"))),
            _ => Ok(self.nearest_boundary_point(w)),
        }
    }

    /// Where the step `p -> q` first meets the polyline. Falls back to the
    /// nearest boundary point of `q` when the step only grazes it.
    pub fn first_crossing(&self, p: Complex64, q: Complex64) -> Complex64 {
        let v = self.curve.vertices();
        let n = v.len();
        let mut cand = Vec::new();
        self.grid.segments_near(p, q, &mut cand);
        let mut best: Option<f64> = None;
        for k in cand {
            if let Some(t) = crossing_parameter(p, q, v[k], v[(k + 1) % n]) {
                best = Some(best.map_or(t, |b: f64| b.min(t)));
            }
        }
        match best {
            Some(t) => p + (q - p) * t,
            None => self.nearest_boundary_point(q).point,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_curve, TruncationPolicy};
    use crate::harmonic::{analyze, schwarz_eval, DiscPoint, TrigSeries};
    use crate::quantile::QuantileSpec;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn disc(n: usize) -> DomainModel {
        DomainModel::new(BoundaryCurve::circle(1.0, n).unwrap()).unwrap()
    }

    fn uniform_series(n: usize) -> TrigSeries {
        let spec = QuantileSpec::uniform(1.0).unwrap().into_validated(1024, None).unwrap();
        analyze(&spec.fold_to_boundary().unwrap(), n, 8 * n).unwrap()
    }

    #[test]
    fn unit_circle_membership() {
        let d = disc(4096);
        assert_eq!(d.classify(c(0., 0.)), Membership::Inside);
        assert_eq!(d.classify(c(2., 0.)), Membership::Outside);
        assert_eq!(d.classify(c(1., 0.)), Membership::Boundary);
        assert_eq!(d.classify(c(0.999, 0.0)), Membership::Inside);
        assert_eq!(d.classify(c(-0.7, 0.7)), Membership::Inside);
        assert_eq!(d.classify(c(-0.72, 0.72)), Membership::Outside);
        assert!(d.origin_inside());
    }

    #[test]
    fn membership_agrees_with_winding_on_a_lattice() {
        let d = disc(300);
        for i in 0..61 {
            for j in 0..61 {
                let w = c(-1.2 + 0.04 * i as f64 + 1e-3, -1.2 + 0.04 * j as f64 + 2e-3);
                let want = d.curve().winding_number(w) != 0;
                assert_eq!(d.is_inside(w), want, "{w}");
            }
        }
    }

    #[test]
    fn unit_circle_distances() {
        let d = disc(1 << 14);
        let h = 1.0 - (PI / (1 << 14) as f64).cos();
        let r0 = d.distance_to_boundary(c(0., 0.)).unwrap().distance;
        assert!((r0 - 1.0).abs() <= h + 1e-12, "{r0}");
        let r1 = d.distance_to_boundary(c(0.5, 0.)).unwrap().distance;
        assert!((r1 - 0.5).abs() <= h + 1e-12, "{r1}");
        assert!(d.distance_to_boundary(c(2., 0.)).is_err());
    }

    #[test]
    fn distance_matches_brute_force() {
        let d = disc(777);
        let v = d.curve().vertices();
        for k in 0..50 {
            let t = k as f64 * 0.37;
            let w = Complex64::from_polar(0.98 * ((k % 7) as f64 / 7.0), t);
            let brute = (0..v.len())
                .map(|j| segment_distance(w, v[j], v[(j + 1) % v.len()]))
                .fold(f64::INFINITY, f64::min);
            let got = d.distance_to_boundary(w).unwrap().distance;
            assert!((got - brute).abs() < 1e-15, "{got} vs {brute}");
        }
    }

    #[test]
    fn non_simple_curve_is_refused() {
        let bow = BoundaryCurve::from_vertices(vec![c(-1., -1.), c(1., 1.), c(1., -1.), c(-1., 1.)]).unwrap();
        assert!(matches!(DomainModel::new(bow), Err(Error::NonSimple { .. })));
    }

    #[test]
    fn origin_must_be_inside() {
        let sq = BoundaryCurve::from_vertices(vec![c(1., 1.), c(2., 1.), c(2., 2.), c(1., 2.)]).unwrap();
        assert!(matches!(DomainModel::new(sq), Err(Error::Domain(_))));
    }

    #[test]
    fn uniform_domain_contains_interior_images() {
        let s = uniform_series(1024);
        let d = DomainModel::new(build_curve(&s, 8192, TruncationPolicy::None).unwrap()).unwrap();
        assert!(d.is_inside(schwarz_eval(&s, DiscPoint::new(0.5, 0.0).unwrap())));
        for k in 0..64 {
            let z = DiscPoint::new(0.95, 2.0 * PI * k as f64 / 64.0).unwrap();
            assert!(d.is_inside(schwarz_eval(&s, z)), "{k}");
        }
    }

    #[test]
    fn uniform_distance_at_origin_is_stable() {
        let s = uniform_series(2048);
        let at = |m: usize| {
            let d = DomainModel::new(build_curve(&s, m, TruncationPolicy::None).unwrap()).unwrap();
            d.distance_to_boundary(c(0., 0.)).unwrap().distance
        };
        let (a, b) = (at(4096), at(8192));
        assert!(a > 0.0);
        assert!((a - b).abs() / b < 0.01, "{a} {b}");
    }

    #[test]
    fn first_crossing_lands_on_boundary() {
        let d = disc(4096);
        let x = d.first_crossing(c(0.99, 0.0), c(1.01, 0.0));
        assert!((x.re - 1.0).abs() < 1e-6 && x.im.abs() < 1e-12, "{x}");
    }
}

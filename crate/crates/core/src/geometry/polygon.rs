//! Planar predicates on polylines.

use num_complex::Complex64;

#[inline]
pub(crate) fn cross(a: Complex64, b: Complex64) -> f64 {
    a.re * b.im - a.im * b.re
}

#[inline]
pub(crate) fn orient(a: Complex64, b: Complex64, c: Complex64) -> f64 {
    cross(b - a, c - a)
}

/// Closest point to `p` on the segment `[a, b]`.
pub(crate) fn closest_on_segment(p: Complex64, a: Complex64, b: Complex64) -> Complex64 {
    let d = b - a;
    let len2 = d.norm_sqr();
    if len2 == 0.0 {
        return a;
    }
    let t = ((p - a).re * d.re + (p - a).im * d.im) / len2;
    a + d * t.clamp(0.0, 1.0)
}

pub(crate) fn segment_distance(p: Complex64, a: Complex64, b: Complex64) -> f64 {
    (p - closest_on_segment(p, a, b)).norm()
}

fn on_segment(a: Complex64, b: Complex64, p: Complex64) -> bool {
    p.re >= a.re.min(b.re) && p.re <= a.re.max(b.re) && p.im >= a.im.min(b.im) && p.im <= a.im.max(b.im)
}

/// True when the closed segments `[a, b]` and `[c, d]` share a point.
pub(crate) fn segments_intersect(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> bool {
    let o1 = orient(a, b, c);
    let o2 = orient(a, b, d);
    let o3 = orient(c, d, a);
    let o4 = orient(c, d, b);
    if ((o1 > 0.0 && o2 < 0.0) || (o1 < 0.0 && o2 > 0.0)) && ((o3 > 0.0 && o4 < 0.0) || (o3 < 0.0 && o4 > 0.0)) {
        return true;
    }
    (o1 == 0.0 && on_segment(a, b, c))
        || (o2 == 0.0 && on_segment(a, b, d))
        || (o3 == 0.0 && on_segment(c, d, a))
        || (o4 == 0.0 && on_segment(c, d, b))
}

/// Parameter `t` in `[0, 1]` along `p -> q` where it first meets `[a, b]`.
pub(crate) fn crossing_parameter(p: Complex64, q: Complex64, a: Complex64, b: Complex64) -> Option<f64> {
    let r = q - p;
    let s = b - a;
    let denom = cross(r, s);
    if denom == 0.0 {
        return None;
    }
    let t = cross(a - p, s) / denom;
    let u = cross(a - p, r) / denom;
    ((0.0..=1.0).contains(&t) && (0.0..=1.0).contains(&u)).then_some(t)
}

/// Winding number of the closed polyline through `vertices` about `w`.
pub fn winding_number(vertices: &[Complex64], w: Complex64) -> i32 {
    let n = vertices.len();
    let mut wn = 0;
    for k in 0..n {
        let a = vertices[k];
        let b = vertices[(k + 1) % n];
        if a.im <= w.im {
            if b.im > w.im && orient(a, b, w) > 0.0 {
                wn += 1;
            }
        } else if b.im <= w.im && orient(a, b, w) < 0.0 {
            wn -= 1;
        }
    }
    wn
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn crossing_and_touching_segments() {
        assert!(segments_intersect(c(0., 0.), c(1., 1.), c(0., 1.), c(1., 0.)));
        assert!(segments_intersect(c(0., 0.), c(2., 0.), c(1., 0.), c(1., 1.)));
        assert!(!segments_intersect(c(0., 0.), c(1., 0.), c(0., 1.), c(1., 1.)));
        assert!(segments_intersect(c(0., 0.), c(2., 0.), c(1., 0.), c(3., 0.)));
        assert!(!segments_intersect(c(0., 0.), c(1., 0.), c(2., 0.), c(3., 0.)));
    }

    #[test]
    fn square_winding() {
        let sq = [c(1., 1.), c(-1., 1.), c(-1., -1.), c(1., -1.)];
        assert_eq!(winding_number(&sq, c(0., 0.)), 1);
        assert_eq!(winding_number(&sq, c(2., 0.)), 0);
        let rev: Vec<_> = sq.iter().rev().copied().collect();
        assert_eq!(winding_number(&rev, c(0.3, -0.2)), -1);
    }

    #[test]
    fn distance_to_segment() {
        assert_eq!(segment_distance(c(0., 1.), c(-1., 0.), c(1., 0.)), 1.0);
        assert_eq!(segment_distance(c(3., 4.), c(-1., 0.), c(0., 0.)), 5.0);
        let t = crossing_parameter(c(0., -1.), c(0., 1.), c(-1., 0.), c(1., 0.)).unwrap();
        assert!((t - 0.5).abs() < 1e-15);
    }
}

use std::fmt::Write;

use num_complex::Complex64;

use super::simple::SimplicityReport;
use super::BoundaryCurve;

const CANVAS: f64 = 1000.0;
const MARGIN: f64 = 40.0;

/// SVG drawing of the domain boundary with the origin marked. Truncation
/// chords are dashed; the title carries the simplicity result when given.
pub fn render_svg(curve: &BoundaryCurve, simplicity: Option<&SimplicityReport>) -> String {
    let v = curve.vertices();
    let (mut lo, mut hi) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
    for p in v {
        lo = Complex64::new(lo.re.min(p.re), lo.im.min(p.im));
        hi = Complex64::new(hi.re.max(p.re), hi.im.max(p.im));
    }
    let span = (hi.re - lo.re).max(hi.im - lo.im).max(1e-300);
    let scale = (CANVAS - 2.0 * MARGIN) / span;
    let mid = 0.5 * (lo + hi);
    let map = |w: Complex64| {
        (
            CANVAS / 2.0 + (w.re - mid.re) * scale,
            CANVAS / 2.0 - (w.im - mid.im) * scale,
        )
    };

    let title = match simplicity {
        Some(SimplicityReport { simple: true, .. }) => "domain boundary; simple: yes".to_string(),
        Some(SimplicityReport { crossing: Some((i, j)), .. }) => {
            format!("domain boundary; simple: no (segments {i} and {j} cross)")
        }
        Some(_) => "domain boundary; simple: no".to_string(),
        None => "domain boundary".to_string(),
    };
    let title = match curve.truncation() {
        Some(t) => format!("{title}; truncated at R = {} (tail mass {:.3e})", t.radius, t.tail_mass),
        None => title,
    };

    let n = v.len();
    let chords = curve.chords();
    let mut path = String::new();
    let mut pen_down = false;
    for k in 0..n {
        let (x, y) = map(v[k]);
        if pen_down {
            let _ = write!(path, " L{x:.3},{y:.3}");
        } else {
            let _ = write!(path, " M{x:.3},{y:.3}");
            pen_down = true;
        }
        if chords.contains(&k) {
            pen_down = false;
        }
    }
    if chords.is_empty() {
        path.push_str(" Z");
    } else if !chords.contains(&(n - 1)) {
        let (x, y) = map(v[0]);
        let _ = write!(path, " L{x:.3},{y:.3}");
    }

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {c} {c}" width="{c}" height="{c}">"#,
        c = CANVAS
    );
    let _ = writeln!(out, "  <title>{title}</title>");
    let _ = writeln!(out, r#"  <rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"  <path d="{}" fill="none" stroke="black" stroke-width="1.5"/>"#,
        path.trim_start()
    );
    for &k in chords {
        let (x1, y1) = map(v[k]);
        let (x2, y2) = map(v[(k + 1) % n]);
        let _ = writeln!(
            out,
            r#"  <line x1="{x1:.3}" y1="{y1:.3}" x2="{x2:.3}" y2="{y2:.3}" stroke="grey" stroke-dasharray="6,4"/>"#
        );
    }
    let (ox, oy) = map(Complex64::new(0.0, 0.0));
    let _ = writeln!(out, r#"  <circle cx="{ox:.3}" cy="{oy:.3}" r="4" fill="red"/>"#);
    out.push_str("</svg>\n");
    out
}

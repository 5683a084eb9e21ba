use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use super::{Interpolation, QuantileKind, QuantileSpec};
use crate::quadrature::{push_graded, push_regular};

/// `tail(theta_s, dir, delta)`: integral of `phi` over the one-sided
/// interval between `theta_s` and `theta_s + dir * delta`.
pub type TailMass = Arc<dyn Fn(f64, f64, f64) -> f64 + Send + Sync>;

type Eval = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A real `2 pi`-periodic function on the circle, prescribed as the real
/// part of the boundary values of the mapping function.
#[derive(Clone)]
pub struct BoundaryFunction {
    label: String,
    eval: Eval,
    even_symmetric: bool,
    singular_endpoints: Vec<f64>,
    jumps: Vec<f64>,
    kinks: Vec<f64>,
    tail_mass: Option<TailMass>,
    embeddable: bool,
    quantile: Option<QuantileSpec>,
}

impl fmt::Debug for BoundaryFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BoundaryFunction")
            .field("label", &self.label)
            .field("even_symmetric", &self.even_symmetric)
            .field("singular_endpoints", &self.singular_endpoints)
            .field("jumps", &self.jumps.len())
            .field("embeddable", &self.embeddable)
            .finish()
    }
}

/// Smooth piece of the circle between consecutive breakpoints.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Piece {
    pub a: f64,
    pub b: f64,
    pub singular_a: bool,
    pub singular_b: bool,
}

/// Reduces an angle to `(-pi, pi]`.
pub(crate) fn wrap_angle(theta: f64) -> f64 {
    let mut t = theta - 2.0 * PI * (theta / (2.0 * PI)).round();
    if t <= -PI {
        t += 2.0 * PI;
    }
    if t > PI {
        t -= 2.0 * PI;
    }
    t
}

impl BoundaryFunction {
    pub(crate) fn from_quantile(spec: QuantileSpec) -> Self {
        let support = spec.support();
        let mut singular = Vec::new();
        if support.lower == f64::NEG_INFINITY {
            singular.push(0.0);
        }
        if support.upper == f64::INFINITY {
            singular.push(PI);
        }
        let mut jumps = Vec::new();
        // folding creates a kink at theta = 0
        let mut kinks = vec![0.0];
        if let QuantileKind::Table(t) = spec.kind() {
            for k in 0..t.u().len() - 1 {
                let theta = PI * t.u()[k];
                match t.interpolation() {
                    Interpolation::Step if t.q()[k] != t.q()[k + 1] => {
                        jumps.extend([theta, -theta]);
                    }
                    Interpolation::Linear => kinks.extend([theta, -theta]),
                    _ => {}
                }
            }
        }
        jumps.sort_by(f64::total_cmp);
        kinks.sort_by(f64::total_cmp);
        let tail_spec = spec.clone();
        let tail: TailMass = Arc::new(move |theta_s: f64, _dir: f64, delta: f64| {
            let x = (delta / PI).min(1.0);
            if wrap_angle(theta_s).abs() < 0.5 * PI {
                PI * tail_spec.partial_integral(0.0, x)
            } else {
                PI * tail_spec.partial_integral(1.0 - x, 1.0)
            }
        });
        let eval_spec = spec.clone();
        Self {
            label: spec.builtin_id().to_string(),
            eval: Arc::new(move |theta: f64| eval_spec.eval_raw(theta.abs() / PI)),
            even_symmetric: true,
            singular_endpoints: singular,
            jumps,
            kinks,
            tail_mass: Some(tail),
            embeddable: true,
            quantile: Some(spec),
        }
    }

    /// `phi(theta) = cos(theta)`; its Schwarz integral is the identity map.
    pub fn cosine() -> Self {
        Self::custom("cos", true, |t: f64| t.cos())
    }

    pub fn sine() -> Self {
        Self::custom("sin", false, |t: f64| t.sin())
    }

    /// `c0 + sum_n cos[n-1] cos(n theta) + sin[n-1] sin(n theta)`.
    pub fn trig_polynomial(c0: f64, cos: Vec<f64>, sin: Vec<f64>) -> Self {
        let even = sin.iter().all(|&s| s == 0.0);
        Self::custom("trig-polynomial", even, move |t: f64| {
            let mut acc = c0;
            for (k, c) in cos.iter().enumerate() {
                acc += c * ((k + 1) as f64 * t).cos();
            }
            for (k, s) in sin.iter().enumerate() {
                acc += s * ((k + 1) as f64 * t).sin();
            }
            acc
        })
    }

    /// `phi(t) = -1 / (4 sin^2(t/2))`, the real part of the radial limit of
    /// the Koebe function. Not integrable, hence never embeddable.
    pub fn koebe() -> Self {
        let mut f = Self::custom("koebe", true, |t: f64| {
            let s = (0.5 * t).sin();
            -1.0 / (4.0 * s * s)
        });
        f.singular_endpoints = vec![0.0];
        f.embeddable = false;
        f
    }

    pub fn custom<F>(label: &str, even_symmetric: bool, f: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            label: label.to_string(),
            eval: Arc::new(f),
            even_symmetric,
            singular_endpoints: Vec::new(),
            jumps: Vec::new(),
            kinks: Vec::new(),
            tail_mass: None,
            embeddable: true,
            quantile: None,
        }
    }

    /// Declares singular points (only `0` and `pi` are meaningful) and an
    /// optional closed-form tail.
    pub fn with_singularities(mut self, points: Vec<f64>, tail: Option<TailMass>) -> Self {
        self.singular_endpoints = points;
        self.tail_mass = tail;
        self
    }

    pub fn with_jumps(mut self, mut jumps: Vec<f64>) -> Self {
        jumps.iter_mut().for_each(|j| *j = wrap_angle(*j));
        jumps.sort_by(f64::total_cmp);
        self.jumps = jumps;
        self
    }

    /// Scales the function; tails scale along.
    pub fn scaled(&self, factor: f64) -> Self {
        let inner = self.eval.clone();
        let mut out = self.clone();
        out.label = format!("{}*{factor}", self.label);
        out.eval = Arc::new(move |t| factor * inner(t));
        out.tail_mass = self.tail_mass.clone().map(|tail| {
            Arc::new(move |s: f64, d: f64, delta: f64| factor * tail(s, d, delta)) as TailMass
        });
        out.quantile = None;
        out
    }

    pub fn phi(&self, theta: f64) -> f64 {
        (self.eval)(wrap_angle(theta))
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn even_symmetric(&self) -> bool {
        self.even_symmetric
    }

    pub fn singular_endpoints(&self) -> &[f64] {
        &self.singular_endpoints
    }

    pub fn jumps(&self) -> &[f64] {
        &self.jumps
    }

    /// Points where `phi` is continuous but not smooth.
    pub fn kinks(&self) -> &[f64] {
        &self.kinks
    }

    pub fn is_embeddable(&self) -> bool {
        self.embeddable
    }

    pub fn quantile(&self) -> Option<&QuantileSpec> {
        self.quantile.as_ref()
    }

    pub fn has_singularities(&self) -> bool {
        !self.singular_endpoints.is_empty()
    }

    pub(crate) fn is_singular_at(&self, theta: f64) -> bool {
        let t = wrap_angle(theta);
        self.singular_endpoints.iter().any(|&s| {
            let s = wrap_angle(s);
            (t - s).abs() < 1e-15 || (s == PI && t == -PI)
        })
    }

    pub(crate) fn tail_mass(&self, theta_s: f64, dir: f64, delta: f64) -> f64 {
        self.tail_mass.as_ref().map_or(0.0, |t| t(theta_s, dir, delta))
    }

    /// Splits `[-pi, pi]` at singular points, jumps and kinks.
    pub(crate) fn pieces(&self) -> Vec<Piece> {
        let mut cuts = vec![-PI, 0.0, PI];
        for &s in &self.singular_endpoints {
            let s = wrap_angle(s);
            if s != PI {
                cuts.push(s);
            }
        }
        cuts.extend(self.jumps.iter().chain(&self.kinks).copied().filter(|j| j.abs() < PI));
        cuts.sort_by(f64::total_cmp);
        cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
        cuts.windows(2)
            .map(|w| Piece {
                a: w[0],
                b: w[1],
                singular_a: self.is_singular_at(w[0]),
                singular_b: self.is_singular_at(w[1]),
            })
            .collect()
    }

    /// Composite rule for `int_{-pi}^{pi} f(theta) d theta`, graded toward
    /// singular points down to distance `floor`. Also returns the
    /// `(theta_s, dir, floor)` ends where graded panels stop.
    pub(crate) fn circle_rule(&self, floor: f64, max_width: f64) -> (Vec<(f64, f64)>, Vec<(f64, f64, f64)>) {
        let mut rule = Vec::new();
        let mut ends = Vec::new();
        let floor_at = |anchor: f64| floor.max(anchor.abs() * 4.0 * f64::EPSILON);
        for p in self.pieces() {
            let mid = 0.5 * (p.a + p.b);
            let half = 0.5 * (p.b - p.a);
            match (p.singular_a, p.singular_b) {
                (false, false) => push_regular(p.a, p.b, max_width, &mut rule),
                (true, false) => {
                    push_graded(p.a, 1.0, floor_at(p.a), half, &mut rule);
                    push_regular(mid, p.b, max_width, &mut rule);
                    ends.push((p.a, 1.0, floor_at(p.a)));
                }
                (false, true) => {
                    push_regular(p.a, mid, max_width, &mut rule);
                    push_graded(p.b, -1.0, floor_at(p.b), half, &mut rule);
                    ends.push((p.b, -1.0, floor_at(p.b)));
                }
                (true, true) => {
                    push_graded(p.a, 1.0, floor_at(p.a), half, &mut rule);
                    push_graded(p.b, -1.0, floor_at(p.b), half, &mut rule);
                    ends.push((p.a, 1.0, floor_at(p.a)));
                    ends.push((p.b, -1.0, floor_at(p.b)));
                }
            }
        }
        (rule, ends)
    }
}

/// Exit CDF of planar Brownian motion from the Koebe domain
/// `C \ (-inf, -1/4]`: `F(w) = 1 - (2/pi) arctan(sqrt(-1 - 4w))`.
pub fn koebe_exit_cdf(w: f64) -> f64 {
    if w >= -0.25 {
        return 1.0;
    }
    1.0 - 2.0 / PI * (-1.0 - 4.0 * w).sqrt().atan()
}

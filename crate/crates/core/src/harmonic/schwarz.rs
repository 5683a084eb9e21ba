use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::TrigSeries;
use crate::error::{Error, Result};
use crate::quantile::{BoundaryFunction, GRADED_FLOOR};

/// `z = r e^{i theta}` with `r < 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiscPoint {
    r: f64,
    theta: f64,
}

impl DiscPoint {
    pub fn new(r: f64, theta: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&r) {
            return Err(Error::Domain(format!(
                "radius {r} is not interior; use boundary_value on the circle"
            )));
        }
        Ok(Self { r, theta: theta.rem_euclid(2.0 * PI) })
    }

    pub fn from_complex(z: Complex64) -> Result<Self> {
        Self::new(z.norm(), z.arg())
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn to_complex(&self) -> Complex64 {
        Complex64::from_polar(self.r, self.theta)
    }
}

/// `G(z) = c0 + sum (c_n - i s_n) z^n` by Horner's rule.
pub fn schwarz_eval(s: &TrigSeries, z: DiscPoint) -> Complex64 {
    let z = z.to_complex();
    let coeffs = s.analytic_coeffs();
    coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, a| acc * z + a)
}

/// `phi_N(theta) + i H{phi}_N(theta)` from the truncated series.
pub fn boundary_value(s: &TrigSeries, theta: f64) -> Complex64 {
    let step = Complex64::from_polar(1.0, theta);
    let mut rot = step;
    let mut acc = Complex64::new(s.c0(), 0.0);
    for (c, sn) in s.cos_coeffs().iter().zip(s.sin_coeffs()) {
        acc += Complex64::new(*c, -*sn) * rot;
        rot *= step;
    }
    acc
}

/// Direct quadrature of the Schwarz kernel against `phi`. Slow and
/// ill-conditioned as `|z| -> 1`; kept as an independent check on the
/// series path.
pub fn schwarz_quadrature(phi: &BoundaryFunction, z: DiscPoint) -> Complex64 {
    let zc = z.to_complex();
    let width = (0.5 * (1.0 - z.r())).clamp(1e-3, 0.1);
    let (rule, ends) = phi.circle_rule(GRADED_FLOOR, width);
    let kernel = |t: f64| {
        let e = Complex64::from_polar(1.0, t);
        (e + zc) / (e - zc)
    };
    let mut acc = Complex64::new(0.0, 0.0);
    for (t, w) in rule {
        acc += kernel(t) * (w * phi.phi(t));
    }
    for (s, dir, floor) in ends {
        acc += kernel(s) * phi.tail_mass(s, dir, floor);
    }
    acc / (2.0 * PI)
}

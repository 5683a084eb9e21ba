use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{ExitSample, Method};
use crate::error::{Error, Result};
use crate::geometry::{DomainModel, Membership};
use crate::harmonic::{boundary_value, TrigSeries};
use crate::quantile::BoundaryFunction;

pub const DEFAULT_EULER_STEP: f64 = 1e-4;
pub const DEFAULT_EULER_BUDGET: u64 = 100_000_000;
pub const DEFAULT_EPS_SHELL_RELATIVE: f64 = 1e-6;
pub const DEFAULT_WOS_BUDGET: u64 = 1_000_000;

/// `G(e^{i theta})` for `theta` uniform on `(-pi, pi)`: by conformal
/// invariance this is the exit position from `G(D)` started at `G(0) = 0`.
pub fn exact_exit_sample<R: Rng + ?Sized>(s: &TrigSeries, rng: &mut R) -> ExitSample {
    let theta = rng.random_range(-PI..PI);
    ExitSample::new(boundary_value(s, theta), None, Method::Exact)
}

/// `phi(theta)` for `theta` uniform: the real exit coordinate, read straight
/// off the boundary function with no series in between.
pub fn boundary_function_sample<R: Rng + ?Sized>(phi: &BoundaryFunction, rng: &mut R) -> f64 {
    phi.phi(rng.random_range(-PI..PI))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EulerOptions {
    pub h: f64,
    pub max_steps: u64,
}

impl Default for EulerOptions {
    fn default() -> Self {
        Self { h: DEFAULT_EULER_STEP, max_steps: DEFAULT_EULER_BUDGET }
    }
}

/// Gaussian steps of variance `h` per coordinate from the origin until the
/// walk leaves the domain; `tau = h * steps`.
pub fn euler_exit_sample<R: Rng + ?Sized>(domain: &DomainModel, opts: &EulerOptions, rng: &mut R) -> Result<ExitSample> {
    if !(opts.h > 0.0) {
        return Err(Error::InvalidArgument(format!("Euler step must be positive, got {}", opts.h)));
    }
    let sd = opts.h.sqrt();
    let mut z = Complex64::new(0.0, 0.0);
    for step in 1..=opts.max_steps {
        let dx: f64 = rng.sample(StandardNormal);
        let dy: f64 = rng.sample(StandardNormal);
        let next = z + Complex64::new(sd * dx, sd * dy);
        if domain.classify(next) != Membership::Inside {
            let exit = domain.first_crossing(z, next);
            return Ok(ExitSample::new(exit, Some(opts.h * step as f64), Method::Euler));
        }
        z = next;
    }
    Err(Error::StepBudget { budget: opts.max_steps })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WosOptions {
    /// Absolute shell width; `None` means `1e-6` times the bounding-box diagonal.
    pub eps_shell: Option<f64>,
    pub max_steps: u64,
}

impl Default for WosOptions {
    fn default() -> Self {
        Self { eps_shell: None, max_steps: DEFAULT_WOS_BUDGET }
    }
}

impl WosOptions {
    pub fn shell(&self, domain: &DomainModel) -> f64 {
        self.eps_shell.unwrap_or(DEFAULT_EPS_SHELL_RELATIVE * domain.bounding_box().diagonal())
    }
}

/// Walk on spheres from the origin; returns the boundary point nearest to
/// where the walk enters the shell.
pub fn wos_position_sample<R: Rng + ?Sized>(domain: &DomainModel, opts: &WosOptions, rng: &mut R) -> Result<ExitSample> {
    let eps = opts.shell(domain);
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument(format!("shell width must be positive, got {eps}")));
    }
    let mut z = Complex64::new(0.0, 0.0);
    for _ in 0..opts.max_steps {
        let near = domain.nearest_boundary_point(z);
        if near.distance < eps {
            return Ok(ExitSample::new(near.point, None, Method::WosHybrid));
        }
        let angle = rng.random_range(-PI..PI);
        z += Complex64::from_polar(near.distance, angle);
    }
    Err(Error::StepBudget { budget: opts.max_steps })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::BoundaryCurve;
    use crate::montecarlo::RngStream;

    fn disc() -> DomainModel {
        DomainModel::new(BoundaryCurve::circle(1.0, 4096).unwrap()).unwrap()
    }

    #[test]
    fn cosine_samples_lie_on_the_circle() {
        let s = TrigSeries::new(0.0, vec![1.0], vec![0.0], 0).unwrap();
        let mut rng = RngStream::new(1, 0).rng();
        for _ in 0..1000 {
            let x = exact_exit_sample(&s, &mut rng);
            assert!((x.position.norm() - 1.0).abs() < 1e-14);
            assert!(x.tau.is_none());
            assert_eq!(x.method, Method::Exact);
        }
    }

    #[test]
    fn same_stream_same_paths() {
        let d = disc();
        let opts = EulerOptions { h: 1e-3, ..Default::default() };
        let run = || {
            let mut rng = RngStream::new(42, 7).rng();
            (0..20).map(|_| euler_exit_sample(&d, &opts, &mut rng).unwrap()).collect::<Vec<_>>()
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn euler_exit_is_on_the_boundary() {
        let d = disc();
        let mut rng = RngStream::new(3, 0).rng();
        for _ in 0..200 {
            let x = euler_exit_sample(&d, &EulerOptions { h: 1e-3, ..Default::default() }, &mut rng).unwrap();
            assert!((x.position.norm() - 1.0).abs() < 1e-6, "{}", x.position);
            assert!(x.tau.unwrap() > 0.0);
        }
    }

    #[test]
    fn euler_budget_is_enforced() {
        let d = disc();
        let mut rng = RngStream::new(3, 0).rng();
        let err = euler_exit_sample(&d, &EulerOptions { h: 1e-6, max_steps: 10 }, &mut rng).unwrap_err();
        assert!(matches!(err, Error::StepBudget { budget: 10 }));
        assert!(euler_exit_sample(&d, &EulerOptions { h: 0.0, max_steps: 10 }, &mut rng).is_err());
    }

    #[test]
    fn wos_lands_within_the_shell() {
        let d = disc();
        let mut rng = RngStream::new(5, 0).rng();
        for _ in 0..200 {
            let x = wos_position_sample(&d, &WosOptions::default(), &mut rng).unwrap();
            assert!((x.position.norm() - 1.0).abs() < 1e-6);
            assert!(x.tau.is_none());
        }
    }

    #[test]
    fn koebe_boundary_samples_are_below_minus_quarter() {
        let phi = BoundaryFunction::koebe();
        let mut rng = RngStream::new(5, 0).rng();
        for _ in 0..1000 {
            assert!(boundary_function_sample(&phi, &mut rng) <= -0.25);
        }
    }
}

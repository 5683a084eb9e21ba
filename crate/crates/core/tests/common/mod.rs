#![allow(dead_code)]

use skorokhod_core::geometry::{build_curve_for, BoundaryCurve, DomainModel, TruncationPolicy};
use skorokhod_core::harmonic::{analyze, boundary_series, TrigSeries};
use skorokhod_core::quantile::{BoundaryFunction, QuantileSpec};

pub struct Built {
    pub phi: BoundaryFunction,
    pub series: TrigSeries,
    /// Series behind the curve and the exact sampler.
    pub shape: TrigSeries,
    pub domain: DomainModel,
}

pub fn build(spec: QuantileSpec, n: usize, m: usize, m_b: usize) -> Built {
    let spec = spec.into_validated(4096, None).unwrap();
    let phi = spec.fold_to_boundary().unwrap();
    let series = analyze(&phi, n, m).unwrap();
    let shape = boundary_series(&phi, &series);
    let curve = build_curve_for(&phi, &shape, m_b, TruncationPolicy::default()).unwrap();
    let domain = DomainModel::new(curve).unwrap();
    Built { phi, series, shape, domain }
}

pub fn uniform() -> Built {
    build(QuantileSpec::uniform(1.0).unwrap(), 2048, 65536, 16384)
}

pub fn disc() -> DomainModel {
    DomainModel::new(BoundaryCurve::circle(1.0, 16384).unwrap()).unwrap()
}

pub fn uniform_cdf(x: f64) -> f64 {
    ((x + 1.0) / 2.0).clamp(0.0, 1.0)
}

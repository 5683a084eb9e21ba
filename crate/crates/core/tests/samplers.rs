mod common;

use std::f64::consts::PI;

use num_complex::Complex64;
use skorokhod_core::geometry::{build_curve_for, is_simple, BoundaryCurve, DomainModel, TruncationPolicy};
use skorokhod_core::harmonic::{analyze, boundary_series, TrigSeries};
use skorokhod_core::montecarlo::{
    collect_samples, euler_exit_sample, exact_exit_sample, expected_tau_series, tau_moment, wos_position_sample,
    EulerOptions, ExitSample, WosOptions,
};
use skorokhod_core::quantile::QuantileSpec;
use skorokhod_core::stats::{chi_square_uniform, ks_one_sample, ks_two_sample, BootstrapOptions, EcdfView};
use skorokhod_core::Error;

fn re(samples: &[ExitSample]) -> EcdfView {
    EcdfView::new(&samples.iter().map(|s| s.position.re).collect::<Vec<_>>()).unwrap()
}

fn arg(samples: &[ExitSample]) -> EcdfView {
    EcdfView::new(&samples.iter().map(|s| s.position.arg()).collect::<Vec<_>>()).unwrap()
}

fn angle_cdf(t: f64) -> f64 {
    ((t + PI) / (2.0 * PI)).clamp(0.0, 1.0)
}

#[test]
fn exact_uniform_matches_mu() {
    let b = common::uniform();
    let s = collect_samples(100_000, 1, |rng| Ok(exact_exit_sample(&b.series, rng))).unwrap();
    let r = ks_one_sample("exact", &re(&s), common::uniform_cdf).unwrap();
    assert!(r.pass, "{r:?}");
}

#[test]
fn heavy_tail_exact_mean_is_zero() {
    let b = common::build(QuantileSpec::heavy_tail(), 2048, 65536, 4096);
    let s = collect_samples(100_000, 2, |rng| Ok(exact_exit_sample(&b.shape, rng))).unwrap();
    let x: Vec<f64> = s.iter().map(|s| s.position.re).collect();
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let sd = (x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    assert!(mean.abs() < 3.0 * sd / n.sqrt(), "mean {mean}, se {}", sd / n.sqrt());
}

#[test]
fn heavy_tail_needs_fejer_summation() {
    let spec = QuantileSpec::heavy_tail().into_validated(4096, None).unwrap();
    let phi = spec.fold_to_boundary().unwrap();
    let raw = analyze(&phi, 2048, 65536).unwrap();
    let shape = boundary_series(&phi, &raw);
    assert_ne!(shape, raw);

    // raw partial sums ring near the singular end and the image curve loops
    let looped = build_curve_for(&phi, &raw, 16384, TruncationPolicy::default()).unwrap();
    assert!(!is_simple(&looped).unwrap().simple);
    let curve = build_curve_for(&phi, &shape, 16384, TruncationPolicy::default()).unwrap();
    assert!(is_simple(&curve).unwrap().simple);

    let draw = |s: &TrigSeries| collect_samples(100_000, 4, |rng| Ok(exact_exit_sample(s, rng))).unwrap();
    let cdf = |x: f64| spec.cdf(x);
    assert!(!ks_one_sample("raw", &re(&draw(&raw)), cdf).unwrap().pass);
    let r = ks_one_sample("fejer", &re(&draw(&shape)), cdf).unwrap();
    assert!(r.pass, "{r:?}");

    let uniform = common::uniform();
    assert_eq!(uniform.shape, uniform.series);
}

#[test]
fn expected_tau_from_coefficients() {
    let b = common::uniform();
    let t = expected_tau_series(&b.series).unwrap();
    assert!((t.value - 1.0 / 3.0).abs() < 1e-6, "{}", t.value);
    assert_eq!(t.trace.len(), 3);
    let cos = TrigSeries::new(0.0, vec![1.0], vec![0.0], 0).unwrap();
    assert_eq!(expected_tau_series(&cos).unwrap().value, 0.5);
    let heavy = common::build(QuantileSpec::heavy_tail(), 2048, 65536, 1024);
    assert!(matches!(expected_tau_series(&heavy.series), Err(Error::NotAvailable { .. })));
}

#[test]
fn disc_calibration_and_bias_in_h() {
    let d = common::disc();
    let run = |h: f64, n: usize| {
        let opts = EulerOptions { h, ..Default::default() };
        collect_samples(n, 3, |rng| euler_exit_sample(&d, &opts, rng)).unwrap()
    };
    let fine = run(1e-4, 10_000);
    let boot = BootstrapOptions::default();
    let et = tau_moment(&fine, 2.0, &boot).unwrap();
    assert!((et.value - 0.5).abs() < 0.03 * 0.5, "{et:?}");
    let r = ks_one_sample("angle", &arg(&fine), angle_cdf).unwrap();
    assert!(r.pass, "{r:?}");

    let coarse = tau_moment(&run(1e-3, 10_000), 2.0, &boot).unwrap();
    assert!(coarse.value > et.value && et.value > 0.5 - 0.005, "{} {}", coarse.value, et.value);

    // Jensen: E[tau^{1/2}] <= sqrt(E[tau]).
    let half = tau_moment(&fine, 1.0, &boot).unwrap();
    assert!(half.value <= et.value.sqrt());
    assert!(half.ci.0 < half.value && half.value < half.ci.1);
}

#[test]
fn euler_and_wos_agree_with_exact_on_uniform() {
    let b = common::uniform();
    let exact = collect_samples(10_000, 4, |rng| Ok(exact_exit_sample(&b.series, rng))).unwrap();
    let opts = EulerOptions::default();
    let euler = collect_samples(10_000, 5, |rng| euler_exit_sample(&b.domain, &opts, rng)).unwrap();
    let r = ks_two_sample("euler_vs_exact", &re(&euler), &re(&exact)).unwrap();
    assert!(r.pass, "{r:?}");

    let ito = tau_moment(&euler, 2.0, &BootstrapOptions::default()).unwrap();
    let series = expected_tau_series(&b.series).unwrap().value;
    assert!((ito.value - series).abs() < 0.05 * series, "{} vs {series}", ito.value);

    let wos = collect_samples(10_000, 6, |rng| wos_position_sample(&b.domain, &WosOptions::default(), rng)).unwrap();
    let r = ks_two_sample("wos_vs_exact_re", &re(&wos), &re(&exact)).unwrap();
    assert!(r.pass, "{r:?}");
    let r = ks_two_sample("wos_vs_exact_arg", &arg(&wos), &arg(&exact)).unwrap();
    assert!(r.pass, "{r:?}");
}

#[test]
fn wos_on_disc_and_square() {
    let d = common::disc();
    let s = collect_samples(20_000, 7, |rng| wos_position_sample(&d, &WosOptions::default(), rng)).unwrap();
    assert!(ks_one_sample("disc_angle", &arg(&s), angle_cdf).unwrap().pass);

    let c = |x, y| Complex64::new(x, y);
    let square = DomainModel::new(BoundaryCurve::from_vertices(vec![c(1., -1.), c(1., 1.), c(-1., 1.), c(-1., -1.)]).unwrap()).unwrap();
    let s = collect_samples(20_000, 8, |rng| wos_position_sample(&square, &WosOptions::default(), rng)).unwrap();
    let mut counts = [0u64; 4];
    for x in &s {
        let q = ((x.position.arg() + PI) / (0.5 * PI)).floor() as usize;
        counts[q.min(3)] += 1;
    }
    let chi = chi_square_uniform(&counts).unwrap();
    assert!(chi.p_value > 0.01, "{counts:?} {chi:?}");
}

mod common;

use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand::Rng;
use skorokhod_core::geometry::{build_curve, TruncationPolicy};
use skorokhod_core::harmonic::{analyze, boundary_value, hilbert_pv, hilbert_series, schwarz_eval, DiscPoint, TrigSeries};
use skorokhod_core::quantile::{BoundaryFunction, Interpolation, QuantileSpec, QuantileTable};
use skorokhod_core::solvability::{
    hilbert_l1, lp_norm, zygmund_functional, LogVariant, NormValue, DEFAULT_LEVELS, DEFAULT_P_GRID,
};
use skorokhod_core::stats::{ks_one_sample, EcdfView};

fn centred_table(mut q: Vec<f64>, step: bool) -> QuantileSpec {
    q.sort_by(f64::total_cmp);
    let m = q.len();
    let u: Vec<f64> = (1..=m).map(|k| k as f64 / m as f64).collect();
    let interp = if step { Interpolation::Step } else { Interpolation::Linear };
    let raw = QuantileSpec::from_table(QuantileTable::new(u.clone(), q.clone(), interp).unwrap()).unwrap();
    let mean = raw.numerical_mean();
    let q: Vec<f64> = q.iter().map(|v| v - mean).collect();
    QuantileSpec::from_table(QuantileTable::new(u, q, interp).unwrap()).unwrap()
}

fn trig(c: &[f64], s: &[f64]) -> TrigSeries {
    TrigSeries::new(0.0, c.to_vec(), s.to_vec(), 0).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn validated_tables_are_monotone_and_fold_evenly(
        q in prop::collection::vec(-5.0f64..5.0, 2..12),
        step in any::<bool>(),
        thetas in prop::collection::vec(0.0f64..PI, 20),
    ) {
        let spec = centred_table(q, step);
        let report = spec.validate(256, None);
        prop_assert!(report.passed(), "{:?}", report);
        let spec = spec.into_validated(256, None).unwrap();
        let grid: Vec<f64> = (1..256).map(|k| spec.quantile_eval(k as f64 / 256.0).unwrap()).collect();
        prop_assert!(grid.windows(2).all(|w| w[0] <= w[1]));
        let phi = spec.fold_to_boundary().unwrap();
        for t in thetas {
            prop_assert_eq!(phi.phi(t), phi.phi(-t));
        }
    }

    #[test]
    fn hilbert_twice_is_minus_identity(
        c in prop::collection::vec(-10.0f64..10.0, 1..40),
        s in prop::collection::vec(-10.0f64..10.0, 40),
    ) {
        let series = trig(&c, &s[..c.len()]);
        let twice = hilbert_series(&hilbert_series(&series));
        prop_assert_eq!(twice.c0(), 0.0);
        for (a, b) in twice.cos_coeffs().iter().zip(series.cos_coeffs()) {
            prop_assert_eq!(*a, -*b);
        }
        for (a, b) in twice.sin_coeffs().iter().zip(series.sin_coeffs()) {
            prop_assert_eq!(*a, -*b);
        }
    }

    #[test]
    fn parseval_for_trig_polynomials(
        c0 in -2.0f64..2.0,
        c in prop::collection::vec(-1.0f64..1.0, 1..16),
        s in prop::collection::vec(-1.0f64..1.0, 16),
    ) {
        let series = TrigSeries::new(c0, c.clone(), s[..c.len()].to_vec(), 0).unwrap();
        let m = 64;
        let grid = series.boundary_grid(m);
        let mean_sq = grid.iter().map(|w| w.re * w.re).sum::<f64>() / m as f64;
        let want = c0 * c0 + 0.5 * c.iter().zip(&s).map(|(a, b)| a * a + b * b).sum::<f64>();
        prop_assert!((mean_sq - want).abs() < 1e-10);
    }

    #[test]
    fn pv_matches_series(
        c in prop::collection::vec(-1.0f64..1.0, 1..6),
        s in prop::collection::vec(-1.0f64..1.0, 6),
        xs in prop::collection::vec(-PI..PI, 5),
    ) {
        let s = &s[..c.len()];
        let phi = BoundaryFunction::trig_polynomial(0.0, c.clone(), s.to_vec());
        let series = trig(&c, s);
        for x in xs {
            let pv = hilbert_pv(&phi, x, &[]).value().unwrap();
            let want = boundary_value(&series, x).im;
            prop_assert!((pv - want).abs() < 1e-4, "x={} pv={} series={}", x, pv, want);
        }
    }

    #[test]
    fn zygmund_implies_hilbert_l1_for_bounded_phi(
        c in prop::collection::vec(-1.0f64..1.0, 1..6),
        s in prop::collection::vec(-1.0f64..1.0, 6),
    ) {
        let s = &s[..c.len()];
        let phi = BoundaryFunction::trig_polynomial(0.0, c.clone(), s.to_vec());
        let z = zygmund_functional(&phi, DEFAULT_LEVELS, LogVariant::LogPlus);
        prop_assert!(z.value.is_finite());
        let h = hilbert_l1(&analyze(&phi, 64, 512).unwrap(), &phi).unwrap();
        prop_assert!(h.value.is_finite());
    }
}

#[test]
fn quantile_eval_pushes_uniform_to_mu() {
    let spec = QuantileSpec::uniform(1.0).unwrap().into_validated(1024, None).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let x: Vec<f64> = (0..100_000)
        .map(|_| spec.quantile_clamped(rng.random::<f64>(), 1e-12))
        .collect();
    let r = ks_one_sample("q(U)", &EcdfView::new(&x).unwrap(), |t| spec.cdf(t)).unwrap();
    assert!(r.pass, "{r:?}");

    let heavy = QuantileSpec::heavy_tail().into_validated(1024, None).unwrap();
    let x: Vec<f64> = (0..100_000)
        .map(|_| heavy.quantile_clamped(rng.random::<f64>(), 1e-12))
        .collect();
    let r = ks_one_sample("heavy q(U)", &EcdfView::new(&x).unwrap(), |t| heavy.cdf(t)).unwrap();
    assert!(r.pass, "{r:?}");
}

#[test]
fn boundary_real_part_is_monotone_in_abs_theta() {
    let spec = QuantileSpec::uniform(1.0).unwrap().into_validated(1024, None).unwrap();
    let s = analyze(&spec.fold_to_boundary().unwrap(), 1024, 8192).unwrap();
    let grid = s.boundary_grid(4096);
    let half: Vec<f64> = grid[..=2048].iter().map(|w| w.re).collect();
    assert!(half.windows(2).all(|w| w[1] >= w[0] - 1e-12));
}

fn builtins() -> Vec<(&'static str, BoundaryFunction)> {
    let fold = |s: QuantileSpec| s.into_validated(1024, None).unwrap().fold_to_boundary().unwrap();
    vec![
        ("uniform", fold(QuantileSpec::uniform(1.0).unwrap())),
        ("two-point", fold(QuantileSpec::two_point(-1.0, 2.0).unwrap())),
        ("heavy-tail", fold(QuantileSpec::heavy_tail())),
        ("koebe", BoundaryFunction::koebe()),
        ("cos", BoundaryFunction::cosine()),
    ]
}

#[test]
fn lp_finiteness_is_monotone_in_p() {
    for (name, phi) in builtins() {
        let finite: Vec<bool> = DEFAULT_P_GRID.iter().map(|&p| lp_norm(&phi, p, DEFAULT_LEVELS).value.is_finite()).collect();
        for w in finite.windows(2) {
            assert!(w[0] || !w[1], "{name}: {finite:?}");
        }
    }
}

#[test]
fn zygmund_class_is_scale_invariant() {
    for (name, phi) in builtins() {
        let base = zygmund_functional(&phi, DEFAULT_LEVELS, LogVariant::LogPlus).value.is_finite();
        for lambda in [0.1, 10.0] {
            let scaled = zygmund_functional(&phi.scaled(lambda), DEFAULT_LEVELS, LogVariant::LogPlus);
            assert_eq!(scaled.value.is_finite(), base, "{name} x {lambda}");
        }
    }
}

#[test]
fn diverging_traces_increase_at_the_end() {
    for (name, phi) in builtins() {
        let mut runs = vec![zygmund_functional(&phi, DEFAULT_LEVELS, LogVariant::LogPlus)];
        runs.extend(DEFAULT_P_GRID.iter().map(|&p| lp_norm(&phi, p, DEFAULT_LEVELS)));
        for r in runs.into_iter().filter(|r| r.value == NormValue::Diverging) {
            let tail: Vec<f64> = r.trace[r.trace.len() - 3..].iter().map(|t| t.value).collect();
            assert!(tail.windows(2).all(|w| !(w[1] <= w[0])), "{name}: {tail:?}");
        }
    }
}

#[test]
fn zygmund_implies_hilbert_l1_on_bounded_builtins() {
    for (name, phi) in builtins() {
        if phi.has_singularities() || !phi.jumps().is_empty() {
            continue;
        }
        assert!(zygmund_functional(&phi, DEFAULT_LEVELS, LogVariant::LogPlus).value.is_finite());
        let s = analyze(&phi, 2048, 16384).unwrap();
        assert!(hilbert_l1(&s, &phi).unwrap().value.is_finite(), "{name}");
    }
}

#[test]
fn heavy_tail_hilbert_l1_increments_shrink() {
    let (_, phi) = builtins().remove(2);
    let s = analyze(&phi, 2048, 65536).unwrap();
    let r = hilbert_l1(&s, &phi).unwrap();
    let v: Vec<f64> = r.trace.iter().map(|t| t.value).collect();
    assert_eq!(v.len(), 3);
    assert!(v[2] - v[1] < v[1] - v[0], "{v:?}");
}

#[test]
fn interior_images_lie_inside() {
    let b = common::uniform();
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for _ in 0..200 {
        let z = DiscPoint::new(0.95 * rng.random::<f64>().sqrt(), rng.random_range(-PI..PI)).unwrap();
        assert!(b.domain.is_inside(schwarz_eval(&b.series, z)), "{z:?}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn distance_never_exceeds_vertex_distance(r in 0.0f64..0.9, t in -PI..PI) {
        let spec = QuantileSpec::uniform(1.0).unwrap().into_validated(1024, None).unwrap();
        let s = analyze(&spec.fold_to_boundary().unwrap(), 256, 2048).unwrap();
        let domain = skorokhod_core::geometry::DomainModel::new(build_curve(&s, 1024, TruncationPolicy::None).unwrap()).unwrap();
        let w = schwarz_eval(&s, DiscPoint::new(r, t).unwrap());
        let d = domain.distance_to_boundary(w).unwrap().distance;
        for v in domain.curve().vertices() {
            prop_assert!(d <= (w - v).norm());
        }
        prop_assert!(d > 0.0);
    }

    #[test]
    fn even_phi_curves_are_reflection_symmetric(a in 0.1f64..5.0) {
        let spec = QuantileSpec::uniform(a).unwrap().into_validated(256, None).unwrap();
        let s = analyze(&spec.fold_to_boundary().unwrap(), 64, 512).unwrap();
        let c = build_curve(&s, 128, TruncationPolicy::None).unwrap();
        let v = c.vertices();
        for k in 1..128 {
            prop_assert!((v[128 - k] - v[k].conj()).norm() < 1e-12 * a);
        }
        prop_assert_eq!(c.winding_number(Complex64::new(0.0, 0.0)), 1);
    }
}

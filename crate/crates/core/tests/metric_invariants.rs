use finsler_core::classify::{classify_metric, GridSpec, Verdict, VERDICT_TOL};
use finsler_core::curvature::{FinslerMetric, TensorRoute};
use finsler_core::geometry::ManifoldModel;
use finsler_core::phi::{AdmissibleDomain, PhiModel, Regularity};
use finsler_core::sampling::sample_points;
use proptest::prelude::*;

fn flat(c0: f64) -> ManifoldModel {
    ManifoldModel::euclidean_conformal(c0, vec![0.6, 0.5, 0.4]).unwrap()
}

fn models() -> Vec<PhiModel> {
    vec![
        PhiModel::riemannian(),
        PhiModel::randers(),
        PhiModel::example1(1.0),
        PhiModel::example2(1.0, 1.0, 1.0).unwrap(),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn homogeneity_in_y(model in 0usize..4, seed in any::<u64>(), lambda in 0.2f64..5.0) {
        let metric = FinslerMetric::new(flat(1.0), models()[model].clone());
        let p = &sample_points(&metric, 1, seed).unwrap()[0];
        let h = metric.homogeneity(&p.x, &p.y, &[lambda]).unwrap();
        prop_assert!(h.f < 1e-12 && h.g < 1e-9 && h.spray < 1e-9, "{h:?}");
        prop_assert!(h.berwald.unwrap() < 1e-7, "{h:?}");
    }

    #[test]
    fn fundamental_tensor_is_symmetric(model in 0usize..4, seed in any::<u64>()) {
        let metric = FinslerMetric::new(flat(0.3), models()[model].clone());
        let p = &sample_points(&metric, 1, seed).unwrap()[0];
        let g = metric.fundamental_tensor(&p.x, &p.y, TensorRoute::ClosedForm).unwrap();
        prop_assert!((&g - g.transpose()).amax() <= 1e-14 * g.amax());
    }

    #[test]
    fn verdicts_are_monotone(a in -1.0f64..1.0, b in -1.0f64..1.0, c in 0.0f64..1.0) {
        let src = format!("1 + {a}*s + {b}*s^2 + {c}*b2*s^3");
        let dom = AdmissibleDomain::symmetric(f64::INFINITY, 0.5, 1.5, 0.5);
        let phi = PhiModel::custom(&src, dom, Regularity::Regular).unwrap();
        let class = classify_metric(&phi, &GridSpec::for_model(&phi, 8, 8), 3, 1.0, VERDICT_TOL);
        prop_assert!(class.verdicts.is_monotone());
    }
}

#[test]
fn verdicts_ignore_velocity_scale() {
    // residuals depend on (b², s) only, so a grid rebuilt from scaled
    // samples lands on the same verdicts
    for phi in models() {
        let spec = GridSpec::for_model(&phi, 10, 10);
        let a = classify_metric(&phi, &spec, 3, 1.0, VERDICT_TOL);
        let metric = FinslerMetric::new(flat(1.0), phi.clone());
        for p in sample_points(&metric, 5, 11).unwrap() {
            let scaled: Vec<f64> = p.y.iter().map(|v| 3.7 * v).collect();
            let q = metric.point(&p.x, &scaled).unwrap();
            assert!((q.s - p.s).abs() < 1e-12 && (q.b2 - p.b2).abs() < 1e-15);
        }
        let b = classify_metric(&phi, &spec, 3, 1.0, VERDICT_TOL);
        assert_eq!(a.verdicts, b.verdicts);
    }
}

#[test]
fn classifier_agrees_with_curvature() {
    let tol = VERDICT_TOL;
    for phi in models() {
        let class = classify_metric(&phi, &GridSpec::for_model(&phi, 20, 20), 3, 1.0, tol);
        let metric = FinslerMetric::new(flat(1.0), phi.clone());
        let (mut b, mut j) = (0.0f64, 0.0f64);
        for p in sample_points(&metric, 20, 5).unwrap() {
            let r = metric.report(&p.x, &p.y).unwrap();
            b = b.max(r.berwald_closed.unwrap().max_abs());
            j = j.max(r.mean_landsberg_closed.unwrap().max_abs());
        }
        if class.verdicts.is_weak_landsberg == Verdict::Holds {
            assert!(j <= 10.0 * tol, "{}: |J| = {j:e}", phi.name());
        } else {
            assert!(j > 10.0 * tol, "{}: |J| = {j:e}", phi.name());
        }
        if class.verdicts.is_berwald == Verdict::Holds {
            assert!(b <= 10.0 * tol, "{}: |B| = {b:e}", phi.name());
        }
    }
}

#[test]
fn flat_preset_has_constant_conformal_factor() {
    let m = flat(0.7);
    let pts: Vec<Vec<f64>> = vec![vec![0.0; 3], vec![1.0, -2.0, 0.5], vec![-0.3, 0.4, 3.0]];
    let report = m.closed_conformal_check(&pts, 1e-12).unwrap();
    assert!(report.holds);
    assert!(report.c_values.iter().all(|c| (c - 0.7).abs() < 1e-12));
}

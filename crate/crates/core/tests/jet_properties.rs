use finsler_core::jet::{mixed_partial, Jet, JetError, JetScalar};
use proptest::prelude::*;

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

fn scale(k: usize, t: f64) -> f64 {
    (1..=k).map(|i| i as f64 / t).product()
}

proptest! {
    #[test]
    fn polynomial_derivatives_are_exact(c in prop::array::uniform4(-3.0f64..3.0), t in -2.0f64..2.0) {
        // p(t) = c0 + c1 t + c2 t² + c3 t³
        let x = Jet::variable(t, 5).unwrap();
        let p = x * x * x * c[3] + x * x * c[2] + x * c[1] + c[0];
        prop_assert!(close(p.derivative(1), c[1] + 2.0 * c[2] * t + 3.0 * c[3] * t * t, 1e-13));
        prop_assert!(close(p.derivative(2), 2.0 * c[2] + 6.0 * c[3] * t, 1e-13));
        prop_assert!(close(p.derivative(3), 6.0 * c[3], 1e-13));
        prop_assert_eq!(p.derivative(4), 0.0);
    }

    #[test]
    fn exp_and_ln_are_inverse(t in 0.1f64..4.0) {
        let x = Jet::variable(t, 5).unwrap();
        let y = x.try_ln().unwrap().exp();
        for k in 0..=5 {
            // intermediate ln-derivatives grow like k!/t^k
            prop_assert!((y.derivative(k) - x.derivative(k)).abs() <= 1e-13 * (1.0 + scale(k, t)));
        }
    }

    #[test]
    fn sqrt_squares_back(t in 0.05f64..5.0) {
        let x = Jet::variable(t, 5).unwrap();
        let r = x.try_sqrt().unwrap();
        let back = r * r;
        for k in 0..=5 {
            prop_assert!((back.derivative(k) - x.derivative(k)).abs() <= 1e-13 * (1.0 + t * scale(k, t)));
        }
    }

    #[test]
    fn reciprocal_matches_closed_form(t in 0.2f64..3.0) {
        // dᵏ/dtᵏ 1/t = (-1)ᵏ k! / t^(k+1)
        let r = Jet::variable(t, 5).unwrap().try_recip().unwrap();
        let mut fact = 1.0;
        for k in 0..=5usize {
            if k > 0 {
                fact *= k as f64;
            }
            let expected = if k % 2 == 0 { 1.0 } else { -1.0 } * fact / t.powi(k as i32 + 1);
            prop_assert!(close(r.derivative(k), expected, 1e-11));
        }
    }

    #[test]
    fn mixed_partials_are_symmetric(p in prop::array::uniform3(-1.0f64..1.0)) {
        let f = |v: &[Jet]| -> Result<Jet, JetError> { Ok((v[0] * v[1]).exp() * (v[2] * v[2] + 1.0).try_sqrt()?) };
        let e = |i: usize| (0..3).map(|j| if i == j { 1.0 } else { 0.0 }).collect::<Vec<f64>>();
        let a = mixed_partial(f, &p, &[e(0), e(1), e(2)]).unwrap();
        let b = mixed_partial(f, &p, &[e(2), e(0), e(1)]).unwrap();
        prop_assert!(close(a, b, 1e-10));
        // ∂x∂y∂z of e^{xy}·sqrt(1+z²) = (1 + xy)e^{xy}·z/sqrt(1+z²)
        let (x, y, z) = (p[0], p[1], p[2]);
        let expected = (1.0 + x * y) * (x * y).exp() * z / (1.0 + z * z).sqrt();
        prop_assert!(close(a, expected, 1e-10));
    }
}

#[test]
fn order_above_limit_is_rejected() {
    assert!(Jet::variable(0.0, 6).is_err());
    assert!(Jet::variable(0.0, 5).is_ok());
}

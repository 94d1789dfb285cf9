//! The Berwald family `φ = ϕ̂(s²/(A + s²B))·C·s` with `A`, `B`, `C` built from
//! `θ(b²)` by quadrature.
//!
//! With `Λ(u) = ∫_{u_ref}^u wθ(w) dw` and `Â(u) = (u/u_ref)e^{-Λ(u)}`:
//!
//! ```text
//! A = a·Â        B = b + a·∫_{u_ref}^u θÂ        C = c·(u_ref/u)·e^{Λ/2}
//! ```
//!
//! The constants `(a, b, c)` are the free integration constants. Derivatives
//! in `u` come from the integrands through jet antiderivatives, so the Berwald
//! conditions hold exactly whatever the quadrature error in the anchors.

use std::collections::HashMap;
use std::sync::Mutex;

use nalgebra::{Matrix3, Vector3};
use serde::Serialize;

use crate::expr::Expr;
use crate::jet::{Jet, JetScalar, MAX_ORDER};
use crate::quadrature::adaptive_simpson;

use super::{AdmissibleDomain, PhiError, PhiModel, S_MARGIN};

const CACHE_LIMIT: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntegrationConstants {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl Default for IntegrationConstants {
    /// The constants of the definite integrals from `u_ref`.
    fn default() -> Self {
        IntegrationConstants {
            a: 1.0,
            b: 0.0,
            c: 1.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct BerwaldFamilySpec {
    pub varphi: Expr,
    pub theta: Expr,
    pub tol: f64,
    pub u_ref: f64,
    pub constants: IntegrationConstants,
    pub domain: AdmissibleDomain,
}

impl BerwaldFamilySpec {
    /// `varphi` is an expression in `t`, `theta` an expression in `b2`.
    pub fn new(varphi: &str, theta: &str) -> Result<Self, PhiError> {
        Ok(BerwaldFamilySpec {
            varphi: Expr::parse(varphi, &["t"])?,
            theta: Expr::parse(theta, &["b2"])?,
            tol: 1e-10,
            u_ref: 0.25,
            constants: IntegrationConstants::default(),
            domain: AdmissibleDomain::cone(0.5, 1.5, S_MARGIN, 1.0 - S_MARGIN),
        })
    }

    pub fn with_constants(mut self, constants: IntegrationConstants) -> Self {
        self.constants = constants;
        self
    }

    pub fn with_domain(mut self, domain: AdmissibleDomain) -> Self {
        self.domain = domain;
        self
    }

    pub fn describe(&self) -> String {
        format!("varphi={}, theta={}", self.varphi, self.theta)
    }
}

#[derive(Debug, Clone, Copy)]
struct Anchor {
    lambda: f64,
    integral: f64,
}

/// A Berwald family with cached quadrature anchors.
#[derive(Debug)]
pub struct BerwaldFamily {
    spec: BerwaldFamilySpec,
    cache: Mutex<HashMap<u64, Anchor>>,
}

impl Clone for BerwaldFamily {
    fn clone(&self) -> Self {
        BerwaldFamily::new(self.spec.clone())
    }
}

/// Result of fitting the integration constants to a reference model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FitReport {
    pub constants: IntegrationConstants,
    pub max_relative_residual: f64,
    pub iterations: usize,
    pub points: usize,
}

impl BerwaldFamily {
    pub fn new(spec: BerwaldFamilySpec) -> Self {
        BerwaldFamily {
            spec,
            cache: Mutex::new(HashMap::new()),
        }
    }

    pub fn spec(&self) -> &BerwaldFamilySpec {
        &self.spec
    }

    fn theta(&self, u: f64) -> Result<f64, PhiError> {
        Ok(self.spec.theta.eval(&[u])?)
    }

    fn lambda(&self, u: f64, tol: f64) -> Result<f64, PhiError> {
        adaptive_simpson::<_, PhiError>(|w| Ok(w * self.theta(w)?), self.spec.u_ref, u, tol)
    }

    fn anchor(&self, u: f64) -> Result<Anchor, PhiError> {
        let key = u.to_bits();
        if let Some(a) = self.cache.lock().expect("anchor cache poisoned").get(&key) {
            return Ok(*a);
        }
        let (u_ref, tol) = (self.spec.u_ref, self.spec.tol);
        let lambda = self.lambda(u, tol)?;
        let integral = adaptive_simpson::<_, PhiError>(
            |w| Ok(self.theta(w)? * (w / u_ref) * (-self.lambda(w, 0.1 * tol)?).exp()),
            u_ref,
            u,
            tol,
        )?;
        let anchor = Anchor { lambda, integral };
        let mut cache = self.cache.lock().expect("anchor cache poisoned");
        if cache.len() >= CACHE_LIMIT {
            cache.clear();
        }
        cache.insert(key, anchor);
        Ok(anchor)
    }

    /// Raw `u`-derivatives of `A`, `B`, `C` at `u`, up to `order`.
    pub fn abc_derivatives(&self, u: f64, order: usize) -> Result<[Vec<f64>; 3], PhiError> {
        self.abc_with(u, order, self.spec.constants)
    }

    fn abc_with(
        &self,
        u: f64,
        order: usize,
        k: IntegrationConstants,
    ) -> Result<[Vec<f64>; 3], PhiError> {
        if !(u > 0.0) {
            return Err(PhiError::OutOfDomain {
                b2: u,
                s: 0.0,
                constraint: "b² must be positive".into(),
            });
        }
        let anchor = self.anchor(u)?;
        let IntegrationConstants { a, b, c } = k;
        let uj = Jet::variable(u, order)?;
        let theta = self.spec.theta.eval(&[uj])?;
        let lambda = (uj * theta).antiderivative(anchor.lambda);
        let a_hat = uj * (-lambda).exp() / self.spec.u_ref;
        let big_a = a_hat * a;
        let big_b = (theta * a_hat).antiderivative(anchor.integral) * a + b;
        let big_c = (lambda * 0.5).exp().try_div(uj)? * (c * self.spec.u_ref);
        Ok([big_a, big_b, big_c].map(|j| j.coeffs().to_vec()))
    }

    pub fn eval<T: JetScalar>(&self, b2: T, s: T) -> Result<T, PhiError> {
        self.eval_with(b2, s, self.spec.constants)
    }

    fn eval_with<T: JetScalar>(&self, b2: T, s: T, k: IntegrationConstants) -> Result<T, PhiError> {
        let order = b2.total_order().min(MAX_ORDER);
        let [da, db, dc] = self.abc_with(b2.value(), order, k)?;
        let big_a = b2.compose_taylor(&da)?;
        let big_b = b2.compose_taylor(&db)?;
        let big_c = b2.compose_taylor(&dc)?;
        let s2 = s.square();
        let den = big_a + s2 * big_b;
        if den.value().abs() <= 1e-14 * (da[0].abs() + s2.value() * db[0].abs()) {
            return Err(PhiError::SingularScalar {
                b2: b2.value(),
                s: s.value(),
                which: "A + s^2 B",
            });
        }
        let t = s2.try_div(den)?;
        let g = self.spec.varphi.eval(&[t])?;
        if !(g.value() > 0.0) {
            return Err(PhiError::Positivity {
                t: t.value(),
                value: g.value(),
            });
        }
        Ok(g * big_c * s)
    }

    /// Fits `(a, b, c)` so that this family matches `reference` on a grid
    /// inside both domains. Returns a spec carrying the fitted constants.
    ///
    /// `c` starts from the small-`s` limit `φ/s → ϕ̂(0)·C`; `(a, b)` from a
    /// handful of starts, each polished by Levenberg-Marquardt in
    /// `(ln a, b/a, ln c)`.
    pub fn fit_constants(
        &self,
        reference: &PhiModel,
    ) -> Result<(BerwaldFamilySpec, FitReport), PhiError> {
        let points = fit_points(&self.spec.domain, reference.domain());
        let targets = points
            .iter()
            .map(|&(u, s)| reference.eval(u, s))
            .collect::<Result<Vec<_>, _>>()?;
        let to_k = |q: &Vector3<f64>| IntegrationConstants {
            a: q[0].exp(),
            b: q[1] * q[0].exp(),
            c: q[2].exp(),
        };
        let residuals = |q: &Vector3<f64>| -> Option<Vec<f64>> {
            let k = to_k(q);
            let r: Option<Vec<f64>> = points
                .iter()
                .zip(&targets)
                .map(|(&(u, s), t)| self.eval_with(u, s, k).ok().map(|v| v / t - 1.0))
                .collect();
            r.filter(|r| r.iter().all(|v| v.is_finite()))
        };

        let phi0 = self.spec.varphi.eval(&[0.0])?;
        let mut ln_c = 0.0;
        let mut n_c = 0;
        for &(u, _) in &points {
            let s = 1e-6 * u.sqrt();
            let c_unit = self.abc_with(u, 0, IntegrationConstants::default())?[2][0];
            let ratio = reference.eval(u, s)? / (s * phi0 * c_unit);
            if ratio > 0.0 && ratio.is_finite() {
                ln_c += ratio.ln();
                n_c += 1;
            }
        }
        if n_c > 0 {
            ln_c /= n_c as f64;
        }

        let mut best: Option<(Vector3<f64>, Vec<f64>, usize)> = None;
        let mut total_iterations = 0;
        for ln_a in [-3.0, -1.5, 0.0, 1.5, 3.0] {
            for ratio in [-8.0, -4.0, -2.0, -1.0, 0.0, 1.0, 4.0] {
                let Some((q, r, it)) =
                    levenberg_marquardt(Vector3::new(ln_a, ratio, ln_c), &residuals, 60)
                else {
                    continue;
                };
                total_iterations += it;
                if best
                    .as_ref()
                    .is_none_or(|(_, br, _)| sum_sq(&r) < sum_sq(br))
                {
                    best = Some((q, r, it));
                }
            }
        }
        let Some((q, r, _)) = best else {
            return Err(PhiError::Parameter(
                "no start point gave a finite fit".into(),
            ));
        };
        let (q, r) = match levenberg_marquardt(q, &residuals, 200) {
            Some((q2, r2, it)) if sum_sq(&r2) <= sum_sq(&r) => {
                total_iterations += it;
                (q2, r2)
            }
            _ => (q, r),
        };
        let constants = to_k(&q);
        let report = FitReport {
            constants,
            max_relative_residual: r.iter().fold(0.0f64, |m, v| m.max(v.abs())),
            iterations: total_iterations,
            points: points.len(),
        };
        Ok((self.spec.clone().with_constants(constants), report))
    }
}

fn sum_sq(r: &[f64]) -> f64 {
    r.iter().map(|v| v * v).sum()
}

/// Damped Gauss-Newton with a central-difference Jacobian.
fn levenberg_marquardt(
    mut q: Vector3<f64>,
    residuals: &impl Fn(&Vector3<f64>) -> Option<Vec<f64>>,
    max_iter: usize,
) -> Option<(Vector3<f64>, Vec<f64>, usize)> {
    let mut r = residuals(&q)?;
    let mut damping = 1e-3;
    let mut iterations = 0;
    while iterations < max_iter && sum_sq(&r).sqrt() > 1e-14 {
        iterations += 1;
        let mut jtj = Matrix3::zeros();
        let mut jtr = Vector3::zeros();
        let mut cols = Vec::with_capacity(3);
        for k in 0..3 {
            let h = 1e-7 * q[k].abs().max(1.0);
            let (mut hi, mut lo) = (q, q);
            hi[k] += h;
            lo[k] -= h;
            let (rh, rl) = (residuals(&hi)?, residuals(&lo)?);
            cols.push(
                rh.iter()
                    .zip(&rl)
                    .map(|(a, b)| (a - b) / (2.0 * h))
                    .collect::<Vec<_>>(),
            );
        }
        for (i, ri) in r.iter().enumerate() {
            let v = Vector3::new(cols[0][i], cols[1][i], cols[2][i]);
            jtj += v * v.transpose();
            jtr += v * *ri;
        }
        let mut moved = false;
        for _ in 0..30 {
            let mut m = jtj;
            for k in 0..3 {
                m[(k, k)] *= 1.0 + damping;
                m[(k, k)] += 1e-300;
            }
            if let Some(step) = m.lu().solve(&-jtr) {
                let trial = q + step;
                if let Some(rt) = residuals(&trial) {
                    if sum_sq(&rt) < sum_sq(&r) {
                        moved = step.norm() > 1e-15 * q.norm().max(1.0);
                        q = trial;
                        r = rt;
                        damping = (damping * 0.1).max(1e-12);
                        break;
                    }
                }
            }
            damping *= 10.0;
        }
        if !moved {
            break;
        }
    }
    Some((q, r, iterations))
}

/// A 6×6 grid over the intersection of two domains.
fn fit_points(a: &AdmissibleDomain, b: &AdmissibleDomain) -> Vec<(f64, f64)> {
    let u_lo = a.b2_min.max(b.b2_min);
    let u_hi = a.b2_max.min(b.b2_max);
    let (a_lo, a_hi) = a.sampling_fractions();
    let (b_lo, b_hi) = b.sampling_fractions();
    let (f_lo, f_hi) = (a_lo.max(b_lo), a_hi.min(b_hi));
    let n = 6;
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        let u = u_lo + (u_hi - u_lo) * i as f64 / (n - 1) as f64;
        for j in 0..n {
            let f = f_lo + (f_hi - f_lo) * j as f64 / (n - 1) as f64;
            out.push((u, f * u.sqrt()));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn natural_constants_reproduce_example1_exactly() {
        // With θ ≡ 1 the natural antiderivatives are A = ue^{-u²/2},
        // B = -e^{-u²/2}, C = e^{u²/4}/u.
        let u_ref: f64 = 0.25;
        let k = IntegrationConstants {
            a: u_ref * (-u_ref * u_ref / 2.0).exp(),
            b: -(-u_ref * u_ref / 2.0).exp(),
            c: (u_ref * u_ref / 4.0).exp() / u_ref,
        };
        let fam = BerwaldFamily::new(
            BerwaldFamilySpec::new("1 + t", "1")
                .unwrap()
                .with_constants(k),
        );
        let ex1 = PhiModel::example1(1.0);
        for (u, s) in [(0.5, 0.2), (1.0, 0.5), (1.4, 1.0)] {
            assert_relative_eq!(
                fam.eval(u, s).unwrap(),
                ex1.eval(u, s).unwrap(),
                max_relative = 1e-9
            );
        }
    }

    #[test]
    fn abc_derivatives_follow_the_integrands() {
        let fam = BerwaldFamily::new(BerwaldFamilySpec::new("1 + t", "1 / (1 + b2)").unwrap());
        let u = 0.8;
        let [a, b, c] = fam.abc_derivatives(u, 2).unwrap();
        let theta = 1.0 / (1.0 + u);
        assert_relative_eq!(a[1], (1.0 / u - u * theta) * a[0], max_relative = 1e-13);
        assert_relative_eq!(b[1], theta * a[0], max_relative = 1e-13);
        assert_relative_eq!(
            c[1],
            (0.5 * u * theta - 1.0 / u) * c[0],
            max_relative = 1e-13
        );
        // Λ(u) = u - ln((1+u)/(1+u_ref)) - u_ref
        let lambda = u - ((1.0 + u) / 1.25f64).ln() - 0.25;
        assert_relative_eq!(a[0], u / 0.25 * (-lambda).exp(), max_relative = 1e-10);
    }

    #[test]
    fn fit_recovers_example1_constants() {
        let fam = BerwaldFamily::new(BerwaldFamilySpec::new("1 + t", "1").unwrap());
        let (_, report) = fam.fit_constants(&PhiModel::example1(1.0)).unwrap();
        assert!(report.max_relative_residual < 1e-9, "{report:?}");
        assert_relative_eq!(
            report.constants.a,
            0.25 * (-1.0f64 / 32.0).exp(),
            max_relative = 1e-6
        );
        assert_relative_eq!(
            report.constants.c,
            (1.0f64 / 64.0).exp() / 0.25,
            max_relative = 1e-6
        );
    }

    #[test]
    fn fit_reproduces_example2() {
        let fam =
            BerwaldFamily::new(BerwaldFamilySpec::new("1 / (1 + t)", "1 / (1 + b2)").unwrap());
        let ex2 = PhiModel::example2(1.0, 1.0, 1.0).unwrap();
        let (spec, report) = fam.fit_constants(&ex2).unwrap();
        assert!(report.max_relative_residual < 1e-9, "{report:?}");
        let fitted = BerwaldFamily::new(spec);
        for (u, s) in [(0.6, 0.1), (1.3, 0.5)] {
            assert_relative_eq!(
                fitted.eval(u, s).unwrap(),
                ex2.eval(u, s).unwrap(),
                max_relative = 1e-8
            );
        }
    }

    #[test]
    fn nonpositive_generator_is_rejected() {
        let fam = BerwaldFamily::new(BerwaldFamilySpec::new("1 - 10 * t", "1").unwrap());
        assert!(matches!(
            fam.eval(1.0, 0.9),
            Err(PhiError::Positivity { .. })
        ));
    }
}

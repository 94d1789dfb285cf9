//! The derived scalars of the fundamental tensor and the spray.

use serde::Serialize;

use crate::jet::JetScalar;

use super::{PhiError, PhiPartials};

/// Relative size below which a denominator counts as vanished.
const SINGULAR_REL: f64 = 1e-12;

fn guard<T: JetScalar>(
    d: T,
    scale: f64,
    which: &'static str,
    b2: f64,
    s: f64,
) -> Result<T, PhiError> {
    let v = d.value();
    if !v.is_finite() || v.abs() <= SINGULAR_REL * scale.abs().max(f64::MIN_POSITIVE) {
        return Err(PhiError::SingularScalar { b2, s, which });
    }
    Ok(d)
}

/// `(E, H)` from φ and its first partials, over any jet shape.
///
/// Jets in `s` give the `s`-derivatives of `E` and `H`; the inputs must then
/// be the matching jets of `φ`, `φ₁`, `φ₂`, `φ₁₂`, `φ₂₂`.
#[allow(clippy::too_many_arguments)]
pub fn eh_scalars<T: JetScalar>(
    b2: T,
    s: T,
    phi: T,
    phi1: T,
    phi2: T,
    phi12: T,
    phi22: T,
) -> Result<(T, T), PhiError> {
    let (bv, sv) = (b2.value(), s.value());
    let d = b2 - s.square();
    let k = s * phi + d * phi2;
    let den_scale =
        phi.value().abs() + (sv * phi2.value()).abs() + (d.value() * phi22.value()).abs();
    let den = guard(
        phi - s * phi2 + d * phi22,
        den_scale,
        "phi - s*phi2 + (b2 - s^2)*phi22",
        bv,
        sv,
    )?;
    let phi = guard(
        phi,
        phi.value().abs() + (sv * phi2.value()).abs(),
        "phi",
        bv,
        sv,
    )?;
    let h = (phi22 - (phi1 - s * phi12) * 2.0).try_div(den * 2.0)?;
    let e = (phi2 + s * phi1 * 2.0).try_div(phi * 2.0)? - (h * k).try_div(phi)?;
    Ok((e, h))
}

/// Every derived scalar at one `(b², s)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScalarPack {
    pub b2: f64,
    pub s: f64,
    pub phi: f64,
    pub phi1: f64,
    pub phi2: f64,
    pub phi12: f64,
    pub phi22: f64,
    pub rho: f64,
    pub rho0: f64,
    pub rho1: f64,
    pub eta: f64,
    pub eta0: f64,
    pub eta1: f64,
    pub q: f64,
    pub r: f64,
    pub theta: f64,
    pub psi: f64,
    pub pi: f64,
    pub omega: f64,
    /// `[E, E₂, E₂₂, E₂₂₂]`
    pub e: [f64; 4],
    /// `[H, H₂, H₂₂, H₂₂₂]`
    pub h: [f64; 4],
}

impl ScalarPack {
    pub fn new(p: &PhiPartials) -> Result<Self, PhiError> {
        let (b2, s) = (p.b2, p.s);
        let (phi, phi1, phi2, phi12, phi22) = (p.phi(), p.phi1(), p.phi2(), p.phi12(), p.phi22());
        let d = b2 - s * s;
        let first = guard(
            phi - s * phi2,
            phi.abs() + (s * phi2).abs(),
            "phi - s*phi2",
            b2,
            s,
        )?;
        let second = guard(
            first + d * phi22,
            phi.abs() + (s * phi2).abs() + (d * phi22).abs(),
            "phi - s*phi2 + (b2 - s^2)*phi22",
            b2,
            s,
        )?;
        let phi = guard(phi, phi.abs() + (s * phi2).abs(), "phi", b2, s)?;
        let k = s * phi + d * phi2;
        let rho1 = first * phi2 - s * phi * phi22;
        let pi = (first * phi12 - s * phi1 * phi22) / (first * second);

        const ORDER: usize = 3;
        let sj = crate::jet::Jet::variable(s, ORDER)?;
        let bj = crate::jet::Jet::constant(b2, ORDER)?;
        let (e, h) = eh_scalars(
            bj,
            sj,
            p.s_jet(0, 0, ORDER)?,
            p.s_jet(1, 0, ORDER)?,
            p.s_jet(0, 1, ORDER)?,
            p.s_jet(1, 1, ORDER)?,
            p.s_jet(0, 2, ORDER)?,
        )?;
        let mut ev = [0.0; 4];
        let mut hv = [0.0; 4];
        for k in 0..=ORDER {
            ev[k] = e.derivative(k);
            hv[k] = h.derivative(k);
        }
        Ok(ScalarPack {
            b2,
            s,
            phi,
            phi1,
            phi2,
            phi12,
            phi22,
            rho: phi * first,
            rho0: phi * phi22 + phi2 * phi2,
            rho1,
            eta: -phi22 / second,
            eta0: -rho1 / (phi * second),
            eta1: k * rho1 / (phi * phi * second),
            q: phi2 / first,
            r: phi1 / first,
            theta: rho1 / (2.0 * phi * second),
            psi: phi22 / (2.0 * second),
            pi,
            omega: 2.0 * phi1 / phi - k * pi / phi,
            e: ev,
            h: hv,
        })
    }

    /// `b² - s²`
    pub fn gap(&self) -> f64 {
        self.b2 - self.s * self.s
    }

    /// `sφ + (b² - s²)φ₂`
    pub fn k(&self) -> f64 {
        self.s * self.phi + self.gap() * self.phi2
    }

    /// `E - sE₂`
    pub fn e_defect(&self) -> f64 {
        self.e[0] - self.s * self.e[1]
    }

    /// `H₂ - sH₂₂`
    pub fn h_defect(&self) -> f64 {
        self.h[1] - self.s * self.h[2]
    }

    /// `(E - sE₂)φ₂ + (H₂ - sH₂₂)(sφ + (b² - s²)φ₂)`
    pub fn weak_landsberg_combined(&self) -> f64 {
        self.e_defect() * self.phi2 + self.h_defect() * self.k()
    }

    /// `E` and `H` rebuilt from the spray scalars: `Θ(1+2Rb²) + sΩ` and
    /// `Ψ(1+2Rb²) + sΠ - R`.
    pub fn spray_eh(&self) -> (f64, f64) {
        let f = 1.0 + 2.0 * self.r * self.b2;
        (
            self.theta * f + self.s * self.omega,
            self.psi * f + self.s * self.pi - self.r,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::super::{PhiModel, Regularity};
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn riemannian_scalars() {
        let p = PhiModel::riemannian().scalar_pack(1.0, 0.2).unwrap();
        for v in [
            p.q, p.r, p.theta, p.psi, p.pi, p.omega, p.eta, p.e[0], p.h[0],
        ] {
            assert_eq!(v, 0.0);
        }
        assert_eq!(p.rho, 1.0);
    }

    #[test]
    fn randers_scalars_by_hand() {
        let p = PhiModel::randers().scalar_pack(1.0, 0.0).unwrap();
        assert_relative_eq!(p.rho, 1.0);
        assert_relative_eq!(p.rho0, 1.0);
        assert_relative_eq!(p.rho1, 1.0);
        assert_relative_eq!(p.q, 1.0);
        assert_relative_eq!(p.theta, 0.5);
        assert_eq!(p.psi, 0.0);
        assert_eq!(p.h[0], 0.0);
        assert_relative_eq!(p.e[0], 0.5);
        assert_relative_eq!(p.e[2], 1.0);
        assert_relative_eq!(p.weak_landsberg_combined(), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn randers_at_unit_b2() {
        let dom = super::super::AdmissibleDomain::symmetric(2.0, 0.5, 1.5, 0.05);
        let m = PhiModel::custom("1 + s", dom, Regularity::Regular).unwrap();
        let p = m.scalar_pack(1.0, 0.0).unwrap();
        assert_relative_eq!(p.e[2], 1.0);
        assert_relative_eq!(p.weak_landsberg_combined(), 0.5);
    }

    #[test]
    fn spray_scalars_rebuild_e_and_h() {
        for m in [
            PhiModel::example1(1.0),
            PhiModel::example2(1.0, 1.0, 1.0).unwrap(),
        ] {
            let p = m.scalar_pack(0.9, 0.3).unwrap();
            let (e, h) = p.spray_eh();
            assert_relative_eq!(e, p.e[0], max_relative = 1e-12);
            assert_relative_eq!(h, p.h[0], max_relative = 1e-12);
        }
    }

    #[test]
    fn omega_from_parts() {
        let p = PhiModel::example1(1.0).scalar_pack(1.2, 0.4).unwrap();
        let omega = 2.0 * p.phi1 / p.phi - (p.s * p.phi + p.gap() * p.phi2) * p.pi / p.phi;
        assert_relative_eq!(omega, p.omega, max_relative = 1e-12);
    }

    #[test]
    fn e_derivatives_match_finite_differences() {
        let m = PhiModel::example2(1.0, 1.0, 1.0).unwrap();
        let h = 1e-3;
        let at = |s: f64| m.scalar_pack(1.0, s).unwrap();
        let (c, l, r, l2, r2) = (
            at(0.3),
            at(0.3 - h),
            at(0.3 + h),
            at(0.3 - 2.0 * h),
            at(0.3 + 2.0 * h),
        );
        for k in 0..3 {
            for (vals, name) in [([l.e, r.e, l2.e, r2.e], "E"), ([l.h, r.h, l2.h, r2.h], "H")] {
                let fd = (8.0 * (vals[1][k] - vals[0][k]) - (vals[3][k] - vals[2][k])) / (12.0 * h);
                let exact = if name == "E" { c.e[k + 1] } else { c.h[k + 1] };
                assert_relative_eq!(fd, exact, max_relative = 1e-6, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn vanishing_denominator_is_named() {
        let dom = super::super::AdmissibleDomain::symmetric(f64::INFINITY, 0.5, 1.5, 0.05);
        let m = PhiModel::custom("s", dom, Regularity::AlmostRegular).unwrap();
        match m.scalar_pack(1.0, 0.5) {
            Err(PhiError::SingularScalar { which, .. }) => assert_eq!(which, "phi - s*phi2"),
            other => panic!("unexpected {other:?}"),
        }
    }
}

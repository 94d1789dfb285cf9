//! Models of `φ(b², s)`, their partial derivatives, and the derived scalars.
//!
//! Subscripts follow the usual convention: `1` is a derivative in `b²` and `2`
//! a derivative in `s`, so `φ₁₂ = ∂_{b²}∂_s φ`.
//!
//! Every model evaluates over any [`JetScalar`]. Partials come from one
//! evaluation on a nested jet (`s` outer to order 5, `b²` inner to order 1).

mod berwald;
mod models;
mod scalars;

use std::fmt;
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::expr::{Expr, ExprError};
use crate::jet::{Jet, JetError, JetScalar, MAX_ORDER};
use crate::quadrature::QuadratureError;

pub use berwald::{BerwaldFamily, BerwaldFamilySpec, FitReport, IntegrationConstants};
pub use scalars::{eh_scalars, ScalarPack};

/// Default admissible margin: `|s| ≤ (1 - ε)·b`.
pub const S_MARGIN: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PhiError {
    #[error("({b2}, {s}) outside the admissible domain: {constraint}")]
    OutOfDomain { b2: f64, s: f64, constraint: String },
    #[error("singular scalar at (b2={b2}, s={s}): {which} vanished")]
    SingularScalar {
        b2: f64,
        s: f64,
        which: &'static str,
    },
    #[error("generator is not positive: varphi({t}) = {value}")]
    Positivity { t: f64, value: f64 },
    #[error("invalid model parameter: {0}")]
    Parameter(String),
    #[error(transparent)]
    Jet(#[from] JetError),
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
}

/// Where a model may be evaluated: `0 < b² < b0²` and
/// `s_lo·b ≤ s ≤ s_hi·b`. `[b2_min, b2_max]` is the working interval that
/// grids and samplers draw from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AdmissibleDomain {
    pub b0: f64,
    pub b2_min: f64,
    pub b2_max: f64,
    pub s_lo: f64,
    pub s_hi: f64,
}

impl AdmissibleDomain {
    /// Symmetric cone `|s| ≤ (1 - margin)·b`.
    pub fn symmetric(b0: f64, b2_min: f64, b2_max: f64, margin: f64) -> Self {
        AdmissibleDomain {
            b0,
            b2_min,
            b2_max,
            s_lo: -(1.0 - margin),
            s_hi: 1.0 - margin,
        }
    }

    /// One-sided cone `lo·b ≤ s ≤ hi·b` for families that are odd in `s`.
    pub fn cone(b2_min: f64, b2_max: f64, lo: f64, hi: f64) -> Self {
        AdmissibleDomain {
            b0: f64::INFINITY,
            b2_min,
            b2_max,
            s_lo: lo,
            s_hi: hi,
        }
    }

    pub fn check(&self, b2: f64, s: f64) -> Result<(), PhiError> {
        let fail = |constraint: String| Err(PhiError::OutOfDomain { b2, s, constraint });
        if !(b2 > 0.0) {
            return fail("b² must be positive".into());
        }
        if b2 >= self.b0 * self.b0 {
            return fail(format!("b² must stay below b0² = {}", self.b0 * self.b0));
        }
        let b = b2.sqrt();
        let slack = 1e-12 * b;
        if s < self.s_lo * b - slack || s > self.s_hi * b + slack {
            return fail(format!("s must lie in [{}·b, {}·b]", self.s_lo, self.s_hi));
        }
        Ok(())
    }

    /// Sampling cone, inset by 5% of the cone width on each side.
    pub fn sampling_fractions(&self) -> (f64, f64) {
        let inset = 0.05 * (self.s_hi - self.s_lo);
        (self.s_lo + inset, self.s_hi - inset)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regularity {
    Regular,
    AlmostRegular,
}

#[derive(Clone)]
enum Family {
    Riemannian,
    Randers,
    Example1 { xi: f64 },
    Example2 { mu: f64, xi: f64, eps: f64 },
    Custom(Expr),
    Constructed(Arc<BerwaldFamily>),
}

/// A concrete `φ(b², s)` with its admissible domain.
#[derive(Clone)]
pub struct PhiModel {
    family: Family,
    domain: AdmissibleDomain,
    regularity: Regularity,
}

impl fmt::Debug for PhiModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PhiModel")
            .field("name", &self.name())
            .field("domain", &self.domain)
            .field("regularity", &self.regularity)
            .finish()
    }
}

/// Table of `∂_{b²}^p ∂_s^q φ` at one point, `p ≤ 1`, `q ≤ 5`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhiPartials {
    pub b2: f64,
    pub s: f64,
    pub table: [[f64; MAX_ORDER + 1]; 2],
}

impl PhiPartials {
    /// `∂_{b²}^p ∂_s^q φ`.
    pub fn d(&self, p: usize, q: usize) -> f64 {
        self.table[p][q]
    }
    pub fn phi(&self) -> f64 {
        self.table[0][0]
    }
    pub fn phi1(&self) -> f64 {
        self.table[1][0]
    }
    pub fn phi2(&self) -> f64 {
        self.table[0][1]
    }
    pub fn phi12(&self) -> f64 {
        self.table[1][1]
    }
    pub fn phi22(&self) -> f64 {
        self.table[0][2]
    }
    pub fn phi222(&self) -> f64 {
        self.table[0][3]
    }

    /// `s ↦ ∂_{b²}^p ∂_s^{q+k} φ` for `k = 0..=order`, as a jet in `s`.
    pub fn s_jet(&self, p: usize, q: usize, order: usize) -> Result<Jet, JetError> {
        Jet::from_derivatives(&self.table[p][q..=q + order])
    }
}

/// Signs that decide strong convexity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Convexity {
    pub phi: f64,
    /// `φ - sφ₂`
    pub first: f64,
    /// `φ - sφ₂ + (b² - s²)φ₂₂`
    pub second: f64,
}

impl Convexity {
    pub fn is_regular(&self) -> bool {
        self.phi > 0.0 && self.first > 0.0 && self.second > 0.0
    }
}

impl PhiModel {
    /// `φ ≡ 1`.
    pub fn riemannian() -> Self {
        PhiModel {
            family: Family::Riemannian,
            domain: AdmissibleDomain::symmetric(f64::INFINITY, 0.5, 1.5, S_MARGIN),
            regularity: Regularity::Regular,
        }
    }

    /// `φ = 1 + s`. Positive on the admissible cone while `b < 1/(1-ε)`.
    pub fn randers() -> Self {
        PhiModel {
            family: Family::Randers,
            domain: AdmissibleDomain::symmetric(1.0 / (1.0 - S_MARGIN), 0.25, 1.0, S_MARGIN),
            regularity: Regularity::Regular,
        }
    }

    /// Closed form produced by the Berwald family with `varphi(t) = 1 + ξt`, `θ ≡ 1`.
    pub fn example1(xi: f64) -> Self {
        PhiModel {
            family: Family::Example1 { xi },
            domain: AdmissibleDomain::cone(0.5, 1.5, S_MARGIN, 1.0 - S_MARGIN),
            regularity: Regularity::AlmostRegular,
        }
    }

    /// Closed form produced by `varphi(t) = μ/(1 + ξt)`, `θ = ε/(1 + ξb²)`.
    ///
    /// The cone stops at `s = 0.5·b`: further out `φ - sφ₂ + (b²-s²)φ₂₂`
    /// and `1 + n + 3(b²-s²)η` change sign.
    pub fn example2(mu: f64, xi: f64, eps: f64) -> Result<Self, PhiError> {
        if xi == 0.0 {
            return Err(PhiError::Parameter("example2 needs xi != 0".into()));
        }
        Ok(PhiModel {
            family: Family::Example2 { mu, xi, eps },
            domain: AdmissibleDomain::cone(0.5, 1.5, S_MARGIN, 0.5),
            regularity: Regularity::AlmostRegular,
        })
    }

    /// User expression in the variables `b2` and `s`.
    pub fn custom(
        source: &str,
        domain: AdmissibleDomain,
        regularity: Regularity,
    ) -> Result<Self, PhiError> {
        let expr = Expr::parse(source, &["b2", "s"])?;
        Ok(PhiModel {
            family: Family::Custom(expr),
            domain,
            regularity,
        })
    }

    pub fn constructed(spec: BerwaldFamilySpec) -> Self {
        let domain = spec.domain;
        PhiModel {
            family: Family::Constructed(Arc::new(BerwaldFamily::new(spec))),
            domain,
            regularity: Regularity::AlmostRegular,
        }
    }

    pub fn with_domain(mut self, domain: AdmissibleDomain) -> Self {
        self.domain = domain;
        self
    }

    pub fn domain(&self) -> &AdmissibleDomain {
        &self.domain
    }

    pub fn regularity(&self) -> Regularity {
        self.regularity
    }

    pub fn berwald_family(&self) -> Option<&BerwaldFamily> {
        match &self.family {
            Family::Constructed(f) => Some(f),
            _ => None,
        }
    }

    pub fn is_riemannian(&self) -> bool {
        matches!(self.family, Family::Riemannian)
    }

    pub fn name(&self) -> String {
        match &self.family {
            Family::Riemannian => "riemannian".into(),
            Family::Randers => "randers".into(),
            Family::Example1 { xi } => format!("example1(xi={xi})"),
            Family::Example2 { mu, xi, eps } => format!("example2(mu={mu}, xi={xi}, eps={eps})"),
            Family::Custom(e) => format!("custom({e})"),
            Family::Constructed(f) => format!("constructed({})", f.spec().describe()),
        }
    }

    /// `φ(b², s)` over any jet shape; `b2` and `s` must share that shape.
    pub fn eval<T: JetScalar>(&self, b2: T, s: T) -> Result<T, PhiError> {
        match &self.family {
            Family::Riemannian => Ok(s.one_like()),
            Family::Randers => Ok(s + 1.0),
            Family::Example1 { xi } => models::example1(*xi, b2, s),
            Family::Example2 { mu, xi, eps } => models::example2(*mu, *xi, *eps, b2, s),
            Family::Custom(e) => Ok(e.eval(&[b2, s])?),
            Family::Constructed(f) => f.eval(b2, s),
        }
    }

    /// Plain value after a domain check.
    pub fn value(&self, b2: f64, s: f64) -> Result<f64, PhiError> {
        self.domain.check(b2, s)?;
        self.eval(b2, s)
    }

    pub fn partials(&self, b2: f64, s: f64) -> Result<PhiPartials, PhiError> {
        self.domain.check(b2, s)?;
        self.partials_unchecked(b2, s)
    }

    /// Partials without the domain check, for probes outside the cone.
    pub fn partials_unchecked(&self, b2: f64, s: f64) -> Result<PhiPartials, PhiError> {
        let inner_u = Jet::variable(b2, 1)?;
        let u = Jet::lift(inner_u, MAX_ORDER)?;
        let s0 = Jet::constant(s, 1)?;
        let mut coeffs = [Jet::constant(0.0, 1)?; MAX_ORDER + 1];
        coeffs[0] = s0;
        coeffs[1] = Jet::constant(1.0, 1)?;
        let s_jet = Jet::from_coeffs(&coeffs)?;
        let phi = self.eval(u, s_jet)?;
        let mut table = [[0.0; MAX_ORDER + 1]; 2];
        for (q, c) in phi.coeffs().iter().enumerate() {
            table[0][q] = c.derivative(0);
            table[1][q] = c.derivative(1);
        }
        Ok(PhiPartials { b2, s, table })
    }

    pub fn convexity(&self, b2: f64, s: f64) -> Result<Convexity, PhiError> {
        let p = self.partials_unchecked(b2, s)?;
        let first = p.phi() - s * p.phi2();
        Ok(Convexity {
            phi: p.phi(),
            first,
            second: first + (b2 - s * s) * p.phi22(),
        })
    }

    pub fn scalar_pack(&self, b2: f64, s: f64) -> Result<ScalarPack, PhiError> {
        ScalarPack::new(&self.partials(b2, s)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn riemannian_partials_vanish() {
        let p = PhiModel::riemannian().partials(1.0, 0.3).unwrap();
        assert_eq!(p.phi(), 1.0);
        assert!(p.table.iter().flatten().skip(1).all(|&v| v == 0.0));
    }

    #[test]
    fn randers_partials() {
        let p = PhiModel::randers().partials(0.5, 0.2).unwrap();
        assert_eq!(p.phi2(), 1.0);
        assert_eq!(p.phi22(), 0.0);
        assert_eq!(p.phi1(), 0.0);
    }

    #[test]
    fn example1_value_matches_plain_arithmetic() {
        let m = PhiModel::example1(1.0);
        let direct = ((0.25 * (0.5f64.exp() - 1.0) + 1.0) * 0.25f64.exp() * 0.5) / (1.0 * 0.75);
        assert_relative_eq!(m.value(1.0, 0.5).unwrap(), direct, epsilon = 1e-15);
    }

    #[test]
    fn out_of_domain_names_constraint() {
        let m = PhiModel::example1(1.0);
        match m.partials(1.0, 0.99) {
            Err(PhiError::OutOfDomain { constraint, .. }) => {
                assert!(constraint.contains("s must lie"))
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(PhiModel::randers().partials(1.2, 0.0).is_err());
        assert!(PhiModel::riemannian().partials(-1.0, 0.0).is_err());
    }

    #[test]
    fn sampling_cone_is_inside_domain() {
        let d = PhiModel::example2(1.0, 1.0, 1.0)
            .unwrap()
            .domain()
            .to_owned();
        let (lo, hi) = d.sampling_fractions();
        assert!(lo > d.s_lo && hi < d.s_hi);
    }

    #[test]
    fn custom_model_matches_builtin() {
        let dom = *PhiModel::randers().domain();
        let c = PhiModel::custom("1 + s", dom, Regularity::Regular).unwrap();
        let a = c.partials(0.6, -0.3).unwrap();
        let b = PhiModel::randers().partials(0.6, -0.3).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn randers_is_regular() {
        let cv = PhiModel::randers().convexity(0.8, -0.8).unwrap();
        assert!(cv.is_regular());
        let cv = PhiModel::example1(1.0).convexity(1.0, 0.5).unwrap();
        assert!(cv.first < 0.0, "example 1 is only almost regular");
    }
}

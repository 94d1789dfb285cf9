//! Truncated Taylor arithmetic.
//!
//! A [`Jet`] carries a scalar quantity together with its first `order`
//! derivatives with respect to one hidden parameter `t`. Coefficients are the
//! raw derivatives `f(t0), f'(t0), ..., f^(k)(t0)`, not factorial-scaled Taylor
//! coefficients. Every arithmetic operation applies the exact Leibniz-type
//! recurrence, so the only error is floating-point rounding.
//!
//! Jets nest: `Jet<Jet<f64>>` differentiates along two independent parameters,
//! which is how mixed `∂_{b²}∂_s^q` partials are obtained without polarization.
//!
//! Multivariate partials of functions of several inputs are recovered from
//! univariate jets by [`directional_derivatives`] and the polarization identity
//! in [`mixed_partial`].

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use thiserror::Error;

/// Deepest derivative the engine carries.
pub const MAX_ORDER: usize = 5;

/// Divisors with magnitude below this are treated as poles, not underflow.
pub const SINGULAR_FLOOR: f64 = 1e-300;

const BINOM: [[f64; MAX_ORDER + 1]; MAX_ORDER + 1] = [
    [1.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1.0, 1.0, 0.0, 0.0, 0.0, 0.0],
    [1.0, 2.0, 1.0, 0.0, 0.0, 0.0],
    [1.0, 3.0, 3.0, 1.0, 0.0, 0.0],
    [1.0, 4.0, 6.0, 4.0, 1.0, 0.0],
    [1.0, 5.0, 10.0, 10.0, 5.0, 1.0],
];

#[inline]
fn binom(n: usize, k: usize) -> f64 {
    BINOM[n][k]
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum JetError {
    #[error("singular jet: divisor value {value:e} is below the singular floor")]
    Singular { value: f64 },
    #[error("domain error in {function}: value {value}")]
    Domain { function: &'static str, value: f64 },
    #[error("jet order {order} exceeds the maximum {MAX_ORDER}")]
    OrderTooHigh { order: usize },
    #[error("jet orders differ: {left} vs {right}")]
    OrderMismatch { left: usize, right: usize },
    #[error("at most 4 directions are supported by polarization, got {0}")]
    TooManyDirections(usize),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
}

/// Ring-like scalar that the curvature formulas are written against.
///
/// Implemented for `f64` and for [`Jet`] over any `JetScalar`, so one generic
/// formula serves plain evaluation, univariate jets, and nested jets.
pub trait JetScalar:
    Copy
    + fmt::Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + Add<f64, Output = Self>
    + Sub<f64, Output = Self>
    + Mul<f64, Output = Self>
    + Div<f64, Output = Self>
{
    /// The innermost constant term.
    fn value(&self) -> f64;
    /// A constant with the same jet shape as `self`.
    fn constant_like(&self, v: f64) -> Self;
    /// Total nilpotency order (sum of the orders of all nested levels).
    fn total_order(&self) -> usize;
    fn is_exact_zero(&self) -> bool;
    fn try_recip(self) -> Result<Self, JetError>;
    fn try_div(self, rhs: Self) -> Result<Self, JetError>;
    fn exp(self) -> Self;
    fn try_ln(self) -> Result<Self, JetError>;
    fn try_sqrt(self) -> Result<Self, JetError>;
    fn try_powf(self, r: f64) -> Result<Self, JetError>;

    fn zero_like(&self) -> Self {
        self.constant_like(0.0)
    }

    fn one_like(&self) -> Self {
        self.constant_like(1.0)
    }

    fn square(self) -> Self {
        self * self
    }

    /// Integer power by repeated multiplication; negative exponents go through
    /// a checked reciprocal.
    fn try_powi(self, k: i32) -> Result<Self, JetError> {
        let base = if k < 0 { self.try_recip()? } else { self };
        let mut acc = self.one_like();
        for _ in 0..k.unsigned_abs() {
            acc = acc * base;
        }
        Ok(acc)
    }

    /// `v - self`.
    fn rsub(self, v: f64) -> Self {
        -self + v
    }

    /// Evaluates `outer(self)` from the raw derivatives of `outer` at
    /// `self.value()`, via the truncated Taylor series in `self - value`.
    ///
    /// `outer_derivs[m]` must be present for every power `m` of the increment
    /// that is not identically zero; otherwise an order error is returned.
    fn compose_taylor(&self, outer_derivs: &[f64]) -> Result<Self, JetError> {
        let delta = *self - self.value();
        let mut acc = self.constant_like(outer_derivs[0]);
        let mut power = delta;
        let mut factorial = 1.0;
        let mut m = 1;
        while !power.is_exact_zero() {
            let Some(d) = outer_derivs.get(m) else {
                return Err(JetError::OrderTooHigh { order: m });
            };
            factorial *= m as f64;
            acc = acc + power * (d / factorial);
            power = power * delta;
            m += 1;
        }
        Ok(acc)
    }
}

impl JetScalar for f64 {
    fn value(&self) -> f64 {
        *self
    }
    fn constant_like(&self, v: f64) -> Self {
        v
    }
    fn total_order(&self) -> usize {
        0
    }
    fn is_exact_zero(&self) -> bool {
        *self == 0.0
    }
    fn try_recip(self) -> Result<Self, JetError> {
        if self.abs() < SINGULAR_FLOOR || !self.is_finite() {
            return Err(JetError::Singular { value: self });
        }
        Ok(1.0 / self)
    }
    fn try_div(self, rhs: Self) -> Result<Self, JetError> {
        if rhs.abs() < SINGULAR_FLOOR || !rhs.is_finite() {
            return Err(JetError::Singular { value: rhs });
        }
        Ok(self / rhs)
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn try_ln(self) -> Result<Self, JetError> {
        if self > 0.0 {
            Ok(self.ln())
        } else {
            Err(JetError::Domain {
                function: "ln",
                value: self,
            })
        }
    }
    fn try_sqrt(self) -> Result<Self, JetError> {
        if self > 0.0 {
            Ok(self.sqrt())
        } else {
            Err(JetError::Domain {
                function: "sqrt",
                value: self,
            })
        }
    }
    fn try_powf(self, r: f64) -> Result<Self, JetError> {
        if self > 0.0 {
            Ok(self.powf(r))
        } else {
            Err(JetError::Domain {
                function: "pow",
                value: self,
            })
        }
    }
}

/// Truncated Taylor expansion in raw-derivative form.
#[derive(Clone, Copy, PartialEq)]
pub struct Jet<T = f64> {
    order: usize,
    c: [T; MAX_ORDER + 1],
}

impl<T: JetScalar> fmt::Debug for Jet<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.coeffs()).finish()
    }
}

impl Jet<f64> {
    /// The jet of the identity map `t ↦ t0 + t` evaluated at `t = 0`.
    pub fn variable(t0: f64, order: usize) -> Result<Self, JetError> {
        Self::line(t0, 1.0, order)
    }

    /// The jet of `t ↦ t0 + slope·t`.
    pub fn line(t0: f64, slope: f64, order: usize) -> Result<Self, JetError> {
        let mut j = Self::constant(t0, order)?;
        if order >= 1 {
            j.c[1] = slope;
        }
        Ok(j)
    }

    pub fn constant(v: f64, order: usize) -> Result<Self, JetError> {
        Self::lift(v, order)
    }

    pub fn from_derivatives(derivs: &[f64]) -> Result<Self, JetError> {
        Self::from_coeffs(derivs)
    }
}

impl<T: JetScalar> Jet<T> {
    /// Lifts a scalar of the inner type into a constant jet.
    pub fn lift(v: T, order: usize) -> Result<Self, JetError> {
        if order > MAX_ORDER {
            return Err(JetError::OrderTooHigh { order });
        }
        let z = v.zero_like();
        let mut c = [z; MAX_ORDER + 1];
        c[0] = v;
        Ok(Jet { order, c })
    }

    /// Builds a jet from raw derivatives; the order is `coeffs.len() - 1`.
    pub fn from_coeffs(coeffs: &[T]) -> Result<Self, JetError> {
        let order = coeffs
            .len()
            .checked_sub(1)
            .ok_or(JetError::OrderTooHigh { order: 0 })?;
        let mut j = Self::lift(coeffs[0], order)?;
        j.c[..=order].copy_from_slice(coeffs);
        Ok(j)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn coeffs(&self) -> &[T] {
        &self.c[..=self.order]
    }

    /// The `k`-th raw derivative (zero beyond the order).
    pub fn derivative(&self, k: usize) -> T {
        if k <= self.order {
            self.c[k]
        } else {
            self.c[0].zero_like()
        }
    }

    pub fn head(&self) -> T {
        self.c[0]
    }

    fn with_coeffs(order: usize, c: [T; MAX_ORDER + 1]) -> Self {
        Jet { order, c }
    }

    fn blank(&self) -> [T; MAX_ORDER + 1] {
        [self.c[0].zero_like(); MAX_ORDER + 1]
    }

    /// Antiderivative jet with the given constant: shifts coefficients up,
    /// dropping the top one.
    pub fn antiderivative(&self, constant: T) -> Self {
        let mut c = self.blank();
        c[0] = constant;
        c[1..=self.order].copy_from_slice(&self.c[..self.order]);
        Self::with_coeffs(self.order, c)
    }

    /// Derivative jet: shifts coefficients down; the top coefficient becomes 0.
    pub fn differentiate(&self) -> Self {
        let mut c = self.blank();
        c[..self.order].copy_from_slice(&self.c[1..=self.order]);
        Self::with_coeffs(self.order, c)
    }

    fn check_orders(&self, other: &Self) -> Result<(), JetError> {
        if self.order != other.order {
            return Err(JetError::OrderMismatch {
                left: self.order,
                right: other.order,
            });
        }
        Ok(())
    }

    /// Strict binary arithmetic that rejects order mismatches.
    pub fn arith(&self, other: &Self, op: ArithOp) -> Result<Self, JetError> {
        self.check_orders(other)?;
        Ok(match op {
            ArithOp::Add => *self + *other,
            ArithOp::Sub => *self - *other,
            ArithOp::Mul => *self * *other,
            ArithOp::Div => self.try_div(*other)?,
        })
    }

    /// Strict elementary function application.
    pub fn elementary(&self, function: Elementary) -> Result<Self, JetError> {
        match function {
            Elementary::Exp => Ok(JetScalar::exp(*self)),
            Elementary::Ln => self.try_ln(),
            Elementary::Sqrt => self.try_sqrt(),
            Elementary::Pow(r) => self.try_powf(r),
        }
    }

    fn zip(self, rhs: Self, f: impl Fn(T, T) -> T) -> Self {
        let order = self.order.min(rhs.order);
        let mut c = self.c;
        for k in 0..=order {
            c[k] = f(self.c[k], rhs.c[k]);
        }
        let z = self.c[0].zero_like();
        for slot in c.iter_mut().skip(order + 1) {
            *slot = z;
        }
        Self::with_coeffs(order, c)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Elementary {
    Exp,
    Ln,
    Sqrt,
    Pow(f64),
}

// Mixed-order operands truncate to the lower order: the result is only known
// to that order. `arith` is the strict variant.
impl<T: JetScalar> Add for Jet<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        self.zip(rhs, |a, b| a + b)
    }
}

impl<T: JetScalar> Sub for Jet<T> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self.zip(rhs, |a, b| a - b)
    }
}

impl<T: JetScalar> Mul for Jet<T> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let order = self.order.min(rhs.order);
        let mut c = self.blank();
        for k in 0..=order {
            let mut acc = self.c[0] * rhs.c[k];
            for i in 1..=k {
                acc = acc + self.c[i] * rhs.c[k - i] * binom(k, i);
            }
            c[k] = acc;
        }
        Self::with_coeffs(order, c)
    }
}

impl<T: JetScalar> Neg for Jet<T> {
    type Output = Self;
    fn neg(self) -> Self {
        let mut out = self;
        for k in 0..=self.order {
            out.c[k] = -self.c[k];
        }
        out
    }
}

impl<T: JetScalar> Add<f64> for Jet<T> {
    type Output = Self;
    fn add(self, rhs: f64) -> Self {
        let mut out = self;
        out.c[0] = self.c[0] + rhs;
        out
    }
}

impl<T: JetScalar> Sub<f64> for Jet<T> {
    type Output = Self;
    fn sub(self, rhs: f64) -> Self {
        let mut out = self;
        out.c[0] = self.c[0] - rhs;
        out
    }
}

impl<T: JetScalar> Mul<f64> for Jet<T> {
    type Output = Self;
    fn mul(self, rhs: f64) -> Self {
        let mut out = self;
        for k in 0..=self.order {
            out.c[k] = self.c[k] * rhs;
        }
        out
    }
}

impl<T: JetScalar> Div<f64> for Jet<T> {
    type Output = Self;
    fn div(self, rhs: f64) -> Self {
        let mut out = self;
        for k in 0..=self.order {
            out.c[k] = self.c[k] / rhs;
        }
        out
    }
}

impl<T: JetScalar> JetScalar for Jet<T> {
    fn value(&self) -> f64 {
        self.c[0].value()
    }

    fn constant_like(&self, v: f64) -> Self {
        let inner = self.c[0].constant_like(v);
        let mut c = self.blank();
        c[0] = inner;
        Self::with_coeffs(self.order, c)
    }

    fn total_order(&self) -> usize {
        self.order + self.c[0].total_order()
    }

    fn is_exact_zero(&self) -> bool {
        self.coeffs().iter().all(|c| c.is_exact_zero())
    }

    fn try_recip(self) -> Result<Self, JetError> {
        let inv0 = self.c[0].try_recip()?;
        let mut h = self.blank();
        h[0] = inv0;
        for k in 1..=self.order {
            let mut acc = self.c[0].zero_like();
            for i in 1..=k {
                acc = acc + self.c[i] * h[k - i] * binom(k, i);
            }
            h[k] = -(acc * inv0);
        }
        Ok(Self::with_coeffs(self.order, h))
    }

    fn try_div(self, rhs: Self) -> Result<Self, JetError> {
        let order = self.order.min(rhs.order);
        let inv0 = rhs.c[0].try_recip()?;
        let mut h = self.blank();
        for k in 0..=order {
            let mut acc = self.c[k];
            for i in 1..=k {
                acc = acc - rhs.c[i] * h[k - i] * binom(k, i);
            }
            h[k] = acc * inv0;
        }
        Ok(Self::with_coeffs(order, h))
    }

    fn exp(self) -> Self {
        let mut h = self.blank();
        h[0] = self.c[0].exp();
        for k in 1..=self.order {
            let mut acc = self.c[0].zero_like();
            for i in 0..k {
                acc = acc + self.c[i + 1] * h[k - 1 - i] * binom(k - 1, i);
            }
            h[k] = acc;
        }
        Self::with_coeffs(self.order, h)
    }

    fn try_ln(self) -> Result<Self, JetError> {
        if self.value() <= 0.0 {
            return Err(JetError::Domain {
                function: "ln",
                value: self.value(),
            });
        }
        let inv0 = self.c[0].try_recip()?;
        let mut h = self.blank();
        h[0] = self.c[0].try_ln()?;
        for k in 1..=self.order {
            let mut acc = self.c[k];
            for i in 0..k.saturating_sub(1) {
                acc = acc - h[i + 1] * self.c[k - 1 - i] * binom(k - 1, i);
            }
            h[k] = acc * inv0;
        }
        Ok(Self::with_coeffs(self.order, h))
    }

    fn try_sqrt(self) -> Result<Self, JetError> {
        if self.value() <= 0.0 {
            return Err(JetError::Domain {
                function: "sqrt",
                value: self.value(),
            });
        }
        let mut h = self.blank();
        h[0] = self.c[0].try_sqrt()?;
        let inv = (h[0] * 2.0).try_recip()?;
        for k in 1..=self.order {
            let mut acc = self.c[k];
            for i in 1..k {
                acc = acc - h[i] * h[k - i] * binom(k, i);
            }
            h[k] = acc * inv;
        }
        Ok(Self::with_coeffs(self.order, h))
    }

    fn try_powf(self, r: f64) -> Result<Self, JetError> {
        if r.fract() == 0.0 && r.abs() <= 64.0 {
            return self.try_powi(r as i32);
        }
        if self.value() <= 0.0 {
            return Err(JetError::Domain {
                function: "pow",
                value: self.value(),
            });
        }
        let inv0 = self.c[0].try_recip()?;
        let mut h = self.blank();
        h[0] = self.c[0].try_powf(r)?;
        for k in 1..=self.order {
            let mut acc = self.c[0].zero_like();
            for i in 0..k {
                acc = acc + self.c[i + 1] * h[k - 1 - i] * (r * binom(k - 1, i));
            }
            for i in 0..k - 1 {
                acc = acc - h[i + 1] * self.c[k - 1 - i] * binom(k - 1, i);
            }
            h[k] = acc * inv0;
        }
        Ok(Self::with_coeffs(self.order, h))
    }
}

/// `d^k/dt^k f(point + t·direction)` at `t = 0` for `k = 0..=order`.
pub fn directional_derivatives<F, E>(
    f: F,
    point: &[f64],
    direction: &[f64],
    order: usize,
) -> Result<Vec<f64>, E>
where
    F: Fn(&[Jet]) -> Result<Jet, E>,
    E: From<JetError>,
{
    let out = directional_derivatives_vec(|z| f(z).map(|v| vec![v]), point, direction, order)?;
    Ok(out.into_iter().next().unwrap_or_default())
}

/// Vector-valued variant of [`directional_derivatives`]: entry `[m][k]` is the
/// `k`-th derivative of output component `m`.
pub fn directional_derivatives_vec<F, E>(
    f: F,
    point: &[f64],
    direction: &[f64],
    order: usize,
) -> Result<Vec<Vec<f64>>, E>
where
    F: Fn(&[Jet]) -> Result<Vec<Jet>, E>,
    E: From<JetError>,
{
    if point.len() != direction.len() {
        return Err(JetError::Dimension {
            expected: point.len(),
            got: direction.len(),
        }
        .into());
    }
    let inputs = point
        .iter()
        .zip(direction)
        .map(|(&p, &d)| Jet::line(p, d, order))
        .collect::<Result<Vec<_>, _>>()?;
    let outputs = f(&inputs)?;
    Ok(outputs
        .iter()
        .map(|j| (0..=order).map(|k| j.derivative(k)).collect())
        .collect())
}

/// Mixed partial `∂_{d1}…∂_{dk} f(point)` of total order `k ≤ 4` along
/// arbitrary direction vectors.
///
/// Uses the polarization identity
/// `T(d1..dk) = (1/k!) Σ_{S⊆{1..k}} (-1)^{k-|S|} D^k_{Σ_{i∈S} d_i} f`,
/// which is an algebraic identity for the symmetric derivative tensor; the
/// only error is floating-point cancellation among the `2^k - 1` terms.
pub fn mixed_partial<F, E>(f: F, point: &[f64], dirs: &[Vec<f64>]) -> Result<f64, E>
where
    F: Fn(&[Jet]) -> Result<Jet, E>,
    E: From<JetError>,
{
    let out = mixed_partial_vec(|z| f(z).map(|v| vec![v]), point, dirs)?;
    Ok(out[0])
}

/// Vector-valued variant of [`mixed_partial`].
pub fn mixed_partial_vec<F, E>(f: F, point: &[f64], dirs: &[Vec<f64>]) -> Result<Vec<f64>, E>
where
    F: Fn(&[Jet]) -> Result<Vec<Jet>, E>,
    E: From<JetError>,
{
    let k = dirs.len();
    if k > 4 {
        return Err(JetError::TooManyDirections(k).into());
    }
    let m = point.len();
    if let Some(bad) = dirs.iter().find(|d| d.len() != m) {
        return Err(JetError::Dimension {
            expected: m,
            got: bad.len(),
        }
        .into());
    }
    if k == 0 {
        let zero = vec![0.0; m];
        return Ok(directional_derivatives_vec(&f, point, &zero, 0)?
            .into_iter()
            .map(|d| d[0])
            .collect());
    }
    let mut acc: Option<Vec<f64>> = None;
    for mask in 1u32..(1 << k) {
        let mut w = vec![0.0; m];
        for (i, d) in dirs.iter().enumerate() {
            if mask & (1 << i) != 0 {
                for (wi, di) in w.iter_mut().zip(d) {
                    *wi += di;
                }
            }
        }
        let sign = if (k as u32 - mask.count_ones()).is_multiple_of(2) {
            1.0
        } else {
            -1.0
        };
        let derivs = directional_derivatives_vec(&f, point, &w, k)?;
        let acc = acc.get_or_insert_with(|| vec![0.0; derivs.len()]);
        for (a, d) in acc.iter_mut().zip(&derivs) {
            *a += sign * d[k];
        }
    }
    let factorial: f64 = (1..=k).map(|i| i as f64).product();
    Ok(acc
        .unwrap_or_default()
        .into_iter()
        .map(|v| v / factorial)
        .collect())
}

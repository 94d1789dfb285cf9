//! Closed-form `φ(b², s)` families.

use crate::jet::JetScalar;

use super::PhiError;

/// `((s²(ξe^{b⁴/2} - 1) + b²)·e^{b⁴/4}·s) / (b²(b² - s²))`
pub(super) fn example1<T: JetScalar>(xi: f64, u: T, s: T) -> Result<T, PhiError> {
    let s2 = s.square();
    let u2 = u.square();
    let num = (s2 * ((u2 * 0.5).exp() * xi - 1.0) + u) * (u2 * 0.25).exp() * s;
    let den = u * (u - s2);
    Ok(num.try_div(den)?)
}

/// Written exactly as displayed, including the `e^{-ξ²ln b²}` factor that
/// cancels against the leading `b²`.
pub(super) fn example2<T: JetScalar>(
    mu: f64,
    xi: f64,
    eps: f64,
    u: T,
    s: T,
) -> Result<T, PhiError> {
    let s2 = s.square();
    let log1 = (u * xi + 1.0).try_ln()?;
    let half = ((u * xi - log1) * (0.5 * eps / (xi * xi))).exp();
    let inner = ((u * (eps * xi) - u.try_ln()? * (xi * xi) - log1 * eps) / (xi * xi)).exp();
    let num = (u - s2) * half * s * mu;
    let den = (s2 * u * inner * xi + u - s2) * u;
    Ok(num.try_div(den)?)
}

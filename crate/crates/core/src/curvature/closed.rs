//! Closed forms in terms of the scalar pack.

use nalgebra::{DMatrix, DVector};
use ndarray::{Array3, Array4};

use crate::geometry::RsInvariants;
use crate::phi::ScalarPack;

use super::PointState;

/// `ρa_ij + ρ₀b_ib_j + ρ₁(b_il_j + b_jl_i) - sρ₁l_il_j`
pub(super) fn fundamental_tensor(p: &PointState, k: &ScalarPack) -> DMatrix<f64> {
    let (b, l) = (&p.b, &p.l_low);
    DMatrix::from_fn(p.n, p.n, |i, j| {
        k.rho * p.a[(i, j)] + k.rho0 * b[i] * b[j] + k.rho1 * (b[i] * l[j] + b[j] * l[i])
            - p.s * k.rho1 * l[i] * l[j]
    })
}

/// `(1/ρ){a^ij + ηb^ib^j + η₀(b^il^j + b^jl^i) + η₁l^il^j}`
pub(super) fn inverse_fundamental_tensor(p: &PointState, k: &ScalarPack) -> DMatrix<f64> {
    let (b, l) = (&p.b_up, &p.l_up);
    DMatrix::from_fn(p.n, p.n, |i, j| {
        (p.a_inv[(i, j)]
            + k.eta * b[i] * b[j]
            + k.eta0 * (b[i] * l[j] + b[j] * l[i])
            + k.eta1 * l[i] * l[j])
            / k.rho
    })
}

/// `φ^{n+1}(φ - sφ₂)^{n-2}(φ - sφ₂ + (b² - s²)φ₂₂)·det(a)`
pub(super) fn determinant(p: &PointState, k: &ScalarPack) -> f64 {
    let first = k.phi - k.s * k.phi2;
    let n = p.n as i32;
    k.phi.powi(n + 1) * first.powi(n - 2) * (first + k.gap() * k.phi22) * p.a.determinant()
}

pub(super) fn spray_general(
    p: &PointState,
    k: &ScalarPack,
    g_alpha: &DVector<f64>,
    rs: &RsInvariants,
) -> DVector<f64> {
    let a = p.alpha;
    let common = -2.0 * a * k.q * rs.s0 + rs.r00 + 2.0 * a * a * k.r * rs.r;
    let l_coef = k.theta * common + a * k.omega * (rs.r0 + rs.s0);
    let b_coef = k.psi * common + a * k.pi * (rs.r0 + rs.s0);
    DVector::from_fn(p.n, |i, _| {
        g_alpha[i] + a * k.q * rs.s_up0[i] + l_coef * p.l_up[i] + b_coef * p.b_up[i]
            - a * a * k.r * (rs.r_up[i] + rs.s_up[i])
    })
}

/// `G_α + cα²{Θ(1 + 2Rb²) + sΩ}l + cα²{Ψ(1 + 2Rb²) + sΠ - R}b`
pub(super) fn spray_substituted(
    p: &PointState,
    k: &ScalarPack,
    g_alpha: &DVector<f64>,
    c: f64,
) -> DVector<f64> {
    let ca2 = c * p.alpha * p.alpha;
    let (e, h) = k.spray_eh();
    DVector::from_fn(p.n, |i, _| {
        g_alpha[i] + ca2 * e * p.l_up[i] + ca2 * h * p.b_up[i]
    })
}

/// `G_α + cα²El + cα²Hb`
pub(super) fn spray_closed_conformal(
    p: &PointState,
    k: &ScalarPack,
    g_alpha: &DVector<f64>,
    c: f64,
) -> DVector<f64> {
    let ca2 = c * p.alpha * p.alpha;
    DVector::from_fn(p.n, |i, _| {
        g_alpha[i] + ca2 * k.e[0] * p.l_up[i] + ca2 * k.h[0] * p.b_up[i]
    })
}

struct Parts<'a> {
    a: &'a DMatrix<f64>,
    b: &'a DVector<f64>,
    l: &'a DVector<f64>,
    s: f64,
    e: [f64; 4],
    h: [f64; 4],
}

impl<'a> Parts<'a> {
    fn new(p: &'a PointState, k: &ScalarPack) -> Self {
        Parts {
            a: &p.a,
            b: &p.b,
            l: &p.l_low,
            s: p.s,
            e: k.e,
            h: k.h,
        }
    }
}

/// `U^i_jkl`, indexed `[i, j, k, l]`. Each braced block is summed over the
/// cyclic permutation `(k → l → j → k)` of its lower indices.
pub(super) fn u_tensor(p: &PointState, k: &ScalarPack) -> Array4<f64> {
    let q = Parts::new(p, k);
    let (a, b, l, s) = (q.a, q.b, q.l, q.s);
    let [e0, e2, e22, e222] = q.e;
    let [_, h2, h22, h222] = q.h;
    let (lu, bu) = (&p.l_up, &p.b_up);
    let delta = |i: usize, j: usize| if i == j { 1.0 } else { 0.0 };

    let block1 = |i: usize, j: usize, kk: usize, ll: usize| {
        ((e0 - s * e2) * a[(kk, ll)] + e22 * b[kk] * b[ll]) * delta(i, j)
            + s * (3.0 * e22 + s * e222) * l[ll] * l[j] * b[kk] * lu[i]
            - (e22 + s * e222) * b[ll] * l[j] * b[kk] * lu[i]
    };
    let block2 = |i: usize, j: usize, kk: usize, ll: usize| {
        s * e22 * (a[(j, ll)] * b[kk] * lu[i] + (l[kk] * b[ll] + l[ll] * b[kk]) * delta(i, j))
            + (e0 - s * e2 - s * s * e22) * (a[(j, ll)] * lu[i] + l[ll] * delta(i, j)) * l[kk]
    };
    let block4 = |i: usize, j: usize, kk: usize, ll: usize| {
        ((h2 - s * h22) * (b[j] - s * l[j]) * a[(kk, ll)]
            - (h2 - s * h22 - s * s * h222) * b[ll] * l[j] * l[kk]
            - s * h222 * b[kk] * b[ll] * l[j])
            * bu[i]
    };
    let cyclic = |f: &dyn Fn(usize, usize, usize, usize) -> f64, i, j, kk, ll| {
        f(i, j, kk, ll) + f(i, kk, ll, j) + f(i, ll, j, kk)
    };
    Array4::from_shape_fn((p.n, p.n, p.n, p.n), |(i, j, kk, ll)| {
        cyclic(&block1, i, j, kk, ll) - cyclic(&block2, i, j, kk, ll)
            + ((3.0 * e0 - 3.0 * s * e2 - 6.0 * s * s * e22 - s * s * s * e222)
                * l[j]
                * l[kk]
                * l[ll]
                + e222 * b[ll] * b[kk] * b[j])
                * lu[i]
            + cyclic(&block4, i, j, kk, ll)
            + (s * (3.0 * h2 - 3.0 * s * h22 - s * s * h222) * l[j] * l[kk] * l[ll]
                + h222 * b[j] * b[ll] * b[kk])
                * bu[i]
    })
}

/// `V_jkl`, with the same cyclic convention as [`u_tensor`].
pub(super) fn v_tensor(p: &PointState, k: &ScalarPack) -> Array3<f64> {
    let q = Parts::new(p, k);
    let (a, b, l, s) = (q.a, q.b, q.l, q.s);
    let [e0, e2, e22, e222] = q.e;
    let [_, h2, h22, h222] = q.h;
    let (phi, phi2) = (k.phi, k.phi2);
    let kk_factor = k.k();
    let weight = |j: usize| phi * l[j] + phi2 * (b[j] - s * l[j]);

    let block1 = |j: usize, kk: usize, ll: usize| {
        ((e0 - s * e2) * a[(kk, ll)] + e22 * b[kk] * b[ll]) * weight(j)
            - ((e22 + s * e222) * (b[ll] - s * l[ll]) - 2.0 * e22 * s * l[ll]) * phi * b[kk] * l[j]
    };
    let block2 = |j: usize, kk: usize, ll: usize| {
        s * e22 * (a[(j, ll)] * b[kk] * phi + (l[ll] * b[kk] + l[kk] * b[ll]) * weight(j))
            + (e0 - s * e2 - s * s * e22) * (a[(j, ll)] * l[kk] * phi + weight(j) * l[kk] * l[ll])
    };
    let block4 = |j: usize, kk: usize, ll: usize| {
        ((h2 - s * h22) * (a[(kk, ll)] * (b[j] - s * l[j]) - b[ll] * l[kk] * l[j])
            - s * h222 * l[j] * b[ll] * (b[kk] - s * l[kk]))
            * kk_factor
    };
    let cyclic = |f: &dyn Fn(usize, usize, usize) -> f64, j, kk, ll| {
        f(j, kk, ll) + f(kk, ll, j) + f(ll, j, kk)
    };
    Array3::from_shape_fn((p.n, p.n, p.n), |(j, kk, ll)| {
        cyclic(&block1, j, kk, ll) - cyclic(&block2, j, kk, ll)
            + ((3.0 * e0 - 3.0 * s * e2 - 6.0 * s * s * e22 - s * s * s * e222)
                * l[j]
                * l[kk]
                * l[ll]
                + e222 * b[j] * b[kk] * b[ll])
                * phi
            + cyclic(&block4, j, kk, ll)
            + (s * (3.0 * h2 - 3.0 * s * h22 - s * s * h222) * l[j] * l[kk] * l[ll]
                + h222 * b[j] * b[kk] * b[ll])
                * kk_factor
    })
}

/// The scalar multiplying `(b_j - sl_j)` in `a^{kl}V_jkl`.
pub(super) fn a_contraction_coefficient(k: &ScalarPack, n: usize) -> f64 {
    let [e0, e2, e22, e222] = k.e;
    let [_, h2, h22, h222] = k.h;
    let (s, d, np1) = (k.s, k.gap(), n as f64 + 1.0);
    (e0 - s * e2) * np1 * k.phi2 + 3.0 * e22 * k.phi2 * d - s * e22 * np1 * k.phi
        + e222 * k.phi * d
        + ((h2 - s * h22) * np1 + h222 * d) * k.k()
}

/// The scalar multiplying `(b_j - sl_j)` in `ηb^kb^lV_jkl`.
pub(super) fn b_contraction_coefficient(k: &ScalarPack) -> f64 {
    let [e0, e2, e22, e222] = k.e;
    let [_, h2, h22, h222] = k.h;
    let (s, d, eta) = (k.s, k.gap(), k.eta);
    3.0 * eta * (e0 - s * e2) * k.phi2 * d + 3.0 * eta * e22 * k.phi2 * d * d
        - 3.0 * s * eta * e22 * k.phi * d
        + eta * e222 * d * d * k.phi
        + eta * (3.0 * (h2 - s * h22) * d + h222 * d * d) * k.k()
}

/// The scalar `w` with `W_j = w·(b_j - sl_j)`.
pub fn w_coefficient(k: &ScalarPack, n: usize) -> f64 {
    a_contraction_coefficient(k, n) + b_contraction_coefficient(k)
}

/// `w` split into the four groups multiplying the condition expressions.
pub fn w_groups(k: &ScalarPack, n: usize) -> [f64; 4] {
    let [f1, f2, f3] = auxiliary_factors(k, n);
    [
        f1 * k.weak_landsberg_combined(),
        f2 * k.k() * k.h[3],
        f3 * k.e[2],
        f2 * k.phi * k.e[3],
    ]
}

/// `1 + n + 3(b² - s²)η`, `(b² - s²)[1 + (b² - s²)η]` and
/// `3(b² - s²)[1 + (b² - s²)η]φ₂ - [1 + n + 3(b² - s²)η]sφ`.
pub fn auxiliary_factors(k: &ScalarPack, n: usize) -> [f64; 3] {
    let d = k.gap();
    let f1 = 1.0 + n as f64 + 3.0 * d * k.eta;
    let f2 = d * (1.0 + d * k.eta);
    [f1, f2, 3.0 * f2 * k.phi2 - f1 * k.s * k.phi]
}

/// Size of the terms of `w` before any cancellation.
pub fn w_scale(k: &ScalarPack, n: usize) -> f64 {
    let [e0, e2, e22, e222] = k.e.map(f64::abs);
    let [_, h2, h22, h222] = k.h.map(f64::abs);
    let (s, d) = (k.s.abs(), k.gap().abs());
    let f = 1.0 + n as f64 + 3.0 * d * k.eta.abs();
    let phis = k.phi.abs() + k.phi2.abs();
    f * ((e0 + s * e2 + d * e22 + d * d * e222) * phis + (h2 + s * h22 + d * h222) * k.k().abs())
}

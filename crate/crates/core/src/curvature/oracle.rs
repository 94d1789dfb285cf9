//! Independent routes: jet derivatives of `F²` and of the spray.

use nalgebra::{DMatrix, DVector};
use ndarray::{Array1, Array3, Array4};

use crate::jet::{self, Jet, JetScalar};
use crate::linalg;
use crate::phi::{eh_scalars, PhiPartials};

use super::{CurvatureError, FinslerMetric, PointState};

fn unit(n: usize, i: usize) -> Vec<f64> {
    let mut e = vec![0.0; n];
    e[i] = 1.0;
    e
}

/// `F²(x, y)` with both arguments on jets of one shared shape.
pub(super) fn f_squared(
    metric: &FinslerMetric,
    x: &[Jet],
    y: &[Jet],
) -> Result<Jet, CurvatureError> {
    let v = metric.manifold.eval_jets(x)?;
    let a_inv = linalg::invert(&v.metric)?;
    let b2 = linalg::bilinear(&a_inv, &v.oneform, &v.oneform);
    let alpha2 = linalg::bilinear(&v.metric, y, y);
    let alpha = alpha2.try_sqrt()?;
    let s = linalg::dot(&v.oneform, y).try_div(alpha)?;
    let phi = metric.phi.eval(b2, s)?;
    Ok(alpha2 * phi.square())
}

/// `½ ∂²F²/∂y^i∂y^j` by polarization.
pub(super) fn fundamental_tensor(
    metric: &FinslerMetric,
    x: &[f64],
    y: &[f64],
) -> Result<DMatrix<f64>, CurvatureError> {
    let n = y.len();
    let f = |z: &[Jet]| -> Result<Jet, CurvatureError> {
        let order = z[0].order();
        let xs = x
            .iter()
            .map(|&v| Jet::constant(v, order))
            .collect::<Result<Vec<_>, _>>()?;
        f_squared(metric, &xs, z)
    };
    let mut g = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = 0.5 * jet::mixed_partial(f, y, &[unit(n, i), unit(n, j)])?;
            g[(i, j)] = v;
            g[(j, i)] = v;
        }
    }
    Ok(g)
}

/// `G^i = ¼ g^{il}{[F²]_{x^m y^l} y^m - [F²]_{x^l}}` with jets over `(x, y)`.
pub(super) fn spray(
    metric: &FinslerMetric,
    x: &[f64],
    y: &[f64],
    g_inv: &DMatrix<f64>,
) -> Result<DVector<f64>, CurvatureError> {
    let n = y.len();
    let f = |z: &[Jet]| f_squared(metric, &z[..n], &z[n..]);
    let point: Vec<f64> = x.iter().chain(y).copied().collect();
    let along_y: Vec<f64> = y
        .iter()
        .copied()
        .chain(std::iter::repeat_n(0.0, n))
        .collect();
    let mut rhs = DVector::zeros(n);
    for l in 0..n {
        let mut dy = vec![0.0; 2 * n];
        dy[n + l] = 1.0;
        let mixed = jet::mixed_partial(f, &point, &[along_y.clone(), dy])?;
        let dx = jet::directional_derivatives(f, &point, &unit(2 * n, l), 1)?;
        rhs[l] = mixed - dx[1];
    }
    Ok(g_inv * rhs * 0.25)
}

/// `∂³G^i/∂y^j∂y^k∂y^l` of the closed-conformal spray, `x` frozen.
///
/// `φ` and its partials follow the path through their `s`-Taylor expansions
/// at the base point; `E` and `H` are then recomputed from those jets.
pub(super) fn berwald(
    p: &PointState,
    c: f64,
    partials: &PhiPartials,
    gamma: &ndarray::Array3<f64>,
) -> Result<Array4<f64>, CurvatureError> {
    let n = p.n;
    let spray = |y: &[Jet]| -> Result<Vec<Jet>, CurvatureError> {
        let order = y[0].order();
        let a = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| y[0].constant_like(p.a[(i, j)]))
                    .collect::<Vec<_>>()
            })
            .collect::<Vec<_>>();
        let b: Vec<Jet> = p.b.iter().map(|&v| y[0].constant_like(v)).collect();
        let alpha2 = linalg::bilinear(&a, y, y);
        let alpha = alpha2.try_sqrt()?;
        let s = linalg::dot(&b, y).try_div(alpha)?;
        let along = |pp: usize, q: usize| s.compose_taylor(&partials.table[pp][q..]);
        let b2 = Jet::constant(p.b2, order)?;
        let (e, h) = eh_scalars(
            b2,
            s,
            along(0, 0)?,
            along(1, 0)?,
            along(0, 1)?,
            along(1, 1)?,
            along(0, 2)?,
        )?;
        Ok((0..n)
            .map(|i| {
                let mut g_alpha = y[0].zero_like();
                for j in 0..n {
                    for k in 0..n {
                        g_alpha = g_alpha + y[j] * y[k] * (0.5 * gamma[[i, j, k]]);
                    }
                }
                g_alpha + (alpha * e * y[i] + alpha2 * h * p.b_up[i]) * c
            })
            .collect())
    };
    let mut out = Array4::zeros((n, n, n, n));
    for j in 0..n {
        for k in j..n {
            for l in k..n {
                let d = jet::mixed_partial_vec(spray, &p.y, &[unit(n, j), unit(n, k), unit(n, l)])?;
                for (i, v) in d.into_iter().enumerate() {
                    for (a, b, cc) in [
                        (j, k, l),
                        (j, l, k),
                        (k, j, l),
                        (k, l, j),
                        (l, j, k),
                        (l, k, j),
                    ] {
                        out[[i, a, b, cc]] = v;
                    }
                }
            }
        }
    }
    Ok(out)
}

/// `-½ y^m g_im B^i_jkl`
pub(super) fn landsberg(y: &[f64], g: &DMatrix<f64>, b: &Array4<f64>) -> Array3<f64> {
    let n = y.len();
    let yg: Vec<f64> = (0..n)
        .map(|i| (0..n).map(|m| y[m] * g[(i, m)]).sum())
        .collect();
    Array3::from_shape_fn((n, n, n), |(j, k, l)| {
        -0.5 * (0..n).map(|i| yg[i] * b[[i, j, k, l]]).sum::<f64>()
    })
}

/// `g^{kl} L_jkl`
pub(super) fn mean_landsberg(g_inv: &DMatrix<f64>, l: &Array3<f64>) -> Array1<f64> {
    let n = g_inv.nrows();
    Array1::from_shape_fn(n, |j| {
        let mut acc = 0.0;
        for k in 0..n {
            for m in 0..n {
                acc += g_inv[(k, m)] * l[[j, k, m]];
            }
        }
        acc
    })
}

//! Adaptive Simpson quadrature with an absolute error target.

use thiserror::Error;

const MAX_DEPTH: u32 = 48;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuadratureError {
    #[error(
        "quadrature did not converge on [{a}, {b}]: estimate {estimate}, error bound {error:e}"
    )]
    NoConvergence {
        a: f64,
        b: f64,
        estimate: f64,
        error: f64,
    },
    #[error("integrand is not finite at {at}")]
    NonFinite { at: f64 },
}

/// `∫_a^b f` to absolute tolerance `tol`. Reversed limits flip the sign.
pub fn adaptive_simpson<F, E>(f: F, a: f64, b: f64, tol: f64) -> Result<f64, E>
where
    F: Fn(f64) -> Result<f64, E>,
    E: From<QuadratureError>,
{
    if a == b {
        return Ok(0.0);
    }
    if a > b {
        return adaptive_simpson(f, b, a, tol).map(|v: f64| -v);
    }
    let eval = |x: f64| -> Result<f64, E> {
        let v = f(x)?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(QuadratureError::NonFinite { at: x }.into())
        }
    };
    let fa = eval(a)?;
    let fb = eval(b)?;
    let m = 0.5 * (a + b);
    let fm = eval(m)?;
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    let mut failure = None;
    let value = refine(
        &eval,
        Panel {
            a,
            b,
            fa,
            fm,
            fb,
            whole,
        },
        tol,
        MAX_DEPTH,
        &mut failure,
    )?;
    match failure {
        Some(error) => Err(QuadratureError::NoConvergence {
            a,
            b,
            estimate: value,
            error,
        }
        .into()),
        None => Ok(value),
    }
}

struct Panel {
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
}

fn refine<F, E>(f: &F, p: Panel, tol: f64, depth: u32, failure: &mut Option<f64>) -> Result<f64, E>
where
    F: Fn(f64) -> Result<f64, E>,
{
    let m = 0.5 * (p.a + p.b);
    let lm = 0.5 * (p.a + m);
    let rm = 0.5 * (m + p.b);
    let flm = f(lm)?;
    let frm = f(rm)?;
    let left = (m - p.a) / 6.0 * (p.fa + 4.0 * flm + p.fm);
    let right = (p.b - m) / 6.0 * (p.fm + 4.0 * frm + p.fb);
    let delta = left + right - p.whole;
    if delta.abs() <= 15.0 * tol {
        return Ok(left + right + delta / 15.0);
    }
    if depth == 0 {
        *failure = Some(failure.unwrap_or(0.0).max(delta.abs() / 15.0));
        return Ok(left + right + delta / 15.0);
    }
    let l = refine(
        f,
        Panel {
            a: p.a,
            b: m,
            fa: p.fa,
            fm: flm,
            fb: p.fm,
            whole: left,
        },
        0.5 * tol,
        depth - 1,
        failure,
    )?;
    let r = refine(
        f,
        Panel {
            a: m,
            b: p.b,
            fa: p.fm,
            fm: frm,
            fb: p.fb,
            whole: right,
        },
        0.5 * tol,
        depth - 1,
        failure,
    )?;
    Ok(l + r)
}

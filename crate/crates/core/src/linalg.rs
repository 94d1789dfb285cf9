//! Small dense helpers shared by the geometry and curvature code.

use nalgebra::{DMatrix, DVector};

use crate::jet::{JetError, JetScalar};

/// Gauss-Jordan inverse of a small matrix of jets, pivoting on the value part.
pub fn invert<T: JetScalar>(m: &[Vec<T>]) -> Result<Vec<Vec<T>>, JetError> {
    let n = m.len();
    let mut a: Vec<Vec<T>> = m.to_vec();
    let zero = a[0][0].zero_like();
    let mut inv: Vec<Vec<T>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { zero.one_like() } else { zero })
                .collect()
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&p, &q| a[p][col].value().abs().total_cmp(&a[q][col].value().abs()))
            .unwrap_or(col);
        a.swap(col, pivot);
        inv.swap(col, pivot);
        let recip = a[col][col].try_recip()?;
        for j in 0..n {
            a[col][j] = a[col][j] * recip;
            inv[col][j] = inv[col][j] * recip;
        }
        for row in 0..n {
            if row == col {
                continue;
            }
            let factor = a[row][col];
            if factor.is_exact_zero() {
                continue;
            }
            for j in 0..n {
                a[row][j] = a[row][j] - factor * a[col][j];
                inv[row][j] = inv[row][j] - factor * inv[col][j];
            }
        }
    }
    Ok(inv)
}

/// `Σ_ij m_ij u_i v_j`.
pub fn bilinear<T: JetScalar>(m: &[Vec<T>], u: &[T], v: &[T]) -> T {
    let mut acc = u[0].zero_like();
    for (mi, ui) in m.iter().zip(u) {
        for (mij, vj) in mi.iter().zip(v) {
            acc = acc + *mij * *ui * *vj;
        }
    }
    acc
}

pub fn dot<T: JetScalar>(u: &[T], v: &[T]) -> T {
    u.iter()
        .zip(v)
        .fold(u[0].zero_like(), |acc, (a, b)| acc + *a * *b)
}

pub fn to_values<T: JetScalar>(m: &[Vec<T>]) -> DMatrix<f64> {
    let n = m.len();
    DMatrix::from_fn(n, n, |i, j| m[i][j].value())
}

pub fn to_vector<T: JetScalar>(v: &[T]) -> DVector<f64> {
    DVector::from_iterator(v.len(), v.iter().map(|x| x.value()))
}

/// Largest absolute entry.
pub fn max_abs<'a>(values: impl IntoIterator<Item = &'a f64>) -> f64 {
    values.into_iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

/// Largest absolute difference between two equally-shaped sequences.
pub fn max_abs_diff<'a>(
    a: impl IntoIterator<Item = &'a f64>,
    b: impl IntoIterator<Item = &'a f64>,
) -> f64 {
    a.into_iter()
        .zip(b)
        .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
}

/// Discrepancy normalized by the larger of the two results and a natural
/// floor scale: `max|a-b| / (max(max|a|, max|b|, floor) + 1e-30)`.
pub fn relative_discrepancy(a: &[f64], b: &[f64], floor: f64) -> f64 {
    let scale = max_abs(a).max(max_abs(b)).max(floor.abs());
    max_abs_diff(a, b) / (scale + 1e-30)
}

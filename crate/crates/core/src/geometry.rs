//! Riemannian base data `(α, β)` on a coordinate chart.
//!
//! A [`ManifoldModel`] evaluates the metric `a_ij(x)` and the one-form
//! `b_i(x)` on jets, so every x-derivative the curvature code needs (the
//! Christoffel symbols, `b_{i|j}`, the x-derivatives inside the definitional
//! spray) comes from the same jet engine.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use ndarray::Array3;
use serde::Serialize;
use thiserror::Error;

use crate::jet::{Jet, JetError, JetScalar};
use crate::linalg;

/// Default tolerance on `b_{i|j} - c·a_ij` entries.
pub const CLOSED_CONFORMAL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("metric is not invertible at x = {x:?}")]
    NonInvertibleMetric { x: Vec<f64> },
    #[error(
        "metric is not positive definite at x = {x:?} (smallest eigenvalue {min_eigenvalue:e})"
    )]
    NotPositiveDefinite { x: Vec<f64>, min_eigenvalue: f64 },
    #[error("y = 0 is outside the slit tangent bundle")]
    DegenerateDirection,
    #[error("|β|_α = {norm} violates the bound b0 = {bound}")]
    BoundExceeded { norm: f64, bound: f64 },
    #[error("expected a {expected}-vector, got length {got}")]
    Dimension { expected: usize, got: usize },
    #[error(transparent)]
    Jet(#[from] JetError),
}

/// Metric and one-form evaluated at a (jet-valued) chart point.
#[derive(Debug, Clone)]
pub struct ChartValues<T = Jet> {
    pub metric: Vec<Vec<T>>,
    pub oneform: Vec<T>,
}

pub type FieldFn = Arc<dyn Fn(&[Jet]) -> Result<ChartValues, JetError> + Send + Sync>;

#[derive(Clone)]
pub enum ModelKind {
    /// `a_ij = δ_ij`, `b_i = c0·x_i + d_i`.
    EuclideanConformal { c0: f64, d: Vec<f64> },
    /// Arbitrary jet-evaluable fields.
    GeneralCallable { name: String, field: FieldFn },
}

impl fmt::Debug for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelKind::EuclideanConformal { c0, d } => f
                .debug_struct("EuclideanConformal")
                .field("c0", c0)
                .field("d", d)
                .finish(),
            ModelKind::GeneralCallable { name, .. } => f
                .debug_struct("GeneralCallable")
                .field("name", name)
                .finish(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ManifoldModel {
    dim: usize,
    kind: ModelKind,
    b0: f64,
}

/// Plain values of the base data at one point.
#[derive(Debug, Clone)]
pub struct ChartPoint {
    pub x: Vec<f64>,
    pub a: DMatrix<f64>,
    pub a_inv: DMatrix<f64>,
    /// `b_i`
    pub b: DVector<f64>,
    /// `b^i = a^{ij} b_j`
    pub b_up: DVector<f64>,
    pub b2: f64,
}

/// The symmetric/antisymmetric split of `b_{i|j}` and its contractions.
#[derive(Debug, Clone, Serialize)]
pub struct RsInvariants {
    pub r_ij: Vec<Vec<f64>>,
    pub s_ij: Vec<Vec<f64>>,
    pub r00: f64,
    pub r_i: Vec<f64>,
    pub r0: f64,
    pub r_up: Vec<f64>,
    pub r: f64,
    pub s_up0: Vec<f64>,
    pub s_i: Vec<f64>,
    pub s0: f64,
    pub s_up: Vec<f64>,
    /// Conformal factor when `b_{i|j} = c·a_ij` holds at this point.
    pub c: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ClosedConformalReport {
    pub holds: bool,
    pub c_values: Vec<f64>,
    pub max_residual: f64,
}

impl ManifoldModel {
    pub fn euclidean_conformal(c0: f64, d: Vec<f64>) -> Result<Self, GeometryError> {
        if d.len() < 2 {
            return Err(GeometryError::Dimension {
                expected: 2,
                got: d.len(),
            });
        }
        Ok(ManifoldModel {
            dim: d.len(),
            kind: ModelKind::EuclideanConformal { c0, d },
            b0: f64::INFINITY,
        })
    }

    pub fn general(dim: usize, name: impl Into<String>, field: FieldFn) -> Self {
        ManifoldModel {
            dim,
            kind: ModelKind::GeneralCallable {
                name: name.into(),
                field,
            },
            b0: f64::INFINITY,
        }
    }

    /// Conformally flat metric `e^{2λ|x|²} δ_ij` carrying the one-form `b_i = d_i`.
    pub fn conformally_flat(lambda: f64, d: Vec<f64>) -> Self {
        let n = d.len();
        let field: FieldFn = Arc::new(move |x: &[Jet]| {
            let r2 = linalg::dot(x, x);
            let scale = (r2 * (2.0 * lambda)).exp();
            let zero = scale.zero_like();
            let metric = (0..n)
                .map(|i| (0..n).map(|j| if i == j { scale } else { zero }).collect())
                .collect();
            let oneform = d.iter().map(|&di| scale.constant_like(di)).collect();
            Ok(ChartValues { metric, oneform })
        });
        ManifoldModel::general(n, format!("conformally_flat(lambda={lambda})"), field)
    }

    /// Euclidean metric with the rotational one-form `b = ω(-x², x¹, 0, …)`,
    /// which is neither closed nor conformal.
    pub fn rotational(dim: usize, omega: f64) -> Self {
        let field: FieldFn = Arc::new(move |x: &[Jet]| {
            let zero = x[0].zero_like();
            let metric = (0..dim)
                .map(|i| {
                    (0..dim)
                        .map(|j| if i == j { zero.one_like() } else { zero })
                        .collect()
                })
                .collect();
            let mut oneform = vec![zero; dim];
            oneform[0] = -x[1] * omega;
            oneform[1] = x[0] * omega;
            Ok(ChartValues { metric, oneform })
        });
        ManifoldModel::general(dim, format!("rotational(omega={omega})"), field)
    }

    pub fn with_bound(mut self, b0: f64) -> Self {
        self.b0 = b0;
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> &ModelKind {
        &self.kind
    }

    pub fn bound(&self) -> f64 {
        self.b0
    }

    pub fn is_euclidean(&self) -> bool {
        matches!(self.kind, ModelKind::EuclideanConformal { .. })
    }

    /// Short human-readable description for reports.
    pub fn describe(&self) -> String {
        match &self.kind {
            ModelKind::EuclideanConformal { c0, d } => {
                format!("euclidean_conformal(n={}, c0={c0}, d={d:?})", self.dim)
            }
            ModelKind::GeneralCallable { name, .. } => name.clone(),
        }
    }

    fn check_dim(&self, len: usize) -> Result<(), GeometryError> {
        if len != self.dim {
            return Err(GeometryError::Dimension {
                expected: self.dim,
                got: len,
            });
        }
        Ok(())
    }

    /// Metric and one-form on jet-valued coordinates.
    pub fn eval_jets(&self, x: &[Jet]) -> Result<ChartValues, GeometryError> {
        self.check_dim(x.len())?;
        match &self.kind {
            ModelKind::EuclideanConformal { c0, d } => {
                let zero = x[0].zero_like();
                let metric = (0..self.dim)
                    .map(|i| {
                        (0..self.dim)
                            .map(|j| if i == j { zero.one_like() } else { zero })
                            .collect()
                    })
                    .collect();
                let oneform = x.iter().zip(d).map(|(xi, di)| *xi * *c0 + *di).collect();
                Ok(ChartValues { metric, oneform })
            }
            ModelKind::GeneralCallable { field, .. } => {
                let values = field(x)?;
                if values.metric.len() != self.dim || values.oneform.len() != self.dim {
                    return Err(GeometryError::Dimension {
                        expected: self.dim,
                        got: values.oneform.len(),
                    });
                }
                Ok(values)
            }
        }
    }

    pub fn at(&self, x: &[f64]) -> Result<ChartPoint, GeometryError> {
        let jets = x
            .iter()
            .map(|&v| Jet::constant(v, 0))
            .collect::<Result<Vec<_>, _>>()?;
        let values = self.eval_jets(&jets)?;
        let a = linalg::to_values(&values.metric);
        let b = linalg::to_vector(&values.oneform);
        let a_inv = a
            .clone()
            .try_inverse()
            .ok_or_else(|| GeometryError::NonInvertibleMetric { x: x.to_vec() })?;
        let b_up = &a_inv * &b;
        let b2 = b.dot(&b_up);
        Ok(ChartPoint {
            x: x.to_vec(),
            a,
            a_inv,
            b,
            b_up,
            b2,
        })
    }

    /// Checks positive definiteness of `a_ij(x)` and the bound `b < b0`.
    pub fn validate_point(&self, x: &[f64]) -> Result<ChartPoint, GeometryError> {
        let p = self.at(x)?;
        let eig = p.a.clone().symmetric_eigen();
        let min_eigenvalue = eig
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        if min_eigenvalue <= 0.0 {
            return Err(GeometryError::NotPositiveDefinite {
                x: x.to_vec(),
                min_eigenvalue,
            });
        }
        let norm = p.b2.sqrt();
        if norm >= self.b0 {
            return Err(GeometryError::BoundExceeded {
                norm,
                bound: self.b0,
            });
        }
        Ok(p)
    }

    /// `∂_m a_ij` and `∂_m b_i` at `x`, indexed `[m][i][j]` and `[m][i]`.
    fn first_derivatives(
        &self,
        x: &[f64],
    ) -> Result<(Vec<Vec<Vec<f64>>>, Vec<Vec<f64>>), GeometryError> {
        let n = self.dim;
        let mut da = Vec::with_capacity(n);
        let mut db = Vec::with_capacity(n);
        for m in 0..n {
            let jets = (0..n)
                .map(|i| Jet::line(x[i], if i == m { 1.0 } else { 0.0 }, 1))
                .collect::<Result<Vec<_>, _>>()?;
            let v = self.eval_jets(&jets)?;
            da.push(
                v.metric
                    .iter()
                    .map(|row| row.iter().map(|e| e.derivative(1)).collect())
                    .collect(),
            );
            db.push(v.oneform.iter().map(|e| e.derivative(1)).collect());
        }
        Ok((da, db))
    }

    /// Christoffel symbols `Γ^i_jk`, indexed `[i, j, k]`.
    pub fn christoffel(&self, x: &[f64]) -> Result<Array3<f64>, GeometryError> {
        self.check_dim(x.len())?;
        let n = self.dim;
        if self.is_euclidean() {
            return Ok(Array3::zeros((n, n, n)));
        }
        let p = self.at(x)?;
        let (da, _) = self.first_derivatives(x)?;
        let mut gamma = Array3::zeros((n, n, n));
        for i in 0..n {
            for j in 0..n {
                for k in j..n {
                    let mut acc = 0.0;
                    for l in 0..n {
                        acc += p.a_inv[(i, l)] * (da[j][l][k] + da[k][l][j] - da[l][j][k]);
                    }
                    gamma[[i, j, k]] = 0.5 * acc;
                    gamma[[i, k, j]] = 0.5 * acc;
                }
            }
        }
        Ok(gamma)
    }

    /// Covariant derivative `b_{i|j} = ∂_j b_i - Γ^k_ij b_k`, as matrix `(i, j)`.
    pub fn covariant_derivative(&self, x: &[f64]) -> Result<DMatrix<f64>, GeometryError> {
        self.check_dim(x.len())?;
        let n = self.dim;
        if let ModelKind::EuclideanConformal { c0, .. } = self.kind {
            return Ok(DMatrix::identity(n, n) * c0);
        }
        let p = self.at(x)?;
        let (_, db) = self.first_derivatives(x)?;
        let gamma = self.christoffel(x)?;
        Ok(DMatrix::from_fn(n, n, |i, j| {
            let mut v = db[j][i];
            for k in 0..n {
                v -= gamma[[k, i, j]] * p.b[k];
            }
            v
        }))
    }

    /// Trace estimate `ĉ = a^{ij} b_{i|j} / n` and the residual
    /// `max |b_{i|j} - ĉ a_ij|`.
    pub fn conformal_factor(&self, x: &[f64]) -> Result<(f64, f64), GeometryError> {
        let p = self.at(x)?;
        let bij = self.covariant_derivative(x)?;
        let n = self.dim as f64;
        let c = (0..self.dim)
            .flat_map(|i| (0..self.dim).map(move |j| (i, j)))
            .map(|(i, j)| p.a_inv[(i, j)] * bij[(i, j)])
            .sum::<f64>()
            / n;
        let residual = (&bij - &p.a * c).iter().fold(0.0f64, |m, v| m.max(v.abs()));
        Ok((c, residual))
    }

    pub fn closed_conformal_check(
        &self,
        samples: &[Vec<f64>],
        tol: f64,
    ) -> Result<ClosedConformalReport, GeometryError> {
        let mut c_values = Vec::with_capacity(samples.len());
        let mut max_residual = 0.0f64;
        for x in samples {
            let (c, r) = self.conformal_factor(x)?;
            c_values.push(c);
            max_residual = max_residual.max(r);
        }
        Ok(ClosedConformalReport {
            holds: !samples.is_empty() && max_residual <= tol,
            c_values,
            max_residual,
        })
    }

    pub fn rs_split(&self, x: &[f64], y: &[f64]) -> Result<RsInvariants, GeometryError> {
        self.check_dim(y.len())?;
        if y.iter().all(|&v| v == 0.0) {
            return Err(GeometryError::DegenerateDirection);
        }
        let n = self.dim;
        let p = self.at(x)?;
        let bij = self.covariant_derivative(x)?;
        let yv = DVector::from_column_slice(y);
        let r_m = (&bij + bij.transpose()) * 0.5;
        let s_m = (&bij - bij.transpose()) * 0.5;
        let r00 = yv.dot(&(&r_m * &yv));
        // r_i = b^j r_ji, s_i = b^j s_ji
        let r_i = r_m.transpose() * &p.b_up;
        let s_i = s_m.transpose() * &p.b_up;
        let r0 = r_i.dot(&yv);
        let s0 = s_i.dot(&yv);
        let r_up = &p.a_inv * &r_i;
        let s_up = &p.a_inv * &s_i;
        let r = p.b_up.dot(&r_i);
        let s_up0 = &p.a_inv * (&s_m * &yv);
        let (c, residual) = self.conformal_factor(x)?;
        let to_rows = |m: &DMatrix<f64>| {
            (0..n)
                .map(|i| (0..n).map(|j| m[(i, j)]).collect())
                .collect()
        };
        Ok(RsInvariants {
            r_ij: to_rows(&r_m),
            s_ij: to_rows(&s_m),
            r00,
            r_i: r_i.iter().copied().collect(),
            r0,
            r_up: r_up.iter().copied().collect(),
            r,
            s_up0: s_up0.iter().copied().collect(),
            s_i: s_i.iter().copied().collect(),
            s0,
            s_up: s_up.iter().copied().collect(),
            c: (residual <= CLOSED_CONFORMAL_TOL).then_some(c),
        })
    }

    /// Spray of `α`: `G_α^i = ½ Γ^i_jk y^j y^k`.
    pub fn alpha_spray(&self, x: &[f64], y: &[f64]) -> Result<DVector<f64>, GeometryError> {
        self.check_dim(y.len())?;
        if y.iter().all(|&v| v == 0.0) {
            return Err(GeometryError::DegenerateDirection);
        }
        let n = self.dim;
        let gamma = self.christoffel(x)?;
        Ok(DVector::from_fn(n, |i, _| {
            let mut acc = 0.0;
            for j in 0..n {
                for k in 0..n {
                    acc += gamma[[i, j, k]] * y[j] * y[k];
                }
            }
            0.5 * acc
        }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn flat(c0: f64) -> ManifoldModel {
        ManifoldModel::euclidean_conformal(c0, vec![0.1, -0.2, 0.3]).unwrap()
    }

    #[test]
    fn euclidean_christoffels_vanish() {
        let g = flat(0.7).christoffel(&[0.3, 1.0, -2.0]).unwrap();
        assert!(g.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn conformal_metric_christoffels_vanish_at_origin() {
        let m = ManifoldModel::conformally_flat(0.4, vec![0.2, 0.1, 0.0]);
        let g = m.christoffel(&[0.0, 0.0, 0.0]).unwrap();
        assert!(g.iter().all(|v| v.abs() < 1e-15));
        // away from the origin Γ^i_ii = ∂_i λ-type terms are nonzero: Γ^0_00 = 2λ x_0
        let g = m.christoffel(&[0.5, 0.0, 0.0]).unwrap();
        assert_relative_eq!(g[[0, 0, 0]], 2.0 * 0.4 * 0.5, epsilon = 1e-14);
        assert_relative_eq!(g[[0, 1, 1]], -2.0 * 0.4 * 0.5, epsilon = 1e-14);
    }

    #[test]
    fn constant_general_metric_has_zero_christoffels() {
        let field: FieldFn = Arc::new(|x: &[Jet]| {
            let c = |v: f64| x[0].constant_like(v);
            Ok(ChartValues {
                metric: vec![vec![c(2.0), c(0.3)], vec![c(0.3), c(1.0)]],
                oneform: vec![c(0.1), c(0.2)],
            })
        });
        let m = ManifoldModel::general(2, "constant", field);
        assert!(m
            .christoffel(&[0.4, -1.0])
            .unwrap()
            .iter()
            .all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn preset_rs_split() {
        let m = ManifoldModel::euclidean_conformal(0.3, vec![0.0; 3]).unwrap();
        let rs = m.rs_split(&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0]).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert_relative_eq!(rs.r_ij[i][j], if i == j { 0.3 } else { 0.0 });
                assert_eq!(rs.s_ij[i][j], 0.0);
            }
        }
        assert_relative_eq!(rs.r00, 0.3);
        assert!(rs.s_up0.iter().chain(&rs.s_up).all(|&v| v == 0.0));
        assert_eq!(rs.s0, 0.0);
        assert_eq!(rs.c, Some(0.3));
    }

    #[test]
    fn closed_conformal_relations_hold_on_preset() {
        let m = flat(1.3);
        let x = [0.4, -0.7, 0.2];
        let y = [0.3, 0.9, -1.1];
        let rs = m.rs_split(&x, &y).unwrap();
        let p = m.at(&x).unwrap();
        let alpha2: f64 = y.iter().map(|v| v * v).sum();
        let beta: f64 = p.b.iter().zip(&y).map(|(b, y)| b * y).sum();
        assert_relative_eq!(rs.r00, 1.3 * alpha2, epsilon = 1e-12);
        assert_relative_eq!(rs.r0, 1.3 * beta, epsilon = 1e-12);
        assert_relative_eq!(rs.r, 1.3 * p.b2, epsilon = 1e-12);
        for i in 0..3 {
            assert_relative_eq!(rs.r_up[i], 1.3 * p.b_up[i], epsilon = 1e-12);
        }
    }

    #[test]
    fn curl_one_form_is_rejected() {
        let m = ManifoldModel::rotational(3, 1.0);
        let rs = m.rs_split(&[0.2, 0.5, 0.1], &[1.0, 0.0, 0.0]).unwrap();
        assert_relative_eq!(rs.s_ij[1][0], 1.0, epsilon = 1e-14);
        assert_relative_eq!(rs.s_ij[0][1], -1.0, epsilon = 1e-14);
        assert!(rs.c.is_none());
        let report = m
            .closed_conformal_check(&[vec![0.2, 0.5, 0.1]], CLOSED_CONFORMAL_TOL)
            .unwrap();
        assert!(!report.holds);
    }

    #[test]
    fn check_reports_constant_factor() {
        let samples = vec![
            vec![0.0, 0.0, 0.0],
            vec![1.0, 2.0, 3.0],
            vec![-0.5, 0.1, 0.9],
        ];
        let r = flat(1.0)
            .closed_conformal_check(&samples, CLOSED_CONFORMAL_TOL)
            .unwrap();
        assert!(r.holds);
        assert!(r.c_values.iter().all(|&c| c == 1.0));
        assert_eq!(r.max_residual, 0.0);
        let r = flat(0.0)
            .closed_conformal_check(&samples, CLOSED_CONFORMAL_TOL)
            .unwrap();
        assert!(r.holds && r.c_values.iter().all(|&c| c == 0.0));
    }

    #[test]
    fn jet_covariant_derivative_matches_preset() {
        // route the Euclidean preset through the general path
        let c0 = 0.45;
        let d = [0.2, -0.1, 0.4];
        let field: FieldFn = Arc::new(move |x: &[Jet]| {
            let zero = x[0].zero_like();
            Ok(ChartValues {
                metric: (0..3)
                    .map(|i| {
                        (0..3)
                            .map(|j| if i == j { zero.one_like() } else { zero })
                            .collect()
                    })
                    .collect(),
                oneform: (0..3).map(|i| x[i] * c0 + d[i]).collect(),
            })
        });
        let m = ManifoldModel::general(3, "flat-general", field);
        let bij = m.covariant_derivative(&[0.3, 0.3, -0.8]).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert!((bij[(i, j)] - if i == j { c0 } else { 0.0 }).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn alpha_spray_properties() {
        assert!(flat(0.2)
            .alpha_spray(&[0.1, 0.2, 0.3], &[1.0, 2.0, 3.0])
            .unwrap()
            .iter()
            .all(|&v| v == 0.0));
        let m = ManifoldModel::conformally_flat(0.3, vec![0.0; 3]);
        let at_origin = m.alpha_spray(&[0.0; 3], &[1.0, -1.0, 0.5]).unwrap();
        assert!(at_origin.iter().all(|v| v.abs() < 1e-15));
        let x = [0.3, -0.2, 0.6];
        let y = [0.4, 1.1, -0.7];
        let g1 = m.alpha_spray(&x, &y).unwrap();
        let g2 = m.alpha_spray(&x, &y.map(|v| 2.0 * v)).unwrap();
        for i in 0..3 {
            assert_relative_eq!(g2[i], 4.0 * g1[i], epsilon = 1e-13);
        }
        assert!(matches!(
            m.alpha_spray(&x, &[0.0; 3]),
            Err(GeometryError::DegenerateDirection)
        ));
    }

    #[test]
    fn validation_rejects_indefinite_metric_and_bound() {
        let field: FieldFn = Arc::new(|x: &[Jet]| {
            let c = |v: f64| x[0].constant_like(v);
            Ok(ChartValues {
                metric: vec![vec![c(1.0), c(0.0)], vec![c(0.0), c(-1.0)]],
                oneform: vec![c(0.0), c(0.0)],
            })
        });
        let m = ManifoldModel::general(2, "lorentzian", field);
        assert!(matches!(
            m.validate_point(&[0.0, 0.0]),
            Err(GeometryError::NotPositiveDefinite { .. })
        ));
        let bounded = flat(1.0).with_bound(0.5);
        assert!(matches!(
            bounded.validate_point(&[1.0, 1.0, 1.0]),
            Err(GeometryError::BoundExceeded { .. })
        ));
    }
}

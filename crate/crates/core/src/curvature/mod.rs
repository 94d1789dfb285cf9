//! `F = αφ(b², β/α)`: fundamental tensor, sprays, and the Berwald, Landsberg
//! and mean Landsberg curvatures.
//!
//! Every quantity with a closed form also has an independent route (jet
//! derivatives of `F²` or of the spray, or a plain contraction), and
//! [`FinslerMetric::report`] puts the routes side by side.

mod closed;
mod oracle;
mod tensor;

use nalgebra::{DMatrix, DVector};
use ndarray::{Array1, Array3, Array4};
use serde::Serialize;
use thiserror::Error;

use crate::geometry::{GeometryError, ManifoldModel};
use crate::jet::JetError;
use crate::linalg::{max_abs, relative_discrepancy};
use crate::phi::{PhiError, PhiModel, ScalarPack};

pub use closed::{auxiliary_factors, w_coefficient, w_groups, w_scale};
pub use tensor::Tensor;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CurvatureError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Phi(#[from] PhiError),
    #[error(transparent)]
    Jet(#[from] JetError),
    #[error("route {route} unavailable: {reason}")]
    RouteUnavailable { route: &'static str, reason: String },
    #[error("fundamental tensor is singular (condition estimate {condition:e})")]
    SingularMetric { condition: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TensorRoute {
    ClosedForm,
    Oracle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InverseRoute {
    ClosedForm,
    MatrixInverse,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SprayRoute {
    Oracle,
    General,
    ClosedConformal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ContractionRoute {
    ClosedForm,
    Contraction,
}

/// Everything about `(x, y)` that the closed forms read.
#[derive(Debug, Clone)]
pub struct PointState {
    pub n: usize,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub alpha: f64,
    pub beta: f64,
    pub s: f64,
    pub b2: f64,
    pub a: DMatrix<f64>,
    pub a_inv: DMatrix<f64>,
    pub b: DVector<f64>,
    pub b_up: DVector<f64>,
    /// `l^i = y^i/α`
    pub l_up: DVector<f64>,
    /// `l_i = a_ij l^j`
    pub l_low: DVector<f64>,
}

/// A general `(α, β)`-metric on a chart.
#[derive(Debug, Clone)]
pub struct FinslerMetric {
    pub manifold: ManifoldModel,
    pub phi: PhiModel,
}

/// Route results and discrepancies at one point.
#[derive(Debug, Clone, Serialize)]
pub struct CurvatureReport {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub b2: f64,
    pub s: f64,
    pub alpha: f64,
    pub c: Option<f64>,
    pub f: f64,
    pub g_closed: Tensor,
    pub g_oracle: Tensor,
    pub g_inv_closed: Tensor,
    pub g_inv_matrix: Tensor,
    pub det_closed: f64,
    pub det_matrix: f64,
    pub positive_definite: bool,
    pub spray_oracle: Tensor,
    pub spray_general: Tensor,
    pub spray_closed_conformal: Option<Tensor>,
    pub berwald_closed: Option<Tensor>,
    pub berwald_oracle: Option<Tensor>,
    pub landsberg_closed: Option<Tensor>,
    pub landsberg_contraction: Option<Tensor>,
    pub mean_landsberg_closed: Option<Tensor>,
    pub mean_landsberg_contraction: Option<Tensor>,
    pub discrepancies: Discrepancies,
}

/// Relative discrepancies, each normalized by the larger route result or the
/// natural scale of the quantity, whichever is bigger.
#[derive(Debug, Clone, Default, Serialize)]
pub struct Discrepancies {
    pub fundamental_tensor: f64,
    pub determinant: f64,
    pub inverse_routes: f64,
    /// `max |g^ik g_kj - δ^i_j|`
    pub inverse_identity: f64,
    /// `|g_ij y^i y^j - F²| / F²`
    pub fundamental_yy: f64,
    pub spray_oracle_general: f64,
    pub spray_oracle_closed_conformal: Option<f64>,
    pub spray_general_closed_conformal: Option<f64>,
    /// Substituted form `Θ(1+2Rb²)+sΩ`, `Ψ(1+2Rb²)+sΠ-R` against `E`, `H`.
    pub spray_substituted: Option<f64>,
    pub berwald: Option<f64>,
    pub berwald_symmetry: Option<f64>,
    pub landsberg: Option<f64>,
    pub landsberg_symmetry: Option<f64>,
    /// `L_jkl y^k`
    pub landsberg_y: Option<f64>,
    pub mean_landsberg: Option<f64>,
    /// `J_j y^j`
    pub mean_landsberg_y: Option<f64>,
    /// `a^{kl}V_jkl` against its displayed form.
    pub proof_a_contraction: Option<f64>,
    /// `ηb^kb^lV_jkl` against its displayed form.
    pub proof_b_contraction: Option<f64>,
    /// Four-group regrouping of `W_j` against the direct sum.
    pub regrouping: Option<f64>,
}

impl Discrepancies {
    /// `(name, value)` for every available entry.
    pub fn entries(&self) -> Vec<(&'static str, f64)> {
        let mut out = vec![
            ("fundamental_tensor", self.fundamental_tensor),
            ("determinant", self.determinant),
            ("inverse_routes", self.inverse_routes),
            ("inverse_identity", self.inverse_identity),
            ("fundamental_yy", self.fundamental_yy),
            ("spray_oracle_general", self.spray_oracle_general),
        ];
        let optional = [
            (
                "spray_oracle_closed_conformal",
                self.spray_oracle_closed_conformal,
            ),
            (
                "spray_general_closed_conformal",
                self.spray_general_closed_conformal,
            ),
            ("spray_substituted", self.spray_substituted),
            ("berwald", self.berwald),
            ("berwald_symmetry", self.berwald_symmetry),
            ("landsberg", self.landsberg),
            ("landsberg_symmetry", self.landsberg_symmetry),
            ("landsberg_y", self.landsberg_y),
            ("mean_landsberg", self.mean_landsberg),
            ("mean_landsberg_y", self.mean_landsberg_y),
            ("proof_a_contraction", self.proof_a_contraction),
            ("proof_b_contraction", self.proof_b_contraction),
            ("regrouping", self.regrouping),
        ];
        out.extend(optional.into_iter().filter_map(|(k, v)| v.map(|v| (k, v))));
        out
    }

    pub fn max(&self) -> f64 {
        self.entries().into_iter().fold(0.0, |m, (_, v)| m.max(v))
    }

    /// Entry-wise maximum with another set of discrepancies.
    pub fn merge(&mut self, other: &Discrepancies) {
        fn opt(a: &mut Option<f64>, b: Option<f64>) {
            if let Some(b) = b {
                *a = Some(a.map_or(b, |a| a.max(b)));
            }
        }
        self.fundamental_tensor = self.fundamental_tensor.max(other.fundamental_tensor);
        self.determinant = self.determinant.max(other.determinant);
        self.inverse_routes = self.inverse_routes.max(other.inverse_routes);
        self.inverse_identity = self.inverse_identity.max(other.inverse_identity);
        self.fundamental_yy = self.fundamental_yy.max(other.fundamental_yy);
        self.spray_oracle_general = self.spray_oracle_general.max(other.spray_oracle_general);
        opt(
            &mut self.spray_oracle_closed_conformal,
            other.spray_oracle_closed_conformal,
        );
        opt(
            &mut self.spray_general_closed_conformal,
            other.spray_general_closed_conformal,
        );
        opt(&mut self.spray_substituted, other.spray_substituted);
        opt(&mut self.berwald, other.berwald);
        opt(&mut self.berwald_symmetry, other.berwald_symmetry);
        opt(&mut self.landsberg, other.landsberg);
        opt(&mut self.landsberg_symmetry, other.landsberg_symmetry);
        opt(&mut self.landsberg_y, other.landsberg_y);
        opt(&mut self.mean_landsberg, other.mean_landsberg);
        opt(&mut self.mean_landsberg_y, other.mean_landsberg_y);
        opt(&mut self.proof_a_contraction, other.proof_a_contraction);
        opt(&mut self.proof_b_contraction, other.proof_b_contraction);
        opt(&mut self.regrouping, other.regrouping);
    }
}

/// Deviations from the expected degree of homogeneity in `y`.
#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct HomogeneityReport {
    pub f: f64,
    pub g: f64,
    pub spray: f64,
    pub berwald: Option<f64>,
}

/// Natural scales used as floors when the route results themselves vanish.
#[derive(Debug, Clone, Copy)]
struct Scales {
    spray: f64,
    berwald: f64,
    landsberg: f64,
    mean_landsberg: f64,
}

fn max_symmetry_defect3(t: &Array3<f64>, scale: f64) -> f64 {
    let mut worst = 0.0f64;
    for ((j, k, l), v) in t.indexed_iter() {
        worst = worst
            .max((v - t[[k, j, l]]).abs())
            .max((v - t[[j, l, k]]).abs());
    }
    worst / (max_abs(t.iter()).max(scale) + 1e-30)
}

fn max_symmetry_defect4(t: &Array4<f64>, scale: f64) -> f64 {
    let mut worst = 0.0f64;
    for ((i, j, k, l), v) in t.indexed_iter() {
        worst = worst
            .max((v - t[[i, k, j, l]]).abs())
            .max((v - t[[i, j, l, k]]).abs());
    }
    worst / (max_abs(t.iter()).max(scale) + 1e-30)
}

fn values<D: ndarray::Dimension>(a: &ndarray::Array<f64, D>) -> Vec<f64> {
    a.iter().copied().collect()
}

impl FinslerMetric {
    pub fn new(manifold: ManifoldModel, phi: PhiModel) -> Self {
        FinslerMetric { manifold, phi }
    }

    pub fn dim(&self) -> usize {
        self.manifold.dim()
    }

    pub fn point(&self, x: &[f64], y: &[f64]) -> Result<PointState, CurvatureError> {
        let n = self.dim();
        if y.len() != n {
            return Err(GeometryError::Dimension {
                expected: n,
                got: y.len(),
            }
            .into());
        }
        if y.iter().all(|&v| v == 0.0) {
            return Err(GeometryError::DegenerateDirection.into());
        }
        let chart = self.manifold.validate_point(x)?;
        let yv = DVector::from_column_slice(y);
        let alpha = yv.dot(&(&chart.a * &yv)).sqrt();
        let beta = chart.b.dot(&yv);
        let s = beta / alpha;
        self.phi.domain().check(chart.b2, s)?;
        let l_up = &yv / alpha;
        let l_low = &chart.a * &l_up;
        Ok(PointState {
            n,
            x: x.to_vec(),
            y: y.to_vec(),
            alpha,
            beta,
            s,
            b2: chart.b2,
            a: chart.a,
            a_inv: chart.a_inv,
            b: chart.b,
            b_up: chart.b_up,
            l_up,
            l_low,
        })
    }

    /// `F(x, y) = αφ(b², s)`.
    pub fn f(&self, x: &[f64], y: &[f64]) -> Result<f64, CurvatureError> {
        let p = self.point(x, y)?;
        Ok(p.alpha * self.phi.eval(p.b2, p.s)?)
    }

    pub fn scalar_pack(&self, p: &PointState) -> Result<ScalarPack, CurvatureError> {
        Ok(self.phi.scalar_pack(p.b2, p.s)?)
    }

    /// Conformal factor `c` at `x`, or route-unavailable if `b_{i|j} ≠ c·a_ij`.
    pub fn conformal_factor(&self, x: &[f64]) -> Result<f64, CurvatureError> {
        let (c, residual) = self.manifold.conformal_factor(x)?;
        if residual > crate::geometry::CLOSED_CONFORMAL_TOL {
            return Err(CurvatureError::RouteUnavailable {
                route: "closed_conformal",
                reason: format!("b_i|j deviates from c·a_ij by {residual:e}"),
            });
        }
        Ok(c)
    }

    pub fn fundamental_tensor(
        &self,
        x: &[f64],
        y: &[f64],
        route: TensorRoute,
    ) -> Result<DMatrix<f64>, CurvatureError> {
        let p = self.point(x, y)?;
        match route {
            TensorRoute::ClosedForm => Ok(closed::fundamental_tensor(&p, &self.scalar_pack(&p)?)),
            TensorRoute::Oracle => oracle::fundamental_tensor(self, x, y),
        }
    }

    pub fn inverse_fundamental_tensor(
        &self,
        x: &[f64],
        y: &[f64],
        route: InverseRoute,
    ) -> Result<DMatrix<f64>, CurvatureError> {
        let p = self.point(x, y)?;
        match route {
            InverseRoute::ClosedForm => Ok(closed::inverse_fundamental_tensor(
                &p,
                &self.scalar_pack(&p)?,
            )),
            InverseRoute::MatrixInverse => invert(&oracle::fundamental_tensor(self, x, y)?),
        }
    }

    /// `det(g_ij)` by the closed product formula.
    pub fn determinant(&self, x: &[f64], y: &[f64]) -> Result<f64, CurvatureError> {
        let p = self.point(x, y)?;
        Ok(closed::determinant(&p, &self.scalar_pack(&p)?))
    }

    pub fn spray(
        &self,
        x: &[f64],
        y: &[f64],
        route: SprayRoute,
    ) -> Result<DVector<f64>, CurvatureError> {
        let p = self.point(x, y)?;
        match route {
            SprayRoute::Oracle => {
                let g_inv = invert(&oracle::fundamental_tensor(self, x, y)?)?;
                oracle::spray(self, x, y, &g_inv)
            }
            SprayRoute::General => {
                let k = self.scalar_pack(&p)?;
                let rs = self.manifold.rs_split(x, y)?;
                Ok(closed::spray_general(
                    &p,
                    &k,
                    &self.manifold.alpha_spray(x, y)?,
                    &rs,
                ))
            }
            SprayRoute::ClosedConformal => {
                let c = self.conformal_factor(x)?;
                let k = self.scalar_pack(&p)?;
                Ok(closed::spray_closed_conformal(
                    &p,
                    &k,
                    &self.manifold.alpha_spray(x, y)?,
                    c,
                ))
            }
        }
    }

    pub fn berwald_curvature(
        &self,
        x: &[f64],
        y: &[f64],
        route: TensorRoute,
    ) -> Result<Array4<f64>, CurvatureError> {
        let p = self.point(x, y)?;
        let c = self.conformal_factor(x)?;
        match route {
            TensorRoute::ClosedForm => {
                Ok(closed::u_tensor(&p, &self.scalar_pack(&p)?) * (c / p.alpha))
            }
            TensorRoute::Oracle => {
                let partials = self.phi.partials(p.b2, p.s)?;
                oracle::berwald(&p, c, &partials, &self.manifold.christoffel(x)?)
            }
        }
    }

    pub fn landsberg_curvature(
        &self,
        x: &[f64],
        y: &[f64],
        route: ContractionRoute,
    ) -> Result<Array3<f64>, CurvatureError> {
        let p = self.point(x, y)?;
        let c = self.conformal_factor(x)?;
        match route {
            ContractionRoute::ClosedForm => {
                let k = self.scalar_pack(&p)?;
                Ok(closed::v_tensor(&p, &k) * (-0.5 * c * k.phi))
            }
            ContractionRoute::Contraction => {
                let g = oracle::fundamental_tensor(self, x, y)?;
                let b = self.berwald_curvature(x, y, TensorRoute::Oracle)?;
                Ok(oracle::landsberg(y, &g, &b))
            }
        }
    }

    pub fn mean_landsberg(
        &self,
        x: &[f64],
        y: &[f64],
        route: ContractionRoute,
    ) -> Result<Array1<f64>, CurvatureError> {
        let p = self.point(x, y)?;
        let c = self.conformal_factor(x)?;
        match route {
            ContractionRoute::ClosedForm => {
                let k = self.scalar_pack(&p)?;
                let w = closed::w_coefficient(&k, p.n);
                Ok(Array1::from_shape_fn(p.n, |j| {
                    -c * k.phi / (2.0 * k.rho) * w * (p.b[j] - p.s * p.l_low[j])
                }))
            }
            ContractionRoute::Contraction => {
                let g_inv = invert(&oracle::fundamental_tensor(self, x, y)?)?;
                let l = self.landsberg_curvature(x, y, ContractionRoute::Contraction)?;
                Ok(oracle::mean_landsberg(&g_inv, &l))
            }
        }
    }

    /// All routes at one point, with discrepancies.
    pub fn report(&self, x: &[f64], y: &[f64]) -> Result<CurvatureReport, CurvatureError> {
        let p = self.point(x, y)?;
        let k = self.scalar_pack(&p)?;
        let partials = self.phi.partials(p.b2, p.s)?;
        let n = p.n;
        let f = p.alpha * k.phi;

        let g_closed = closed::fundamental_tensor(&p, &k);
        let g_oracle = oracle::fundamental_tensor(self, x, y)?;
        let g_inv_closed = closed::inverse_fundamental_tensor(&p, &k);
        let g_inv_matrix = invert(&g_oracle)?;
        let det_closed = closed::determinant(&p, &k);
        let det_matrix = g_oracle.determinant();
        let positive_definite = g_oracle
            .clone()
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .all(|&v| v > 0.0);
        let identity_defect = (&g_inv_closed * &g_closed - DMatrix::identity(n, n)).amax();
        let yv = DVector::from_column_slice(y);
        let gyy = yv.dot(&(&g_closed * &yv));

        let g_alpha = self.manifold.alpha_spray(x, y)?;
        let rs = self.manifold.rs_split(x, y)?;
        let spray_oracle = oracle::spray(self, x, y, &g_inv_matrix)?;
        let spray_general = closed::spray_general(&p, &k, &g_alpha, &rs);

        let mut d = Discrepancies {
            fundamental_tensor: relative_discrepancy(g_closed.as_slice(), g_oracle.as_slice(), 0.0),
            determinant: relative_discrepancy(&[det_closed], &[det_matrix], 0.0),
            inverse_routes: relative_discrepancy(
                g_inv_closed.as_slice(),
                g_inv_matrix.as_slice(),
                0.0,
            ),
            inverse_identity: identity_defect,
            fundamental_yy: (gyy - f * f).abs() / (f * f),
            ..Discrepancies::default()
        };

        let c = rs.c;
        let mut report = CurvatureReport {
            x: x.to_vec(),
            y: y.to_vec(),
            b2: p.b2,
            s: p.s,
            alpha: p.alpha,
            c,
            f,
            g_closed: Tensor::from(&g_closed),
            g_oracle: Tensor::from(&g_oracle),
            g_inv_closed: Tensor::from(&g_inv_closed),
            g_inv_matrix: Tensor::from(&g_inv_matrix),
            det_closed,
            det_matrix,
            positive_definite,
            spray_oracle: Tensor::from(&spray_oracle),
            spray_general: Tensor::from(&spray_general),
            spray_closed_conformal: None,
            berwald_closed: None,
            berwald_oracle: None,
            landsberg_closed: None,
            landsberg_contraction: None,
            mean_landsberg_closed: None,
            mean_landsberg_contraction: None,
            discrepancies: Discrepancies::default(),
        };

        let Some(c) = c else {
            let scale = max_abs(spray_oracle.iter()).max(max_abs(g_alpha.iter()));
            d.spray_oracle_general =
                relative_discrepancy(spray_oracle.as_slice(), spray_general.as_slice(), scale);
            report.discrepancies = d;
            return Ok(report);
        };

        let spray_cc = closed::spray_closed_conformal(&p, &k, &g_alpha, c);
        let spray_sub = closed::spray_substituted(&p, &k, &g_alpha, c);
        let scales = self.scales(&p, &k, c, &spray_cc, &g_closed, &g_inv_closed);
        d.spray_oracle_general = relative_discrepancy(
            spray_oracle.as_slice(),
            spray_general.as_slice(),
            scales.spray,
        );
        d.spray_oracle_closed_conformal = Some(relative_discrepancy(
            spray_oracle.as_slice(),
            spray_cc.as_slice(),
            scales.spray,
        ));
        d.spray_general_closed_conformal = Some(relative_discrepancy(
            spray_general.as_slice(),
            spray_cc.as_slice(),
            scales.spray,
        ));
        d.spray_substituted = Some(relative_discrepancy(
            spray_sub.as_slice(),
            spray_cc.as_slice(),
            scales.spray,
        ));

        let b_closed = closed::u_tensor(&p, &k) * (c / p.alpha);
        let b_oracle = oracle::berwald(&p, c, &partials, &self.manifold.christoffel(x)?)?;
        d.berwald = Some(relative_discrepancy(
            &values(&b_closed),
            &values(&b_oracle),
            scales.berwald,
        ));
        d.berwald_symmetry = Some(max_symmetry_defect4(&b_closed, scales.berwald));

        let v = closed::v_tensor(&p, &k);
        let l_closed = &v * (-0.5 * c * k.phi);
        let l_contraction = oracle::landsberg(y, &g_oracle, &b_oracle);
        d.landsberg = Some(relative_discrepancy(
            &values(&l_closed),
            &values(&l_contraction),
            scales.landsberg,
        ));
        d.landsberg_symmetry = Some(max_symmetry_defect3(&l_closed, scales.landsberg));
        let ly = Array3::from_shape_fn((n, n, 1), |(j, l, _)| {
            (0..n)
                .map(|kk| l_contraction[[j, kk, l]] * y[kk])
                .sum::<f64>()
        });
        d.landsberg_y = Some(
            max_abs(ly.iter())
                / (p.alpha * max_abs(l_contraction.iter()).max(scales.landsberg) + 1e-30),
        );

        let w = closed::w_coefficient(&k, n);
        let bsl = DVector::from_fn(n, |j, _| p.b[j] - p.s * p.l_low[j]);
        let j_closed = &bsl * (-c * k.phi / (2.0 * k.rho) * w);
        let j_contraction = oracle::mean_landsberg(&g_inv_matrix, &l_contraction);
        d.mean_landsberg = Some(relative_discrepancy(
            j_closed.as_slice(),
            j_contraction.as_slice().unwrap_or(&[]),
            scales.mean_landsberg,
        ));
        let jy = j_contraction.iter().zip(y).map(|(a, b)| a * b).sum::<f64>();
        d.mean_landsberg_y = Some(
            jy.abs() / (p.alpha * max_abs(j_contraction.iter()).max(scales.mean_landsberg) + 1e-30),
        );

        let w_floor = closed::w_scale(&k, n) * bsl.amax();
        let a_v = Array1::from_shape_fn(n, |j| {
            let mut acc = 0.0;
            for kk in 0..n {
                for l in 0..n {
                    acc += p.a_inv[(kk, l)] * v[[j, kk, l]];
                }
            }
            acc
        });
        let b_v = Array1::from_shape_fn(n, |j| {
            let mut acc = 0.0;
            for kk in 0..n {
                for l in 0..n {
                    acc += p.b_up[kk] * p.b_up[l] * v[[j, kk, l]];
                }
            }
            k.eta * acc
        });
        let a_shown = &bsl * closed::a_contraction_coefficient(&k, n);
        let b_shown = &bsl * closed::b_contraction_coefficient(&k);
        d.proof_a_contraction = Some(relative_discrepancy(
            &values(&a_v),
            a_shown.as_slice(),
            w_floor,
        ));
        d.proof_b_contraction = Some(relative_discrepancy(
            &values(&b_v),
            b_shown.as_slice(),
            w_floor,
        ));
        let groups = closed::w_groups(&k, n);
        d.regrouping = Some(relative_discrepancy(
            &[groups.iter().sum::<f64>()],
            &[w],
            closed::w_scale(&k, n),
        ));

        report.spray_closed_conformal = Some(Tensor::from(&spray_cc));
        report.berwald_closed = Some(Tensor::from(&b_closed));
        report.berwald_oracle = Some(Tensor::from(&b_oracle));
        report.landsberg_closed = Some(Tensor::from(&l_closed));
        report.landsberg_contraction = Some(Tensor::from(&l_contraction));
        report.mean_landsberg_closed = Some(Tensor::from(&j_closed));
        report.mean_landsberg_contraction = Some(Tensor::from(&j_contraction));
        report.discrepancies = d;
        Ok(report)
    }

    fn scales(
        &self,
        p: &PointState,
        k: &ScalarPack,
        c: f64,
        spray: &DVector<f64>,
        g: &DMatrix<f64>,
        g_inv: &DMatrix<f64>,
    ) -> Scales {
        let a2 = p.alpha * p.alpha;
        let spray = spray
            .amax()
            .max(c.abs() * a2 * (k.e[0].abs() + k.h[0].abs() * p.b2.sqrt()));
        let berwald = c.abs() * a2 * (k.e[0].abs() + k.h[0].abs() * p.b2.sqrt()) / (a2 * p.alpha);
        let landsberg = p.alpha * g.amax() * berwald;
        Scales {
            spray,
            berwald,
            landsberg,
            mean_landsberg: g_inv.amax() * landsberg,
        }
    }

    /// Checks `F(λy) = λF`, `g(λy) = g`, `G(λy) = λ²G`, `B(λy) = λ⁻¹B`. The
    /// Berwald check is normalized like the route comparison in [`Self::report`].
    pub fn homogeneity(
        &self,
        x: &[f64],
        y: &[f64],
        lambdas: &[f64],
    ) -> Result<HomogeneityReport, CurvatureError> {
        let f0 = self.f(x, y)?;
        let g0 = self.fundamental_tensor(x, y, TensorRoute::Oracle)?;
        let sp0 = self.spray(x, y, SprayRoute::Oracle)?;
        let c = self.conformal_factor(x).ok();
        let b0 = match c {
            Some(c) => {
                let p = self.point(x, y)?;
                let k = self.scalar_pack(&p)?;
                let floor = c.abs() * (k.e[0].abs() + k.h[0].abs() * p.b2.sqrt()) / p.alpha;
                Some((self.berwald_curvature(x, y, TensorRoute::Oracle)?, floor))
            }
            None => None,
        };
        let mut out = HomogeneityReport::default();
        for &lam in lambdas {
            let ly: Vec<f64> = y.iter().map(|v| v * lam).collect();
            out.f = out
                .f
                .max((self.f(x, &ly)? - lam * f0).abs() / (lam * f0).abs());
            let g = self.fundamental_tensor(x, &ly, TensorRoute::Oracle)?;
            out.g = out
                .g
                .max(relative_discrepancy(g.as_slice(), g0.as_slice(), 0.0));
            let sp = self.spray(x, &ly, SprayRoute::Oracle)? / (lam * lam);
            out.spray = out
                .spray
                .max(relative_discrepancy(sp.as_slice(), sp0.as_slice(), 0.0));
            if let Some((b0, floor)) = &b0 {
                let b = self.berwald_curvature(x, &ly, TensorRoute::Oracle)? * lam;
                let r = relative_discrepancy(&values(&b), &values(b0), *floor);
                out.berwald = Some(out.berwald.map_or(r, |m: f64| m.max(r)));
            }
        }
        Ok(out)
    }
}

fn invert(g: &DMatrix<f64>) -> Result<DMatrix<f64>, CurvatureError> {
    let sv = g.clone().svd(false, false).singular_values;
    let (hi, lo) = (sv.max(), sv.min());
    let condition = if lo > 0.0 { hi / lo } else { f64::INFINITY };
    if !condition.is_finite() || condition > 1e14 {
        return Err(CurvatureError::SingularMetric { condition });
    }
    g.clone()
        .try_inverse()
        .ok_or(CurvatureError::SingularMetric { condition })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phi::BerwaldFamilySpec;

    fn flat(c0: f64) -> ManifoldModel {
        ManifoldModel::euclidean_conformal(c0, vec![0.6, 0.5, 0.4]).unwrap()
    }

    fn y_for(p: &[f64], frac: f64) -> Vec<f64> {
        // b = d at x = 0; build y with s = frac·b
        let b = DVector::from_column_slice(p);
        let bn = b.norm();
        let e = DVector::from_column_slice(&[0.3, -0.7, 0.2]);
        let perp = &e - &b * (e.dot(&b) / (bn * bn));
        let l = &b * (frac / bn) + perp.normalize() * (1.0 - frac * frac).sqrt();
        (l * 1.7).iter().copied().collect()
    }

    #[test]
    fn routes_agree_for_all_models() {
        let models = vec![
            PhiModel::riemannian(),
            PhiModel::randers(),
            PhiModel::example1(1.0),
            PhiModel::example2(1.0, 1.0, 1.0).unwrap(),
            PhiModel::constructed(BerwaldFamilySpec::new("1 + t", "1").unwrap()),
        ];
        for phi in models {
            for c0 in [0.0, 0.3, 1.0] {
                let m = FinslerMetric::new(flat(c0), phi.clone());
                let x = [0.1, -0.2, 0.05];
                let d: Vec<f64> = [0.6, 0.5, 0.4]
                    .iter()
                    .zip(&x)
                    .map(|(d, x)| d + c0 * x)
                    .collect();
                let r = m.report(&x, &y_for(&d, 0.3)).unwrap();
                for (k, v) in r.discrepancies.entries() {
                    assert!(v <= 1e-9, "{} c0={c0} {k}: {v:e}", phi.name());
                }
                let l = r.landsberg_contraction.as_ref().unwrap().max_abs();
                if phi.name() == "randers" && c0 != 0.0 {
                    assert!(l >= 1e-3);
                } else if phi.name() != "randers" {
                    assert!(l <= 1e-9, "{} c0={c0}: |L| = {l:e}", phi.name());
                }
            }
        }
    }

    #[test]
    fn riemannian_metric_is_identity_on_flat_space() {
        let m = FinslerMetric::new(flat(0.0), PhiModel::riemannian());
        let g = m
            .fundamental_tensor(&[0.0; 3], &[0.0, 1.0, 0.0], TensorRoute::Oracle)
            .unwrap();
        assert!((g - DMatrix::identity(3, 3)).amax() < 1e-14);
        let sp = m
            .spray(&[0.0; 3], &[0.0, 1.0, 0.0], SprayRoute::ClosedConformal)
            .unwrap();
        assert_eq!(sp.amax(), 0.0);
    }

    #[test]
    fn randers_spray_general_matches_closed_conformal() {
        let m = FinslerMetric::new(flat(0.3), PhiModel::randers());
        let (x, y) = ([0.1, 0.0, 0.2], [0.2, 1.0, -0.3]);
        let a = m.spray(&x, &y, SprayRoute::General).unwrap();
        let b = m.spray(&x, &y, SprayRoute::ClosedConformal).unwrap();
        assert!(relative_discrepancy(a.as_slice(), b.as_slice(), 0.0) < 1e-10);
    }
}

//! Condition residuals over `(b², s)` grids and the metric-class verdicts.
//!
//! With `β` closed and conformal, `F` is weak Landsberg iff `E₂₂ = 0`,
//! `H₂₂₂ = 0` and `(E - sE₂)φ₂ + (H₂ - sH₂₂)(sφ + (b² - s²)φ₂) = 0`; the
//! Landsberg conditions are the same three equations, and `F` is Berwald iff
//! `E - sE₂ = 0` and `H₂ - sH₂₂ = 0`.

use rayon::prelude::*;
use serde::Serialize;

use crate::curvature::{auxiliary_factors, w_coefficient, w_groups, w_scale};
use crate::linalg::relative_discrepancy;
use crate::phi::{PhiModel, ScalarPack};

/// Default verdict tolerance on normalized residuals.
pub const VERDICT_TOL: f64 = 1e-6;
/// Above this share of failed cells every verdict is indeterminate.
pub const MAX_INDETERMINATE_SHARE: f64 = 0.10;
const VANISHING_REL: f64 = 1e-9;
/// Cells where `φ - sφ₂ + (b²-s²)φ₂₂` is this small relative to its terms
/// sit on a pole of `η`; third `s`-derivatives there are noise.
pub const POLE_REL: f64 = 1e-2;
const MAX_LISTED_CELLS: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSpec {
    pub b2_min: f64,
    pub b2_max: f64,
    /// `s/b` range.
    pub s_lo: f64,
    pub s_hi: f64,
    pub n_b2: usize,
    pub n_s: usize,
}

impl GridSpec {
    /// Working interval of the model by its inset sampling cone.
    pub fn for_model(phi: &PhiModel, n_b2: usize, n_s: usize) -> Self {
        let d = phi.domain();
        let (s_lo, s_hi) = d.sampling_fractions();
        let cap = d.b0 * d.b0 * (1.0 - 1e-9);
        GridSpec {
            b2_min: d.b2_min,
            b2_max: d.b2_max.min(cap),
            s_lo,
            s_hi,
            n_b2,
            n_s,
        }
    }

    fn axis(lo: f64, hi: f64, n: usize, i: usize) -> f64 {
        if n <= 1 {
            0.5 * (lo + hi)
        } else {
            lo + (hi - lo) * i as f64 / (n - 1) as f64
        }
    }

    /// Grid nodes `(b², s)`, `s` varying fastest.
    pub fn nodes(&self) -> Vec<(f64, f64)> {
        let mut out = Vec::with_capacity(self.n_b2 * self.n_s);
        for i in 0..self.n_b2 {
            let u = Self::axis(self.b2_min, self.b2_max, self.n_b2, i);
            for j in 0..self.n_s {
                out.push((u, Self::axis(self.s_lo, self.s_hi, self.n_s, j) * u.sqrt()));
            }
        }
        out
    }
}

/// Residuals and auxiliary data at one grid node.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CellResidual {
    /// `|E₂₂|`
    pub e22: f64,
    /// `|H₂₂₂|`
    pub h222: f64,
    /// `|(E - sE₂)φ₂ + (H₂ - sH₂₂)(sφ + (b² - s²)φ₂)|`
    pub combined: f64,
    /// `|E - sE₂|`
    pub e_defect: f64,
    /// `|H₂ - sH₂₂|`
    pub h_defect: f64,
    pub e_abs: f64,
    pub h_abs: f64,
    /// `φ - sφ₂`
    pub convex_first: f64,
    /// `φ - sφ₂ + (b² - s²)φ₂₂`
    pub convex_second: f64,
    pub aux_factors: [f64; 3],
    /// Four-group regrouping of `W_j` against the direct coefficient.
    pub regrouping: f64,
}

impl CellResidual {
    fn new(k: &ScalarPack, dim: usize) -> Self {
        let first = k.phi - k.s * k.phi2;
        let groups = w_groups(k, dim);
        CellResidual {
            e22: k.e[2].abs(),
            h222: k.h[3].abs(),
            combined: k.weak_landsberg_combined().abs(),
            e_defect: k.e_defect().abs(),
            h_defect: k.h_defect().abs(),
            e_abs: k.e[0].abs(),
            h_abs: k.h[0].abs(),
            convex_first: first,
            convex_second: first + k.gap() * k.phi22,
            aux_factors: auxiliary_factors(k, dim),
            regrouping: relative_discrepancy(
                &[groups.iter().sum::<f64>()],
                &[w_coefficient(k, dim)],
                w_scale(k, dim),
            ),
        }
    }

    /// Natural magnitudes of the three auxiliary factors.
    fn aux_scales(k: &ScalarPack, dim: usize) -> [f64; 3] {
        let d = k.gap().abs();
        let f1 = 1.0 + dim as f64 + 3.0 * d * k.eta.abs();
        let f2 = d * (1.0 + d * k.eta.abs());
        [f1, f2, 3.0 * f2 * k.phi2.abs() + f1 * (k.s * k.phi).abs()]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Cell {
    pub b2: f64,
    pub s: f64,
    pub residual: Option<CellResidual>,
    #[serde(skip)]
    aux_scales: [f64; 3],
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConditionGrid {
    pub model: String,
    pub spec: GridSpec,
    pub dim: usize,
    pub cells: Vec<Cell>,
}

impl ConditionGrid {
    pub fn determinate(&self) -> impl Iterator<Item = &CellResidual> {
        self.cells.iter().filter_map(|c| c.residual.as_ref())
    }

    pub fn indeterminate_count(&self) -> usize {
        self.cells.iter().filter(|c| c.residual.is_none()).count()
    }

    fn max_of(&self, f: impl Fn(&CellResidual) -> f64) -> f64 {
        self.determinate().map(f).fold(0.0, f64::max)
    }
}

fn near_pole(k: ScalarPack) -> Result<ScalarPack, crate::phi::PhiError> {
    let d = k.gap();
    let q = k.phi - k.s * k.phi2 + d * k.phi22;
    let scale = k.phi.abs() + (k.s * k.phi2).abs() + (d * k.phi22).abs();
    if q.abs() <= POLE_REL * scale {
        return Err(crate::phi::PhiError::SingularScalar {
            b2: k.b2,
            s: k.s,
            which: "phi - s*phi2 + (b2 - s^2)*phi22 (pole of eta)",
        });
    }
    Ok(k)
}

/// Fills every grid cell from the scalar pack; failures mark the cell.
pub fn condition_residuals(phi: &PhiModel, spec: &GridSpec, dim: usize) -> ConditionGrid {
    let cells = spec
        .nodes()
        .into_par_iter()
        .map(|(b2, s)| match phi.scalar_pack(b2, s).and_then(near_pole) {
            Ok(k) => Cell {
                b2,
                s,
                residual: Some(CellResidual::new(&k, dim)),
                aux_scales: CellResidual::aux_scales(&k, dim),
                error: None,
            },
            Err(e) => Cell {
                b2,
                s,
                residual: None,
                aux_scales: [0.0; 3],
                error: Some(e.to_string()),
            },
        })
        .collect();
    ConditionGrid {
        model: phi.name(),
        spec: *spec,
        dim,
        cells,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Holds,
    Fails,
    Indeterminate,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Holds => "holds",
            Verdict::Fails => "fails",
            Verdict::Indeterminate => "indeterminate",
        }
    }

    fn from_max(max: f64, tol: f64) -> Self {
        if max <= tol {
            Verdict::Holds
        } else {
            Verdict::Fails
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Verdicts {
    pub is_berwald: Verdict,
    pub is_landsberg: Verdict,
    pub is_weak_landsberg: Verdict,
}

impl Verdicts {
    pub fn summary(&self) -> String {
        format!(
            "berwald: {}, landsberg: {}, weak_landsberg: {}",
            self.is_berwald.as_str(),
            self.is_landsberg.as_str(),
            self.is_weak_landsberg.as_str()
        )
    }

    pub fn any_indeterminate(&self) -> bool {
        [self.is_berwald, self.is_landsberg, self.is_weak_landsberg]
            .contains(&Verdict::Indeterminate)
    }

    pub fn is_monotone(&self) -> bool {
        (self.is_berwald != Verdict::Holds || self.is_landsberg == Verdict::Holds)
            && (self.is_landsberg != Verdict::Holds || self.is_weak_landsberg == Verdict::Holds)
    }
}

/// Maximum normalized residual per condition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MaxResiduals {
    pub e22: f64,
    pub h222: f64,
    pub combined: f64,
    pub e_defect: f64,
    pub h_defect: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvexitySummary {
    pub cells: usize,
    pub first_violations: usize,
    pub second_violations: usize,
    pub min_first: f64,
    pub min_second: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Classification {
    pub model: String,
    pub conformal_factor: f64,
    pub tolerance: f64,
    pub normalization: f64,
    pub verdicts: Verdicts,
    pub max_residuals: MaxResiduals,
    pub total_cells: usize,
    pub indeterminate_cells: usize,
    pub convexity: ConvexitySummary,
    pub diagnostics: Vec<String>,
}

fn weak_landsberg_max(grid: &ConditionGrid, norm: f64) -> f64 {
    grid.max_of(|c| c.e22.max(c.h222).max(c.combined)) / norm
}

/// Landsberg conditions, evaluated on their own from the cell residuals.
fn landsberg_max(grid: &ConditionGrid, norm: f64) -> f64 {
    let e22 = grid.max_of(|c| c.e22);
    let h222 = grid.max_of(|c| c.h222);
    let combined = grid.max_of(|c| c.combined);
    [e22, h222, combined].into_iter().fold(0.0, f64::max) / norm
}

/// Verdicts from a filled grid. `c = 0` (parallel `β`) makes every
/// curvature vanish, so all three verdicts hold.
pub fn classify_grid(grid: &ConditionGrid, c: f64, tol: f64) -> Classification {
    let norm = grid.max_of(|r| r.e_abs.max(r.h_abs)).max(1.0);
    let total = grid.cells.len();
    let bad = grid.indeterminate_count();
    let mut diagnostics = Vec::new();
    let max_residuals = MaxResiduals {
        e22: grid.max_of(|r| r.e22) / norm,
        h222: grid.max_of(|r| r.h222) / norm,
        combined: grid.max_of(|r| r.combined) / norm,
        e_defect: grid.max_of(|r| r.e_defect) / norm,
        h_defect: grid.max_of(|r| r.h_defect) / norm,
    };
    let convexity = ConvexitySummary {
        cells: total - bad,
        first_violations: grid.determinate().filter(|r| r.convex_first <= 0.0).count(),
        second_violations: grid
            .determinate()
            .filter(|r| r.convex_second <= 0.0)
            .count(),
        min_first: grid
            .determinate()
            .map(|r| r.convex_first)
            .fold(f64::INFINITY, f64::min),
        min_second: grid
            .determinate()
            .map(|r| r.convex_second)
            .fold(f64::INFINITY, f64::min),
    };
    if bad > 0 {
        let first = grid
            .cells
            .iter()
            .find_map(|c| c.error.clone())
            .unwrap_or_default();
        diagnostics.push(format!("{bad} of {total} cells failed; first: {first}"));
    }
    let mut verdicts = if c == 0.0 {
        diagnostics.push("c = 0: β is parallel and every curvature carries the factor c".into());
        Verdicts {
            is_berwald: Verdict::Holds,
            is_landsberg: Verdict::Holds,
            is_weak_landsberg: Verdict::Holds,
        }
    } else if total == 0 || bad as f64 > MAX_INDETERMINATE_SHARE * total as f64 {
        Verdicts {
            is_berwald: Verdict::Indeterminate,
            is_landsberg: Verdict::Indeterminate,
            is_weak_landsberg: Verdict::Indeterminate,
        }
    } else {
        Verdicts {
            is_berwald: Verdict::from_max(max_residuals.e_defect.max(max_residuals.h_defect), tol),
            is_landsberg: Verdict::from_max(landsberg_max(grid, norm), tol),
            is_weak_landsberg: Verdict::from_max(weak_landsberg_max(grid, norm), tol),
        }
    };
    if verdicts.is_landsberg == Verdict::Holds && verdicts.is_weak_landsberg != Verdict::Holds {
        diagnostics
            .push("landsberg holds without weak landsberg; landsberg set indeterminate".into());
        verdicts.is_landsberg = Verdict::Indeterminate;
    }
    if verdicts.is_berwald == Verdict::Holds && verdicts.is_landsberg != Verdict::Holds {
        diagnostics.push("berwald holds without landsberg; berwald set indeterminate".into());
        verdicts.is_berwald = Verdict::Indeterminate;
    }
    Classification {
        model: grid.model.clone(),
        conformal_factor: c,
        tolerance: tol,
        normalization: norm,
        verdicts,
        max_residuals,
        total_cells: total,
        indeterminate_cells: bad,
        convexity,
        diagnostics,
    }
}

pub fn classify_metric(
    phi: &PhiModel,
    spec: &GridSpec,
    dim: usize,
    c: f64,
    tol: f64,
) -> Classification {
    classify_grid(&condition_residuals(phi, spec, dim), c, tol)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VanishingCell {
    /// 1, 2 or 3, in the order of [`auxiliary_factors`].
    pub factor: usize,
    pub b2: f64,
    pub s: f64,
    pub value: f64,
    /// `true` if found as a sign change between neighbouring cells.
    pub sign_change: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct TheoremEntry {
    pub model: String,
    pub verdicts: Verdicts,
    pub verdicts_agree: bool,
    pub max_regrouping: f64,
    pub regrouping_holds: bool,
    pub factor_min_abs: [f64; 3],
    pub factor_vanishes: [bool; 3],
    pub vanishing_cells: Vec<VanishingCell>,
}

#[derive(Debug, Clone, Serialize)]
pub struct TheoremReport {
    pub entries: Vec<TheoremEntry>,
    pub all_verdicts_agree: bool,
    pub all_regroupings_hold: bool,
    pub first_factor_nonzero_everywhere: bool,
}

/// Regrouping tolerance for the four-group identity.
pub const REGROUPING_TOL: f64 = 1e-10;

fn vanishing_cells(grid: &ConditionGrid) -> Vec<VanishingCell> {
    let mut out = Vec::new();
    let n_s = grid.spec.n_s.max(1);
    for (idx, cell) in grid.cells.iter().enumerate() {
        let Some(r) = &cell.residual else { continue };
        for f in 0..3 {
            let v = r.aux_factors[f];
            if v.abs() <= VANISHING_REL * cell.aux_scales[f] {
                out.push(VanishingCell {
                    factor: f + 1,
                    b2: cell.b2,
                    s: cell.s,
                    value: v,
                    sign_change: false,
                });
                continue;
            }
            if idx % n_s + 1 < n_s {
                if let Some(next) = grid.cells.get(idx + 1).and_then(|c| c.residual.as_ref()) {
                    if next.aux_factors[f].signum() != v.signum() {
                        out.push(VanishingCell {
                            factor: f + 1,
                            b2: cell.b2,
                            s: cell.s,
                            value: v,
                            sign_change: true,
                        });
                    }
                }
            }
        }
    }
    out
}

/// Weak Landsberg vs Landsberg over a model suite: verdict equality, the regrouped
/// `W_j`, and the auxiliary factors of the proof.
pub fn theorem_equivalence_report(
    phis: &[PhiModel],
    n_b2: usize,
    n_s: usize,
    dim: usize,
    c: f64,
    tol: f64,
) -> TheoremReport {
    let entries: Vec<TheoremEntry> = phis
        .iter()
        .map(|phi| {
            let spec = GridSpec::for_model(phi, n_b2, n_s);
            let grid = condition_residuals(phi, &spec, dim);
            let class = classify_grid(&grid, c, tol);
            let max_regrouping = grid.max_of(|r| r.regrouping);
            let vanishing = vanishing_cells(&grid);
            let factor_min_abs = [0, 1, 2].map(|f| {
                grid.determinate()
                    .map(|r| r.aux_factors[f].abs())
                    .fold(f64::INFINITY, f64::min)
            });
            let factor_vanishes = [1, 2, 3].map(|f| vanishing.iter().any(|v| v.factor == f));
            TheoremEntry {
                model: phi.name(),
                verdicts: class.verdicts,
                verdicts_agree: class.verdicts.is_landsberg == class.verdicts.is_weak_landsberg,
                max_regrouping,
                regrouping_holds: max_regrouping <= REGROUPING_TOL,
                factor_min_abs,
                factor_vanishes,
                vanishing_cells: vanishing.into_iter().take(MAX_LISTED_CELLS).collect(),
            }
        })
        .collect();
    TheoremReport {
        all_verdicts_agree: entries.iter().all(|e| e.verdicts_agree),
        all_regroupings_hold: entries.iter().all(|e| e.regrouping_holds),
        first_factor_nonzero_everywhere: entries.iter().all(|e| !e.factor_vanishes[0]),
        entries,
    }
}

//! Acceptance suite. Every criterion writes one `PASS`/`FAIL` line to stderr
//! (uncaptured) and then asserts.

use std::io::Write;
use std::path::Path;
use std::process::Command;

use finsler_core::classify::{
    classify_metric, condition_residuals, theorem_equivalence_report, GridSpec, VERDICT_TOL,
};
use finsler_core::curvature::{CurvatureReport, FinslerMetric};
use finsler_core::geometry::ManifoldModel;
use finsler_core::phi::{BerwaldFamily, BerwaldFamilySpec, PhiModel};
use finsler_core::sampling::sample_points;

const SEED: u64 = 20_240_601;

fn record(name: &str, pass: bool, detail: String) {
    let line = format!(
        "acceptance {name}: {} ({detail})\n",
        if pass { "PASS" } else { "FAIL" }
    );
    let _ = std::io::stderr().write_all(line.as_bytes());
    assert!(pass, "{name}: {detail}");
}

fn flat(c0: f64) -> ManifoldModel {
    ManifoldModel::euclidean_conformal(c0, vec![0.6, 0.5, 0.4]).unwrap()
}

fn fitted(varphi: &str, theta: &str, reference: &PhiModel) -> PhiModel {
    let spec = BerwaldFamilySpec::new(varphi, theta)
        .unwrap()
        .with_domain(*reference.domain());
    let (spec, fit) = BerwaldFamily::new(spec).fit_constants(reference).unwrap();
    assert!(fit.max_relative_residual < 1e-8, "{fit:?}");
    PhiModel::constructed(spec)
}

fn four_models() -> Vec<PhiModel> {
    vec![
        PhiModel::riemannian(),
        PhiModel::randers(),
        PhiModel::example1(1.0),
        PhiModel::example2(1.0, 1.0, 1.0).unwrap(),
    ]
}

fn suite() -> Vec<PhiModel> {
    let mut models = four_models();
    models.push(fitted("1 + t", "1", &PhiModel::example1(1.0)));
    models.push(fitted(
        "1/(1 + t)",
        "1/(1 + b2)",
        &PhiModel::example2(1.0, 1.0, 1.0).unwrap(),
    ));
    models
}

fn reports(phi: &PhiModel, c0: f64, count: usize) -> Vec<CurvatureReport> {
    let metric = FinslerMetric::new(flat(c0), phi.clone());
    sample_points(&metric, count, SEED)
        .unwrap()
        .iter()
        .map(|p| metric.report(&p.x, &p.y).unwrap())
        .collect()
}

fn worst(rs: &[CurvatureReport], f: impl Fn(&CurvatureReport) -> Option<f64>) -> f64 {
    rs.iter()
        .map(|r| f(r).expect("quantity available"))
        .fold(0.0, f64::max)
}

#[test]
fn fundamental_tensor_oracle() {
    let (mut g, mut det) = (0.0f64, 0.0f64);
    for phi in four_models() {
        let rs = reports(&phi, 1.0, 100);
        g = g.max(worst(&rs, |r| Some(r.discrepancies.fundamental_tensor)));
        det = det.max(worst(&rs, |r| Some(r.discrepancies.determinant)));
    }
    record(
        "fundamental tensor oracle",
        g <= 1e-9 && det <= 1e-9,
        format!("g {g:.2e}, det {det:.2e}, limit 1e-9"),
    );
}

#[test]
fn inverse_identity() {
    let mut worst_entry = 0.0f64;
    for phi in four_models() {
        worst_entry = worst_entry.max(worst(&reports(&phi, 1.0, 100), |r| {
            Some(r.discrepancies.inverse_identity)
        }));
    }
    record(
        "inverse identity",
        worst_entry <= 1e-10,
        format!("max entry {worst_entry:.2e}, limit 1e-10"),
    );
}

#[test]
fn spray_triple_agreement() {
    let mut d = 0.0f64;
    for phi in suite() {
        for c0 in [0.0, 0.3, 1.0] {
            let rs = reports(&phi, c0, 100);
            d = d
                .max(worst(&rs, |r| Some(r.discrepancies.spray_oracle_general)))
                .max(worst(&rs, |r| {
                    r.discrepancies.spray_oracle_closed_conformal
                }))
                .max(worst(&rs, |r| {
                    r.discrepancies.spray_general_closed_conformal
                }));
        }
    }
    record(
        "spray triple agreement",
        d <= 1e-8,
        format!("max relative {d:.2e}, limit 1e-8"),
    );
}

#[test]
fn berwald_closed_form() {
    let mut d = 0.0f64;
    for phi in suite() {
        d = d.max(worst(&reports(&phi, 1.0, 100), |r| r.discrepancies.berwald));
    }
    record(
        "berwald closed form",
        d <= 1e-7,
        format!("max relative {d:.2e}, limit 1e-7"),
    );
}

#[test]
fn landsberg_closed_form() {
    let (mut d, mut y) = (0.0f64, 0.0f64);
    for phi in suite() {
        let rs = reports(&phi, 1.0, 100);
        d = d.max(worst(&rs, |r| r.discrepancies.landsberg));
        y = y.max(worst(&rs, |r| r.discrepancies.landsberg_y));
    }
    record(
        "landsberg closed form",
        d <= 1e-7 && y <= 1e-9,
        format!("max relative {d:.2e} (limit 1e-7), L y {y:.2e} (limit 1e-9)"),
    );
}

#[test]
fn mean_landsberg_closed_form() {
    let (mut d, mut a, mut b, mut y) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for phi in suite() {
        let rs = reports(&phi, 1.0, 100);
        d = d.max(worst(&rs, |r| r.discrepancies.mean_landsberg));
        a = a.max(worst(&rs, |r| r.discrepancies.proof_a_contraction));
        b = b.max(worst(&rs, |r| r.discrepancies.proof_b_contraction));
        y = y.max(worst(&rs, |r| r.discrepancies.mean_landsberg_y));
    }
    record(
        "mean landsberg closed form",
        d <= 1e-7 && a <= 1e-9 && b <= 1e-9 && y <= 1e-9,
        format!("J {d:.2e} (limit 1e-7), a-contraction {a:.2e}, b-contraction {b:.2e}, J y {y:.2e} (limits 1e-9)"),
    );
}

#[test]
fn examples_are_landsberg() {
    let (mut l, mut j, mut res, mut bad) = (0.0f64, 0.0f64, 0.0f64, 0usize);
    for phi in [
        PhiModel::example1(1.0),
        PhiModel::example2(1.0, 1.0, 1.0).unwrap(),
    ] {
        for r in reports(&phi, 1.0, 20) {
            for t in [&r.landsberg_closed, &r.landsberg_contraction] {
                l = l.max(t.as_ref().unwrap().max_abs());
            }
            for t in [&r.mean_landsberg_closed, &r.mean_landsberg_contraction] {
                j = j.max(t.as_ref().unwrap().max_abs());
            }
        }
        let grid = condition_residuals(&phi, &GridSpec::for_model(&phi, 40, 40), 3);
        bad += grid.indeterminate_count();
        for c in grid.determinate() {
            res = res
                .max(c.e22)
                .max(c.h222)
                .max(c.combined)
                .max(c.e_defect)
                .max(c.h_defect);
        }
    }
    record(
        "examples are landsberg",
        l <= 1e-7 && j <= 1e-7 && res <= 1e-7 && bad == 0,
        format!("max|L| {l:.2e}, max|J| {j:.2e}, grid residual {res:.2e}, failed cells {bad}, limit 1e-7"),
    );
}

#[test]
fn randers_negative_control() {
    let phi = PhiModel::randers();
    // E = 1/(2(1 + s)) at b² = 1, so E₂₂ = 1/(1 + s)³ = 1 at s = 0
    let e22_at_origin = phi.scalar_pack(1.0, 0.0).unwrap().e[2];
    let spec = GridSpec::for_model(&phi, 40, 40);
    let grid = condition_residuals(&phi, &spec, 3);
    let e22 = grid.determinate().map(|c| c.e22).fold(0.0, f64::max);
    let c1 = flat(1.0).conformal_factor(&[0.0; 3]).unwrap().0;
    let c0 = flat(0.0).conformal_factor(&[0.0; 3]).unwrap().0;
    let on = classify_metric(&phi, &spec, 3, c1, VERDICT_TOL)
        .verdicts
        .summary();
    let off = classify_metric(&phi, &spec, 3, c0, VERDICT_TOL)
        .verdicts
        .summary();
    let pass = e22 >= 0.1
        && (e22_at_origin - 1.0).abs() < 1e-12
        && on == "berwald: fails, landsberg: fails, weak_landsberg: fails"
        && off == "berwald: holds, landsberg: holds, weak_landsberg: holds";
    record(
        "randers negative control",
        pass,
        format!("max|E22| {e22:.3}, c0=1 [{on}], c0=0 [{off}]"),
    );
}

#[test]
fn landsberg_equivalence() {
    let models = suite();
    let mut agree = true;
    let mut regroup = 0.0f64;
    let mut factor = f64::INFINITY;
    let mut nonzero = true;
    for c in [0.0, 0.3, 1.0] {
        let r = theorem_equivalence_report(&models, 40, 40, 3, c, VERDICT_TOL);
        agree &= r.all_verdicts_agree;
        nonzero &= r.first_factor_nonzero_everywhere;
        for e in &r.entries {
            regroup = regroup.max(e.max_regrouping);
            factor = factor.min(e.factor_min_abs[0]);
        }
    }
    record(
        "landsberg equivalence",
        agree && regroup <= 1e-10 && nonzero,
        format!("verdicts agree {agree}, regrouping {regroup:.2e} (limit 1e-10), min|1+n+3(b2-s2)eta| {factor:.3}"),
    );
}

#[test]
fn constructed_family_is_berwald() {
    let ex1 = PhiModel::example1(1.0);
    let models = vec![
        fitted("1 + t", "1", &ex1),
        fitted(
            "1/(1 + t)",
            "1/(1 + b2)",
            &PhiModel::example2(1.0, 1.0, 1.0).unwrap(),
        ),
        PhiModel::constructed(BerwaldFamilySpec::new("1 + t", "1").unwrap()),
        PhiModel::constructed(BerwaldFamilySpec::new("exp(-t)", "1 + b2").unwrap()),
    ];
    let (mut defect, mut b, mut share) = (0.0f64, 0.0f64, 0.0f64);
    for phi in &models {
        let grid = condition_residuals(phi, &GridSpec::for_model(phi, 40, 40), 3);
        share = share.max(grid.indeterminate_count() as f64 / grid.cells.len() as f64);
        for c in grid.determinate() {
            defect = defect.max(c.e_defect).max(c.h_defect);
        }
        for r in reports(phi, 1.0, 20) {
            b = b.max(r.berwald_closed.as_ref().unwrap().max_abs());
            b = b.max(r.berwald_oracle.as_ref().unwrap().max_abs());
        }
    }
    let spec = GridSpec::for_model(&ex1, 40, 40);
    let reproduction = spec
        .nodes()
        .into_iter()
        .map(|(b2, s)| {
            let (a, e) = (models[0].value(b2, s).unwrap(), ex1.value(b2, s).unwrap());
            ((a - e) / e).abs()
        })
        .fold(0.0, f64::max);
    record(
        "constructed family is berwald",
        defect <= 1e-7 && b <= 1e-6 && reproduction <= 1e-6 && share <= 0.1,
        format!(
            "defects {defect:.2e} (limit 1e-7), max|B| {b:.2e} (limit 1e-6), example 1 reproduction {reproduction:.2e} (limit 1e-6), skipped cells {:.1}%",
            100.0 * share
        ),
    );
}

fn run_cli(args: &[&str], out: &Path) -> i32 {
    Command::new(env!("CARGO_BIN_EXE_finsler"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("FINSLER_LOG")
        .output()
        .expect("binary runs")
        .status
        .code()
        .unwrap_or(-1)
}

#[test]
fn determinism() {
    let dir = tempfile::tempdir().unwrap();
    let cases: [(&[&str], &str); 4] = [
        (
            &[
                "verify",
                "--model",
                "example2",
                "--samples",
                "25",
                "--seed",
                "9",
            ],
            "verify.json",
        ),
        (
            &["classify", "--model", "randers", "--grid", "20"],
            "classification.json",
        ),
        (
            &[
                "construct",
                "--varphi",
                "1+t",
                "--theta",
                "1",
                "--fit",
                "example1",
                "--grid",
                "12",
            ],
            "construct.json",
        ),
        (
            &[
                "curvature-dump",
                "--model",
                "example1",
                "--samples",
                "5",
                "--seed",
                "3",
            ],
            "curvature.json",
        ),
    ];
    let mut identical = true;
    let mut detail = Vec::new();
    for (i, (args, file)) in cases.iter().enumerate() {
        let a = dir.path().join(format!("{i}a"));
        let b = dir.path().join(format!("{i}b"));
        let codes = (run_cli(args, &a), run_cli(args, &b));
        let same = codes == (0, 0)
            && std::fs::read(a.join(file)).unwrap() == std::fs::read(b.join(file)).unwrap();
        identical &= same;
        detail.push(format!(
            "{} {}",
            args[0],
            if same { "identical" } else { "differs" }
        ));
    }
    record("determinism", identical, detail.join(", "));
}

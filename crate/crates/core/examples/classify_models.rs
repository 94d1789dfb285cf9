//! Metric classes from grid residuals, and the equivalence report.

use finsler_core::classify::{classify_metric, theorem_equivalence_report, GridSpec, VERDICT_TOL};
use finsler_core::phi::{BerwaldFamilySpec, PhiModel};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let suite = vec![
        PhiModel::riemannian(),
        PhiModel::randers(),
        PhiModel::example1(1.0),
        PhiModel::example2(1.0, 1.0, 1.0)?,
        PhiModel::constructed(BerwaldFamilySpec::new("1 + t", "1")?),
    ];
    for phi in &suite {
        let c = classify_metric(phi, &GridSpec::for_model(phi, 40, 40), 3, 1.0, VERDICT_TOL);
        println!("{:40} {}", phi.name(), c.verdicts.summary());
    }
    let report = theorem_equivalence_report(&suite, 40, 40, 3, 1.0, VERDICT_TOL);
    for e in &report.entries {
        println!(
            "{:40} agree {} regrouping {:.2e} min|1+n+3(b2-s2)eta| {:.3}",
            e.model, e.verdicts_agree, e.max_regrouping, e.factor_min_abs[0]
        );
    }
    println!(
        "all agree: {}, first factor nonzero: {}",
        report.all_verdicts_agree, report.first_factor_nonzero_everywhere
    );
    Ok(())
}

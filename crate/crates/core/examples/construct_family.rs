//! Berwald φ from a profile and a θ, fitted to a closed-form example.

use finsler_core::phi::{BerwaldFamily, BerwaldFamilySpec, PhiModel};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let reference = PhiModel::example2(1.0, 1.0, 1.0)?;
    let spec = BerwaldFamilySpec::new("1/(1+t)", "1/(1+b2)")?.with_domain(*reference.domain());
    let (fitted, fit) = BerwaldFamily::new(spec).fit_constants(&reference)?;
    println!(
        "constants {:?}, residual {:.2e} over {} points",
        fit.constants, fit.max_relative_residual, fit.points
    );

    let phi = PhiModel::constructed(fitted);
    for (b2, frac) in [(0.6, 0.1), (1.0, 0.3), (1.4, 0.45)] {
        let s = frac * f64::sqrt(b2);
        let k = phi.scalar_pack(b2, s)?;
        println!(
            "b2 {b2:.2} s {s:.4}: phi {:.12} (closed form {:.12}), E - sE2 {:.1e}, H2 - sH22 {:.1e}",
            k.phi,
            reference.value(b2, s)?,
            k.e_defect(),
            k.h_defect()
        );
    }
    Ok(())
}

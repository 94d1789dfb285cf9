//! Built-in φ models: partials, convexity and the spray scalars E, H.

use finsler_core::phi::{PhiError, PhiModel};

fn main() -> Result<(), PhiError> {
    let models = [
        PhiModel::riemannian(),
        PhiModel::randers(),
        PhiModel::example1(1.0),
        PhiModel::example2(1.0, 1.0, 1.0)?,
    ];
    let (b2, frac) = (1.0f64, 0.3);
    for phi in &models {
        let s = frac * b2.sqrt();
        let p = phi.partials(b2, s)?;
        let cv = phi.convexity(b2, s)?;
        let k = phi.scalar_pack(b2, s)?;
        println!("{}", phi.name());
        println!(
            "  phi {:.12} phi1 {:.12} phi2 {:.12} phi22 {:.12}",
            p.phi(),
            p.phi1(),
            p.phi2(),
            p.phi22()
        );
        println!(
            "  convex: {} (first {:.6}, second {:.6})",
            cv.is_regular(),
            cv.first,
            cv.second
        );
        println!(
            "  E {:.6e} E22 {:.3e}  H {:.6e} H222 {:.3e}",
            k.e[0], k.e[2], k.h[0], k.h[3]
        );
        println!(
            "  E - sE2 {:.3e}  H2 - sH22 {:.3e}",
            k.e_defect(),
            k.h_defect()
        );
    }
    Ok(())
}

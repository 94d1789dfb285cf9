//! Every curvature quantity by two routes at one point.

use finsler_core::curvature::FinslerMetric;
use finsler_core::geometry::ManifoldModel;
use finsler_core::phi::PhiModel;
use finsler_core::sampling::sample_points;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for phi in [PhiModel::randers(), PhiModel::example1(1.0)] {
        let metric = FinslerMetric::new(
            ManifoldModel::euclidean_conformal(1.0, vec![0.6, 0.5, 0.4])?,
            phi,
        );
        let p = &sample_points(&metric, 1, 7)?[0];
        let r = metric.report(&p.x, &p.y)?;
        println!("{} at b2 = {:.4}, s = {:.4}", metric.phi.name(), r.b2, r.s);
        println!(
            "  F = {:.12}, det g = {:.12}, positive definite: {}",
            r.f, r.det_closed, r.positive_definite
        );
        let norm =
            |t: &Option<finsler_core::curvature::Tensor>| t.as_ref().map_or(0.0, |t| t.max_abs());
        println!(
            "  max|B| = {:.3e}, max|L| = {:.3e}, max|J| = {:.3e}",
            norm(&r.berwald_closed),
            norm(&r.landsberg_closed),
            norm(&r.mean_landsberg_closed)
        );
        for (name, v) in r.discrepancies.entries() {
            println!("  {name:32} {v:.3e}");
        }
    }
    Ok(())
}

//! Riemannian data of a manifold model and the closed conformal check.

use finsler_core::geometry::{ManifoldModel, CLOSED_CONFORMAL_TOL};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let flat = ManifoldModel::euclidean_conformal(0.3, vec![0.6, 0.5, 0.4])?;
    let x = [1.0, 0.0, 0.0];
    let y = [0.0, 1.0, 0.0];
    let rs = flat.rs_split(&x, &y)?;
    println!("{}", flat.describe());
    println!("r00 = {}, s0 = {:?}, c = {:?}", rs.r00, rs.s0, rs.c);

    let curved = ManifoldModel::conformally_flat(0.2, vec![0.5, 0.3, 0.1]);
    let pts: Vec<Vec<f64>> = vec![
        vec![0.1, 0.2, 0.0],
        vec![-0.3, 0.1, 0.2],
        vec![0.0, 0.0, 0.4],
    ];
    let report = curved.closed_conformal_check(&pts, CLOSED_CONFORMAL_TOL)?;
    println!("{}: {report:?}", curved.describe());

    let twisted = ManifoldModel::rotational(3, 1.0);
    let report = twisted.closed_conformal_check(&pts, CLOSED_CONFORMAL_TOL)?;
    println!("{}: {report:?}", twisted.describe());
    Ok(())
}

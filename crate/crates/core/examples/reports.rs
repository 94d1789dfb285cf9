//! Deterministic JSON and CSV output of a classification grid.

use finsler_core::classify::{classify_grid, condition_residuals, GridSpec, VERDICT_TOL};
use finsler_core::phi::PhiModel;
use finsler_core::report::{residual_grid_csv, to_json};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let phi = PhiModel::randers();
    let grid = condition_residuals(&phi, &GridSpec::for_model(&phi, 4, 3), 3);
    let class = classify_grid(&grid, 1.0, VERDICT_TOL);
    println!("{}", to_json(&class)?);
    print!("{}", residual_grid_csv(&grid)?);
    Ok(())
}

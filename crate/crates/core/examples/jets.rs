//! Exact higher derivatives with truncated Taylor jets.

use finsler_core::jet::{mixed_partial, Jet, JetError, JetScalar};

fn main() -> Result<(), JetError> {
    // f(t) = exp(t)·sqrt(1 + t²) at t = 0.5, derivatives up to order 5
    let t = Jet::variable(0.5, 5)?;
    let f = t.exp() * (t * t + 1.0).try_sqrt()?;
    for k in 0..=5 {
        println!("f^({k})(0.5) = {:.15e}", f.derivative(k));
    }

    // ∂³/∂x∂y∂z of x·y·z + x²y at (1, 2, 3) is 1
    let g = |v: &[Jet]| -> Result<Jet, JetError> { Ok(v[0] * v[1] * v[2] + v[0] * v[0] * v[1]) };
    let e = |i: usize| {
        (0..3)
            .map(|j| if i == j { 1.0 } else { 0.0 })
            .collect::<Vec<_>>()
    };
    let d3 = mixed_partial(g, &[1.0, 2.0, 3.0], &[e(0), e(1), e(2)])?;
    println!("d3 g / dx dy dz = {d3}");

    // nested jets carry a second variable: outer in s, inner in u
    let c = |v: f64| Jet::constant(v, 1);
    let u = Jet::lift(Jet::variable(2.0, 1)?, 2)?;
    let s = Jet::from_coeffs(&[c(0.3)?, c(1.0)?, c(0.0)?])?;
    let h = u * s.exp();
    println!(
        "h = u*exp(s): value {:.12}, d2h/du ds {:.12}",
        h.value(),
        h.derivative(1).derivative(1)
    );
    Ok(())
}

//! Remove the dominant solution from an equation and split a solution
//! into basis solutions.

use num_complex::Complex64 as C64;
use qwkb::operator::EpsilonEquation;
use qwkb::simulator::{decompose_in_basis, iterate_eps, SimOptions};
use qwkb::spectral::roots::aberth;
use qwkb::wkb::deflate;

fn main() -> qwkb::Result<()> {
    // roots 3, 2, 1
    let eq = EpsilonEquation::from_expressions(&["-6", "11", "-6", "1"], (0.0, 1.0))?;
    let eps = 0.01;
    let opts = SimOptions::default();
    let basis: Vec<_> = [1.0, 2.0, 3.0]
        .iter()
        .map(|&r| iterate_eps(&eq, eps, &[C64::new(1.0, 0.0), C64::new(r, 0.0), C64::new(r * r, 0.0)], opts))
        .collect::<qwkb::Result<_>>()?;

    let red = deflate(&eq, &basis[2])?;
    println!("reduced degree {}, residual {:.1e}", red.equation.degree(), red.max_residual);
    for r in aberth(&red.equation.coeffs(0.5, eps)?, None) {
        println!("reduced root {:.12}", r.re);
    }

    let f = iterate_eps(&eq, eps, &[C64::new(1.0, 0.0), C64::new(4.0, 0.0), C64::new(14.0, 0.0)], opts)?;
    let dec = decompose_in_basis(&f, &basis, 10)?;
    for (c, r) in dec.coeffs.iter().zip([1, 2, 3]) {
        println!("coefficient of {r}^k: {:.9}", c.to_c64());
    }
    println!("condition {:.1e}", dec.condition);
    Ok(())
}

//! The linear-algebra facts behind the growth estimates: companion
//! matrices, Vandermonde ratios and bounded transfer products.

use num_complex::Complex64 as C64;
use qwkb::operator::EpsilonEquation;
use qwkb::simulator::{companion, companion_diagonalize, transfer_norm_probe, vandermonde_ratio};

fn main() -> qwkb::Result<()> {
    let roots = [C64::new(2.0, 0.0), C64::new(0.0, 1.0), C64::new(-0.5, 0.0)];
    let d = companion_diagonalize(&roots)?;
    println!("companion:\n{}", d.a);
    println!("A M = M D residual {:.1e}", d.residual);

    let other = [C64::new(1.5, 0.5), C64::new(-1.0, 0.2), C64::new(0.3, -0.7)];
    println!("Vandermonde ratio:\n{:.4}", vandermonde_ratio(&roots, &other)?);

    let c = [C64::new(2.0, 0.0), C64::new(-3.0, 0.0)];
    println!("companion of E^2 - 3E + 2:\n{}", companion(&c));

    // roots 1 and 1/(2+x): the spectral radius is 1, so products stay bounded
    let eq = EpsilonEquation::from_expressions(&["1", "-(3 + x)", "2 + x"], (0.0, 1.0))?;
    let probe = transfer_norm_probe(&eq, 1.0, &[1e-2, 1e-3], (0.0, 1.0))?;
    println!("sup |prod T| at eps {:?}: {:?}", probe.eps, probe.sup);
    Ok(())
}

//! Entropy profiles of knot A-polynomials.

use qwkb::builtins::Builtin;
use qwkb::entropy::{a_polynomial_analysis, alpha_grid, Normalization, SubsetSelection, A_ENTROPY_GRID};

fn main() -> qwkb::Result<()> {
    for knot in [Builtin::Trefoil, Builtin::Figure8] {
        let a = knot.a_polynomial().expect("A-polynomial");
        let an = a_polynomial_analysis(&a, A_ENTROPY_GRID)?;
        let entropy = an.entropy();
        println!("{knot}: {} arcs, collisions {:?}", an.partition.arcs.len(), an.grid.collisions);
        for p in entropy.entropy_set(None, &[1.0], Normalization::Raw)? {
            println!("  sigma_{}(1) = {:.9}", p.selection, p.last());
        }
    }

    let a = Builtin::Figure8.a_polynomial().expect("A-polynomial");
    let an = a_polynomial_analysis(&a, A_ENTROPY_GRID)?;
    let sel = SubsetSelection::labels(&[1, 3]);
    let profile = an.entropy().profile(&sel, &alpha_grid(5), Normalization::Raw)?;
    for (alpha, s) in profile.alpha.iter().zip(&profile.sigma) {
        println!("alpha {alpha:.2}: sigma_{{1,3}} = {s:.6}");
    }
    Ok(())
}

//! Track the characteristic roots of an operator around the unit circle,
//! classify the path and split it into arcs of constant magnitude order.

use std::sync::Arc;

use qwkb::builtins::Builtin;
use qwkb::operator::parse_operator;
use qwkb::spectral::{check_regularity, partition_arcs, track_eigenpaths, CharPoly, PartitionOptions, Path, TrackOptions};

fn report(name: &str, family: CharPoly) -> qwkb::Result<()> {
    let grid = track_eigenpaths(Arc::new(family), TrackOptions::with_n(1024))?;
    let reg = check_regularity(&grid, 1e-8);
    println!("{name}: {}", if reg.regular { "regular" } else { "irregular" });
    for r in &reg.reasons {
        println!("  {r}");
    }
    let part = partition_arcs(&grid, PartitionOptions::default());
    for a in &part.arcs {
        println!("  arc [{:.4}, {:.4}] order {:?}", a.lo, a.hi, a.sigma);
    }
    for r in &part.resonances {
        println!("  branches {:?} share a magnitude on [{:.4}, {:.4}]", r.branches, r.lo, r.hi);
    }
    Ok(())
}

fn main() -> qwkb::Result<()> {
    let op = parse_operator("E^2 - 3*E + 2")?;
    report("E^2 - 3E + 2", CharPoly::from_operator(&op, Path::circle())?)?;

    let trefoil = Builtin::Trefoil.operator().expect("knot operator");
    report("trefoil operator", CharPoly::from_operator(&trefoil, Path::circle())?)?;

    let a = Builtin::Figure8.a_polynomial().expect("A-polynomial");
    report("figure-eight A-polynomial", CharPoly::from_a_polynomial(&a, Path::half_angle())?)?;
    Ok(())
}

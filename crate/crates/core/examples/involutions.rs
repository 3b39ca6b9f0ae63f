//! Involution numbers: exact values and the log-scaled recursion.

use qwkb::simulator::{involution_ratio, involutions_exact, involutions_trace};

fn main() -> qwkb::Result<()> {
    for n in [10, 20, 50] {
        println!("f({n}) = {}", involutions_exact(n)?);
    }
    let tr = involutions_trace(100_000)?;
    println!("log f(100000) = {:.6}", tr.values.last().expect("nonempty").log_abs());
    for n in [500, 2000, 8000] {
        println!("r({})/r({n}) = {:.6}", 2 * n, involution_ratio(n)?);
    }
    Ok(())
}

//! Mahler measures by torus quadrature and by Jensen's formula.

use qwkb::builtins::FIGURE8_A;
use qwkb::entropy::mahler_measure;
use qwkb::operator::{parse_polynomial, Symbols};

fn main() -> qwkb::Result<()> {
    for text in ["L - 2", "L + M + 1", FIGURE8_A] {
        let p = parse_polynomial(text, &Symbols::a_polynomial())?;
        let m = mahler_measure(&p)?;
        println!("m({text}) = {:.10}", m.value());
        println!("  torus {:.12}, jensen {:?}, gap {:?}", m.torus, m.jensen, m.discrepancy());
    }
    Ok(())
}

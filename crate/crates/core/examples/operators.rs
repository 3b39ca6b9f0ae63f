//! Parse q-difference operators, serialize them, and look at their
//! classical limit and ε-form.

use num_complex::Complex64 as C64;
use qwkb::builtins::Builtin;
use qwkb::operator::{parse_operator, parse_qop};

fn main() -> qwkb::Result<()> {
    let op = parse_operator("E^2 - (Q + 1)*E + Q")?;
    println!("operator: {op}");
    println!("degree {}", op.degree());

    let text = op.to_qop_string();
    print!("normal form:\n{text}");
    assert_eq!(parse_qop(&text)?.coefficients(), op.coefficients());

    let classical = op.specialize_classical()?;
    for (j, c) in classical.coeffs.iter().enumerate() {
        println!("b_{j}(v, 1) = {c}");
    }

    // a_j(x, ε) = b_j(e^{2πix}, e^{2πiε})
    let eq = op.to_epsilon_form((0.0, 1.0));
    for (j, a) in eq.coeffs(0.25, 0.01)?.iter().enumerate() {
        println!("a_{j}(0.25, 0.01) = {a:.6}");
    }

    let fig8 = Builtin::Figure8.operator().expect("knot operator");
    println!("figure-eight operator has degree {}", fig8.degree());
    match fig8.eval_all(C64::new(-1.0, 0.0), C64::new(1.0, 0.0)) {
        Ok(c) => println!("b_j(-1, 1) = {c:.6?}"),
        Err(e) => println!("b_j(-1, 1): {e}"),
    }
    Ok(())
}

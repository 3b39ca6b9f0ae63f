//! Run recursions in q-mode and ε-mode and extrapolate their growth rates.

use num_complex::Complex64 as C64;
use qwkb::builtins::Builtin;
use qwkb::simulator::{convergence_eps, convergence_q, growth_rate, iterate_eps, iterate_q, SimOptions};

fn main() -> qwkb::Result<()> {
    let eq = Builtin::ConstD2.epsilon().expect("epsilon equation");
    let init = [C64::new(1.0, 0.0), C64::new(1.0, 0.0)];
    let opts = SimOptions::default();
    let tr = iterate_eps(&eq, 1e-3, &init, opts)?;
    println!("const-d2: eps log|psi(1)| = {:.9} (log 2 = {:.9})", growth_rate(&tr)?, 2f64.ln());

    let first = Builtin::SyntheticFirstOrder.epsilon().expect("epsilon equation");
    let conv = convergence_eps(&first, &[4e-4, 2e-4, 1e-4], &[C64::new(1.0, 0.0)], opts)?;
    for r in &conv.rows {
        println!("eps {:.0e}: rate {:.9} extrapolated {:?}", r.n_or_eps, r.rate, r.extrapolated);
    }
    println!("limit {:.9} (exact {:.9})", conv.limit, 3.0 * 3f64.ln() - 2.0 * 2f64.ln() - 1.0);

    // knot operators hit singular steps on the lattice; puncture steps over them
    let fig8 = Builtin::Figure8.operator().expect("knot operator");
    let punct = SimOptions { puncture: true, ..opts };
    let ones = vec![C64::new(1.0, 0.0); fig8.degree()];
    let tr = iterate_q(&fig8, 1000, 1.0, &ones, punct)?;
    println!("figure-eight n = 1000: rate {:.6}, singular steps {:?}", growth_rate(&tr)?, tr.events.iter().map(|e| e.k).collect::<Vec<_>>());
    let conv = convergence_q(&fig8, 1.0, &[250, 500, 1000, 2000], &ones, punct)?;
    println!("extrapolated q-mode rate {:.6} ± {:.1e}", conv.limit, conv.error);
    Ok(())
}

//! Formal WKB data for a regular ε-difference equation: the phase φ_0,
//! the first correction φ_1, higher orders and seeds for the simulator.

use qwkb::builtins::Builtin;
use qwkb::spectral::{characteristic, track_eigenpaths, TrackOptions};
use qwkb::wkb::{phi1, phi_higher, wkb_seed, HierarchyOptions};

fn main() -> qwkb::Result<()> {
    let eq = Builtin::Synthetic2x.epsilon().expect("epsilon equation");
    let grid = track_eigenpaths(characteristic(&eq), TrackOptions::with_n(1024))?;
    let jet = phi1(&eq, &grid, 1)?;
    for x in [0.0f64, 0.25, 0.5, 1.0] {
        let closed = -(1.0 + x).ln() - 0.5 * (1.0 + x / 2.0).ln();
        println!("x {x:.2}: phi_0 {:.9}  phi_1 {:.9}  (closed form {closed:.9})", jet.eval(0, x).re, jet.eval(1, x).re);
    }

    let first = Builtin::SyntheticFirstOrder.epsilon().expect("epsilon equation");
    let g = track_eigenpaths(characteristic(&first), TrackOptions::with_n(512))?;
    let high = phi_higher(&first, &g, 1, HierarchyOptions { max_order: 4, ..Default::default() })?;
    for s in 0..=high.order() {
        println!("phi_{s}(1) = {:.10}", high.eval(s, 1.0).re);
    }
    if !high.unreliable.is_empty() {
        println!("unreliable orders: {:?}", high.unreliable);
    }

    let seed = wkb_seed(&jet, 1e-3, (0, 2))?;
    for (k, v) in seed.iter().enumerate() {
        println!("seed psi({k} eps) = {:.9}", v.to_c64());
    }
    Ok(())
}

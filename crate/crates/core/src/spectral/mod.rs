//! Characteristic polynomials, eigenvalue tracking, regularity and arc partitions.

pub mod export;
pub mod family;
pub mod partition;
pub mod regularity;
pub mod roots;
pub mod tracking;

pub use family::{characteristic, CharPoly, Exceptional, ExceptionalKind, Family, Parametrization, Path};
pub use partition::{partition_arcs, ArcPartition, PartitionArc, PartitionOptions};
pub use regularity::{check_regularity, RegularityReport};
pub use tracking::{track_eigenpaths, EigenGrid, LabelRule, TrackOptions};

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// All roots at `t`, polished; fails at coefficient poles and degree drops.
pub fn roots_at(p: &CharPoly, t: f64) -> Result<Vec<C64>> {
    let z = p.path().z(t);
    let c = p.coefficients_at_z(z)?;
    let d = c.len() - 1;
    let scale = c.iter().map(|x| x.norm()).fold(0.0, f64::max);
    if c[d].norm() <= 1e-13 * scale {
        return Err(Error::DegreeDrop { t });
    }
    roots::checked_roots(&c, None, 1e-12)
}

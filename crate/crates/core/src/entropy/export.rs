//! CSV views of entropy profiles and integrands.

use std::io::Write;

use super::{Entropy, EntropyProfile};
use crate::error::{Error, Result};

fn io(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

/// Columns `alpha, sigma`.
pub fn write_profile_csv<W: Write>(p: &EntropyProfile, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["alpha", "sigma"]).map_err(io)?;
    for (a, s) in p.alpha.iter().zip(&p.sigma) {
        w.write_record([a.to_string(), s.to_string()]).map_err(io)?;
    }
    w.flush()?;
    Ok(())
}

/// Columns `t, chi` at the grid nodes.
pub fn write_chi_csv<W: Write>(p: &EntropyProfile, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t", "chi"]).map_err(io)?;
    for (t, l) in &p.samples {
        w.write_record([t.to_string(), l.exp().to_string()]).map_err(io)?;
    }
    w.flush()?;
    Ok(())
}

/// Whitespace-separated columns `t log|λ_1| … log|λ_d|` for gnuplot.
pub fn write_plot_data<W: Write>(e: &Entropy<'_>, mut out: W) -> Result<()> {
    let g = e.grid();
    let d = g.degree();
    write!(out, "# t")?;
    for m in 1..=d {
        write!(out, " log|L_{m}|")?;
    }
    writeln!(out)?;
    for (i, t) in g.t.iter().enumerate() {
        write!(out, "{t:.10}")?;
        for row in &g.values {
            write!(out, " {:.12e}", row[i].norm().ln())?;
        }
        writeln!(out)?;
    }
    Ok(())
}

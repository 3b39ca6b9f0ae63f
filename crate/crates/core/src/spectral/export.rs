//! JSON and CSV views of eigenvalue grids and partitions.

use std::io::Write;

use super::partition::ArcPartition;
use super::tracking::EigenGrid;
use crate::error::Result;

pub fn grid_json(grid: &EigenGrid) -> Result<String> {
    serde_json::to_string_pretty(grid).map_err(|e| crate::Error::Io(e.to_string()))
}

pub fn partition_json(p: &ArcPartition) -> Result<String> {
    serde_json::to_string_pretty(p).map_err(|e| crate::Error::Io(e.to_string()))
}

/// Columns `t, m, re, im, abs, log_re, log_im`, `m` 1-based.
pub fn write_grid_csv<W: Write>(grid: &EigenGrid, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t", "m", "re", "im", "abs", "log_re", "log_im"]).map_err(io)?;
    for (m, (row, logs)) in grid.values.iter().zip(&grid.logs).enumerate() {
        for (i, (z, l)) in row.iter().zip(logs).enumerate() {
            w.write_record([
                grid.t[i].to_string(),
                (m + 1).to_string(),
                z.re.to_string(),
                z.im.to_string(),
                z.norm().to_string(),
                l.re.to_string(),
                l.im.to_string(),
            ])
            .map_err(io)?;
        }
    }
    w.flush()?;
    Ok(())
}

fn io(e: csv::Error) -> crate::Error {
    crate::Error::Io(e.to_string())
}

//! CSV and JSON writers. Floats go out as `{:.16e}`, i.e. 17 significant
//! digits, which round-trips every `f64`.

use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::bench::{ConvergenceRow, CostMapCell};
use crate::error::Result;
use crate::grid::CellField;

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// `i,j,x,z,value` with 1-based cell indices, `i` fastest.
pub fn write_field_csv<W: Write>(mut w: W, field: &CellField) -> Result<()> {
    let g = field.grid();
    writeln!(w, "i,j,x,z,value")?;
    for j in 0..g.m() {
        for i in 0..g.m() {
            let (x, z) = g.center(i, j);
            writeln!(w, "{},{},{},{},{}", i + 1, j + 1, num(x), num(z), num(field.get(i, j)))?;
        }
    }
    Ok(())
}

pub fn write_costmap_csv<W: Write>(mut w: W, cells: &[CostMapCell]) -> Result<()> {
    writeln!(w, "alpha,n,mean_cycles,std_cycles,failures,reps")?;
    for c in cells {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            num(c.alpha),
            num(c.n),
            num(c.mean_cycles),
            num(c.std_cycles),
            c.failures,
            c.reps
        )?;
    }
    Ok(())
}

pub fn write_convergence_csv<W: Write>(mut w: W, rows: &[ConvergenceRow]) -> Result<()> {
    writeln!(w, "level,h,diff_norm,rate")?;
    for r in rows {
        writeln!(w, "{},{},{},{}", r.level, num(r.h), num(r.diff_norm), num(r.rate))?;
    }
    Ok(())
}

/// Pretty JSON with a trailing newline.
pub fn write_json<W: Write, T: Serialize + ?Sized>(mut w: W, value: &T) -> Result<()> {
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    Ok(())
}

/// Writes to `path` via a buffered file.
pub fn to_file(path: &Path, f: impl FnOnce(&mut std::io::BufWriter<std::fs::File>) -> Result<()>) -> Result<()> {
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    f(&mut w)?;
    w.flush()?;
    Ok(())
}

//! Matrix Market export.
//!
//! Every stored entry is written (no symmetric folding), 1-based, with the
//! shortest round-trip decimal form of each value:
//!
//! ```text
//! %%MatrixMarket matrix coordinate real general
//! % kind: stiffness, dofs: scalar-vertex
//! <rows> <cols> <nnz>
//! <i> <j> <value>
//! ```

use std::fmt::Write as _;
use std::path::Path;

use super::DiscreteOperator;
use crate::error::Result;

pub fn to_matrix_market(op: &DiscreteOperator) -> String {
    let m = &op.matrix;
    let kind = serde_json::to_value(op.kind).unwrap();
    let dofs = serde_json::to_value(op.dofs.kind).unwrap();
    let mut s = String::new();
    writeln!(s, "%%MatrixMarket matrix coordinate real general").unwrap();
    writeln!(
        s,
        "% kind: {}, dofs: {}",
        kind.as_str().unwrap_or("?"),
        dofs.as_str().unwrap_or("?")
    )
    .unwrap();
    writeln!(s, "{} {} {}", m.nrows(), m.ncols(), m.nnz()).unwrap();
    for (i, j, v) in m.triplets() {
        writeln!(s, "{} {} {}", i + 1, j + 1, v).unwrap();
    }
    s
}

pub fn write_matrix_market(op: &DiscreteOperator, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, to_matrix_market(op))?;
    Ok(())
}

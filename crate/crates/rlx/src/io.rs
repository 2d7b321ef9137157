//! Mesh file loading and debug dumps.

use std::fmt::Write as _;
use std::path::Path;

use rlx_core::basis::CmMapping;
use rlx_core::loops::LoopBasis;
use rlx_core::meshtext;
use rlx_core::SurfaceMesh;

#[derive(Debug)]
pub enum IoError {
    Read(std::io::Error),
    Parse(rlx_core::meshtext::ParseError),
}

impl std::fmt::Display for IoError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            IoError::Read(e) => write!(f, "read: {e}"),
            IoError::Parse(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for IoError {}

/// Load and validate a mesh file.
pub fn load_mesh(path: &Path) -> Result<SurfaceMesh, IoError> {
    let text = std::fs::read_to_string(path).map_err(IoError::Read)?;
    meshtext::parse_mesh(&text).map_err(IoError::Parse)
}

/// Coordinate-triple dump of the three mapping matrices.
pub fn dump_mapping(mapping: &CmMapping) -> String {
    let mut out = String::new();
    for (t, a) in mapping.a.iter().enumerate() {
        let _ = writeln!(out, "# A{} ({} x {}), row col value", t + 1, a.nrows, a.ncols);
        for r in 0..a.nrows {
            for p in a.indptr[r]..a.indptr[r + 1] {
                let _ = writeln!(out, "{} {} {:.17e}", r, a.indices[p], a.values[p]);
            }
        }
    }
    out
}

/// Loops as branch-id lists with signs.
pub fn dump_loops(basis: &LoopBasis) -> String {
    let mut out = String::new();
    let m = &basis.m;
    for l in 0..basis.n_loops {
        let _ = write!(out, "loop {l}:");
        for p in m.indptr[l]..m.indptr[l + 1] {
            let sign = if m.values[p] > 0.0 { '+' } else { '-' };
            let _ = write!(out, " {sign}{}", m.indices[p]);
        }
        let _ = writeln!(out);
    }
    out
}

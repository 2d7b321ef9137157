//! Preconditioners for the loop system.
//!
//! The primary choice maps the panel self-term diagonal through the basis
//! mapping and the loop matrix,
//!
//!   Q = M (sum_t A_t diag(Z_s/A + scale P_kk) A_t^T) M^T,
//!
//! which couples the edges of each panel and stays sparse. The baseline
//! keeps only the per-edge diagonal of the inductive edge-edge matrix
//! (plus the same ESI part), evaluating its Galerkin self integrals
//! directly the way an edge-based implementation would. Both are
//! factorized by the complex-symmetric LDL^T with the symbolic analysis
//! reused across frequencies.

use alloc::vec;
use alloc::vec::Vec;

use crate::basis::{local_vector, CmMapping};
use crate::kernel::{pair_entry, NearFieldBlock};
use crate::loops::LoopBasis;
use crate::mesh::{EdgeBranch, SurfaceMesh};
use crate::operator::edge_matrix_from_panel_diag;
use crate::sparse::{spgemm, Csr, LdlNumeric, LdlSymbolic};
use crate::C64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PrecondError {
    #[error("preconditioner is singular at pivot {pivot} (|d| = {magnitude:.3e})")]
    Singular { pivot: usize, magnitude: f64 },
    #[error("sparsity pattern changed between frequencies")]
    PatternChanged,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PrecondKind {
    DiagP,
    DiagL,
    None,
}

/// Factorized preconditioner with cached symbolic structure.
pub struct PrecondFactor {
    pub kind: PrecondKind,
    n: usize,
    m_int: Option<Csr<C64>>,
    m_int_t: Option<Csr<C64>>,
    sym: Option<LdlSymbolic>,
    num: Option<LdlNumeric>,
    pattern: Option<(Vec<usize>, Vec<u32>)>,
    /// nnz of the assembled Q, for diagnostics.
    pub q_nnz: usize,
}

impl PrecondFactor {
    pub fn new(kind: PrecondKind, basis: &LoopBasis, n_edges: usize) -> Self {
        let (m_int, m_int_t) = if kind == PrecondKind::None {
            (None, None)
        } else {
            let mut entries = Vec::new();
            let m = &basis.m;
            for r in 0..m.nrows {
                for p in m.indptr[r]..m.indptr[r + 1] {
                    let c = m.indices[p] as usize;
                    if c < n_edges {
                        entries.push((r as u32, c as u32, C64::new(m.values[p], 0.0)));
                    }
                }
            }
            let mi = Csr::from_coo(m.nrows, n_edges, entries);
            let mt = mi.transpose();
            (Some(mi), Some(mt))
        };
        PrecondFactor {
            kind,
            n: basis.n_loops,
            m_int,
            m_int_t,
            sym: None,
            num: None,
            pattern: None,
            q_nnz: 0,
        }
    }

    /// Assemble Q at the given frequency state and factorize, reusing the
    /// symbolic analysis after the first call.
    pub fn refactor(
        &mut self,
        mesh: &SurfaceMesh,
        edges: &[EdgeBranch],
        mapping: &CmMapping,
        near: &NearFieldBlock,
        esi_panel: &[C64],
        scale: C64,
    ) -> Result<(), PrecondError> {
        if self.kind == PrecondKind::None {
            return Ok(());
        }
        let q = self.assemble_q(mesh, edges, mapping, near, esi_panel, scale);
        self.q_nnz = q.nnz();
        match &self.pattern {
            None => self.pattern = Some((q.indptr.clone(), q.indices.clone())),
            Some((ip, ix)) => {
                if *ip != q.indptr || *ix != q.indices {
                    return Err(PrecondError::PatternChanged);
                }
            }
        }
        if self.sym.is_none() {
            self.sym = Some(LdlSymbolic::analyze(&q));
        }
        let sym = self.sym.as_ref().unwrap();
        match sym.factor(&q) {
            Ok(num) => {
                self.num = Some(num);
                Ok(())
            }
            Err(zp) => Err(PrecondError::Singular {
                pivot: zp.index,
                magnitude: zp.magnitude,
            }),
        }
    }

    /// The exact sparse Q of the selected kind.
    pub fn assemble_q(
        &self,
        mesh: &SurfaceMesh,
        edges: &[EdgeBranch],
        mapping: &CmMapping,
        near: &NearFieldBlock,
        esi_panel: &[C64],
        scale: C64,
    ) -> Csr<C64> {
        let edge_mat = match self.kind {
            PrecondKind::DiagP => {
                let w: Vec<C64> = (0..mapping.n_panels)
                    .map(|l| esi_panel[l] + scale * near.diag[l])
                    .collect();
                edge_matrix_from_panel_diag(mapping, &w)
            }
            PrecondKind::DiagL => {
                let esi_mat = edge_matrix_from_panel_diag(mapping, esi_panel);
                let d = diag_l_edge_values(mesh, edges);
                let mut entries: Vec<(u32, u32, C64)> = Vec::with_capacity(esi_mat.nnz() + d.len());
                for r in 0..esi_mat.nrows {
                    for p in esi_mat.indptr[r]..esi_mat.indptr[r + 1] {
                        entries.push((r as u32, esi_mat.indices[p], esi_mat.values[p]));
                    }
                }
                for (e, &de) in d.iter().enumerate() {
                    entries.push((e as u32, e as u32, scale * de));
                }
                Csr::from_coo(esi_mat.nrows, esi_mat.ncols, entries)
            }
            PrecondKind::None => unreachable!(),
        };
        let mi = self.m_int.as_ref().unwrap();
        let mt = self.m_int_t.as_ref().unwrap();
        spgemm(&spgemm(mi, &edge_mat), mt)
    }

    /// Left application Q^-1 v (identity for `None`).
    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        match (&self.sym, &self.num) {
            (Some(sym), Some(num)) => sym.solve(num, v),
            _ => v.to_vec(),
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn is_identity(&self) -> bool {
        self.kind == PrecondKind::None
    }
}

/// Edge diagonal of the inductive edge-edge matrix, evaluated from fresh
/// Galerkin pair integrals over each edge's two-panel support (the cost
/// profile of a traditional edge-based fill).
pub fn diag_l_edge_values(mesh: &SurfaceMesh, edges: &[EdgeBranch]) -> Vec<f64> {
    let mut out = vec![0.0; edges.len()];
    for e in edges {
        let panels = [(e.panel_i, 1.0), (e.panel_j, -1.0)];
        let mut acc = 0.0;
        for &(pa, sa) in &panels {
            let rho_a = local_vector(&mesh.panels[pa], e).expect("edge on panel");
            for &(pb, sb) in &panels {
                let rho_b = local_vector(&mesh.panels[pb], e).expect("edge on panel");
                let dot = rho_a[0] * rho_b[0] + rho_a[1] * rho_b[1] + rho_a[2] * rho_b[2];
                acc += sa * sb * dot * pair_entry(mesh, pa, pb);
            }
        }
        out[e.edge_id] = acc;
    }
    out
}

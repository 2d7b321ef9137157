//! The frequency-scaled loop-domain system operator
//!
//!   y = M (sum_t A_t diag(Z_s/A) A_t^T) M^T x
//!     + (j w mu0 / 4 pi) M (sum_t A_t P A_t^T) M^T x
//!
//! with the potential product P evaluated either by the multipole engine
//! (near block + expansions) or by a dense effective matrix on small
//! meshes. Exactly three potential products per application, one per
//! current component.

use alloc::vec;
use alloc::vec::Vec;

use crate::basis::CmMapping;
use crate::fmm::FmmTree;
use crate::kernel::NearFieldBlock;
use crate::loops::LoopBasis;
use crate::math::{dist, Vec3};
use crate::sparse::Csr;
use crate::C64;
use num_traits::Zero;

/// Abstract complex linear operator, the GMRES contract.
pub trait LinOp {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[C64]) -> Vec<C64>;
}

/// Which machinery evaluates the panel potential product.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorKind {
    Fmm,
    Direct,
}

/// Dense effective potential matrix: near-rule entries where the tree has
/// near pairs, centroid point kernel elsewhere. This is the matrix the
/// multipole path approximates, materialized for direct products.
#[derive(Debug, Clone)]
pub struct DensePotential {
    pub n: usize,
    pub data: Vec<f64>,
}

pub fn build_dense_potential(centroids: &[Vec3], near: &NearFieldBlock) -> DensePotential {
    let n = centroids.len();
    let mut data = vec![0.0; n * n];
    for k in 0..n {
        for l in 0..n {
            if k != l {
                data[k * n + l] = 1.0 / dist(centroids[k], centroids[l]);
            }
        }
    }
    let m = &near.matrix;
    for r in 0..m.nrows {
        for p in m.indptr[r]..m.indptr[r + 1] {
            data[r * n + m.indices[p] as usize] = m.values[p];
        }
    }
    DensePotential { n, data }
}

impl DensePotential {
    pub fn mul(&self, x: &[C64]) -> Vec<C64> {
        let n = self.n;
        let mut y = vec![C64::zero(); n];
        for r in 0..n {
            let row = &self.data[r * n..(r + 1) * n];
            let mut acc = C64::zero();
            for c in 0..n {
                acc += x[c] * row[c];
            }
            y[r] = acc;
        }
        y
    }
}

/// Potential product backend.
pub enum PanelPotential<'a> {
    Fmm {
        tree: &'a FmmTree,
        near: &'a NearFieldBlock,
    },
    Direct(&'a DensePotential),
}

impl PanelPotential<'_> {
    pub fn apply(&self, x: &[C64]) -> Vec<C64> {
        match self {
            PanelPotential::Fmm { tree, near } => tree.mvm(&near.matrix, x),
            PanelPotential::Direct(d) => d.mul(x),
        }
    }
}

/// Per-frequency loop operator.
pub struct LoopOperator<'a> {
    pub mapping: &'a CmMapping,
    pub basis: &'a LoopBasis,
    pub potential: PanelPotential<'a>,
    /// Z_s(panel)/A_panel at the current frequency.
    pub esi_panel: Vec<C64>,
    /// j w mu0 / 4 pi
    pub scale: C64,
}

impl LoopOperator<'_> {
    /// sum_t A_t diag(w) A_t^T u via the per-panel edge lists.
    fn edge_block_product(&self, w: &[C64], u: &[C64], out: &mut [C64]) {
        for v in out.iter_mut() {
            *v = C64::zero();
        }
        for (l, edges) in self.mapping.panel_edges.iter().enumerate() {
            if edges.is_empty() {
                continue;
            }
            let mut acc = [C64::zero(); 3];
            for &(e, rho) in edges {
                let ue = u[e];
                acc[0] += ue * rho[0];
                acc[1] += ue * rho[1];
                acc[2] += ue * rho[2];
            }
            let wl = w[l];
            for &(e, rho) in edges {
                out[e] += wl * (acc[0] * rho[0] + acc[1] * rho[1] + acc[2] * rho[2]);
            }
        }
    }

    /// Panel charge vectors q_t = A_t^T u.
    fn panel_components(&self, u: &[C64]) -> [Vec<C64>; 3] {
        let np = self.mapping.n_panels;
        let mut out = [
            vec![C64::zero(); np],
            vec![C64::zero(); np],
            vec![C64::zero(); np],
        ];
        for (l, edges) in self.mapping.panel_edges.iter().enumerate() {
            let mut acc = [C64::zero(); 3];
            for &(e, rho) in edges {
                let ue = u[e];
                acc[0] += ue * rho[0];
                acc[1] += ue * rho[1];
                acc[2] += ue * rho[2];
            }
            out[0][l] = acc[0];
            out[1][l] = acc[1];
            out[2][l] = acc[2];
        }
        out
    }
}

impl LinOp for LoopOperator<'_> {
    fn dim(&self) -> usize {
        self.basis.n_loops
    }

    fn apply(&self, x: &[C64]) -> Vec<C64> {
        let nb = self.basis.n_branches;
        let ne = self.mapping.n_edges;
        let mut u_branch = vec![C64::zero(); nb];
        self.basis.m.tr_mul_c64(x, &mut u_branch);
        let u_edges = &u_branch[..ne];

        // resistive/ESI part in edge space
        let mut esi_out = vec![C64::zero(); ne];
        self.edge_block_product(&self.esi_panel, u_edges, &mut esi_out);

        // inductive part: three potential products on panel components
        let q = self.panel_components(u_edges);
        let mut kernel_out = vec![C64::zero(); ne];
        for t in 0..3 {
            let w = self.potential.apply(&q[t]);
            // scatter A_t w back to edges
            for (l, edges) in self.mapping.panel_edges.iter().enumerate() {
                let wl = w[l];
                for &(e, rho) in edges {
                    kernel_out[e] += wl * rho[t];
                }
            }
        }

        let mut out_branch = vec![C64::zero(); nb];
        for e in 0..ne {
            out_branch[e] = esi_out[e] + self.scale * kernel_out[e];
        }
        let mut y = vec![C64::zero(); self.basis.n_loops];
        self.basis.m.mul_c64(&out_branch, &mut y);
        y
    }
}

/// Materialize any operator densely by unit-vector application (small
/// systems and diagnostics only).
pub fn materialize(op: &dyn LinOp) -> crate::dense::DenseC {
    let n = op.dim();
    let mut out = crate::dense::DenseC::zeros(n, n);
    for c in 0..n {
        let mut e = vec![C64::zero(); n];
        e[c] = C64::new(1.0, 0.0);
        let col = op.apply(&e);
        for r in 0..n {
            out.set(r, c, col[r]);
        }
    }
    out
}

/// A dense complex matrix as a LinOp, for tests and oracles.
pub struct DenseOp(pub crate::dense::DenseC);

impl LinOp for DenseOp {
    fn dim(&self) -> usize {
        self.0.n_rows
    }
    fn apply(&self, x: &[C64]) -> Vec<C64> {
        self.0.mul_vec(x)
    }
}

/// Sparse edge-space matrix sum_t A_t diag(w) A_t^T as CSR (used by the
/// preconditioners; same panel-block structure as the operator's products).
pub fn edge_matrix_from_panel_diag(mapping: &CmMapping, w: &[C64]) -> Csr<C64> {
    let ne = mapping.n_edges;
    let mut entries: Vec<(u32, u32, C64)> = Vec::new();
    for (l, edges) in mapping.panel_edges.iter().enumerate() {
        let wl = w[l];
        for &(e1, r1) in edges {
            for &(e2, r2) in edges {
                let dot = r1[0] * r2[0] + r1[1] * r2[1] + r1[2] * r2[2];
                entries.push((e1 as u32, e2 as u32, wl * dot));
            }
        }
    }
    Csr::from_coo(ne, ne, entries)
}

//! Centroid-midpoint basis mapping: three sparse edge-to-panel matrices
//! whose entries are the components of the signed local vectors
//! rho = m_e - c_p, orienting every edge current along its global
//! reference direction (lower panel index -> higher panel index).

use alloc::vec;
use alloc::vec::Vec;

use crate::math::{sub, Vec3};
use crate::mesh::{EdgeBranch, Panel, SurfaceMesh};
use crate::sparse::Csr;

/// The three N_e x N_p component matrices plus per-panel edge lists.
#[derive(Debug, Clone)]
pub struct CmMapping {
    /// Component matrices for x, y, z.
    pub a: [Csr<f64>; 3],
    /// For each panel: its interior edges as (edge id, signed rho vector).
    pub panel_edges: Vec<Vec<(usize, Vec3)>>,
    pub n_edges: usize,
    pub n_panels: usize,
}

/// Local current coefficient vector rho = m_e - c_p for an edge on the
/// panel contour; `None` when the edge does not lie on the panel.
pub fn local_vector(panel: &Panel, edge: &EdgeBranch) -> Option<Vec3> {
    let n = panel.vertex_indices.len();
    let (a, b) = edge.vertices;
    let mut on_contour = false;
    for k in 0..n {
        let va = panel.vertex_indices[k];
        let vb = panel.vertex_indices[(k + 1) % n];
        if (va == a && vb == b) || (va == b && vb == a) {
            on_contour = true;
            break;
        }
    }
    if !on_contour {
        return None;
    }
    Some(sub(edge.midpoint, panel.centroid))
}

/// Build the mapping in one pass over the interior edges.
pub fn build_mapping(mesh: &SurfaceMesh, edges: &[EdgeBranch]) -> CmMapping {
    let n_edges = edges.len();
    let n_panels = mesh.n_panels();
    let mut coo: [Vec<(u32, u32, f64)>; 3] = [
        Vec::with_capacity(2 * n_edges),
        Vec::with_capacity(2 * n_edges),
        Vec::with_capacity(2 * n_edges),
    ];
    let mut panel_edges: Vec<Vec<(usize, Vec3)>> = vec![Vec::new(); n_panels];
    for e in edges {
        for (panel_id, sign) in [(e.panel_i, 1.0), (e.panel_j, -1.0)] {
            let rho = local_vector(&mesh.panels[panel_id], e)
                .expect("interior edge lies on both adjacent panels");
            // On the source panel the outflow vector rho points along the
            // global current direction; on the sink panel it points against
            // it and the entry is negated.
            let signed = [sign * rho[0], sign * rho[1], sign * rho[2]];
            for t in 0..3 {
                coo[t].push((e.edge_id as u32, panel_id as u32, signed[t]));
            }
            panel_edges[panel_id].push((e.edge_id, signed));
        }
    }
    let [c0, c1, c2] = coo;
    CmMapping {
        a: [
            Csr::from_coo(n_edges, n_panels, c0),
            Csr::from_coo(n_edges, n_panels, c1),
            Csr::from_coo(n_edges, n_panels, c2),
        ],
        panel_edges,
        n_edges,
        n_panels,
    }
}

impl CmMapping {
    /// Panel current components I_pt = A_t^T I_edge, t = 1..3. The physical
    /// current density on panel l is the component triple divided by A_l.
    pub fn panel_current(&self, edge_currents: &[f64]) -> [Vec<f64>; 3] {
        assert_eq!(edge_currents.len(), self.n_edges, "dimension mismatch");
        let mut out = [
            vec![0.0; self.n_panels],
            vec![0.0; self.n_panels],
            vec![0.0; self.n_panels],
        ];
        for t in 0..3 {
            self.a[t].tr_mul_f64(edge_currents, &mut out[t]);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::mesh::build_connectivity;

    #[test]
    fn triangle_local_vector() {
        let mesh = crate::mesh::SurfaceMesh::build(
            alloc::vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]],
            alloc::vec![(alloc::vec![0, 1, 2], 0)],
            alloc::vec![fixtures::copper()],
            alloc::vec![],
        )
        .unwrap();
        let edge = EdgeBranch {
            edge_id: 0,
            vertices: (0, 1),
            midpoint: [0.5, 0.0, 0.0],
            panel_i: 0,
            panel_j: 0,
        };
        let rho = local_vector(&mesh.panels[0], &edge).unwrap();
        assert!((rho[0] - 1.0 / 6.0).abs() < 1e-15);
        assert!((rho[1] + 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(rho[2], 0.0);
    }

    #[test]
    fn square_right_edge_local_vector() {
        let mesh = crate::mesh::SurfaceMesh::build(
            alloc::vec![
                [-0.5, -0.5, 0.0],
                [0.5, -0.5, 0.0],
                [0.5, 0.5, 0.0],
                [-0.5, 0.5, 0.0]
            ],
            alloc::vec![(alloc::vec![0, 1, 2, 3], 0)],
            alloc::vec![fixtures::copper()],
            alloc::vec![],
        )
        .unwrap();
        let edge = EdgeBranch {
            edge_id: 0,
            vertices: (1, 2),
            midpoint: [0.5, 0.0, 0.0],
            panel_i: 0,
            panel_j: 0,
        };
        let rho = local_vector(&mesh.panels[0], &edge).unwrap();
        assert_eq!(rho, [0.5, 0.0, 0.0]);
    }

    #[test]
    fn edge_not_on_panel_rejected() {
        let mesh = fixtures::strip2();
        let edges = build_connectivity(&mesh);
        let off_edge = EdgeBranch {
            edge_id: 9,
            vertices: (0, 5), // diagonal across the strip, not a contour edge
            midpoint: [1.0, 0.5, 0.0],
            panel_i: 0,
            panel_j: 1,
        };
        assert!(local_vector(&mesh.panels[0], &edges[0]).is_some());
        assert!(local_vector(&mesh.panels[0], &off_edge).is_none());
    }

    #[test]
    fn strip_mapping_entries() {
        // Two coplanar unit squares, shared edge at x=1; both A1 entries +0.5.
        let mesh = fixtures::strip2();
        let edges = build_connectivity(&mesh);
        let map = build_mapping(&mesh, &edges);
        assert_eq!(map.a[0].nnz(), 2);
        let row = &map.a[0].values[map.a[0].indptr[0]..map.a[0].indptr[1]];
        assert!((row[0] - 0.5).abs() < 1e-15, "{row:?}");
        assert!((row[1] - 0.5).abs() < 1e-15, "{row:?}");
        // y and z rows vanish for this geometry but stay stored.
        assert_eq!(map.a[1].nnz(), 2);
        for v in &map.a[1].values {
            assert_eq!(*v, 0.0);
        }
    }

    #[test]
    fn single_panel_empty_mapping() {
        let mesh = crate::mesh::SurfaceMesh::build(
            alloc::vec![
                [0.0, 0.0, 0.0],
                [1.0, 0.0, 0.0],
                [1.0, 1.0, 0.0],
                [0.0, 1.0, 0.0]
            ],
            alloc::vec![(alloc::vec![0, 1, 2, 3], 0)],
            alloc::vec![fixtures::copper()],
            alloc::vec![],
        )
        .unwrap();
        let edges = build_connectivity(&mesh);
        let map = build_mapping(&mesh, &edges);
        for t in 0..3 {
            assert_eq!(map.a[t].nnz(), 0);
        }
    }

    #[test]
    fn nnz_is_twice_edge_count() {
        let mesh = fixtures::cylinder(
            1e-3,
            5e-3,
            8,
            4,
            fixtures::copper(),
            fixtures::copper(),
            false,
        );
        let edges = build_connectivity(&mesh);
        let map = build_mapping(&mesh, &edges);
        for t in 0..3 {
            assert_eq!(map.a[t].nnz(), 2 * edges.len());
        }
        // row magnitudes: (A1,A2,A3)[e,l] has length |m_e - c_l|
        for e in &edges {
            for &(panel, _sign) in &[(e.panel_i, 1.0), (e.panel_j, -1.0)] {
                let rho = local_vector(&mesh.panels[panel], e).unwrap();
                let mag2: f64 = rho.iter().map(|v| v * v).sum();
                let mut got = 0.0;
                for t in 0..3 {
                    let m = &map.a[t];
                    for p in m.indptr[e.edge_id]..m.indptr[e.edge_id + 1] {
                        if m.indices[p] as usize == panel {
                            got += m.values[p] * m.values[p];
                        }
                    }
                }
                assert!((got - mag2).abs() <= 1e-15 * mag2.max(1e-30));
            }
        }
    }

    #[test]
    fn strip_panel_current() {
        let mesh = fixtures::strip2();
        let edges = build_connectivity(&mesh);
        let map = build_mapping(&mesh, &edges);
        let ip = map.panel_current(&[1.0]);
        assert!((ip[0][0] - 0.5).abs() < 1e-15);
        assert!((ip[0][1] - 0.5).abs() < 1e-15);
        assert_eq!(ip[1][0], 0.0);
        // zero currents give zero components
        let zero = map.panel_current(&[0.0]);
        assert_eq!(zero[0], alloc::vec![0.0, 0.0]);
    }

    #[test]
    fn uniform_flow_reconstruction_exact() {
        // Structured sheet carrying uniform x-directed density J0: edge
        // currents J0*w_e on x-crossing edges reconstruct (J0, 0, 0)
        // exactly on panels with all-interior contours.
        let nx = 6;
        let ny = 5;
        let (lx, ly) = (3.0, 2.0);
        let mesh = fixtures::sheet(nx, ny, lx, ly, fixtures::copper(), false);
        let edges = build_connectivity(&mesh);
        let map = build_mapping(&mesh, &edges);
        let j0 = 2.5;
        let dy = ly / ny as f64;
        let mut i_edge = alloc::vec![0.0; edges.len()];
        for e in &edges {
            let c_i = mesh.panels[e.panel_i].centroid;
            let c_j = mesh.panels[e.panel_j].centroid;
            let crossing_x = (c_j[0] - c_i[0]).abs() > 1e-12;
            if crossing_x {
                // reference direction is lower->higher panel index; panel
                // numbering ascends with x within a row, so current flows +x.
                i_edge[e.edge_id] = j0 * dy;
            }
        }
        let ip = map.panel_current(&i_edge);
        for (pid, p) in mesh.panels.iter().enumerate() {
            // interior panel: 4 interior edges
            if map.panel_edges[pid].len() == 4 {
                let jx = ip[0][pid] / p.area;
                let jy = ip[1][pid] / p.area;
                assert!((jx - j0).abs() < 1e-13, "panel {pid}: jx={jx}");
                assert!(jy.abs() < 1e-13);
            }
        }
    }

    #[test]
    fn reversing_direction_negates_row() {
        let mesh = fixtures::strip2();
        let mut edges = build_connectivity(&mesh);
        let map = build_mapping(&mesh, &edges);
        // flip the stored panel order; the sign rule makes the row negate
        let e = &mut edges[0];
        core::mem::swap(&mut e.panel_i, &mut e.panel_j);
        let flipped = build_mapping(&mesh, &edges);
        for t in 0..3 {
            let a = &map.a[t];
            let b = &flipped.a[t];
            for (pa, pb) in a.values.iter().zip(b.values.iter()) {
                assert!((pa + pb).abs() < 1e-15);
            }
        }
    }
}

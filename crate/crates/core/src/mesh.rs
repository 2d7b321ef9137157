//! Surface mesh ingestion, validation, edge connectivity and the PEEC
//! branch graph.
//!
//! Panels are flat triangles or rectangles (planar parallelograms). Panel
//! centroids are circuit nodes; every interior edge (shared by exactly two
//! panels) is a circuit branch. Ports attach through super-nodes tied to
//! their terminal panels by zero-impedance branches.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::math::{add, cross, dist, dot, midpoint, norm, scale, sub, Vec3};
use thiserror::Error;

#[allow(unused_imports)]
use num_traits::Float;

/// Relative tolerance for the rectangle planarity / parallelogram checks.
const RECT_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("panel {panel}: vertex index {index} out of range ({nverts} vertices)")]
    VertexIndexOutOfRange { panel: usize, index: usize, nverts: usize },
    #[error("panel {panel}: repeated vertex index {index}")]
    RepeatedVertex { panel: usize, index: usize },
    #[error("panel {panel}: zero or negative area")]
    ZeroAreaPanel { panel: usize },
    #[error("panel {panel}: rectangle is not a planar parallelogram")]
    NotRectangle { panel: usize },
    #[error("panel {panel}: conductor index {index} out of range ({nmats} materials)")]
    BadConductor { panel: usize, index: usize, nmats: usize },
    #[error("material {index} ({name}): non-positive conductivity or thickness")]
    BadMaterial { index: usize, name: String },
    #[error("edge between vertices {v0} and {v1} is shared by more than two panels")]
    NonManifoldEdge { v0: usize, v1: usize },
    #[error("port {port}: terminal panel {panel} does not exist")]
    PortPanelMissing { port: String, panel: usize },
    #[error("port {port}: terminal sets are empty or overlap")]
    PortTerminalsInvalid { port: String },
    #[error("port {port}: terminals lie on disconnected conductor parts")]
    PortDisconnected { port: String },
}

/// Conductor material: conductivity and thickness entering the surface
/// impedance model.
#[derive(Debug, Clone, PartialEq)]
pub struct ConductorMaterial {
    pub name: String,
    /// Conductivity, S/m.
    pub sigma: f64,
    /// Thickness, m.
    pub thickness: f64,
}

/// One flat panel: 3 (triangle) or 4 (rectangle) vertex indices plus
/// derived centroid, area and unit normal.
#[derive(Debug, Clone)]
pub struct Panel {
    pub vertex_indices: Vec<usize>,
    pub conductor_id: usize,
    pub centroid: Vec3,
    pub area: f64,
    pub unit_normal: Vec3,
}

impl Panel {
    pub fn is_triangle(&self) -> bool {
        self.vertex_indices.len() == 3
    }
}

/// Port definition: named pair of terminal panel sets.
#[derive(Debug, Clone)]
pub struct PortSpec {
    pub name: String,
    pub positive_terminal: Vec<usize>,
    pub negative_terminal: Vec<usize>,
}

/// Validated surface mesh.
#[derive(Debug, Clone)]
pub struct SurfaceMesh {
    pub vertices: Vec<Vec3>,
    pub panels: Vec<Panel>,
    pub conductors: Vec<ConductorMaterial>,
    pub ports: Vec<PortSpec>,
}

/// Interior edge acting as a circuit branch between its two panels.
/// Reference direction is panel `i` (lower index) to panel `j`.
#[derive(Debug, Clone)]
pub struct EdgeBranch {
    pub edge_id: usize,
    pub vertices: (usize, usize),
    pub midpoint: Vec3,
    /// Adjacent panels, `panel_i < panel_j`.
    pub panel_i: usize,
    pub panel_j: usize,
}

/// Branches of the full PEEC graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BranchKind {
    /// Interior mesh edge; index into the `EdgeBranch` list.
    Interior(usize),
    /// Zero-impedance tie between a port terminal super-node and a panel.
    Terminal,
    /// Excitation branch between the two super-nodes of a port.
    Port(usize),
}

/// One directed branch: current flows `from` -> `to` under the reference
/// direction.
#[derive(Debug, Clone, Copy)]
pub struct Branch {
    pub from: usize,
    pub to: usize,
    pub kind: BranchKind,
}

/// Node/branch incidence structure over panel nodes and port super-nodes.
///
/// Nodes 0..n_panels are panel centroids; the remaining nodes are port
/// terminal super-nodes (two per port, positive first).
#[derive(Debug, Clone)]
pub struct BranchGraph {
    pub n_panel_nodes: usize,
    pub n_nodes: usize,
    pub branches: Vec<Branch>,
    /// For each port: (positive super-node, negative super-node, port branch index).
    pub port_nodes: Vec<(usize, usize, usize)>,
    /// branches incident to each node (branch indices).
    pub node_branches: Vec<Vec<usize>>,
}

impl BranchGraph {
    pub fn n_branches(&self) -> usize {
        self.branches.len()
    }

    /// Signed incidence entry for (node, branch): +1 leaving, -1 entering.
    pub fn incidence(&self, node: usize, branch: usize) -> i8 {
        let b = &self.branches[branch];
        if b.from == node {
            1
        } else if b.to == node {
            -1
        } else {
            0
        }
    }

    /// Number of connected components of the full graph.
    pub fn n_components(&self) -> usize {
        let mut seen = vec![false; self.n_nodes];
        let mut count = 0;
        for start in 0..self.n_nodes {
            if seen[start] {
                continue;
            }
            count += 1;
            let mut stack = vec![start];
            seen[start] = true;
            while let Some(n) = stack.pop() {
                for &bi in &self.node_branches[n] {
                    let b = &self.branches[bi];
                    let other = if b.from == n { b.to } else { b.from };
                    if !seen[other] {
                        seen[other] = true;
                        stack.push(other);
                    }
                }
            }
        }
        count
    }
}

fn triangle_geometry(v: [Vec3; 3]) -> (Vec3, f64, Vec3) {
    let c = scale(add(add(v[0], v[1]), v[2]), 1.0 / 3.0);
    let n = cross(sub(v[1], v[0]), sub(v[2], v[0]));
    let a2 = norm(n);
    (c, 0.5 * a2, scale(n, 1.0 / a2))
}

fn rect_geometry(v: [Vec3; 4]) -> Option<(Vec3, f64, Vec3)> {
    // Cyclic vertices v0 v1 v2 v3; a parallelogram satisfies v0 + v2 = v1 + v3.
    let d1m = midpoint(v[0], v[2]);
    let d2m = midpoint(v[1], v[3]);
    let scale_len = dist(v[0], v[1]).max(dist(v[1], v[2])).max(dist(v[0], v[2]));
    if dist(d1m, d2m) > RECT_TOL * scale_len {
        return None;
    }
    // Opposite edges equal length.
    let e01 = dist(v[0], v[1]);
    let e32 = dist(v[3], v[2]);
    let e03 = dist(v[0], v[3]);
    let e12 = dist(v[1], v[2]);
    if (e01 - e32).abs() > RECT_TOL * scale_len || (e03 - e12).abs() > RECT_TOL * scale_len {
        return None;
    }
    let n = cross(sub(v[1], v[0]), sub(v[3], v[0]));
    let area = norm(n);
    if area <= 0.0 {
        return None;
    }
    // Planarity: v2 must lie in the plane of v0 v1 v3.
    let nhat = scale(n, 1.0 / area);
    if dot(sub(v[2], v[0]), nhat).abs() > RECT_TOL * scale_len {
        return None;
    }
    Some((d1m, area, nhat))
}

impl SurfaceMesh {
    /// Assemble and validate a mesh from raw parts, populating the derived
    /// panel quantities.
    pub fn build(
        vertices: Vec<Vec3>,
        panel_defs: Vec<(Vec<usize>, usize)>,
        conductors: Vec<ConductorMaterial>,
        ports: Vec<PortSpec>,
    ) -> Result<Self, MeshError> {
        for (i, m) in conductors.iter().enumerate() {
            if !(m.sigma > 0.0) || !(m.thickness > 0.0) {
                return Err(MeshError::BadMaterial {
                    index: i,
                    name: m.name.clone(),
                });
            }
        }
        let mut panels = Vec::with_capacity(panel_defs.len());
        for (pid, (idx, mat)) in panel_defs.into_iter().enumerate() {
            debug_assert!(idx.len() == 3 || idx.len() == 4);
            for &i in &idx {
                if i >= vertices.len() {
                    return Err(MeshError::VertexIndexOutOfRange {
                        panel: pid,
                        index: i,
                        nverts: vertices.len(),
                    });
                }
            }
            for (k, &i) in idx.iter().enumerate() {
                if idx[..k].contains(&i) {
                    return Err(MeshError::RepeatedVertex { panel: pid, index: i });
                }
            }
            if mat >= conductors.len() {
                return Err(MeshError::BadConductor {
                    panel: pid,
                    index: mat,
                    nmats: conductors.len(),
                });
            }
            let (centroid, area, unit_normal) = if idx.len() == 3 {
                let g = triangle_geometry([vertices[idx[0]], vertices[idx[1]], vertices[idx[2]]]);
                if !(g.1 > 0.0) || !g.1.is_finite() {
                    return Err(MeshError::ZeroAreaPanel { panel: pid });
                }
                g
            } else {
                let v = [
                    vertices[idx[0]],
                    vertices[idx[1]],
                    vertices[idx[2]],
                    vertices[idx[3]],
                ];
                match rect_geometry(v) {
                    Some(g) if g.1 > 0.0 && g.1.is_finite() => g,
                    Some(_) => return Err(MeshError::ZeroAreaPanel { panel: pid }),
                    None => return Err(MeshError::NotRectangle { panel: pid }),
                }
            };
            panels.push(Panel {
                vertex_indices: idx,
                conductor_id: mat,
                centroid,
                area,
                unit_normal,
            });
        }

        let mesh = SurfaceMesh {
            vertices,
            panels,
            conductors,
            ports,
        };
        mesh.check_manifold()?;
        mesh.check_ports()?;
        Ok(mesh)
    }

    fn edge_map(&self) -> BTreeMap<(usize, usize), Vec<usize>> {
        let mut edges: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
        for (pid, p) in self.panels.iter().enumerate() {
            let n = p.vertex_indices.len();
            for k in 0..n {
                let a = p.vertex_indices[k];
                let b = p.vertex_indices[(k + 1) % n];
                let key = (a.min(b), a.max(b));
                edges.entry(key).or_default().push(pid);
            }
        }
        edges
    }

    fn check_manifold(&self) -> Result<(), MeshError> {
        for (&(v0, v1), panels) in self.edge_map().iter() {
            if panels.len() > 2 {
                return Err(MeshError::NonManifoldEdge { v0, v1 });
            }
        }
        Ok(())
    }

    fn check_ports(&self) -> Result<(), MeshError> {
        for port in &self.ports {
            if port.positive_terminal.is_empty() || port.negative_terminal.is_empty() {
                return Err(MeshError::PortTerminalsInvalid {
                    port: port.name.clone(),
                });
            }
            for &p in port.positive_terminal.iter().chain(&port.negative_terminal) {
                if p >= self.panels.len() {
                    return Err(MeshError::PortPanelMissing {
                        port: port.name.clone(),
                        panel: p,
                    });
                }
            }
            if port
                .positive_terminal
                .iter()
                .any(|p| port.negative_terminal.contains(p))
            {
                return Err(MeshError::PortTerminalsInvalid {
                    port: port.name.clone(),
                });
            }
        }
        Ok(())
    }

    pub fn n_panels(&self) -> usize {
        self.panels.len()
    }

    /// Total area summed over panels.
    pub fn total_area(&self) -> f64 {
        self.panels.iter().map(|p| p.area).sum()
    }
}

/// Enumerate interior edges as circuit branches, reference direction
/// lower panel index -> higher panel index.
pub fn build_connectivity(mesh: &SurfaceMesh) -> Vec<EdgeBranch> {
    let mut out = Vec::new();
    for (&(v0, v1), panels) in mesh.edge_map().iter() {
        if panels.len() == 2 {
            let (pi, pj) = (panels[0].min(panels[1]), panels[0].max(panels[1]));
            out.push(EdgeBranch {
                edge_id: out.len(),
                vertices: (v0, v1),
                midpoint: midpoint(mesh.vertices[v0], mesh.vertices[v1]),
                panel_i: pi,
                panel_j: pj,
            });
        }
    }
    out
}

/// Count boundary edges (shared by exactly one panel).
pub fn count_boundary_edges(mesh: &SurfaceMesh) -> usize {
    mesh.edge_map().values().filter(|v| v.len() == 1).count()
}

/// Build the PEEC graph: panel nodes, port super-nodes, interior branches,
/// zero-impedance terminal branches and port excitation branches.
pub fn build_branch_graph(mesh: &SurfaceMesh, edges: &[EdgeBranch]) -> Result<BranchGraph, MeshError> {
    let n_panels = mesh.n_panels();
    let mut branches: Vec<Branch> = edges
        .iter()
        .map(|e| Branch {
            from: e.panel_i,
            to: e.panel_j,
            kind: BranchKind::Interior(e.edge_id),
        })
        .collect();

    let mut n_nodes = n_panels;
    let mut port_nodes = Vec::new();
    for (qi, port) in mesh.ports.iter().enumerate() {
        let pos = n_nodes;
        let neg = n_nodes + 1;
        n_nodes += 2;
        for &panel in &port.positive_terminal {
            branches.push(Branch {
                from: pos,
                to: panel,
                kind: BranchKind::Terminal,
            });
        }
        for &panel in &port.negative_terminal {
            branches.push(Branch {
                from: neg,
                to: panel,
                kind: BranchKind::Terminal,
            });
        }
        let pb = branches.len();
        branches.push(Branch {
            from: pos,
            to: neg,
            kind: BranchKind::Port(qi),
        });
        port_nodes.push((pos, neg, pb));
    }

    let mut node_branches = vec![Vec::new(); n_nodes];
    for (bi, b) in branches.iter().enumerate() {
        node_branches[b.from].push(bi);
        node_branches[b.to].push(bi);
    }

    let graph = BranchGraph {
        n_panel_nodes: n_panels,
        n_nodes,
        branches,
        port_nodes,
        node_branches,
    };

    // Each port's two super-nodes must be connected without using any port
    // branch, otherwise there is no current path.
    for (qi, port) in mesh.ports.iter().enumerate() {
        let (pos, neg, _) = graph.port_nodes[qi];
        if !connected_without_ports(&graph, pos, neg) {
            return Err(MeshError::PortDisconnected {
                port: port.name.clone(),
            });
        }
    }
    Ok(graph)
}

fn connected_without_ports(graph: &BranchGraph, a: usize, b: usize) -> bool {
    let mut seen = vec![false; graph.n_nodes];
    let mut stack = vec![a];
    seen[a] = true;
    while let Some(n) = stack.pop() {
        if n == b {
            return true;
        }
        for &bi in &graph.node_branches[n] {
            let br = &graph.branches[bi];
            if matches!(br.kind, BranchKind::Port(_)) {
                continue;
            }
            let other = if br.from == n { br.to } else { br.from };
            if !seen[other] {
                seen[other] = true;
                stack.push(other);
            }
        }
    }
    false
}

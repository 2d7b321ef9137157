//! Loop analysis: spanning-forest fundamental-cycle basis over the branch
//! graph, with port branches forced into the co-tree so each port owns
//! exactly one loop.

use alloc::vec;
use alloc::vec::Vec;

use crate::mesh::{BranchGraph, BranchKind};
use crate::sparse::Csr;
use crate::C64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LoopError {
    #[error("loop through branch {cotree_branch} carries no impedance (degenerate port/terminal configuration)")]
    ZeroImpedanceLoop { cotree_branch: usize },
    #[error("unknown port index {0}")]
    UnknownPort(usize),
}

/// Sparse loop basis: M has one row per fundamental loop, entries +/-1.
#[derive(Debug, Clone)]
pub struct LoopBasis {
    /// N_l x N_b loop matrix.
    pub m: Csr<f64>,
    /// port index -> loop id whose co-tree branch is that port's branch.
    pub port_loop: Vec<usize>,
    pub n_components: usize,
    pub n_loops: usize,
    pub n_branches: usize,
}

/// Build the fundamental-cycle basis. The spanning forest is grown by
/// breadth-first search from the lowest-index node of each component with
/// ties broken by ascending branch id; port branches never enter the tree.
pub fn build_loop_basis(graph: &BranchGraph) -> Result<LoopBasis, LoopError> {
    let n_nodes = graph.n_nodes;
    let nb = graph.n_branches();
    let mut parent_branch = vec![usize::MAX; n_nodes];
    let mut parent_node = vec![usize::MAX; n_nodes];
    let mut depth = vec![0usize; n_nodes];
    let mut visited = vec![false; n_nodes];
    let mut in_tree = vec![false; nb];
    let mut n_components = 0;

    for start in 0..n_nodes {
        if visited[start] {
            continue;
        }
        n_components += 1;
        visited[start] = true;
        let mut queue = alloc::collections::VecDeque::new();
        queue.push_back(start);
        while let Some(u) = queue.pop_front() {
            // node_branches holds ascending branch ids by construction
            for &bi in &graph.node_branches[u] {
                let b = &graph.branches[bi];
                if matches!(b.kind, BranchKind::Port(_)) {
                    continue;
                }
                let other = if b.from == u { b.to } else { b.from };
                if !visited[other] {
                    visited[other] = true;
                    in_tree[bi] = true;
                    parent_branch[other] = bi;
                    parent_node[other] = u;
                    depth[other] = depth[u] + 1;
                    queue.push_back(other);
                }
            }
        }
    }

    // one fundamental loop per co-tree branch
    let mut entries: Vec<(u32, u32, f64)> = Vec::new();
    let mut port_loop = vec![usize::MAX; graph.port_nodes.len()];
    let mut n_loops = 0usize;
    for (bi, b) in graph.branches.iter().enumerate() {
        if in_tree[bi] {
            continue;
        }
        let loop_id = n_loops;
        n_loops += 1;
        if let BranchKind::Port(q) = b.kind {
            port_loop[q] = loop_id;
        }
        // traverse the co-tree branch forward, then the tree path to -> from
        entries.push((loop_id as u32, bi as u32, 1.0));
        let mut has_impedance = matches!(b.kind, BranchKind::Interior(_));
        let (mut a, mut c) = (b.to, b.from);
        // walk both endpoints up to their common ancestor; `a` side follows
        // the loop direction, `c` side runs against it
        while a != c {
            let step_a = depth[a] >= depth[c];
            let node = if step_a { a } else { c };
            let pb = parent_branch[node];
            debug_assert!(pb != usize::MAX, "endpoints in different components");
            let br = &graph.branches[pb];
            let up = parent_node[node];
            // traversal direction: a-side walks node -> up, c-side up -> node
            let along = if step_a {
                br.from == node && br.to == up
            } else {
                br.from == up && br.to == node
            };
            entries.push((loop_id as u32, pb as u32, if along { 1.0 } else { -1.0 }));
            if matches!(br.kind, BranchKind::Interior(_)) {
                has_impedance = true;
            }
            if step_a {
                a = up;
            } else {
                c = up;
            }
        }
        if !has_impedance {
            return Err(LoopError::ZeroImpedanceLoop { cotree_branch: bi });
        }
    }

    debug_assert_eq!(n_loops + n_nodes, nb + n_components);
    Ok(LoopBasis {
        m: Csr::from_coo(n_loops, nb, entries),
        port_loop,
        n_components,
        n_loops,
        n_branches: nb,
    })
}

impl LoopBasis {
    /// Loop-domain excitation: voltage on the port branch only, mapped by M.
    /// Nonzero exactly at the port's own loop.
    pub fn loop_excitation(&self, graph: &BranchGraph, port: usize, volts: f64) -> Result<Vec<C64>, LoopError> {
        if port >= graph.port_nodes.len() {
            return Err(LoopError::UnknownPort(port));
        }
        let pb = graph.port_nodes[port].2;
        let mut v = vec![C64::new(0.0, 0.0); self.n_loops];
        // column pb of M has a single +/-1 at the port loop
        for r in 0..self.n_loops {
            for p in self.m.indptr[r]..self.m.indptr[r + 1] {
                if self.m.indices[p] as usize == pb {
                    v[r] = C64::new(self.m.values[p] * volts, 0.0);
                }
            }
        }
        Ok(v)
    }

    /// I_branch = M^T I_loop over all branches.
    pub fn recover_branch_currents(&self, loop_currents: &[C64]) -> Vec<C64> {
        assert_eq!(loop_currents.len(), self.n_loops, "dimension mismatch");
        let mut out = vec![C64::new(0.0, 0.0); self.n_branches];
        self.m.tr_mul_c64(loop_currents, &mut out);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::math::XorShift64;
    use crate::mesh::{build_branch_graph, build_connectivity};

    fn incidence_times_mt_is_zero(graph: &BranchGraph, basis: &LoopBasis) {
        // B M^T = 0 exactly, checked in integer arithmetic per loop.
        for l in 0..basis.n_loops {
            let mut node_sum = vec![0i64; graph.n_nodes];
            for p in basis.m.indptr[l]..basis.m.indptr[l + 1] {
                let bi = basis.m.indices[p] as usize;
                let s = basis.m.values[p] as i64;
                let b = &graph.branches[bi];
                node_sum[b.from] += s;
                node_sum[b.to] -= s;
            }
            assert!(node_sum.iter().all(|&v| v == 0), "loop {l} violates KCL");
        }
    }

    #[test]
    fn strip_single_loop() {
        let mesh = fixtures::strip2();
        let edges = build_connectivity(&mesh);
        let graph = build_branch_graph(&mesh, &edges).unwrap();
        let basis = build_loop_basis(&graph).unwrap();
        // 4 nodes, 4 branches, 1 component -> 1 loop through all branches
        assert_eq!(basis.n_loops, 1);
        assert_eq!(basis.m.indptr[1] - basis.m.indptr[0], 4);
        incidence_times_mt_is_zero(&graph, &basis);
        assert_eq!(basis.port_loop[0], 0);
    }

    #[test]
    fn closed_box_loop_count() {
        let mesh = fixtures::closed_box(1.0);
        let edges = build_connectivity(&mesh);
        let graph = build_branch_graph(&mesh, &edges).unwrap();
        let basis = build_loop_basis(&graph).unwrap();
        // 6 nodes, 12 branches -> 7 loops
        assert_eq!(basis.n_loops, 7);
        incidence_times_mt_is_zero(&graph, &basis);
    }

    #[test]
    fn open_tree_strip_has_no_loops() {
        // 1 x 4 panel strip without ports: the graph is a path (a tree).
        let mesh = fixtures::sheet(4, 1, 4.0, 1.0, fixtures::copper(), false);
        let edges = build_connectivity(&mesh);
        let graph = build_branch_graph(&mesh, &edges).unwrap();
        let basis = build_loop_basis(&graph).unwrap();
        assert_eq!(basis.n_loops, 0);
    }

    #[test]
    fn loop_count_formula_holds() {
        for mesh in [
            fixtures::cylinder(1.0, 4.0, 8, 5, fixtures::copper(), fixtures::copper(), true),
            fixtures::coil_pair(100e-6, 5e-6, 2e-6, 5e-6),
            fixtures::plate_double(10, 2, 1e-3, 1e-4, fixtures::copper()),
        ] {
            let edges = build_connectivity(&mesh);
            let graph = build_branch_graph(&mesh, &edges).unwrap();
            let basis = build_loop_basis(&graph).unwrap();
            assert_eq!(
                basis.n_loops,
                graph.n_branches() - graph.n_nodes + basis.n_components
            );
            incidence_times_mt_is_zero(&graph, &basis);
        }
    }

    #[test]
    fn port_loops_are_single_entry_excitations() {
        let mesh = fixtures::coil_pair(100e-6, 5e-6, 2e-6, 5e-6);
        let edges = build_connectivity(&mesh);
        let graph = build_branch_graph(&mesh, &edges).unwrap();
        let basis = build_loop_basis(&graph).unwrap();
        for q in 0..2 {
            let v = basis.loop_excitation(&graph, q, 1.0).unwrap();
            let nonzero: Vec<usize> = (0..v.len()).filter(|&i| v[i].norm() > 0.0).collect();
            assert_eq!(nonzero, alloc::vec![basis.port_loop[q]]);
            assert!((v[basis.port_loop[q]].norm() - 1.0).abs() < 1e-15);
        }
        // zero excitation
        let v0 = basis.loop_excitation(&graph, 0, 0.0).unwrap();
        assert!(v0.iter().all(|c| c.norm() == 0.0));
        assert!(basis.loop_excitation(&graph, 5, 1.0).is_err());
    }

    #[test]
    fn recovered_currents_satisfy_kcl() {
        let mesh = fixtures::closed_box(1.0);
        let edges = build_connectivity(&mesh);
        let graph = build_branch_graph(&mesh, &edges).unwrap();
        let basis = build_loop_basis(&graph).unwrap();
        let mut rng = XorShift64::new(11);
        let il: Vec<C64> = (0..basis.n_loops)
            .map(|_| C64::new(rng.next_sym(), rng.next_sym()))
            .collect();
        let ib = basis.recover_branch_currents(&il);
        for node in 0..graph.n_nodes {
            let mut acc = C64::new(0.0, 0.0);
            for &bi in &graph.node_branches[node] {
                acc += ib[bi] * (graph.incidence(node, bi) as f64);
            }
            assert!(acc.norm() < 1e-13, "node {node}: {acc}");
        }
        // zero loop currents -> zero branch currents
        let zeros = basis.recover_branch_currents(&alloc::vec![C64::new(0.0, 0.0); basis.n_loops]);
        assert!(zeros.iter().all(|c| c.norm() == 0.0));
    }

    #[test]
    fn single_loop_carries_uniform_current() {
        let mesh = fixtures::strip2();
        let edges = build_connectivity(&mesh);
        let graph = build_branch_graph(&mesh, &edges).unwrap();
        let basis = build_loop_basis(&graph).unwrap();
        let ib = basis.recover_branch_currents(&[C64::new(2.0, 0.0)]);
        for b in &ib {
            assert!((b.norm() - 2.0).abs() < 1e-15);
        }
    }

    #[test]
    fn rows_are_linearly_independent() {
        // each loop owns its co-tree branch: a column with a single entry
        let mesh = fixtures::closed_box(1.0);
        let edges = build_connectivity(&mesh);
        let graph = build_branch_graph(&mesh, &edges).unwrap();
        let basis = build_loop_basis(&graph).unwrap();
        let mt = basis.m.transpose();
        let mut single = 0;
        for c in 0..mt.nrows {
            if mt.indptr[c + 1] - mt.indptr[c] == 1 {
                single += 1;
            }
        }
        assert!(single >= basis.n_loops);
    }
}

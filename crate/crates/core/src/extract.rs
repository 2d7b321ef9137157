//! Frequency-sweep orchestration: build the mesh-level structures once,
//! then per frequency refresh the surface impedance and the scalar
//! j w mu0 / 4 pi, refactor the preconditioner, solve all ports in one
//! multi-RHS block and recover the port impedance matrix.

use alloc::vec;
use alloc::vec::Vec;

use crate::basis::{build_mapping, CmMapping};
use crate::dense::DenseC;
use crate::esi;
use crate::fmm::{build_tree, FmmTree};
use crate::gmres::{gmres_mrhs, SolveConfig, SolveReport};
use crate::kernel::{assemble_near_field, NearFieldBlock};
use crate::loops::{build_loop_basis, LoopBasis};
use crate::mesh::{build_connectivity, build_branch_graph, BranchGraph, EdgeBranch, SurfaceMesh};
use crate::operator::{
    build_dense_potential, DensePotential, LoopOperator, OperatorKind, PanelPotential,
};
use crate::precond::{PrecondFactor, PrecondKind};
use crate::{C64, MU0};
use thiserror::Error;

#[allow(unused_imports)]
use num_traits::Float;

#[derive(Debug, Error)]
pub enum ExtractError {
    #[error("mesh has no ports")]
    NoPorts,
    #[error("port admittance matrix is singular (degenerate port configuration)")]
    SingularPortMatrix,
    #[error("frequencies must be positive and strictly increasing")]
    BadFrequencies,
    #[error("at f = {frequency:.6e} Hz: {source}")]
    AtFrequency {
        frequency: f64,
        source: crate::Error,
    },
}

/// Sweep settings.
#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub frequencies: Vec<f64>,
    pub solve: SolveConfig,
    pub precond: PrecondKind,
    pub kind: OperatorKind,
    pub fmm_order: usize,
    pub leaf_size: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            frequencies: Vec::new(),
            solve: SolveConfig::default(),
            precond: PrecondKind::DiagP,
            kind: OperatorKind::Fmm,
            fmm_order: crate::fmm::DEFAULT_ORDER,
            leaf_size: crate::fmm::DEFAULT_LEAF,
        }
    }
}

/// Logarithmically spaced frequency grid.
pub fn log_frequencies(fstart: f64, fstop: f64, n: usize) -> Vec<f64> {
    assert!(fstart > 0.0 && fstop >= fstart && n >= 1);
    if n == 1 {
        return vec![fstart];
    }
    (0..n)
        .map(|i| fstart * (fstop / fstart).powf(i as f64 / (n - 1) as f64))
        .collect()
}

/// Frequency-independent assembled structures.
pub struct ExtractionModel {
    pub mesh: SurfaceMesh,
    pub edges: Vec<EdgeBranch>,
    pub graph: BranchGraph,
    pub mapping: CmMapping,
    pub basis: LoopBasis,
    pub tree: FmmTree,
    pub near: NearFieldBlock,
    pub dense_potential: Option<DensePotential>,
    pub kind: OperatorKind,
}

impl ExtractionModel {
    /// Assemble everything that does not depend on frequency. The near
    /// block and tree are built once; `OperatorKind::Direct` additionally
    /// materializes the dense effective potential.
    pub fn build(
        mesh: SurfaceMesh,
        kind: OperatorKind,
        fmm_order: usize,
        leaf_size: usize,
    ) -> crate::Result<Self> {
        let edges = build_connectivity(&mesh);
        let graph = build_branch_graph(&mesh, &edges)?;
        let mapping = build_mapping(&mesh, &edges);
        let basis = build_loop_basis(&graph)?;
        let centroids: Vec<[f64; 3]> = mesh.panels.iter().map(|p| p.centroid).collect();
        let tree = build_tree(&centroids, leaf_size, fmm_order, crate::fmm::DEFAULT_KAPPA);
        let near = assemble_near_field(&mesh, &tree.near_point_pairs());
        let dense_potential = if kind == OperatorKind::Direct {
            Some(build_dense_potential(&centroids, &near))
        } else {
            None
        };
        Ok(ExtractionModel {
            mesh,
            edges,
            graph,
            mapping,
            basis,
            tree,
            near,
            dense_potential,
            kind,
        })
    }

    /// Z_s(panel)/A_panel at frequency f.
    pub fn esi_panel_diag(&self, f: f64) -> Vec<C64> {
        self.mesh
            .panels
            .iter()
            .map(|p| esi::esi(&self.mesh.conductors[p.conductor_id], f) / p.area)
            .collect()
    }

    /// j w mu0 / 4 pi.
    pub fn kernel_scale(f: f64) -> C64 {
        C64::new(0.0, 2.0 * core::f64::consts::PI * f * MU0 / (4.0 * core::f64::consts::PI))
    }

    pub fn operator<'a>(&'a self, esi_panel: Vec<C64>, scale: C64) -> LoopOperator<'a> {
        let potential = match self.kind {
            OperatorKind::Fmm => PanelPotential::Fmm {
                tree: &self.tree,
                near: &self.near,
            },
            OperatorKind::Direct => PanelPotential::Direct(
                self.dense_potential
                    .as_ref()
                    .expect("direct kind materializes the dense potential"),
            ),
        };
        LoopOperator {
            mapping: &self.mapping,
            basis: &self.basis,
            potential,
            esi_panel,
            scale,
        }
    }

    /// Smallest skin depth over conductors at the highest sweep frequency.
    pub fn min_skin_depth(&self, fmax: f64) -> f64 {
        self.mesh
            .conductors
            .iter()
            .map(|m| esi::skin_depth(m, fmax))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn n_ports(&self) -> usize {
        self.mesh.ports.len()
    }
}

/// Per-frequency wrapped state for reuse-style callers.
pub struct FrequencyState {
    pub frequency: f64,
    pub esi_panel: Vec<C64>,
    pub scale: C64,
}

impl FrequencyState {
    pub fn new(model: &ExtractionModel, f: f64) -> Self {
        FrequencyState {
            frequency: f,
            esi_panel: model.esi_panel_diag(f),
            scale: ExtractionModel::kernel_scale(f),
        }
    }
}

/// Result of one frequency point.
pub struct PortSolve {
    pub frequency: f64,
    /// full port impedance matrix, ohms
    pub z_port: DenseC,
    pub report: SolveReport,
    /// loop currents per port excitation
    pub loop_currents: Vec<Vec<C64>>,
}

/// Excite every port with 1 V (one RHS column each), solve, read port
/// currents off the recovered branch currents, invert the admittance
/// matrix.
pub fn solve_frequency(
    model: &ExtractionModel,
    precond: &mut PrecondFactor,
    f: f64,
    cfg: &SolveConfig,
) -> core::result::Result<PortSolve, ExtractError> {
    let nports = model.n_ports();
    if nports == 0 {
        return Err(ExtractError::NoPorts);
    }
    let state = FrequencyState::new(model, f);
    precond
        .refactor(
            &model.mesh,
            &model.edges,
            &model.mapping,
            &model.near,
            &state.esi_panel,
            state.scale,
        )
        .map_err(|e| ExtractError::AtFrequency {
            frequency: f,
            source: e.into(),
        })?;
    let op = model.operator(state.esi_panel.clone(), state.scale);
    let mut rhs = Vec::with_capacity(nports);
    for q in 0..nports {
        let v = model
            .basis
            .loop_excitation(&model.graph, q, 1.0)
            .map_err(|e| ExtractError::AtFrequency {
                frequency: f,
                source: e.into(),
            })?;
        rhs.push(v);
    }
    let tol = cfg.tol_for_frequency(f);
    let (x, report) = gmres_mrhs(&op, precond, &rhs, tol, cfg).map_err(|e| {
        ExtractError::AtFrequency {
            frequency: f,
            source: e.into(),
        }
    })?;

    // admittance columns: current delivered into the positive terminal
    let mut y = DenseC::zeros(nports, nports);
    for (q, xq) in x.iter().enumerate() {
        let branch_currents = model.basis.recover_branch_currents(xq);
        for p in 0..nports {
            let pb = model.graph.port_nodes[p].2;
            y.set(p, q, branch_currents[pb]);
        }
    }
    let z_port = y.inverse().ok_or(ExtractError::SingularPortMatrix)?;
    Ok(PortSolve {
        frequency: f,
        z_port,
        report,
        loop_currents: x,
    })
}

/// R = Re Z, L = Im Z / w; L is unavailable at w = 0.
pub fn rl_from_impedance(z: &DenseC, omega: f64) -> (DenseC, Option<DenseC>) {
    let mut r = DenseC::zeros(z.n_rows, z.n_cols);
    for i in 0..z.data.len() {
        r.data[i] = C64::new(z.data[i].re, 0.0);
    }
    if omega <= 0.0 {
        return (r, None);
    }
    let mut l = DenseC::zeros(z.n_rows, z.n_cols);
    for i in 0..z.data.len() {
        l.data[i] = C64::new(z.data[i].im / omega, 0.0);
    }
    (r, Some(l))
}

/// Relative L2 norm difference between two sampled series.
pub fn l2_diff(series: &[f64], reference: &[f64]) -> f64 {
    assert_eq!(series.len(), reference.len(), "series length mismatch");
    assert!(!series.is_empty());
    let num: f64 = series
        .iter()
        .zip(reference)
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    let den: f64 = reference.iter().map(|b| b * b).sum();
    assert!(den > 0.0, "zero reference norm");
    (num / den).sqrt()
}

/// Validate a sweep frequency list: positive, strictly increasing.
pub fn validate_frequencies(freqs: &[f64]) -> core::result::Result<(), ExtractError> {
    if freqs.is_empty() || freqs[0] <= 0.0 {
        return Err(ExtractError::BadFrequencies);
    }
    for w in freqs.windows(2) {
        if w[1] <= w[0] {
            return Err(ExtractError::BadFrequencies);
        }
    }
    Ok(())
}

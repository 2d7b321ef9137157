//! Core engine for broadband resistance/inductance extraction of 3-D
//! conductor surfaces under the magneto-quasi-static assumption.
//!
//! The pipeline: a hybrid triangle/rectangle surface mesh becomes a PEEC
//! branch graph (panel centroids are nodes, shared edges are branches),
//! edge currents are mapped onto panel-centered current components through
//! sparse centroid-midpoint mapping matrices, loop analysis eliminates the
//! potential unknowns, and the resulting complex-symmetric loop system is
//! solved per frequency by restarted multi-RHS GMRES. The scalar-potential
//! panel interactions are evaluated by analytic polygon integrals near and
//! an octree fast multipole method far, and the solve is preconditioned by
//! a factorized sparse matrix built from the panel self-term diagonal.
//!
//! This crate is `no_std` (with `alloc`); file I/O, timing and the CLI
//! live in the companion `rlx` crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod basis;
pub mod dense;
pub mod esi;
pub mod extract;
pub mod fixtures;
pub mod fmm;
pub mod gmres;
pub mod kernel;
pub mod loops;
pub mod math;
pub mod mesh;
pub mod meshtext;
pub mod operator;
pub mod precond;
pub mod reference;
pub mod sparse;


pub use basis::CmMapping;
pub use esi::{esi, skin_depth, EsiValue};
pub use extract::{
    l2_diff, log_frequencies, rl_from_impedance, solve_frequency, ExtractionModel, FrequencyState,
    PortSolve, SweepConfig,
};
pub use gmres::{gmres_mrhs, SolveConfig, SolveReport};
pub use kernel::NearFieldBlock;
pub use loops::LoopBasis;
pub use mesh::{BranchGraph, ConductorMaterial, EdgeBranch, Panel, PortSpec, SurfaceMesh};
pub use operator::{LinOp, OperatorKind};
pub use precond::{PrecondFactor, PrecondKind};

/// Complex scalar used throughout the solver.
pub type C64 = num_complex::Complex<f64>;

/// Free-space permeability, H/m.
pub const MU0: f64 = 4.0e-7 * core::f64::consts::PI;

use thiserror::Error;

/// Top-level error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("mesh: {0}")]
    Mesh(#[from] mesh::MeshError),
    #[error("mesh file: {0}")]
    Parse(#[from] meshtext::ParseError),
    #[error("loop analysis: {0}")]
    Loops(#[from] loops::LoopError),
    #[error("solver: {0}")]
    Solve(#[from] gmres::SolveError),
    #[error("preconditioner: {0}")]
    Precond(#[from] precond::PrecondError),
    #[error("extraction: {0}")]
    Extract(#[from] alloc::boxed::Box<extract::ExtractError>),
}

impl From<extract::ExtractError> for Error {
    fn from(e: extract::ExtractError) -> Self {
        Error::Extract(alloc::boxed::Box::new(e))
    }
}

pub type Result<T> = core::result::Result<T, Error>;

//! Built-in equivalence suite: on small meshes the multipole-path port
//! impedance must match a dense direct solve of the same loop system.

use rlx_core::dense::DenseC;
use rlx_core::operator::materialize;
use rlx_core::precond::PrecondFactor;
use rlx_core::{
    fixtures, solve_frequency, ExtractionModel, OperatorKind, PrecondKind, SolveConfig,
    SurfaceMesh, C64,
};

pub struct CheckResult {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

/// Dense direct-solve port impedance: materialize the loop operator and
/// LU-solve the excitation block.
pub fn dense_direct_z(model: &ExtractionModel, f: f64) -> DenseC {
    let state = rlx_core::FrequencyState::new(model, f);
    let op = model.operator(state.esi_panel.clone(), state.scale);
    let dense = materialize(&op);
    let nports = model.n_ports();
    let mut rhs = Vec::with_capacity(nports);
    for q in 0..nports {
        rhs.push(model.basis.loop_excitation(&model.graph, q, 1.0).unwrap());
    }
    let sols = dense.lu_solve(&rhs).expect("dense loop system solvable");
    let mut y = DenseC::zeros(nports, nports);
    for (q, x) in sols.iter().enumerate() {
        let ib = model.basis.recover_branch_currents(x);
        for p in 0..nports {
            y.set(p, q, ib[model.graph.port_nodes[p].2]);
        }
    }
    y.inverse().expect("port admittance invertible")
}

fn rel_matrix_diff(a: &DenseC, b: &DenseC) -> f64 {
    let mut num = 0.0f64;
    let mut den = 0.0f64;
    for i in 0..a.data.len() {
        num += (a.data[i] - b.data[i]).norm_sqr();
        den += b.data[i].norm_sqr();
    }
    (num / den).sqrt()
}

/// FMM-path vs dense-direct Z_port on one mesh at several frequencies.
/// The tree is built with a small leaf size so the far field is genuinely
/// exercised even on small meshes.
pub fn equivalence_check(name: &str, mesh: SurfaceMesh, tol: f64) -> Vec<CheckResult> {
    let mut out = Vec::new();
    let build = ExtractionModel::build(mesh, OperatorKind::Fmm, 8, 8);
    let model = match build {
        Ok(m) => m,
        Err(e) => {
            out.push(CheckResult {
                name: format!("{name}: build"),
                pass: false,
                detail: format!("{e}"),
            });
            return out;
        }
    };
    let cfg = SolveConfig {
        tol_high_freq: 1e-10,
        tol_low_freq: 1e-10,
        ..SolveConfig::default()
    };
    for f in [1e3, 3.162e6, 1e10] {
        let mut pre = PrecondFactor::new(PrecondKind::DiagP, &model.basis, model.edges.len());
        let solved = solve_frequency(&model, &mut pre, f, &cfg);
        match solved {
            Ok(sol) => {
                let zd = dense_direct_z(&model, f);
                let rel = rel_matrix_diff(&sol.z_port, &zd);
                out.push(CheckResult {
                    name: format!("{name} @ {f:.3e} Hz"),
                    pass: rel <= tol,
                    detail: format!("relative Z_port difference {rel:.3e} (tol {tol:.0e})"),
                });
            }
            Err(e) => out.push(CheckResult {
                name: format!("{name} @ {f:.3e} Hz"),
                pass: false,
                detail: format!("{e}"),
            }),
        }
    }
    out
}

/// The dense-oracle equivalence suite over the built-in small meshes.
pub fn run_selftest() -> Vec<CheckResult> {
    let mut checks = Vec::new();
    checks.extend(equivalence_check("strip2", fixtures::strip2(), 1e-5));
    checks.extend(equivalence_check(
        "sheet 6x4",
        fixtures::sheet(6, 4, 6e-3, 4e-3, fixtures::copper(), true),
        1e-5,
    ));
    checks.extend(equivalence_check(
        "plate 10x2 double",
        fixtures::plate_double(10, 2, 1e-3, 2e-4, fixtures::copper()),
        1e-5,
    ));
    checks.extend(equivalence_check(
        "cylinder 12x8",
        fixtures::cylinder(
            5e-6,
            50e-6,
            12,
            8,
            fixtures::wire_material(5e-6),
            fixtures::contact_material(5e-6),
            true,
        ),
        1e-5,
    ));
    // structural sanity: recovered branch currents satisfy continuity
    let model = ExtractionModel::build(
        fixtures::sheet(5, 3, 5.0, 3.0, fixtures::copper(), true),
        OperatorKind::Direct,
        8,
        64,
    )
    .unwrap();
    let mut pre = PrecondFactor::new(PrecondKind::DiagP, &model.basis, model.edges.len());
    let sol = solve_frequency(&model, &mut pre, 1e6, &SolveConfig::default()).unwrap();
    let ib = model.basis.recover_branch_currents(&sol.loop_currents[0]);
    let mut worst: f64 = 0.0;
    let iscale = ib.iter().map(|c| c.norm()).fold(0.0f64, f64::max);
    for node in 0..model.graph.n_nodes {
        let mut acc = C64::new(0.0, 0.0);
        for &bi in &model.graph.node_branches[node] {
            acc += ib[bi] * (model.graph.incidence(node, bi) as f64);
        }
        worst = worst.max(acc.norm());
    }
    checks.push(CheckResult {
        name: "current continuity at nodes".into(),
        pass: worst <= 1e-12 * iscale,
        detail: format!("max node imbalance {worst:.3e} (scale {iscale:.3e})"),
    });
    checks
}

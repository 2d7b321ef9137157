//! Restarted GMRES with multiple right-hand sides.
//!
//! Per restart cycle one Krylov basis is grown from the worst-residual
//! column (modified Gram-Schmidt with a conditional reorthogonalization
//! pass); every active column is then corrected by its least-squares
//! projection onto that shared basis. Convergence is measured on the
//! left-preconditioned residual; the true residual is recomputed once
//! after the solve.

use alloc::vec;
use alloc::vec::Vec;

use crate::operator::LinOp;
use crate::precond::PrecondFactor;
use crate::C64;
use num_traits::Zero;
use thiserror::Error;

#[allow(unused_imports)]
use num_traits::Float;

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("zero right-hand side column {0}")]
    ZeroRhs(usize),
    #[error("krylov breakdown at iteration {0} (zero-norm basis vector)")]
    Breakdown(usize),
}

/// Solver settings. The residual tolerance switches at 1 MHz.
#[derive(Debug, Clone)]
pub struct SolveConfig {
    pub restart: usize,
    pub tol_high_freq: f64,
    pub tol_low_freq: f64,
    pub max_iters: usize,
    /// record per-iteration residual estimates
    pub trace: bool,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            restart: 50,
            tol_high_freq: 1e-4,
            tol_low_freq: 1e-6,
            max_iters: 2000,
            trace: false,
        }
    }
}

impl SolveConfig {
    /// Relative residual tolerance rule: looser above 1 MHz.
    pub fn tol_for_frequency(&self, f: f64) -> f64 {
        if f > 1e6 {
            self.tol_high_freq
        } else {
            self.tol_low_freq
        }
    }
}

/// Outcome of one multi-RHS solve.
#[derive(Debug, Clone)]
pub struct SolveReport {
    /// inner iterations consumed when each column first converged
    pub iterations: Vec<usize>,
    /// final preconditioned relative residuals
    pub residuals: Vec<f64>,
    /// unpreconditioned ||b - A x|| / ||b||, recomputed once post-solve
    pub true_residuals: Vec<f64>,
    pub converged: Vec<bool>,
    pub mvm_count: usize,
    pub total_iterations: usize,
    /// per column: (inner iteration, preconditioned residual estimate)
    pub trace: Vec<Vec<(usize, f64)>>,
}

fn norm(v: &[C64]) -> f64 {
    v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

fn dot_conj(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Complex Givens rotation: returns (c, s, r) with
/// c f + s g = r and -conj(s) f + c g = 0, c real.
fn givens(f: C64, g: C64) -> (f64, C64, C64) {
    if g == C64::zero() {
        return (1.0, C64::zero(), f);
    }
    if f == C64::zero() {
        return (0.0, g.conj() / g.norm(), C64::new(g.norm(), 0.0));
    }
    let rho = (f.norm_sqr() + g.norm_sqr()).sqrt();
    let fu = f / f.norm();
    let c = f.norm() / rho;
    let s = fu * g.conj() / rho;
    (c, s, fu * rho)
}

/// Solve A X = B with left preconditioning, shared-basis restarted GMRES.
pub fn gmres_mrhs(
    op: &dyn LinOp,
    pre: &PrecondFactor,
    rhs: &[Vec<C64>],
    tol: f64,
    cfg: &SolveConfig,
) -> Result<(Vec<Vec<C64>>, SolveReport), SolveError> {
    let n = op.dim();
    let nrhs = rhs.len();
    assert!(cfg.restart >= 1 && tol > 0.0 && tol < 1.0);

    let mut x: Vec<Vec<C64>> = vec![vec![C64::zero(); n]; nrhs];
    let mut bnorm = vec![0.0; nrhs];
    for (q, b) in rhs.iter().enumerate() {
        assert_eq!(b.len(), n, "dimension mismatch");
        bnorm[q] = norm(&pre.apply(b));
        if bnorm[q] == 0.0 {
            return Err(SolveError::ZeroRhs(q));
        }
    }

    let mut report = SolveReport {
        iterations: vec![0; nrhs],
        residuals: vec![f64::INFINITY; nrhs],
        true_residuals: vec![f64::INFINITY; nrhs],
        converged: vec![false; nrhs],
        mvm_count: 0,
        total_iterations: 0,
        trace: vec![Vec::new(); nrhs],
    };

    'outer: loop {
        // preconditioned residuals
        let mut r: Vec<Vec<C64>> = Vec::with_capacity(nrhs);
        for q in 0..nrhs {
            let ax = op.apply(&x[q]);
            report.mvm_count += 1;
            let raw: Vec<C64> = rhs[q].iter().zip(&ax).map(|(b, a)| b - a).collect();
            r.push(pre.apply(&raw));
        }
        let mut worst = 0.0f64;
        let mut seed = usize::MAX;
        for q in 0..nrhs {
            let rel = norm(&r[q]) / bnorm[q];
            report.residuals[q] = rel;
            if rel <= tol {
                if !report.converged[q] {
                    report.converged[q] = true;
                    report.iterations[q] = report.total_iterations;
                }
            } else {
                report.converged[q] = false;
                if rel > worst {
                    worst = rel;
                    seed = q;
                }
            }
        }
        if seed == usize::MAX || report.total_iterations >= cfg.max_iters {
            break;
        }

        // Arnoldi on the seed residual
        let m = cfg.restart.min(n);
        let beta = norm(&r[seed]);
        let mut basis: Vec<Vec<C64>> = Vec::with_capacity(m + 1);
        basis.push(r[seed].iter().map(|c| c / beta).collect());
        let mut h_cols: Vec<Vec<C64>> = Vec::with_capacity(m); // rotated columns of Hbar
        let mut rot: Vec<(f64, C64)> = Vec::with_capacity(m);
        // per-column projection state
        let active: Vec<usize> = (0..nrhs).filter(|&q| !report.converged[q]).collect();
        let mut c_raw: Vec<Vec<C64>> = vec![Vec::with_capacity(m + 1); nrhs];
        let mut g_fin: Vec<Vec<C64>> = vec![Vec::with_capacity(m); nrhs]; // finalized rotated entries
        let mut t_carry: Vec<C64> = vec![C64::zero(); nrhs];
        let mut proj2: Vec<f64> = vec![0.0; nrhs]; // sum |c_raw|^2
        for &q in &active {
            let c0 = dot_conj(&basis[0], &r[q]);
            c_raw[q].push(c0);
            t_carry[q] = c0;
            proj2[q] = c0.norm_sqr();
        }

        let mut k_used = 0;
        let mut breakdown = false;
        for k in 0..m {
            if report.total_iterations >= cfg.max_iters {
                break;
            }
            report.total_iterations += 1;
            let mut w = pre.apply(&op.apply(&basis[k]));
            report.mvm_count += 1;
            let w_norm_before = norm(&w);
            let mut h = vec![C64::zero(); k + 2];
            for j in 0..=k {
                let hij = dot_conj(&basis[j], &w);
                h[j] = hij;
                for (wi, vi) in w.iter_mut().zip(&basis[j]) {
                    *wi -= hij * vi;
                }
            }
            let mut w_norm = norm(&w);
            // conditional reorthogonalization on serious cancellation
            if w_norm < 0.5 * w_norm_before || w_norm < 1e-8 * w_norm_before {
                for j in 0..=k {
                    let hij = dot_conj(&basis[j], &w);
                    h[j] += hij;
                    for (wi, vi) in w.iter_mut().zip(&basis[j]) {
                        *wi -= hij * vi;
                    }
                }
                w_norm = norm(&w);
            }
            h[k + 1] = C64::new(w_norm, 0.0);
            k_used = k + 1;

            let happy = w_norm <= 1e-14 * beta;
            if !happy {
                basis.push(w.iter().map(|c| c / w_norm).collect());
            }

            // apply existing rotations to the new Hbar column
            for (j, &(cj, sj)) in rot.iter().enumerate() {
                let a = h[j];
                let b = h[j + 1];
                h[j] = a * cj + b * sj;
                h[j + 1] = -a * sj.conj() + b * cj;
            }
            let (ck, sk, rk) = givens(h[k], h[k + 1]);
            h[k] = rk;
            h[k + 1] = C64::zero();
            rot.push((ck, sk));
            h_cols.push(h);

            // new raw projection coefficients and rotation bookkeeping
            if !happy {
                for &q in &active {
                    let cnew = dot_conj(&basis[k + 1], &r[q]);
                    c_raw[q].push(cnew);
                    proj2[q] += cnew.norm_sqr();
                    let t_old = t_carry[q];
                    g_fin[q].push(t_old * ck + cnew * sk);
                    t_carry[q] = -t_old * sk.conj() + cnew * ck;
                }
            } else {
                for &q in &active {
                    let t_old = t_carry[q];
                    g_fin[q].push(t_old * ck);
                    t_carry[q] = -t_old * sk.conj();
                }
            }

            // per-column residual estimates at this inner step
            let mut all_done = true;
            for &q in &active {
                let rq2 = norm(&r[q]).powi(2);
                let out_of_span = (rq2 - proj2[q]).max(0.0);
                let est = (out_of_span + t_carry[q].norm_sqr()).sqrt() / bnorm[q];
                if cfg.trace {
                    report.trace[q].push((report.total_iterations, est));
                }
                if est > tol {
                    all_done = false;
                }
            }
            if happy {
                breakdown = true;
                if w_norm > 0.0 && w_norm <= 1e-14 * beta {
                    // happy breakdown: subspace exact, finish the cycle
                }
                break;
            }
            if all_done {
                break;
            }
        }

        if k_used == 0 {
            break 'outer;
        }
        // least-squares update per active column: R y = g
        for &q in &active {
            let mut y = vec![C64::zero(); k_used];
            for i in (0..k_used).rev() {
                let mut acc = g_fin[q][i];
                for j in i + 1..k_used {
                    acc -= h_cols[j][i] * y[j];
                }
                let rii = h_cols[i][i];
                if rii.norm() <= 1e-300 {
                    if breakdown {
                        continue;
                    }
                    return Err(SolveError::Breakdown(report.total_iterations));
                }
                y[i] = acc / rii;
            }
            for j in 0..k_used {
                let yj = y[j];
                for (xi, vi) in x[q].iter_mut().zip(&basis[j]) {
                    *xi += yj * vi;
                }
            }
        }
    }

    // true unpreconditioned residuals
    for q in 0..nrhs {
        let ax = op.apply(&x[q]);
        let raw: Vec<C64> = rhs[q].iter().zip(&ax).map(|(b, a)| b - a).collect();
        let bn = norm(&rhs[q]);
        report.true_residuals[q] = norm(&raw) / bn;
        if !report.converged[q] {
            report.iterations[q] = report.total_iterations;
        }
    }
    Ok((x, report))
}

//! Frequency sweep with timing, CSV output and the run summary.

use std::fmt::Write as _;
use std::time::Instant;

use rlx_core::extract::{solve_frequency, validate_frequencies, ExtractError, PortSolve};
use rlx_core::precond::PrecondFactor;
use rlx_core::{ExtractionModel, PrecondKind, SolveConfig};

#[derive(Debug, Clone)]
pub struct SweepOptions {
    pub frequencies: Vec<f64>,
    pub solve: SolveConfig,
    pub precond: PrecondKind,
    pub threads: usize,
    pub verbosity: u8,
}

/// One CSV row: (frequency, port pair) entry of the extracted matrices.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub freq_hz: f64,
    pub port_i: usize,
    pub port_j: usize,
    pub r_ohm: f64,
    pub l_henry: f64,
    pub iterations: usize,
    pub residual: f64,
}

pub struct FrequencyRecord {
    pub solve: PortSolve,
    pub precond_setup_s: f64,
    pub solve_s: f64,
}

pub struct SweepResult {
    pub records: Vec<FrequencyRecord>,
    pub rows: Vec<SweepRow>,
    pub min_skin_depth: f64,
    pub total_wall_s: f64,
    pub near_nnz: usize,
}

fn solve_one(
    model: &ExtractionModel,
    precond: &mut PrecondFactor,
    f: f64,
    solve: &SolveConfig,
) -> Result<FrequencyRecord, ExtractError> {
    // setup time is the preconditioner refactorization; measure it
    // separately from the Krylov iterations by refreshing the factor first
    let t0 = Instant::now();
    precond
        .refactor(
            &model.mesh,
            &model.edges,
            &model.mapping,
            &model.near,
            &model.esi_panel_diag(f),
            ExtractionModel::kernel_scale(f),
        )
        .map_err(|e| ExtractError::AtFrequency {
            frequency: f,
            source: e.into(),
        })?;
    let precond_setup_s = t0.elapsed().as_secs_f64();
    let t1 = Instant::now();
    let solve_out = solve_frequency(model, precond, f, solve)?;
    let solve_s = t1.elapsed().as_secs_f64();
    Ok(FrequencyRecord {
        solve: solve_out,
        precond_setup_s,
        solve_s,
    })
}

/// Run the sweep; frequencies are solved sequentially unless
/// `threads > 1`, in which case they are distributed over worker threads
/// (each with its own preconditioner state).
pub fn run_sweep(model: &ExtractionModel, opts: &SweepOptions) -> Result<SweepResult, ExtractError> {
    validate_frequencies(&opts.frequencies)?;
    let t0 = Instant::now();
    let n = opts.frequencies.len();
    let mut records: Vec<Option<FrequencyRecord>> = Vec::with_capacity(n);
    for _ in 0..n {
        records.push(None);
    }

    if opts.threads <= 1 {
        let mut precond = PrecondFactor::new(opts.precond, &model.basis, model.edges.len());
        for (i, &f) in opts.frequencies.iter().enumerate() {
            let rec = solve_one(model, &mut precond, f, &opts.solve)?;
            if opts.verbosity >= 1 {
                eprintln!(
                    "f = {:.6e} Hz: precond setup {:.3}s, {} iterations, residual {:.3e}",
                    f,
                    rec.precond_setup_s,
                    rec.solve.report.total_iterations,
                    rec.solve.report.residuals.iter().cloned().fold(0.0, f64::max)
                );
            }
            if opts.verbosity >= 2 {
                for (q, tr) in rec.solve.report.trace.iter().enumerate() {
                    for &(it, est) in tr {
                        eprintln!("  port {q} iter {it}: rre {est:.3e}");
                    }
                }
            }
            records[i] = Some(rec);
        }
    } else {
        let next = std::sync::atomic::AtomicUsize::new(0);
        let slots: Vec<std::sync::Mutex<Option<Result<FrequencyRecord, ExtractError>>>> =
            (0..n).map(|_| std::sync::Mutex::new(None)).collect();
        std::thread::scope(|scope| {
            for _ in 0..opts.threads.min(n) {
                scope.spawn(|| {
                    let mut precond =
                        PrecondFactor::new(opts.precond, &model.basis, model.edges.len());
                    loop {
                        let i = next.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
                        if i >= n {
                            break;
                        }
                        let out = solve_one(model, &mut precond, opts.frequencies[i], &opts.solve);
                        *slots[i].lock().unwrap() = Some(out);
                    }
                });
            }
        });
        for (i, slot) in slots.into_iter().enumerate() {
            records[i] = Some(slot.into_inner().unwrap().unwrap()?);
        }
    }

    let records: Vec<FrequencyRecord> = records.into_iter().map(|r| r.unwrap()).collect();
    let mut rows = Vec::new();
    for rec in &records {
        let f = rec.solve.frequency;
        let omega = 2.0 * std::f64::consts::PI * f;
        let iterations = rec.solve.report.total_iterations;
        let residual = rec
            .solve
            .report
            .true_residuals
            .iter()
            .cloned()
            .fold(0.0, f64::max);
        let np = rec.solve.z_port.n_rows;
        for i in 0..np {
            for j in 0..np {
                let z = rec.solve.z_port.at(i, j);
                rows.push(SweepRow {
                    freq_hz: f,
                    port_i: i,
                    port_j: j,
                    r_ohm: z.re,
                    l_henry: z.im / omega,
                    iterations,
                    residual,
                });
            }
        }
    }
    let fmax = *opts
        .frequencies
        .last()
        .expect("validated non-empty frequency list");
    Ok(SweepResult {
        rows,
        min_skin_depth: model.min_skin_depth(fmax),
        total_wall_s: t0.elapsed().as_secs_f64(),
        near_nnz: model.near.matrix.nnz(),
        records,
    })
}

/// Render the stable machine interface.
pub fn rows_to_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("freq_hz,port_i,port_j,R_ohm,L_henry,iterations,residual\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{:.12e},{},{},{:.12e},{:.12e},{},{:.6e}",
            r.freq_hz, r.port_i, r.port_j, r.r_ohm, r.l_henry, r.iterations, r.residual
        );
    }
    out
}

/// Human-readable run summary block.
pub fn summary_text(model: &ExtractionModel, result: &SweepResult) -> String {
    let mut s = String::from("summary = {\n");
    let _ = writeln!(s, "  n_panels = {}", model.mesh.n_panels());
    let _ = writeln!(s, "  n_edges = {}", model.edges.len());
    let _ = writeln!(s, "  n_loops = {}", model.basis.n_loops);
    let _ = writeln!(s, "  n_ports = {}", model.n_ports());
    let _ = writeln!(s, "  min_skin_depth_m = {:.6e}", result.min_skin_depth);
    let _ = writeln!(s, "  near_field_nnz = {}", result.near_nnz);
    let _ = writeln!(s, "  total_wall_s = {:.3}", result.total_wall_s);
    s += "}\n";
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use rlx_core::{fixtures, OperatorKind};

    fn options(freqs: Vec<f64>) -> SweepOptions {
        SweepOptions {
            frequencies: freqs,
            solve: SolveConfig::default(),
            precond: PrecondKind::DiagP,
            threads: 1,
            verbosity: 0,
        }
    }

    #[test]
    fn one_point_strip_sweep() {
        let model =
            ExtractionModel::build(fixtures::strip2(), OperatorKind::Direct, 8, 64).unwrap();
        let res = run_sweep(&model, &options(vec![1e3])).unwrap();
        assert_eq!(res.rows.len(), 1);
        let row = &res.rows[0];
        assert!(row.r_ohm > 0.0);
        assert!(row.l_henry > 0.0);
        let csv = rows_to_csv(&res.rows);
        assert!(csv.starts_with("freq_hz,port_i,port_j,R_ohm,L_henry,iterations,residual\n"));
        assert_eq!(csv.lines().count(), 2);
    }

    #[test]
    fn sweep_is_deterministic() {
        let model =
            ExtractionModel::build(fixtures::sheet(6, 2, 6.0, 2.0, fixtures::copper(), true), OperatorKind::Direct, 8, 64)
                .unwrap();
        let freqs = rlx_core::log_frequencies(1e3, 1e9, 5);
        let a = rows_to_csv(&run_sweep(&model, &options(freqs.clone())).unwrap().rows);
        let b = rows_to_csv(&run_sweep(&model, &options(freqs)).unwrap().rows);
        assert_eq!(a, b);
    }

    #[test]
    fn threaded_sweep_matches_sequential() {
        let model =
            ExtractionModel::build(fixtures::sheet(6, 2, 6.0, 2.0, fixtures::copper(), true), OperatorKind::Direct, 8, 64)
                .unwrap();
        let freqs = rlx_core::log_frequencies(1e3, 1e9, 6);
        let seq = rows_to_csv(&run_sweep(&model, &options(freqs.clone())).unwrap().rows);
        let mut par_opts = options(freqs);
        par_opts.threads = 3;
        let par = rows_to_csv(&run_sweep(&model, &par_opts).unwrap().rows);
        assert_eq!(seq, par);
    }

    #[test]
    fn monotone_r_increasing_l_decreasing_strip() {
        // physical sanity on a passive structure across a wide sweep
        let model =
            ExtractionModel::build(fixtures::sheet(8, 2, 8e-3, 2e-3, fixtures::copper(), true), OperatorKind::Direct, 8, 64)
                .unwrap();
        let freqs = rlx_core::log_frequencies(1e3, 1e10, 8);
        let res = run_sweep(&model, &options(freqs)).unwrap();
        let rs: Vec<f64> = res.rows.iter().map(|r| r.r_ohm).collect();
        let ls: Vec<f64> = res.rows.iter().map(|r| r.l_henry).collect();
        for w in rs.windows(2) {
            assert!(w[1] >= w[0] * (1.0 - 1e-9), "R not monotone: {w:?}");
        }
        for w in ls.windows(2) {
            assert!(w[1] <= w[0] * (1.0 + 1e-9), "L not monotone: {w:?}");
        }
    }
}

//! Command-line front end: `extract`, `reference`, `mesh-check` and
//! `selftest` subcommands over plain hand-parsed flags plus an optional
//! `key = value` config file.

use std::path::{Path, PathBuf};

use rlx_core::extract::log_frequencies;
use rlx_core::reference::{wire_internal_impedance, WireSpec};
use rlx_core::{ExtractionModel, OperatorKind, PrecondKind, SolveConfig};

use crate::io::{dump_loops, dump_mapping, load_mesh};
use crate::sweep::{rows_to_csv, run_sweep, summary_text, SweepOptions};

const USAGE: &str = "\
rlx - broadband RL extraction for 3-D conductor surfaces

USAGE:
  rlx extract   --mesh <file> --fstart <Hz> --fstop <Hz> --npoints <n> --out <csv>
                [--ports all] [--precond diag-p|diag-l|none] [--tol-high <v>]
                [--tol-low <v>] [--restart <n>] [--max-iters <n>]
                [--fmm-order <p>] [--leaf-size <n>] [--direct] [--threads <n>]
                [--verbose <n>] [--config <file>] [--dump-cm <file>]
                [--dump-loops <file>]
  rlx reference --radius <m> --length <m> --sigma <S/m> --fstart <Hz>
                --fstop <Hz> --npoints <n> --out <csv>
  rlx mesh-check --mesh <file> [--dump-cm <file>] [--dump-loops <file>]
  rlx selftest

Config file lines use the flag names without dashes, e.g. `fstart = 1e3`;
command-line flags override file values.
";

/// Merged settings for `extract`.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub mesh: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub fstart: Option<f64>,
    pub fstop: Option<f64>,
    pub npoints: Option<usize>,
    pub ports: String,
    pub tol_high: f64,
    pub tol_low: f64,
    pub restart: usize,
    pub max_iters: usize,
    pub precond: PrecondKind,
    pub fmm_order: usize,
    pub leaf_size: usize,
    pub direct: bool,
    pub threads: usize,
    pub verbose: u8,
    pub dump_cm: Option<PathBuf>,
    pub dump_loops: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            mesh: None,
            out: None,
            fstart: None,
            fstop: None,
            npoints: None,
            ports: "all".into(),
            tol_high: 1e-4,
            tol_low: 1e-6,
            restart: 50,
            max_iters: 2000,
            precond: PrecondKind::DiagP,
            fmm_order: rlx_core::fmm::DEFAULT_ORDER,
            leaf_size: rlx_core::fmm::DEFAULT_LEAF,
            direct: false,
            threads: 1,
            verbose: 0,
            dump_cm: None,
            dump_loops: None,
        }
    }
}

fn parse_precond(v: &str) -> Result<PrecondKind, String> {
    match v {
        "diag-p" => Ok(PrecondKind::DiagP),
        "diag-l" => Ok(PrecondKind::DiagL),
        "none" => Ok(PrecondKind::None),
        other => Err(format!("unknown preconditioner `{other}` (diag-p|diag-l|none)")),
    }
}

impl RunConfig {
    fn apply(&mut self, key: &str, value: Option<&str>) -> Result<(), String> {
        if key == "direct" {
            self.direct = true;
            return Ok(());
        }
        let v = value.ok_or_else(|| format!("--{key} requires a value"))?;
        match key {
            "mesh" => self.mesh = Some(PathBuf::from(v)),
            "out" => self.out = Some(PathBuf::from(v)),
            "fstart" => self.fstart = Some(parse_num(v, key)?),
            "fstop" => self.fstop = Some(parse_num(v, key)?),
            "npoints" => self.npoints = Some(parse_int(v, key)?),
            "ports" => {
                if v != "all" {
                    return Err("only `--ports all` is supported".into());
                }
                self.ports = v.to_string();
            }
            "tol-high" => self.tol_high = parse_num(v, key)?,
            "tol-low" => self.tol_low = parse_num(v, key)?,
            "restart" => self.restart = parse_int(v, key)?,
            "max-iters" => self.max_iters = parse_int(v, key)?,
            "precond" => self.precond = parse_precond(v)?,
            "fmm-order" => self.fmm_order = parse_int(v, key)?,
            "leaf-size" => self.leaf_size = parse_int(v, key)?,
            "threads" => self.threads = parse_int(v, key)?,
            "verbose" => self.verbose = parse_int(v, key)? as u8,
            "dump-cm" => self.dump_cm = Some(PathBuf::from(v)),
            "dump-loops" => self.dump_loops = Some(PathBuf::from(v)),
            other => return Err(format!("unknown option `{other}`")),
        }
        Ok(())
    }

    fn load_config_file(&mut self, path: &Path) -> Result<(), String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("config {path:?}: {e}"))?;
        for (ln, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| format!("config line {}: expected key = value", ln + 1))?;
            let key = k.trim();
            let value = v.trim();
            if key == "direct" {
                // boolean in file form
                match value {
                    "true" => self.direct = true,
                    "false" => self.direct = false,
                    _ => return Err(format!("config line {}: direct = true|false", ln + 1)),
                }
            } else {
                self.apply(key, Some(value))
                    .map_err(|e| format!("config line {}: {e}", ln + 1))?;
            }
        }
        Ok(())
    }
}

fn parse_num(v: &str, key: &str) -> Result<f64, String> {
    v.parse::<f64>().map_err(|_| format!("--{key}: expected number, got `{v}`"))
}

fn parse_int(v: &str, key: &str) -> Result<usize, String> {
    v.parse::<usize>().map_err(|_| format!("--{key}: expected integer, got `{v}`"))
}

/// Split argv into (flag, value) pairs; flags with values take the next
/// token, `--direct` is a bare switch.
fn parse_flags(args: &[String]) -> Result<Vec<(String, Option<String>)>, String> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < args.len() {
        let a = &args[i];
        let Some(name) = a.strip_prefix("--") else {
            return Err(format!("unexpected argument `{a}`"));
        };
        if name == "direct" {
            out.push((name.to_string(), None));
            i += 1;
            continue;
        }
        let value = args.get(i + 1).cloned();
        if value.is_none() {
            return Err(format!("--{name} requires a value"));
        }
        out.push((name.to_string(), value));
        i += 2;
    }
    Ok(out)
}

fn cmd_extract(args: &[String]) -> Result<i32, String> {
    let flags = parse_flags(args)?;
    let mut cfg = RunConfig::default();
    // config file first, then flags override
    for (k, v) in &flags {
        if k == "config" {
            cfg.load_config_file(Path::new(v.as_deref().unwrap()))?;
        }
    }
    for (k, v) in &flags {
        if k == "config" {
            continue;
        }
        cfg.apply(k, v.as_deref())?;
    }
    let mesh_path = cfg.mesh.clone().ok_or("--mesh is required")?;
    let out_path = cfg.out.clone().ok_or("--out is required")?;
    let fstart = cfg.fstart.ok_or("--fstart is required")?;
    let fstop = cfg.fstop.ok_or("--fstop is required")?;
    let npoints = cfg.npoints.ok_or("--npoints is required")?;
    if fstart <= 0.0 || fstop < fstart || npoints == 0 {
        return Err("invalid frequency range".into());
    }

    let mesh = load_mesh(&mesh_path).map_err(|e| format!("{}: {e}", mesh_path.display()))?;
    let kind = if cfg.direct {
        OperatorKind::Direct
    } else {
        OperatorKind::Fmm
    };
    let model = ExtractionModel::build(mesh, kind, cfg.fmm_order, cfg.leaf_size)
        .map_err(|e| format!("{e}"))?;
    if let Some(p) = &cfg.dump_cm {
        std::fs::write(p, dump_mapping(&model.mapping)).map_err(|e| format!("{e}"))?;
    }
    if let Some(p) = &cfg.dump_loops {
        std::fs::write(p, dump_loops(&model.basis)).map_err(|e| format!("{e}"))?;
    }
    let opts = SweepOptions {
        frequencies: log_frequencies(fstart, fstop, npoints),
        solve: SolveConfig {
            restart: cfg.restart,
            tol_high_freq: cfg.tol_high,
            tol_low_freq: cfg.tol_low,
            max_iters: cfg.max_iters,
            trace: cfg.verbose >= 2,
        },
        precond: cfg.precond,
        threads: cfg.threads,
        verbosity: cfg.verbose,
    };
    let result = run_sweep(&model, &opts).map_err(|e| format!("{e}"))?;
    std::fs::write(&out_path, rows_to_csv(&result.rows))
        .map_err(|e| format!("{}: {e}", out_path.display()))?;
    print!("{}", summary_text(&model, &result));
    let unconverged = result
        .records
        .iter()
        .any(|r| r.solve.report.converged.iter().any(|c| !c));
    if unconverged {
        eprintln!("warning: some frequency points did not reach the residual tolerance");
    }
    Ok(0)
}

fn cmd_reference(args: &[String]) -> Result<i32, String> {
    let flags = parse_flags(args)?;
    let mut radius = None;
    let mut length = None;
    let mut sigma = None;
    let mut fstart = None;
    let mut fstop = None;
    let mut npoints = None;
    let mut out = None;
    for (k, v) in &flags {
        let v = v.as_deref();
        match k.as_str() {
            "radius" => radius = Some(parse_num(v.unwrap(), k)?),
            "length" => length = Some(parse_num(v.unwrap(), k)?),
            "sigma" => sigma = Some(parse_num(v.unwrap(), k)?),
            "fstart" => fstart = Some(parse_num(v.unwrap(), k)?),
            "fstop" => fstop = Some(parse_num(v.unwrap(), k)?),
            "npoints" => npoints = Some(parse_int(v.unwrap(), k)?),
            "out" => out = Some(PathBuf::from(v.unwrap())),
            other => return Err(format!("unknown option `{other}`")),
        }
    }
    let spec = WireSpec {
        radius: radius.ok_or("--radius is required")?,
        length: length.ok_or("--length is required")?,
        sigma: sigma.ok_or("--sigma is required")?,
    };
    let freqs = log_frequencies(
        fstart.ok_or("--fstart is required")?,
        fstop.ok_or("--fstop is required")?,
        npoints.ok_or("--npoints is required")?,
    );
    let mut csv = String::from("freq_hz,R_ohm,L_internal_henry\n");
    for &f in &freqs {
        let z = wire_internal_impedance(&spec, f);
        let l = z.im / (2.0 * std::f64::consts::PI * f);
        csv += &format!("{:.12e},{:.12e},{:.12e}\n", f, z.re, l);
    }
    match out {
        Some(p) => std::fs::write(&p, csv).map_err(|e| format!("{}: {e}", p.display()))?,
        None => print!("{csv}"),
    }
    Ok(0)
}

fn cmd_mesh_check(args: &[String]) -> Result<i32, String> {
    let flags = parse_flags(args)?;
    let mut mesh_path = None;
    let mut dump_cm = None;
    let mut dump_lp = None;
    for (k, v) in &flags {
        match k.as_str() {
            "mesh" => mesh_path = Some(PathBuf::from(v.as_deref().unwrap())),
            "dump-cm" => dump_cm = Some(PathBuf::from(v.as_deref().unwrap())),
            "dump-loops" => dump_lp = Some(PathBuf::from(v.as_deref().unwrap())),
            other => return Err(format!("unknown option `{other}`")),
        }
    }
    let path = mesh_path.ok_or("--mesh is required")?;
    let mesh = load_mesh(&path).map_err(|e| format!("{}: {e}", path.display()))?;
    let edges = rlx_core::mesh::build_connectivity(&mesh);
    let boundary = rlx_core::mesh::count_boundary_edges(&mesh);
    let graph = rlx_core::mesh::build_branch_graph(&mesh, &edges).map_err(|e| format!("{e}"))?;
    let mapping = rlx_core::basis::build_mapping(&mesh, &edges);
    let basis = rlx_core::loops::build_loop_basis(&graph).map_err(|e| format!("{e}"))?;
    println!("N_p = {}", mesh.n_panels());
    println!("N_e = {}", edges.len());
    println!("N_l = {}", basis.n_loops);
    println!("boundary_edges = {}", boundary);
    println!("ports = {}", mesh.ports.len());
    println!("total_area_m2 = {:.9e}", mesh.total_area());
    if let Some(p) = dump_cm {
        std::fs::write(&p, dump_mapping(&mapping)).map_err(|e| format!("{e}"))?;
    }
    if let Some(p) = dump_lp {
        std::fs::write(&p, dump_loops(&basis)).map_err(|e| format!("{e}"))?;
    }
    Ok(0)
}

fn cmd_selftest() -> i32 {
    let checks = crate::selftest::run_selftest();
    let mut failed = 0;
    for c in &checks {
        let tag = if c.pass { "PASS" } else { "FAIL" };
        println!("[{tag}] {} - {}", c.name, c.detail);
        if !c.pass {
            failed += 1;
        }
    }
    println!("{} checks, {} failed", checks.len(), failed);
    if failed == 0 {
        0
    } else {
        1
    }
}

/// Entry point; returns the process exit code.
pub fn main_with_args(argv: &[String]) -> i32 {
    let Some(sub) = argv.first() else {
        eprint!("{USAGE}");
        return 2;
    };
    let rest = &argv[1..];
    let result = match sub.as_str() {
        "extract" => cmd_extract(rest),
        "reference" => cmd_reference(rest),
        "mesh-check" => cmd_mesh_check(rest),
        "selftest" => {
            if !rest.is_empty() {
                Err("selftest takes no options".to_string())
            } else {
                return cmd_selftest();
            }
        }
        "help" | "--help" | "-h" => {
            print!("{USAGE}");
            return 0;
        }
        other => Err(format!("unknown subcommand `{other}`")),
    };
    match result {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            eprint!("{USAGE}");
            2
        }
    }
}

//! Line-oriented text format for surface meshes.
//!
//! ```text
//! unit um
//! v 0 0 0
//! v 1 0 0
//! ...
//! mat copper sigma=5.8e7 thickness=35
//! p4 0 1 4 3 mat=copper
//! p3 1 2 4 mat=copper
//! port p1 +=0,1 -=2,3
//! ```
//!
//! Lengths (vertex coordinates and material thickness) are given in the
//! declared unit and converted to meters on load. `#` starts a comment.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::mesh::{ConductorMaterial, MeshError, PortSpec, SurfaceMesh};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: unknown material `{name}`")]
    UnknownMaterial { line: usize, name: String },
    #[error("missing `unit` header line")]
    MissingUnit,
    #[error("invalid mesh: {0}")]
    Invalid(#[from] MeshError),
}

fn syntax(line: usize, msg: impl Into<String>) -> ParseError {
    ParseError::Syntax {
        line,
        msg: msg.into(),
    }
}

fn parse_f64(tok: &str, line: usize) -> Result<f64, ParseError> {
    tok.parse::<f64>()
        .map_err(|_| syntax(line, format!("expected number, got `{tok}`")))
}

fn parse_usize(tok: &str, line: usize) -> Result<usize, ParseError> {
    tok.parse::<usize>()
        .map_err(|_| syntax(line, format!("expected index, got `{tok}`")))
}

fn parse_id_list(tok: &str, line: usize) -> Result<Vec<usize>, ParseError> {
    tok.split(',')
        .filter(|s| !s.is_empty())
        .map(|s| parse_usize(s, line))
        .collect()
}

/// Parse a mesh from its text representation.
pub fn parse_mesh(src: &str) -> Result<SurfaceMesh, ParseError> {
    let mut unit: Option<f64> = None;
    let mut vertices: Vec<[f64; 3]> = Vec::new();
    let mut materials: Vec<ConductorMaterial> = Vec::new();
    let mut panels: Vec<(Vec<usize>, usize)> = Vec::new();
    let mut ports: Vec<PortSpec> = Vec::new();

    for (li, raw) in src.lines().enumerate() {
        let line = li + 1;
        let text = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        };
        let mut toks = text.split_whitespace();
        let Some(head) = toks.next() else { continue };
        match head {
            "unit" => {
                let u = toks.next().ok_or_else(|| syntax(line, "unit requires m|mm|um"))?;
                unit = Some(match u {
                    "m" => 1.0,
                    "mm" => 1e-3,
                    "um" => 1e-6,
                    other => return Err(syntax(line, format!("unknown unit `{other}`"))),
                });
            }
            "v" => {
                let scale = unit.ok_or(ParseError::MissingUnit)?;
                let mut p = [0.0; 3];
                for slot in p.iter_mut() {
                    let tok = toks.next().ok_or_else(|| syntax(line, "vertex needs x y z"))?;
                    *slot = parse_f64(tok, line)? * scale;
                }
                vertices.push(p);
            }
            "mat" => {
                let scale = unit.ok_or(ParseError::MissingUnit)?;
                let name = toks
                    .next()
                    .ok_or_else(|| syntax(line, "mat requires a name"))?
                    .to_string();
                let mut sigma = None;
                let mut thickness = None;
                for tok in toks {
                    if let Some(v) = tok.strip_prefix("sigma=") {
                        sigma = Some(parse_f64(v, line)?);
                    } else if let Some(v) = tok.strip_prefix("thickness=") {
                        thickness = Some(parse_f64(v, line)? * scale);
                    } else {
                        return Err(syntax(line, format!("unknown mat key `{tok}`")));
                    }
                }
                let sigma = sigma.ok_or_else(|| syntax(line, "mat requires sigma="))?;
                let thickness =
                    thickness.ok_or_else(|| syntax(line, "mat requires thickness="))?;
                materials.push(ConductorMaterial {
                    name,
                    sigma,
                    thickness,
                });
            }
            "p3" | "p4" => {
                let nv = if head == "p3" { 3 } else { 4 };
                let mut idx = Vec::with_capacity(nv);
                for _ in 0..nv {
                    let tok = toks
                        .next()
                        .ok_or_else(|| syntax(line, format!("{head} needs {nv} vertex indices")))?;
                    idx.push(parse_usize(tok, line)?);
                }
                let mat_tok = toks
                    .next()
                    .ok_or_else(|| syntax(line, "panel requires mat=<name>"))?;
                let mat_name = mat_tok
                    .strip_prefix("mat=")
                    .ok_or_else(|| syntax(line, "panel requires mat=<name>"))?;
                let mat_id = materials
                    .iter()
                    .position(|m| m.name == mat_name)
                    .ok_or_else(|| ParseError::UnknownMaterial {
                        line,
                        name: mat_name.to_string(),
                    })?;
                panels.push((idx, mat_id));
            }
            "port" => {
                let name = toks
                    .next()
                    .ok_or_else(|| syntax(line, "port requires a name"))?
                    .to_string();
                let mut pos = None;
                let mut neg = None;
                for tok in toks {
                    if let Some(v) = tok.strip_prefix("+=") {
                        pos = Some(parse_id_list(v, line)?);
                    } else if let Some(v) = tok.strip_prefix("-=") {
                        neg = Some(parse_id_list(v, line)?);
                    } else {
                        return Err(syntax(line, format!("unknown port key `{tok}`")));
                    }
                }
                let positive_terminal =
                    pos.ok_or_else(|| syntax(line, "port requires +=<panel ids>"))?;
                let negative_terminal =
                    neg.ok_or_else(|| syntax(line, "port requires -=<panel ids>"))?;
                ports.push(PortSpec {
                    name,
                    positive_terminal,
                    negative_terminal,
                });
            }
            other => return Err(syntax(line, format!("unknown directive `{other}`"))),
        }
    }

    if unit.is_none() {
        return Err(ParseError::MissingUnit);
    }
    Ok(SurfaceMesh::build(vertices, panels, materials, ports)?)
}

/// Serialize a mesh back to the text format (meters).
pub fn to_text(mesh: &SurfaceMesh) -> String {
    let mut s = String::from("unit m\n");
    for m in &mesh.conductors {
        s += &format!("mat {} sigma={:e} thickness={:e}\n", m.name, m.sigma, m.thickness);
    }
    for v in &mesh.vertices {
        s += &format!("v {:e} {:e} {:e}\n", v[0], v[1], v[2]);
    }
    for p in &mesh.panels {
        let mat = &mesh.conductors[p.conductor_id].name;
        let idx: Vec<String> = p.vertex_indices.iter().map(|i| i.to_string()).collect();
        let head = if p.is_triangle() { "p3" } else { "p4" };
        s += &format!("{head} {} mat={mat}\n", idx.join(" "));
    }
    for port in &mesh.ports {
        let pos: Vec<String> = port.positive_terminal.iter().map(|i| i.to_string()).collect();
        let neg: Vec<String> = port.negative_terminal.iter().map(|i| i.to_string()).collect();
        s += &format!("port {} +={} -={}\n", port.name, pos.join(","), neg.join(","));
    }
    s
}

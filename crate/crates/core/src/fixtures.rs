//! Built-in parametric meshes used by the self-test suite, the acceptance
//! benchmarks and unit tests.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::math::Vec3;
use crate::mesh::{ConductorMaterial, PortSpec, SurfaceMesh};

#[allow(unused_imports)]
use num_traits::Float;

/// Annealed copper foil: 5.8e7 S/m, 35 um thick.
pub fn copper() -> ConductorMaterial {
    ConductorMaterial {
        name: String::from("copper"),
        sigma: 5.8e7,
        thickness: 35e-6,
    }
}

/// Wire material for the round-wire benchmark; conductivity back-derived
/// from the 0.652 um skin depth at 10 GHz, thickness set to the wire radius
/// so the DC sheet resistance reproduces 1/(sigma pi a^2) per length.
pub fn wire_material(radius: f64) -> ConductorMaterial {
    ConductorMaterial {
        name: String::from("wire"),
        sigma: 5.96e7,
        thickness: radius,
    }
}

/// Near-ideal contact material for terminal panels.
pub fn contact_material(thickness: f64) -> ConductorMaterial {
    ConductorMaterial {
        name: String::from("contact"),
        sigma: 1e12,
        thickness,
    }
}

/// Two coplanar unit squares sharing one edge, port from panel 0 to panel 1.
pub fn strip2() -> SurfaceMesh {
    SurfaceMesh::build(
        vec![
            [0.0, 0.0, 0.0],
            [1.0, 0.0, 0.0],
            [2.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [1.0, 1.0, 0.0],
            [2.0, 1.0, 0.0],
        ],
        vec![(vec![0, 1, 4, 3], 0), (vec![1, 2, 5, 4], 0)],
        vec![copper()],
        vec![PortSpec {
            name: String::from("p1"),
            positive_terminal: vec![0],
            negative_terminal: vec![1],
        }],
    )
    .expect("strip2 fixture")
}

/// Two triangles sharing one edge, no ports.
pub fn two_triangles() -> SurfaceMesh {
    SurfaceMesh::build(
        vec![
            [0.0, 0.0, 0.0],
            [1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [1.0, 1.0, 0.0],
        ],
        vec![(vec![0, 1, 2], 0), (vec![1, 3, 2], 0)],
        vec![copper()],
        vec![],
    )
    .expect("two_triangles fixture")
}

/// Closed axis-aligned box of six rectangles, no ports.
pub fn closed_box(side: f64) -> SurfaceMesh {
    let s = side;
    let v = vec![
        [0.0, 0.0, 0.0],
        [s, 0.0, 0.0],
        [s, s, 0.0],
        [0.0, s, 0.0],
        [0.0, 0.0, s],
        [s, 0.0, s],
        [s, s, s],
        [0.0, s, s],
    ];
    let defs = vec![
        (vec![0, 1, 2, 3], 0), // bottom
        (vec![4, 5, 6, 7], 0), // top
        (vec![0, 1, 5, 4], 0),
        (vec![1, 2, 6, 5], 0),
        (vec![2, 3, 7, 6], 0),
        (vec![3, 0, 4, 7], 0),
    ];
    SurfaceMesh::build(v, defs, vec![copper()], vec![]).expect("closed_box fixture")
}

/// Structured nx x ny rectangle sheet in the z = 0 plane spanning
/// [0, lx] x [0, ly]. With `with_port`, the first panel column is the
/// positive terminal and the last the negative.
pub fn sheet(
    nx: usize,
    ny: usize,
    lx: f64,
    ly: f64,
    mat: ConductorMaterial,
    with_port: bool,
) -> SurfaceMesh {
    let mut v = Vec::with_capacity((nx + 1) * (ny + 1));
    for iy in 0..=ny {
        for ix in 0..=nx {
            v.push([lx * ix as f64 / nx as f64, ly * iy as f64 / ny as f64, 0.0]);
        }
    }
    let vid = |ix: usize, iy: usize| iy * (nx + 1) + ix;
    let mut defs = Vec::with_capacity(nx * ny);
    for iy in 0..ny {
        for ix in 0..nx {
            defs.push((
                vec![vid(ix, iy), vid(ix + 1, iy), vid(ix + 1, iy + 1), vid(ix, iy + 1)],
                0usize,
            ));
        }
    }
    let ports = if with_port {
        let pos: Vec<usize> = (0..ny).map(|iy| iy * nx).collect();
        let neg: Vec<usize> = (0..ny).map(|iy| iy * nx + nx - 1).collect();
        vec![PortSpec {
            name: String::from("p1"),
            positive_terminal: pos,
            negative_terminal: neg,
        }]
    } else {
        vec![]
    };
    SurfaceMesh::build(v, defs, vec![mat], ports).expect("sheet fixture")
}

/// DC plate: length x width sheet represented by its top and bottom
/// surfaces a thickness apart, port across the short ends of both sheets.
pub fn plate_double(nx: usize, ny: usize, length: f64, width: f64, mat: ConductorMaterial) -> SurfaceMesh {
    let zeta = mat.thickness;
    let mut v = Vec::new();
    for layer in 0..2 {
        let z = zeta * layer as f64;
        for iy in 0..=ny {
            for ix in 0..=nx {
                v.push([
                    length * ix as f64 / nx as f64,
                    width * iy as f64 / ny as f64,
                    z,
                ]);
            }
        }
    }
    let layer_verts = (nx + 1) * (ny + 1);
    let vid = |layer: usize, ix: usize, iy: usize| layer * layer_verts + iy * (nx + 1) + ix;
    let mut defs = Vec::new();
    for layer in 0..2 {
        for iy in 0..ny {
            for ix in 0..nx {
                defs.push((
                    vec![
                        vid(layer, ix, iy),
                        vid(layer, ix + 1, iy),
                        vid(layer, ix + 1, iy + 1),
                        vid(layer, ix, iy + 1),
                    ],
                    0usize,
                ));
            }
        }
    }
    let layer_panels = nx * ny;
    let mut pos = Vec::new();
    let mut neg = Vec::new();
    for layer in 0..2 {
        for iy in 0..ny {
            pos.push(layer * layer_panels + iy * nx);
            neg.push(layer * layer_panels + iy * nx + nx - 1);
        }
    }
    SurfaceMesh::build(
        v,
        defs,
        vec![mat],
        vec![PortSpec {
            name: String::from("p1"),
            positive_terminal: pos,
            negative_terminal: neg,
        }],
    )
    .expect("plate_double fixture")
}

/// Faceted cylinder along +z: triangulated barrel (a closed structured
/// quad barrel carries an exact null mode of the centroid-midpoint
/// reconstruction, so quads are split with alternating diagonals) plus
/// triangle-fan end caps. With `with_port`, the z=0 cap is the positive
/// terminal and the z=length cap the negative.
pub fn cylinder(
    radius: f64,
    length: f64,
    n_circ: usize,
    n_axial: usize,
    barrel: ConductorMaterial,
    cap: ConductorMaterial,
    with_port: bool,
) -> SurfaceMesh {
    let mut v = Vec::new();
    for iz in 0..=n_axial {
        let z = length * iz as f64 / n_axial as f64;
        for ic in 0..n_circ {
            let th = 2.0 * core::f64::consts::PI * ic as f64 / n_circ as f64;
            v.push([radius * th.cos(), radius * th.sin(), z]);
        }
    }
    let bottom_center = v.len();
    v.push([0.0, 0.0, 0.0]);
    let top_center = v.len();
    v.push([0.0, 0.0, length]);

    let vid = |iz: usize, ic: usize| iz * n_circ + (ic % n_circ);
    let mut defs = Vec::new();
    for iz in 0..n_axial {
        for ic in 0..n_circ {
            let (a, b, c, d) = (
                vid(iz, ic),
                vid(iz, ic + 1),
                vid(iz + 1, ic + 1),
                vid(iz + 1, ic),
            );
            if (ic + iz) % 2 == 0 {
                defs.push((vec![a, b, c], 0usize));
                defs.push((vec![a, c, d], 0usize));
            } else {
                defs.push((vec![b, c, d], 0usize));
                defs.push((vec![b, d, a], 0usize));
            }
        }
    }
    let bottom_start = defs.len();
    for ic in 0..n_circ {
        defs.push((vec![bottom_center, vid(0, ic + 1), vid(0, ic)], 1usize));
    }
    let top_start = defs.len();
    for ic in 0..n_circ {
        defs.push((vec![top_center, vid(n_axial, ic), vid(n_axial, ic + 1)], 1usize));
    }
    let ports = if with_port {
        vec![PortSpec {
            name: String::from("p1"),
            positive_terminal: (bottom_start..bottom_start + n_circ).collect(),
            negative_terminal: (top_start..top_start + n_circ).collect(),
        }]
    } else {
        vec![]
    };
    SurfaceMesh::build(v, defs, vec![barrel, cap], ports).expect("cylinder fixture")
}

/// Geometry of one flat square-ring coil sheet. Returns panel definitions
/// appended to `v`/`defs` and the panel ids adjacent to the port cut.
/// Vertices are welded by quantized coordinate so neighboring cells share
/// edges.
fn ring_sheet(
    v: &mut Vec<Vec3>,
    weld: &mut alloc::collections::BTreeMap<(i64, i64, i64), usize>,
    defs: &mut Vec<(Vec<usize>, usize)>,
    mat_id: usize,
    outer: f64,
    width: f64,
    gap: f64,
    origin: Vec3,
) -> (Vec<usize>, Vec<usize>) {
    let n = (outer / width).round() as usize;
    debug_assert!(n >= 4);
    let w = outer / n as f64;
    let mut pos_panels = Vec::new();
    let mut neg_panels = Vec::new();
    // Frame cells; the bottom row gets the port cut between the two middle
    // cells, which are narrowed so the cut is `gap` wide.
    let cut_left_cell = n / 2 - 1;
    let vertex = |v: &mut Vec<Vec3>,
                      weld: &mut alloc::collections::BTreeMap<(i64, i64, i64), usize>,
                      p: Vec3|
     -> usize {
        // 1 pm quantization; all coil features are micrometers.
        let key = (
            (p[0] * 1e12).round() as i64,
            (p[1] * 1e12).round() as i64,
            (p[2] * 1e12).round() as i64,
        );
        *weld.entry(key).or_insert_with(|| {
            v.push(p);
            v.len() - 1
        })
    };
    let quad = |v: &mut Vec<Vec3>,
                    weld: &mut alloc::collections::BTreeMap<(i64, i64, i64), usize>,
                    defs: &mut Vec<(Vec<usize>, usize)>,
                    x0: f64,
                    x1: f64,
                    y0: f64,
                    y1: f64|
     -> usize {
        let a = vertex(v, weld, [origin[0] + x0, origin[1] + y0, origin[2]]);
        let b = vertex(v, weld, [origin[0] + x1, origin[1] + y0, origin[2]]);
        let c = vertex(v, weld, [origin[0] + x1, origin[1] + y1, origin[2]]);
        let d = vertex(v, weld, [origin[0] + x0, origin[1] + y1, origin[2]]);
        defs.push((vec![a, b, c, d], mat_id));
        defs.len() - 1
    };
    for side in 0..4 {
        for k in 0..n {
            let (x0, x1, y0, y1);
            match side {
                0 => {
                    // bottom row, with the cut
                    if k == cut_left_cell {
                        let xa = k as f64 * w;
                        let xb = (k + 1) as f64 * w - gap / 2.0;
                        let id = quad(v, weld, defs, xa, xb, 0.0, width);
                        pos_panels.push(id);
                        continue;
                    } else if k == cut_left_cell + 1 {
                        let xa = k as f64 * w + gap / 2.0;
                        let xb = (k + 1) as f64 * w;
                        let id = quad(v, weld, defs, xa, xb, 0.0, width);
                        neg_panels.push(id);
                        continue;
                    }
                    x0 = k as f64 * w;
                    x1 = (k + 1) as f64 * w;
                    y0 = 0.0;
                    y1 = width;
                }
                1 => {
                    // top row
                    x0 = k as f64 * w;
                    x1 = (k + 1) as f64 * w;
                    y0 = outer - width;
                    y1 = outer;
                }
                2 => {
                    // left column, interior part
                    if k == 0 || k == n - 1 {
                        continue;
                    }
                    x0 = 0.0;
                    x1 = width;
                    y0 = k as f64 * w;
                    y1 = (k + 1) as f64 * w;
                }
                _ => {
                    // right column, interior part
                    if k == 0 || k == n - 1 {
                        continue;
                    }
                    x0 = outer - width;
                    x1 = outer;
                    y0 = k as f64 * w;
                    y1 = (k + 1) as f64 * w;
                }
            }
            quad(v, weld, defs, x0, x1, y0, y1);
        }
    }
    (pos_panels, neg_panels)
}

/// Two stacked square coils, each a flat ring modeled by its top and bottom
/// surfaces. `outer` is the outer side length, `width` the strip width
/// (also the conductor thickness), `gap` the port cut, `coil_gap` the
/// face-to-face vertical spacing between the coils.
pub fn coil_pair(outer: f64, width: f64, gap: f64, coil_gap: f64) -> SurfaceMesh {
    let mat = ConductorMaterial {
        name: String::from("coil"),
        sigma: 5.8e7,
        thickness: width,
    };
    let mut v = Vec::new();
    let mut weld = alloc::collections::BTreeMap::new();
    let mut defs = Vec::new();
    let mut ports = Vec::new();
    for coil in 0..2 {
        let z_center = coil as f64 * (width + coil_gap);
        let mut pos = Vec::new();
        let mut neg = Vec::new();
        for dz in [-0.5 * width, 0.5 * width] {
            let (p, n) = ring_sheet(
                &mut v,
                &mut weld,
                &mut defs,
                0,
                outer,
                width,
                gap,
                [0.0, 0.0, z_center + dz],
            );
            pos.extend(p);
            neg.extend(n);
        }
        ports.push(PortSpec {
            name: format!("p{}", coil + 1),
            positive_terminal: pos,
            negative_terminal: neg,
        });
    }
    SurfaceMesh::build(v, defs, vec![mat], ports).expect("coil_pair fixture")
}

/// Centerline loop of one coil from [`coil_pair`] for filament oracles:
/// square of side `outer - width` at the coil mid-plane, `n_seg` points per
/// side, traversed counterclockwise.
pub fn coil_centerline(outer: f64, width: f64, z_center: f64, n_seg: usize) -> Vec<Vec3> {
    let h = width / 2.0;
    let corners = [
        [h, h, z_center],
        [outer - h, h, z_center],
        [outer - h, outer - h, z_center],
        [h, outer - h, z_center],
    ];
    let mut pts = Vec::new();
    for s in 0..4 {
        let a = corners[s];
        let b = corners[(s + 1) % 4];
        for k in 0..n_seg {
            let t = k as f64 / n_seg as f64;
            pts.push([
                a[0] + t * (b[0] - a[0]),
                a[1] + t * (b[1] - a[1]),
                a[2] + t * (b[2] - a[2]),
            ]);
        }
    }
    pts
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_branch_graph, build_connectivity};

    #[test]
    fn cylinder_counts() {
        let m = cylinder(5e-6, 50e-6, 24, 40, wire_material(5e-6), contact_material(5e-6), true);
        assert_eq!(m.n_panels(), 2 * 24 * 40 + 48);
        let edges = build_connectivity(&m);
        // Closed surface: every edge interior.
        assert_eq!(edges.len(), m.n_panels() * 3 / 2);
        let ratio = edges.len() as f64 / m.n_panels() as f64;
        assert!((1.5..=2.0).contains(&ratio), "edge/panel ratio {ratio}");
        build_branch_graph(&m, &edges).unwrap();
    }

    #[test]
    fn coil_pair_builds() {
        let m = coil_pair(100e-6, 5e-6, 2e-6, 5e-6);
        assert_eq!(m.ports.len(), 2);
        let edges = build_connectivity(&m);
        let g = build_branch_graph(&m, &edges).unwrap();
        assert!(g.n_nodes > m.n_panels());
        // each ring sheet is an open chain: one interior edge per adjacency
        let ratio = edges.len() as f64 / m.n_panels() as f64;
        assert!(ratio > 0.9 && ratio < 1.05, "edge/panel ratio {ratio}");
    }

    #[test]
    fn plate_terminals_disjoint() {
        let m = plate_double(20, 2, 1e-3, 1e-4, copper());
        assert_eq!(m.n_panels(), 80);
        let p = &m.ports[0];
        assert_eq!(p.positive_terminal.len(), 4);
        assert_eq!(p.negative_terminal.len(), 4);
    }
}

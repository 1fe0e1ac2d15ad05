//! Structured mesh generators.
//!
//! Cross-sections are triangulated with concentric rings (6k nodes on ring k,
//! center node on the axis) mapped onto the ellipse. Radiation domains grow
//! further loops outward, blending from the ellipse to the box rectangle and
//! then through the PML rectangles. The 2D triangulation is extruded along z
//! into prisms, each split into three tets with the minimum-index diagonal
//! rule so neighbouring prisms always agree on their shared quad faces.

use std::f64::consts::PI;

use super::mesh::{signed_volume, Admittance, Facet, FacetTag, Mesh, Region};
use super::section::{AreaFunction, DuctSpec, EllipseSection, Termination};
use crate::{Error, Result};

/// Outer free-field box, x and y centered on the duct axis, z measured from the flange.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoxDims {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

#[derive(Debug, Default)]
struct Planar {
    pts: Vec<[f64; 2]>,
    tris: Vec<[usize; 3]>,
}

/// Triangulates the band between two closed loops sampled at parameters j/len.
fn merge_loops(inner: &[usize], outer: &[usize], tris: &mut Vec<[usize; 3]>) {
    let (ni, no) = (inner.len(), outer.len());
    if ni == 1 {
        for j in 0..no {
            tris.push([inner[0], outer[j], outer[(j + 1) % no]]);
        }
        return;
    }
    let (mut i, mut j) = (0usize, 0usize);
    while i < ni || j < no {
        // Advance the loop whose next parameter is smaller; ties advance the outer loop.
        let advance_outer = if i == ni {
            true
        } else if j == no {
            false
        } else {
            (j + 1) * ni <= (i + 1) * no
        };
        if advance_outer {
            tris.push([inner[i % ni], outer[j], outer[(j + 1) % no]]);
            j += 1;
        } else {
            tris.push([inner[i], outer[j % no], inner[(i + 1) % ni]]);
            i += 1;
        }
    }
}

/// Unit-disk ring triangulation; returns the planar mesh and the boundary loop.
fn unit_disk(rings: usize) -> (Planar, Vec<usize>) {
    let mut p = Planar::default();
    p.pts.push([0.0, 0.0]);
    let mut prev = vec![0usize];
    for k in 1..=rings {
        let n = 6 * k;
        let r = k as f64 / rings as f64;
        let ring: Vec<usize> = (0..n)
            .map(|j| {
                let th = 2.0 * PI * j as f64 / n as f64;
                p.pts.push([r * th.cos(), r * th.sin()]);
                p.pts.len() - 1
            })
            .collect();
        merge_loops(&prev, &ring, &mut p.tris);
        prev = ring;
    }
    (p, prev)
}

fn rect_loop(hx: f64, hy: f64, nx: usize, ny: usize) -> Vec<[f64; 2]> {
    let (dx, dy) = (2.0 * hx / nx as f64, 2.0 * hy / ny as f64);
    let mut v = Vec::with_capacity(2 * (nx + ny));
    for i in 0..ny / 2 {
        v.push([hx, i as f64 * dy]);
    }
    for i in 0..nx {
        v.push([hx - i as f64 * dx, hy]);
    }
    for i in 0..ny {
        v.push([-hx, hy - i as f64 * dy]);
    }
    for i in 0..nx {
        v.push([-hx + i as f64 * dx, -hy]);
    }
    for i in 0..ny / 2 {
        v.push([hx, -hy + i as f64 * dy]);
    }
    v
}

/// Point of a closed polyline at parameter `u` in [0, 1).
fn polyline_at(poly: &[[f64; 2]], u: f64) -> [f64; 2] {
    let n = poly.len();
    let s = u * n as f64;
    let i = (s.floor() as usize).min(n - 1);
    let t = s - i as f64;
    let (p, q) = (poly[i], poly[(i + 1) % n]);
    [p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])]
}

/// Cumulative fractions of spacings graded linearly from `h0` to `h1` over a gap.
fn graded_fractions(gap: f64, h0: f64, h1: f64) -> Vec<f64> {
    let m = ((2.0 * gap / (h0 + h1)).round() as usize).max(1);
    let d: Vec<f64> = (0..m)
        .map(|i| {
            if m == 1 {
                1.0
            } else {
                h0 + (h1 - h0) * i as f64 / (m - 1) as f64
            }
        })
        .collect();
    let total: f64 = d.iter().sum();
    let mut acc = 0.0;
    let mut out: Vec<f64> = d
        .iter()
        .map(|x| {
            acc += x;
            acc / total
        })
        .collect();
    *out.last_mut().unwrap() = 1.0;
    out
}

fn check_planar(p: &Planar) -> Result<()> {
    for (i, t) in p.tris.iter().enumerate() {
        let [a, b, c] = t.map(|k| p.pts[k]);
        let area = 0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]));
        if !(area > 0.0) {
            return Err(Error::Mesh(format!(
                "cross-section triangle {i} is inverted or degenerate (area {area:e})"
            )));
        }
    }
    Ok(())
}

/// Splits a prism (bottom v0 v1 v2, top v3 v4 v5 with v[i+3] above v[i]) into three tets.
fn split_prism(v: [usize; 6]) -> [[usize; 4]; 3] {
    const PERM: [[usize; 6]; 6] = [
        [0, 1, 2, 3, 4, 5],
        [1, 2, 0, 4, 5, 3],
        [2, 0, 1, 5, 3, 4],
        [3, 5, 4, 0, 2, 1],
        [4, 3, 5, 1, 0, 2],
        [5, 4, 3, 2, 1, 0],
    ];
    let m = (0..6).min_by_key(|&i| v[i]).unwrap();
    let w = PERM[m].map(|i| v[i]);
    if w[1].min(w[5]) < w[2].min(w[4]) {
        [
            [w[0], w[1], w[2], w[5]],
            [w[0], w[1], w[5], w[4]],
            [w[0], w[4], w[5], w[3]],
        ]
    } else {
        [
            [w[0], w[1], w[2], w[4]],
            [w[0], w[4], w[2], w[5]],
            [w[0], w[4], w[5], w[3]],
        ]
    }
}

struct Layer<'a> {
    level: usize,
    tris: &'a [[usize; 3]],
}

/// Extrudes planar triangles between consecutive z-levels.
///
/// `place(p, level)` gives the 3D position of planar point `p` on `level`.
/// Nodes are numbered level by level, then by planar index.
#[allow(clippy::type_complexity)]
fn extrude(
    n_planar: usize,
    n_levels: usize,
    layers: &[Layer<'_>],
    place: impl Fn(usize, usize) -> [f64; 3],
) -> Result<(Vec<[f64; 3]>, Vec<[usize; 4]>)> {
    const UNUSED: usize = usize::MAX;
    let mut id = vec![UNUSED; n_planar * n_levels];
    for layer in layers {
        for t in layer.tris {
            for &p in t {
                id[layer.level * n_planar + p] = 0;
                id[(layer.level + 1) * n_planar + p] = 0;
            }
        }
    }
    let mut nodes = Vec::new();
    for lev in 0..n_levels {
        for p in 0..n_planar {
            let slot = &mut id[lev * n_planar + p];
            if *slot != UNUSED {
                *slot = nodes.len();
                nodes.push(place(p, lev));
            }
        }
    }
    let mut tets = Vec::new();
    for layer in layers {
        let (lo, hi) = (layer.level * n_planar, (layer.level + 1) * n_planar);
        for t in layer.tris {
            let prism = [
                id[lo + t[0]],
                id[lo + t[1]],
                id[lo + t[2]],
                id[hi + t[0]],
                id[hi + t[1]],
                id[hi + t[2]],
            ];
            for mut tet in split_prism(prism) {
                let mut vol = signed_volume(tet.map(|i| nodes[i]));
                if vol < 0.0 {
                    tet.swap(2, 3);
                    vol = -vol;
                }
                let scale = {
                    let p = tet.map(|i| nodes[i]);
                    let d = super::mesh::norm(super::mesh::sub(p[1], p[0]));
                    d * d * d
                };
                if !(vol > 1e-12 * scale) {
                    return Err(Error::Mesh(format!(
                        "degenerate tet generated at level {} (volume {vol:e})",
                        layer.level
                    )));
                }
                tets.push(tet);
            }
        }
    }
    Ok((nodes, tets))
}

fn tag_boundary(
    tets: &[[usize; 4]],
    nodes: &[[f64; 3]],
    classify: impl Fn([[f64; 3]; 3]) -> FacetTag,
) -> Vec<Facet> {
    Mesh::boundary_faces(tets)
        .into_iter()
        .map(|f| Facet {
            nodes: f,
            tag: classify(f.map(|i| nodes[i])),
        })
        .collect()
}

fn ring_count(section: &EllipseSection, h: f64) -> Result<usize> {
    if !(h > 0.0) {
        return Err(Error::Mesh(format!("mesh size must be positive, got {h}")));
    }
    // The minor axis (2·b) has to span at least four elements.
    if 2.0 * section.b() < 4.0 * h * (1.0 - 1e-9) {
        return Err(Error::Mesh(format!(
            "h = {h} m is too coarse: the minor axis 2·b = {} m spans fewer than 4 elements",
            2.0 * section.b()
        )));
    }
    Ok(((section.a() / h) - 1e-9).ceil().max(2.0) as usize)
}

fn axial_levels(length: f64, h: f64) -> Result<usize> {
    if !(length > 0.0) || !length.is_finite() {
        return Err(Error::Mesh(format!(
            "duct length must be positive, got {length}"
        )));
    }
    Ok(((length / h) - 1e-9).ceil().max(1.0) as usize)
}

fn end_tag(termination: Termination) -> FacetTag {
    match termination {
        Termination::ClosedRigid => FacetTag::Rigid,
        Termination::OpenFlanged | Termination::Coupled => FacetTag::Outer,
    }
}

fn lofted(
    n_rings: usize,
    n_z: usize,
    z0: f64,
    length: f64,
    section_at: impl Fn(f64) -> Result<EllipseSection>,
    wall: Admittance,
    far_end: FacetTag,
) -> Result<Mesh> {
    let (disk, _) = unit_disk(n_rings);
    let levels: Vec<f64> = (0..=n_z)
        .map(|k| z0 + length * k as f64 / n_z as f64)
        .collect();
    let sections: Vec<EllipseSection> = levels
        .iter()
        .map(|&z| section_at(z))
        .collect::<Result<_>>()?;
    let layers: Vec<Layer<'_>> = (0..n_z)
        .map(|level| Layer {
            level,
            tris: &disk.tris,
        })
        .collect();
    let (nodes, tets) = extrude(disk.pts.len(), n_z + 1, &layers, |p, lev| {
        let [x, y] = disk.pts[p];
        let s = sections[lev];
        [s.a() * x, s.b() * y, levels[lev]]
    })?;
    let tol = 1e-9 * length;
    let z1 = z0 + length;
    let facets = tag_boundary(&tets, &nodes, |p| {
        if p.iter().all(|q| (q[2] - z0).abs() < tol) {
            FacetTag::Source
        } else if p.iter().all(|q| (q[2] - z1).abs() < tol) {
            far_end
        } else {
            FacetTag::LossyWall(wall)
        }
    });
    let regions = vec![Region::Interior; tets.len()];
    let mesh = Mesh {
        nodes,
        tets,
        regions,
        facets,
    };
    mesh.validate()?;
    Ok(mesh)
}

/// Straight elliptical duct from z = 0 (entrance, SOURCE) to z = L.
///
/// Lateral walls are lossy duct walls (admittance `mu_z`). The far end is
/// RIGID when closed and OUTER otherwise. Centerline nodes sit at
/// z = k·L/n_z with n_z = ceil(L/h).
pub fn generate_duct_mesh(spec: &DuctSpec) -> Result<Mesh> {
    let n_r = ring_count(&spec.section, spec.h)?;
    let n_z = axial_levels(spec.length, spec.h)?;
    let section = spec.section;
    lofted(
        n_r,
        n_z,
        0.0,
        spec.length,
        |_| Ok(section),
        Admittance::DuctWall,
        end_tag(spec.termination),
    )
}

/// Lofted duct following an area function; walls carry the vocal-tract admittance `mu_w`.
pub fn generate_tract_mesh(af: &AreaFunction, h: f64) -> Result<Mesh> {
    let length = af.z_end() - af.z_start();
    let n_z = axial_levels(length, h)?;
    let mut widest = af.section_at(af.z_start())?;
    let mut narrowest = widest;
    for &(z, _, _) in af.stations() {
        let s = af.section_at(z)?;
        if s.a() > widest.a() {
            widest = s;
        }
        if s.b() < narrowest.b() {
            narrowest = s;
        }
    }
    ring_count(&narrowest, h)?;
    let n_r = ring_count(&widest, h)?;
    lofted(
        n_r,
        n_z,
        af.z_start(),
        length,
        |z| af.section_at(z),
        Admittance::TractWall,
        FacetTag::Outer,
    )
}

/// Duct of `spec` ending flush in the rigid flange face (z = L) of a box,
/// surrounded on its five open faces by a PML shell of thickness `pml_width`.
///
/// The box spans |x| <= box.x/2, |y| <= box.y/2, L <= z <= L + box.z. Tets
/// outside the box are flagged PML, the outermost faces are OUTER, and the
/// whole z = L plane outside the duct aperture is RIGID.
pub fn generate_radiation_domain(
    spec: &DuctSpec,
    dims: BoxDims,
    pml_width: f64,
    h_box: f64,
    h_pml: f64,
) -> Result<Mesh> {
    if spec.termination != Termination::OpenFlanged {
        return Err(Error::Geometry(
            "radiation domains need an OPEN_FLANGED duct".into(),
        ));
    }
    if !(pml_width > 0.0) {
        return Err(Error::Geometry(format!(
            "PML width must be positive, got {pml_width}"
        )));
    }
    if !(h_box > 0.0 && h_pml > 0.0) || !(dims.x > 0.0 && dims.y > 0.0 && dims.z > 0.0) {
        return Err(Error::Geometry(
            "box sizes and mesh sizes must be positive".into(),
        ));
    }
    let (a, b, h) = (spec.section.a(), spec.section.b(), spec.h);
    let n_r = ring_count(&spec.section, h)?;
    let n_zd = axial_levels(spec.length, h)?;
    let (hx, hy) = (0.5 * dims.x, 0.5 * dims.y);
    let gap = (hx - a).min(hy - b);
    if gap < h {
        return Err(Error::Geometry(format!(
            "duct section ({a} x {b} m) does not fit in the {} x {} m box face",
            dims.x, dims.y
        )));
    }

    let (disk, boundary) = unit_disk(n_r);
    let mut plane = Planar {
        pts: disk.pts.iter().map(|&[x, y]| [a * x, b * y]).collect(),
        tris: disk.tris.clone(),
    };
    let n_duct_tris = plane.tris.len();
    let n0 = boundary.len();

    let mut nx = ((dims.x / h_box) - 1e-9).ceil().max(2.0) as usize;
    let mut ny = ((dims.y / h_box) - 1e-9).ceil().max(2.0) as usize;
    ny += ny % 2;
    while 2 * (nx + ny) < n0 {
        nx += 1;
        ny += 2;
    }
    let rect = rect_loop(hx, hy, nx, ny);
    let n_rect = rect.len();

    let mut prev = boundary;
    let fractions = graded_fractions(gap, h, h_box);
    let last = fractions.len() - 1;
    let mut n_prev = n0;
    for (k, &t) in fractions.iter().enumerate() {
        let n = if k == last {
            n_rect
        } else {
            ((n0 as f64 + (n_rect - n0) as f64 * t).round() as usize).clamp(n_prev, n_rect)
        };
        let lp: Vec<usize> = (0..n)
            .map(|j| {
                let u = j as f64 / n as f64;
                let q = if k == last {
                    rect[j]
                } else {
                    let th = 2.0 * PI * u;
                    let e = [a * th.cos(), b * th.sin()];
                    let r = polyline_at(&rect, u);
                    [(1.0 - t) * e[0] + t * r[0], (1.0 - t) * e[1] + t * r[1]]
                };
                plane.pts.push(q);
                plane.pts.len() - 1
            })
            .collect();
        merge_loops(&prev, &lp, &mut plane.tris);
        prev = lp;
        n_prev = n;
    }
    let n_pml_loops = ((pml_width / h_pml) - 1e-9).ceil().max(1.0) as usize;
    for k in 1..=n_pml_loops {
        let w = pml_width * k as f64 / n_pml_loops as f64;
        let lp: Vec<usize> = rect_loop(hx + w, hy + w, nx, ny)
            .into_iter()
            .map(|q| {
                plane.pts.push(q);
                plane.pts.len() - 1
            })
            .collect();
        merge_loops(&prev, &lp, &mut plane.tris);
        prev = lp;
    }
    check_planar(&plane)?;

    let length = spec.length;
    let mut levels: Vec<f64> = (0..=n_zd)
        .map(|k| length * k as f64 / n_zd as f64)
        .collect();
    for t in graded_fractions(dims.z, h, h_box) {
        levels.push(length + dims.z * t);
    }
    let z_box = length + dims.z;
    for k in 1..=n_pml_loops {
        levels.push(z_box + pml_width * k as f64 / n_pml_loops as f64);
    }
    let layers: Vec<Layer<'_>> = (0..levels.len() - 1)
        .map(|level| Layer {
            level,
            tris: if level < n_zd {
                &plane.tris[..n_duct_tris]
            } else {
                &plane.tris[..]
            },
        })
        .collect();
    let (nodes, tets) = extrude(plane.pts.len(), levels.len(), &layers, |p, lev| {
        let [x, y] = plane.pts[p];
        [x, y, levels[lev]]
    })?;

    let tol = 1e-9 * (length + dims.z + pml_width);
    let facets = tag_boundary(&tets, &nodes, |p| {
        let on = |z: f64| p.iter().all(|q| (q[2] - z).abs() < tol);
        if on(0.0) {
            FacetTag::Source
        } else if on(length) {
            FacetTag::Rigid
        } else if p.iter().map(|q| q[2]).sum::<f64>() / 3.0 < length {
            FacetTag::LossyWall(Admittance::DuctWall)
        } else {
            FacetTag::Outer
        }
    });
    let mut mesh = Mesh {
        nodes,
        tets,
        regions: Vec::new(),
        facets,
    };
    mesh.regions = (0..mesh.tets.len())
        .map(|t| {
            let c = mesh.tet_centroid(t);
            if c[0].abs() > hx || c[1].abs() > hy || c[2] > z_box {
                Region::Pml
            } else {
                Region::Interior
            }
        })
        .collect();
    mesh.validate()?;
    Ok(mesh)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn disk_counts() {
        for rings in 1..6 {
            let (d, b) = unit_disk(rings);
            assert_eq!(d.pts.len(), 1 + 3 * rings * (rings + 1));
            assert_eq!(d.tris.len(), 6 * rings * rings);
            assert_eq!(b.len(), 6 * rings);
            check_planar(&d).unwrap();
        }
    }

    #[test]
    fn prism_split_is_conforming_and_positive() {
        // Every labeling of a right prism must give three positive tets filling it.
        let base = [
            [0.0, 0.0, 0.0],
            [1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, 0.0, 1.0],
            [1.0, 0.0, 1.0],
            [0.0, 1.0, 1.0],
        ];
        let mut ids = [0usize, 1, 2, 3, 4, 5];
        // a few permutations of global ids over the fixed geometry
        for shift in 0..6 {
            ids.rotate_left(1);
            let mut pts = [[0.0; 3]; 6];
            for i in 0..6 {
                pts[ids[i]] = base[i];
            }
            let v = split_prism(ids);
            let mut total = 0.0;
            for t in v {
                total += signed_volume(t.map(|i| pts[i])).abs();
            }
            assert!((total - 0.5).abs() < 1e-14, "shift {shift}");
        }
    }

    #[test]
    fn graded_fractions_end_at_one() {
        let f = graded_fractions(0.1, 0.005, 0.02);
        assert_eq!(*f.last().unwrap(), 1.0);
        assert!(f.windows(2).all(|w| w[1] > w[0]));
    }
}

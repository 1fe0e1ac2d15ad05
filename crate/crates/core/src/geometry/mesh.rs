use std::collections::HashMap;

use sha2::{Digest, Sha256};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Region {
    Interior,
    Pml,
}

impl Region {
    pub fn as_str(&self) -> &'static str {
        match self {
            Region::Interior => "INTERIOR",
            Region::Pml => "PML",
        }
    }
}

/// Admittance carried by a lossy wall facet.
///
/// The symbolic variants resolve against the simulation config (`mu_z` for
/// impedance-duct walls, `mu_w` for vocal-tract walls).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Admittance {
    DuctWall,
    TractWall,
    Value(f64),
}

impl Admittance {
    pub fn resolve(&self, mu_z: f64, mu_w: f64) -> f64 {
        match *self {
            Admittance::DuctWall => mu_z,
            Admittance::TractWall => mu_w,
            Admittance::Value(mu) => mu,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FacetTag {
    /// Entrance cross-section where the volume velocity is injected.
    Source,
    LossyWall(Admittance),
    Rigid,
    /// Outer truncation of the domain (homogeneous Neumann).
    Outer,
}

impl FacetTag {
    pub fn name(&self) -> &'static str {
        match self {
            FacetTag::Source => "SOURCE",
            FacetTag::LossyWall(_) => "LOSSY_WALL",
            FacetTag::Rigid => "RIGID",
            FacetTag::Outer => "OUTER",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Facet {
    /// Node indices, ordered so the normal points out of the domain.
    pub nodes: [usize; 3],
    pub tag: FacetTag,
}

/// Linear tetrahedral mesh with tagged boundary facets.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Mesh {
    pub nodes: Vec<[f64; 3]>,
    pub tets: Vec<[usize; 4]>,
    pub regions: Vec<Region>,
    pub facets: Vec<Facet>,
}

pub(crate) fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub(crate) fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub(crate) fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub(crate) fn norm(a: [f64; 3]) -> f64 {
    dot(a, a).sqrt()
}

pub(crate) fn signed_volume(p: [[f64; 3]; 4]) -> f64 {
    dot(sub(p[1], p[0]), cross(sub(p[2], p[0]), sub(p[3], p[0]))) / 6.0
}

pub(crate) fn triangle_area(p: [[f64; 3]; 3]) -> f64 {
    0.5 * norm(cross(sub(p[1], p[0]), sub(p[2], p[0])))
}

fn face_key(mut f: [usize; 3]) -> [usize; 3] {
    f.sort_unstable();
    f
}

/// Faces of a positively oriented tet, each with an outward normal.
pub(crate) fn tet_faces(t: [usize; 4]) -> [[usize; 3]; 4] {
    [
        [t[1], t[2], t[3]],
        [t[0], t[3], t[2]],
        [t[0], t[1], t[3]],
        [t[0], t[2], t[1]],
    ]
}

impl Mesh {
    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn n_tets(&self) -> usize {
        self.tets.len()
    }

    pub fn tet_points(&self, t: usize) -> [[f64; 3]; 4] {
        self.tets[t].map(|i| self.nodes[i])
    }

    pub fn tet_volume(&self, t: usize) -> f64 {
        signed_volume(self.tet_points(t))
    }

    pub fn tet_centroid(&self, t: usize) -> [f64; 3] {
        let p = self.tet_points(t);
        let mut c = [0.0; 3];
        for q in p {
            for k in 0..3 {
                c[k] += 0.25 * q[k];
            }
        }
        c
    }

    pub fn facet_points(&self, f: usize) -> [[f64; 3]; 3] {
        self.facets[f].nodes.map(|i| self.nodes[i])
    }

    pub fn facet_area(&self, f: usize) -> f64 {
        triangle_area(self.facet_points(f))
    }

    pub fn total_volume(&self) -> f64 {
        (0..self.tets.len()).map(|t| self.tet_volume(t)).sum()
    }

    pub fn region_volume(&self, region: Region) -> f64 {
        (0..self.tets.len())
            .filter(|&t| self.regions[t] == region)
            .map(|t| self.tet_volume(t))
            .sum()
    }

    /// Total area of facets whose tag has the same kind as `tag` (admittance ignored).
    pub fn tagged_area(&self, tag: FacetTag) -> f64 {
        (0..self.facets.len())
            .filter(|&f| {
                std::mem::discriminant(&self.facets[f].tag) == std::mem::discriminant(&tag)
            })
            .map(|f| self.facet_area(f))
            .sum()
    }

    /// Index of the node located at `p`, within `tol` in every coordinate.
    pub fn node_at(&self, p: [f64; 3], tol: f64) -> Option<usize> {
        self.nodes
            .iter()
            .position(|q| (0..3).all(|k| (q[k] - p[k]).abs() <= tol))
    }

    /// Smallest inscribed-sphere diameter over all tets.
    pub fn min_inscribed_diameter(&self) -> Result<f64> {
        let mut best = f64::INFINITY;
        for t in 0..self.tets.len() {
            let p = self.tet_points(t);
            let v = signed_volume(p).abs();
            let faces: f64 = tet_faces([0, 1, 2, 3])
                .iter()
                .map(|f| triangle_area(f.map(|i| p[i])))
                .sum();
            if v <= 0.0 || faces <= 0.0 {
                return Err(Error::Mesh(format!("tet {t} is degenerate")));
            }
            best = best.min(6.0 * v / faces);
        }
        if best.is_finite() {
            Ok(best)
        } else {
            Err(Error::Mesh("mesh has no tets".into()))
        }
    }

    /// Number of tets per node (0 for orphan nodes).
    pub fn node_valence(&self) -> Vec<usize> {
        let mut v = vec![0; self.nodes.len()];
        for t in &self.tets {
            for &i in t {
                v[i] += 1;
            }
        }
        v
    }

    /// Checks positive volumes and that the facets are exactly the tagged boundary faces.
    /// Axis node (x = y = 0) closest to height `z`, for snapping probe positions.
    pub fn centerline_node_near(&self, z: f64) -> Option<(usize, [f64; 3])> {
        self.nodes
            .iter()
            .enumerate()
            .filter(|(_, p)| p[0].abs() < 1e-12 && p[1].abs() < 1e-12)
            .min_by(|a, b| (a.1[2] - z).abs().total_cmp(&(b.1[2] - z).abs()))
            .map(|(i, &p)| (i, p))
    }

    /// Flags as PML every tet whose centroid satisfies `pred`; returns how many changed.
    pub fn flag_pml_where(&mut self, pred: impl Fn([f64; 3]) -> bool) -> usize {
        let mut changed = 0;
        for t in 0..self.tets.len() {
            if self.regions[t] != Region::Pml && pred(self.tet_centroid(t)) {
                self.regions[t] = Region::Pml;
                changed += 1;
            }
        }
        changed
    }

    pub fn validate(&self) -> Result<()> {
        if self.regions.len() != self.tets.len() {
            return Err(Error::Mesh("one region flag per tet is required".into()));
        }
        let n = self.nodes.len();
        let mut faces: HashMap<[usize; 3], u32> = HashMap::with_capacity(self.tets.len() * 2);
        for (t, tet) in self.tets.iter().enumerate() {
            if tet.iter().any(|&i| i >= n) {
                return Err(Error::Mesh(format!("tet {t} references a missing node")));
            }
            let v = self.tet_volume(t);
            if !(v > 0.0) {
                return Err(Error::Mesh(format!(
                    "tet {t} has non-positive volume {v:e}"
                )));
            }
            for f in tet_faces(*tet) {
                *faces.entry(face_key(f)).or_insert(0) += 1;
            }
        }
        if let Some((f, c)) = faces.iter().find(|(_, &c)| c > 2) {
            return Err(Error::Mesh(format!("face {f:?} is shared by {c} tets")));
        }
        let mut seen: HashMap<[usize; 3], usize> = HashMap::with_capacity(self.facets.len());
        for (i, facet) in self.facets.iter().enumerate() {
            let key = face_key(facet.nodes);
            match faces.get(&key) {
                Some(1) => {}
                Some(_) => return Err(Error::Mesh(format!("facet {i} is an interior face"))),
                None => return Err(Error::Mesh(format!("facet {i} is not a face of any tet"))),
            }
            if seen.insert(key, i).is_some() {
                return Err(Error::Mesh(format!("facet {i} is tagged twice")));
            }
        }
        let boundary = faces.values().filter(|&&c| c == 1).count();
        if boundary != self.facets.len() {
            return Err(Error::Mesh(format!(
                "{} boundary faces but {} tagged facets",
                boundary,
                self.facets.len()
            )));
        }
        Ok(())
    }

    /// SHA-256 of the mesh file representation, hex encoded.
    pub fn digest(&self) -> String {
        let mut buf = Vec::new();
        super::io::write_mesh_to(self, &mut buf).expect("writing to a Vec cannot fail");
        let hash = Sha256::digest(&buf);
        hash.iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Boundary faces of the tet set (outward oriented), in tet order.
    pub(crate) fn boundary_faces(tets: &[[usize; 4]]) -> Vec<[usize; 3]> {
        let mut count: HashMap<[usize; 3], u32> = HashMap::with_capacity(tets.len() * 2);
        for t in tets {
            for f in tet_faces(*t) {
                *count.entry(face_key(f)).or_insert(0) += 1;
            }
        }
        let mut out = Vec::new();
        for t in tets {
            for f in tet_faces(*t) {
                if count[&face_key(f)] == 1 {
                    out.push(f);
                }
            }
        }
        out
    }
}

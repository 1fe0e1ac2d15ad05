//! Global matrices of the semi-discrete PML wave equation on linear tets.
//!
//! All mass-like matrices are lumped by row sum and stored as diagonals. The
//! first-derivative coupling matrices of the PML stay sparse. PML coefficient
//! fields are evaluated once per element, at its centroid.

use crate::geometry::mesh::{cross, dot, sub};
use crate::geometry::{FacetTag, Mesh, Region};
use crate::pml::{pml_coefficients, PmlSpec};
use crate::sparse::{Csr, Triplets};
use crate::{Error, Result};

/// Volume and shape-function gradients of one tet.
#[derive(Debug, Clone, Copy)]
pub struct TetGeometry {
    pub volume: f64,
    pub grads: [[f64; 3]; 4],
}

impl TetGeometry {
    pub fn new(p: [[f64; 3]; 4]) -> Result<Self> {
        let e1 = sub(p[1], p[0]);
        let e2 = sub(p[2], p[0]);
        let e3 = sub(p[3], p[0]);
        let c23 = cross(e2, e3);
        let six_v = dot(e1, c23);
        if !(six_v > 0.0) {
            return Err(Error::Assembly(format!(
                "degenerate or inverted tet (6V = {six_v:e})"
            )));
        }
        let g1 = c23.map(|x| x / six_v);
        let g2 = cross(e3, e1).map(|x| x / six_v);
        let g3 = cross(e1, e2).map(|x| x / six_v);
        let g0 = [
            -(g1[0] + g2[0] + g3[0]),
            -(g1[1] + g2[1] + g3[1]),
            -(g1[2] + g2[2] + g3[2]),
        ];
        Ok(Self {
            volume: six_v / 6.0,
            grads: [g0, g1, g2, g3],
        })
    }
}

fn geometries(mesh: &Mesh) -> Result<Vec<TetGeometry>> {
    (0..mesh.n_tets())
        .map(|t| {
            TetGeometry::new(mesh.tet_points(t))
                .map_err(|e| Error::Assembly(format!("tet {t}: {e}")))
        })
        .collect()
}

/// `K_ab = (grad N_a, grad N_b)`.
pub fn assemble_stiffness(mesh: &Mesh) -> Result<Csr> {
    let n = mesh.n_nodes();
    let mut trip = Triplets::new(n, n);
    for (t, g) in mesh.tets.iter().zip(geometries(mesh)?) {
        for i in 0..4 {
            for j in 0..4 {
                trip.push(t[i], t[j], g.volume * dot(g.grads[i], g.grads[j]));
            }
        }
    }
    Ok(trip.into_csr())
}

/// Lumped mass diagonal: every tet node receives V/4.
pub fn lumped_mass(mesh: &Mesh) -> Result<Vec<f64>> {
    let mut m = vec![0.0; mesh.n_nodes()];
    for (t, g) in mesh.tets.iter().zip(geometries(mesh)?) {
        for &i in t {
            m[i] += 0.25 * g.volume;
        }
    }
    Ok(m)
}

/// Mass matrix, either consistent (V/20 with doubled diagonal) or lumped.
pub fn assemble_mass(mesh: &Mesh, lumped: bool) -> Result<Csr> {
    let n = mesh.n_nodes();
    let mut trip = Triplets::new(n, n);
    if lumped {
        for (i, v) in lumped_mass(mesh)?.into_iter().enumerate() {
            trip.push(i, i, v);
        }
    } else {
        for (t, g) in mesh.tets.iter().zip(geometries(mesh)?) {
            for i in 0..4 {
                for j in 0..4 {
                    let w = if i == j { 2.0 } else { 1.0 };
                    trip.push(t[i], t[j], w * g.volume / 20.0);
                }
            }
        }
    }
    Ok(trip.into_csr())
}

/// Lumped surface-mass of the lossy walls scaled by each facet's admittance.
pub fn assemble_boundary_damping(mesh: &Mesh, mu_z: f64, mu_w: f64) -> Result<Vec<f64>> {
    let mut b = vec![0.0; mesh.n_nodes()];
    for (f, facet) in mesh.facets.iter().enumerate() {
        if let FacetTag::LossyWall(adm) = facet.tag {
            let mu = adm.resolve(mu_z, mu_w);
            if !(mu >= 0.0) {
                return Err(Error::Domain(format!(
                    "wall admittance must be non-negative, got {mu} on facet {f}"
                )));
            }
            if mu == 0.0 {
                continue;
            }
            let share = mu * mesh.facet_area(f) / 3.0;
            for &i in &facet.nodes {
                b[i] += share;
            }
        }
    }
    Ok(b)
}

/// Lumped source measure over SOURCE facets and the total source area S.
pub fn assemble_source_pattern(mesh: &Mesh) -> Result<(Vec<f64>, f64)> {
    let mut l = vec![0.0; mesh.n_nodes()];
    let mut area = 0.0;
    for (f, facet) in mesh.facets.iter().enumerate() {
        if facet.tag == FacetTag::Source {
            let a = mesh.facet_area(f);
            area += a;
            for &i in &facet.nodes {
                l[i] += a / 3.0;
            }
        }
    }
    if area == 0.0 {
        return Err(Error::Config("mesh has no SOURCE facets".into()));
    }
    Ok((l, area))
}

/// PML mass-like diagonals and first-derivative coupling matrices.
#[derive(Debug, Clone, Default)]
pub struct PmlMatrices {
    pub m_alpha: Vec<f64>,
    pub m_beta: Vec<f64>,
    pub m_gamma: Vec<f64>,
    pub m_xi: [Vec<f64>; 3],
    /// `-(d_i N_a, N_b)`, columns restricted to the auxiliary-field support.
    ///
    /// This is `(N_a, d_i N_b)` integrated by parts with the boundary term
    /// dropped, i.e. with zero normal auxiliary flux on the domain boundary.
    /// In this form the discrete PML operator is dominated by the stiffness,
    /// which keeps long runs stable.
    pub grad: [Csr; 3],
    /// `(N_a, a_i d_i N_b)`.
    pub grad_a: [Csr; 3],
    /// `(N_a, b_i d_i N_b)`.
    pub grad_b: [Csr; 3],
    /// Nodes on which the auxiliary fields can be non-zero, ascending.
    pub support: Vec<usize>,
}

impl PmlMatrices {
    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }
}

/// PML matrices with damping profiles supplied per element centroid.
pub fn assemble_pml_fields(
    mesh: &Mesh,
    damping: impl Fn([f64; 3]) -> Result<[f64; 3]>,
) -> Result<PmlMatrices> {
    let n = mesh.n_nodes();
    let geo = geometries(mesh)?;
    let mut out = PmlMatrices {
        m_alpha: vec![0.0; n],
        m_beta: vec![0.0; n],
        m_gamma: vec![0.0; n],
        m_xi: [vec![0.0; n], vec![0.0; n], vec![0.0; n]],
        ..Default::default()
    };
    let mut in_support = vec![false; n];
    let mut grad_a: [Triplets; 3] = std::array::from_fn(|_| Triplets::new(n, n));
    let mut grad_b: [Triplets; 3] = std::array::from_fn(|_| Triplets::new(n, n));
    for (t, tet) in mesh.tets.iter().enumerate() {
        if mesh.regions[t] != Region::Pml {
            continue;
        }
        let xi = damping(mesh.tet_centroid(t))?;
        if xi.iter().all(|&x| x == 0.0) {
            continue;
        }
        let c = pml_coefficients(xi);
        let g = &geo[t];
        let q = 0.25 * g.volume;
        for &a in tet {
            in_support[a] = true;
            out.m_alpha[a] += c.alpha * q;
            out.m_beta[a] += c.beta * q;
            out.m_gamma[a] += c.gamma * q;
            for i in 0..3 {
                out.m_xi[i][a] += xi[i] * q;
            }
        }
        for i in 0..3 {
            for &a in tet {
                for (k, &b) in tet.iter().enumerate() {
                    let d = g.grads[k][i] * q;
                    if c.a[i] != 0.0 {
                        grad_a[i].push(a, b, c.a[i] * d);
                    }
                    if c.b[i] != 0.0 {
                        grad_b[i].push(a, b, c.b[i] * d);
                    }
                }
            }
        }
    }
    out.support = (0..n).filter(|&i| in_support[i]).collect();
    let mut grad: [Triplets; 3] = std::array::from_fn(|_| Triplets::new(n, n));
    if !out.support.is_empty() {
        for (t, tet) in mesh.tets.iter().enumerate() {
            if !tet.iter().any(|&b| in_support[b]) {
                continue;
            }
            let g = &geo[t];
            let q = 0.25 * g.volume;
            for (i, trip) in grad.iter_mut().enumerate() {
                for (k, &a) in tet.iter().enumerate() {
                    for &b in tet {
                        if in_support[b] {
                            trip.push(a, b, -g.grads[k][i] * q);
                        }
                    }
                }
            }
        }
    }
    out.grad = grad.map(Triplets::into_csr);
    out.grad_a = grad_a.map(Triplets::into_csr);
    out.grad_b = grad_b.map(Triplets::into_csr);
    Ok(out)
}

pub fn assemble_pml_matrices(mesh: &Mesh, pml: &PmlSpec) -> Result<PmlMatrices> {
    if !pml.is_active() {
        return assemble_pml_fields(mesh, |_| Ok([0.0; 3]));
    }
    assemble_pml_fields(mesh, |c| pml.damping_at(c))
}

/// Everything the time integrator needs.
#[derive(Debug, Clone)]
pub struct AssembledSystem {
    pub mass: Vec<f64>,
    pub stiffness: Csr,
    pub damping: Vec<f64>,
    pub pml: PmlMatrices,
    pub source: Vec<f64>,
    pub source_area: f64,
}

impl AssembledSystem {
    pub fn assemble(mesh: &Mesh, mu_z: f64, mu_w: f64, pml: &PmlSpec) -> Result<Self> {
        let (source, source_area) = assemble_source_pattern(mesh)?;
        Ok(Self {
            mass: lumped_mass(mesh)?,
            stiffness: assemble_stiffness(mesh)?,
            damping: assemble_boundary_damping(mesh, mu_z, mu_w)?,
            pml: assemble_pml_matrices(mesh, pml)?,
            source,
            source_area,
        })
    }

    pub fn n_nodes(&self) -> usize {
        self.mass.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Admittance, Facet};

    fn single_tet(region: Region) -> Mesh {
        let tets = vec![[0, 1, 2, 3]];
        let facets = Mesh::boundary_faces(&tets)
            .into_iter()
            .map(|nodes| Facet {
                nodes,
                tag: FacetTag::Rigid,
            })
            .collect();
        Mesh {
            nodes: vec![
                [0.0, 0.0, 0.0],
                [1.0, 0.0, 0.0],
                [0.0, 1.0, 0.0],
                [0.0, 0.0, 1.0],
            ],
            tets,
            regions: vec![region],
            facets,
        }
    }

    #[test]
    fn unit_tet_stiffness() {
        let k = assemble_stiffness(&single_tet(Region::Interior)).unwrap();
        let close = |a: f64, b: f64| (a - b).abs() < 1e-15;
        assert!(close(k.get(0, 0), 0.5));
        for i in 1..4 {
            assert!(close(k.get(0, i), -1.0 / 6.0));
            assert!(close(k.get(i, i), 1.0 / 6.0));
        }
        assert!(k.row_sums().iter().all(|s| s.abs() < 1e-15));
    }

    #[test]
    fn unit_tet_masses() {
        let m = single_tet(Region::Interior);
        let lumped = lumped_mass(&m).unwrap();
        assert!(lumped.iter().all(|&v| (v - 1.0 / 24.0).abs() < 1e-16));
        let consistent = assemble_mass(&m, false).unwrap();
        // V/20 * (2 on diag, 1 off) has row sum 5V/20 = V/4
        for (r, s) in consistent.row_sums().iter().enumerate() {
            assert!((s - lumped[r]).abs() < 1e-16);
        }
        assert!((consistent.get(0, 0) - 2.0 / 120.0).abs() < 1e-16);
        assert!((consistent.get(0, 1) - 1.0 / 120.0).abs() < 1e-16);
    }

    #[test]
    fn degenerate_tet_is_assembly_error() {
        let mut m = single_tet(Region::Interior);
        m.nodes[3] = [1.0, 1.0, 0.0];
        assert!(matches!(assemble_stiffness(&m), Err(Error::Assembly(_))));
        assert!(matches!(lumped_mass(&m), Err(Error::Assembly(_))));
    }

    #[test]
    fn lumped_wall_damping() {
        let mut m = single_tet(Region::Interior);
        // facet 3 is the z = 0 face with area 1/2; make a unit-area copy by scaling
        m.nodes = m.nodes.iter().map(|p| p.map(|x| x * 2f64.sqrt())).collect();
        m.facets[3].tag = FacetTag::LossyWall(Admittance::Value(0.01));
        let b = assemble_boundary_damping(&m, 0.0, 0.0).unwrap();
        let face = m.facets[3].nodes;
        for i in 0..4 {
            let want = if face.contains(&i) { 0.01 / 3.0 } else { 0.0 };
            assert!((b[i] - want).abs() < 1e-15, "node {i}: {}", b[i]);
        }
        assert!(
            assemble_boundary_damping(&single_tet(Region::Interior), 0.0, 0.0)
                .unwrap()
                .iter()
                .all(|&x| x == 0.0)
        );
        m.facets[3].tag = FacetTag::LossyWall(Admittance::DuctWall);
        assert!(matches!(
            assemble_boundary_damping(&m, -0.1, 0.0),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn source_pattern_needs_source() {
        assert!(matches!(
            assemble_source_pattern(&single_tet(Region::Interior)),
            Err(Error::Config(_))
        ));
        let mut m = single_tet(Region::Interior);
        m.facets[0].tag = FacetTag::Source;
        let (l, s) = assemble_source_pattern(&m).unwrap();
        assert!((l.iter().sum::<f64>() - s).abs() < 1e-15);
        assert!((s - 3f64.sqrt() / 2.0).abs() < 1e-15);
    }

    #[test]
    fn pml_families() {
        let interior = single_tet(Region::Interior);
        let p = assemble_pml_fields(&interior, |_| Ok([3.0, 1.0, 2.0])).unwrap();
        assert!(p.is_empty());
        assert!(p.m_alpha.iter().all(|&x| x == 0.0));
        assert!(p.grad.iter().all(|g| g.nnz() == 0));

        let layer = single_tet(Region::Pml);
        let p = assemble_pml_fields(&layer, |_| Ok([2.0, 0.0, 0.0])).unwrap();
        assert!(p.m_beta.iter().chain(&p.m_gamma).all(|&x| x == 0.0));
        assert!(p.grad_b.iter().all(|g| g.nnz() == 0));
        let m = lumped_mass(&layer).unwrap();
        for i in 0..4 {
            assert!((p.m_alpha[i] - 2.0 * m[i]).abs() < 1e-12 * m[i]);
            assert!((p.m_xi[0][i] - 2.0 * m[i]).abs() < 1e-12 * m[i]);
        }
        // column sums of B_i vanish because the gradients sum to zero
        for g in &p.grad {
            let mut cols = [0.0; 4];
            for r in 0..4 {
                for (c, v) in g.row(r) {
                    cols[c] += v;
                }
            }
            assert!(cols.iter().all(|s| s.abs() < 1e-15));
        }
    }
}

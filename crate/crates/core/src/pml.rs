//! Damping profiles and coefficient fields of the PML-modified wave equation.
//!
//! Inside the layer along axis i the profile ramps smoothly from 0 at the
//! inner face to `xi_hat` at the outer face:
//!
//! ```text
//! xi(d) = xi_hat * (d/L - sin(2*pi*d/L) / (2*pi)),   d = |x - center| - l
//! xi_hat = c0 / L * ln(1 / r_inf)
//! ```
//!
//! The logarithm is natural.

use std::f64::consts::PI;

use crate::geometry::{BoxDims, Mesh, Region};
use crate::{Error, Result};

pub fn xi_hat(c0: f64, layer: f64, r_inf: f64) -> Result<f64> {
    if !(layer > 0.0) {
        return Err(Error::Domain(format!(
            "PML thickness must be positive, got {layer}"
        )));
    }
    if !(r_inf > 0.0 && r_inf <= 1.0) {
        return Err(Error::Domain(format!(
            "r_inf must lie in (0, 1], got {r_inf}"
        )));
    }
    Ok(c0 / layer * (1.0 / r_inf).ln())
}

/// Damping at coordinate `x` for a layer starting at |x| = l with thickness `layer`.
pub fn damping_profile(xi_hat: f64, x: f64, l: f64, layer: f64) -> Result<f64> {
    let d = x.abs() - l;
    if d <= 0.0 {
        return Ok(0.0);
    }
    if d > layer * (1.0 + 1e-9) {
        return Err(Error::Domain(format!(
            "|x| = {} lies beyond the outer PML face at {}",
            x.abs(),
            l + layer
        )));
    }
    let s = (d / layer).min(1.0);
    Ok(xi_hat * (s - (2.0 * PI * s).sin() / (2.0 * PI)))
}

/// Elementary-symmetric combinations of the three damping profiles.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PmlCoefficients {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub a: [f64; 3],
    pub b: [f64; 3],
}

pub fn pml_coefficients(xi: [f64; 3]) -> PmlCoefficients {
    let [x1, x2, x3] = xi;
    PmlCoefficients {
        alpha: x1 + x2 + x3,
        beta: x1 * x2 + x2 * x3 + x3 * x1,
        gamma: x1 * x2 * x3,
        a: [x2 + x3 - x1, x3 + x1 - x2, x1 + x2 - x3],
        b: [x2 * x3, x3 * x1, x1 * x2],
    }
}

/// Layer along one axis: interior |x - center| <= half_extent, then `thickness` of PML.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PmlAxis {
    pub center: f64,
    pub half_extent: f64,
    pub thickness: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PmlSpec {
    pub axes: [Option<PmlAxis>; 3],
    pub r_inf: f64,
    xi_hat: [f64; 3],
}

impl PmlSpec {
    pub fn new(axes: [Option<PmlAxis>; 3], r_inf: f64, c0: f64) -> Result<Self> {
        let mut xi = [0.0; 3];
        for (i, ax) in axes.iter().enumerate() {
            if let Some(ax) = ax {
                if !(ax.half_extent >= 0.0) {
                    return Err(Error::Domain("PML half extent must be non-negative".into()));
                }
                xi[i] = xi_hat(c0, ax.thickness, r_inf)?;
            }
        }
        if !(r_inf > 0.0 && r_inf <= 1.0) {
            return Err(Error::Domain(format!(
                "r_inf must lie in (0, 1], got {r_inf}"
            )));
        }
        Ok(Self {
            axes,
            r_inf,
            xi_hat: xi,
        })
    }

    /// No layer at all.
    pub fn none() -> Self {
        Self {
            axes: [None; 3],
            r_inf: 1.0,
            xi_hat: [0.0; 3],
        }
    }

    /// Shell around the box of a radiation domain whose flange sits at z = `duct_length`.
    pub fn box_shell(
        duct_length: f64,
        dims: BoxDims,
        width: f64,
        r_inf: f64,
        c0: f64,
    ) -> Result<Self> {
        let axis = |center, half_extent| {
            Some(PmlAxis {
                center,
                half_extent,
                thickness: width,
            })
        };
        Self::new(
            [
                axis(0.0, 0.5 * dims.x),
                axis(0.0, 0.5 * dims.y),
                axis(duct_length + 0.5 * dims.z, 0.5 * dims.z),
            ],
            r_inf,
            c0,
        )
    }

    /// Single layer along +z starting at `z_start` (the domain starting at z = 0).
    pub fn axial(z_start: f64, width: f64, r_inf: f64, c0: f64) -> Result<Self> {
        Self::new(
            [
                None,
                None,
                Some(PmlAxis {
                    center: 0.5 * z_start,
                    half_extent: 0.5 * z_start,
                    thickness: width,
                }),
            ],
            r_inf,
            c0,
        )
    }

    /// Layer inferred from the region flags of a mesh.
    ///
    /// Along each axis the interior is the bounding box of INTERIOR tets and the
    /// thickness is the largest overhang of PML tets beyond it. Axes without an
    /// overhang get no layer.
    pub fn from_mesh(mesh: &Mesh, r_inf: f64, c0: f64) -> Result<Self> {
        let mut inner = [[f64::INFINITY, f64::NEG_INFINITY]; 3];
        let mut outer = inner;
        let mut any_pml = false;
        for (t, tet) in mesh.tets.iter().enumerate() {
            let bounds = match mesh.regions[t] {
                Region::Interior => &mut inner,
                Region::Pml => {
                    any_pml = true;
                    &mut outer
                }
            };
            for &n in tet {
                for i in 0..3 {
                    let x = mesh.nodes[n][i];
                    bounds[i][0] = bounds[i][0].min(x);
                    bounds[i][1] = bounds[i][1].max(x);
                }
            }
        }
        if !any_pml || r_inf == 1.0 {
            let mut none = Self::none();
            if !(r_inf > 0.0 && r_inf <= 1.0) {
                return Err(Error::Domain(format!(
                    "r_inf must lie in (0, 1], got {r_inf}"
                )));
            }
            none.r_inf = r_inf;
            return Ok(none);
        }
        if !inner[0][0].is_finite() {
            return Err(Error::Mesh("mesh has PML tets but no interior".into()));
        }
        let mut axes = [None; 3];
        for i in 0..3 {
            let [lo, hi] = inner[i];
            let scale = (hi - lo).abs().max(1e-300);
            let thickness = (outer[i][1] - hi).max(lo - outer[i][0]);
            if thickness > 1e-9 * scale {
                axes[i] = Some(PmlAxis {
                    center: 0.5 * (lo + hi),
                    half_extent: 0.5 * (hi - lo),
                    thickness,
                });
            }
        }
        Self::new(axes, r_inf, c0)
    }

    pub fn xi_hat(&self) -> [f64; 3] {
        self.xi_hat
    }

    pub fn is_active(&self) -> bool {
        self.xi_hat.iter().any(|&x| x > 0.0)
    }

    /// Damping profiles at a point.
    pub fn damping_at(&self, p: [f64; 3]) -> Result<[f64; 3]> {
        let mut xi = [0.0; 3];
        for i in 0..3 {
            if let Some(ax) = self.axes[i] {
                xi[i] = damping_profile(
                    self.xi_hat[i],
                    p[i] - ax.center,
                    ax.half_extent,
                    ax.thickness,
                )?;
            }
        }
        Ok(xi)
    }

    pub fn coefficients_at(&self, p: [f64; 3]) -> Result<PmlCoefficients> {
        Ok(pml_coefficients(self.damping_at(p)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn xi_hat_values() {
        assert_eq!(xi_hat(345.0, 0.1, 1.0).unwrap(), 0.0);
        // 3450 * ln(1e4)
        assert_relative_eq!(
            xi_hat(345.0, 0.1, 1e-4).unwrap(),
            31_775.674_283_317_8,
            max_relative = 1e-12
        );
        let x1 = xi_hat(345.0, 0.1, 1e-3).unwrap();
        let x2 = xi_hat(345.0, 0.2, 1e-3).unwrap();
        assert_relative_eq!(x1, 2.0 * x2, max_relative = 1e-15);
        assert!(xi_hat(345.0, 0.1, 0.0).is_err());
        assert!(xi_hat(345.0, 0.1, -1.0).is_err());
        assert!(xi_hat(345.0, 0.0, 0.5).is_err());
    }

    #[test]
    fn profile_landmarks() {
        let (xh, l, w) = (1000.0, 0.2, 0.1);
        assert_eq!(damping_profile(xh, 0.2, l, w).unwrap(), 0.0);
        assert_eq!(damping_profile(xh, -0.1, l, w).unwrap(), 0.0);
        assert_relative_eq!(
            damping_profile(xh, 0.3, l, w).unwrap(),
            xh,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            damping_profile(xh, -0.25, l, w).unwrap(),
            0.5 * xh,
            max_relative = 1e-12
        );
        assert!(damping_profile(xh, 0.31, l, w).is_err());
    }

    #[test]
    fn coefficient_examples() {
        assert_eq!(pml_coefficients([0.0; 3]), PmlCoefficients::default());
        let c = pml_coefficients([5.0, 0.0, 0.0]);
        assert_eq!((c.alpha, c.beta, c.gamma), (5.0, 0.0, 0.0));
        assert_eq!(c.a, [-5.0, 5.0, 5.0]);
        assert_eq!(c.b, [0.0; 3]);
        let c = pml_coefficients([1.0, 2.0, 3.0]);
        assert_eq!((c.alpha, c.beta, c.gamma), (6.0, 11.0, 6.0));
        assert_eq!(c.a, [4.0, 2.0, 0.0]);
        assert_eq!(c.b, [6.0, 3.0, 2.0]);
    }

    #[test]
    fn box_shell_damping_outside_box_only() {
        let dims = BoxDims {
            x: 0.2,
            y: 0.2,
            z: 0.1,
        };
        let pml = PmlSpec::box_shell(0.1, dims, 0.05, 1e-4, 345.0).unwrap();
        assert_eq!(pml.damping_at([0.05, 0.05, 0.15]).unwrap(), [0.0; 3]);
        let xi = pml.damping_at([0.125, 0.0, 0.12]).unwrap();
        assert!(xi[0] > 0.0 && xi[1] == 0.0 && xi[2] == 0.0);
        let xi = pml.damping_at([0.0, 0.0, 0.25]).unwrap();
        assert_relative_eq!(xi[2], pml.xi_hat()[2], max_relative = 1e-9);
    }

    proptest! {
        #[test]
        fn profile_is_monotone_and_flat_at_ends(s1 in 0.0f64..1.0, s2 in 0.0f64..1.0) {
            let (xh, l, w) = (100.0, 1.0, 0.5);
            let (lo, hi) = if s1 < s2 { (s1, s2) } else { (s2, s1) };
            let p = damping_profile(xh, l + lo * w, l, w).unwrap();
            let q = damping_profile(xh, l + hi * w, l, w).unwrap();
            prop_assert!(p <= q + 1e-12);
            // derivative vanishes at both faces: one-sided differences are O(eps^2)
            let eps = 1e-4;
            let d0 = damping_profile(xh, l + eps * w, l, w).unwrap() / (eps * w);
            let d1 = (xh - damping_profile(xh, l + (1.0 - eps) * w, l, w).unwrap()) / (eps * w);
            prop_assert!(d0.abs() < 1e-2 && d1.abs() < 1e-2);
        }

        #[test]
        fn symmetric_coefficients(x in 0.0f64..10.0, y in 0.0f64..10.0, z in 0.0f64..10.0) {
            let c = pml_coefficients([x, y, z]);
            let p = pml_coefficients([z, x, y]);
            prop_assert!((c.alpha - p.alpha).abs() < 1e-12);
            prop_assert!((c.beta - p.beta).abs() < 1e-10);
            prop_assert!((c.gamma - p.gamma).abs() < 1e-9);
            // cyclic relabeling permutes a and b covariantly
            prop_assert!((p.a[1] - c.a[0]).abs() < 1e-12 && (p.b[2] - c.b[1]).abs() < 1e-10);
        }
    }
}

//! Impedance-duct laboratory.
//!
//! Radiation and input impedances of circular and elliptical ducts are
//! obtained by running an explicit time-domain finite-element simulation of
//! the acoustic wave equation (with a perfectly matched layer for open
//! domains), recording the pressure at two virtual microphones on the duct
//! centerline and post-processing them with the two-microphone
//! transfer-function method, using complex axial wavenumbers that account
//! for the artificial wall losses of the impedance duct.
//!
//! Module map:
//!
//! - [`geometry`]: cross-sections, tagged tetrahedral meshes and their file format.
//! - [`assembly`]: global FEM matrices (stiffness, lumped masses, damping, PML coupling).
//! - [`pml`]: damping profiles and the coefficient fields of the modified wave equation.
//! - [`solver`]: the explicit three-substep time integrator, sources and probes.
//! - [`wavenumbers`]: complex axial wavenumbers, admittance matching, cutoffs, spacing advice.
//! - [`tmtf`]: transfer functions, reflection coefficients and impedance spectra.
//! - [`oracles`]: independent analytic references (plane-wave fields, quadrature, piston).

// `!(x > 0.0)` is used on purpose: it rejects NaN along with non-positive input.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod assembly;
pub mod error;
pub mod geometry;
pub mod oracles;
pub mod pml;
pub mod solver;
pub mod sparse;
pub mod tmtf;
pub mod wavenumbers;

pub use error::{Error, Result};
pub use geometry::{
    AreaFunction, DuctSpec, EllipseSection, Facet, FacetTag, Mesh, Region, Termination,
    WallAdmittance,
};
pub use num_complex::Complex64;

/// Speed of sound used throughout the original simulations (m/s).
pub const C0: f64 = 345.0;
/// Air density (kg/m³).
pub const RHO0: f64 = 1.1933;

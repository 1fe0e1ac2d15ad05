//! Cross-sections, duct descriptions and tagged tetrahedral meshes.

mod generate;
mod io;
pub(crate) mod mesh;
mod section;

pub use generate::{generate_duct_mesh, generate_radiation_domain, generate_tract_mesh, BoxDims};
pub use io::{
    parse_area_function, parse_mesh, read_area_function, read_mesh, write_area_function, write_mesh,
};
pub use mesh::{Admittance, Facet, FacetTag, Mesh, Region};
pub use section::{make_elliptical_section, AreaFunction, DuctSpec, EllipseSection, Termination};

/// Kept as an alias so callers can name the wall-admittance reference explicitly.
pub type WallAdmittance = Admittance;

use std::f64::consts::PI;

use crate::{Error, Result};

/// Elliptical cross-section described by its semi-axes, with `b <= a`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipseSection {
    a: f64,
    b: f64,
}

impl EllipseSection {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite()) || b <= 0.0 || b > a {
            return Err(Error::Domain(format!(
                "semi-axes must satisfy 0 < b <= a, got a = {a}, b = {b}"
            )));
        }
        Ok(Self { a, b })
    }

    pub fn circular(radius: f64) -> Result<Self> {
        Self::new(radius, radius)
    }

    /// Major semi-axis (m).
    pub fn a(&self) -> f64 {
        self.a
    }

    /// Minor semi-axis (m).
    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn eccentricity(&self) -> f64 {
        let r = self.b / self.a;
        (1.0 - r * r).max(0.0).sqrt()
    }

    pub fn area(&self) -> f64 {
        PI * self.a * self.b
    }

    /// Focal distance `a·e`.
    pub fn focal_distance(&self) -> f64 {
        self.a * self.eccentricity()
    }

    pub fn is_circular(&self) -> bool {
        self.a == self.b
    }
}

/// Section of the given area reshaped to eccentricity `e`; the area is preserved.
pub fn make_elliptical_section(area: f64, eccentricity: f64) -> Result<EllipseSection> {
    if !(area > 0.0) || !area.is_finite() {
        return Err(Error::Domain(format!("area must be positive, got {area}")));
    }
    if !(0.0..1.0).contains(&eccentricity) {
        return Err(Error::Domain(format!(
            "eccentricity must lie in [0, 1), got {eccentricity}"
        )));
    }
    let ratio = (1.0 - eccentricity * eccentricity).sqrt();
    let a = (area / (PI * ratio)).sqrt();
    let b = if eccentricity == 0.0 {
        a
    } else {
        area / (PI * a)
    };
    // Rounding can push b a hair above a for tiny eccentricities.
    EllipseSection::new(a, b.min(a))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    ClosedRigid,
    OpenFlanged,
    Coupled,
}

impl std::str::FromStr for Termination {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "closed_rigid" | "closed" => Ok(Termination::ClosedRigid),
            "open_flanged" | "open" => Ok(Termination::OpenFlanged),
            "coupled" => Ok(Termination::Coupled),
            other => Err(Error::Config(format!("unknown termination '{other}'"))),
        }
    }
}

/// Straight impedance duct along +z, entrance at z = 0.
#[derive(Debug, Clone, Copy)]
pub struct DuctSpec {
    pub section: EllipseSection,
    pub length: f64,
    /// Target element size (m).
    pub h: f64,
    pub termination: Termination,
}

impl DuctSpec {
    /// Non-fatal advisories about the duct proportions.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.length < 3.0 * self.section.a() {
            out.push(format!(
                "duct length {} m is shorter than three major semi-axes ({} m)",
                self.length,
                3.0 * self.section.a()
            ));
        }
        out
    }
}

/// Piecewise-linear area function along the axis.
#[derive(Debug, Clone, PartialEq)]
pub struct AreaFunction {
    /// `(z, area, eccentricity)` stations, z strictly increasing.
    stations: Vec<(f64, f64, f64)>,
}

impl AreaFunction {
    pub fn new(stations: Vec<(f64, f64, f64)>) -> Result<Self> {
        if stations.len() < 2 {
            return Err(Error::Domain(
                "an area function needs at least two stations".into(),
            ));
        }
        for w in stations.windows(2) {
            if !(w[1].0 > w[0].0) {
                return Err(Error::parse(
                    0,
                    format!("z must be strictly increasing ({} then {})", w[0].0, w[1].0),
                ));
            }
        }
        for &(z, area, e) in &stations {
            if !(area > 0.0) {
                return Err(Error::Domain(format!("area at z = {z} must be positive")));
            }
            if !(0.0..1.0).contains(&e) {
                return Err(Error::Domain(format!(
                    "eccentricity at z = {z} outside [0, 1)"
                )));
            }
        }
        Ok(Self { stations })
    }

    /// Same eccentricity at every station.
    pub fn with_eccentricity(points: &[(f64, f64)], e: f64) -> Result<Self> {
        Self::new(points.iter().map(|&(z, a)| (z, a, e)).collect())
    }

    pub fn stations(&self) -> &[(f64, f64, f64)] {
        &self.stations
    }

    pub fn z_start(&self) -> f64 {
        self.stations[0].0
    }

    pub fn z_end(&self) -> f64 {
        self.stations[self.stations.len() - 1].0
    }

    /// Linearly interpolated `(area, eccentricity)`; clamps outside the table.
    pub fn at(&self, z: f64) -> (f64, f64) {
        let s = &self.stations;
        if z <= s[0].0 {
            return (s[0].1, s[0].2);
        }
        for w in s.windows(2) {
            if z <= w[1].0 {
                let t = (z - w[0].0) / (w[1].0 - w[0].0);
                return (
                    w[0].1 + t * (w[1].1 - w[0].1),
                    w[0].2 + t * (w[1].2 - w[0].2),
                );
            }
        }
        let last = s[s.len() - 1];
        (last.1, last.2)
    }

    pub fn section_at(&self, z: f64) -> Result<EllipseSection> {
        let (area, e) = self.at(z);
        make_elliptical_section(area, e)
    }
}

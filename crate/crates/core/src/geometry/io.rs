//! Line-oriented mesh format and area-function CSV.
//!
//! ```text
//! meshv1 <n_nodes> <n_tets> <n_facets>
//! n <x> <y> <z>
//! t <i0> <i1> <i2> <i3> <INTERIOR|PML>
//! f <i0> <i1> <i2> <SOURCE|LOSSY_WALL|RIGID|OUTER> [<mu>|mu_z|mu_w]
//! ```
//!
//! Coordinates are written with the shortest representation that parses back
//! to the same `f64`, so a write/read cycle is bitwise lossless.

use std::io::{BufWriter, Write};
use std::path::Path;

use super::mesh::{Admittance, Facet, FacetTag, Mesh, Region};
use super::section::AreaFunction;
use crate::{Error, Result};

pub(crate) fn write_mesh_to(mesh: &Mesh, out: &mut impl Write) -> std::io::Result<()> {
    writeln!(
        out,
        "meshv1 {} {} {}",
        mesh.nodes.len(),
        mesh.tets.len(),
        mesh.facets.len()
    )?;
    for p in &mesh.nodes {
        writeln!(out, "n {:?} {:?} {:?}", p[0], p[1], p[2])?;
    }
    for (t, r) in mesh.tets.iter().zip(&mesh.regions) {
        writeln!(out, "t {} {} {} {} {}", t[0], t[1], t[2], t[3], r.as_str())?;
    }
    for f in &mesh.facets {
        let [a, b, c] = f.nodes;
        match f.tag {
            FacetTag::LossyWall(adm) => {
                let mu = match adm {
                    Admittance::DuctWall => "mu_z".to_string(),
                    Admittance::TractWall => "mu_w".to_string(),
                    Admittance::Value(v) => format!("{v:?}"),
                };
                writeln!(out, "f {a} {b} {c} LOSSY_WALL {mu}")?
            }
            tag => writeln!(out, "f {a} {b} {c} {}", tag.name())?,
        }
    }
    Ok(())
}

pub fn write_mesh(mesh: &Mesh, path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(std::fs::File::create(path)?);
    write_mesh_to(mesh, &mut w)?;
    w.flush()?;
    Ok(())
}

fn field<'a, T: std::str::FromStr>(
    tok: &mut impl Iterator<Item = &'a str>,
    line: usize,
    what: &str,
) -> Result<T> {
    let s = tok
        .next()
        .ok_or_else(|| Error::parse(line, format!("missing {what}")))?;
    s.parse()
        .map_err(|_| Error::parse(line, format!("invalid {what} '{s}'")))
}

pub fn parse_mesh(text: &str) -> Result<Mesh> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());
    let (hline, header) = lines
        .next()
        .ok_or_else(|| Error::parse(1, "empty mesh file"))?;
    let mut tok = header.split_whitespace();
    if tok.next() != Some("meshv1") {
        return Err(Error::parse(hline, "expected 'meshv1' header"));
    }
    let n_nodes: usize = field(&mut tok, hline, "node count")?;
    let n_tets: usize = field(&mut tok, hline, "tet count")?;
    let n_facets: usize = field(&mut tok, hline, "facet count")?;

    let mut mesh = Mesh {
        nodes: Vec::with_capacity(n_nodes),
        tets: Vec::with_capacity(n_tets),
        regions: Vec::with_capacity(n_tets),
        facets: Vec::with_capacity(n_facets),
    };
    let node_index = |tok: &mut std::str::SplitWhitespace<'_>, line: usize| -> Result<usize> {
        let i: usize = field(tok, line, "node index")?;
        if i >= n_nodes {
            return Err(Error::parse(line, format!("node index {i} out of range")));
        }
        Ok(i)
    };
    for (line, l) in lines {
        let mut tok = l.split_whitespace();
        match tok.next() {
            Some("n") => {
                if mesh.nodes.len() == n_nodes {
                    return Err(Error::parse(line, "more nodes than declared"));
                }
                let x = field(&mut tok, line, "x")?;
                let y = field(&mut tok, line, "y")?;
                let z = field(&mut tok, line, "z")?;
                mesh.nodes.push([x, y, z]);
            }
            Some("t") => {
                let mut t = [0usize; 4];
                for slot in &mut t {
                    *slot = node_index(&mut tok, line)?;
                }
                let region = match tok.next() {
                    Some("INTERIOR") => Region::Interior,
                    Some("PML") => Region::Pml,
                    other => return Err(Error::parse(line, format!("invalid region {other:?}"))),
                };
                mesh.tets.push(t);
                mesh.regions.push(region);
            }
            Some("f") => {
                let mut f = [0usize; 3];
                for slot in &mut f {
                    *slot = node_index(&mut tok, line)?;
                }
                let tag = match tok.next() {
                    Some("SOURCE") => FacetTag::Source,
                    Some("RIGID") => FacetTag::Rigid,
                    Some("OUTER") => FacetTag::Outer,
                    Some("LOSSY_WALL") => FacetTag::LossyWall(match tok.next() {
                        None | Some("mu_z") => Admittance::DuctWall,
                        Some("mu_w") => Admittance::TractWall,
                        Some(v) => {
                            let mu: f64 = v
                                .parse()
                                .map_err(|_| Error::parse(line, format!("invalid mu '{v}'")))?;
                            Admittance::Value(mu)
                        }
                    }),
                    other => {
                        return Err(Error::parse(line, format!("invalid facet tag {other:?}")))
                    }
                };
                mesh.facets.push(Facet { nodes: f, tag });
            }
            Some(other) => return Err(Error::parse(line, format!("unknown record '{other}'"))),
            None => unreachable!(),
        }
        if tok.next().is_some() {
            return Err(Error::parse(line, "trailing tokens"));
        }
    }
    if mesh.nodes.len() != n_nodes || mesh.tets.len() != n_tets || mesh.facets.len() != n_facets {
        return Err(Error::parse(
            0,
            format!(
                "header declares {n_nodes}/{n_tets}/{n_facets} nodes/tets/facets, found {}/{}/{}",
                mesh.nodes.len(),
                mesh.tets.len(),
                mesh.facets.len()
            ),
        ));
    }
    Ok(mesh)
}

pub fn read_mesh(path: impl AsRef<Path>) -> Result<Mesh> {
    parse_mesh(&std::fs::read_to_string(path)?)
}

pub fn parse_area_function(text: &str) -> Result<AreaFunction> {
    let mut rows = Vec::new();
    let mut header_seen = false;
    for (i, l) in text.lines().enumerate() {
        let line = i + 1;
        let l = l.trim();
        if l.is_empty() {
            continue;
        }
        if !header_seen {
            let cols: Vec<&str> = l.split(',').map(str::trim).collect();
            if cols != ["z_m", "area_m2", "eccentricity"] {
                return Err(Error::parse(
                    line,
                    "expected header 'z_m,area_m2,eccentricity'",
                ));
            }
            header_seen = true;
            continue;
        }
        let cols: Vec<&str> = l.split(',').map(str::trim).collect();
        if cols.len() != 3 {
            return Err(Error::parse(line, "expected three columns"));
        }
        let num = |s: &str, what: &str| -> Result<f64> {
            s.parse()
                .map_err(|_| Error::parse(line, format!("invalid {what} '{s}'")))
        };
        let row = (
            num(cols[0], "z")?,
            num(cols[1], "area")?,
            num(cols[2], "eccentricity")?,
        );
        if let Some(&(z_prev, _, _)) = rows.last() {
            if !(row.0 > z_prev) {
                return Err(Error::parse(line, "z must be strictly increasing"));
            }
        }
        rows.push(row);
    }
    if !header_seen {
        return Err(Error::parse(1, "empty area-function file"));
    }
    AreaFunction::new(rows)
}

pub fn read_area_function(path: impl AsRef<Path>) -> Result<AreaFunction> {
    parse_area_function(&std::fs::read_to_string(path)?)
}

pub fn write_area_function(af: &AreaFunction, path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(std::fs::File::create(path)?);
    writeln!(w, "z_m,area_m2,eccentricity")?;
    for (z, a, e) in af.stations() {
        writeln!(w, "{z:?},{a:?},{e:?}")?;
    }
    w.flush()?;
    Ok(())
}

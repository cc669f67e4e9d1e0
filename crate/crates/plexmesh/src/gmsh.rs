//! Reader for Gmsh MSH 2.2 ASCII files.
//!
//! Supports `$MeshFormat`, `$Nodes`, and `$Elements` sections with element
//! types 1 (2-node line), 2 (3-node triangle), 4 (4-node tetrahedron), and
//! 15 (point); unknown sections are skipped, any other element type is
//! rejected. Topology is interpolated from the cell–vertex incidence, and
//! the physical tag (first tag) of each facet-dimension element — lines for
//! triangle meshes, triangles for tetrahedral meshes — is recorded in the
//! mesh's `boundary` label. Newer MSH versions and binary files are rejected
//! loudly rather than half-read.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use crate::error::{MeshError, Result};
use crate::mesh::{interpolate, MeshGeometry, BOUNDARY_LABEL};
use crate::plex::{Plex, Point};

/// One parsed element line.
struct MshElement {
    ty: u32,
    physical: Option<i32>,
    nodes: Vec<u64>,
}

/// Reads an MSH 2.2 ASCII stream into an interpolated mesh.
///
/// # Errors
///
/// [`MeshError::Format`] for version headers other than 2.2, element types
/// outside the supported set (naming the type code), or malformed syntax;
/// [`MeshError::Integrity`] when an element references an undefined node.
pub fn read_gmsh(reader: impl BufRead) -> Result<MeshGeometry> {
    let mut lines = reader.lines();
    let mut next_line = move || -> Result<Option<String>> {
        match lines.next() {
            Some(line) => Ok(Some(line?.trim_end_matches('\r').to_string())),
            None => Ok(None),
        }
    };

    let mut nodes: Vec<(u64, [f64; 3])> = Vec::new();
    let mut elements: Vec<MshElement> = Vec::new();
    let mut saw_format = false;

    while let Some(line) = next_line()? {
        let header = line.trim();
        if header.is_empty() {
            continue;
        }
        let Some(section) = header.strip_prefix('$') else {
            return Err(MeshError::Format(format!(
                "expected a section header, found {header:?}"
            )));
        };
        match section {
            "MeshFormat" => {
                let body = expect_line(&mut next_line, "$MeshFormat")?;
                let version = body.split_whitespace().next().unwrap_or("");
                if version != "2.2" {
                    return Err(MeshError::Format(format!(
                        "unsupported MSH version {version:?}, expected 2.2"
                    )));
                }
                expect_end(&mut next_line, "MeshFormat")?;
                saw_format = true;
            }
            "Nodes" => {
                let count = parse_count(&expect_line(&mut next_line, "$Nodes")?)?;
                for _ in 0..count {
                    let body = expect_line(&mut next_line, "$Nodes")?;
                    let tok: Vec<&str> = body.split_whitespace().collect();
                    if tok.len() != 4 {
                        return Err(MeshError::Format(format!("malformed node line {body:?}")));
                    }
                    let id = parse_u64(tok[0])?;
                    let xyz = [parse_f64(tok[1])?, parse_f64(tok[2])?, parse_f64(tok[3])?];
                    nodes.push((id, xyz));
                }
                expect_end(&mut next_line, "Nodes")?;
            }
            "Elements" => {
                let count = parse_count(&expect_line(&mut next_line, "$Elements")?)?;
                for _ in 0..count {
                    let body = expect_line(&mut next_line, "$Elements")?;
                    elements.push(parse_element(&body)?);
                }
                expect_end(&mut next_line, "Elements")?;
            }
            other => {
                // Skip unknown sections ($PhysicalNames, $Periodic, ...).
                let terminator = format!("$End{other}");
                loop {
                    match next_line()? {
                        Some(l) if l.trim() == terminator => break,
                        Some(_) => continue,
                        None => {
                            return Err(MeshError::Format(format!(
                                "unexpected end of file inside ${other}"
                            )));
                        }
                    }
                }
            }
        }
    }

    if !saw_format {
        return Err(MeshError::Format("missing $MeshFormat section".into()));
    }
    build_mesh(nodes, elements)
}

/// Reads an MSH file from disk; see [`read_gmsh`].
pub fn read_gmsh_file(path: impl AsRef<Path>) -> Result<MeshGeometry> {
    read_gmsh(BufReader::new(File::open(path)?))
}

fn expect_line(
    next_line: &mut impl FnMut() -> Result<Option<String>>,
    section: &str,
) -> Result<String> {
    next_line()?.ok_or_else(|| {
        MeshError::Format(format!("unexpected end of file inside {section} section"))
    })
}

fn expect_end(
    next_line: &mut impl FnMut() -> Result<Option<String>>,
    section: &str,
) -> Result<()> {
    let line = expect_line(next_line, section)?;
    if line.trim() == format!("$End{section}") {
        Ok(())
    } else {
        Err(MeshError::Format(format!(
            "expected $End{section}, found {line:?}"
        )))
    }
}

fn parse_count(line: &str) -> Result<usize> {
    line.trim()
        .parse::<usize>()
        .map_err(|_| MeshError::Format(format!("malformed count line {line:?}")))
}

fn parse_u64(tok: &str) -> Result<u64> {
    tok.parse::<u64>()
        .map_err(|_| MeshError::Format(format!("malformed integer {tok:?}")))
}

fn parse_f64(tok: &str) -> Result<f64> {
    tok.parse::<f64>()
        .map_err(|_| MeshError::Format(format!("malformed number {tok:?}")))
}

fn parse_element(body: &str) -> Result<MshElement> {
    let tok: Vec<&str> = body.split_whitespace().collect();
    if tok.len() < 3 {
        return Err(MeshError::Format(format!("malformed element line {body:?}")));
    }
    let ty = parse_u64(tok[1])? as u32;
    let nnodes = match ty {
        1 => 2,
        2 => 3,
        4 => 4,
        15 => 1,
        other => {
            return Err(MeshError::Format(format!(
                "unsupported element type {other}"
            )));
        }
    };
    let ntags = parse_u64(tok[2])? as usize;
    if tok.len() != 3 + ntags + nnodes {
        return Err(MeshError::Format(format!(
            "element line {body:?} has {} fields, expected {}",
            tok.len(),
            3 + ntags + nnodes
        )));
    }
    let physical = if ntags > 0 {
        Some(tok[3].parse::<i32>().map_err(|_| {
            MeshError::Format(format!("malformed physical tag {:?}", tok[3]))
        })?)
    } else {
        None
    };
    let nodes = tok[3 + ntags..]
        .iter()
        .map(|t| parse_u64(t))
        .collect::<Result<Vec<u64>>>()?;
    Ok(MshElement {
        ty,
        physical,
        nodes,
    })
}

fn build_mesh(
    mut nodes: Vec<(u64, [f64; 3])>,
    elements: Vec<MshElement>,
) -> Result<MeshGeometry> {
    nodes.sort_by_key(|&(id, _)| id);
    let mut node_index: HashMap<u64, usize> = HashMap::with_capacity(nodes.len());
    for (i, &(id, _)) in nodes.iter().enumerate() {
        if node_index.insert(id, i).is_some() {
            return Err(MeshError::Integrity(format!("duplicate node id {id}")));
        }
    }

    let dim = if elements.iter().any(|e| e.ty == 4) {
        3
    } else if elements.iter().any(|e| e.ty == 2) {
        2
    } else {
        return Err(MeshError::Format(
            "mesh contains no triangle or tetrahedron elements".into(),
        ));
    };
    let cell_ty = if dim == 3 { 4 } else { 2 };
    let facet_ty = if dim == 3 { 2 } else { 1 };

    let ncells = elements.iter().filter(|e| e.ty == cell_ty).count();
    let nverts = nodes.len();
    let resolve = |e: &MshElement| -> Result<Vec<Point>> {
        e.nodes
            .iter()
            .map(|n| {
                node_index
                    .get(n)
                    .map(|&i| ncells + i)
                    .ok_or_else(|| {
                        MeshError::Integrity(format!("element references undefined node {n}"))
                    })
            })
            .collect()
    };

    let mut cell_verts: Vec<Vec<Point>> = Vec::with_capacity(ncells);
    for e in elements.iter().filter(|e| e.ty == cell_ty) {
        cell_verts.push(resolve(e)?);
    }
    let interp = interpolate(dim, ncells, nverts, &cell_verts)?;
    let mut plex = Plex::build_from_cones(interp.chart_size, interp.cones)?;

    // Physical tags of facet-dimension elements land in the boundary label;
    // point elements and (in 3D) lines carry no facet information here.
    for e in elements.iter().filter(|e| e.ty == facet_ty) {
        let Some(tag) = e.physical else { continue };
        let mut key = resolve(e)?;
        key.sort_unstable();
        let &facet = interp.facet_by_key.get(&key).ok_or_else(|| {
            MeshError::Integrity(format!(
                "boundary element with nodes {:?} does not match any mesh facet",
                e.nodes
            ))
        })?;
        plex.label_set(BOUNDARY_LABEL, tag, facet)?;
    }
    // Nodes must be resolvable even for element types we do not label.
    for e in elements.iter().filter(|e| e.ty != cell_ty && e.ty != facet_ty) {
        resolve(e)?;
    }

    let coordinates = nodes.into_iter().map(|(_, xyz)| xyz).collect();
    Ok(MeshGeometry {
        plex,
        coordinates,
        dim,
    })
}

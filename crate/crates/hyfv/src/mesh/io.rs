//! Plain-text mesh format.
//!
//! Layout (ASCII, all indices 0-based, floats with 17 significant digits):
//!
//! ```text
//! dim nv ne nk
//! <nv vertex lines: x [y]>
//! <ne face lines: v0 [v1] owner neighbor|-1>
//! <nk cell lines: count v0 v1 ...>
//! ```

use super::{Face, PolyMesh};
use crate::algebra::Vec2;
use crate::{Error, Result};
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

pub fn write_mesh(mesh: &PolyMesh, path: &Path) -> Result<()> {
    let mut file = std::fs::File::create(path)?;
    write_mesh_to(mesh, &mut file)
}

pub fn write_mesh_to(mesh: &PolyMesh, out: &mut dyn Write) -> Result<()> {
    writeln!(
        out,
        "{} {} {} {}",
        mesh.dim(),
        mesh.n_vertices(),
        mesh.n_faces(),
        mesh.n_cells()
    )?;
    for v in mesh.vertices() {
        if mesh.dim() == 1 {
            writeln!(out, "{:.17e}", v.x)?;
        } else {
            writeln!(out, "{:.17e} {:.17e}", v.x, v.y)?;
        }
    }
    for face in mesh.faces() {
        let neighbor = face.neighbor.map(|n| n as i64).unwrap_or(-1);
        match face.vertices.1 {
            Some(v1) => writeln!(
                out,
                "{} {} {} {}",
                face.vertices.0, v1, face.owner, neighbor
            )?,
            None => writeln!(out, "{} {} {}", face.vertices.0, face.owner, neighbor)?,
        }
    }
    for cell in mesh.cells() {
        let ids: Vec<String> = cell.iter().map(|v| v.to_string()).collect();
        writeln!(out, "{} {}", cell.len(), ids.join(" "))?;
    }
    Ok(())
}

pub fn read_mesh(path: &Path) -> Result<PolyMesh> {
    let file = std::fs::File::open(path)?;
    read_mesh_from(&mut BufReader::new(file))
}

pub fn read_mesh_from(input: &mut dyn Read) -> Result<PolyMesh> {
    let reader = BufReader::new(input);
    let mut lines = reader.lines();
    let mut next_line = || -> Result<String> {
        loop {
            match lines.next() {
                Some(line) => {
                    let line = line?;
                    if !line.trim().is_empty() {
                        return Ok(line);
                    }
                }
                None => return Err(Error::InvalidInput("unexpected end of mesh file".into())),
            }
        }
    };

    let header = next_line()?;
    let head: Vec<usize> = parse_fields(&header)?;
    if head.len() != 4 {
        return Err(Error::InvalidInput(
            "mesh header must be `dim nv ne nk`".into(),
        ));
    }
    let (dim, nv, ne, nk) = (head[0], head[1], head[2], head[3]);

    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let line = next_line()?;
        let xs: Vec<f64> = parse_fields(&line)?;
        let v = match (dim, xs.len()) {
            (1, 1) => Vec2::new(xs[0], 0.0),
            (2, 2) => Vec2::new(xs[0], xs[1]),
            _ => return Err(Error::InvalidInput(format!("bad vertex line `{line}`"))),
        };
        vertices.push(v);
    }

    // Face lines are validated against the derived connectivity below.
    let mut file_faces = Vec::with_capacity(ne);
    for _ in 0..ne {
        let line = next_line()?;
        let xs: Vec<i64> = parse_fields(&line)?;
        let expected = if dim == 1 { 3 } else { 4 };
        if xs.len() != expected {
            return Err(Error::InvalidInput(format!("bad face line `{line}`")));
        }
        file_faces.push(xs);
    }

    let mut cells = Vec::with_capacity(nk);
    for _ in 0..nk {
        let line = next_line()?;
        let xs: Vec<usize> = parse_fields(&line)?;
        if xs.is_empty() || xs.len() != xs[0] + 1 {
            return Err(Error::InvalidInput(format!("bad cell line `{line}`")));
        }
        cells.push(xs[1..].to_vec());
    }

    let mesh = PolyMesh::from_cells(dim, vertices, cells)?;
    if mesh.n_faces() != ne {
        return Err(Error::InvalidInput(format!(
            "face count mismatch: header says {ne}, connectivity gives {}",
            mesh.n_faces()
        )));
    }
    // Cross-check the stated owner/neighbor pairs.
    for xs in &file_faces {
        let (v0, rest) = (xs[0] as usize, &xs[1..]);
        let (v1, owner, neighbor) = if dim == 1 {
            (None, rest[0], rest[1])
        } else {
            (Some(rest[0] as usize), rest[1], rest[2])
        };
        let found = mesh
            .faces()
            .iter()
            .any(|f: &Face| same_face_vertices(f, v0, v1) && cells_match(f, owner, neighbor));
        if !found {
            return Err(Error::InvalidInput(format!(
                "face ({v0}, {v1:?}) with cells ({owner}, {neighbor}) not found in connectivity"
            )));
        }
    }
    Ok(mesh)
}

fn same_face_vertices(f: &Face, v0: usize, v1: Option<usize>) -> bool {
    match (f.vertices.1, v1) {
        (None, None) => f.vertices.0 == v0,
        (Some(a), Some(b)) => (f.vertices.0 == v0 && a == b) || (f.vertices.0 == b && a == v0),
        _ => false,
    }
}

fn cells_match(f: &Face, owner: i64, neighbor: i64) -> bool {
    let fo = f.owner as i64;
    let fn_ = f.neighbor.map(|n| n as i64).unwrap_or(-1);
    (fo == owner && fn_ == neighbor) || (fo == neighbor && fn_ == owner)
}

fn parse_fields<T: std::str::FromStr>(line: &str) -> Result<Vec<T>> {
    line.split_whitespace()
        .map(|tok| {
            tok.parse::<T>()
                .map_err(|_| Error::InvalidInput(format!("cannot parse `{tok}`")))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_cartesian, build_interval, build_triangular, Rect};

    fn roundtrip(mesh: &PolyMesh) -> PolyMesh {
        let mut buf = Vec::new();
        write_mesh_to(mesh, &mut buf).unwrap();
        read_mesh_from(&mut buf.as_slice()).unwrap()
    }

    #[test]
    fn roundtrip_preserves_geometry() {
        for mesh in [
            build_cartesian(3, 2, Rect::unit()).unwrap(),
            build_triangular(2, 2, Rect::unit()).unwrap(),
            build_interval(5, (0.0, 2.5)).unwrap(),
        ] {
            let back = roundtrip(&mesh);
            assert_eq!(back.dim(), mesh.dim());
            assert_eq!(back.n_cells(), mesh.n_cells());
            assert_eq!(back.n_faces(), mesh.n_faces());
            for (a, b) in mesh.vertices().iter().zip(back.vertices()) {
                assert_eq!(a, b, "coordinates must survive the text format bit-exactly");
            }
        }
    }

    #[test]
    fn rejects_truncated_file() {
        let mesh = build_cartesian(2, 2, Rect::unit()).unwrap();
        let mut buf = Vec::new();
        write_mesh_to(&mesh, &mut buf).unwrap();
        let cut = &buf[..buf.len() / 2];
        assert!(read_mesh_from(&mut &cut[..]).is_err());
    }
}

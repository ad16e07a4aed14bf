//! Legacy ASCII VTK output: unstructured grid with polygon (2D) or line
//! (1D) cells, the solution as a cell scalar and its consistent gradient
//! as a cell vector.

use hyfv::mesh::{GeometryCache, PolyMesh};
use hyfv::space::{consistent_gradient, HybridField};
use hyfv::Result;
use std::io::Write;

pub fn write_vtk(
    mesh: &PolyMesh,
    geom: &GeometryCache,
    field: &HybridField,
    title: &str,
    out: &mut dyn Write,
) -> Result<()> {
    writeln!(out, "# vtk DataFile Version 3.0")?;
    writeln!(out, "{title}")?;
    writeln!(out, "ASCII")?;
    writeln!(out, "DATASET UNSTRUCTURED_GRID")?;

    writeln!(out, "POINTS {} double", mesh.n_vertices())?;
    for v in mesh.vertices() {
        writeln!(out, "{:.17e} {:.17e} 0.0", v.x, v.y)?;
    }

    let total: usize = mesh.cells().iter().map(|c| c.len() + 1).sum();
    writeln!(out, "CELLS {} {}", mesh.n_cells(), total)?;
    for cell in mesh.cells() {
        let ids: Vec<String> = cell.iter().map(|v| v.to_string()).collect();
        writeln!(out, "{} {}", cell.len(), ids.join(" "))?;
    }
    writeln!(out, "CELL_TYPES {}", mesh.n_cells())?;
    let cell_type = if mesh.dim() == 1 { 3 } else { 7 }; // VTK_LINE | VTK_POLYGON
    for _ in 0..mesh.n_cells() {
        writeln!(out, "{cell_type}")?;
    }

    writeln!(out, "CELL_DATA {}", mesh.n_cells())?;
    writeln!(out, "SCALARS c double 1")?;
    writeln!(out, "LOOKUP_TABLE default")?;
    for v in &field.cell {
        writeln!(out, "{v:.17e}")?;
    }
    writeln!(out, "VECTORS grad_c double")?;
    for g in consistent_gradient(mesh, geom, field) {
        writeln!(out, "{:.17e} {:.17e} 0.0", g.x, g.y)?;
    }
    Ok(())
}

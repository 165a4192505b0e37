//! Wavefront OBJ export with a JSON label sidecar, CSV samples, and a reader for
//! round-trip checks.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use nalgebra::Vector3;
use serde::Serialize;

use super::mesh::SurfaceMesh;
use crate::{Error, Result};

/// Path of the label sidecar written next to an OBJ file.
pub fn sidecar_path(obj: &Path) -> PathBuf {
    obj.with_extension("labels.json")
}

/// Write `v`, `vn` and `f` records plus the label sidecar.
pub fn export_obj(mesh: &SurfaceMesh, path: &Path) -> Result<()> {
    if mesh.vertices.is_empty() || mesh.faces.is_empty() {
        return Err(Error::MeshIntegrity("refusing to export an empty mesh".into()));
    }
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "# layers {} m {} resolution {}", mesh.n_layers, mesh.m, mesh.resolution)?;
    for p in &mesh.vertices {
        writeln!(w, "v {:.17e} {:.17e} {:.17e}", p.x, p.y, p.z)?;
    }
    for n in &mesh.normals {
        writeln!(w, "vn {:.17e} {:.17e} {:.17e}", n.x, n.y, n.z)?;
    }
    for f in &mesh.faces {
        let (a, b, c) = (f[0] + 1, f[1] + 1, f[2] + 1);
        writeln!(w, "f {a}//{a} {b}//{b} {c}//{c}")?;
    }
    w.flush()?;
    let side = BufWriter::new(File::create(sidecar_path(path))?);
    serde_json::to_writer(side, &mesh.labels).map_err(|e| Error::Io(e.to_string()))?;
    Ok(())
}

#[derive(Debug, Clone, Default)]
pub struct ObjData {
    pub vertices: Vec<Vector3<f64>>,
    pub normals: Vec<Vector3<f64>>,
    pub faces: Vec<[usize; 3]>,
}

/// Read the triangle subset of an OBJ file (0-based face indices).
pub fn read_obj(path: &Path) -> Result<ObjData> {
    let mut out = ObjData::default();
    let bad = |line: &str| Error::Io(format!("malformed OBJ record: {line}"));
    for line in BufReader::new(File::open(path)?).lines() {
        let line = line?;
        let mut it = line.split_whitespace();
        match it.next() {
            Some(tag @ ("v" | "vn")) => {
                let xs: Vec<f64> = it.map(|s| s.parse::<f64>()).collect::<std::result::Result<_, _>>().map_err(|_| bad(&line))?;
                if xs.len() < 3 {
                    return Err(bad(&line));
                }
                let p = Vector3::new(xs[0], xs[1], xs[2]);
                if tag == "v" {
                    out.vertices.push(p)
                } else {
                    out.normals.push(p)
                }
            }
            Some("f") => {
                let ids: Vec<usize> = it
                    .map(|s| s.split('/').next().unwrap_or("").parse::<usize>())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|_| bad(&line))?;
                if ids.len() != 3 || ids.contains(&0) {
                    return Err(bad(&line));
                }
                out.faces.push([ids[0] - 1, ids[1] - 1, ids[2] - 1]);
            }
            _ => {}
        }
    }
    Ok(out)
}

/// CSV of `(layer, sigma, theta, omega)` for every graph vertex.
pub fn export_patch_csv(mesh: &SurfaceMesh, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "vertex,layer,sigma,theta,omega")?;
    for (v, l) in mesh.labels.iter().enumerate() {
        if let Some(p) = l.patch {
            writeln!(w, "{v},{},{:.17e},{:.17e},{:.17e}", l.layer, p.sigma, p.theta_global, p.omega)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Pretty-printed JSON report.
pub fn export_report<T: Serialize>(report: &T, path: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(report).map_err(|e| Error::Io(e.to_string()))?;
    std::fs::write(path, text + "\n")?;
    Ok(())
}

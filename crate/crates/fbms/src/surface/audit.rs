//! Audits of assembled meshes: boundary orthogonality, orbit closure under the
//! symmetry group, triangle self-intersections, seam continuity of `rho`, and the
//! per-vertex cokernel samples `w_i`, `wbar_i`.

use std::collections::HashMap;

use nalgebra::Vector3;
use serde::Serialize;

use super::mesh::{RegionKind, SurfaceMesh};
use super::{rho_from_distance, rho_catenoid, varpi_point, vbar_hat_laplacian, w_value};
use crate::symgroup::{NormalCharacter, PointIndex, SymmetryGroup};
use crate::{Error, Result};

#[derive(Debug, Clone, Serialize)]
pub struct BoundaryAudit {
    pub boundary_vertices: usize,
    /// Largest angle between the conormal and the radial direction.
    pub max_angle: f64,
    /// Largest `| |p| - 1 |` over boundary vertices.
    pub max_radius_error: f64,
}

/// Conormal angles at boundary vertices.
///
/// The boundary curve lies on the sphere, so the conormal is radial exactly when the
/// radial vector is tangent; the angle is therefore `asin |<n, p/|p|>|` with `n` the
/// analytic unit normal.
pub fn boundary_audit(mesh: &SurfaceMesh) -> BoundaryAudit {
    let mut out = BoundaryAudit { boundary_vertices: 0, max_angle: 0.0, max_radius_error: 0.0 };
    for ((p, n), l) in mesh.vertices.iter().zip(&mesh.normals).zip(&mesh.labels) {
        if !l.boundary {
            continue;
        }
        out.boundary_vertices += 1;
        let r = p.norm();
        out.max_radius_error = out.max_radius_error.max((r - 1.0).abs());
        out.max_angle = out.max_angle.max((n.dot(p) / r).abs().min(1.0).asin());
    }
    out
}

/// Conormal angle estimated from the mesh itself, on boundary edges longer than `min_len`.
///
/// Coarser than [`boundary_audit`]: it sees the chord error of the triangulation.
pub fn boundary_audit_faces(mesh: &SurfaceMesh, min_len: f64) -> f64 {
    let mut worst: f64 = 0.0;
    for f in &mesh.faces {
        for k in 0..3 {
            let (a, b, c) = (f[k], f[(k + 1) % 3], f[(k + 2) % 3]);
            if !(mesh.labels[a].boundary && mesh.labels[b].boundary) {
                continue;
            }
            let (pa, pb, pc) = (mesh.vertices[a], mesh.vertices[b], mesh.vertices[c]);
            let e = pb - pa;
            if e.norm() < min_len {
                continue;
            }
            let n = e.cross(&(pc - pa));
            // conormal: in the face plane, orthogonal to the edge, away from the third vertex
            let mut eta = n.cross(&e).normalize();
            if eta.dot(&(pc - pa)) > 0.0 {
                eta = -eta;
            }
            let mid = ((pa + pb) * 0.5).normalize();
            worst = worst.max(eta.dot(&mid).clamp(-1.0, 1.0).acos());
        }
    }
    worst
}

/// Hausdorff distance between the vertex set and its images under the group.
///
/// Distances are resolved up to `1e-6`; an image with no vertex that close reports infinity.
pub fn symmetry_audit(mesh: &SurfaceMesh, group: &SymmetryGroup) -> f64 {
    let index = PointIndex::new(&mesh.vertices, 1e-6);
    let mut worst: f64 = 0.0;
    for g in &group.elements {
        for p in &mesh.vertices {
            match index.nearest(&g.apply(p)) {
                Some((_, d)) => worst = worst.max(d),
                None => return f64::INFINITY,
            }
        }
    }
    worst
}

/// Sign character of `group` on the mesh, measured at a vertex of the bottom layer.
pub fn mesh_normal_character(mesh: &SurfaceMesh, group: &SymmetryGroup) -> Result<NormalCharacter> {
    let index = PointIndex::new(&mesh.vertices, 1e-7);
    let on_layer = |kind: RegionKind| mesh.labels.iter().position(|l| l.layer == 1 && l.kind == kind);
    let k = on_layer(RegionKind::FlatDisc)
        .or_else(|| on_layer(RegionKind::DiscGraph))
        .or_else(|| on_layer(RegionKind::Intermediate))
        .ok_or_else(|| Error::MeshIntegrity("no layer vertex on layer 1".into()))?;
    let normal_at = |q: &Vector3<f64>| index.nearest(q).map_or(Vector3::zeros(), |(j, _)| mesh.normals[j]);
    NormalCharacter::measure(group, &mesh.vertices[k], &mesh.normals[k], normal_at)
}

#[derive(Debug, Clone, Serialize)]
pub struct IntersectionReport {
    pub triangles: usize,
    pub pairs_tested: usize,
    pub intersecting_pairs: usize,
    pub first: Option<(usize, usize)>,
}

/// Triangle-triangle intersections between faces that share no vertex.
///
/// Broad phase is a loose hierarchical grid: each triangle is binned at the level whose
/// cell is at least its extent, and each pair is tested from the finer member.
pub fn self_intersections(mesh: &SurfaceMesh) -> IntersectionReport {
    let tris: Vec<[Vector3<f64>; 3]> =
        mesh.faces.iter().map(|f| [mesh.vertices[f[0]], mesh.vertices[f[1]], mesh.vertices[f[2]]]).collect();
    let (lo, hi): (Vec<Vector3<f64>>, Vec<Vector3<f64>>) = tris
        .iter()
        .map(|t| (t[0].inf(&t[1]).inf(&t[2]), t[0].sup(&t[1]).sup(&t[2])))
        .unzip();
    let base = 2.0;
    let level_of = |ext: f64| -> u32 {
        if ext <= 0.0 {
            return 60;
        }
        ((base / ext).log2().floor().max(0.0) as u32).min(60)
    };
    let cell = |l: u32| base / 2f64.powi(l as i32);
    let key = |p: &Vector3<f64>, c: f64| ((p.x / c).floor() as i64, (p.y / c).floor() as i64, (p.z / c).floor() as i64);
    let mut grid: HashMap<(u32, i64, i64, i64), Vec<usize>> = HashMap::new();
    let mut levels = Vec::with_capacity(tris.len());
    let mut used = std::collections::BTreeSet::new();
    for (i, (a, b)) in lo.iter().zip(&hi).enumerate() {
        let l = level_of((b - a).max());
        let (x, y, z) = key(a, cell(l));
        grid.entry((l, x, y, z)).or_default().push(i);
        levels.push(l);
        used.insert(l);
    }
    let mut report =
        IntersectionReport { triangles: tris.len(), pairs_tested: 0, intersecting_pairs: 0, first: None };
    for i in 0..tris.len() {
        let li = levels[i];
        for &l in used.range(..=li) {
            let c = cell(l);
            let (x0, y0, z0) = key(&(lo[i] - Vector3::repeat(c)), c);
            let (x1, y1, z1) = key(&hi[i], c);
            for x in x0..=x1 {
                for y in y0..=y1 {
                    for z in z0..=z1 {
                        let Some(list) = grid.get(&(l, x, y, z)) else { continue };
                        for &j in list {
                            if l == li && j <= i {
                                continue;
                            }
                            if (0..3).any(|k| lo[i][k] > hi[j][k] || lo[j][k] > hi[i][k]) {
                                continue;
                            }
                            let (fi, fj) = (&mesh.faces[i], &mesh.faces[j]);
                            if fi.iter().any(|v| fj.contains(v)) {
                                continue;
                            }
                            report.pairs_tested += 1;
                            if triangles_intersect(&tris[i], &tris[j]) {
                                report.intersecting_pairs += 1;
                                report.first.get_or_insert((i.min(j), i.max(j)));
                            }
                        }
                    }
                }
            }
        }
    }
    report
}

/// Separating-axis test for two triangles, including the coplanar case.
pub fn triangles_intersect(p: &[Vector3<f64>; 3], q: &[Vector3<f64>; 3]) -> bool {
    let ep = [p[1] - p[0], p[2] - p[1], p[0] - p[2]];
    let eq = [q[1] - q[0], q[2] - q[1], q[0] - q[2]];
    let np = ep[0].cross(&ep[1]);
    let nq = eq[0].cross(&eq[1]);
    let scale = ep.iter().chain(&eq).map(|e| e.norm()).fold(0.0, f64::max);
    let mut axes: Vec<Vector3<f64>> = vec![np, nq];
    for a in &ep {
        for b in &eq {
            axes.push(a.cross(b));
        }
    }
    for e in &ep {
        axes.push(np.cross(e));
    }
    for e in &eq {
        axes.push(nq.cross(e));
    }
    for axis in axes {
        let n = axis.norm();
        if n <= 1e-14 * scale * scale {
            continue;
        }
        let ax = axis / n;
        let proj = |t: &[Vector3<f64>; 3]| {
            let v = [t[0].dot(&ax), t[1].dot(&ax), t[2].dot(&ax)];
            (v[0].min(v[1]).min(v[2]), v[0].max(v[1]).max(v[2]))
        };
        let (a0, a1) = proj(p);
        let (b0, b1) = proj(q);
        // touching within rounding counts as separated
        if a1 <= b0 + 1e-12 * scale || b1 <= a0 + 1e-12 * scale {
            return false;
        }
    }
    true
}

/// Largest relative mismatch of `rho` between the catenoid and generic evaluators at
/// catenoid-labeled vertices adjacent to other labels.
pub fn rho_seam_audit(mesh: &SurfaceMesh) -> (usize, f64) {
    let mut seam = vec![false; mesh.vertices.len()];
    for f in &mesh.faces {
        let kinds = f.map(|v| mesh.labels[v].kind == RegionKind::Catenoid);
        if kinds.iter().any(|&k| k) && kinds.iter().any(|&k| !k) {
            for (&v, &k) in f.iter().zip(&kinds) {
                if k {
                    seam[v] = true;
                }
            }
        }
    }
    let mut count = 0;
    let mut worst: f64 = 0.0;
    for (v, l) in mesh.labels.iter().enumerate() {
        let (true, Some(c)) = (seam[v], l.catenoid) else { continue };
        let tau = c.r / c.t.cosh();
        let a = rho_catenoid(tau, c.t);
        let b = rho_from_distance(mesh.m, c.r);
        count += 1;
        worst = worst.max((a - b).abs() / a);
    }
    (count, worst)
}

fn varpi_of_vertex(mesh: &SurfaceMesh, v: usize) -> (f64, f64) {
    match mesh.labels[v].patch {
        Some(pc) => varpi_point(mesh.m, pc.sigma, pc.theta_global, pc.omega),
        None => (mesh.vertices[v].x, mesh.vertices[v].y),
    }
}

/// Samples of `w_i` at every vertex; zero off layer `i`.
pub fn cokernel_w(i: usize, mesh: &SurfaceMesh) -> Vec<f64> {
    (0..mesh.vertices.len())
        .map(|v| {
            if mesh.labels[v].layer != i {
                return 0.0;
            }
            let (x, y) = varpi_of_vertex(mesh, v);
            w_value(i, mesh.m, 1.0 - x.hypot(y))
        })
        .collect()
}

/// Samples of `wbar_i = rho^-2 (Laplacian of vbar-hat)(varpi)`; zero off layer `i`.
pub fn cokernel_wbar(i: usize, mesh: &SurfaceMesh) -> Vec<f64> {
    (0..mesh.vertices.len())
        .map(|v| {
            let l = &mesh.labels[v];
            if l.layer != i {
                return 0.0;
            }
            let (x, y) = varpi_of_vertex(mesh, v);
            vbar_hat_laplacian(mesh.m, x, y) / (l.rho * l.rho)
        })
        .collect()
}

use std::f64::consts::PI;

use fbms::balance::{derived_parameters, StackingParams};
use fbms::surface::*;
use fbms::symgroup::{standard_group, GroupKind};
use fbms::Error;

fn params(n: usize, m: usize) -> StackingParams {
    StackingParams::balanced(n, m).unwrap()
}

fn group_for(n: usize, m: usize) -> fbms::symgroup::SymmetryGroup {
    let kind = if n % 2 == 0 { GroupKind::Prismatic } else { GroupKind::Antiprismatic };
    standard_group(kind, m).unwrap()
}

#[test]
fn two_layer_mesh_basics() {
    let mesh = assemble_surface(&params(2, 10), 0.01).unwrap();
    let layers: std::collections::BTreeSet<usize> = mesh.labels.iter().map(|l| l.layer).collect();
    assert_eq!(layers.into_iter().collect::<Vec<_>>(), vec![1, 2]);
    let audit = boundary_audit(&mesh);
    eprintln!("{} vertices, {} faces, {audit:?}", mesh.n_vertices(), mesh.faces.len());
    assert!(audit.boundary_vertices > 0);
    assert!(audit.max_radius_error < 1e-9);
    assert!(audit.max_angle < 1e-3);
    assert!(mesh.vertices.iter().all(|p| p.norm() <= 1.0 + 1e-12));
    assert!(mesh.normals.iter().all(|n| (n.norm() - 1.0).abs() < 1e-12));
    assert!(mesh.is_consistently_oriented());
}

#[test]
fn mesh_is_a_closed_up_surface_with_expected_euler_characteristic() {
    for (n, m) in [(2, 10), (3, 8), (4, 8)] {
        let mesh = assemble_surface(&params(n, m), 0.01).unwrap();
        let mut edges = std::collections::HashMap::new();
        for f in &mesh.faces {
            for k in 0..3 {
                let (a, b) = (f[k].min(f[(k + 1) % 3]), f[k].max(f[(k + 1) % 3]));
                *edges.entry((a, b)).or_insert(0usize) += 1;
            }
        }
        assert!(edges.values().all(|&c| c <= 2), "non-manifold edge for ({n},{m})");
        let chi = mesh.n_vertices() as i64 - edges.len() as i64 + mesh.faces.len() as i64;
        assert_eq!(chi, m as i64 - (m as i64 - 1) * n as i64, "({n},{m})");
        // boundary edges all lie on the sphere
        for (&(a, b), &c) in &edges {
            if c == 1 {
                assert!(mesh.labels[a].boundary && mesh.labels[b].boundary);
            }
        }
        assert!(mesh.is_consistently_oriented(), "({n},{m})");
    }
}

#[test]
fn catenoid_labels_count_components() {
    let mesh = assemble_surface(&params(4, 8), 0.01).unwrap();
    assert_eq!(mesh.catenoid_components(), 24);
    let mesh = assemble_surface(&params(2, 10), 0.01).unwrap();
    assert_eq!(mesh.catenoid_components(), 10);
}

#[test]
fn adjacent_layer_axes_differ_by_pi_over_m() {
    let m = 8;
    let mesh = assemble_surface(&params(3, m), 0.01).unwrap();
    let mut axes = vec![std::collections::BTreeSet::new(); 3];
    for l in &mesh.labels {
        if let Some(c) = l.catenoid {
            axes[c.index].insert(c.axis);
        }
    }
    // axis j sits at (2j+1) pi/(2m); K_1 and K_2 alternate
    let a1: Vec<usize> = axes[1].iter().copied().collect();
    let a2: Vec<usize> = axes[2].iter().copied().collect();
    assert_eq!(a1.len(), m);
    assert_eq!(a2.len(), m);
    for (x, y) in a1.iter().zip(&a2) {
        assert_eq!(y - x, 1, "axes {a1:?} vs {a2:?}");
    }
}

#[test]
fn symmetry_orbit_closure() {
    for (n, m) in [(2, 10), (3, 8)] {
        let mesh = assemble_surface(&params(n, m), 0.01).unwrap();
        let h = symmetry_audit(&mesh, &group_for(n, m));
        assert!(h < 1e-9, "({n},{m}): {h}");
    }
}

#[test]
fn no_self_intersections_on_small_grid() {
    let mesh = assemble_surface(&params(2, 10), 0.01).unwrap();
    let r = self_intersections(&mesh);
    eprintln!("{r:?}");
    assert_eq!(r.intersecting_pairs, 0);
    assert!(r.pairs_tested > 0);
}

#[test]
fn bad_resolution_is_a_refinement_error() {
    for res in [0.0, -1.0, f64::NAN, 0.2] {
        assert!(matches!(assemble_surface(&params(2, 10), res), Err(Error::Refinement(_))), "{res}");
    }
}

#[test]
fn flat_disc_radius_and_heights() {
    let p = params(2, 10);
    let d = derived_parameters(&p).unwrap();
    let mesh = assemble_surface(&p, 0.01).unwrap();
    for i in 1..=2 {
        let hb = d.hb[i - 1];
        let outer = mesh
            .labels
            .iter()
            .zip(&mesh.vertices)
            .filter(|(l, _)| l.layer == i && l.patch.map_or(false, |c| c.sigma == SIGMA_MAX))
            .map(|(_, p)| p.x.hypot(p.y))
            .fold(0.0, f64::max);
        assert!((outer - disc_radius(hb)).abs() < 1e-12);
        for (l, p) in mesh.labels.iter().zip(&mesh.vertices) {
            if l.layer == i && l.kind == RegionKind::FlatDisc {
                assert_eq!(p.z, hb);
                assert_eq!(l.rho, 10.0);
            }
        }
    }
}

#[test]
fn rho_at_waist_and_seams() {
    let p = params(2, 10);
    let d = derived_parameters(&p).unwrap();
    let mesh = assemble_surface(&p, 0.01).unwrap();
    let waist = mesh.labels.iter().find(|l| l.waist).unwrap();
    assert!((waist.rho * d.tau[0] - 1.0).abs() < 1e-12);
    let (count, worst) = rho_seam_audit(&mesh);
    assert!(count > 0);
    assert!(worst < 0.05);
}

#[test]
fn top_layer_rotation_is_needed_for_matching_waists() {
    // parity of the axis index reached by a corner: pyramidal copies preserve it
    let parity = |s: &LayerSpec, corner: f64| {
        let a = s.half_width();
        (((s.rotation + corner * a - a) / (2.0 * a)).round() as i64).rem_euclid(2)
    };
    for (n, m) in [(2, 10), (3, 8), (4, 8)] {
        let d = derived_parameters(&params(n, m)).unwrap();
        let mut specs = layer_specs(&d).unwrap();
        assert!((specs[n - 1].rotation - n as f64 * PI / m as f64).abs() < 1e-15);
        let below = if n == 2 { parity(&specs[0], 1.0) } else { parity(&specs[n - 2], 1.0) };
        assert_eq!(below, parity(&specs[n - 1], 1.0));
        // the alternating value (N-1) pi/m misses the axes of K_{N-1}
        specs[n - 1].rotation = (n - 1) as f64 * PI / m as f64;
        assert_ne!(below, parity(&specs[n - 1], 1.0));
    }
}

#[test]
fn obj_round_trip() {
    let mesh = assemble_surface(&params(2, 10), 0.01).unwrap();
    let dir = std::env::temp_dir().join(format!("fbms-obj-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("mesh.obj");
    export_obj(&mesh, &path).unwrap();
    let back = read_obj(&path).unwrap();
    assert_eq!(back.vertices.len(), mesh.n_vertices());
    assert_eq!(back.faces, mesh.faces);
    assert!(back.normals.iter().all(|n| (n.norm() - 1.0).abs() < 1e-12));
    assert!(sidecar_path(&path).exists());
    export_patch_csv(&mesh, &dir.join("patch.csv")).unwrap();
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn empty_mesh_export_fails() {
    let mut mesh = assemble_surface(&params(2, 10), 0.01).unwrap();
    mesh.vertices.clear();
    mesh.faces.clear();
    let path = std::env::temp_dir().join("fbms-empty.obj");
    assert!(export_obj(&mesh, &path).is_err());
}

#[test]
fn cokernel_samples() {
    let m = 10;
    assert_eq!(w_value(1, m, 0.3), 1.0);
    assert_eq!(w_value(2, m, 0.3), -1.0);
    assert_eq!(w_value(1, m, 0.1), 0.0);
    let mesh = assemble_surface(&params(2, m), 0.01).unwrap();
    let w1 = cokernel_w(1, &mesh);
    let wb = cokernel_wbar(1, &mesh);
    for (v, l) in mesh.labels.iter().enumerate() {
        if l.layer != 1 {
            assert_eq!(w1[v], 0.0);
            assert_eq!(wb[v], 0.0);
        }
        let r = mesh.vertices[v].x.hypot(mesh.vertices[v].y);
        if l.kind == RegionKind::FlatDisc && r < 1.0 - 4.0 / m as f64 {
            assert_eq!(w1[v], 0.0);
        }
    }
    assert!(w1.iter().any(|&x| x == 1.0));
    assert!(wb.iter().any(|&x| x != 0.0));
}

#[test]
fn varpi_examples() {
    let p = varpi_chart(20, &nalgebra::Vector3::new(0.5, 0.0, 0.2));
    assert!((p - nalgebra::Vector3::new(0.5, 0.0, 0.0)).norm() < 1e-15);
    for k in 0..1000 {
        let t = k as f64 * 0.00628;
        let r = (k % 97) as f64 / 97.0;
        let q = nalgebra::Vector3::new(r * t.cos(), r * t.sin(), 0.0);
        assert!((varpi_chart(12, &q) - q).norm() < 1e-14);
    }
}

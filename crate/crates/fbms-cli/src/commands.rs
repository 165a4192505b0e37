//! One runner per subcommand. Each writes its artifacts under the output directory,
//! prints a short summary, and reports whether its checks held.

use std::fs::File;
use std::io::{BufWriter, Write};

use serde::Serialize;

use fbms::balance::{
    balancing_residual, coker_map, derived_parameters, predicted_forces, waist_ratio_closed_form,
    DerivedParams, ForcePrediction,
};
use fbms::geometry::{catenoid_sup_rho_h, oracle_agreement, vertical_force, ForceReport, OracleAgreement};
use fbms::index::{theorem_bounds, topological_translation, IndexBudget};
use fbms::spectra::{catenoid_closed_form, model_low_spectrum_counts, Family, Model, SymmetryClass};
use fbms::surface::{
    assemble_from_derived, assemble_surface, boundary_audit, export_obj, export_patch_csv, export_report,
    rho_seam_audit, self_intersections, sidecar_path, symmetry_audit, BoundaryAudit, IntersectionReport, MeshOptions,
    RegionKind,
};
use fbms::symgroup::{standard_group, GroupKind};
use fbms::topology::{
    build_combinatorial_stacking, euler_characteristic, max_symmetry_certificate, stacking_topology, umbilic_budget,
};

use crate::config::RunConfig;
use crate::CliError;

fn write_csv(cfg: &RunConfig, name: &str, header: &str, rows: &[String]) -> Result<(), CliError> {
    let mut w = BufWriter::new(File::create(cfg.out_file(name)?)?);
    writeln!(w, "{header}")?;
    for r in rows {
        writeln!(w, "{r}")?;
    }
    w.flush()?;
    Ok(())
}

fn write_json<T: Serialize>(cfg: &RunConfig, name: &str, report: &T) -> Result<(), CliError> {
    export_report(report, &cfg.out_file(name)?)?;
    Ok(())
}

pub fn symmetry_group_for(n_layers: usize, m: usize) -> fbms::Result<fbms::symgroup::SymmetryGroup> {
    let kind = if n_layers % 2 == 0 { GroupKind::Prismatic } else { GroupKind::Antiprismatic };
    standard_group(kind, m)
}

#[derive(Debug, Clone, Serialize)]
pub struct TopologyRow {
    #[serde(rename = "N")]
    pub n_layers: usize,
    pub m: usize,
    pub genus: i64,
    pub boundary: i64,
    pub euler_from_type: i64,
    pub euler_combinatorial: i64,
    pub riemann_hurwitz: i64,
    pub boundary_combinatorial: usize,
    pub umbilic_budget: Option<i64>,
    pub umbilic_identity: Option<i64>,
    pub extra_symmetry_excluded: Option<bool>,
    pub ok: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct TopologyReport {
    pub rows: Vec<TopologyRow>,
    pub all_pass: bool,
    pub first_failure: Option<TopologyRow>,
}

pub fn topology_rows(cfg: &RunConfig) -> Result<TopologyReport, CliError> {
    let [n0, n1] = cfg.grid.topology_n;
    let [m0, m1] = cfg.grid.topology_m;
    let mut rows = Vec::new();
    for n in n0..=n1 {
        for m in m0..=m1 {
            let t = stacking_topology(n, m)?;
            let s = build_combinatorial_stacking(n, m)?;
            let chi = euler_characteristic(&s);
            let rh = m as i64 - (m as i64 - 1) * n as i64;
            let budget = umbilic_budget(t.genus, t.boundary_components).ok();
            let identity = budget.map(|_| 4 * (m as i64 - 1) * n as i64 - 4 * m as i64);
            let excluded = if n >= 2 { Some(max_symmetry_certificate(n, m)?.extra_symmetry_excluded) } else { None };
            let ok = s.is_valid()
                && chi == t.euler_char
                && chi == rh
                && s.n_boundary_components() as i64 == t.boundary_components
                && budget == identity;
            rows.push(TopologyRow {
                n_layers: n,
                m,
                genus: t.genus,
                boundary: t.boundary_components,
                euler_from_type: t.euler_char,
                euler_combinatorial: chi,
                riemann_hurwitz: rh,
                boundary_combinatorial: s.n_boundary_components(),
                umbilic_budget: budget,
                umbilic_identity: identity,
                extra_symmetry_excluded: excluded,
                ok,
            });
        }
    }
    let first_failure = rows.iter().find(|r| !r.ok).cloned();
    Ok(TopologyReport { all_pass: first_failure.is_none(), first_failure, rows })
}

pub fn topology(cfg: &RunConfig) -> Result<bool, CliError> {
    let rep = topology_rows(cfg)?;
    write_json(cfg, "topology.json", &rep)?;
    let csv: Vec<String> = rep
        .rows
        .iter()
        .map(|r| {
            format!(
                "{},{},{},{},{},{},{}",
                r.n_layers, r.m, r.genus, r.boundary, r.euler_combinatorial, r.riemann_hurwitz, r.ok
            )
        })
        .collect();
    write_csv(cfg, "topology.csv", "N,m,genus,boundary,euler_combinatorial,riemann_hurwitz,ok", &csv)?;
    println!("topology: {} cases, all identities hold: {}", rep.rows.len(), rep.all_pass);
    if let Some(f) = &rep.first_failure {
        eprintln!("first failing case: N = {}, m = {}: {f:?}", f.n_layers, f.m);
    }
    Ok(rep.all_pass)
}

#[derive(Debug, Serialize)]
struct CokerSummary {
    matrix: Vec<Vec<f64>>,
    norm: f64,
    inverse_norm: f64,
}

#[derive(Debug, Serialize)]
struct BalanceReport {
    params: fbms::balance::StackingParams,
    derived: DerivedParams,
    closed_form_x: Vec<f64>,
    x_error: f64,
    balancing_residual: f64,
    predicted: ForcePrediction,
    coker: CokerSummary,
    ok: bool,
}

pub fn balance(cfg: &RunConfig) -> Result<bool, CliError> {
    let p = cfg.stacking()?;
    let d = derived_parameters(&p)?;
    let oracle = waist_ratio_closed_form(p.n_layers);
    let x_error = d.x.iter().zip(&oracle).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let residual = balancing_residual(p.n_layers, &d.x);
    let c = coker_map(p.n_layers, &d.x)?;
    let coker = CokerSummary {
        matrix: c.p.row_iter().map(|r| r.iter().copied().collect()).collect(),
        norm: c.norm,
        inverse_norm: c.inverse_norm,
    };
    let tol = &cfg.tolerances;
    let ok = x_error < tol.waist_ratio && residual < tol.balancing_residual && d.lambda < 2.0;
    let predicted = predicted_forces(&d);
    println!(
        "balance N = {} m = {}: lambda = {:.12}, |x - oracle| = {x_error:.2e}, residual = {residual:.2e}",
        p.n_layers, p.m, d.lambda
    );
    println!("  tau = {:?}", d.tau);
    println!("  F / tau_n = {:?}", predicted.forces.iter().map(|f| f / d.tau_n()).collect::<Vec<_>>());
    let rep = BalanceReport {
        params: p,
        derived: d,
        closed_form_x: oracle,
        x_error,
        balancing_residual: residual,
        predicted,
        coker,
        ok,
    };
    write_json(cfg, "balance.json", &rep)?;
    Ok(ok)
}

#[derive(Debug, Serialize)]
pub struct SurfaceAudit {
    #[serde(rename = "N")]
    pub n_layers: usize,
    pub m: usize,
    pub resolution: f64,
    pub vertices: usize,
    pub faces: usize,
    pub catenoid_components: usize,
    pub flat_disc_vertices: usize,
    pub disc_graph_vertices: usize,
    pub intermediate_vertices: usize,
    pub catenoid_vertices: usize,
    pub consistently_oriented: bool,
    pub boundary: BoundaryAudit,
    pub orbit_closure: f64,
    pub self_intersections: Option<IntersectionReport>,
    pub rho_seams: (usize, f64),
    pub obj: String,
    pub sidecar: String,
}

pub fn surface(cfg: &RunConfig, intersections: bool) -> Result<bool, CliError> {
    let p = cfg.stacking()?;
    let mesh = assemble_surface(&p, cfg.resolution)
        .map_err(|e| CliError::Run(format!("assembling N = {} m = {}: {e}", p.n_layers, p.m)))?;
    let obj = cfg.out_file(&format!("surface_N{}_m{}.obj", p.n_layers, p.m))?;
    export_obj(&mesh, &obj)?;
    export_patch_csv(&mesh, &cfg.out_file(&format!("surface_N{}_m{}_patch.csv", p.n_layers, p.m))?)?;
    let group = symmetry_group_for(p.n_layers, p.m)?;
    let audit = SurfaceAudit {
        n_layers: p.n_layers,
        m: p.m,
        resolution: cfg.resolution,
        vertices: mesh.n_vertices(),
        faces: mesh.faces.len(),
        catenoid_components: mesh.catenoid_components(),
        flat_disc_vertices: mesh.count_kind(RegionKind::FlatDisc),
        disc_graph_vertices: mesh.count_kind(RegionKind::DiscGraph),
        intermediate_vertices: mesh.count_kind(RegionKind::Intermediate),
        catenoid_vertices: mesh.count_kind(RegionKind::Catenoid),
        consistently_oriented: mesh.is_consistently_oriented(),
        boundary: boundary_audit(&mesh),
        orbit_closure: symmetry_audit(&mesh, &group),
        self_intersections: intersections.then(|| self_intersections(&mesh)),
        rho_seams: rho_seam_audit(&mesh),
        obj: obj.file_name().unwrap_or_default().to_string_lossy().into_owned(),
        sidecar: sidecar_path(&obj).file_name().unwrap_or_default().to_string_lossy().into_owned(),
    };
    write_json(cfg, &format!("surface_N{}_m{}_audit.json", p.n_layers, p.m), &audit)?;
    let tol = &cfg.tolerances;
    let clean = audit.self_intersections.as_ref().map_or(true, |r| r.intersecting_pairs == 0);
    let ok = audit.boundary.max_angle < tol.boundary_angle
        && audit.boundary.max_radius_error < 1e-9
        && audit.orbit_closure < tol.orbit_closure
        && audit.consistently_oriented
        && clean;
    println!(
        "surface N = {} m = {}: {} vertices, {} faces, {} catenoids",
        p.n_layers, p.m, audit.vertices, audit.faces, audit.catenoid_components
    );
    println!(
        "  max conormal angle {:.3e} rad, max |r - 1| {:.3e}, orbit closure {:.3e}",
        audit.boundary.max_angle, audit.boundary.max_radius_error, audit.orbit_closure
    );
    if let Some(r) = &audit.self_intersections {
        println!("  self-intersecting triangle pairs: {} of {} tested", r.intersecting_pairs, r.pairs_tested);
    }
    Ok(ok)
}

#[derive(Debug, Serialize)]
struct ForceRow {
    report: ForceReport,
    predicted: f64,
    over_tau_n: f64,
    predicted_over_tau_n: f64,
}

#[derive(Debug, Serialize)]
struct GeometryReport {
    oracle: OracleAgreement,
    seed: u64,
    sup_catenoid_rho_h: f64,
    force_resolution: f64,
    forces: Vec<ForceRow>,
    ok: bool,
}

pub fn geometry(cfg: &RunConfig) -> Result<bool, CliError> {
    let p = cfg.stacking()?;
    let d = derived_parameters(&p)?;
    let oracle = oracle_agreement(&d, cfg.samples, cfg.seed)?;
    let sup = catenoid_sup_rho_h(&d, 64, 32)?;
    let force_resolution = cfg.resolution.min(0.08 / p.m as f64);
    let mesh = assemble_from_derived(&d, &MeshOptions::patch(force_resolution))?;
    let pred = predicted_forces(&d);
    let mut forces = Vec::new();
    for i in 1..=p.n_layers {
        let report = vertical_force(&mesh, i)?;
        forces.push(ForceRow {
            over_tau_n: report.force / d.tau_n(),
            predicted: pred.forces[i - 1],
            predicted_over_tau_n: pred.forces[i - 1] / d.tau_n(),
            report,
        });
    }
    let ok = oracle.worst() <= cfg.tolerances.oracle_h;
    println!(
        "geometry N = {} m = {}: max |H_closed - H_generic| catenoid {:.2e}, intermediate {:.2e}, disc {:.2e}",
        p.n_layers, p.m, oracle.catenoid, oracle.intermediate, oracle.disc
    );
    println!("  sup rho^-1 |H| on catenoids: {sup:.3e}");
    for f in &forces {
        println!(
            "  F_{} = {:.4} tau_n (leading order {:.4} tau_n)",
            f.report.layer, f.over_tau_n, f.predicted_over_tau_n
        );
    }
    let rep = GeometryReport { oracle, seed: cfg.seed, sup_catenoid_rho_h: sup, force_resolution, forces, ok };
    write_json(cfg, "geometry.json", &rep)?;
    Ok(ok)
}

#[derive(Debug, Serialize)]
struct ClosedFormRow {
    t_max: f64,
    lambda1: f64,
}

#[derive(Debug, Serialize)]
struct CountRow {
    model: Model,
    h: f64,
    negative: usize,
    zero: usize,
    eigenvalues: Vec<f64>,
}

#[derive(Debug, Serialize)]
struct SpectraReport {
    grid_h: f64,
    dirichlet_closed_form: Vec<ClosedFormRow>,
    dirichlet_fd_t3: f64,
    dirichlet_fd_error: f64,
    counts: Vec<CountRow>,
    ok: bool,
}

pub fn spectra(cfg: &RunConfig) -> Result<bool, CliError> {
    let h = cfg.grid_h;
    let mut closed = Vec::new();
    for t in [3.0, 6.0, 12.0] {
        let l = catenoid_closed_form(t, Family::DirichletTEven, 0.0)?;
        closed.push(ClosedFormRow { t_max: t, lambda1: l[0].lambda });
    }
    let p = Model::CatenoidDirichlet { t_max: 3.0 }.problem(h, SymmetryClass::t_theta(1, 1))?;
    let fd = fbms::spectra::fd_eigensolve(&p, 1)?.eigenvalues[0];
    let err = (fd - closed[0].lambda1).abs();
    let mut counts = Vec::new();
    let mut ok = err < cfg.tolerances.fd_lambda.max(10.0 * h * h);
    let models = [
        Model::CatenoidNeumann { t_max: 6.0 },
        Model::Rectangle,
        Model::PerforatedOne { r: 0.3 },
        Model::PerforatedOne { r: 0.1 },
        Model::PerforatedTwo { r: 0.03 },
    ];
    for model in models {
        // the graded perforated grids resolve the holes on their own; keep their base step coarse
        let hm = if matches!(model, Model::PerforatedOne { .. } | Model::PerforatedTwo { .. }) { h.max(0.05) } else { h };
        let rep = model_low_spectrum_counts(model, hm, SymmetryClass::none(), 4)?;
        ok &= rep.agrees;
        counts.push(CountRow {
            model,
            h: hm,
            negative: rep.negative,
            zero: rep.zero,
            eigenvalues: rep.spectrum.eigenvalues.clone(),
        });
    }
    for r in &closed {
        println!("spectra: Dirichlet lambda_1(T = {}) = {:.9}", r.t_max, r.lambda1);
    }
    println!("  finite volumes at h = {h}: lambda_1(3) = {fd:.9} (error {err:.2e})");
    for c in &counts {
        println!("  {:?} h = {}: (index, nullity) = ({}, {})", c.model, c.h, c.negative, c.zero);
    }
    let csv: Vec<String> = counts
        .iter()
        .map(|c| {
            let ev: Vec<String> = c.eigenvalues.iter().map(|v| format!("{v:.12e}")).collect();
            format!("\"{:?}\",{},{},{},{}", c.model, c.h, c.negative, c.zero, ev.join(";"))
        })
        .collect();
    write_csv(cfg, "spectra.csv", "model,h,negative,zero,eigenvalues", &csv)?;
    let rep = SpectraReport {
        grid_h: h,
        dirichlet_closed_form: closed,
        dirichlet_fd_t3: fd,
        dirichlet_fd_error: err,
        counts,
        ok,
    };
    write_json(cfg, "spectra.json", &rep)?;
    Ok(ok)
}

#[derive(Debug, Serialize)]
struct IndexRow {
    budget: IndexBudget,
    closed_lower: usize,
    closed_upper: usize,
    closed_equiv: [usize; 2],
    topological_identities: bool,
    ok: bool,
}

pub fn index_rows(cfg: &RunConfig) -> Result<(Vec<IndexRowSummary>, bool), CliError> {
    let [n0, n1] = cfg.grid.index_n;
    let [m0, m1] = cfg.grid.index_m;
    let mut rows = Vec::new();
    let mut all = true;
    for n in n0..=n1 {
        for m in m0..=m1 {
            let b = theorem_bounds(n, m)?;
            let t = topological_translation(n, m)?;
            let lower = (n - 1).max(2) * m;
            let upper = m * (5 * n - 3) + n;
            let equiv = equiv_closed_form(n);
            let ok = b.lower == lower
                && b.upper_ind_plus_nul == upper
                && [b.equiv_lower, b.equiv_upper] == equiv
                && t.lower_matches
                && t.upper_matches;
            all &= ok;
            rows.push(IndexRowSummary { n_layers: n, m, lower: b.lower, upper: b.upper_ind_plus_nul, equiv, ok });
        }
    }
    Ok((rows, all))
}

#[derive(Debug, Clone, Serialize)]
pub struct IndexRowSummary {
    #[serde(rename = "N")]
    pub n_layers: usize,
    pub m: usize,
    pub lower: usize,
    pub upper: usize,
    pub equiv: [usize; 2],
    pub ok: bool,
}

pub fn index(cfg: &RunConfig) -> Result<bool, CliError> {
    let (rows, all) = index_rows(cfg)?;
    let b = theorem_bounds(cfg.n_layers, cfg.m)?;
    let t = topological_translation(cfg.n_layers, cfg.m)?;
    let lower = (cfg.n_layers - 1).max(2) * cfg.m;
    let upper = cfg.m * (5 * cfg.n_layers - 3) + cfg.n_layers;
    let equiv = equiv_closed_form(cfg.n_layers);
    let detail = IndexRow {
        ok: b.lower == lower && b.upper_ind_plus_nul == upper && [b.equiv_lower, b.equiv_upper] == equiv,
        closed_lower: lower,
        closed_upper: upper,
        closed_equiv: equiv,
        topological_identities: t.lower_matches && t.upper_matches,
        budget: b,
    };
    #[derive(Serialize)]
    struct Report<'a> {
        detail: &'a IndexRow,
        grid: &'a [IndexRowSummary],
        all_pass: bool,
    }
    write_json(cfg, "index.json", &Report { detail: &detail, grid: &rows, all_pass: all })?;
    let csv: Vec<String> = rows
        .iter()
        .map(|r| format!("{},{},{},{},{},{},{}", r.n_layers, r.m, r.lower, r.upper, r.equiv[0], r.equiv[1], r.ok))
        .collect();
    write_csv(cfg, "index.csv", "N,m,lower,upper_ind_plus_nul,equiv_lower,equiv_upper,ok", &csv)?;
    println!(
        "index N = {} m = {}: ind >= {}, ind + nul <= {}, equivariant in [{}, {}]",
        cfg.n_layers, cfg.m, detail.budget.lower, detail.budget.upper_ind_plus_nul, detail.budget.equiv_lower,
        detail.budget.equiv_upper
    );
    println!("  grid of {} cases matches the closed forms: {all}", rows.len());
    Ok(all && detail.ok)
}

fn equiv_closed_form(n: usize) -> [usize; 2] {
    [n / 2, if n % 2 == 0 { 2 * n - 1 } else { 2 * n - 2 }]
}

//! Acceptance matrix: ten criteria at their stated tolerances, one PASS/FAIL line each.
//!
//! Runs without the libtest harness so the verdict lines always reach stdout. The process
//! fails if any criterion outside `KNOWN_FAILING` fails, or if a known failure starts
//! passing (the list must then be updated along with the notes in the README).

use std::f64::consts::{FRAC_PI_2, PI};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use fbms::balance::{balancing_residual, derived_parameters, limiting_waist_ratios, DerivedParams, StackingParams};
use fbms::geometry::{
    catenoid_sup_rho_h, forms_catenoid, forms_disc_graph, forms_generic_catenoid, forms_generic_disc_graph,
    vertical_force, CATENOID_FD_STEP, GRAPH_FD_STEP,
};
use fbms::index::{theorem_bounds, topological_translation};
use fbms::spectra::{
    catenoid_closed_form, fd_eigensolve, model_low_spectrum_counts, spectral_shift_bound, trace_probe, zero_potential,
    Bc, DomainKind, Family, Model, ModelDomain, ShiftData, SideBcs, SpectralProblem, SymmetryClass,
};
use fbms::surface::{
    assemble_from_derived, assemble_surface, boundary_audit, self_intersections, symmetry_audit, MeshOptions,
    DEFAULT_RESOLUTION,
};
use fbms::symgroup::{standard_group, GroupKind};
use fbms::topology::{build_combinatorial_stacking, euler_characteristic, umbilic_budget};

/// Criteria that fail at their stated tolerance; see the README for the analysis.
const KNOWN_FAILING: &[usize] = &[5];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn derived(n: usize, m: usize) -> DerivedParams {
    derived_parameters(&StackingParams::balanced(n, m).unwrap()).unwrap()
}

/// Genus and boundary count, written out here rather than taken from the library.
/// Even stacks keep `m` boundary curves, odd stacks one.
fn genus_boundary(n: i64, m: i64) -> (i64, i64) {
    if n % 2 == 0 {
        ((m - 1) * (n - 2) / 2, m)
    } else {
        ((m - 1) * (n - 1) / 2, 1)
    }
}

fn c1_topology() -> Outcome {
    let mut bad = Vec::new();
    for n in 1..=8i64 {
        for m in 3..=12i64 {
            let s = build_combinatorial_stacking(n as usize, m as usize).unwrap();
            let chi = euler_characteristic(&s);
            let (g, b) = genus_boundary(n, m);
            let mut ok = s.is_valid() && chi == 2 - 2 * g - b && chi == m - (m - 1) * n;
            if (g, b) != (0, 1) {
                ok &= umbilic_budget(g, b).unwrap() == 8 * g + 4 * b - 8;
                ok &= 8 * g + 4 * b - 8 == 4 * (m - 1) * n - 4 * m;
            }
            if !ok {
                bad.push((n, m));
            }
        }
    }
    outcome(bad.is_empty(), format!("80 cases, failures {bad:?}"))
}

fn c2_balancing() -> Outcome {
    let (mut err, mut res, mut lmax) = (0.0f64, 0.0f64, 0.0f64);
    for big_n in 2..=12usize {
        let (x, lambda) = limiting_waist_ratios(big_n).unwrap();
        let nf = big_n as f64;
        let n = (big_n / 2) as f64;
        for (j, xj) in x.iter().enumerate() {
            let oracle = ((j + 1) as f64 * PI / nf).sin() / (n * PI / nf).sin();
            err = err.max((xj - oracle).abs());
        }
        res = res.max(balancing_residual(big_n, &x));
        lmax = lmax.max(lambda);
    }
    outcome(
        err < 1e-10 && res < 1e-12 && lmax < 2.0,
        format!("max |x - sine oracle| {err:.1e}, residual {res:.1e}, max lambda {lmax:.6}"),
    )
}

fn c3_oracle() -> Outcome {
    let mut worst = 0.0f64;
    let mut parts = Vec::new();
    for (n, m) in [(2, 20), (3, 16), (4, 12), (5, 12)] {
        let d = derived(n, m);
        let mf = m as f64;
        let a = PI / (2.0 * mf);
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let mut w = [0.0f64; 3];
        let mut graph_point = |inner: bool| loop {
            let layer = rng.gen_range(1..=n);
            let s = if inner { rng.gen_range(0.0..3.0 / mf) } else { rng.gen_range(3.0 / mf..1.0 / 3.0) };
            let th = rng.gen_range(-a..a);
            if s.hypot(th - a) > 0.5 / mf && s.hypot(th + a) > 0.5 / mf {
                return (layer, s, th);
            }
        };
        let mut cat = ChaCha8Rng::seed_from_u64(2025);
        for _ in 0..500 {
            let i = cat.gen_range(1..n);
            let t = cat.gen_range(-1.0..1.0) * d.a[i - 1];
            let v = cat.gen_range(-FRAC_PI_2..FRAC_PI_2);
            let c = forms_catenoid(i, t, v, &d).unwrap().forms.h;
            let g = forms_generic_catenoid(i, t, v, &d, CATENOID_FD_STEP).unwrap().h;
            w[0] = w[0].max((c - g).abs());
        }
        for (k, inner) in [(1, true), (2, false)] {
            for _ in 0..500 {
                let (layer, s, th) = graph_point(inner);
                let c = forms_disc_graph(layer, s, th, &d).unwrap().h;
                let g = forms_generic_disc_graph(layer, s, th, &d, GRAPH_FD_STEP).unwrap().h;
                w[k] = w[k].max((c - g).abs());
            }
        }
        worst = worst.max(w[0]).max(w[1]).max(w[2]);
        parts.push(format!("({n},{m}) {:.1e}/{:.1e}/{:.1e}", w[0], w[1], w[2]));
    }
    outcome(worst <= 1e-5, format!("max |dH| catenoid/intermediate/disc: {}", parts.join(", ")))
}

fn c4_trend() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for n in [2, 3] {
        let s: Vec<f64> = [20, 40, 80].iter().map(|&m| catenoid_sup_rho_h(&derived(n, m), 64, 32).unwrap()).collect();
        ok &= s[0] > s[1] && s[1] > s[2];
        parts.push(format!("N={n}: {:.2e} > {:.2e} > {:.2e}", s[0], s[1], s[2]));
    }
    outcome(ok, parts.join("; "))
}

fn c5_forces() -> Outcome {
    let m = 40;
    let d = derived(2, m);
    let tau = d.tau[0];
    let mesh = assemble_from_derived(&d, &MeshOptions::patch(0.08 / m as f64)).unwrap();
    let f1 = vertical_force(&mesh, 1).unwrap().force;
    let f2 = vertical_force(&mesh, 2).unwrap().force;
    let leading = -2.0 * PI * 2f64.ln() * tau;
    let rel = (f1 - leading).abs() / leading.abs();
    let parity = (f1 + f2).abs() / f1.abs();
    outcome(
        rel <= 0.25 && parity < 1e-6,
        format!(
            "F1 = {:.4} tau vs leading order {:.4} tau, relative error {:.3} (tolerance 0.25); |F1 + F2|/|F1| = {parity:.1e}",
            f1 / tau,
            leading / tau,
            rel
        ),
    )
}

/// Smallest `k` in (0, 1) with `k = tanh T tanh(k T)`: the even bound state of
/// `-u'' - 2 sech^2 u` with `u(T) = 0` has eigenvalue `-k^2`.
fn dirichlet_oracle(t_max: f64) -> f64 {
    let f = |k: f64| k - t_max.tanh() * (k * t_max).tanh();
    let (mut lo, mut hi) = (1e-9, 1.0);
    // f < 0 just above the trivial root, f(1) > 0
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let k = 0.5 * (lo + hi);
    -k * k
}

fn c6_catenoid() -> Outcome {
    let l: Vec<f64> = [3.0, 6.0, 12.0].iter().map(|&t| dirichlet_oracle(t)).collect();
    let lib: Vec<f64> =
        [3.0, 6.0, 12.0].iter().map(|&t| catenoid_closed_form(t, Family::DirichletTEven, 0.0).unwrap()[0].lambda).collect();
    let oracle_gap = l.iter().zip(&lib).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let toward = (l[0] + 1.0).abs() > (l[1] + 1.0).abs() && (l[1] + 1.0).abs() > (l[2] + 1.0).abs();
    let band = l[2] > -1.001 && l[2] < -0.999;
    let p = Model::CatenoidDirichlet { t_max: 3.0 }.problem(1.0 / 128.0, SymmetryClass::t_theta(1, 1)).unwrap();
    let fd = fd_eigensolve(&p, 1).unwrap().eigenvalues[0];
    let neumann =
        model_low_spectrum_counts(Model::CatenoidNeumann { t_max: 6.0 }, 1.0 / 64.0, SymmetryClass::none(), 6).unwrap();
    outcome(
        oracle_gap < 1e-10 && toward && band && (fd - l[0]).abs() < 1e-3 && neumann.negative_by_sign == 2,
        format!(
            "lambda1(3, 6, 12) = {:.6}, {:.6}, {:.6}; FD at h=1/128 off by {:.1e}; Neumann T=6 negatives {}",
            l[0],
            l[1],
            l[2],
            (fd - l[0]).abs(),
            neumann.negative_by_sign
        ),
    )
}

fn c7_perforated() -> Outcome {
    let mut ok = true;
    let mut min_gap = f64::INFINITY;
    for r in [0.3, 0.1, 0.03] {
        for model in [Model::PerforatedOne { r }, Model::PerforatedTwo { r }] {
            let mut counts = Vec::new();
            for h in [0.1, 0.05] {
                let rep = model_low_spectrum_counts(model, h, SymmetryClass::none(), 3).unwrap();
                let l2 = rep.spectrum.eigenvalues[1];
                min_gap = min_gap.min(l2);
                ok &= (rep.negative, rep.zero) == (0, 1) && l2 > 0.05;
                counts.push((rep.negative, rep.zero));
            }
            ok &= counts[0] == counts[1];
        }
    }
    // Neumann rectangle (0,3) x (-pi/2, pi/2): lambda_2 = (pi / pi)^2 from cos(y + pi/2)
    let rect = DomainKind::Rectangle { x0: 0.0, x1: 3.0, y0: -FRAC_PI_2, y1: FRAC_PI_2 };
    let p = SpectralProblem::new(
        ModelDomain::uniform(rect, PI / 120.0).unwrap(),
        zero_potential(),
        SideBcs::all(Bc::Neumann),
        SymmetryClass::none(),
    );
    let l2 = fd_eigensolve(&p, 3).unwrap().eigenvalues[1];
    ok &= (l2 - 1.0).abs() < 1e-3;
    outcome(ok, format!("(index, nullity) = (0, 1) on 12 grids: {ok}, min lambda2 {min_gap:.4}; rectangle lambda2 {l2:.6}"))
}

fn c8_index() -> Outcome {
    let mut bad = Vec::new();
    for n in 2..=8usize {
        for m in 3..=50usize {
            let b = theorem_bounds(n, m).unwrap();
            let t = topological_translation(n, m).unwrap();
            let (g, beta) = genus_boundary(n as i64, m as i64);
            let (ni, mi) = (n as i64, m as i64);
            let upper = m * (5 * n - 3) + n;
            let upper_gb = if n % 2 == 0 { 10 * g + 7 * beta + 6 * (ni - 1) - 4 } else { 10 * g + beta + 6 * (ni - 1) + 2 * mi };
            let mut ok = b.lower == (n - 1).max(2) * m
                && b.upper_ind_plus_nul == upper
                && b.equiv_lower == n / 2
                && b.equiv_upper == if n % 2 == 0 { 2 * n - 1 } else { 2 * n - 2 }
                && upper_gb == upper as i64
                && 2 * g + beta + ni - 2 == (ni - 1) * mi
                && t.lower_matches
                && t.upper_matches;
            if n % 2 == 1 {
                ok &= b.lower >= 2 * m - 1;
            }
            if !ok {
                bad.push((n, m));
            }
        }
    }
    outcome(bad.is_empty(), format!("336 cases, failures {bad:?}"))
}

fn c9_surface() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for (n, m) in [(2, 10), (3, 8), (4, 8)] {
        let mesh = assemble_surface(&StackingParams::balanced(n, m).unwrap(), DEFAULT_RESOLUTION).unwrap();
        let b = boundary_audit(&mesh);
        // boundary vertices must sit on the sphere, independently of the audit
        let radius = mesh
            .vertices
            .iter()
            .zip(&mesh.labels)
            .filter(|(_, l)| l.boundary)
            .map(|(p, _)| (p.norm() - 1.0).abs())
            .fold(0.0, f64::max);
        let kind = if n % 2 == 0 { GroupKind::Prismatic } else { GroupKind::Antiprismatic };
        let orbit = symmetry_audit(&mesh, &standard_group(kind, m).unwrap());
        let x = self_intersections(&mesh);
        ok &= b.boundary_vertices > 0 && b.max_angle < 1e-3 && radius < 1e-12 && orbit < 1e-9 && x.intersecting_pairs == 0;
        parts.push(format!(
            "({n},{m}) angle {:.1e} orbit {:.1e} intersections {}/{}",
            b.max_angle, orbit, x.intersecting_pairs, x.pairs_tested
        ));
    }
    outcome(ok, parts.join("; "))
}

fn c10_probes() -> Outcome {
    let d = ShiftData::flat(10, 1.0, 0.0);
    let identical = spectral_shift_bound(&d, &d, 0.7, 2.0, 4.0, 0.5).unwrap().bound;
    let eps = 0.01;
    let solve = |s: f64| {
        let kind = DomainKind::Rectangle { x0: 0.0, x1: 3.0 * s, y0: -FRAC_PI_2 * s, y1: FRAC_PI_2 * s };
        let p = SpectralProblem::new(
            ModelDomain::uniform(kind, 0.05 * s).unwrap(),
            zero_potential(),
            SideBcs::all(Bc::Neumann),
            SymmetryClass::none(),
        );
        fd_eigensolve(&p, 4).unwrap().eigenvalues
    };
    let (s1, s2) = (solve(1.0), solve(1.0 + eps));
    let d2 = ShiftData::flat(10, (1.0 + eps).powi(2), 0.0);
    let scaling =
        (0..4).all(|k| s2[k] <= spectral_shift_bound(&d, &d2, s1[k], 2.0, 4.0, 0.5).unwrap().bound);
    let mut max_ratio = 0.0f64;
    for kind in [DomainKind::CatenoidRect { t_max: 3.0 }, DomainKind::PerforatedOne { r: 0.1 }, DomainKind::PerforatedTwo { r: 0.1 }] {
        max_ratio = max_ratio.max(trace_probe(kind, 1000, 0).unwrap().max_ratio);
    }
    outcome(
        identical == 0.7 && scaling && max_ratio <= 2.0,
        format!("identical-data bound exact: {}; scaling respected: {scaling}; max trace ratio {max_ratio:.4}", identical == 0.7),
    )
}

fn main() {
    let criteria: [(usize, &str, fn() -> Outcome); 10] = [
        (1, "topology identities", c1_topology),
        (2, "waist ratios and balancing", c2_balancing),
        (3, "closed-form curvature vs generic oracle", c3_oracle),
        (4, "catenoid curvature decreases with m", c4_trend),
        (5, "vertical force at leading order", c5_forces),
        (6, "catenoid model spectrum", c6_catenoid),
        (7, "perforated rectangle spectrum", c7_perforated),
        (8, "index budgets", c8_index),
        (9, "surface audits", c9_surface),
        (10, "spectral shift and trace probes", c10_probes),
    ];
    // sequential, so the reported times compare with the stated budgets
    let results: Vec<(usize, &str, Outcome, f64)> = criteria
        .iter()
        .map(|&(id, name, f)| {
            let t = Instant::now();
            let o = f();
            (id, name, o, t.elapsed().as_secs_f64())
        })
        .collect();
    let mut unexpected = Vec::new();
    for (id, name, o, secs) in &results {
        println!("{} criterion {id:>2}: {name} ({secs:.1} s): {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        if o.pass == KNOWN_FAILING.contains(id) {
            unexpected.push(*id);
        }
    }
    let passed = results.iter().filter(|r| r.2.pass).count();
    println!("acceptance: {passed}/10 pass; known failing {KNOWN_FAILING:?}");
    if !unexpected.is_empty() {
        eprintln!("unexpected verdicts for criteria {unexpected:?}");
        std::process::exit(1);
    }
}

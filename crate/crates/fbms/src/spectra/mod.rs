//! Model spectral problems for the Jacobi operator on the pieces of the partition:
//! closed-form eigenvalue conditions on the half-catenoid rectangle, a finite-volume
//! eigensolver with mixed boundary conditions and symmetry restriction, trace
//! inequality probes, and the quantitative spectral-shift bound.

pub mod closed_form;
pub mod domain;
pub mod eigen;
pub mod probe;

use std::collections::HashMap;
use std::f64::consts::FRAC_PI_2;

use nalgebra::{Matrix3, Vector3};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::symgroup::{generate_with_character, Isometry, PointIndex};

pub use closed_form::{catenoid_closed_form, catenoid_full_spectrum, ClosedFormRoot, Family};
pub use domain::{
    catenoid_potential, constant_potential, zero_potential, Axis, Bc, DomainKind, ModelDomain, Potential,
    SideBcs, SpectralProblem, SymmetryClass,
};
pub use eigen::{lowest_eigenpairs, SymBand};
pub use probe::{spectral_shift_bound, trace_probe, ShiftData, ShiftBound, TraceReport};

/// Factor multiplying `h^2` in the zero-eigenvalue tolerance.
pub const ZERO_TOL_FACTOR: f64 = 10.0;

#[derive(Debug, Clone, Serialize)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    pub negative: usize,
    pub zero: usize,
    pub positive: usize,
    pub h: f64,
    pub zero_tol: f64,
    pub unknowns: usize,
    pub residuals: Vec<f64>,
    /// Eigenfunctions sampled at the active cells, in the order of `cells`.
    #[serde(skip)]
    pub eigenvectors: Vec<Vec<f64>>,
    #[serde(skip)]
    pub cells: Vec<usize>,
}

impl Spectrum {
    fn classify(eigenvalues: Vec<f64>, h: f64) -> (Vec<f64>, usize, usize, usize, f64) {
        let tol = ZERO_TOL_FACTOR * h * h;
        let neg = eigenvalues.iter().filter(|l| **l < -tol).count();
        let zero = eigenvalues.iter().filter(|l| l.abs() <= tol).count();
        let pos = eigenvalues.len() - neg - zero;
        (eigenvalues, neg, zero, pos, tol)
    }
}

/// Generators of the requested class as signed isometries of the centered plane.
fn class_generators(class: &SymmetryClass) -> Vec<(Isometry, i8)> {
    let mut g = Vec::new();
    if let Some(p) = class.t {
        g.push((Isometry::labeled(Matrix3::from_diagonal(&Vector3::new(-1.0, 1.0, 1.0)), "t-flip"), p));
    }
    if let Some(p) = class.theta {
        g.push((Isometry::labeled(Matrix3::from_diagonal(&Vector3::new(1.0, -1.0, 1.0)), "theta-flip"), p));
    }
    if let Some(p) = class.origin {
        g.push((Isometry::labeled(Matrix3::from_diagonal(&Vector3::new(-1.0, -1.0, 1.0)), "origin-flip"), p));
    }
    g
}

/// Orbit basis of the symmetry-restricted subspace: for each active cell its orbit
/// number (or `None` when the orbit is annihilated) and coefficient.
fn orbit_basis(p: &SpectralProblem, cells: &[usize]) -> Result<(Vec<Option<usize>>, Vec<f64>, usize)> {
    let n = cells.len();
    if p.class.is_none() {
        return Ok(((0..n).map(Some).collect(), vec![1.0; n], n));
    }
    let (group, chars) = generate_with_character(&class_generators(&p.class), 16)?;
    let (x0, x1, y0, y1) = p.domain.kind.bounds();
    let (xc, yc) = (0.5 * (x0 + x1), 0.5 * (y0 + y1));
    let pts: Vec<Vector3<f64>> = cells
        .iter()
        .map(|&c| {
            let (x, y) = p.domain.center(c);
            Vector3::new(x - xc, y - yc, 0.0)
        })
        .collect();
    let scale = p.domain.x.min_width().min(p.domain.y.min_width());
    let index = PointIndex::new(&pts, 1e-6 * scale);
    let mut orbit_of: Vec<Option<usize>> = vec![None; n];
    let mut coef = vec![0.0; n];
    let mut visited = vec![false; n];
    let mut n_orbits = 0;
    for k in 0..n {
        if visited[k] {
            continue;
        }
        let mut acc: HashMap<usize, f64> = HashMap::new();
        for (g, &s) in group.elements.iter().zip(&chars) {
            let (img, _) = index.nearest(&g.apply(&pts[k])).ok_or_else(|| {
                Error::InvalidParameter("symmetry class incompatible with the domain grid".into())
            })?;
            *acc.entry(img).or_insert(0.0) += s as f64;
        }
        for &j in acc.keys() {
            visited[j] = true;
        }
        let norm: f64 = acc.values().map(|v| v * v).sum::<f64>().sqrt();
        if norm < 0.5 {
            continue;
        }
        for (&j, &v) in &acc {
            orbit_of[j] = Some(n_orbits);
            coef[j] = v / norm;
        }
        n_orbits += 1;
    }
    Ok((orbit_of, coef, n_orbits))
}

/// Lowest `k` eigenvalues of the problem in its symmetry class.
pub fn fd_eigensolve(p: &SpectralProblem, k: usize) -> Result<Spectrum> {
    let asm = domain::assemble(p);
    let (orbit_of, coef, n_red) = orbit_basis(p, &asm.cells)?;
    let inv_sqrt_m: Vec<f64> = asm.mass.iter().map(|m| 1.0 / m.sqrt()).collect();
    // Reduced matrix B^T M^{-1/2} K M^{-1/2} B; orbit ids follow the first cell index.
    let mut entries: HashMap<(usize, usize), f64> = HashMap::new();
    let mut push = |a: usize, b: usize, v: f64| {
        if let (Some(oa), Some(ob)) = (orbit_of[a], orbit_of[b]) {
            let (i, j) = if oa >= ob { (oa, ob) } else { (ob, oa) };
            *entries.entry((i, j)).or_insert(0.0) += v * coef[a] * coef[b] * inv_sqrt_m[a] * inv_sqrt_m[b];
        }
    };
    for c in 0..asm.cells.len() {
        push(c, c, asm.diag[c]);
    }
    for &(a, b, v) in &asm.off {
        push(a, b, v);
        push(b, a, v);
    }
    // symmetric doubling of off-diagonal orbit pairs: (i,j) and (j,i) both landed on (max,min)
    let band = entries.keys().map(|(i, j)| i - j).max().unwrap_or(0);
    let mut mat = SymBand::zeros(n_red, band);
    for (&(i, j), &v) in &entries {
        mat.add(i, j, if i == j { v } else { 0.5 * v });
    }
    let pairs = lowest_eigenpairs(&mat, k, 0)?;
    let worst = pairs.residuals.iter().copied().fold(0.0, f64::max);
    let scale = pairs.values.iter().fold(1.0f64, |a, v| a.max(v.abs()));
    if worst > 1e-6 * scale {
        return Err(Error::NotConverged { residual: worst, iterations: 0 });
    }
    let eigenvectors = pairs
        .vectors
        .iter()
        .map(|y| {
            (0..asm.cells.len())
                .map(|c| orbit_of[c].map_or(0.0, |o| y[o] * coef[c] * inv_sqrt_m[c]))
                .collect()
        })
        .collect();
    let h = p.domain.h();
    let (eigenvalues, negative, zero, positive, zero_tol) = Spectrum::classify(pairs.values, h);
    Ok(Spectrum {
        eigenvalues,
        negative,
        zero,
        positive,
        h,
        zero_tol,
        unknowns: n_red,
        residuals: pairs.residuals,
        eigenvectors,
        cells: asm.cells,
    })
}

/// Richardson order estimate from errors at `h` and `h/2`.
pub fn richardson_slope(err_h: f64, err_h2: f64) -> f64 {
    (err_h.abs() / err_h2.abs()).log2()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Model {
    CatenoidDirichlet { t_max: f64 },
    CatenoidNeumann { t_max: f64 },
    Rectangle,
    PerforatedOne { r: f64 },
    PerforatedTwo { r: f64 },
}

impl Model {
    pub fn problem(&self, h: f64, class: SymmetryClass) -> Result<SpectralProblem> {
        Ok(match *self {
            Model::CatenoidDirichlet { t_max } => SpectralProblem::new(
                ModelDomain::uniform(DomainKind::CatenoidRect { t_max }, h)?,
                catenoid_potential(),
                SideBcs::dirichlet_ends(),
                class,
            ),
            Model::CatenoidNeumann { t_max } => SpectralProblem::new(
                ModelDomain::uniform(DomainKind::CatenoidRect { t_max }, h)?,
                catenoid_potential(),
                SideBcs::all(Bc::Neumann),
                class,
            ),
            Model::Rectangle => SpectralProblem::new(
                ModelDomain::uniform(DomainKind::Rectangle { x0: 0.0, x1: 3.0, y0: -FRAC_PI_2, y1: FRAC_PI_2 }, h)?,
                zero_potential(),
                SideBcs::all(Bc::Neumann),
                class,
            ),
            Model::PerforatedOne { r } => SpectralProblem::new(
                ModelDomain::graded(DomainKind::PerforatedOne { r }, h, 8)?,
                zero_potential(),
                SideBcs::all(Bc::Neumann),
                class,
            ),
            Model::PerforatedTwo { r } => SpectralProblem::new(
                ModelDomain::graded(DomainKind::PerforatedTwo { r }, h, 8)?,
                zero_potential(),
                SideBcs::all(Bc::Neumann),
                class,
            ),
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CountReport {
    pub negative: usize,
    pub zero: usize,
    /// Strictly negative discrete eigenvalues, ignoring the zero tolerance.
    pub negative_by_sign: usize,
    /// Negative count from the closed forms, where they apply.
    pub closed_form_negative: Option<usize>,
    /// Nonzero closed-form eigenvalues that fall inside the zero tolerance.
    pub closed_form_near_zero: Vec<f64>,
    pub agrees: bool,
    pub spectrum: Spectrum,
}

/// Index and nullity of a model problem by finite volumes, checked against the closed forms.
pub fn model_low_spectrum_counts(model: Model, h: f64, class: SymmetryClass, k: usize) -> Result<CountReport> {
    let spec = fd_eigensolve(&model.problem(h, class)?, k)?;
    let closed = match model {
        Model::CatenoidDirichlet { t_max } => Some(catenoid_full_spectrum(t_max, true, 1.0)?),
        Model::CatenoidNeumann { t_max } => Some(catenoid_full_spectrum(t_max, false, 1.0)?),
        _ => None,
    };
    let (closed_form_negative, closed_form_near_zero) = match &closed {
        Some(list) => {
            let keep = |e: &&closed_form::ModeEigenvalue| {
                class.t.map_or(true, |p| p == e.t_parity)
                    && class.theta.map_or(true, |p| p == e.theta_parity)
                    && class.origin.map_or(true, |p| p == e.t_parity * e.theta_parity)
            };
            let sel: Vec<f64> = list.iter().filter(keep).map(|e| e.lambda).collect();
            (
                Some(sel.iter().filter(|l| **l < 0.0).count()),
                sel.iter().copied().filter(|l| *l != 0.0 && l.abs() <= spec.zero_tol).collect(),
            )
        }
        None => (None, Vec::new()),
    };
    let negative_by_sign = spec.eigenvalues.iter().filter(|l| **l < 0.0).count();
    let agrees = closed_form_negative.map_or(true, |c| c == negative_by_sign);
    Ok(CountReport {
        negative: spec.negative,
        zero: spec.zero,
        negative_by_sign,
        closed_form_negative,
        closed_form_near_zero,
        agrees,
        spectrum: spec,
    })
}

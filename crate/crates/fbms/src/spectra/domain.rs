//! Model domains on tensor grids of cells, boundary conditions, and the
//! finite-volume quadratic form `int |du|^2 - q u^2 - int_Robin r u^2`.

use std::f64::consts::FRAC_PI_2;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::util::sech;

/// Cell faces along one axis.
#[derive(Debug, Clone)]
pub struct Axis {
    pub faces: Vec<f64>,
}

impl Axis {
    pub fn uniform(a: f64, b: f64, h: f64) -> Axis {
        let n = ((b - a) / h - 1e-9).ceil().max(1.0) as usize;
        Axis { faces: (0..=n).map(|k| a + (b - a) * k as f64 / n as f64).collect() }
    }

    /// Cells of width about `h_min` at each refinement point, growing by `ratio` per cell up to `h_max`.
    pub fn graded(a: f64, b: f64, h_max: f64, points: &[f64], h_min: f64, ratio: f64) -> Axis {
        let width = |x: f64| {
            points
                .iter()
                .map(|p| h_min + (ratio - 1.0) * (x - p).abs())
                .fold(h_max, f64::min)
                .max(h_min)
        };
        let mut faces = vec![a];
        let mut x = a;
        while x < b {
            // size from the cell midpoint estimate keeps neighbours within `ratio`
            let w0 = width(x);
            let w = width(x + 0.5 * w0);
            x += w.min(w0 * ratio);
            faces.push(x);
        }
        let last = *faces.last().unwrap();
        let faces = faces.iter().map(|f| a + (f - a) * (b - a) / (last - a)).collect();
        Axis { faces }
    }

    /// Graded grid that is mirror symmetric about the midpoint of `[a, b]`.
    pub fn graded_symmetric(a: f64, b: f64, h_max: f64, points: &[f64], h_min: f64, ratio: f64) -> Axis {
        let mid = 0.5 * (a + b);
        let half = Axis::graded(a, mid, h_max, points, h_min, ratio);
        let mut faces = half.faces.clone();
        for f in half.faces.iter().rev().skip(1) {
            faces.push(2.0 * mid - f);
        }
        Axis { faces }
    }

    pub fn n(&self) -> usize {
        self.faces.len() - 1
    }

    pub fn center(&self, i: usize) -> f64 {
        0.5 * (self.faces[i] + self.faces[i + 1])
    }

    pub fn width(&self, i: usize) -> f64 {
        self.faces[i + 1] - self.faces[i]
    }

    pub fn max_width(&self) -> f64 {
        (0..self.n()).map(|i| self.width(i)).fold(0.0, f64::max)
    }

    pub fn min_width(&self) -> f64 {
        (0..self.n()).map(|i| self.width(i)).fold(f64::INFINITY, f64::min)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DomainKind {
    /// `(-T, T) x (-pi/2, pi/2)`.
    CatenoidRect { t_max: f64 },
    /// `(x0, x1) x (y0, y1)`.
    Rectangle { x0: f64, x1: f64, y0: f64, y1: f64 },
    /// `(0, 3) x (-pi/2, pi/2)` minus the quarter disc of radius `r` at `(0, pi/2)`.
    PerforatedOne { r: f64 },
    /// As above, also minus the quarter disc at `(0, -pi/2)`.
    PerforatedTwo { r: f64 },
}

impl DomainKind {
    pub fn bounds(&self) -> (f64, f64, f64, f64) {
        match *self {
            DomainKind::CatenoidRect { t_max } => (-t_max, t_max, -FRAC_PI_2, FRAC_PI_2),
            DomainKind::Rectangle { x0, x1, y0, y1 } => (x0, x1, y0, y1),
            DomainKind::PerforatedOne { .. } | DomainKind::PerforatedTwo { .. } => {
                (0.0, 3.0, -FRAC_PI_2, FRAC_PI_2)
            }
        }
    }

    /// Centers of the removed quarter discs, with their radius.
    pub fn perforations(&self) -> Vec<(f64, f64, f64)> {
        match *self {
            DomainKind::PerforatedOne { r } => vec![(0.0, FRAC_PI_2, r)],
            DomainKind::PerforatedTwo { r } => vec![(0.0, FRAC_PI_2, r), (0.0, -FRAC_PI_2, r)],
            _ => Vec::new(),
        }
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        let (x0, x1, y0, y1) = self.bounds();
        x >= x0
            && x <= x1
            && y >= y0
            && y <= y1
            && self.perforations().iter().all(|(cx, cy, r)| (x - cx).powi(2) + (y - cy).powi(2) > r * r)
    }
}

/// A domain with its cell grid and active-cell mask.
#[derive(Debug, Clone)]
pub struct ModelDomain {
    pub kind: DomainKind,
    pub x: Axis,
    pub y: Axis,
    pub active: Vec<bool>,
}

impl ModelDomain {
    /// Uniform grid of spacing about `h`.
    pub fn uniform(kind: DomainKind, h: f64) -> Result<ModelDomain> {
        let (x0, x1, y0, y1) = kind.bounds();
        ModelDomain::with_axes(kind, Axis::uniform(x0, x1, h), Axis::uniform(y0, y1, h))
    }

    /// Grid refined geometrically toward the perforation corners, with at least
    /// `cells_per_radius` cells across each perforation radius.
    pub fn graded(kind: DomainKind, h_max: f64, cells_per_radius: usize) -> Result<ModelDomain> {
        let perfs = kind.perforations();
        if perfs.is_empty() {
            return ModelDomain::uniform(kind, h_max);
        }
        let r = perfs[0].2;
        let (x0, x1, y0, y1) = kind.bounds();
        let ratio = 1.1;
        let mut per = cells_per_radius.max(8) as f64;
        loop {
            let h_min = (r / per).min(h_max);
            let x = Axis::graded(x0, x1, h_max, &[0.0], h_min, ratio);
            let y = match kind {
                DomainKind::PerforatedTwo { .. } => {
                    Axis::graded_symmetric(y0, y1, h_max, &[-FRAC_PI_2], h_min, ratio)
                }
                _ => Axis::graded(y0, y1, h_max, &[FRAC_PI_2], h_min, ratio),
            };
            match ModelDomain::with_axes(kind, x, y) {
                Err(Error::Refinement(_)) if per < 1e4 => per *= 1.25,
                other => return other,
            }
        }
    }

    pub fn with_axes(kind: DomainKind, x: Axis, y: Axis) -> Result<ModelDomain> {
        if let DomainKind::PerforatedOne { r } | DomainKind::PerforatedTwo { r } = kind {
            if !(r > 0.0 && r < FRAC_PI_2) {
                return Err(Error::InvalidParameter(format!("perforation radius {r} not in (0, pi/2)")));
            }
        }
        if let DomainKind::CatenoidRect { t_max } = kind {
            if !(t_max > 0.0 && t_max.is_finite()) {
                return Err(Error::InvalidParameter(format!("T = {t_max} must be finite and positive")));
            }
        }
        let mut active = Vec::with_capacity(x.n() * y.n());
        for i in 0..x.n() {
            for j in 0..y.n() {
                active.push(kind.contains(x.center(i), y.center(j)));
            }
        }
        let d = ModelDomain { kind, x, y, active };
        for (cx, cy, r) in d.kind.perforations() {
            let nx = (0..d.x.n()).filter(|&i| (d.x.center(i) - cx).abs() < r).count();
            let ny = (0..d.y.n()).filter(|&j| (d.y.center(j) - cy).abs() < r).count();
            if nx < 8 || ny < 8 {
                return Err(Error::Refinement(format!(
                    "fewer than 8 cells across perforation radius {r} ({nx} by {ny})"
                )));
            }
        }
        Ok(d)
    }

    pub fn cell(&self, i: usize, j: usize) -> usize {
        i * self.y.n() + j
    }

    pub fn n_cells(&self) -> usize {
        self.x.n() * self.y.n()
    }

    pub fn n_active(&self) -> usize {
        self.active.iter().filter(|a| **a).count()
    }

    /// Largest cell size, the `h` used for tolerances.
    pub fn h(&self) -> f64 {
        self.x.max_width().max(self.y.max_width())
    }

    pub fn center(&self, c: usize) -> (f64, f64) {
        let ny = self.y.n();
        (self.x.center(c / ny), self.y.center(c % ny))
    }

    pub fn area(&self, c: usize) -> f64 {
        let ny = self.y.n();
        self.x.width(c / ny) * self.y.width(c % ny)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Bc {
    Dirichlet,
    Neumann,
    /// Contributes `-r int u^2` to the form.
    Robin(f64),
}

/// Boundary conditions on the four sides `x = x0`, `x = x1`, `y = y0`, `y = y1`.
/// Perforation boundaries are always Neumann.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SideBcs {
    pub x0: Bc,
    pub x1: Bc,
    pub y0: Bc,
    pub y1: Bc,
}

impl SideBcs {
    pub fn all(bc: Bc) -> SideBcs {
        SideBcs { x0: bc, x1: bc, y0: bc, y1: bc }
    }

    /// Dirichlet at `x = x0, x1`, Neumann at `y = y0, y1`.
    pub fn dirichlet_ends() -> SideBcs {
        SideBcs { x0: Bc::Dirichlet, x1: Bc::Dirichlet, y0: Bc::Neumann, y1: Bc::Neumann }
    }
}

pub type Potential = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

pub fn zero_potential() -> Potential {
    Arc::new(|_, _| 0.0)
}

/// `2 sech^2 t`, the potential of the Jacobi operator on the unit-waist catenoid.
pub fn catenoid_potential() -> Potential {
    Arc::new(|t, _| 2.0 * sech(t).powi(2))
}

pub fn constant_potential(c: f64) -> Potential {
    Arc::new(move |_, _| c)
}

/// Parity requirements under the reflections of the domain about its center.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct SymmetryClass {
    /// Parity under `x -> -x`.
    pub t: Option<i8>,
    /// Parity under `y -> -y`.
    pub theta: Option<i8>,
    /// Parity under `(x, y) -> -(x, y)`.
    pub origin: Option<i8>,
}

impl SymmetryClass {
    pub fn none() -> SymmetryClass {
        SymmetryClass::default()
    }

    pub fn t(p: i8) -> SymmetryClass {
        SymmetryClass { t: Some(p), ..Default::default() }
    }

    pub fn theta(p: i8) -> SymmetryClass {
        SymmetryClass { theta: Some(p), ..Default::default() }
    }

    pub fn origin(p: i8) -> SymmetryClass {
        SymmetryClass { origin: Some(p), ..Default::default() }
    }

    pub fn t_theta(pt: i8, pth: i8) -> SymmetryClass {
        SymmetryClass { t: Some(pt), theta: Some(pth), origin: None }
    }

    /// Parse `none` or a comma list such as `t-even,theta-odd`.
    pub fn parse(s: &str) -> Option<SymmetryClass> {
        let mut c = SymmetryClass::none();
        if s == "none" || s.is_empty() {
            return Some(c);
        }
        for part in s.split(',') {
            let (name, par) = part.trim().rsplit_once('-')?;
            let p = match par {
                "even" => 1,
                "odd" => -1,
                _ => return None,
            };
            match name {
                "t" => c.t = Some(p),
                "theta" => c.theta = Some(p),
                "origin" => c.origin = Some(p),
                _ => return None,
            }
        }
        Some(c)
    }

    pub fn is_none(&self) -> bool {
        self.t.is_none() && self.theta.is_none() && self.origin.is_none()
    }
}

/// The form data: domain, potential, side conditions and symmetry class.
#[derive(Clone)]
pub struct SpectralProblem {
    pub domain: ModelDomain,
    pub potential: Potential,
    pub bcs: SideBcs,
    pub class: SymmetryClass,
}

impl SpectralProblem {
    pub fn new(domain: ModelDomain, potential: Potential, bcs: SideBcs, class: SymmetryClass) -> Self {
        SpectralProblem { domain, potential, bcs, class }
    }
}

/// Stiffness `K` (upper triangle triplets) and lumped mass of the active cells.
pub(crate) struct Assembled {
    pub cells: Vec<usize>,
    pub mass: Vec<f64>,
    pub diag: Vec<f64>,
    pub off: Vec<(usize, usize, f64)>,
}

pub(crate) fn assemble(p: &SpectralProblem) -> Assembled {
    let d = &p.domain;
    let (nx, ny) = (d.x.n(), d.y.n());
    let mut index = vec![usize::MAX; d.n_cells()];
    let mut cells = Vec::new();
    for c in 0..d.n_cells() {
        if d.active[c] {
            index[c] = cells.len();
            cells.push(c);
        }
    }
    let n = cells.len();
    let mut mass = vec![0.0; n];
    let mut diag = vec![0.0; n];
    let mut off = Vec::new();
    let boundary = |bc: Bc, len: f64, half: f64| match bc {
        Bc::Dirichlet => len / half,
        Bc::Neumann => 0.0,
        Bc::Robin(r) => -r * len,
    };
    for (k, &c) in cells.iter().enumerate() {
        let (i, j) = (c / ny, c % ny);
        let (wx, wy) = (d.x.width(i), d.y.width(j));
        let (cx, cy) = d.center(c);
        mass[k] = wx * wy;
        diag[k] -= (p.potential)(cx, cy) * wx * wy;
        // x faces
        if i + 1 < nx {
            let nb = index[d.cell(i + 1, j)];
            if nb != usize::MAX {
                let w = wy / (0.5 * (wx + d.x.width(i + 1)));
                diag[k] += w;
                diag[nb] += w;
                off.push((k, nb, -w));
            }
        } else {
            diag[k] += boundary(p.bcs.x1, wy, 0.5 * wx);
        }
        if i == 0 {
            diag[k] += boundary(p.bcs.x0, wy, 0.5 * wx);
        }
        if j + 1 < ny {
            let nb = index[d.cell(i, j + 1)];
            if nb != usize::MAX {
                let w = wx / (0.5 * (wy + d.y.width(j + 1)));
                diag[k] += w;
                diag[nb] += w;
                off.push((k, nb, -w));
            }
        } else {
            diag[k] += boundary(p.bcs.y1, wx, 0.5 * wy);
        }
        if j == 0 {
            diag[k] += boundary(p.bcs.y0, wx, 0.5 * wy);
        }
    }
    Assembled { cells, mass, diag, off }
}

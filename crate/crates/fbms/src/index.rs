//! Montiel-Ros style bookkeeping: per-region eigenvalue bounds from the model problems are
//! summed into global and equivariant bounds on index and nullity.
//!
//! Everything here is exact integer arithmetic. The per-region numbers are constants; the
//! `spectra` module checks them on the model domains.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::topology::stacking_topology;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RegionKind {
    Catenoid,
    Disc,
    Intermediate,
}

/// One family of congruent regions of the partition.
#[derive(Debug, Clone, Serialize)]
pub struct RegionClass {
    pub kind: RegionKind,
    /// Number of regions.
    pub count: usize,
    /// Number of orbits of the symmetry group acting on whole layers or gaps.
    pub orbit_count: usize,
    /// Regions in each generic orbit and in the special middle orbit, if there is one.
    pub orbit_size: usize,
    pub middle_orbit_size: Option<usize>,
    /// Dirichlet index lower bound per region.
    pub dirichlet_lower: usize,
    /// Neumann index plus nullity upper bound per region.
    pub neumann_upper: usize,
    /// Equivariant Dirichlet lower bound per orbit.
    pub equiv_lower: usize,
    /// Equivariant Neumann upper bound per generic orbit and for the middle orbit.
    pub equiv_upper: usize,
    pub equiv_upper_middle: Option<usize>,
}

impl RegionClass {
    pub fn has_middle(&self) -> bool {
        self.middle_orbit_size.is_some()
    }
}

fn check(n_layers: usize, m: usize) -> Result<()> {
    if n_layers < 2 {
        return Err(Error::InvalidParameter(format!("N = {n_layers} < 2")));
    }
    if m < 3 {
        return Err(Error::InvalidParameter(format!("m = {m} < 3")));
    }
    Ok(())
}

/// The partition into catenoidal, disc and intermediate regions.
pub fn partition_catalog(n_layers: usize, m: usize) -> Result<Vec<RegionClass>> {
    check(n_layers, m)?;
    let n = n_layers / 2;
    let even = n_layers % 2 == 0;
    let gaps = n_layers - 1;
    // Gaps j and N-j form one orbit; for even N the gap n is alone.
    let cat = RegionClass {
        kind: RegionKind::Catenoid,
        count: gaps * m,
        orbit_count: n,
        orbit_size: 2 * m,
        middle_orbit_size: even.then_some(m),
        dirichlet_lower: 1,
        neumann_upper: 3,
        equiv_lower: 1,
        equiv_upper: 2,
        equiv_upper_middle: even.then_some(1),
    };
    // Layers i and N+1-i form one orbit; for odd N the layer n+1 is alone.
    let layers = |kind, neumann_upper| RegionClass {
        kind,
        count: n_layers,
        orbit_count: if even { n } else { n + 1 },
        orbit_size: 2,
        middle_orbit_size: (!even).then_some(1),
        dirichlet_lower: 0,
        neumann_upper,
        equiv_lower: 0,
        equiv_upper: 1,
        equiv_upper_middle: (!even).then_some(0),
    };
    Ok(vec![cat, layers(RegionKind::Disc, 1), layers(RegionKind::Intermediate, 2 * m)])
}

fn generic_orbits(c: &RegionClass) -> usize {
    c.orbit_count - usize::from(c.has_middle())
}

/// Sum of Dirichlet lower bounds, absolute and equivariant.
pub fn montiel_ros_lower(catalog: &[RegionClass]) -> (usize, usize) {
    let abs = catalog.iter().map(|c| c.count * c.dirichlet_lower).sum();
    let eq = catalog.iter().map(|c| c.orbit_count * c.equiv_lower).sum();
    (abs, eq)
}

/// Sum of Neumann upper bounds, absolute and equivariant.
pub fn montiel_ros_upper(catalog: &[RegionClass]) -> (usize, usize) {
    let abs = catalog.iter().map(|c| c.count * c.neumann_upper).sum();
    let eq = catalog
        .iter()
        .map(|c| generic_orbits(c) * c.equiv_upper + c.equiv_upper_middle.unwrap_or(0))
        .sum();
    (abs, eq)
}

/// Lower bound on the index coming from the symmetries alone.
pub fn symmetry_lower(n_layers: usize, m: usize) -> usize {
    if n_layers % 2 == 0 {
        2 * m
    } else {
        2 * m - 1
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct IndexBudget {
    pub n_layers: usize,
    pub m: usize,
    pub lower: usize,
    pub upper_ind_plus_nul: usize,
    pub equiv_lower: usize,
    pub equiv_upper: usize,
    pub notes: Vec<String>,
}

pub fn theorem_bounds(n_layers: usize, m: usize) -> Result<IndexBudget> {
    let cat = partition_catalog(n_layers, m)?;
    let (mr_lower, equiv_lower) = montiel_ros_lower(&cat);
    let (upper, equiv_upper) = montiel_ros_upper(&cat);
    let sym = symmetry_lower(n_layers, m);
    let mut notes = Vec::new();
    for c in &cat {
        notes.push(format!(
            "{:?}: {} regions x neumann {} = {}; {} orbits, equivariant upper {} (middle {:?})",
            c.kind,
            c.count,
            c.neumann_upper,
            c.count * c.neumann_upper,
            c.orbit_count,
            c.equiv_upper,
            c.equiv_upper_middle
        ));
    }
    notes.push(format!("lower = max(montiel-ros {mr_lower}, symmetry {sym})"));
    Ok(IndexBudget {
        n_layers,
        m,
        lower: mr_lower.max(sym),
        upper_ind_plus_nul: upper,
        equiv_lower,
        equiv_upper,
        notes,
    })
}

/// Bounds rewritten through genus and boundary count, with each identity checked.
#[derive(Debug, Clone, Serialize)]
pub struct TopologicalBounds {
    pub genus: i64,
    pub boundary: i64,
    pub euler_char: i64,
    pub lower_topological: i64,
    pub upper_topological: i64,
    pub lower_matches: bool,
    pub upper_matches: bool,
}

pub fn topological_translation(n_layers: usize, m: usize) -> Result<TopologicalBounds> {
    let b = theorem_bounds(n_layers, m)?;
    let t = stacking_topology(n_layers, m)?;
    let (g, beta, nn, mm) = (t.genus, t.boundary_components, n_layers as i64, m as i64);
    let lower_topological = 2 * g + beta + nn - 2;
    let upper_topological = if n_layers % 2 == 0 {
        10 * g + 7 * beta + 6 * (nn - 1) - 4
    } else {
        10 * g + beta + 6 * (nn - 1) + 2 * mm
    };
    let mr_lower = (n_layers - 1) * m;
    Ok(TopologicalBounds {
        genus: g,
        boundary: beta,
        euler_char: t.euler_char,
        lower_topological,
        upper_topological,
        lower_matches: lower_topological == nn - t.euler_char && lower_topological == mr_lower as i64,
        upper_matches: upper_topological == b.upper_ind_plus_nul as i64,
    })
}

/// Equivariant lower bound `floor(N/2)`; one-parameter sweepouts can only reach `N <= 3`.
pub fn minmax_parameter_floor(n_layers: usize) -> usize {
    n_layers / 2
}

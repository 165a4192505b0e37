//! Exact topological invariants of disc stackings.

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TopologicalType {
    pub genus: i64,
    pub boundary_components: i64,
    pub euler_char: i64,
}

impl TopologicalType {
    pub fn new(genus: i64, boundary_components: i64) -> Self {
        TopologicalType { genus, boundary_components, euler_char: 2 - 2 * genus - boundary_components }
    }
}

/// Genus and boundary count of the `N`-layer stacking with `m` ribbons per gap.
pub fn stacking_topology(n_layers: usize, m: usize) -> Result<TopologicalType> {
    if m < 3 {
        return Err(Error::Unsupported(format!("m = {m} < 3")));
    }
    if n_layers == 0 {
        return Err(Error::InvalidParameter("N must be >= 1".into()));
    }
    let (n, m) = (n_layers as i64, m as i64);
    if n % 2 == 0 {
        Ok(TopologicalType::new((m - 1) * (n - 2) / 2, m))
    } else {
        Ok(TopologicalType::new((m - 1) * (n - 1) / 2, 1))
    }
}

/// A 2-dimensional CW complex given by vertices, edges and polygonal faces.
///
/// Faces are listed as closed cycles of edge indices.
#[derive(Debug, Clone, Serialize)]
pub struct CombSurface {
    pub n_vertices: usize,
    pub edges: Vec<(usize, usize)>,
    pub faces: Vec<Vec<usize>>,
    pub boundary_cycles: Vec<Vec<usize>>,
}

impl CombSurface {
    /// Number of faces incident to each edge.
    pub fn edge_face_counts(&self) -> Vec<usize> {
        let mut c = vec![0; self.edges.len()];
        for f in &self.faces {
            for &e in f {
                c[e] += 1;
            }
        }
        c
    }

    pub fn is_valid(&self) -> bool {
        let counts = self.edge_face_counts();
        counts.iter().all(|&c| c >= 1 && c <= 2)
            && self.boundary_cycles.iter().flatten().all(|&e| counts[e] == 1)
    }

    fn from_parts(n_vertices: usize, edges: Vec<(usize, usize)>, faces: Vec<Vec<usize>>) -> Self {
        let mut s = CombSurface { n_vertices, edges, faces, boundary_cycles: Vec::new() };
        s.boundary_cycles = s.trace_boundary();
        s
    }

    /// Group boundary edges into connected cycles.
    fn trace_boundary(&self) -> Vec<Vec<usize>> {
        let counts = self.edge_face_counts();
        let bdry: Vec<usize> = (0..self.edges.len()).filter(|&e| counts[e] == 1).collect();
        let mut parent: Vec<usize> = (0..self.n_vertices).collect();
        fn find(p: &mut Vec<usize>, x: usize) -> usize {
            let mut r = x;
            while p[r] != r {
                r = p[r];
            }
            let mut y = x;
            while p[y] != r {
                let nx = p[y];
                p[y] = r;
                y = nx;
            }
            r
        }
        for &e in &bdry {
            let (a, b) = self.edges[e];
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            if ra != rb {
                parent[ra] = rb;
            }
        }
        let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
        for &e in &bdry {
            let r = find(&mut parent, self.edges[e].0);
            groups.entry(r).or_default().push(e);
        }
        groups.into_values().collect()
    }

    pub fn n_boundary_components(&self) -> usize {
        self.boundary_cycles.len()
    }
}

/// V - E + F.
pub fn euler_characteristic(s: &CombSurface) -> i64 {
    s.n_vertices as i64 - s.edges.len() as i64 + s.faces.len() as i64
}

/// A single polygonal disc.
pub fn disc_complex(k: usize) -> CombSurface {
    let edges = (0..k).map(|i| (i, (i + 1) % k)).collect();
    CombSurface::from_parts(k, edges, vec![(0..k).collect()])
}

/// An annulus made of `k` quadrilaterals.
pub fn annulus_complex(k: usize) -> CombSurface {
    // inner ring 0..k, outer ring k..2k
    let mut edges = Vec::new();
    for i in 0..k {
        edges.push((i, (i + 1) % k));
        edges.push((k + i, k + (i + 1) % k));
        edges.push((i, k + i));
    }
    let faces = (0..k).map(|i| vec![3 * i, 3 * ((i + 1) % k) + 2, 3 * i + 1, 3 * i + 2]).collect();
    CombSurface::from_parts(2 * k, edges, faces)
}

/// N polygonal discs with 2m boundary arcs each, joined by (N-1)m ribbons.
///
/// Ribbon `k` of gap `j` (between discs `j` and `j+1`, 1-based) is glued
/// to arc `(j-1) + 2k (mod 2m)` of both discs, matching the alternating
/// axis pattern of the construction.
pub fn build_combinatorial_stacking(n_layers: usize, m: usize) -> Result<CombSurface> {
    stacking_topology(n_layers, m)?;
    let arcs = 2 * m;
    let vid = |disc: usize, a: usize| disc * arcs + (a % arcs);
    let mut edges = Vec::new();
    let mut faces = Vec::new();
    for d in 0..n_layers {
        let base = edges.len();
        for a in 0..arcs {
            edges.push((vid(d, a), vid(d, a + 1)));
        }
        faces.push((base..base + arcs).collect());
    }
    let arc_edge = |disc: usize, a: usize| disc * arcs + (a % arcs);
    for j in 0..n_layers.saturating_sub(1) {
        for k in 0..m {
            let a = j + 2 * k;
            let left = edges.len();
            edges.push((vid(j, a), vid(j + 1, a)));
            let right = edges.len();
            edges.push((vid(j, a + 1), vid(j + 1, a + 1)));
            faces.push(vec![arc_edge(j, a), right, arc_edge(j + 1, a), left]);
        }
    }
    Ok(CombSurface::from_parts(n_layers * arcs, edges, faces))
}

/// Number of umbilics (with multiplicity) of a non-disc free boundary minimal surface.
pub fn umbilic_budget(genus: i64, boundary: i64) -> Result<i64> {
    if genus == 0 && boundary == 1 {
        return Err(Error::Inapplicable("the disc has no umbilic budget".into()));
    }
    Ok(8 * genus + 4 * boundary - 8)
}

#[derive(Debug, Clone, Serialize)]
pub struct SymmetryCertificate {
    pub n_layers: usize,
    pub m: usize,
    pub budget: i64,
    /// Budget an extra axis-preserving symmetry would require.
    pub axis_preserving_required: i64,
    pub axis_preserving_contradicted: bool,
    /// Budget required when the axis is not preserved (even N only).
    pub axis_not_preserved_required: Option<i64>,
    pub axis_not_preserved_contradicted: Option<bool>,
    pub odd_axis_not_preserved_note: Option<String>,
    /// Minimal order of an umbilic fixed by a rotation of order 2m.
    pub rotation_fixed_umbilic_order: i64,
    pub extra_symmetry_excluded: bool,
}

pub fn max_symmetry_certificate(n_layers: usize, m: usize) -> Result<SymmetryCertificate> {
    if m < 3 {
        return Err(Error::Unsupported(format!("certificate indeterminate for m = {m} < 3")));
    }
    let t = stacking_topology(n_layers, m)?;
    let budget = umbilic_budget(t.genus, t.boundary_components)?;
    let (n, mi) = (n_layers as i64, m as i64);
    let ap_req = 4 * (mi - 1) * n;
    let ap = budget < ap_req;
    let (anp_req, anp, note) = if n_layers % 2 == 0 {
        let r = 2 * (mi - 2) * (mi + 1) * n;
        (Some(r), Some(budget < r), None)
    } else {
        (None, None, Some("odd N, axis not preserved: handled by containment argument".to_string()))
    };
    Ok(SymmetryCertificate {
        n_layers,
        m,
        budget,
        axis_preserving_required: ap_req,
        axis_preserving_contradicted: ap,
        axis_not_preserved_required: anp_req,
        axis_not_preserved_contradicted: anp,
        odd_axis_not_preserved_note: note,
        rotation_fixed_umbilic_order: 2 * mi - 2,
        extra_symmetry_excluded: ap && anp.unwrap_or(true),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PolymorphMember {
    pub n_layers: usize,
    pub m: usize,
    pub shared_genus: i64,
}

/// First `k` odd primes.
pub fn odd_primes(k: usize) -> Vec<usize> {
    let mut out = Vec::with_capacity(k);
    let mut c = 3;
    while out.len() < k {
        if (3..).step_by(2).take_while(|d| d * d <= c).all(|d| c % d != 0) {
            out.push(c);
        }
        c += 2;
    }
    out
}

/// `k` stackings of equal genus, connected boundary and distinct symmetry orders.
pub fn polymorphism_family(k: usize, m0: &dyn Fn(usize) -> usize) -> Result<Vec<PolymorphMember>> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be >= 1".into()));
    }
    let p = odd_primes(k);
    let ns: Vec<usize> = p.iter().map(|pi| 1 + 2 * pi).collect();
    let head: usize = p[..k - 1].iter().product();
    let bound = ns.iter().map(|&n| m0(n)).max().unwrap_or(0);
    let q = bound / head + 1;
    let full: usize = p.iter().product();
    let genus = (q * full) as i64;
    Ok(p.iter()
        .zip(&ns)
        .map(|(&pi, &n)| PolymorphMember { n_layers: n, m: 1 + q * (full / pi), shared_genus: genus })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn topology_examples() {
        assert_eq!(stacking_topology(4, 8).unwrap(), TopologicalType::new(7, 8));
        assert_eq!(stacking_topology(5, 8).unwrap(), TopologicalType::new(14, 1));
        assert_eq!(stacking_topology(1, 5).unwrap(), TopologicalType::new(0, 1));
        assert!(matches!(stacking_topology(3, 2), Err(Error::Unsupported(_))));
    }

    #[test]
    fn small_complexes() {
        assert_eq!(euler_characteristic(&disc_complex(5)), 1);
        assert_eq!(euler_characteristic(&annulus_complex(6)), 0);
        assert_eq!(annulus_complex(6).n_boundary_components(), 2);
    }

    #[test]
    fn stacking_complexes() {
        let s = build_combinatorial_stacking(2, 3).unwrap();
        assert!(s.is_valid());
        assert_eq!(euler_characteristic(&s), -1);
        assert_eq!(s.n_boundary_components(), 3);
        assert_eq!(euler_characteristic(&build_combinatorial_stacking(1, 7).unwrap()), 1);
        assert_eq!(euler_characteristic(&build_combinatorial_stacking(5, 8).unwrap()), -27);
        assert_eq!(euler_characteristic(&build_combinatorial_stacking(4, 8).unwrap()), -20);
    }

    #[test]
    fn budgets() {
        assert_eq!(umbilic_budget(7, 8).unwrap(), 80);
        assert_eq!(umbilic_budget(0, 2).unwrap(), 0);
        assert!(umbilic_budget(0, 1).is_err());
    }

    #[test]
    fn certificates() {
        for (n, m) in [(4, 8), (2, 3), (3, 3)] {
            assert!(max_symmetry_certificate(n, m).unwrap().extra_symmetry_excluded);
        }
        let c = max_symmetry_certificate(3, 3).unwrap();
        assert_eq!(c.rotation_fixed_umbilic_order, 4);
        assert!(c.odd_axis_not_preserved_note.is_some());
        assert!(max_symmetry_certificate(3, 2).is_err());
    }

    #[test]
    fn polymorphism() {
        let one = polymorphism_family(1, &|_| 3).unwrap();
        assert_eq!(one, vec![PolymorphMember { n_layers: 7, m: 5, shared_genus: 12 }]);
        let two = polymorphism_family(2, &|_| 3).unwrap();
        assert_eq!((two[0].n_layers, two[1].n_layers), (7, 11));
        assert_eq!(two[0].shared_genus % 15, 0);
        for fam in [two, polymorphism_family(4, &|n| 2 * n).unwrap()] {
            for mem in &fam {
                let t = stacking_topology(mem.n_layers, mem.m).unwrap();
                assert_eq!((t.genus, t.boundary_components), (mem.shared_genus, 1));
            }
            let mut orders: Vec<usize> = fam.iter().map(|x| 4 * x.m).collect();
            orders.dedup();
            assert_eq!(orders.len(), fam.len());
        }
    }
}

//! Finite subgroups of O(3) used by the construction.
//!
//! Elements are stored as explicit 3x3 matrices and deduplicated by
//! Frobenius distance. The sign character attached to a surface is
//! measured from sample normals rather than tabulated.

use std::collections::HashMap;
use std::f64::consts::PI;

use nalgebra::{Matrix3, Vector3};
use serde::Serialize;

use crate::error::{Error, Result};

/// Frobenius distance below which two matrices are the same element.
pub const DEDUP_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct Isometry {
    pub matrix: Matrix3<f64>,
    pub label: Option<String>,
}

impl Isometry {
    pub fn new(matrix: Matrix3<f64>) -> Self {
        Isometry { matrix, label: None }
    }

    pub fn labeled(matrix: Matrix3<f64>, label: &str) -> Self {
        Isometry { matrix, label: Some(label.to_string()) }
    }

    pub fn identity() -> Self {
        Isometry::labeled(Matrix3::identity(), "id")
    }

    /// Rotation by `angle` about the unit vector `axis` (right-hand rule).
    pub fn rotation(axis: Vector3<f64>, angle: f64) -> Self {
        let a = axis.normalize();
        let (s, c) = angle.sin_cos();
        let k = Matrix3::new(0.0, -a.z, a.y, a.z, 0.0, -a.x, -a.y, a.x, 0.0);
        let m = Matrix3::identity() * c + k * s + a * a.transpose() * (1.0 - c);
        Isometry::new(m)
    }

    pub fn rot_z(angle: f64) -> Self {
        Isometry::rotation(Vector3::z(), angle)
    }

    /// Reflection through the plane through the origin with normal `n`.
    pub fn reflection(n: Vector3<f64>) -> Self {
        let u = n.normalize();
        Isometry::new(Matrix3::identity() - u * u.transpose() * 2.0)
    }

    pub fn apply(&self, p: &Vector3<f64>) -> Vector3<f64> {
        self.matrix * p
    }

    pub fn compose(&self, other: &Isometry) -> Isometry {
        Isometry::new(self.matrix * other.matrix)
    }

    /// Orthogonal, so the inverse is the transpose.
    pub fn inverse(&self) -> Isometry {
        Isometry::new(self.matrix.transpose())
    }

    pub fn det(&self) -> f64 {
        self.matrix.determinant()
    }

    pub fn is_orthogonal(&self, tol: f64) -> bool {
        (self.matrix * self.matrix.transpose() - Matrix3::identity()).norm() < tol
            && (self.det().abs() - 1.0).abs() < tol
    }

    pub fn distance(&self, other: &Isometry) -> f64 {
        (self.matrix - other.matrix).norm()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GroupKind {
    Cyclic,
    Pyramidal,
    Prismatic,
    Antiprismatic,
    Custom,
}

impl GroupKind {
    pub fn parse(s: &str) -> Option<GroupKind> {
        match s {
            "cyclic" => Some(GroupKind::Cyclic),
            "pyramidal" => Some(GroupKind::Pyramidal),
            "prismatic" => Some(GroupKind::Prismatic),
            "antiprismatic" => Some(GroupKind::Antiprismatic),
            "custom" => Some(GroupKind::Custom),
            _ => None,
        }
    }

    /// Order of the standard group of this kind with parameter `m`.
    pub fn order(self, m: usize) -> Option<usize> {
        match self {
            GroupKind::Cyclic => Some(m),
            GroupKind::Pyramidal => Some(2 * m),
            GroupKind::Prismatic | GroupKind::Antiprismatic => Some(4 * m),
            GroupKind::Custom => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SymmetryGroup {
    pub elements: Vec<Isometry>,
    pub generators: Vec<Isometry>,
    pub kind: GroupKind,
    pub order_param: usize,
}

impl SymmetryGroup {
    pub fn order(&self) -> usize {
        self.elements.len()
    }

    /// Index of the element equal to `g`, if any.
    pub fn find(&self, g: &Isometry) -> Option<usize> {
        self.elements.iter().position(|e| e.distance(g) < DEDUP_TOL)
    }

    pub fn is_closed(&self) -> bool {
        self.elements.iter().all(|a| {
            self.find(&a.inverse()).is_some()
                && self.elements.iter().all(|b| self.find(&a.compose(b)).is_some())
        })
    }
}

/// Generators of the standard group of the given kind.
pub fn standard_generators(kind: GroupKind, m: usize) -> Result<Vec<Isometry>> {
    if m == 0 {
        return Err(Error::InvalidParameter("group parameter m must be >= 1".into()));
    }
    let mut gens = vec![Isometry::labeled(Isometry::rot_z(2.0 * PI / m as f64).matrix, "rot_z(2pi/m)")];
    if kind == GroupKind::Cyclic {
        return Ok(gens);
    }
    let a = PI / (2.0 * m as f64);
    // plane {y = x tan(pi/(2m))}
    let refl = Isometry::reflection(Vector3::new(-a.sin(), a.cos(), 0.0));
    gens.push(Isometry::labeled(refl.matrix, "refl_{y = x tan(pi/2m)}"));
    match kind {
        GroupKind::Pyramidal => {}
        GroupKind::Prismatic => {
            gens.push(Isometry::labeled(Matrix3::from_diagonal(&Vector3::new(1.0, 1.0, -1.0)), "refl_{z=0}"))
        }
        GroupKind::Antiprismatic => {
            gens.push(Isometry::labeled(Matrix3::from_diagonal(&Vector3::new(1.0, -1.0, -1.0)), "rot_x(pi)"))
        }
        GroupKind::Cyclic => unreachable!(),
        GroupKind::Custom => {
            return Err(Error::InvalidParameter("custom groups have no standard generators".into()))
        }
    }
    Ok(gens)
}

pub fn standard_group(kind: GroupKind, m: usize) -> Result<SymmetryGroup> {
    let gens = standard_generators(kind, m)?;
    let cap = kind.order(m).unwrap_or(1) + 1;
    let mut g = generate_group(&gens, cap)?;
    g.kind = kind;
    g.order_param = m;
    Ok(g)
}

/// Smallest set closed under composition containing `generators`.
pub fn generate_group(generators: &[Isometry], cap: usize) -> Result<SymmetryGroup> {
    let signed: Vec<(Isometry, i8)> = generators.iter().map(|g| (g.clone(), 1)).collect();
    let (g, _) = generate_with_character(&signed, cap)?;
    Ok(g)
}

/// Closure of signed generators, returning the group and the induced character.
///
/// Fails if some element is reached with both signs, i.e. the generator
/// signs do not extend to a homomorphism.
pub fn generate_with_character(
    generators: &[(Isometry, i8)],
    cap: usize,
) -> Result<(SymmetryGroup, Vec<i8>)> {
    for (g, _) in generators {
        if !g.is_orthogonal(1e-12) {
            return Err(Error::InvalidParameter("generator is not orthogonal".into()));
        }
    }
    let mut elements = vec![Isometry::identity()];
    let mut chars: Vec<i8> = vec![1];
    let mut frontier = vec![0usize];
    while let Some(idx) = frontier.pop() {
        for (gen, s) in generators {
            let cand = gen.compose(&elements[idx]);
            let cs = *s * chars[idx];
            match elements.iter().position(|e| e.distance(&cand) < DEDUP_TOL) {
                Some(j) => {
                    if chars[j] != cs {
                        return Err(Error::InvalidParameter(
                            "generator signs are not a homomorphism".into(),
                        ));
                    }
                }
                None => {
                    if elements.len() >= cap {
                        return Err(Error::NonFiniteGroup { cap });
                    }
                    elements.push(cand);
                    chars.push(cs);
                    frontier.push(elements.len() - 1);
                }
            }
        }
    }
    Ok((
        SymmetryGroup {
            elements,
            generators: generators.iter().map(|(g, _)| g.clone()).collect(),
            kind: GroupKind::Custom,
            order_param: 0,
        },
        chars,
    ))
}

/// Sign character of a group acting on a two-sided surface.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormalCharacter {
    pub signs: Vec<i8>,
}

impl NormalCharacter {
    pub fn trivial(group: &SymmetryGroup) -> Self {
        NormalCharacter { signs: vec![1; group.order()] }
    }

    /// Measure the character at a single sample point of the surface.
    pub fn measure<F>(group: &SymmetryGroup, p: &Vector3<f64>, nu: &Vector3<f64>, normal_at: F) -> Result<Self>
    where
        F: Fn(&Vector3<f64>) -> Vector3<f64>,
    {
        let signs = group
            .elements
            .iter()
            .map(|g| normal_sign(g, p, nu, &normal_at))
            .collect::<Result<Vec<_>>>()?;
        Ok(NormalCharacter { signs })
    }

    pub fn is_homomorphism(&self, group: &SymmetryGroup) -> bool {
        for (i, a) in group.elements.iter().enumerate() {
            for (j, b) in group.elements.iter().enumerate() {
                match group.find(&a.compose(b)) {
                    Some(k) if self.signs[k] == self.signs[i] * self.signs[j] => {}
                    _ => return false,
                }
            }
        }
        true
    }
}

/// +1 if `g` carries the unit normal at `p` to the normal at `g p`, -1 if it reverses it.
pub fn normal_sign<F>(g: &Isometry, p: &Vector3<f64>, nu: &Vector3<f64>, normal_at: F) -> Result<i8>
where
    F: Fn(&Vector3<f64>) -> Vector3<f64>,
{
    if (nu.norm() - 1.0).abs() > 1e-6 {
        return Err(Error::InvalidParameter(format!("sample normal has length {}", nu.norm())));
    }
    let pushed = g.matrix * nu;
    let there = normal_at(&g.apply(p));
    let ip = pushed.dot(&there);
    if ip.abs() < 1e-6 {
        return Err(Error::AmbiguousSign(ip));
    }
    Ok(if ip > 0.0 { 1 } else { -1 })
}

/// Hash grid over a point cloud for tolerance matching.
pub struct PointIndex {
    cell: f64,
    tol: f64,
    map: HashMap<(i64, i64, i64), Vec<usize>>,
    points: Vec<Vector3<f64>>,
}

impl PointIndex {
    pub fn new(points: &[Vector3<f64>], tol: f64) -> Self {
        let cell = (tol * 1e3).max(1e-7);
        let mut map: HashMap<(i64, i64, i64), Vec<usize>> = HashMap::new();
        for (i, p) in points.iter().enumerate() {
            map.entry(Self::key(p, cell)).or_default().push(i);
        }
        PointIndex { cell, tol, map, points: points.to_vec() }
    }

    fn key(p: &Vector3<f64>, cell: f64) -> (i64, i64, i64) {
        ((p.x / cell).floor() as i64, (p.y / cell).floor() as i64, (p.z / cell).floor() as i64)
    }

    /// Nearest indexed point and its distance, if one lies within tolerance.
    pub fn nearest(&self, q: &Vector3<f64>) -> Option<(usize, f64)> {
        let (kx, ky, kz) = Self::key(q, self.cell);
        let mut best: Option<(usize, f64)> = None;
        for dx in -1..=1 {
            for dy in -1..=1 {
                for dz in -1..=1 {
                    if let Some(list) = self.map.get(&(kx + dx, ky + dy, kz + dz)) {
                        for &i in list {
                            let d = (self.points[i] - q).norm();
                            if d <= self.tol && best.map_or(true, |(_, bd)| d < bd) {
                                best = Some((i, d));
                            }
                        }
                    }
                }
            }
        }
        best
    }
}

/// `(1/|G|) sum_g chi(g) (u o g^{-1})` on a sample set closed under `group`.
pub fn project_equivariant(
    values: &[f64],
    points: &[Vector3<f64>],
    group: &SymmetryGroup,
    character: &NormalCharacter,
) -> Result<Vec<f64>> {
    let index = PointIndex::new(points, 1e-9);
    let mut out = vec![0.0; values.len()];
    for (g, &s) in group.elements.iter().zip(&character.signs) {
        let ginv = g.inverse();
        for (k, p) in points.iter().enumerate() {
            let (j, _) = index.nearest(&ginv.apply(p)).ok_or(Error::MissingOrbitPoint(k))?;
            out[k] += s as f64 * values[j];
        }
    }
    let n = group.order() as f64;
    out.iter_mut().for_each(|v| *v /= n);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn standard_orders() {
        for m in 1..=9 {
            assert_eq!(standard_group(GroupKind::Cyclic, m).unwrap().order(), m);
            assert_eq!(standard_group(GroupKind::Pyramidal, m).unwrap().order(), 2 * m);
            assert_eq!(standard_group(GroupKind::Prismatic, m).unwrap().order(), 4 * m);
            assert_eq!(standard_group(GroupKind::Antiprismatic, m).unwrap().order(), 4 * m);
        }
        assert_eq!(standard_group(GroupKind::Prismatic, 8).unwrap().order(), 32);
    }

    #[test]
    fn zero_parameter_rejected() {
        assert!(matches!(standard_group(GroupKind::Cyclic, 0), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn antiprismatic_closure_exhaustive() {
        let g = standard_group(GroupKind::Antiprismatic, 3).unwrap();
        assert_eq!(g.order(), 12);
        assert!(g.is_closed());
    }

    #[test]
    fn generate_from_rotation() {
        let g = generate_group(&[Isometry::rot_z(2.0 * PI / 5.0)], 100).unwrap();
        assert_eq!(g.order(), 5);
        let id = generate_group(&[Isometry::identity()], 10).unwrap();
        assert_eq!(id.order(), 1);
    }

    #[test]
    fn irrational_rotation_hits_cap() {
        let r = generate_group(&[Isometry::rot_z(1.0)], 50);
        assert!(matches!(r, Err(Error::NonFiniteGroup { cap: 50 })));
    }

    #[test]
    fn elements_preserve_norm() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for kind in [GroupKind::Prismatic, GroupKind::Antiprismatic] {
            let g = standard_group(kind, 7).unwrap();
            for e in &g.elements {
                assert!(e.is_orthogonal(1e-12));
                let p = Vector3::new(rng.gen::<f64>(), rng.gen::<f64>(), rng.gen::<f64>());
                assert!((e.apply(&p).norm() - p.norm()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn signs_on_horizontal_disc() {
        let up = Vector3::z();
        let p = Vector3::new(0.3, 0.1, 0.0);
        let field = |_: &Vector3<f64>| Vector3::z();
        assert_eq!(normal_sign(&Isometry::rot_z(0.7), &p, &up, field).unwrap(), 1);
        let refl = Isometry::reflection(Vector3::z());
        assert_eq!(normal_sign(&refl, &p, &up, field).unwrap(), -1);
        let tilt = |_: &Vector3<f64>| Vector3::x();
        assert!(matches!(normal_sign(&Isometry::identity(), &p, &up, tilt), Err(Error::AmbiguousSign(_))));
    }

    fn orbit_cloud(g: &SymmetryGroup, seeds: &[Vector3<f64>]) -> Vec<Vector3<f64>> {
        let mut pts: Vec<Vector3<f64>> = Vec::new();
        for s in seeds {
            for e in &g.elements {
                let q = e.apply(s);
                if !pts.iter().any(|p| (p - q).norm() < 1e-9) {
                    pts.push(q);
                }
            }
        }
        pts
    }

    #[test]
    fn projection_idempotent_and_annihilates_odd() {
        let g = standard_group(GroupKind::Prismatic, 4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let seeds: Vec<_> = (0..5)
            .map(|_| Vector3::new(rng.gen::<f64>(), rng.gen::<f64>(), rng.gen::<f64>() - 0.5))
            .collect();
        let pts = orbit_cloud(&g, &seeds);
        let vals: Vec<f64> = pts.iter().map(|_| rng.gen::<f64>()).collect();
        // character of a horizontal-ish two-sided surface: -1 on elements flipping z
        let chi = NormalCharacter {
            signs: g.elements.iter().map(|e| if e.matrix[(2, 2)] < 0.0 { -1 } else { 1 }).collect(),
        };
        assert!(chi.is_homomorphism(&g));
        let p1 = project_equivariant(&vals, &pts, &g, &chi).unwrap();
        let p2 = project_equivariant(&p1, &pts, &g, &chi).unwrap();
        for (a, b) in p1.iter().zip(&p2) {
            assert!((a - b).abs() < 1e-12);
        }
        let ones = vec![1.0; pts.len()];
        let triv = NormalCharacter::trivial(&g);
        let c = project_equivariant(&ones, &pts, &g, &triv).unwrap();
        assert!(c.iter().all(|v| (v - 1.0).abs() < 1e-12));
        // z is odd under the z-reflection, so the trivial projection kills it
        let z: Vec<f64> = pts.iter().map(|p| p.z).collect();
        let pz = project_equivariant(&z, &pts, &g, &triv).unwrap();
        assert!(pz.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn missing_orbit_point_reported() {
        let g = standard_group(GroupKind::Cyclic, 4).unwrap();
        let pts = vec![Vector3::new(1.0, 0.0, 0.0)];
        let r = project_equivariant(&[1.0], &pts, &g, &NormalCharacter::trivial(&g));
        assert!(matches!(r, Err(Error::MissingOrbitPoint(0))));
    }
}

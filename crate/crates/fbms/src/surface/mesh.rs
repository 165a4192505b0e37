//! Assembly of labeled triangle meshes of the initial surfaces.
//!
//! Each layer is built from one patch over the fundamental domain: a graded polar
//! block around every perforated corner (rays from the catenoid axis to a square of
//! side `pi/(2m)`), uniform rectangles elsewhere. The patch is replicated by the
//! pyramidal group and rotated; the flat disc is attached as concentric rings whose
//! node counts halve toward the center. Welding is done on chart indices, not on
//! ambient positions, because waists can be far below double precision in size.

use std::collections::HashMap;
use std::f64::consts::PI;

use nalgebra::Vector3;
use serde::Serialize;

use super::*;
use crate::balance::{derived_parameters, DerivedParams, StackingParams};

/// Target edge length used when none is given.
pub const DEFAULT_RESOLUTION: f64 = 0.01;

#[derive(Debug, Clone, Serialize)]
pub struct MeshOptions {
    /// Target edge length away from the waists.
    pub resolution: f64,
    /// Build the whole surface; otherwise one patch per layer and no discs.
    pub replicate: bool,
    /// Minimum number of segments on each (half) waist circle.
    pub waist_segments: usize,
    /// Radius `R` of the catenoid labels `K_i(R)`; `None` picks `m^-4`, or `1/(2m)`
    /// when `m^-4` does not exceed the waist radius.
    pub label_radius: Option<f64>,
    pub max_vertices: usize,
}

impl Default for MeshOptions {
    fn default() -> Self {
        MeshOptions { resolution: DEFAULT_RESOLUTION, replicate: true, waist_segments: 32, label_radius: None, max_vertices: 20_000_000 }
    }
}

impl MeshOptions {
    pub fn with_resolution(resolution: f64) -> Self {
        MeshOptions { resolution, ..Default::default() }
    }

    pub fn patch(resolution: f64) -> Self {
        MeshOptions { resolution, replicate: false, ..Default::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RegionKind {
    FlatDisc,
    DiscGraph,
    Catenoid,
    Intermediate,
}

/// Patch coordinates of a graph vertex.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct PatchCoords {
    pub sigma: f64,
    /// `theta` in the patch, in `[-pi/(2m), pi/(2m)]`.
    pub theta: f64,
    /// Global azimuth after replication and layer rotation.
    pub theta_global: f64,
    pub omega: f64,
    /// Corner the vertex was generated from (`+1`, `-1`, or `0` for the rectangles).
    pub corner: i8,
    /// `theta - corner pi/(2m)`, exact even when the waist is tiny.
    pub offset: f64,
    pub mirrored: bool,
}

/// Catenoid coordinates of a vertex inside some `K_i`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CatenoidCoords {
    /// 1-based catenoid index.
    pub index: usize,
    /// Axis position `j`: the axis sits at azimuth `(2j+1) pi/(2m)`.
    pub axis: usize,
    pub t: f64,
    /// Angle from the radial direction, signed in the global azimuth direction.
    pub vartheta: f64,
    /// `tau cosh t`, distance to the axis in `(sigma, theta)`.
    pub r: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct VertexLabel {
    pub kind: RegionKind,
    pub layer: usize,
    pub boundary: bool,
    /// On a waist circle.
    pub waist: bool,
    pub rho: f64,
    pub patch: Option<PatchCoords>,
    pub catenoid: Option<CatenoidCoords>,
}

#[derive(Debug, Clone)]
pub struct SurfaceMesh {
    pub n_layers: usize,
    pub m: usize,
    pub resolution: f64,
    pub replicated: bool,
    pub vertices: Vec<Vector3<f64>>,
    pub normals: Vec<Vector3<f64>>,
    pub faces: Vec<[usize; 3]>,
    pub face_layer: Vec<usize>,
    pub labels: Vec<VertexLabel>,
    pub layers: Vec<LayerSpec>,
    /// Label radius used for each catenoid.
    pub label_radius: Vec<f64>,
    /// Nodes per square edge of the corner blocks.
    pub corner_nodes: usize,
}

impl SurfaceMesh {
    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    /// Distinct `(catenoid, axis)` pairs among catenoid-labeled vertices.
    pub fn catenoid_components(&self) -> usize {
        let mut seen = std::collections::HashSet::new();
        for l in &self.labels {
            if l.kind == RegionKind::Catenoid {
                if let Some(c) = l.catenoid {
                    seen.insert((c.index, c.axis));
                }
            }
        }
        seen.len()
    }

    pub fn count_kind(&self, kind: RegionKind) -> usize {
        self.labels.iter().filter(|l| l.kind == kind).count()
    }

    /// Every interior edge is traversed once in each direction.
    pub fn is_consistently_oriented(&self) -> bool {
        let mut dir: HashMap<(usize, usize), i32> = HashMap::new();
        for f in &self.faces {
            for k in 0..3 {
                let (a, b) = (f[k], f[(k + 1) % 3]);
                *dir.entry((a, b)).or_default() += 1;
            }
        }
        dir.iter().all(|(&(a, b), &c)| c == 1 && dir.get(&(b, a)).map_or(true, |&d| d == 1))
    }
}

#[derive(Debug, Clone, Copy)]
struct PVert {
    sigma: f64,
    theta: f64,
    corner: i8,
    offset: f64,
    /// `ln(r/tau)` for corner vertices.
    lnr: f64,
    r: f64,
    /// Angle of the offset `(sigma, offset)`.
    phi: f64,
    waist: bool,
}

struct Patch {
    verts: Vec<PVert>,
    tris: Vec<[usize; 3]>,
    edge_plus: Vec<usize>,
    edge_minus: Vec<usize>,
    waists: Vec<(i8, Vec<usize>)>,
    outer: Vec<usize>,
}

struct PatchBuilder {
    verts: Vec<PVert>,
    tris: Vec<[usize; 3]>,
    shared: HashMap<(i64, i64), usize>,
    quantum: f64,
}

impl PatchBuilder {
    fn push(&mut self, v: PVert, shared: bool) -> usize {
        if shared {
            let key = ((v.sigma / self.quantum).round() as i64, (v.theta / self.quantum).round() as i64);
            if let Some(&i) = self.shared.get(&key) {
                return i;
            }
            self.verts.push(v);
            self.shared.insert(key, self.verts.len() - 1);
        } else {
            self.verts.push(v);
        }
        self.verts.len() - 1
    }

    /// Add a triangle oriented counterclockwise in `(sigma, theta)`, using local offsets.
    fn tri(&mut self, ids: [usize; 3], local: [(f64, f64); 3]) {
        let area = (local[1].0 - local[0].0) * (local[2].1 - local[0].1)
            - (local[2].0 - local[0].0) * (local[1].1 - local[0].1);
        if area > 0.0 {
            self.tris.push(ids);
        } else if area < 0.0 {
            self.tris.push([ids[0], ids[2], ids[1]]);
        }
    }

    fn plain(sigma: f64, theta: f64) -> PVert {
        PVert { sigma, theta, corner: 0, offset: theta, lnr: f64::NAN, r: f64::NAN, phi: f64::NAN, waist: false }
    }

    /// Uniform rectangle block with node coordinates given explicitly.
    fn rect(&mut self, sig: &[f64], th: &[f64]) -> Vec<Vec<usize>> {
        let (ns, nt) = (sig.len(), th.len());
        let mut ids = vec![vec![0; nt]; ns];
        for i in 0..ns {
            for j in 0..nt {
                let edge = i == 0 || j == 0 || i == ns - 1 || j == nt - 1;
                ids[i][j] = self.push(Self::plain(sig[i], th[j]), edge);
            }
        }
        for i in 0..ns - 1 {
            for j in 0..nt - 1 {
                let p = |a: usize, b: usize| (sig[a], th[b]);
                self.tri([ids[i][j], ids[i + 1][j], ids[i + 1][j + 1]], [p(i, j), p(i + 1, j), p(i + 1, j + 1)]);
                self.tri([ids[i][j], ids[i + 1][j + 1], ids[i][j + 1]], [p(i, j), p(i + 1, j + 1), p(i, j + 1)]);
            }
        }
        ids
    }

    /// Polar block around the corner `(0, c a)`; returns (mirror-ray ids, waist ids).
    fn corner(&mut self, c: i8, a: f64, k: usize, tau: f64, layers: usize) -> (Vec<usize>, Vec<usize>) {
        let cf = c as f64;
        // outer nodes in the plus frame: along theta = 0 then along sigma = a
        let mut outer: Vec<(f64, f64)> = (0..=k).map(|j| (a * j as f64 / k as f64, 0.0)).collect();
        outer.extend((1..=k).map(|j| (a, a * j as f64 / k as f64)));
        let n_rays = outer.len();
        let mut ids = vec![vec![0usize; layers + 1]; n_rays];
        let mut local = vec![vec![(0.0, 0.0); layers + 1]; n_rays];
        for (j, &(s_o, t_o)) in outer.iter().enumerate() {
            let (ds, dt) = (s_o, t_o - a);
            let big_r = ds.hypot(dt);
            let phi = dt.atan2(ds);
            let span = (big_r / tau).ln();
            for kk in 0..=layers {
                let lnr = span * kk as f64 / layers as f64;
                let (r, sigma, off) = if kk == layers {
                    (big_r, s_o, dt)
                } else {
                    let r = tau * lnr.exp();
                    let sigma = if j == 0 { 0.0 } else { r * phi.cos() };
                    let off = if j == n_rays - 1 { 0.0 } else { r * phi.sin() };
                    (r, sigma, off)
                };
                let theta = if kk == layers { cf * t_o } else { cf * (a + off) };
                let v = PVert {
                    sigma,
                    theta,
                    corner: c,
                    offset: cf * off,
                    lnr,
                    r,
                    phi: cf * phi,
                    waist: kk == 0,
                };
                ids[j][kk] = self.push(v, kk == layers);
                local[j][kk] = (sigma, cf * off);
            }
        }
        for j in 0..n_rays - 1 {
            for kk in 0..layers {
                let q = [(j, kk), (j + 1, kk), (j + 1, kk + 1), (j, kk + 1)];
                let id = |t: (usize, usize)| ids[t.0][t.1];
                let lo = |t: (usize, usize)| local[t.0][t.1];
                self.tri([id(q[0]), id(q[1]), id(q[2])], [lo(q[0]), lo(q[1]), lo(q[2])]);
                self.tri([id(q[0]), id(q[2]), id(q[3])], [lo(q[0]), lo(q[2]), lo(q[3])]);
            }
        }
        let mirror: Vec<usize> = (0..=layers).map(|kk| ids[n_rays - 1][kk]).collect();
        let waist: Vec<usize> = (0..n_rays).map(|j| ids[j][0]).collect();
        (mirror, waist)
    }
}

fn radial_layers(a: f64, tau: f64, k: usize) -> usize {
    let step = PI / (2.0 * k as f64);
    (((a * 2f64.sqrt() / tau).ln() / step).ceil() as usize).max(4)
}

fn build_patch(spec: &LayerSpec, k: usize, resolution: f64) -> Patch {
    let a = spec.half_width();
    let mut b = PatchBuilder { verts: Vec::new(), tris: Vec::new(), shared: HashMap::new(), quantum: a * 1e-9 };
    let mut waists = Vec::new();
    let (mirror_plus, waist_plus) = b.corner(1, a, k, spec.plus.tau, radial_layers(a, spec.plus.tau, k));
    waists.push((1i8, waist_plus));
    let mut edge_minus_lo: Vec<usize>;
    match &spec.minus {
        Some(mb) => {
            let (mirror_minus, waist_minus) = b.corner(-1, a, k, mb.tau, radial_layers(a, mb.tau, k));
            waists.push((-1, waist_minus));
            edge_minus_lo = mirror_minus;
        }
        None => {
            let sig: Vec<f64> = (0..=k).map(|i| a * i as f64 / k as f64).collect();
            let th: Vec<f64> = (0..=k).map(|j| a * (j as f64 - k as f64) / k as f64).collect();
            let ids = b.rect(&sig, &th);
            edge_minus_lo = (0..=k).map(|i| ids[i][0]).collect();
        }
    }
    let ns = (((SIGMA_MAX - a) / resolution).ceil() as usize).max(2);
    let sig: Vec<f64> =
        (0..=ns).map(|i| if i == ns { SIGMA_MAX } else { a + (SIGMA_MAX - a) * i as f64 / ns as f64 }).collect();
    let th: Vec<f64> = (0..=2 * k).map(|j| a * (j as f64 - k as f64) / k as f64).collect();
    let ids = b.rect(&sig, &th);
    let mut edge_plus = mirror_plus;
    edge_plus.extend((0..=ns).map(|i| ids[i][2 * k]));
    edge_minus_lo.extend((0..=ns).map(|i| ids[i][0]));
    let dedup = |v: Vec<usize>| {
        let mut out: Vec<usize> = Vec::with_capacity(v.len());
        for x in v {
            if out.last() != Some(&x) {
                out.push(x);
            }
        }
        out
    };
    let outer = (0..=2 * k).map(|j| ids[ns][j]).collect();
    Patch {
        verts: b.verts,
        tris: b.tris,
        edge_plus: dedup(edge_plus),
        edge_minus: dedup(edge_minus_lo),
        waists,
        outer,
    }
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut y = x;
        while self.0[y] != r {
            let n = self.0[y];
            self.0[y] = r;
            y = n;
        }
        r
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.0[hi] = lo;
        }
    }
}

/// Ambient unit normal of the graph over a patch point, oriented for layer `i`.
fn graph_normal(spec: &LayerSpec, sigma: f64, theta_loc: f64, theta_g: f64, omega: f64) -> Vector3<f64> {
    let j = height_jet(spec, sigma, theta_loc).expect("patch vertex inside its domain");
    let (u, e_t, e_w) = frame(theta_g, omega);
    let s = 1.0 - sigma;
    let nu = -u * (s * j.d[0]) + e_t * (j.d[1] / omega.cos()) - e_w;
    let sign = if spec.layer % 2 == 0 { 1.0 } else { -1.0 };
    (nu * sign).normalize()
}

/// Ambient unit normal on a catenoid chart, oriented for catenoid `i`.
fn catenoid_normal(c: &CatenoidCoords, sigma: f64, theta_g: f64, omega: f64) -> Vector3<f64> {
    let (u, e_t, e_w) = frame(theta_g, omega);
    let (t, v) = (c.t, c.vartheta);
    let sech = 1.0 / t.cosh();
    let nu = -u * ((1.0 - sigma) * sech * v.cos()) + e_t * (sech * v.sin() / omega.cos()) - e_w * t.tanh();
    let sign = if c.index % 2 == 1 { 1.0 } else { -1.0 };
    (nu * sign).normalize()
}

/// Radial, azimuthal and latitudinal unit vectors at `(theta, omega)`.
pub(crate) fn frame(theta: f64, omega: f64) -> (Vector3<f64>, Vector3<f64>, Vector3<f64>) {
    let (st, ct) = theta.sin_cos();
    let (sw, cw) = omega.sin_cos();
    (
        Vector3::new(ct * cw, st * cw, sw),
        Vector3::new(-st, ct, 0.0),
        Vector3::new(-ct * sw, -st * sw, cw),
    )
}

pub fn assemble_surface(p: &StackingParams, resolution: f64) -> Result<SurfaceMesh> {
    assemble_surface_with(p, &MeshOptions::with_resolution(resolution))
}

pub fn assemble_surface_with(p: &StackingParams, opts: &MeshOptions) -> Result<SurfaceMesh> {
    let d = derived_parameters(p)?;
    assemble_from_derived(&d, opts)
}

/// Label radius for catenoid `i`.
pub fn label_radius(d: &DerivedParams, i: usize, opts: &MeshOptions) -> f64 {
    let m = d.m as f64;
    match opts.label_radius {
        Some(r) => r.min(0.5 / m),
        None => {
            let r = m.powi(-4);
            if r > d.tau[i - 1] {
                r
            } else {
                0.5 / m
            }
        }
    }
}

pub fn assemble_from_derived(d: &DerivedParams, opts: &MeshOptions) -> Result<SurfaceMesh> {
    let specs = layer_specs(d)?;
    let m = d.m;
    let mf = m as f64;
    let a = PI / (2.0 * mf);
    let res = opts.resolution;
    if !(res.is_finite() && res > 0.0) || res > 0.5 / mf {
        return Err(Error::Refinement(format!(
            "resolution {res} cannot resolve the catenoid regions of radius 1/(2m) = {:.4}",
            0.5 / mf
        )));
    }
    let min_k = opts.waist_segments.div_ceil(2).max(2);
    let k = ((a / res).ceil() as usize).max(min_k).next_power_of_two();
    let label_r: Vec<f64> = (1..d.n_layers).map(|i| label_radius(d, i, opts)).collect();

    let patches: Vec<Patch> = specs.iter().map(|s| build_patch(s, k, res)).collect();
    let copies: Vec<(usize, bool)> =
        if opts.replicate { (0..m).flat_map(|c| [(c, false), (c, true)]).collect() } else { vec![(0, false)] };
    let estimate: usize = patches.iter().map(|p| p.verts.len()).sum::<usize>() * copies.len();
    if estimate > opts.max_vertices {
        return Err(Error::Refinement(format!(
            "about {estimate} vertices exceed the limit {}; coarsen the resolution or build patches only",
            opts.max_vertices
        )));
    }

    let mut verts: Vec<Vector3<f64>> = Vec::with_capacity(estimate);
    let mut normals = Vec::with_capacity(estimate);
    let mut labels: Vec<VertexLabel> = Vec::with_capacity(estimate);
    let mut faces = Vec::new();
    let mut face_layer = Vec::new();
    // (layer, copy) -> base index
    let mut base: HashMap<(usize, usize), usize> = HashMap::new();
    struct Arc {
        layer: usize,
        catenoid: usize,
        axis: usize,
        side: i8,
        ids: Vec<usize>,
        tau: f64,
    }
    let mut arcs: Vec<Arc> = Vec::new();
    let wrap_axis = |angle: f64| -> usize {
        let j = ((angle - a) / (2.0 * a)).round() as i64;
        j.rem_euclid(2 * m as i64) as usize
    };

    for (spec, patch) in specs.iter().zip(&patches) {
        // per-patch evaluation, shared by all copies
        let local: Vec<(f64, Option<(usize, f64, f64)>)> = patch
            .verts
            .iter()
            .map(|v| {
                if v.corner != 0 {
                    let b = spec.bridge(v.corner).expect("corner has a bridge");
                    if v.r <= 0.5 / mf * (1.0 + 1e-12) {
                        let s = spec.half_sign(b);
                        let e = v.lnr.exp();
                        let t = s * (e + ((e - 1.0) * (e + 1.0)).max(0.0).sqrt()).ln();
                        return Ok((b.hk + b.tau * t, Some((b.catenoid, t, v.phi))));
                    }
                }
                Ok((height_jet(spec, v.sigma, v.theta)?.v, None))
            })
            .collect::<Result<_>>()?;
        for (ci, &(c, refl)) in copies.iter().enumerate() {
            let start = verts.len();
            base.insert((spec.layer, ci), start);
            let shift = spec.rotation + 4.0 * a * c as f64;
            let map_theta = |th: f64| if refl { shift + 2.0 * a - th } else { shift + th };
            for (v, &(omega, cat)) in patch.verts.iter().zip(&local) {
                let tg = map_theta(v.theta);
                let pos = phi_unchecked(v.sigma, tg, omega);
                let catc = cat.map(|(idx, t, phi)| {
                    let axis_angle = map_theta(v.corner as f64 * a);
                    CatenoidCoords {
                        index: idx,
                        axis: wrap_axis(axis_angle),
                        t,
                        vartheta: if refl { -phi } else { phi },
                        r: v.r,
                    }
                });
                let kind = match catc {
                    Some(cc) if cc.r <= label_r[cc.index - 1] * (1.0 + 1e-12) => RegionKind::Catenoid,
                    _ if v.sigma < 3.0 / mf => RegionKind::Intermediate,
                    _ => RegionKind::DiscGraph,
                };
                let rho = match (catc, v.corner) {
                    (Some(cc), c) => rho_catenoid(spec.bridge(c).unwrap().tau, cc.t),
                    _ => rho_patch(spec, v.sigma, v.theta),
                };
                let normal = match catc {
                    Some(cc) => catenoid_normal(&cc, v.sigma, tg, omega),
                    None => graph_normal(spec, v.sigma, v.theta, tg, omega),
                };
                verts.push(pos);
                normals.push(normal);
                labels.push(VertexLabel {
                    kind,
                    layer: spec.layer,
                    boundary: v.sigma == 0.0,
                    waist: v.waist,
                    rho,
                    patch: Some(PatchCoords {
                        sigma: v.sigma,
                        theta: v.theta,
                        theta_global: tg,
                        omega,
                        corner: v.corner,
                        offset: v.offset,
                        mirrored: refl,
                    }),
                    catenoid: catc,
                });
            }
            // graph triangles are counterclockwise in (sigma, theta), i.e. normal along -omega
            let flip = (spec.layer % 2 == 1) != refl;
            for t in &patch.tris {
                let f = if flip { [t[0], t[2], t[1]] } else { *t };
                faces.push([start + f[0], start + f[1], start + f[2]]);
                face_layer.push(spec.layer);
            }
            for (corner, ids) in &patch.waists {
                let b = spec.bridge(*corner).unwrap();
                let side = if refl { -corner } else { *corner };
                arcs.push(Arc {
                    layer: spec.layer,
                    catenoid: b.catenoid,
                    axis: wrap_axis(map_theta(*corner as f64 * a)),
                    // the plus corner block lies below its axis in theta
                    side: -side,
                    ids: ids.iter().map(|&x| start + x).collect(),
                    tau: b.tau,
                });
            }
        }
    }

    let mut uf = UnionFind((0..verts.len()).collect());
    if opts.replicate {
        for (spec, patch) in specs.iter().zip(&patches) {
            for c in 0..m {
                let orig = base[&(spec.layer, 2 * c)];
                let refl = base[&(spec.layer, 2 * c + 1)];
                let prev_refl = base[&(spec.layer, 2 * ((c + m - 1) % m) + 1)];
                for &v in &patch.edge_plus {
                    uf.union(orig + v, refl + v);
                }
                for &v in &patch.edge_minus {
                    uf.union(orig + v, prev_refl + v);
                }
            }
        }
        let mut groups: HashMap<(usize, usize, i8), Vec<usize>> = HashMap::new();
        for (n, arc) in arcs.iter().enumerate() {
            groups.entry((arc.catenoid, arc.axis, arc.side)).or_default().push(n);
        }
        for (key, members) in &groups {
            if members.len() != 2 || arcs[members[0]].layer == arcs[members[1]].layer {
                return Err(Error::MeshIntegrity(format!(
                    "waist of K_{} at axis {} (side {}) has {} half-catenoids instead of one from each adjacent layer",
                    key.0,
                    key.1,
                    key.2,
                    members.len()
                )));
            }
            let (x, y) = (&arcs[members[0]], &arcs[members[1]]);
            for (&p, &q) in x.ids.iter().zip(&y.ids) {
                let (lp, lq) = (labels[p].patch.unwrap(), labels[q].patch.unwrap());
                let mis = (lp.sigma - lq.sigma).abs()
                    + ((lp.theta_global - lq.theta_global).rem_euclid(2.0 * PI)).min(
                        (lq.theta_global - lp.theta_global).rem_euclid(2.0 * PI),
                    ) * 0.0
                    + ((if lp.mirrored { -lp.offset } else { lp.offset })
                        - (if lq.mirrored { -lq.offset } else { lq.offset }))
                    .abs();
                if mis > 1e-9 * x.tau.max(1e-300) {
                    return Err(Error::MeshIntegrity(format!(
                        "waist nodes of K_{} disagree by {mis:.3e}",
                        x.catenoid
                    )));
                }
                uf.union(p, q);
            }
        }
    }

    // compress
    let n_raw = verts.len();
    let mut new_id = vec![usize::MAX; n_raw];
    let mut keep = Vec::new();
    for v in 0..n_raw {
        let r = uf.find(v);
        if new_id[r] == usize::MAX {
            new_id[r] = keep.len();
            keep.push(r);
        }
        new_id[v] = new_id[r];
    }
    let mut vertices: Vec<Vector3<f64>> = keep.iter().map(|&r| verts[r]).collect();
    let mut vnormals: Vec<Vector3<f64>> = keep.iter().map(|&r| normals[r]).collect();
    let mut vlabels: Vec<VertexLabel> = keep.iter().map(|&r| labels[r].clone()).collect();
    let mut vfaces: Vec<[usize; 3]> = Vec::with_capacity(faces.len());
    let mut vface_layer = Vec::with_capacity(faces.len());
    for (f, &l) in faces.iter().zip(&face_layer) {
        let g = [new_id[f[0]], new_id[f[1]], new_id[f[2]]];
        if g[0] != g[1] && g[1] != g[2] && g[0] != g[2] {
            vfaces.push(g);
            vface_layer.push(l);
        }
    }

    if opts.replicate {
        for (spec, patch) in specs.iter().zip(&patches) {
            let mut ring: Vec<(f64, usize)> = Vec::new();
            for ci in 0..copies.len() {
                let start = base[&(spec.layer, ci)];
                for &v in &patch.outer {
                    let id = new_id[start + v];
                    let tg = vlabels[id].patch.unwrap().theta_global.rem_euclid(2.0 * PI);
                    ring.push((tg, id));
                }
            }
            ring.sort_by(|x, y| x.0.total_cmp(&y.0));
            ring.dedup_by(|x, y| x.1 == y.1);
            let expected = 4 * m * k;
            if ring.len() != expected {
                return Err(Error::MeshIntegrity(format!(
                    "outer ring of layer {} has {} nodes, expected {expected}",
                    spec.layer,
                    ring.len()
                )));
            }
            // rotate so that the ring starts at azimuth 0
            let start = ring.iter().position(|x| x.0 < 1e-9 || x.0 > 2.0 * PI - 1e-9).unwrap_or(0);
            ring.rotate_left(start);
            let ids: Vec<usize> = ring.iter().map(|x| x.1).collect();
            attach_disc(spec, &ids, &mut vertices, &mut vnormals, &mut vlabels, &mut vfaces, &mut vface_layer);
        }
    }

    Ok(SurfaceMesh {
        n_layers: d.n_layers,
        m,
        resolution: res,
        replicated: opts.replicate,
        vertices,
        normals: vnormals,
        faces: vfaces,
        face_layer: vface_layer,
        labels: vlabels,
        layers: specs,
        label_radius: label_r,
        corner_nodes: k,
    })
}

#[allow(clippy::too_many_arguments)]
fn attach_disc(
    spec: &LayerSpec,
    outer: &[usize],
    vertices: &mut Vec<Vector3<f64>>,
    normals: &mut Vec<Vector3<f64>>,
    labels: &mut Vec<VertexLabel>,
    faces: &mut Vec<[usize; 3]>,
    face_layer: &mut Vec<usize>,
) {
    let m = spec.m;
    let hb = spec.hb;
    let up = if spec.layer % 2 == 1 { 1.0 } else { -1.0 };
    let normal = Vector3::new(0.0, 0.0, up);
    let label = VertexLabel {
        kind: RegionKind::FlatDisc,
        layer: spec.layer,
        boundary: false,
        waist: false,
        rho: m as f64,
        patch: None,
        catenoid: None,
    };
    let r0 = disc_radius(hb);
    let n0 = outer.len();
    let s0 = 2.0 * PI * r0 / n0 as f64;
    let mut ring_ids: Vec<usize> = outer.to_vec();
    let mut ring_xy: Vec<(f64, f64)> = outer.iter().map(|&i| (vertices[i].x, vertices[i].y)).collect();
    let mut r = r0;
    let mut n = n0;
    let mut add_face = |f: [usize; 3], xy: [(f64, f64); 3], faces: &mut Vec<[usize; 3]>| {
        let area = (xy[1].0 - xy[0].0) * (xy[2].1 - xy[0].1) - (xy[2].0 - xy[0].0) * (xy[1].1 - xy[0].1);
        let ccw = if area > 0.0 { f } else { [f[0], f[2], f[1]] };
        faces.push(if up > 0.0 { ccw } else { [ccw[0], ccw[2], ccw[1]] });
        face_layer.push(spec.layer);
    };
    loop {
        let step = 2.0 * PI * r / n as f64;
        let r_next = r - step;
        let can_halve = n % (4 * m) == 0;
        let minimal = !can_halve;
        if r_next < s0.max(step * 0.5) && minimal || r_next <= 0.0 {
            break;
        }
        let n_next = if can_halve && 2.0 * PI * r_next / (n as f64) < s0 / 1.5 { n / 2 } else { n };
        let mut next_ids = Vec::with_capacity(n_next);
        let mut next_xy = Vec::with_capacity(n_next);
        for j in 0..n_next {
            let ang = 2.0 * PI * j as f64 / n_next as f64;
            let (x, y) = (r_next * ang.cos(), r_next * ang.sin());
            vertices.push(Vector3::new(x, y, hb));
            normals.push(normal);
            labels.push(label.clone());
            next_ids.push(vertices.len() - 1);
            next_xy.push((x, y));
        }
        if n_next == n {
            for j in 0..n {
                let j1 = (j + 1) % n;
                add_face([ring_ids[j], ring_ids[j1], next_ids[j1]], [ring_xy[j], ring_xy[j1], next_xy[j1]], faces);
                add_face([ring_ids[j], next_ids[j1], next_ids[j]], [ring_xy[j], next_xy[j1], next_xy[j]], faces);
            }
        } else {
            for j in 0..n_next {
                let (a0, a1, a2) = (2 * j, 2 * j + 1, (2 * j + 2) % n);
                let (b0, b1) = (j, (j + 1) % n_next);
                add_face([ring_ids[a0], ring_ids[a1], next_ids[b0]], [ring_xy[a0], ring_xy[a1], next_xy[b0]], faces);
                add_face([ring_ids[a1], next_ids[b1], next_ids[b0]], [ring_xy[a1], next_xy[b1], next_xy[b0]], faces);
                add_face([ring_ids[a1], ring_ids[a2], next_ids[b1]], [ring_xy[a1], ring_xy[a2], next_xy[b1]], faces);
            }
        }
        ring_ids = next_ids;
        ring_xy = next_xy;
        r = r_next;
        n = n_next;
    }
    vertices.push(Vector3::new(0.0, 0.0, hb));
    normals.push(normal);
    labels.push(label);
    let c = vertices.len() - 1;
    for j in 0..n {
        let j1 = (j + 1) % n;
        add_face([c, ring_ids[j], ring_ids[j1]], [(0.0, 0.0), ring_xy[j], ring_xy[j1]], faces);
    }
}

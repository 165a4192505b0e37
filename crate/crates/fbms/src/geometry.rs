//! First and second fundamental forms of the initial surfaces, mean curvature,
//! weighted norms and vertical forces.
//!
//! Two independent evaluators are provided. [`forms_generic`] works for any chart into
//! `Phi`-coordinates (or Euclidean space): derivatives of the chart come from
//! eighth-order central differences, the normal is the metric cross product, and its
//! derivatives follow by the chain rule. The closed forms [`forms_catenoid`] and
//! [`forms_disc_graph`] evaluate explicit expressions in catenoid and graph coordinates.
//!
//! Charts return offsets from a base point so that waists far below double precision
//! in ambient size keep their relative accuracy.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::ops::{Add, Div, Mul, Neg, Sub};

use nalgebra::{Matrix2, Vector3};
use serde::Serialize;

use crate::balance::DerivedParams;
use crate::surface::mesh::frame;
use crate::surface::{height_jet, layer_specs, LayerSpec, RegionKind, SurfaceMesh};
use crate::util::arcosh;
use crate::{Error, Result};

/// Difference step of the generic evaluator on catenoid charts, in `(t, vartheta)`.
pub const CATENOID_FD_STEP: f64 = 0.05;
/// Difference step of the generic evaluator on graph charts, in units of `1/m`.
pub const GRAPH_FD_STEP: f64 = 2.5e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum AmbientMetric {
    /// `d sigma^2 + (1-sigma)^2 cos^2 omega d theta^2 + (1-sigma)^2 d omega^2`.
    Phi,
    Euclidean,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct FundamentalForms {
    pub g: [[f64; 2]; 2],
    pub a: [[f64; 2]; 2],
    /// Ambient unit normal.
    pub nu: [f64; 3],
    pub h: f64,
    pub norm_a2: f64,
}

impl FundamentalForms {
    fn new(g: Matrix2<f64>, a: Matrix2<f64>, nu: Vector3<f64>) -> Result<Self> {
        let gi = g
            .try_inverse()
            .filter(|_| g.determinant() > 0.0)
            .ok_or_else(|| Error::Immersion(format!("degenerate first fundamental form {g:?}")))?;
        let ga = gi * a;
        Ok(FundamentalForms {
            g: [[g[(0, 0)], g[(0, 1)]], [g[(1, 0)], g[(1, 1)]]],
            a: [[a[(0, 0)], a[(0, 1)]], [a[(1, 0)], a[(1, 1)]]],
            nu: [nu.x, nu.y, nu.z],
            h: ga.trace(),
            norm_a2: (ga * ga).trace(),
        })
    }

    /// Flat forms in orthonormal coordinates with the given normal.
    pub fn flat(nu: Vector3<f64>) -> Self {
        FundamentalForms { g: [[1.0, 0.0], [0.0, 1.0]], a: [[0.0; 2]; 2], nu: [nu.x, nu.y, nu.z], h: 0.0, norm_a2: 0.0 }
    }
}

/// Value and one directional derivative.
#[derive(Debug, Clone, Copy)]
struct Dual(f64, f64);

impl Add for Dual {
    type Output = Dual;
    fn add(self, o: Dual) -> Dual {
        Dual(self.0 + o.0, self.1 + o.1)
    }
}
impl Sub for Dual {
    type Output = Dual;
    fn sub(self, o: Dual) -> Dual {
        Dual(self.0 - o.0, self.1 - o.1)
    }
}
impl Mul for Dual {
    type Output = Dual;
    fn mul(self, o: Dual) -> Dual {
        Dual(self.0 * o.0, self.0 * o.1 + self.1 * o.0)
    }
}
impl Div for Dual {
    type Output = Dual;
    fn div(self, o: Dual) -> Dual {
        Dual(self.0 / o.0, (self.1 * o.0 - self.0 * o.1) / (o.0 * o.0))
    }
}
impl Neg for Dual {
    type Output = Dual;
    fn neg(self) -> Dual {
        Dual(-self.0, -self.1)
    }
}
impl Dual {
    fn c(v: f64) -> Dual {
        Dual(v, 0.0)
    }
    fn cos(self) -> Dual {
        Dual(self.0.cos(), -self.0.sin() * self.1)
    }
}

const D1: [f64; 4] = [4.0 / 5.0, -1.0 / 5.0, 4.0 / 105.0, -1.0 / 280.0];
const D2: [f64; 5] = [-205.0 / 72.0, 8.0 / 5.0, -1.0 / 5.0, 8.0 / 315.0, -1.0 / 560.0];

/// Position, first and second derivatives of a chart by eighth-order differences.
fn chart_jet<F: Fn(f64, f64) -> [f64; 3]>(chart: &F, h: f64) -> ([f64; 3], [[f64; 3]; 2], [[[f64; 3]; 2]; 2]) {
    let at = |u: f64, v: f64| chart(u * h, v * h);
    let x0 = at(0.0, 0.0);
    let mut d1 = [[0.0; 3]; 2];
    let mut d2 = [[[0.0; 3]; 2]; 2];
    for j in 0..3 {
        d2[0][0][j] = D2[0] * x0[j];
        d2[1][1][j] = D2[0] * x0[j];
    }
    for k in 1..=4 {
        let kf = k as f64;
        let (up, um, vp, vm) = (at(kf, 0.0), at(-kf, 0.0), at(0.0, kf), at(0.0, -kf));
        for j in 0..3 {
            d1[0][j] += D1[k - 1] * (up[j] - um[j]);
            d1[1][j] += D1[k - 1] * (vp[j] - vm[j]);
            d2[0][0][j] += D2[k] * (up[j] + um[j]);
            d2[1][1][j] += D2[k] * (vp[j] + vm[j]);
        }
    }
    for k in 1..=4 {
        for l in 1..=4 {
            let (kf, lf) = (k as f64, l as f64);
            let (pp, pm, mp, mm) = (at(kf, lf), at(kf, -lf), at(-kf, lf), at(-kf, -lf));
            let w = D1[k - 1] * D1[l - 1];
            for j in 0..3 {
                d2[0][1][j] += w * (pp[j] - pm[j] - mp[j] + mm[j]);
            }
        }
    }
    for j in 0..3 {
        d1[0][j] /= h;
        d1[1][j] /= h;
        d2[0][0][j] /= h * h;
        d2[1][1][j] /= h * h;
        d2[0][1][j] /= h * h;
        d2[1][0][j] = d2[0][1][j];
    }
    (x0, d1, d2)
}

/// Metric coefficients `(g_ss, g_tt, g_ww)` and their partials in `sigma` and `omega`.
fn ambient(metric: AmbientMetric, x: &[f64; 3]) -> ([f64; 3], [[f64; 3]; 3]) {
    match metric {
        AmbientMetric::Euclidean => ([1.0; 3], [[0.0; 3]; 3]),
        AmbientMetric::Phi => {
            let s = 1.0 - x[0];
            let (sw, cw) = x[2].sin_cos();
            let g = [1.0, s * s * cw * cw, s * s];
            // dg[k][i]: derivative of g_ii along coordinate k
            let dg = [[0.0, -2.0 * s * cw * cw, -2.0 * s], [0.0; 3], [0.0, -s * s * 2.0 * sw * cw, 0.0]];
            (g, dg)
        }
    }
}

/// Forms of `base + chart(s)` at `s = 0`.
///
/// `orientation` multiplies the cross-product normal. `fd_step` is in chart units.
pub fn forms_generic<F: Fn(f64, f64) -> [f64; 3]>(
    chart: F,
    base: [f64; 3],
    fd_step: f64,
    metric: AmbientMetric,
    orientation: f64,
) -> Result<FundamentalForms> {
    if !(fd_step > 0.0 && fd_step.is_finite()) {
        return Err(Error::InvalidParameter(format!("fd_step {fd_step} must be positive")));
    }
    let (off, d1, d2) = chart_jet(&chart, fd_step);
    let x = [base[0] + off[0], base[1] + off[1], base[2] + off[2]];
    let (g, dg) = ambient(metric, &x);
    let phi_metric = metric == AmbientMetric::Phi;
    // normal and its derivative along s_b
    let normal = |b: Option<usize>| -> [Dual; 3] {
        let dx = |j: usize| Dual(x[j], b.map_or(0.0, |b| d1[b][j]));
        let p = |a: usize, j: usize| Dual(d1[a][j], b.map_or(0.0, |b| d2[a][b][j]));
        let (ns, mut nt, mut nw) = (
            p(0, 1) * p(1, 2) - p(1, 1) * p(0, 2),
            p(0, 2) * p(1, 0) - p(0, 0) * p(1, 2),
            p(0, 0) * p(1, 1) - p(0, 1) * p(1, 0),
        );
        if phi_metric {
            let s = Dual::c(1.0) - dx(0);
            let cw = dx(2).cos();
            nt = nt / (s * s * cw * cw);
            nw = nw / (s * s);
        }
        let o = Dual::c(orientation);
        [o * ns, o * nt, o * nw]
    };
    let n0 = normal(None);
    let nb = [normal(Some(0)), normal(Some(1))];
    let nu = [n0[0].0, n0[1].0, n0[2].0];
    let nu_len = (0..3).map(|j| g[j] * nu[j] * nu[j]).sum::<f64>().sqrt();
    if !(nu_len > 0.0) {
        return Err(Error::Immersion("chart differential has rank below 2".into()));
    }
    let gdot = |u: &[f64; 3], v: &[f64; 3]| (0..3).map(|j| g[j] * u[j] * v[j]).sum::<f64>();
    let nu_g = |u: &[f64; 3], v: &[f64; 3]| {
        (0..3).map(|j| (0..3).map(|k| nu[k] * dg[k][j]).sum::<f64>() * u[j] * v[j]).sum::<f64>()
    };
    let mut gm = Matrix2::zeros();
    let mut am = Matrix2::zeros();
    for a in 0..2 {
        for b in 0..2 {
            gm[(a, b)] = gdot(&d1[a], &d1[b]);
            let dnb = [nb[b][0].1, nb[b][1].1, nb[b][2].1];
            let dna = [nb[a][0].1, nb[a][1].1, nb[a][2].1];
            am[(a, b)] = -(nu_g(&d1[a], &d1[b]) + gdot(&d1[a], &dnb) + gdot(&d1[b], &dna)) / (2.0 * nu_len);
        }
    }
    let amb = match metric {
        AmbientMetric::Euclidean => Vector3::new(nu[0], nu[1], nu[2]),
        AmbientMetric::Phi => {
            let (u, e_t, e_w) = frame(x[1], x[2]);
            let s = 1.0 - x[0];
            -u * nu[0] + e_t * (s * x[2].cos() * nu[1]) + e_w * (s * nu[2])
        }
    };
    FundamentalForms::new(gm, am, amb.normalize())
}

/// Generic forms of the catenoid chart of `K_i` in `(t, vartheta)`.
pub fn forms_generic_catenoid(i: usize, t: f64, vartheta: f64, d: &DerivedParams, fd_step: f64) -> Result<FundamentalForms> {
    check_catenoid(i, d)?;
    let tau = d.tau[i - 1];
    let center = catenoid_center(i, d.m);
    let chart = |u: f64, v: f64| {
        let (tt, vv) = (t + u, vartheta + v);
        let r = tau * tt.cosh();
        [r * vv.cos(), r * vv.sin(), tau * tt]
    };
    // the cross product of (d_t, d_vartheta) points opposite to the layer-i side normal
    let orientation = if i % 2 == 0 { 1.0 } else { -1.0 };
    forms_generic(chart, [0.0, center, d.hk[i - 1]], fd_step, AmbientMetric::Phi, orientation)
}

/// Generic forms of the graph chart of layer `i` in patch coordinates.
///
/// `fd_step` is scaled by `1/m`, the natural length of the height functions.
pub fn forms_generic_disc_graph(i: usize, sigma: f64, theta: f64, d: &DerivedParams, fd_step: f64) -> Result<FundamentalForms> {
    let spec = layer_spec(i, d)?;
    height_jet(&spec, sigma, theta)?;
    let chart = |u: f64, v: f64| [u, v, crate::surface::height_jet_extended(&spec, sigma + u, theta + v).map_or(f64::NAN, |j| j.v)];
    let orientation = if i % 2 == 1 { 1.0 } else { -1.0 };
    forms_generic(chart, [sigma, theta, 0.0], fd_step / d.m as f64, AmbientMetric::Phi, orientation)
}

fn check_catenoid(i: usize, d: &DerivedParams) -> Result<()> {
    if i == 0 || i >= d.n_layers {
        return Err(Error::InvalidParameter(format!("catenoid {i} out of range 1..{}", d.n_layers)));
    }
    Ok(())
}

fn catenoid_center(i: usize, m: usize) -> f64 {
    let a = PI / (2.0 * m as f64);
    if i % 2 == 1 {
        a
    } else {
        -a
    }
}

fn layer_spec(i: usize, d: &DerivedParams) -> Result<LayerSpec> {
    layer_specs(d)?
        .into_iter()
        .find(|s| s.layer == i)
        .ok_or_else(|| Error::InvalidParameter(format!("layer {i} out of range 1..={}", d.n_layers)))
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct CatenoidForms {
    pub forms: FundamentalForms,
    /// Largest entry of `r^-2 g - (dt^2 + dvartheta^2)`.
    pub metric_residual: f64,
    /// `rho^-2 |A|^2 - 2 sech^2 t`.
    pub a2_residual: f64,
}

/// Closed-form forms on `K_i` in `(t, vartheta)`.
pub fn forms_catenoid(i: usize, t: f64, vartheta: f64, d: &DerivedParams) -> Result<CatenoidForms> {
    check_catenoid(i, d)?;
    let tau = d.tau[i - 1];
    if t.abs() > d.a[i - 1] * (1.0 + 1e-12) {
        return Err(Error::Domain(format!("|t| = {} exceeds a_{i} = {}", t.abs(), d.a[i - 1])));
    }
    let (sh, ch, th) = (t.sinh(), t.cosh(), t.tanh());
    let sech = 1.0 / ch;
    let (sv, cv) = vartheta.sin_cos();
    let s2v = (2.0 * vartheta).sin();
    let r = tau * ch;
    let sig = r * cv;
    let om = d.hk[i - 1] + tau * t;
    let (sw, cw) = om.sin_cos();
    let tw = om.tan();
    let one = 1.0 - sig;
    let ss = sig * (2.0 - sig);
    let q = ss * cw * cw + sw * sw;

    let model = Matrix2::new(
        1.0 - ss * sech * sech - q * th * th * sv * sv,
        -0.5 * q * th * s2v,
        -0.5 * q * th * s2v,
        1.0 - q * cv * cv,
    );
    let g = model * (r * r);
    let nu_len = (1.0 + sech * sech * tw * tw * sv * sv - ss * sech * sech * cv * cv).sqrt();

    let btt = one + 2.0 * tau * sh * th * cv.powi(3) - 2.0 * tau * one * tw * th * sv * sv
        + tau * one * one * cw * cw * sh * th * sv * sv * cv
        + tau * one * one * sech * cv
        - tau * one * sw * cw * sh * sh * th * sv * sv;
    let btv = tau * one * one * cw * cw * sh * s2v * cv - 2.0 * tau * sh * s2v * cv
        - tau * one * tw * (cw * cw * sh * sh + 1.0) * s2v;
    let bvv = (sig - 1.0) + 2.0 * tau * ch * sv * sv * cv + tau * one * one * cw * cw * ch * cv.powi(3)
        - tau * one * sw * cw * sh * ch * cv * cv;
    let sign = if i % 2 == 1 { 1.0 } else { -1.0 };
    let a = Matrix2::new(btt, 0.5 * btv, 0.5 * btv, bvv) * (sign * tau / nu_len);

    let (u, e_t, e_w) = frame(catenoid_center(i, d.m) + r * sv, om);
    let nu = (-u * (one * sech * cv) + e_t * (sech * sv / cw) - e_w * th) * sign;
    let forms = FundamentalForms::new(g, a, nu.normalize())?;
    let metric_residual = (model - Matrix2::identity()).abs().max();
    let a2_residual = r * r * forms.norm_a2 - 2.0 * sech * sech;
    Ok(CatenoidForms { forms, metric_residual, a2_residual })
}

/// Closed-form forms of the graph of layer `i` over patch coordinates.
pub fn forms_disc_graph(i: usize, sigma: f64, theta: f64, d: &DerivedParams) -> Result<FundamentalForms> {
    let spec = layer_spec(i, d)?;
    let j = height_jet(&spec, sigma, theta)?;
    forms_from_height(i, sigma, theta, j.v, j.d, j.h)
}

fn forms_from_height(i: usize, sigma: f64, theta: f64, h: f64, dh: [f64; 2], hh: [[f64; 2]; 2]) -> Result<FundamentalForms> {
    let (hs, ht) = (dh[0], dh[1]);
    let (hss, hst, htt) = (hh[0][0], hh[0][1], hh[1][1]);
    let one = 1.0 - sigma;
    let (sh, ch) = h.sin_cos();
    let tn = h.tan();
    let g = Matrix2::new(
        1.0 + one * one * hs * hs,
        one * one * hs * ht,
        one * one * hs * ht,
        one * one * ch * ch + one * one * ht * ht,
    );
    let nu_len = (1.0 + hs * hs + ht * ht - sigma * (2.0 - sigma) * hs * hs + ht * ht * tn * tn).sqrt();
    let css = -one * hss + 2.0 * hs + one * one * hs.powi(3);
    let cst = -one * hst + one * one * hs * hs * ht - one * hs * ht * tn;
    let ctt = -one * htt + one * one * hs * ch * ch - one * sh * ch - 2.0 * one * ht * ht * tn + one * one * hs * ht * ht;
    let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
    let a = Matrix2::new(css, cst, cst, ctt) * (sign / nu_len);
    let (u, e_t, e_w) = frame(theta, h);
    let nu = (u * (-one * hs) + e_t * (ht / ch) - e_w) * sign;
    FundamentalForms::new(g, a, nu.normalize())
}

#[derive(Debug, Clone, Serialize)]
pub struct MeanCurvatureField {
    pub h: Vec<f64>,
    /// `sup rho^-1 |H|` over catenoid-labeled vertices.
    pub sup_catenoid_rho1: f64,
    /// `sup rho^-2 |H|` over catenoid-labeled vertices.
    pub sup_catenoid_rho2: f64,
    /// `sup rho^-2 |H|` over graph vertices of the layers.
    pub sup_disc: f64,
    /// `sup rho^-2 |H - disloc_i Lap(vbar-hat)(varpi)|` over the same vertices.
    pub sup_disc_residual: f64,
}

/// Catenoid coordinates of a labeled vertex, in the frame of its catenoid.
///
/// The frame of `K_i` differs from the patch frame by a shift in `theta`, which
/// leaves `vartheta` unchanged; only the mirrored copies reverse it.
fn vartheta_in_frame(mesh: &SurfaceMesh, v: usize) -> Option<(usize, f64, f64)> {
    let l = &mesh.labels[v];
    let c = l.catenoid?;
    let p = l.patch?;
    Some((c.index, c.t, if p.mirrored { -c.vartheta } else { c.vartheta }))
}

pub fn mean_curvature_field(mesh: &SurfaceMesh, d: &DerivedParams) -> Result<MeanCurvatureField> {
    let specs = &mesh.layers;
    let mut out = MeanCurvatureField {
        h: vec![0.0; mesh.vertices.len()],
        sup_catenoid_rho1: 0.0,
        sup_catenoid_rho2: 0.0,
        sup_disc: 0.0,
        sup_disc_residual: 0.0,
    };
    for (v, l) in mesh.labels.iter().enumerate() {
        let h = match (l.kind, vartheta_in_frame(mesh, v), l.patch) {
            (RegionKind::FlatDisc, _, _) => 0.0,
            (_, Some((idx, t, vt)), _) => forms_catenoid(idx, t, vt, d)?.forms.h,
            (_, None, Some(p)) => {
                let spec = &specs[l.layer - 1];
                let j = height_jet(spec, p.sigma, p.theta)?;
                forms_from_height(l.layer, p.sigma, p.theta, j.v, j.d, j.h)?.h
            }
            _ => 0.0,
        };
        out.h[v] = h;
        match l.kind {
            RegionKind::Catenoid => {
                out.sup_catenoid_rho1 = out.sup_catenoid_rho1.max(h.abs() / l.rho);
                out.sup_catenoid_rho2 = out.sup_catenoid_rho2.max(h.abs() / (l.rho * l.rho));
            }
            RegionKind::DiscGraph | RegionKind::Intermediate => {
                let p = l.patch.expect("graph vertex has patch coordinates");
                let (x, y) = crate::surface::varpi_point(mesh.m, p.sigma, p.theta_global, p.omega);
                let model = d.disloc[l.layer - 1] * crate::surface::vbar_hat_laplacian(mesh.m, x, y);
                let w = l.rho * l.rho;
                out.sup_disc = out.sup_disc.max(h.abs() / w);
                out.sup_disc_residual = out.sup_disc_residual.max((h - model).abs() / w);
            }
            RegionKind::FlatDisc => {}
        }
    }
    Ok(out)
}

/// `sup rho^-1 |H|` over `K_i(1/(2m))` on a `(t, vartheta)` grid, maximized over `i`.
pub fn catenoid_sup_rho_h(d: &DerivedParams, nt: usize, nv: usize) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for i in 1..d.n_layers {
        let tau = d.tau[i - 1];
        for a in 0..=nt {
            let t = d.a[i - 1] * (2.0 * a as f64 / nt as f64 - 1.0);
            for b in 0..=nv {
                let v = PI * (b as f64 / nv as f64 - 0.5);
                let h = forms_catenoid(i, t, v, d)?.forms.h;
                worst = worst.max(h.abs() * tau * t.cosh());
            }
        }
    }
    Ok(worst)
}

/// Largest closed-form versus generic discrepancy in `H`, per region.
#[derive(Debug, Clone, Serialize)]
pub struct OracleAgreement {
    pub n_layers: usize,
    pub m: usize,
    pub samples: usize,
    pub catenoid: f64,
    pub intermediate: f64,
    pub disc: f64,
}

impl OracleAgreement {
    pub fn worst(&self) -> f64 {
        self.catenoid.max(self.intermediate).max(self.disc)
    }
}

/// Compare the two evaluators at `samples` seeded random points in each region:
/// `K_i(1/(2m))` in catenoid coordinates, the band `sigma < 3/m` outside the
/// `1/(2m)`-discs around the waists, and the remaining graph `sigma >= 3/m`.
pub fn oracle_agreement(d: &DerivedParams, samples: usize, seed: u64) -> Result<OracleAgreement> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let (n, m) = (d.n_layers, d.m as f64);
    let a = PI / (2.0 * m);
    let mut out = OracleAgreement { n_layers: n, m: d.m, samples, catenoid: 0.0, intermediate: 0.0, disc: 0.0 };
    let graph_point = |rng: &mut rand_chacha::ChaCha8Rng, inner: bool| loop {
        let layer = rng.gen_range(1..=n);
        let s = if inner { rng.gen_range(0.0..3.0 / m) } else { rng.gen_range(3.0 / m..1.0 / 3.0) };
        let th = rng.gen_range(-a..a);
        if s.hypot(th - a) > 0.5 / m && s.hypot(th + a) > 0.5 / m {
            return (layer, s, th);
        }
    };
    for _ in 0..samples {
        let i = rng.gen_range(1..n);
        let t = rng.gen_range(-1.0..1.0) * d.a[i - 1];
        let v = rng.gen_range(-PI / 2.0..PI / 2.0);
        let c = forms_catenoid(i, t, v, d)?.forms;
        let g = forms_generic_catenoid(i, t, v, d, CATENOID_FD_STEP)?;
        out.catenoid = out.catenoid.max((c.h - g.h).abs());
        for inner in [true, false] {
            let (layer, s, th) = graph_point(&mut rng, inner);
            let c = forms_disc_graph(layer, s, th, d)?;
            let g = forms_generic_disc_graph(layer, s, th, d, GRAPH_FD_STEP)?;
            let slot = if inner { &mut out.intermediate } else { &mut out.disc };
            *slot = slot.max((c.h - g.h).abs());
        }
    }
    Ok(out)
}

/// `sup m^-beta rho^beta |u|` over the mesh vertices.
pub fn weighted_sup_norm(field: &[f64], beta: f64, mesh: &SurfaceMesh) -> f64 {
    let m = mesh.m as f64;
    field
        .iter()
        .zip(&mesh.labels)
        .map(|(u, l)| (l.rho / m).powf(beta) * u.abs())
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Serialize)]
pub struct ForceReport {
    pub layer: usize,
    pub force: f64,
    /// Contribution of the arcs on the sphere.
    pub sphere: f64,
    /// Contribution of the waist arcs.
    pub waist: f64,
    pub sphere_edges: usize,
    pub waist_edges: usize,
}

/// Vertical force on layer `i`: the integral over its boundary of the z-component of
/// the outward conormal.
///
/// Conormals are exact: radial on the sphere, vertical on the waists. On a patch-only
/// mesh the fundamental patch contribution is multiplied by the orbit size `2m`.
pub fn vertical_force(mesh: &SurfaceMesh, i: usize) -> Result<ForceReport> {
    if i == 0 || i > mesh.n_layers {
        return Err(Error::InvalidParameter(format!("layer {i} out of range 1..={}", mesh.n_layers)));
    }
    let spec = &mesh.layers[i - 1];
    let mut count: HashMap<(usize, usize), usize> = HashMap::new();
    for (f, &l) in mesh.faces.iter().zip(&mesh.face_layer) {
        if l != i {
            continue;
        }
        for k in 0..3 {
            let (a, b) = (f[k], f[(k + 1) % 3]);
            *count.entry((a.min(b), a.max(b))).or_default() += 1;
        }
    }
    let mut report = ForceReport { layer: i, force: 0.0, sphere: 0.0, waist: 0.0, sphere_edges: 0, waist_edges: 0 };
    let mut degree: HashMap<usize, usize> = HashMap::new();
    let mut edges: Vec<(usize, usize)> = count.into_iter().filter(|&(_, c)| c == 1).map(|(e, _)| e).collect();
    edges.sort_unstable();
    for (p, q) in edges {
        let (lp, lq) = (&mesh.labels[p], &mesh.labels[q]);
        if lp.waist && lq.waist {
            let (cp, cq) = (lp.catenoid.unwrap(), lq.catenoid.unwrap());
            let b = if spec.plus.catenoid == cp.index { spec.plus } else { spec.minus.unwrap() };
            let s = spec.half_sign(&b);
            let (dsig, dth) = (b.tau * (cq.vartheta.cos() - cp.vartheta.cos()), b.tau * (cq.vartheta.sin() - cp.vartheta.sin()));
            let sig_mid = 0.5 * b.tau * (cq.vartheta.cos() + cp.vartheta.cos());
            let cw = b.hk.cos();
            let len = (dsig * dsig + ((1.0 - sig_mid) * cw * dth).powi(2)).sqrt();
            report.waist += len * (-s * cw);
            report.waist_edges += 1;
        } else if lp.boundary && lq.boundary {
            let (len, om) = match (lp.catenoid, lq.catenoid) {
                (Some(cp), Some(cq)) if cp.index == cq.index => {
                    let b = if spec.plus.catenoid == cp.index { spec.plus } else { spec.minus.unwrap() };
                    let s = spec.half_sign(&b);
                    let arc = |r: f64| b.tau * arcosh(r / b.tau);
                    let om = b.hk + s * arc(0.5 * (cp.r + cq.r));
                    let (dth, dom) = (cq.r - cp.r, arc(cq.r) - arc(cp.r));
                    (((om.cos() * dth).powi(2) + dom * dom).sqrt(), om)
                }
                _ => {
                    let (pp, pq) = (lp.patch.unwrap(), lq.patch.unwrap());
                    let tm = 0.5 * (pp.theta + pq.theta);
                    let om = height_jet(spec, 0.0, tm)?.v;
                    let (dth, dom) = (pq.theta - pp.theta, pq.omega - pp.omega);
                    (((om.cos() * dth).powi(2) + dom * dom).sqrt(), om)
                }
            };
            report.sphere += len * om.sin();
            report.sphere_edges += 1;
        } else if mesh.replicated {
            return Err(Error::MeshIntegrity(format!("layer {i} has a boundary edge ({p}, {q}) off the sphere and the waists")));
        } else {
            continue;
        }
        *degree.entry(p).or_default() += 1;
        *degree.entry(q).or_default() += 1;
    }
    if mesh.replicated {
        if let Some((v, k)) = degree.iter().find(|(_, &k)| k % 2 == 1) {
            return Err(Error::MeshIntegrity(format!("open boundary loop of layer {i} at vertex {v} (degree {k})")));
        }
    } else {
        let orbit = 2.0 * mesh.m as f64;
        report.sphere *= orbit;
        report.waist *= orbit;
    }
    report.force = report.sphere + report.waist;
    Ok(report)
}

/// Force of a surface meeting the sphere orthogonally along the curve `omega = f(theta)`,
/// by midpoint quadrature over the whole circle.
pub fn sphere_force_of_graph<F: Fn(f64) -> f64>(f: F, n: usize) -> f64 {
    let step = 2.0 * PI / n as f64;
    (0..n)
        .map(|k| {
            let (t0, t1) = (k as f64 * step, (k + 1) as f64 * step);
            let om = f(0.5 * (t0 + t1));
            let dom = f(t1) - f(t0);
            ((om.cos() * step).powi(2) + dom * dom).sqrt() * om.sin()
        })
        .sum()
}

//! Initial surfaces: the coordinate map `Phi`, glued height functions over the
//! fundamental domain, the weight `rho`, the projection `varpi` and the cokernel
//! functions `w_i`, `wbar_i`. Mesh assembly lives in [`mesh`], audits in [`audit`].
//!
//! Patch-local coordinates `(sigma, theta)` range over
//! `[0, 1/3] x [-pi/(2m), pi/(2m)]`; a layer is the pyramidal orbit of its patch,
//! rotated about the z-axis.

use std::f64::consts::{FRAC_PI_4, PI};

use nalgebra::Vector3;
use serde::Serialize;

use crate::balance::DerivedParams;
use crate::util::{arcosh, cutoff, cutoff3};
use crate::{Error, Result};

pub mod audit;
pub mod export;
pub mod mesh;

pub use audit::*;
pub use export::*;
pub use mesh::*;

/// Outer edge of the graph patches in `sigma`.
pub const SIGMA_MAX: f64 = 1.0 / 3.0;

pub fn phi_map(sigma: f64, theta: f64, omega: f64) -> Result<Vector3<f64>> {
    if !(-1e-15..=SIGMA_MAX + 1e-15).contains(&sigma) || omega.abs() > FRAC_PI_4 + 1e-15 || !theta.is_finite() {
        return Err(Error::Domain(format!("(sigma, theta, omega) = ({sigma}, {theta}, {omega}) outside the box of Phi")));
    }
    Ok(phi_unchecked(sigma, theta, omega))
}

pub(crate) fn phi_unchecked(sigma: f64, theta: f64, omega: f64) -> Vector3<f64> {
    let s = 1.0 - sigma;
    Vector3::new(s * theta.cos() * omega.cos(), s * theta.sin() * omega.cos(), s * omega.sin())
}

/// Inverse of [`phi_map`] with `theta` in `(-pi, pi]`.
pub fn phi_inverse(p: &Vector3<f64>) -> Result<(f64, f64, f64)> {
    let r = p.norm();
    let sigma = 1.0 - r;
    if r == 0.0 || sigma > SIGMA_MAX + 1e-12 || sigma < -1e-12 {
        return Err(Error::Domain(format!("point at radius {r} outside the image of Phi")));
    }
    let omega = (p.z / r).asin();
    if omega.abs() > FRAC_PI_4 + 1e-12 {
        return Err(Error::Domain(format!("point at latitude {omega} outside the image of Phi")));
    }
    Ok((sigma, p.y.atan2(p.x), omega))
}

/// Value, gradient and Hessian of a function of `(sigma, theta)`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Jet {
    pub v: f64,
    pub d: [f64; 2],
    pub h: [[f64; 2]; 2],
}

impl Jet {
    pub fn constant(v: f64) -> Self {
        Jet { v, ..Default::default() }
    }

    fn of_sigma(v: f64, d1: f64, d2: f64) -> Self {
        Jet { v, d: [d1, 0.0], h: [[d2, 0.0], [0.0, 0.0]] }
    }

    fn of_theta(v: f64, d1: f64, d2: f64) -> Self {
        Jet { v, d: [0.0, d1], h: [[0.0, 0.0], [0.0, d2]] }
    }

    fn add(self, o: Jet) -> Jet {
        let mut r = self;
        r.v += o.v;
        for a in 0..2 {
            r.d[a] += o.d[a];
            for b in 0..2 {
                r.h[a][b] += o.h[a][b];
            }
        }
        r
    }

    fn scale(self, c: f64) -> Jet {
        let mut r = self;
        r.v *= c;
        for a in 0..2 {
            r.d[a] *= c;
            for b in 0..2 {
                r.h[a][b] *= c;
            }
        }
        r
    }

    fn mul(self, o: Jet) -> Jet {
        let mut r = Jet { v: self.v * o.v, ..Default::default() };
        for a in 0..2 {
            r.d[a] = self.d[a] * o.v + self.v * o.d[a];
            for b in a..2 {
                let x = self.h[a][b] * o.v + self.d[a] * o.d[b] + self.d[b] * o.d[a] + self.v * o.h[a][b];
                r.h[a][b] = x;
                r.h[b][a] = x;
            }
        }
        r
    }

    fn one_minus(self) -> Jet {
        Jet::constant(1.0).add(self.scale(-1.0))
    }
}

/// A catenoidal bridge attached at one corner of a patch.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Bridge {
    /// 1-based index `i` of the catenoid `K_i`.
    pub catenoid: usize,
    pub tau: f64,
    pub hk: f64,
}

/// Data of one layer `D_i`.
#[derive(Debug, Clone, Serialize)]
pub struct LayerSpec {
    pub layer: usize,
    pub m: usize,
    pub hb: f64,
    /// Bridge at `theta = +pi/(2m)`.
    pub plus: Bridge,
    /// Bridge at `theta = -pi/(2m)`, middle layers only.
    pub minus: Option<Bridge>,
    /// Rotation about the z-axis applied to the patch orbit.
    pub rotation: f64,
}

impl LayerSpec {
    pub fn half_width(&self) -> f64 {
        PI / (2.0 * self.m as f64)
    }

    /// Bridge on the given corner (`+1` or `-1`).
    pub fn bridge(&self, corner: i8) -> Option<&Bridge> {
        if corner > 0 {
            Some(&self.plus)
        } else {
            self.minus.as_ref()
        }
    }

    /// Sign of the half catenoid carried by this layer at a bridge.
    pub fn half_sign(&self, b: &Bridge) -> f64 {
        if self.hb - b.hk >= 0.0 {
            1.0
        } else {
            -1.0
        }
    }
}

/// Rotation of layer `i` (1-based) about the z-axis.
///
/// Middle layers alternate by `pi/m`; the top layer is rotated by `N pi/m`,
/// which puts its bridges on the axes of the last catenoid.
pub fn layer_rotation(i: usize, n_layers: usize, m: usize) -> f64 {
    let step = PI / m as f64;
    if i == n_layers && n_layers >= 2 {
        n_layers as f64 * step
    } else {
        (i - 1) as f64 * step
    }
}

pub fn layer_specs(d: &DerivedParams) -> Result<Vec<LayerSpec>> {
    let n = d.n_layers;
    if n < 2 {
        return Err(Error::InvalidParameter("surfaces need N >= 2 layers".into()));
    }
    if d.m < 7 {
        // the sigma cutoff must vanish before the disc is attached at sigma = 1/3
        return Err(Error::InvalidParameter(format!("m = {} below 7: blend region reaches sigma = 1/3", d.m)));
    }
    let bridge = |i: usize| Bridge { catenoid: i, tau: d.tau[i - 1], hk: d.hk[i - 1] };
    Ok((1..=n)
        .map(|i| {
            let (plus, minus) = match i {
                1 => (bridge(1), None),
                _ if i == n => (bridge(n - 1), None),
                _ => (bridge(i), Some(bridge(i - 1))),
            };
            LayerSpec { layer: i, m: d.m, hb: d.hb[i - 1], plus, minus, rotation: layer_rotation(i, n, d.m) }
        })
        .collect())
}

fn cutoff_jet_sigma(m: f64, sigma: f64) -> Jet {
    let (v, d1, d2) = cutoff3(m * sigma);
    Jet::of_sigma(v, m * d1, m * m * d2)
}

fn cutoff_jet_theta(m: f64, theta: f64, center: f64) -> Jet {
    let k = 4.0 * m / PI;
    let u = theta - center;
    let (v, d1, d2) = cutoff3(k * u.abs());
    Jet::of_theta(v, k * u.signum() * d1, k * k * d2)
}

fn disc_jet(hb: f64, sigma: f64) -> Jet {
    let s = 1.0 - sigma;
    let q = hb / s;
    let q1 = hb / (s * s);
    let q2 = 2.0 * hb / (s * s * s);
    let w = 1.0 - q * q;
    Jet::of_sigma(q.asin(), q1 / w.sqrt(), q2 / w.sqrt() + q * q1 * q1 / w.powf(1.5))
}

/// `omega^K` of a bridge with center `(0, center)`: the exact catenoid graph.
fn catenoid_jet(b: &Bridge, sign: f64, sigma: f64, theta: f64, center: f64) -> Jet {
    let u = theta - center;
    let r = sigma.hypot(u);
    let tau = b.tau;
    let root = ((r - tau) * (r + tau)).max(0.0).sqrt();
    let f1 = sign * tau / root;
    let f2 = -sign * tau * r / root.powi(3);
    let e = [sigma / r, u / r];
    let mut j = Jet { v: b.hk + sign * tau * arcosh(r / tau), ..Default::default() };
    for a in 0..2 {
        j.d[a] = f1 * e[a];
        for c in 0..2 {
            let delta = if a == c { 1.0 } else { 0.0 };
            let ee = e[a] * e[c];
            j.h[a][c] = f2 * ee + f1 * (delta - ee) / r;
        }
    }
    j
}

/// Height `omega` of layer `spec` over the patch point `(sigma, theta)`, with derivatives.
pub fn height_jet(spec: &LayerSpec, sigma: f64, theta: f64) -> Result<Jet> {
    let a = spec.half_width();
    if !(-1e-15..=SIGMA_MAX + 1e-15).contains(&sigma) || theta.abs() > a * (1.0 + 1e-12) {
        return Err(Error::Domain(format!("({sigma}, {theta}) outside the patch of layer {}", spec.layer)));
    }
    height_jet_extended(spec, sigma, theta)
}

/// [`height_jet`] without the patch bounds: the blend is even in `sigma` and in
/// `theta` about the mirrors near the corners, so it extends smoothly across them.
pub(crate) fn height_jet_extended(spec: &LayerSpec, sigma: f64, theta: f64) -> Result<Jet> {
    let a = spec.half_width();
    for (corner, b) in [(1i8, Some(&spec.plus)), (-1, spec.minus.as_ref())] {
        if let Some(b) = b {
            let r = sigma.hypot(theta - corner as f64 * a);
            if r < b.tau * (1.0 - 1e-12) {
                let name = if corner > 0 { "plus" } else { "minus" };
                return Err(Error::InsidePerforation(format!(
                    "{name} perforation of layer {} (radius {:.3e}, distance {:.3e})",
                    spec.layer, b.tau, r
                )));
            }
        }
    }
    let m = spec.m as f64;
    let ps = cutoff_jet_sigma(m, sigma);
    let mut bridges = Jet::default();
    let mut rest = Jet::constant(1.0);
    for (corner, b) in [(1i8, Some(&spec.plus)), (-1, spec.minus.as_ref())] {
        if let Some(b) = b {
            let center = corner as f64 * a;
            let pc = cutoff_jet_theta(m, theta, center);
            rest = rest.add(pc.scale(-1.0));
            if pc.v != 0.0 || pc.d[1] != 0.0 {
                bridges = bridges.add(pc.mul(catenoid_jet(b, spec.half_sign(b), sigma, theta, center)));
            }
        }
    }
    let graph = bridges.add(rest.scale(spec.hb));
    Ok(ps.mul(graph).add(ps.one_minus().mul(disc_jet(spec.hb, sigma))))
}

/// The glued height function of layer `i` (1-based) at the patch point `(sigma, theta)`.
pub fn height_function(i: usize, sigma: f64, theta: f64, d: &DerivedParams) -> Result<f64> {
    let specs = layer_specs(d)?;
    let spec = specs
        .get(i.wrapping_sub(1))
        .ok_or_else(|| Error::InvalidParameter(format!("layer {i} out of range 1..={}", d.n_layers)))?;
    Ok(height_jet(spec, sigma, theta)?.v)
}

/// Radius of the flat disc attached to a layer at height `hb`.
pub fn disc_radius(hb: f64) -> f64 {
    (2.0 / 3.0) * (1.0 - (1.5 * hb).powi(2)).sqrt()
}

/// Distance in `(sigma, theta)` from the patch point to the nearest catenoid axis of the layer.
pub fn axis_distance(spec: &LayerSpec, sigma: f64, theta: f64) -> f64 {
    let a = spec.half_width();
    let mut d = sigma.hypot(theta - a);
    if spec.minus.is_some() {
        d = d.min(sigma.hypot(theta + a));
    }
    d
}

/// `rho` off the catenoids: `1/d` near an axis, blended to `m` by `2/m`.
pub fn rho_from_distance(m: usize, d: f64) -> f64 {
    let m = m as f64;
    if d >= 2.0 / m {
        return m;
    }
    let psi = cutoff(m * d);
    psi / d + m * (1.0 - psi)
}

/// `rho` at a patch point of a layer.
pub fn rho_patch(spec: &LayerSpec, sigma: f64, theta: f64) -> f64 {
    rho_from_distance(spec.m, axis_distance(spec, sigma, theta))
}

/// `rho` on a catenoid in its own coordinates.
pub fn rho_catenoid(tau: f64, t: f64) -> f64 {
    1.0 / (tau * t.cosh())
}

/// `kappa_i(t, vartheta)` before applying `Phi`: `(sigma, theta, omega)`.
pub fn kappa_hat(i: usize, t: f64, vartheta: f64, d: &DerivedParams) -> Result<Vector3<f64>> {
    if i == 0 || i >= d.n_layers {
        return Err(Error::InvalidParameter(format!("catenoid {i} out of range 1..{}", d.n_layers)));
    }
    let tau = d.tau[i - 1];
    if t.abs() > d.a[i - 1] * (1.0 + 1e-12) || vartheta.abs() > PI / 2.0 + 1e-12 {
        return Err(Error::Domain(format!("(t, vartheta) = ({t}, {vartheta}) outside the chart of K_{i}")));
    }
    let center = if i % 2 == 1 { 1.0 } else { -1.0 } * PI / (2.0 * d.m as f64);
    let r = tau * t.cosh();
    Ok(Vector3::new(r * vartheta.cos(), center + r * vartheta.sin(), d.hk[i - 1] + tau * t))
}

pub fn kappa_chart(i: usize, t: f64, vartheta: f64, d: &DerivedParams) -> Result<Vector3<f64>> {
    let k = kappa_hat(i, t, vartheta, d)?;
    Ok(phi_unchecked(k.x.max(0.0), k.y, k.z))
}

fn varpi_cutoff(m: usize, rxy: f64) -> f64 {
    cutoff(m as f64 / 5.0 * (1.0 - rxy))
}

/// The projection `varpi^m` of a ball point to the horizontal unit disc.
pub fn varpi_chart(m: usize, p: &Vector3<f64>) -> Vector3<f64> {
    let rxy = p.x.hypot(p.y);
    let psi = varpi_cutoff(m, rxy);
    let full = (rxy * rxy + p.z * p.z).sqrt();
    let ratio = if full > 0.0 { rxy / full } else { 1.0 };
    Vector3::new(p.x, p.y, 0.0) / (1.0 - psi + psi * ratio)
}

/// `varpi^m(Phi(sigma, theta, omega))` as `(sigma', theta)` with `1 - sigma'` its radius.
///
/// Works in `Phi` coordinates so that nothing is lost near small waists.
pub fn varpi_sigma(m: usize, sigma: f64, omega: f64) -> f64 {
    let rxy = (1.0 - sigma) * omega.cos();
    let psi = varpi_cutoff(m, rxy);
    1.0 - rxy / (1.0 - psi + psi * omega.cos())
}

fn fold_theta(m: usize, theta: f64) -> f64 {
    let a = PI / (2.0 * m as f64);
    // pyramidal fundamental domain [-a, a], mirrors at odd multiples of a
    let mut u = (theta + a).rem_euclid(4.0 * a) - a;
    if u > a {
        u = 2.0 * a - u;
    }
    u
}

/// The pyramidally invariant function `vbar-hat` on the unit disc.
pub fn vbar_hat(m: usize, x: f64, y: f64) -> f64 {
    let sigma = 1.0 - x.hypot(y);
    let mf = m as f64;
    if sigma >= 2.0 / mf {
        return 0.0;
    }
    let th = fold_theta(m, y.atan2(x));
    let a = PI / (2.0 * mf);
    let k = 4.0 * mf / PI;
    cutoff(mf * sigma.max(0.0)) * (cutoff(k * (th - a).abs()) - cutoff(k * (th + a).abs()))
}

/// Planar Laplacian of `vbar-hat` by 5-point differences, Richardson-extrapolated.
pub fn vbar_hat_laplacian(m: usize, x: f64, y: f64) -> f64 {
    let lap = |h: f64| {
        (vbar_hat(m, x + h, y) + vbar_hat(m, x - h, y) + vbar_hat(m, x, y + h) + vbar_hat(m, x, y - h)
            - 4.0 * vbar_hat(m, x, y))
            / (h * h)
    };
    let h = 0.02 / m as f64;
    (4.0 * lap(h / 2.0) - lap(h)) / 3.0
}

/// `w_i` at a point of `D_i` whose `varpi` image sits at `sigma'`.
pub fn w_value(i: usize, m: usize, sigma_varpi: f64) -> f64 {
    let m = m as f64;
    let sign = if i % 2 == 1 { 1.0 } else { -1.0 };
    sign * cutoff(2.0 * m * (sigma_varpi - 3.0 / m).abs())
}

/// Planar point `varpi(p)` for a point given in `Phi` coordinates.
pub fn varpi_point(m: usize, sigma: f64, theta: f64, omega: f64) -> (f64, f64) {
    let r = 1.0 - varpi_sigma(m, sigma, omega);
    (r * theta.cos(), r * theta.sin())
}

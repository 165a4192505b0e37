//! Trace-inequality probes and the spectral-shift bound.

use std::f64::consts::FRAC_PI_2;

use nalgebra::Matrix2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::domain::DomainKind;
use crate::error::{Error, Result};

/// Gauss-Legendre nodes and weights on `[-1, 1]`, 4 points.
const GL_X: [f64; 4] = [-0.861_136_311_594_052_6, -0.339_981_043_584_856_3, 0.339_981_043_584_856_3, 0.861_136_311_594_052_6];
const GL_W: [f64; 4] = [0.347_854_845_137_453_9, 0.652_145_154_862_546_1, 0.652_145_154_862_546_1, 0.347_854_845_137_453_9];

/// Panel ends on `[a, b]` refined geometrically toward `targets`.
fn panels(a: f64, b: f64, targets: &[f64], h_min: f64, h_max: f64) -> Vec<f64> {
    let width = |x: f64| targets.iter().map(|t| h_min + 0.25 * (x - t).abs()).fold(h_max, f64::min);
    let mut out = vec![a];
    let mut x = a;
    while x < b {
        x = (x + width(x + 0.5 * width(x))).min(b);
        out.push(x);
    }
    out
}

/// Composite rule: `(node, weight)` pairs.
fn rule(ends: &[f64]) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(4 * ends.len());
    for w in ends.windows(2) {
        let (c, r) = (0.5 * (w[0] + w[1]), 0.5 * (w[1] - w[0]));
        for k in 0..4 {
            out.push((c + r * GL_X[k], r * GL_W[k]));
        }
    }
    out
}

/// Quadrature for the interior integral and for the Robin part of the boundary.
pub struct TraceQuadrature {
    pub kind: DomainKind,
    area: Vec<(f64, f64, f64)>,
    edge: Vec<(f64, f64, f64)>,
}

impl TraceQuadrature {
    pub fn new(kind: DomainKind) -> Result<TraceQuadrature> {
        let (x0, x1, y0, y1) = kind.bounds();
        let h_min = 2e-3;
        let (xs, ys, edge) = match kind {
            DomainKind::CatenoidRect { .. } => {
                let xs = rule(&panels(x0, x1, &[], h_min, 0.25));
                let ys = rule(&panels(y0, y1, &[y0, y1], h_min, 0.25));
                let mut edge = Vec::new();
                for &(x, w) in &xs {
                    edge.push((x, y0, w));
                    edge.push((x, y1, w));
                }
                (xs, ys, edge)
            }
            DomainKind::PerforatedOne { r } | DomainKind::PerforatedTwo { r } => {
                let xs = rule(&panels(x0, x1, &[0.0, r], h_min, 0.25));
                let ys = rule(&panels(y0, y1, &[y0, y1, y1 - r, y0 + r], h_min, 0.25));
                let lo = if matches!(kind, DomainKind::PerforatedTwo { .. }) { y0 + r } else { y0 };
                let edge = rule(&panels(lo, y1 - r, &[lo, y1 - r], h_min, 0.25))
                    .into_iter()
                    .map(|(y, w)| (0.0, y, w))
                    .collect();
                (xs, ys, edge)
            }
            DomainKind::Rectangle { .. } => {
                return Err(Error::Inapplicable("trace probe needs a catenoid or perforated domain".into()))
            }
        };
        let mut area = Vec::with_capacity(xs.len() * ys.len());
        for &(x, wx) in &xs {
            for &(y, wy) in &ys {
                if kind.contains(x, y) {
                    area.push((x, y, wx * wy));
                }
            }
        }
        Ok(TraceQuadrature { kind, area, edge })
    }

    /// `int_Robin u^2 / int (|u||du| + u^2)` for `u` returning `(u, u_x, u_y)`.
    pub fn ratio(&self, u: &dyn Fn(f64, f64) -> (f64, f64, f64)) -> f64 {
        let num: f64 = self.edge.iter().map(|&(x, y, w)| u(x, y).0.powi(2) * w).sum();
        let den: f64 = self
            .area
            .iter()
            .map(|&(x, y, w)| {
                let (v, vx, vy) = u(x, y);
                (v.abs() * vx.hypot(vy) + v * v) * w
            })
            .sum();
        if den == 0.0 {
            0.0
        } else {
            num / den
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TraceReport {
    pub kind: DomainKind,
    pub samples: usize,
    pub max_ratio: f64,
    pub constant_ratio: f64,
    /// Constant from the divergence-theorem argument.
    pub bound: f64,
    pub within_bound: bool,
}

/// Distance to the Robin boundary and its gradient.
fn robin_distance(kind: DomainKind, x: f64, y: f64) -> (f64, f64, f64) {
    match kind {
        DomainKind::CatenoidRect { .. } => {
            if y >= 0.0 {
                (FRAC_PI_2 - y, 0.0, -1.0)
            } else {
                (y + FRAC_PI_2, 0.0, 1.0)
            }
        }
        _ => (x, 1.0, 0.0),
    }
}

/// Maximize the trace ratio over random smooth bumps and boundary-concentrated profiles.
pub fn trace_probe(kind: DomainKind, n_samples: usize, seed: u64) -> Result<TraceReport> {
    let q = TraceQuadrature::new(kind)?;
    let (x0, x1, y0, y1) = kind.bounds();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let constant_ratio = q.ratio(&|_, _| (1.0, 0.0, 0.0));
    let mut max_ratio = constant_ratio;
    for s in 0..n_samples {
        let r = match s % 3 {
            0 => {
                let k = rng.gen_range(1..=4);
                let bumps: Vec<(f64, f64, f64, f64)> = (0..k)
                    .map(|_| {
                        (
                            rng.gen_range(x0..x1),
                            rng.gen_range(y0..y1),
                            rng.gen_range(0.05..1.0),
                            rng.gen_range(-1.0..1.0),
                        )
                    })
                    .collect();
                q.ratio(&|x, y| {
                    let mut out = (0.0, 0.0, 0.0);
                    for &(cx, cy, sd, a) in &bumps {
                        let e = a * (-((x - cx).powi(2) + (y - cy).powi(2)) / (2.0 * sd * sd)).exp();
                        out.0 += e;
                        out.1 -= e * (x - cx) / (sd * sd);
                        out.2 -= e * (y - cy) / (sd * sd);
                    }
                    out
                })
            }
            1 => {
                let (k1, k2) = (rng.gen_range(0.0..4.0), rng.gen_range(0.0..4.0));
                let (p1, p2) = (rng.gen_range(0.0..6.3), rng.gen_range(0.0..6.3));
                q.ratio(&|x, y| {
                    let (a, b) = ((k1 * x + p1).cos(), (k2 * y + p2).cos());
                    (a * b, -k1 * (k1 * x + p1).sin() * b, -k2 * a * (k2 * y + p2).sin())
                })
            }
            _ => {
                let eps = (rng.gen_range(0.02f64.ln()..0.5f64.ln())).exp();
                let (cx, cy) = (rng.gen_range(x0..x1), rng.gen_range(y0..y1));
                let sd = rng.gen_range(0.05..2.0);
                q.ratio(&|x, y| {
                    let (d, dx, dy) = robin_distance(kind, x, y);
                    let e = (-d / eps).exp();
                    let along = match kind {
                        DomainKind::CatenoidRect { .. } => (-(x - cx).powi(2) / (2.0 * sd * sd)).exp(),
                        _ => (-(y - cy).powi(2) / (2.0 * sd * sd)).exp(),
                    };
                    let (ax, ay) = match kind {
                        DomainKind::CatenoidRect { .. } => (-along * (x - cx) / (sd * sd), 0.0),
                        _ => (0.0, -along * (y - cy) / (sd * sd)),
                    };
                    (e * along, -e / eps * dx * along + e * ax, -e / eps * dy * along + e * ay)
                })
            }
        };
        max_ratio = max_ratio.max(r);
    }
    Ok(TraceReport { kind, samples: n_samples, max_ratio, constant_ratio, bound: 2.0, within_bound: max_ratio <= 2.0 })
}

/// Samples of `(g, q)` at common interior points and `r` at common boundary points.
#[derive(Debug, Clone)]
pub struct ShiftData {
    pub g: Vec<Matrix2<f64>>,
    pub q: Vec<f64>,
    pub r: Vec<f64>,
}

impl ShiftData {
    /// Flat metric, constant potential `q`, no Robin term.
    pub fn flat(n: usize, scale2: f64, q: f64) -> ShiftData {
        ShiftData { g: vec![Matrix2::identity() * scale2; n], q: vec![q; n], r: Vec::new() }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ShiftBound {
    pub g_tilde: f64,
    pub q_tilde: f64,
    pub r_tilde: f64,
    pub bound: f64,
}

/// Default for the dimension-only constant in the shift bound.
pub const SHIFT_CONSTANT: f64 = 4.0;
/// Default smallness threshold on the metric change.
pub const SHIFT_EPS: f64 = 0.5;

fn sup(v: impl Iterator<Item = f64>) -> f64 {
    v.fold(0.0, f64::max)
}

/// Upper bound for the `k`-th eigenvalue of problem 2 given `lambda_k` of problem 1.
pub fn spectral_shift_bound(
    d1: &ShiftData,
    d2: &ShiftData,
    lambda_k: f64,
    c_tr: f64,
    c: f64,
    eps: f64,
) -> Result<ShiftBound> {
    if d1.g.len() != d2.g.len() || d1.q.len() != d2.q.len() || d1.r.len() != d2.r.len() {
        return Err(Error::InvalidParameter("data sampled on different grids".into()));
    }
    let g_tilde = sup(d1.g.iter().zip(&d2.g).map(|(g1, g2)| {
        let inv = g1.try_inverse().unwrap_or_else(Matrix2::zeros);
        let d = g2 - g1;
        let p = inv * d;
        (p * p).trace().max(0.0).sqrt()
    }));
    if g_tilde >= eps {
        return Err(Error::Inapplicable(format!("metric change {g_tilde:.3e} not below {eps}")));
    }
    let q1 = sup(d1.q.iter().map(|v| v.abs()));
    let r1 = sup(d1.r.iter().map(|v| v.abs()));
    let dq = sup(d1.q.iter().zip(&d2.q).map(|(a, b)| (a - b).abs()));
    let dr = sup(d1.r.iter().zip(&d2.r).map(|(a, b)| (a - b).abs()));
    let q_tilde = g_tilde * q1 + dq;
    let r_tilde = c_tr * (1.0 + c_tr * r1) * (1.0 + q1) * (g_tilde + dr);
    let bound = lambda_k + c * (q_tilde + r_tilde) + c * lambda_k * (g_tilde + r_tilde);
    Ok(ShiftBound { g_tilde, q_tilde, r_tilde, bound })
}

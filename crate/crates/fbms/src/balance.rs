//! The parameter chain from `(N, m, zeta, xi)` to waist radii and heights,
//! leading-order vertical forces, and the linear map controlling them.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::util::{arcosh, parity};

/// Orthogonal projection onto vectors with `v_i = sign * v_{d+1-i}`.
pub fn mirror_project(v: &[f64], sign: f64) -> Vec<f64> {
    let d = v.len();
    (0..d).map(|i| 0.5 * (v[i] + sign * v[d - 1 - i])).collect()
}

/// Max deviation of `v` from the mirror class `sign`.
pub fn mirror_defect(v: &[f64], sign: f64) -> f64 {
    let d = v.len();
    (0..d).map(|i| (v[i] - sign * v[d - 1 - i]).abs()).fold(0.0, f64::max)
}

/// Orthonormal basis (as columns) of the mirror class `sign` in `R^d`,
/// optionally restricted to vectors vanishing at both ends.
pub fn mirror_basis(d: usize, sign: f64, zero_ends: bool) -> DMatrix<f64> {
    let mut cols: Vec<DVector<f64>> = Vec::new();
    for i in 0..d.div_ceil(2) {
        let j = d - 1 - i;
        if zero_ends && (i == 0 || j == 0) {
            continue;
        }
        let mut c = DVector::zeros(d);
        if i == j {
            if sign < 0.0 {
                continue;
            }
            c[i] = 1.0;
        } else {
            c[i] = std::f64::consts::FRAC_1_SQRT_2;
            c[j] = sign * std::f64::consts::FRAC_1_SQRT_2;
        }
        cols.push(c);
    }
    if cols.is_empty() {
        DMatrix::zeros(d, 0)
    } else {
        DMatrix::from_columns(&cols)
    }
}

/// Path-graph adjacency matrix of size `d`.
pub fn path_adjacency(d: usize) -> DMatrix<f64> {
    DMatrix::from_fn(d, d, |i, j| if i.abs_diff(j) == 1 { 1.0 } else { 0.0 })
}

/// Perron vector of the path adjacency on `N-1` nodes, scaled so `x_n = 1`, and its eigenvalue.
pub fn limiting_waist_ratios(n_layers: usize) -> Result<(Vec<f64>, f64)> {
    if n_layers < 2 {
        return Err(Error::InvalidParameter("N must be >= 2".into()));
    }
    let d = n_layers - 1;
    let n = n_layers / 2;
    let b = path_adjacency(d);
    let shifted = &b + DMatrix::identity(d, d);
    let mut x = DVector::from_element(d, 1.0);
    for _ in 0..2_000_000 {
        let y = &shifted * &x;
        let y = &y / y[n - 1];
        let step = (&y - &x).amax();
        x = y;
        if step < 1e-15 {
            break;
        }
    }
    let lambda = (x.transpose() * &b * &x)[(0, 0)] / x.norm_squared();
    Ok((x.iter().copied().collect(), lambda))
}

/// `sin(j pi / N) / sin(n pi / N)`.
pub fn waist_ratio_closed_form(n_layers: usize) -> Vec<f64> {
    let nf = n_layers as f64;
    let n = (n_layers / 2) as f64;
    (1..n_layers).map(|j| (j as f64 * PI / nf).sin() / (n * PI / nf).sin()).collect()
}

/// Max residual of `x_{i-1} + x_{i+1} = 2 ((x_{n-1} + N mod 2)/(1 + N mod 2)) x_i`.
pub fn balancing_residual(n_layers: usize, x: &[f64]) -> f64 {
    let n = n_layers / 2;
    let get = |i: usize| if i == 0 || i >= n_layers { 0.0 } else { x[i - 1] };
    let p = parity(n_layers);
    let c = 2.0 * (get(n - 1) + p) / (1.0 + p);
    (1..n_layers).map(|i| (get(i - 1) + get(i + 1) - c * get(i)).abs()).fold(0.0, f64::max)
}

#[derive(Debug, Clone, Serialize)]
pub struct StackingParams {
    pub n_layers: usize,
    pub m: usize,
    pub zeta: Vec<f64>,
    pub xi: Vec<f64>,
}

impl StackingParams {
    pub fn new(n_layers: usize, m: usize, zeta: Vec<f64>, xi: Vec<f64>) -> Result<Self> {
        let p = StackingParams { n_layers, m, zeta, xi };
        p.validate()?;
        Ok(p)
    }

    /// Data with `zeta = xi = 0`.
    pub fn balanced(n_layers: usize, m: usize) -> Result<Self> {
        let d = n_layers.saturating_sub(1);
        StackingParams::new(n_layers, m, vec![0.0; d], vec![0.0; d])
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_layers < 2 {
            return Err(Error::InvalidParameter(format!("N = {} < 2", self.n_layers)));
        }
        if self.m < 3 {
            return Err(Error::InvalidParameter(format!("m = {} < 3", self.m)));
        }
        let d = self.n_layers - 1;
        if self.zeta.len() != d || self.xi.len() != d {
            return Err(Error::InvalidParameter(format!("zeta and xi must have length {d}")));
        }
        if mirror_defect(&self.zeta, 1.0) > 1e-12 {
            return Err(Error::InvalidParameter("zeta is not mirror-even".into()));
        }
        if mirror_defect(&self.xi, -1.0) > 1e-12 {
            return Err(Error::InvalidParameter("xi is not mirror-odd".into()));
        }
        Ok(())
    }
}

/// Everything determined by the data. Vectors are 0-based copies of the 1-based quantities.
#[derive(Debug, Clone, Serialize)]
pub struct DerivedParams {
    pub n_layers: usize,
    pub m: usize,
    pub n: usize,
    pub x: Vec<f64>,
    pub lambda: f64,
    pub taubar: Vec<f64>,
    pub tau: Vec<f64>,
    pub a: Vec<f64>,
    pub delta_hk: Vec<f64>,
    pub disloc: Vec<f64>,
    pub hk: Vec<f64>,
    pub hb: Vec<f64>,
    pub matching_residual: f64,
}

impl DerivedParams {
    /// `tau_i` with `tau_0 = tau_N = 0` (1-based).
    pub fn tau_ext(&self, i: usize) -> f64 {
        if i == 0 || i >= self.n_layers {
            0.0
        } else {
            self.tau[i - 1]
        }
    }

    /// `tau_n`, the waist radius that normalizes forces.
    pub fn tau_n(&self) -> f64 {
        self.tau[self.n - 1]
    }
}

pub fn derived_parameters(p: &StackingParams) -> Result<DerivedParams> {
    p.validate()?;
    let big_n = p.n_layers;
    let m = p.m as f64;
    let n = big_n / 2;
    let (x, lambda) = limiting_waist_ratios(big_n)?;
    let x_nm1 = if n == 1 { 0.0 } else { x[n - 2] };
    let par = parity(big_n);
    let expo = ((x_nm1 - 1.0) / (1.0 + par) * m / 2.0).exp();
    let taubar: Vec<f64> = x.iter().map(|xi| xi / m * expo).collect();
    let zeta_n = p.zeta[n - 1];
    let tau: Vec<f64> = taubar.iter().zip(&p.zeta).map(|(tb, z)| tb * (zeta_n + z / m).exp()).collect();
    // the waist must fit in its patch as well: a_i needs 1/(2 m tau_i) > 1
    for (i, t) in tau.iter().enumerate() {
        let v = 1.0 / (2.0 * m * t);
        if v <= 1.0 {
            return Err(Error::MTooSmall { m: p.m, i: i + 1, value: v });
        }
    }
    let a: Vec<f64> = tau.iter().map(|t| arcosh(1.0 / (2.0 * m * t))).collect();
    let delta_hk: Vec<f64> = tau.iter().map(|t| 2.0 * t * arcosh(1.0 / (m * t))).collect();
    let tau_n = tau[n - 1];
    let disloc: Vec<f64> = (1..=big_n)
        .map(|i| if i == 1 || i == big_n { 0.0 } else { 0.5 * (p.xi[i - 1] - p.xi[i - 2]) * tau_n })
        .collect();

    // z = (hB_1, hK_1, hB_2, ..., hK_{N-1}, hB_N); inc[k] = z[k+1] - z[k]
    let len = 2 * big_n - 1;
    let mut inc = vec![0.0; len - 1];
    for i in 1..big_n {
        inc[2 * i - 2] = 0.5 * delta_hk[i - 1] + disloc[i - 1];
        inc[2 * i - 1] = 0.5 * delta_hk[i - 1] + disloc[i];
    }
    let anchor = if big_n % 2 == 0 { 2 * n - 1 } else { 2 * n };
    let mut z = vec![0.0; len];
    for k in anchor + 1..len {
        z[k] = z[k - 1] + inc[k - 1];
    }
    for k in (0..anchor).rev() {
        z[k] = z[k + 1] - inc[k];
    }
    let hb: Vec<f64> = (0..big_n).map(|i| z[2 * i]).collect();
    let hk: Vec<f64> = (0..big_n - 1).map(|i| z[2 * i + 1]).collect();

    let mut res: f64 = 0.0;
    for i in 1..big_n {
        res = res.max((hk[i - 1] - hb[i - 1] - 0.5 * delta_hk[i - 1] - disloc[i - 1]).abs());
        res = res.max((hb[i] - hk[i - 1] - 0.5 * delta_hk[i - 1] - disloc[i]).abs());
    }
    Ok(DerivedParams {
        n_layers: big_n,
        m: p.m,
        n,
        x,
        lambda,
        taubar,
        tau,
        a,
        delta_hk,
        disloc,
        hk,
        hb,
        matching_residual: res,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ForcePrediction {
    pub forces: Vec<f64>,
    pub f_tilde: Vec<f64>,
}

/// `F_i = 2 pi hB_i + m pi tau_i - m pi tau_{i-1}` and the normalized differences.
pub fn predicted_forces(d: &DerivedParams) -> ForcePrediction {
    let m = d.m as f64;
    let forces: Vec<f64> = (1..=d.n_layers)
        .map(|i| 2.0 * PI * d.hb[i - 1] + m * PI * d.tau_ext(i) - m * PI * d.tau_ext(i - 1))
        .collect();
    let f_tilde = (1..d.n_layers)
        .map(|i| {
            ((forces[i] - forces[i - 1]) - 2.0 * (d.disloc[i - 1] + d.disloc[i])) / (PI * d.tau_n())
        })
        .collect();
    ForcePrediction { forces, f_tilde }
}

/// The linear map from `(zeta, xi)` to normalized `(forces, dislocations)`.
#[derive(Debug, Clone)]
pub struct CokerMap {
    pub n_layers: usize,
    /// Matrix in orthonormal mirror bases of domain and target.
    pub p: DMatrix<f64>,
    pub s: DMatrix<f64>,
    pub t: DMatrix<f64>,
    pub t00: DMatrix<f64>,
    pub f: DMatrix<f64>,
    pub norm: f64,
    pub inverse_norm: f64,
    x: Vec<f64>,
}

/// `(T v)_i = v_{i+1} - v_i`, from `R^{d+1}` to `R^d`.
fn t_matrix(d: usize) -> DMatrix<f64> {
    DMatrix::from_fn(d, d + 1, |i, j| {
        if j == i + 1 {
            1.0
        } else if j == i {
            -1.0
        } else {
            0.0
        }
    })
}

impl CokerMap {
    /// `P(zeta, xi)` in full coordinates `(R^N, R^N)`.
    pub fn apply_full(&self, zeta: &[f64], xi: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let big_n = self.n_layers;
        let n = big_n / 2;
        let zeta_v = DVector::from_column_slice(zeta);
        let xi_v = DVector::from_column_slice(xi);
        let x = DVector::from_column_slice(&self.x);
        let t00xi = &self.t00 * &xi_v;
        let rhs = (&self.f * (&self.t * &zeta_v)) * PI - x * (4.0 * PI * zeta[n - 1]) + &self.s * &t00xi;
        let first = solve_t_odd(big_n, &rhs);
        let second = t00xi * 0.5;
        (first.iter().copied().collect(), second.iter().copied().collect())
    }
}

/// Inverse of `T` restricted to mirror-odd vectors of `R^N`.
fn solve_t_odd(big_n: usize, rhs: &DVector<f64>) -> DVector<f64> {
    let q = mirror_basis(big_n, -1.0, false);
    if q.ncols() == 0 {
        return DVector::zeros(big_n);
    }
    let tq = t_matrix(big_n - 1) * &q;
    let c = tq.clone().svd(true, true).solve(rhs, 1e-14).expect("svd solve");
    q * c
}

pub fn coker_map(n_layers: usize, x: &[f64]) -> Result<CokerMap> {
    if n_layers < 2 || x.len() != n_layers - 1 {
        return Err(Error::InvalidParameter("coker map needs N >= 2 and x of length N-1".into()));
    }
    let big_n = n_layers;
    // S: R^{N,0,0} -> R^{N-1}
    let s = DMatrix::from_fn(big_n - 1, big_n, |i, j| if j == i || j == i + 1 { 1.0 } else { 0.0 });
    let t = t_matrix(big_n - 2);
    // T00: R^{N-1} -> R^{N,0,0}
    let t00 = DMatrix::from_fn(big_n, big_n - 1, |i, j| {
        if i == 0 || i == big_n - 1 {
            0.0
        } else if j == i {
            1.0
        } else if j + 1 == i {
            -1.0
        } else {
            0.0
        }
    });
    // F: R^{N-2} -> R^{N-1}, (Fv)_i = -x_{i-1} v_{i-1} + x_{i+1} v_i
    let xe = |i: usize| if i == 0 || i >= big_n { 0.0 } else { x[i - 1] };
    let f = DMatrix::from_fn(big_n - 1, big_n - 2, |r, c| {
        let i = r + 1;
        let j = c + 1;
        let mut v = 0.0;
        if j + 1 == i {
            v -= xe(i - 1);
        }
        if j == i {
            v += xe(i + 1);
        }
        v
    });
    let mut map = CokerMap {
        n_layers,
        p: DMatrix::zeros(0, 0),
        s,
        t,
        t00,
        f,
        norm: 0.0,
        inverse_norm: 0.0,
        x: x.to_vec(),
    };
    let dom_plus = mirror_basis(big_n - 1, 1.0, false);
    let dom_minus = mirror_basis(big_n - 1, -1.0, false);
    let cod_minus = mirror_basis(big_n, -1.0, false);
    let cod_plus00 = mirror_basis(big_n, 1.0, true);
    let dim = dom_plus.ncols() + dom_minus.ncols();
    let cod = cod_minus.ncols() + cod_plus00.ncols();
    assert_eq!(dim, cod);
    let mut p = DMatrix::zeros(cod, dim);
    let zero = vec![0.0; big_n - 1];
    for k in 0..dim {
        let (zeta, xi) = if k < dom_plus.ncols() {
            (dom_plus.column(k).iter().copied().collect::<Vec<_>>(), zero.clone())
        } else {
            (zero.clone(), dom_minus.column(k - dom_plus.ncols()).iter().copied().collect())
        };
        let (a, b) = map.apply_full(&zeta, &xi);
        let a = DVector::from_vec(a);
        let b = DVector::from_vec(b);
        let ca = cod_minus.transpose() * a;
        let cb = cod_plus00.transpose() * b;
        for r in 0..ca.len() {
            p[(r, k)] = ca[r];
        }
        for r in 0..cb.len() {
            p[(ca.len() + r, k)] = cb[r];
        }
    }
    let sv = p.clone().svd(false, false).singular_values;
    let smax = sv.iter().copied().fold(0.0, f64::max);
    let smin = sv.iter().copied().fold(f64::INFINITY, f64::min);
    if !(smin > 1e-12 * smax.max(1.0)) {
        return Err(Error::SingularCokerMap(format!("smallest singular value {smin:.3e}")));
    }
    map.p = p;
    map.norm = smax;
    map.inverse_norm = 1.0 / smin;
    Ok(map)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mirror_examples() {
        assert_eq!(mirror_project(&[1.0, 2.0, 3.0], 1.0), vec![2.0, 2.0, 2.0]);
        assert_eq!(mirror_project(&[1.0, 0.0, -1.0], -1.0), vec![1.0, 0.0, -1.0]);
        for d in 1..7 {
            assert_eq!(mirror_basis(d, 1.0, false).ncols(), d.div_ceil(2));
            assert_eq!(mirror_basis(d, -1.0, false).ncols(), d / 2);
        }
    }

    #[test]
    fn waist_ratio_examples() {
        let (x, l) = limiting_waist_ratios(3).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-12 && (x[1] - 1.0).abs() < 1e-12 && (l - 1.0).abs() < 1e-12);
        let (x, l) = limiting_waist_ratios(4).unwrap();
        let h = 0.5f64.sqrt();
        assert!((x[0] - h).abs() < 1e-12 && (x[1] - 1.0).abs() < 1e-12 && (x[2] - h).abs() < 1e-12);
        assert!((l - 2f64.sqrt()).abs() < 1e-12);
        let (x, l) = limiting_waist_ratios(5).unwrap();
        let c = (PI / 5.0).cos();
        assert!((x[0] - (2.0 * c - 1.0)).abs() < 1e-12);
        assert!((l - 2.0 * c).abs() < 1e-12);
    }

    #[test]
    fn n2_m10_chain() {
        let d = derived_parameters(&StackingParams::balanced(2, 10).unwrap()).unwrap();
        let tb = (-5.0f64).exp() / 10.0;
        assert!((d.taubar[0] - tb).abs() < 1e-15);
        assert!((d.taubar[0] - 6.7379e-4).abs() < 1e-7);
        assert_eq!(d.hk[0], 0.0);
        let hb1 = -d.tau[0] * arcosh(1.0 / (10.0 * d.tau[0]));
        assert!((d.hb[0] - hb1).abs() < 1e-16);
        assert!((d.hb[0] + 3.836e-3).abs() < 1e-6);
        assert!((d.hb[1] + d.hb[0]).abs() < 1e-16);
    }

    #[test]
    fn too_small_m_is_reported() {
        // tau_1 = 1/3 for N = 3 at m = 3 would need 1/(m tau) > 1; force it with zeta
        let p = StackingParams::new(3, 3, vec![5.0, 5.0], vec![0.0, 0.0]).unwrap();
        assert!(matches!(derived_parameters(&p), Err(Error::MTooSmall { i: 1, .. })));
    }

    #[test]
    fn coker_dimensions() {
        let (x2, _) = limiting_waist_ratios(2).unwrap();
        let c2 = coker_map(2, &x2).unwrap();
        assert_eq!(c2.p.shape(), (1, 1));
        let (x4, _) = limiting_waist_ratios(4).unwrap();
        let c4 = coker_map(4, &x4).unwrap();
        assert_eq!(c4.p.shape(), (3, 3));
        assert!(c4.norm.is_finite() && c4.inverse_norm.is_finite());
        let (a, b) = c4.apply_full(&[0.0; 3], &[0.0; 3]);
        assert!(a.iter().chain(&b).all(|v| *v == 0.0));
    }
}

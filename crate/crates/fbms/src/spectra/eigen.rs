//! Symmetric banded matrices, banded Cholesky, and shift-invert Lanczos for the
//! lowest eigenpairs.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Lower band storage: entry `(i, j)`, `i - b <= j <= i`, at `data[i * (b + 1) + j + b - i]`.
#[derive(Debug, Clone)]
pub struct SymBand {
    pub n: usize,
    pub b: usize,
    data: Vec<f64>,
}

impl SymBand {
    pub fn zeros(n: usize, b: usize) -> SymBand {
        SymBand { n, b, data: vec![0.0; n * (b + 1)] }
    }

    fn at(&self, i: usize, j: usize) -> usize {
        i * (self.b + 1) + j + self.b - i
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        if i - j > self.b {
            0.0
        } else {
            self.data[self.at(i, j)]
        }
    }

    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        assert!(i - j <= self.b, "entry outside band");
        let k = self.at(i, j);
        self.data[k] += v;
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        y.iter_mut().for_each(|v| *v = 0.0);
        for i in 0..self.n {
            let j0 = i.saturating_sub(self.b);
            let row = &self.data[i * (self.b + 1)..(i + 1) * (self.b + 1)];
            let mut acc = 0.0;
            for j in j0..i {
                let a = row[j + self.b - i];
                acc += a * x[j];
                y[j] += a * x[i];
            }
            y[i] += acc + row[self.b] * x[i];
        }
    }

    /// Lower bound on the spectrum from Gershgorin discs.
    pub fn gershgorin_lower(&self) -> f64 {
        let mut radius = vec![0.0; self.n];
        for i in 0..self.n {
            for j in i.saturating_sub(self.b)..i {
                let a = self.get(i, j).abs();
                radius[i] += a;
                radius[j] += a;
            }
        }
        (0..self.n).map(|i| self.get(i, i) - radius[i]).fold(f64::INFINITY, f64::min)
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| self.get(i, j))
    }

    /// Cholesky factor of `self - shift * I`.
    pub fn cholesky(&self, shift: f64) -> Result<BandCholesky> {
        let (n, b) = (self.n, self.b);
        let w = b + 1;
        let mut l = self.data.clone();
        for i in 0..n {
            l[i * w + b] -= shift;
        }
        for i in 0..n {
            let j0 = i.saturating_sub(b);
            for j in j0..=i {
                let k0 = j0.max(j.saturating_sub(b));
                let ri = i * w + b - i;
                let rj = j * w + b - j;
                let mut s = l[ri + j];
                for k in k0..j {
                    s -= l[ri + k] * l[rj + k];
                }
                if i == j {
                    if !(s > 0.0) {
                        return Err(Error::NotConverged { residual: s, iterations: i });
                    }
                    l[ri + i] = s.sqrt();
                } else {
                    l[ri + j] = s / l[rj + j];
                }
            }
        }
        Ok(BandCholesky { n, b, l })
    }
}

pub struct BandCholesky {
    n: usize,
    b: usize,
    l: Vec<f64>,
}

impl BandCholesky {
    pub fn solve(&self, rhs: &mut [f64]) {
        let (n, b) = (self.n, self.b);
        let w = b + 1;
        for i in 0..n {
            let ri = i * w + b - i;
            let mut s = rhs[i];
            for k in i.saturating_sub(b)..i {
                s -= self.l[ri + k] * rhs[k];
            }
            rhs[i] = s / self.l[ri + i];
        }
        for i in (0..n).rev() {
            let ri = i * w + b - i;
            rhs[i] /= self.l[ri + i];
            let xi = rhs[i];
            for k in i.saturating_sub(b)..i {
                rhs[k] -= self.l[ri + k] * xi;
            }
        }
    }
}

/// Eigenpairs in ascending order with residual norms `|A y - lambda y|`.
pub struct EigenPairs {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
    pub residuals: Vec<f64>,
}

pub const DENSE_LIMIT: usize = 1500;

/// Lowest `k` eigenpairs of `a`.
pub fn lowest_eigenpairs(a: &SymBand, k: usize, seed: u64) -> Result<EigenPairs> {
    let k = k.min(a.n);
    if k == 0 {
        return Ok(EigenPairs { values: vec![], vectors: vec![], residuals: vec![] });
    }
    if a.n <= DENSE_LIMIT {
        dense_lowest(a, k)
    } else {
        lanczos_lowest(a, k, seed)
    }
}

fn dense_lowest(a: &SymBand, k: usize) -> Result<EigenPairs> {
    let eig = SymmetricEigen::new(a.to_dense());
    let mut order: Vec<usize> = (0..a.n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let mut out = EigenPairs { values: vec![], vectors: vec![], residuals: vec![] };
    for &i in order.iter().take(k) {
        let v: Vec<f64> = eig.eigenvectors.column(i).iter().copied().collect();
        let lam = eig.eigenvalues[i];
        out.residuals.push(residual(a, lam, &v));
        out.values.push(lam);
        out.vectors.push(v);
    }
    Ok(out)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(y: &mut [f64], alpha: f64, x: &[f64]) {
    y.iter_mut().zip(x).for_each(|(a, b)| *a += alpha * b);
}

fn residual(a: &SymBand, lam: f64, v: &[f64]) -> f64 {
    let mut y = vec![0.0; a.n];
    a.matvec(v, &mut y);
    axpy(&mut y, -lam, v);
    dot(&y, &y).sqrt() / dot(v, v).sqrt()
}

fn orthogonalize(w: &mut [f64], basis: &[Vec<f64>]) {
    for _ in 0..2 {
        for v in basis {
            let c = dot(w, v);
            axpy(w, -c, v);
        }
    }
}

/// Largest `k` eigenpairs of the shifted inverse, in the complement of `locked`.
fn lanczos_pass(
    a: &SymBand,
    chol: &BandCholesky,
    shift: f64,
    k: usize,
    locked: &[Vec<f64>],
    rng: &mut ChaCha8Rng,
) -> Result<Vec<(f64, Vec<f64>)>> {
    let n = a.n;
    let avail = n - locked.len();
    let k = k.min(avail);
    if k == 0 {
        return Ok(Vec::new());
    }
    let max_steps = avail.min(600.max(8 * k));
    let mut v0: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() - 0.5).collect();
    orthogonalize(&mut v0, locked);
    let nrm = dot(&v0, &v0).sqrt();
    v0.iter_mut().for_each(|x| *x /= nrm);
    let mut basis: Vec<Vec<f64>> = vec![v0];
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let tol = 1e-12;
    loop {
        let j = basis.len() - 1;
        let mut w = basis[j].clone();
        chol.solve(&mut w);
        let aj = dot(&w, &basis[j]);
        axpy(&mut w, -aj, &basis[j]);
        if j > 0 {
            axpy(&mut w, -beta[j - 1], &basis[j - 1]);
        }
        orthogonalize(&mut w, locked);
        orthogonalize(&mut w, &basis);
        alpha.push(aj);
        let bj = dot(&w, &w).sqrt();
        let steps = alpha.len();
        let check = steps >= k + 10 && (steps % 10 == 0 || bj < 1e-14 || steps >= max_steps);
        if check || bj < 1e-14 || steps >= max_steps {
            let t = DMatrix::from_fn(steps, steps, |r, c| {
                if r == c {
                    alpha[r]
                } else if r + 1 == c {
                    beta[r]
                } else if c + 1 == r {
                    beta[c]
                } else {
                    0.0
                }
            });
            let eig = SymmetricEigen::new(t);
            let mut order: Vec<usize> = (0..steps).collect();
            order.sort_by(|&x, &y| eig.eigenvalues[y].total_cmp(&eig.eigenvalues[x]));
            let kk = k.min(steps);
            let converged = order.iter().take(kk).all(|&i| {
                let theta = eig.eigenvalues[i];
                (bj * eig.eigenvectors[(steps - 1, i)]).abs() <= tol * theta.abs()
            });
            if converged || bj < 1e-14 || steps >= max_steps {
                if !converged && bj >= 1e-14 {
                    let worst = order
                        .iter()
                        .take(kk)
                        .map(|&i| (bj * eig.eigenvectors[(steps - 1, i)]).abs())
                        .fold(0.0, f64::max);
                    return Err(Error::NotConverged { residual: worst, iterations: steps });
                }
                let mut out = Vec::new();
                for &i in order.iter().take(kk) {
                    let mut y = vec![0.0; n];
                    for (r, v) in basis.iter().enumerate().take(steps) {
                        axpy(&mut y, eig.eigenvectors[(r, i)], v);
                    }
                    let nrm = dot(&y, &y).sqrt();
                    y.iter_mut().for_each(|x| *x /= nrm);
                    out.push((shift + 1.0 / eig.eigenvalues[i], y));
                }
                return Ok(out);
            }
        }
        beta.push(bj);
        w.iter_mut().for_each(|x| *x /= bj);
        basis.push(w);
    }
}

/// Largest shift found by bisection at which `a - shift` still factors, so just below the
/// lowest eigenvalue. `lo` must factor.
fn tight_shift(a: &SymBand, mut lo: f64) -> f64 {
    let mut hi = (0..a.n).map(|i| a.get(i, i)).fold(f64::INFINITY, f64::min);
    for _ in 0..60 {
        if hi - lo <= 1e-6 * (1.0 + hi.abs()) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if a.cholesky(mid).is_ok() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo - 1e-6 * (1.0 + hi.abs())
}

/// Shift-invert Lanczos with full reorthogonalization. Extra passes in the complement
/// of the converged vectors pick up repeated eigenvalues.
fn lanczos_lowest(a: &SymBand, k: usize, seed: u64) -> Result<EigenPairs> {
    let mut shift = a.gershgorin_lower() - 1.0;
    let mut chol = a.cholesky(shift)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut found: Vec<(f64, Vec<f64>)> = match lanczos_pass(a, &chol, shift, k, &[], &mut rng) {
        Ok(f) => f,
        Err(Error::NotConverged { .. }) => {
            // bottom of the spectrum is clustered relative to its distance from the shift
            shift = tight_shift(a, shift);
            chol = a.cholesky(shift)?;
            lanczos_pass(a, &chol, shift, k, &[], &mut rng)?
        }
        Err(e) => return Err(e),
    };
    for _ in 0..(4 * k + 8) {
        found.sort_by(|x, y| x.0.total_cmp(&y.0));
        if found.len() >= a.n {
            break;
        }
        let locked: Vec<Vec<f64>> = found.iter().map(|f| f.1.clone()).collect();
        let extra = lanczos_pass(a, &chol, shift, 1, &locked, &mut rng)?;
        let kth = found.get(k - 1).map_or(f64::INFINITY, |f| f.0);
        match extra.into_iter().next() {
            Some(e) if e.0 < kth - 1e-10 * (1.0 + kth.abs()) => found.push(e),
            _ => break,
        }
    }
    found.sort_by(|x, y| x.0.total_cmp(&y.0));
    found.truncate(k);
    let mut out = EigenPairs { values: vec![], vectors: vec![], residuals: vec![] };
    for (lam, v) in found {
        out.residuals.push(residual(a, lam, &v));
        out.values.push(lam);
        out.vectors.push(v);
    }
    Ok(out)
}

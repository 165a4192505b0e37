//! Small numerical helpers shared by the modules.

/// `ln(y + sqrt(y^2 - 1))`, clamped to 0 just above 1.
pub fn arcosh(y: f64) -> f64 {
    if y < 1.0 + 1e-12 {
        return 0.0;
    }
    (y + (y * y - 1.0).sqrt()).ln()
}

/// Bracketed bisection. Returns `None` when `f(a)` and `f(b)` share a sign.
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> Option<f64> {
    let mut fa = f(a);
    let fb = f(b);
    if fa == 0.0 {
        return Some(a);
    }
    if fb == 0.0 {
        return Some(b);
    }
    if fa.signum() == fb.signum() || !fa.is_finite() || !fb.is_finite() {
        return None;
    }
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if (b - a).abs() < tol {
            return Some(mid);
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Some(mid);
        }
        if fm.signum() == fa.signum() {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    Some(0.5 * (a + b))
}

/// Scan `[a, b]` in `n` steps and bisect every sign change.
pub fn all_roots<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize, tol: f64) -> Vec<f64> {
    let mut roots = Vec::new();
    let step = (b - a) / n as f64;
    let mut x0 = a;
    let mut f0 = f(x0);
    for k in 1..=n {
        let x1 = a + step * k as f64;
        let f1 = f(x1);
        if f0.is_finite() && f1.is_finite() && f0.signum() != f1.signum() {
            // discard poles: a genuine root keeps |f| small near the crossing
            if let Some(r) = bisect(&f, x0, x1, tol) {
                if f(r).abs() < 1e-6 * (1.0 + f0.abs().min(f1.abs())) {
                    roots.push(r);
                }
            }
        }
        x0 = x1;
        f0 = f1;
    }
    roots
}

fn bump(s: f64) -> f64 {
    if s > 0.0 {
        (-1.0 / s).exp()
    } else {
        0.0
    }
}

/// Smooth step `S` with `S = 0` on `y <= 0`, `S = 1` on `y >= 1`, and its first two derivatives.
pub fn smoothstep3(y: f64) -> (f64, f64, f64) {
    if y <= 0.0 {
        return (0.0, 0.0, 0.0);
    }
    if y >= 1.0 {
        return (1.0, 0.0, 0.0);
    }
    let z = 1.0 - y;
    let a = bump(y);
    let b = bump(z);
    let a1 = a / (y * y);
    let b1 = -b / (z * z);
    let a2 = a * (1.0 / y.powi(4) - 2.0 / y.powi(3));
    let b2 = b * (1.0 / z.powi(4) - 2.0 / z.powi(3));
    let s = a + b;
    let val = a / s;
    let num1 = a1 * b - a * b1;
    let d1 = num1 / (s * s);
    let d2 = ((a2 * b - a * b2) * s - 2.0 * num1 * (a1 + b1)) / (s * s * s);
    (val, d1, d2)
}

/// The cutoff `Psi`: 1 on `x <= 1`, 0 on `x >= 2`, smooth and strictly decreasing between.
pub fn cutoff(x: f64) -> f64 {
    smoothstep3(2.0 - x).0
}

/// `(Psi, Psi', Psi'')` at `x`.
pub fn cutoff3(x: f64) -> (f64, f64, f64) {
    let (v, d1, d2) = smoothstep3(2.0 - x);
    (v, -d1, d2)
}

/// `x mod 2`, the parity bit used throughout the balancing formulas.
pub fn parity(n: usize) -> f64 {
    (n % 2) as f64
}

pub fn sech(t: f64) -> f64 {
    1.0 / t.cosh()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arcosh_guard_and_value() {
        assert_eq!(arcosh(1.0), 0.0);
        assert_eq!(arcosh(0.5), 0.0);
        assert!((arcosh(2.0f64.cosh()) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn cutoff_plateaus() {
        assert_eq!(cutoff(0.5), 1.0);
        assert_eq!(cutoff(3.0), 0.0);
        let v = cutoff(1.5);
        assert!(v > 0.0 && v < 1.0);
        assert!((v - 0.5).abs() < 1e-12);
    }

    #[test]
    fn cutoff_derivatives_match_differences() {
        let fd = |x: f64, h: f64| {
            let d1 = (cutoff(x + h) - cutoff(x - h)) / (2.0 * h);
            let d2 = (cutoff(x + h) - 2.0 * cutoff(x) + cutoff(x - h)) / (h * h);
            (d1, d2)
        };
        for &x in &[1.1, 1.3, 1.5, 1.77, 1.9] {
            let (_, d1, d2) = cutoff3(x);
            let (a1, a2) = fd(x, 2e-4);
            let (b1, b2) = fd(x, 1e-4);
            let (fd1, fd2) = ((4.0 * b1 - a1) / 3.0, (4.0 * b2 - a2) / 3.0);
            assert!((d1 - fd1).abs() < 1e-6, "{x}: {d1} vs {fd1}");
            assert!((d2 - fd2).abs() < 1e-6, "{x}: {d2} vs {fd2}");
        }
    }

    #[test]
    fn bisect_finds_root() {
        let r = bisect(|x| x * x - 2.0, 0.0, 2.0, 1e-14).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-12);
        assert!(bisect(|x| x * x + 1.0, -1.0, 1.0, 1e-12).is_none());
    }
}

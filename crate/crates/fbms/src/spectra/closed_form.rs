//! Transcendental eigenvalue conditions for rotationally invariant modes of
//! `d_t^2 + d_theta^2 + 2 sech^2 t` on `(-T, T) x (-pi/2, pi/2)`.
//!
//! Hyperbolic modes solve `L u = gamma^2 u` and have eigenvalue `-gamma^2`; oscillatory
//! modes solve `L u = -(s/T)^2 u` and have eigenvalue `(s/T)^2`. The oscillatory
//! conditions are multiplied through by `sin s` or `cos s` so they have no poles.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::util::{all_roots, sech};

pub const ROOT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    DirichletTEven,
    NeumannTEven,
    NeumannTOdd,
    NeumannOscillatoryEven,
    NeumannOscillatoryOdd,
    DirichletOscillatoryEven,
    DirichletOscillatoryOdd,
}

impl Family {
    pub fn parse(s: &str) -> Option<Family> {
        Some(match s {
            "dirichlet-t-even" => Family::DirichletTEven,
            "neumann-t-even" => Family::NeumannTEven,
            "neumann-t-odd" => Family::NeumannTOdd,
            "neumann-oscillatory-even" => Family::NeumannOscillatoryEven,
            "neumann-oscillatory-odd" => Family::NeumannOscillatoryOdd,
            "dirichlet-oscillatory-even" => Family::DirichletOscillatoryEven,
            "dirichlet-oscillatory-odd" => Family::DirichletOscillatoryOdd,
            _ => return None,
        })
    }

    pub fn is_oscillatory(self) -> bool {
        !matches!(self, Family::DirichletTEven | Family::NeumannTEven | Family::NeumannTOdd)
    }

    pub fn is_t_even(self) -> bool {
        matches!(
            self,
            Family::DirichletTEven
                | Family::NeumannTEven
                | Family::NeumannOscillatoryEven
                | Family::DirichletOscillatoryEven
        )
    }

    pub fn is_dirichlet(self) -> bool {
        matches!(
            self,
            Family::DirichletTEven | Family::DirichletOscillatoryEven | Family::DirichletOscillatoryOdd
        )
    }
}

/// A root of a family condition: `gamma` (hyperbolic) or `s` (oscillatory), and its eigenvalue.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ClosedFormRoot {
    pub param: f64,
    pub lambda: f64,
}

/// The condition whose zeros are the family's roots.
pub fn condition(family: Family, t_max: f64) -> impl Fn(f64) -> f64 {
    let th = t_max.tanh();
    let cth = 1.0 / th;
    let s2 = sech(t_max).powi(2);
    move |x: f64| match family {
        Family::DirichletTEven => (x * t_max).tanh() - x * cth,
        Family::NeumannTEven => x * x - x * th / (x * t_max).tanh() - s2,
        Family::NeumannTOdd => x * x - x * (x * t_max).tanh() * th - s2,
        Family::NeumannOscillatoryEven => (x * x / t_max + t_max * s2) * x.sin() + x * x.cos() * th,
        Family::NeumannOscillatoryOdd => x * x.sin() * th - (x * x / t_max + t_max * s2) * x.cos(),
        Family::DirichletOscillatoryEven => x / t_max * x.cos() - x.sin() * th,
        Family::DirichletOscillatoryOdd => x / t_max * x.sin() + x.cos() * th,
    }
}

/// Roots of `family` with eigenvalue at most `lambda_max`, ascending in eigenvalue.
///
/// The spurious roots `gamma = 0`, `s = 0` and (t-odd Neumann) `gamma = 1` carry no
/// eigenfunction and are dropped.
pub fn catenoid_closed_form(t_max: f64, family: Family, lambda_max: f64) -> Result<Vec<ClosedFormRoot>> {
    if !(t_max >= 2.0) || !t_max.is_finite() {
        return Err(Error::InvalidParameter(format!("T = {t_max} below the guard T >= 2")));
    }
    let f = condition(family, t_max);
    let mut out: Vec<ClosedFormRoot> = if family.is_oscillatory() {
        if lambda_max <= 0.0 {
            return Ok(Vec::new());
        }
        let s_max = lambda_max.sqrt() * t_max;
        let n = (s_max * 200.0).ceil().max(200.0) as usize;
        all_roots(&f, 1e-9, s_max, n, ROOT_TOL)
            .into_iter()
            .filter(|s| *s > 1e-6)
            .map(|s| ClosedFormRoot { param: s, lambda: (s / t_max).powi(2) })
            .collect()
    } else {
        // -gamma^2 <= lambda_max; the potential bounds gamma^2 by 2
        let g_max = 2f64.sqrt() + 1e-9;
        all_roots(&f, 1e-9, g_max, 20_000, ROOT_TOL)
            .into_iter()
            .filter(|g| *g > 1e-6 && (family != Family::NeumannTOdd || (g - 1.0).abs() > 1e-7))
            .map(|g| ClosedFormRoot { param: g, lambda: -g * g })
            .filter(|r| r.lambda <= lambda_max)
            .collect()
    };
    out.sort_by(|a, b| a.lambda.total_cmp(&b.lambda));
    Ok(out)
}

/// Eigenvalues of the full problem (all angular modes) below `lambda_max`, with parities.
///
/// Angular modes are `cos(n (theta + pi/2))`, eigenvalue shift `n^2`, theta-parity `(-1)^n`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ModeEigenvalue {
    pub lambda: f64,
    pub t_parity: i8,
    pub theta_parity: i8,
    pub n: usize,
}

pub fn catenoid_full_spectrum(t_max: f64, dirichlet: bool, lambda_max: f64) -> Result<Vec<ModeEigenvalue>> {
    let fams: [Family; 4] = if dirichlet {
        [
            Family::DirichletTEven,
            Family::DirichletTEven,
            Family::DirichletOscillatoryEven,
            Family::DirichletOscillatoryOdd,
        ]
    } else {
        [
            Family::NeumannTEven,
            Family::NeumannTOdd,
            Family::NeumannOscillatoryEven,
            Family::NeumannOscillatoryOdd,
        ]
    };
    let mut radial: Vec<(f64, i8)> = Vec::new();
    let mut seen = Vec::new();
    for fam in fams {
        if seen.contains(&fam) {
            continue;
        }
        seen.push(fam);
        for r in catenoid_closed_form(t_max, fam, lambda_max)? {
            radial.push((r.lambda, if fam.is_t_even() { 1 } else { -1 }));
        }
    }
    let mut out = Vec::new();
    for (lam, tp) in radial {
        let mut n = 0usize;
        while lam + (n * n) as f64 <= lambda_max {
            out.push(ModeEigenvalue {
                lambda: lam + (n * n) as f64,
                t_parity: tp,
                theta_parity: if n % 2 == 0 { 1 } else { -1 },
                n,
            });
            n += 1;
        }
    }
    out.sort_by(|a, b| a.lambda.total_cmp(&b.lambda));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dirichlet_root_below_one() {
        let r = catenoid_closed_form(3.0, Family::DirichletTEven, 0.0).unwrap();
        assert_eq!(r.len(), 1);
        assert!((r[0].lambda + 0.979_753_536_668).abs() < 1e-9);
    }

    #[test]
    fn neumann_odd_has_no_hyperbolic_root() {
        assert!(catenoid_closed_form(6.0, Family::NeumannTOdd, 0.0).unwrap().is_empty());
    }

    #[test]
    fn guard_rejects_small_t() {
        assert!(catenoid_closed_form(1.0, Family::NeumannTEven, 0.0).is_err());
    }
}

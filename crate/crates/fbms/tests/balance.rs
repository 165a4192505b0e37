use std::f64::consts::PI;

use approx::assert_relative_eq;
use nalgebra::{DMatrix, SymmetricEigen};
use proptest::prelude::*;

use fbms::balance::*;
use fbms::Error;

fn sin_oracle(n_layers: usize) -> Vec<f64> {
    let nf = n_layers as f64;
    let n = (n_layers / 2) as f64;
    (1..n_layers).map(|j| (j as f64 * PI / nf).sin() / (n * PI / nf).sin()).collect()
}

#[test]
fn waist_ratios_match_sine_oracle() {
    for big_n in 2..=12 {
        let (x, lambda) = limiting_waist_ratios(big_n).unwrap();
        let oracle = sin_oracle(big_n);
        for (a, b) in x.iter().zip(&oracle) {
            assert!((a - b).abs() < 1e-10, "N={big_n}: {x:?} vs {oracle:?}");
        }
        assert!(balancing_residual(big_n, &x) < 1e-12, "N={big_n}");
        assert!(lambda < 2.0);
        assert_relative_eq!(lambda, 2.0 * (PI / big_n as f64).cos(), epsilon = 1e-12);
        assert_eq!(x[big_n / 2 - 1], 1.0);
        assert!(mirror_defect(&x, 1.0) < 1e-14);
        for w in x[..big_n / 2].windows(2) {
            assert!(0.0 < w[0] && w[0] < w[1]);
        }
    }
    let (x, l) = limiting_waist_ratios(5).unwrap();
    assert_relative_eq!(x[0], 0.6180340, epsilon = 1e-7);
    assert_relative_eq!(l, 1.6180340, epsilon = 1e-7);
}

#[test]
fn other_eigenvectors_are_not_balanced() {
    for big_n in 3..=6 {
        let d = big_n - 1;
        let n = big_n / 2;
        let b = DMatrix::<f64>::from_fn(d, d, |i, j| if i.abs_diff(j) == 1 { 1.0 } else { 0.0 });
        let eig = SymmetricEigen::new(b);
        let top = eig.eigenvalues.imax();
        for k in (0..d).filter(|&k| k != top) {
            let v = eig.eigenvectors.column(k);
            if v[n - 1].abs() < 1e-12 {
                // cannot be normalized to x_n = 1
                continue;
            }
            let x: Vec<f64> = v.iter().map(|c| c / v[n - 1]).collect();
            let positive = x.iter().all(|&c| c > 0.0);
            let balanced = balancing_residual(big_n, &x) < 1e-8;
            assert!(!(positive && balanced), "N={big_n}, eigenvector {k}: {x:?}");
        }
    }
}

#[test]
fn two_layer_chain() {
    let d = derived_parameters(&StackingParams::balanced(2, 10).unwrap()).unwrap();
    assert_relative_eq!(d.taubar[0], (-5.0f64).exp() / 10.0, max_relative = 1e-14);
    assert_relative_eq!(d.taubar[0], 6.7379e-4, max_relative = 1e-4);
    assert_eq!(d.hk[0], 0.0);
    let tau = d.tau[0];
    let y = 1.0 / (10.0 * tau);
    let hb1 = -tau * (y + (y * y - 1.0).sqrt()).ln();
    assert_relative_eq!(d.hb[0], hb1, max_relative = 1e-13);
    assert_relative_eq!(d.hb[0], -3.836e-3, max_relative = 1e-3);
    assert_relative_eq!(d.hb[1], -d.hb[0]);
    assert_eq!(d.disloc, vec![0.0, 0.0]);
}

#[test]
fn chain_invariants() {
    assert!(matches!(
        derived_parameters(&StackingParams::balanced(9, 12).unwrap()),
        Err(Error::MTooSmall { i: 3, .. })
    ));
    for big_n in 2..=9 {
        for m in [40, 80, 160] {
            let d = derived_parameters(&StackingParams::balanced(big_n, m).unwrap()).unwrap();
            let n = big_n / 2;
            if big_n % 2 == 0 {
                assert_eq!(d.hk[n - 1], 0.0);
            } else {
                assert_eq!(d.hb[n], 0.0);
            }
            assert!(d.matching_residual < 1e-14);
            assert!(d.tau.iter().all(|&t| t > 0.0));
            assert!(mirror_defect(&d.tau, 1.0) < 1e-15);
            assert!(mirror_defect(&d.hk, -1.0) < 1e-15);
            assert!(mirror_defect(&d.hb, -1.0) < 1e-15);
            assert!(d.disloc.iter().all(|&v| v == 0.0));
            for (a, t) in d.a.iter().zip(&d.tau) {
                assert_relative_eq!(a.cosh(), 1.0 / (2.0 * m as f64 * t), max_relative = 1e-12);
            }
        }
    }
}

#[test]
fn dislocations_follow_xi() {
    let (big_n, m) = (5, 16);
    let zeta = vec![0.2, -0.1, -0.1, 0.2];
    let xi = vec![0.7, -0.3, 0.3, -0.7];
    let plus = derived_parameters(&StackingParams::new(big_n, m, zeta.clone(), xi.clone()).unwrap()).unwrap();
    let neg: Vec<f64> = xi.iter().map(|v| -v).collect();
    let minus = derived_parameters(&StackingParams::new(big_n, m, zeta.clone(), neg).unwrap()).unwrap();
    let zero = derived_parameters(&StackingParams::new(big_n, m, zeta, vec![0.0; 4]).unwrap()).unwrap();
    assert_eq!((plus.disloc[0], plus.disloc[big_n - 1]), (0.0, 0.0));
    assert!(mirror_defect(&plus.disloc, 1.0) < 1e-16);
    for i in 0..big_n {
        assert_eq!(plus.disloc[i], -minus.disloc[i]);
        // heights are affine in xi
        assert!((plus.hb[i] + minus.hb[i] - 2.0 * zero.hb[i]).abs() < 1e-16);
    }
    for i in 0..big_n - 1 {
        assert!((plus.hk[i] + minus.hk[i] - 2.0 * zero.hk[i]).abs() < 1e-16);
    }
    assert!(plus.matching_residual < 1e-14);
    assert!(mirror_defect(&plus.hb, -1.0) < 1e-15);
}

#[test]
fn invalid_data_is_rejected() {
    assert!(matches!(StackingParams::new(3, 10, vec![0.1, 0.2], vec![0.0, 0.0]), Err(Error::InvalidParameter(_))));
    assert!(matches!(StackingParams::new(3, 10, vec![0.0, 0.0], vec![0.1, 0.1]), Err(Error::InvalidParameter(_))));
    assert!(StackingParams::balanced(1, 10).is_err());
    assert!(StackingParams::balanced(3, 2).is_err());
    let p = StackingParams::new(4, 3, vec![4.0, 0.0, 4.0], vec![0.0; 3]).unwrap();
    match derived_parameters(&p) {
        Err(Error::MTooSmall { i, value, .. }) => {
            assert_eq!(i, 1);
            assert!(value <= 1.0);
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn predicted_force_expansion() {
    let d = derived_parameters(&StackingParams::balanced(2, 10).unwrap()).unwrap();
    let f = predicted_forces(&d);
    assert_relative_eq!(f.forces[0] / d.tau[0], -2.0 * PI * 2f64.ln(), max_relative = 1e-3);
    assert!(mirror_defect(&f.forces, -1.0) < 1e-18);
    for big_n in 3..=7 {
        let mut prev = None;
        for m in [20, 40, 80] {
            let d = derived_parameters(&StackingParams::balanced(big_n, m).unwrap()).unwrap();
            let f = predicted_forces(&d);
            assert!(mirror_defect(&f.forces, -1.0) < 1e-15 * d.tau_n().max(1e-300) * 1e3);
            let norm = f.f_tilde.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            assert!(norm < 10.0, "N={big_n} m={m}: {:?}", f.f_tilde);
            if let Some(p) = prev {
                assert_relative_eq!(norm, p, max_relative = 0.05);
            }
            prev = Some(norm);
        }
    }
}

#[test]
fn coker_map_is_invertible_and_tracks_forces() {
    for big_n in 2..=8 {
        let (x, _) = limiting_waist_ratios(big_n).unwrap();
        let c = coker_map(big_n, &x).unwrap();
        let dim = (big_n - 1).div_ceil(2) + (big_n - 1) / 2;
        assert_eq!(c.p.shape(), (dim, dim));
        assert!(c.p.clone().try_inverse().is_some());
        assert!(c.norm.is_finite() && c.inverse_norm.is_finite());
        let (a, b) = c.apply_full(&vec![0.0; big_n - 1], &vec![0.0; big_n - 1]);
        assert!(a.iter().chain(&b).all(|&v| v == 0.0));
    }
    let mut seed = 1u64;
    let mut next = || {
        seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        ((seed >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
    };
    for big_n in 2..=6 {
        let (x, _) = limiting_waist_ratios(big_n).unwrap();
        let c = coker_map(big_n, &x).unwrap();
        let zeta = mirror_project(&(0..big_n - 1).map(|_| next()).collect::<Vec<_>>(), 1.0);
        let xi = mirror_project(&(0..big_n - 1).map(|_| next()).collect::<Vec<_>>(), -1.0);
        let (pa, pb) = c.apply_full(&zeta, &xi);
        let mut norms = Vec::new();
        for m in [30, 60, 120] {
            let d = derived_parameters(&StackingParams::new(big_n, m, zeta.clone(), xi.clone()).unwrap()).unwrap();
            let f = predicted_forces(&d);
            let tn = d.tau_n();
            let mut e: f64 = 0.0;
            for i in 0..big_n {
                e = e.max((f.forces[i] / tn - pa[i]).abs());
                // the dislocation half is exact
                assert!((d.disloc[i] / tn - pb[i]).abs() < 1e-12);
            }
            norms.push(e);
        }
        assert!(norms.iter().all(|&e| e < 2.0 * norms[0] + 1.0), "N={big_n}: {norms:?}");
        assert!((norms[2] - norms[1]).abs() <= (norms[1] - norms[0]).abs() + 1e-9, "N={big_n}: {norms:?}");
    }
}

proptest! {
    #[test]
    fn mirror_projections_split_vectors(v in proptest::collection::vec(-10.0f64..10.0, 1..12)) {
        let p = mirror_project(&v, 1.0);
        let q = mirror_project(&v, -1.0);
        for i in 0..v.len() {
            prop_assert!((p[i] + q[i] - v[i]).abs() < 1e-12);
        }
        let pp = mirror_project(&p, 1.0);
        prop_assert!(p.iter().zip(&pp).all(|(a, b)| (a - b).abs() < 1e-12));
        prop_assert!(mirror_defect(&p, 1.0) < 1e-12 && mirror_defect(&q, -1.0) < 1e-12);
        let dot: f64 = p.iter().zip(&q).map(|(a, b)| a * b).sum();
        prop_assert!(dot.abs() < 1e-9);
    }
}

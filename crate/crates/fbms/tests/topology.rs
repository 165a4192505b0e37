use fbms::topology::*;
use fbms::Error;

#[test]
fn stacking_types() {
    assert_eq!(stacking_topology(4, 8).unwrap(), TopologicalType::new(7, 8));
    assert_eq!(stacking_topology(5, 8).unwrap(), TopologicalType::new(14, 1));
    for m in 3..10 {
        assert_eq!(stacking_topology(1, m).unwrap(), TopologicalType::new(0, 1));
    }
    assert!(matches!(stacking_topology(2, 2), Err(Error::Unsupported(_))));
}

#[test]
fn complexes_match_riemann_hurwitz_on_the_grid() {
    for n in 1..=8usize {
        for m in 3..=12usize {
            let s = build_combinatorial_stacking(n, m).unwrap();
            assert!(s.is_valid(), "({n},{m})");
            let chi = euler_characteristic(&s);
            let t = stacking_topology(n, m).unwrap();
            assert_eq!(chi, 2 - 2 * t.genus - t.boundary_components, "({n},{m})");
            assert_eq!(chi, m as i64 - (m as i64 - 1) * n as i64, "({n},{m})");
            assert_eq!(s.n_boundary_components() as i64, t.boundary_components, "({n},{m})");
            if (t.genus, t.boundary_components) != (0, 1) {
                let u = umbilic_budget(t.genus, t.boundary_components).unwrap();
                assert_eq!(u, 4 * (m as i64 - 1) * n as i64 - 4 * m as i64);
            }
        }
    }
}

#[test]
fn small_examples() {
    assert_eq!(euler_characteristic(&build_combinatorial_stacking(2, 3).unwrap()), -1);
    assert_eq!(euler_characteristic(&build_combinatorial_stacking(1, 4).unwrap()), 1);
    assert_eq!(euler_characteristic(&build_combinatorial_stacking(5, 8).unwrap()), -27);
    assert_eq!(euler_characteristic(&build_combinatorial_stacking(4, 8).unwrap()), 2 - 2 * 7 - 8);
    assert_eq!(euler_characteristic(&disc_complex(3)), 1);
    assert_eq!(euler_characteristic(&annulus_complex(4)), 0);
}

#[test]
fn umbilic_examples() {
    assert_eq!(umbilic_budget(7, 8).unwrap(), 80);
    assert_eq!(umbilic_budget(0, 2).unwrap(), 0);
    assert!(matches!(umbilic_budget(0, 1), Err(Error::Inapplicable(_))));
}

#[test]
fn maximal_symmetry() {
    let c = max_symmetry_certificate(4, 8).unwrap();
    assert!(c.extra_symmetry_excluded);
    assert_eq!(c.budget, 4 * 7 * 4 - 32);
    let c = max_symmetry_certificate(2, 3).unwrap();
    // 4(m-1)N - 4m = 4 against 4(m-1)N = 16
    assert_eq!((c.budget, c.axis_preserving_required), (4, 16));
    assert!(c.extra_symmetry_excluded);
    let c = max_symmetry_certificate(3, 3).unwrap();
    assert!(c.extra_symmetry_excluded);
    assert_eq!(c.rotation_fixed_umbilic_order, 4);
    assert!(c.axis_not_preserved_required.is_none());
    for n in 2..=8 {
        for m in 3..=12 {
            assert!(max_symmetry_certificate(n, m).unwrap().extra_symmetry_excluded, "({n},{m})");
        }
    }
    assert!(matches!(max_symmetry_certificate(2, 2), Err(Error::Unsupported(_))));
}

#[test]
fn polymorphism_members_share_genus() {
    let fam = polymorphism_family(1, &|_| 3).unwrap();
    assert_eq!(fam.len(), 1);
    assert_eq!(fam[0].n_layers, 7);
    // genus q*3 with m = 1 + q and q the least value above the m0 bound
    assert_eq!(fam[0].shared_genus, 3 * (fam[0].m as i64 - 1));
    assert!(fam[0].m > 3);
    let fam = polymorphism_family(3, &|n| n + 5).unwrap();
    let ns: Vec<usize> = fam.iter().map(|f| f.n_layers).collect();
    assert_eq!(ns, vec![7, 11, 15]);
    for f in &fam {
        let t = stacking_topology(f.n_layers, f.m).unwrap();
        assert_eq!(t.genus, f.shared_genus);
        assert_eq!(t.boundary_components, 1);
        assert!(f.m >= f.n_layers + 5);
    }
    assert_eq!(fam[0].shared_genus % (3 * 5 * 7), 0);
    let mut orders: Vec<usize> = fam.iter().map(|f| 4 * f.m).collect();
    orders.sort();
    orders.dedup();
    assert_eq!(orders.len(), 3);
}

#[test]
fn odd_primes_list() {
    assert_eq!(odd_primes(6), vec![3, 5, 7, 11, 13, 17]);
}

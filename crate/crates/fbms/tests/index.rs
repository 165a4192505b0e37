use fbms::index::*;
use fbms::topology::stacking_topology;

fn lower_formula(big_n: usize, m: usize) -> usize {
    (big_n - 1).max(2) * m
}

#[test]
fn catalog_examples() {
    let c = partition_catalog(4, 8).unwrap();
    let counts: Vec<_> = c.iter().map(|r| (r.kind, r.count, r.orbit_count)).collect();
    assert_eq!(
        counts,
        vec![(RegionKind::Catenoid, 24, 2), (RegionKind::Disc, 4, 2), (RegionKind::Intermediate, 4, 2)]
    );
    let c = partition_catalog(5, 8).unwrap();
    assert_eq!((c[0].count, c[0].orbit_count, c[1].orbit_count, c[2].orbit_count), (32, 2, 3, 3));
    for m in 3..10 {
        let c = partition_catalog(2, m).unwrap();
        assert_eq!((c[0].count, c[1].count, c[2].count), (m, 2, 2));
    }
    assert!(partition_catalog(2, 2).is_err());
}

#[test]
fn orbit_sizes_sum_to_counts() {
    for big_n in 2..=8 {
        for m in 3..=20 {
            for c in partition_catalog(big_n, m).unwrap() {
                let generic = c.orbit_count - usize::from(c.has_middle());
                let total = generic * c.orbit_size + c.middle_orbit_size.unwrap_or(0);
                assert_eq!(total, c.count, "({big_n},{m}) {:?}", c.kind);
            }
        }
    }
}

#[test]
fn montiel_ros_examples() {
    let (lo, _) = montiel_ros_lower(&partition_catalog(3, 100).unwrap());
    assert_eq!(lo, 200);
    let (lo, _) = montiel_ros_lower(&partition_catalog(2, 10).unwrap());
    assert_eq!(lo, 10);
    assert_eq!(theorem_bounds(2, 10).unwrap().lower, 20);
    let (_, eq) = montiel_ros_lower(&partition_catalog(7, 9).unwrap());
    assert_eq!(eq, 3);
    assert_eq!(montiel_ros_upper(&partition_catalog(3, 100).unwrap()).0, 1203);
    for m in [3, 8, 31] {
        assert_eq!(montiel_ros_upper(&partition_catalog(4, m).unwrap()).1, 7);
        assert_eq!(montiel_ros_upper(&partition_catalog(5, m).unwrap()).1, 8);
    }
}

#[test]
fn theorem_examples() {
    let b = theorem_bounds(2, 10).unwrap();
    assert_eq!((b.lower, b.upper_ind_plus_nul, b.equiv_lower, b.equiv_upper), (20, 72, 1, 3));
    let b = theorem_bounds(5, 100).unwrap();
    assert_eq!((b.lower, b.upper_ind_plus_nul, b.equiv_lower, b.equiv_upper), (400, 2205, 2, 8));
}

#[test]
fn bounds_equal_closed_forms_on_grid() {
    for big_n in 2..=8usize {
        for m in 3..=50usize {
            let b = theorem_bounds(big_n, m).unwrap();
            assert_eq!(b.lower, lower_formula(big_n, m), "({big_n},{m})");
            assert_eq!(b.upper_ind_plus_nul, m * (5 * big_n - 3) + big_n);
            assert_eq!(b.upper_ind_plus_nul, 3 * m * (big_n - 1) + big_n + 2 * m * big_n);
            assert_eq!(b.equiv_lower, big_n / 2);
            assert_eq!(b.equiv_upper, if big_n % 2 == 0 { 2 * big_n - 1 } else { 2 * big_n - 2 });
            assert!(b.lower <= b.upper_ind_plus_nul && b.equiv_lower <= b.equiv_upper);
            if big_n % 2 == 1 {
                assert!(b.lower >= 2 * m - 1);
            }
        }
    }
}

#[test]
fn topological_forms() {
    let t = topological_translation(4, 8).unwrap();
    assert_eq!(t.lower_topological, 24);
    assert_eq!(t.lower_topological, 4 - t.euler_char);
    for big_n in 2..=8usize {
        for m in 3..=50usize {
            let t = topological_translation(big_n, m).unwrap();
            assert!(t.lower_matches && t.upper_matches, "({big_n},{m}) {t:?}");
            // substitute the genus and boundary count by hand
            let s = stacking_topology(big_n, m).unwrap();
            let (g, beta, n, mm) = (s.genus, s.boundary_components, big_n as i64, m as i64);
            let upper = mm * (5 * n - 3) + n;
            if big_n % 2 == 0 {
                assert_eq!(10 * g + 7 * beta + 6 * (n - 1) - 4, upper);
            } else {
                assert_eq!(10 * g + beta + 6 * (n - 1) + 2 * mm, upper);
            }
            assert_eq!(2 * g + beta + n - 2, (n - 1) * mm);
        }
    }
}

#[test]
fn sweepout_floor() {
    assert_eq!(minmax_parameter_floor(2), 1);
    assert_eq!(minmax_parameter_floor(3), 1);
    assert_eq!(minmax_parameter_floor(4), 2);
    let one_param: Vec<usize> = (2..=12).filter(|&n| minmax_parameter_floor(n) <= 1).collect();
    assert_eq!(one_param, vec![2, 3]);
}

use proptest::prelude::*;

use super::*;
use crate::cocycle::{make_nrds, FieldSpec, IntegratorConfig};
use crate::driver::BasePoint;

fn line(n: usize) -> Grid<f64> {
    Grid::new(vec![-2.0], vec![2.0], n).unwrap()
}

fn interval(g: &Grid<f64>, a: f64, b: f64) -> BoxSet<f64> {
    BoxSet::covering_box(g.clone(), &[a], &[b]).unwrap()
}

#[test]
fn grid_validation() {
    assert!(Grid::<f64>::new(vec![1.0], vec![0.0], 4).is_err());
    assert!(Grid::<f64>::new(vec![0.0; 4], vec![1.0; 4], 4).is_err());
    assert!(Grid::<f64>::new(vec![0.0], vec![1.0], 0).is_err());
    let g = Grid::<f64>::cube(2, 0.0, 1.0, 4).unwrap();
    assert!((g.diameter() - 0.25 * 2f64.sqrt()).abs() < 1e-15);
}

#[test]
fn self_distance_is_zero() {
    let g = line(512);
    let a = interval(&g, -0.3, 0.7);
    assert_eq!(hausdorff_semidist(&a, &a).unwrap(), 0.0);
}

#[test]
fn nested_intervals() {
    let g = line(512);
    let a = interval(&g, 0.0, 1.0);
    let b = interval(&g, 0.0, 2.0);
    assert_eq!(hausdorff_semidist(&a, &b).unwrap(), 0.0);
    let back = hausdorff_semidist(&b, &a).unwrap();
    assert!((back - 1.0).abs() <= g.diameter(), "{back}");
}

#[test]
fn singletons() {
    let g = line(512);
    let a = interval(&g, 0.3, 0.3);
    let b = interval(&g, -1.1, -1.1);
    assert_eq!(a.count(), 1);
    let d = hausdorff_semidist(&a, &b).unwrap();
    assert!((d - 1.4).abs() <= g.diameter());
}

#[test]
fn empty_sets_and_dimension_mismatch_are_errors() {
    let g = line(8);
    let e = BoxSet::empty(g.clone());
    let f = BoxSet::full(g);
    assert!(hausdorff_semidist(&e, &f).is_err());
    assert!(hausdorff_semidist(&f, &e).is_err());
    let sq = BoxSet::full(Grid::<f64>::cube(2, 0.0, 1.0, 2).unwrap());
    assert!(hausdorff_semidist(&f, &sq).is_err());
}

#[test]
fn dilation_in_two_dimensions() {
    let g = Grid::<f64>::cube(2, 0.0, 1.0, 10).unwrap();
    let a = BoxSet::covering_box(g.clone(), &[0.55, 0.55], &[0.55, 0.55]).unwrap();
    assert_eq!(a.dilate(1).count(), 9);
    let corner = BoxSet::covering_box(g, &[0.0, 0.0], &[0.0, 0.0]).unwrap();
    assert_eq!(corner.dilate(2).count(), 9);
}

#[test]
fn dump_round_trip() {
    let g = Grid::<f64>::new(vec![-1.5, 0.1], vec![2.0, 0.3], 16).unwrap();
    let a = BoxSet::covering_box(g, &[-0.2, 0.15], &[1.0, 0.2]).unwrap();
    let mut buf = Vec::new();
    a.write_dump(&mut buf).unwrap();
    assert!(String::from_utf8_lossy(&buf).starts_with("2 16 -1.5 2 0.1 0.3\n"));
    let b = BoxSet::<f64>::read_dump(&buf[..]).unwrap();
    assert_eq!(a, b);
    assert!(BoxSet::<f64>::read_dump("1 4 0 1\n7\n".as_bytes()).is_err());
}

#[test]
fn points_outside_the_box_are_not_inserted() {
    let mut a = BoxSet::empty(line(4));
    assert!(!a.insert_point(&[2.5]));
    assert!(a.insert_point(&[2.0]));
    assert!(a.contains_cell(3));
}

#[test]
fn symmetric_shift_grid() {
    let s: Vec<f64> = symmetric_shifts(20.0, 41);
    assert_eq!(s.len(), 41);
    assert_eq!(s[20], 0.0);
    assert_eq!(s[0], -20.0);
    assert_eq!(s[40], 20.0);
    let bad = LimitConfig { shifts: vec![0.0, 1.0], ..LimitConfig::<f64>::default() };
    assert!(bad.validate().is_err());
    let bad = LimitConfig { t_burn: 70.0, ..LimitConfig::<f64>::default() };
    assert!(bad.validate().is_err());
}

fn small_cfg() -> LimitConfig<f64> {
    LimitConfig {
        shifts: symmetric_shifts(2.0, 5),
        t_burn: 20.0,
        t_tail: 30.0,
        ..LimitConfig::default()
    }
}

#[test]
fn contraction_limits_are_the_origin() {
    let phi = make_nrds(
        FieldSpec::<f64>::autonomous(1, |u, du| du[0] = -u[0]).unwrap(),
        IntegratorConfig::rk4(0.05),
    )
    .unwrap();
    let g = line(64);
    let b0 = BoxSet::covering_box(Grid::new(vec![-5.0], vec![5.0], 32).unwrap(), &[-5.0], &[5.0]).unwrap();
    let b = BasePoint::circle(0.0, 0.0);
    let zero = interval(&g, 0.0, 0.0);
    let u = uniform_omega_limit(&phi, &b0, &g, &b, &small_cfg()).unwrap();
    let f = forward_omega_limit(&phi, &b0, &g, &b, &small_cfg()).unwrap();
    for est in [&u, &f] {
        assert!(hausdorff_dist(&est.set, &zero).unwrap() <= g.diameter());
        assert!(est.nested);
    }
    assert!(f.set.is_subset(&u.set.dilate(1)).unwrap());
}

#[test]
fn attraction_table_follows_exponential_envelope() {
    let phi = make_nrds(
        FieldSpec::<f64>::autonomous(1, |u, du| du[0] = -u[0]).unwrap(),
        IntegratorConfig::rk4(0.05),
    )
    .unwrap();
    let g = line(400);
    let b0 = BoxSet::covering_box(Grid::new(vec![-1.0], vec![1.0], 20).unwrap(), &[-1.0], &[1.0]).unwrap();
    let a = interval(&g, 0.0, 0.0);
    let rows = attraction_rate(&phi, &b0, &a, &BasePoint::circle(0.0, 0.0), &small_cfg()).unwrap();
    assert_eq!(rows[0].dist, hausdorff_semidist(&b0, &a).unwrap());
    // B0 centers reach |x| = 0.95 and A's single center sits at 0.005
    let a0 = a.centers()[0][0];
    for r in &rows {
        let envelope = 0.95 * (-r.t).exp() + a0.abs();
        assert!((r.dist - envelope).abs() <= 1e-6, "{r:?} vs {envelope}");
    }
    for w in rows.windows(2) {
        assert!(w[1].dist <= w[0].dist + g.diameter());
    }
    let mut buf = Vec::new();
    write_rate_csv(&rows, &mut buf).unwrap();
    assert!(String::from_utf8(buf).unwrap().starts_with("t,dist\n0,"));
}

#[test]
fn blow_up_reports_shift_and_point() {
    let phi = make_nrds(
        FieldSpec::<f64>::autonomous(1, |u, du| du[0] = u[0] * u[0] * u[0]).unwrap(),
        IntegratorConfig::rk4(0.01),
    )
    .unwrap();
    let g = line(16);
    let b0 = interval(&g, 1.0, 2.0);
    let err = forward_omega_limit(&phi, &b0, &g, &BasePoint::circle(0.0, 0.0), &small_cfg()).unwrap_err();
    assert!(matches!(err, crate::Error::DivergenceAt { shift, .. } if shift == 0.0), "{err:?}");
}

fn arb_set(n: usize) -> impl Strategy<Value = BoxSet<f64>> {
    proptest::collection::vec(0..n * n, 1..12).prop_map(move |cells| {
        let mut s = BoxSet::empty(Grid::cube(2, -1.0, 1.0, n).unwrap());
        for c in cells {
            s.insert_cell(c);
        }
        s
    })
}

proptest! {
    #[test]
    fn zero_distance_iff_cellwise_inclusion(a in arb_set(8), b in arb_set(8)) {
        let d = hausdorff_semidist(&a, &b).unwrap();
        prop_assert_eq!(d == 0.0, a.is_subset(&b).unwrap());
        // within one diameter exactly when A fits in the one-cell dilation of B
        prop_assert_eq!(d <= a.diameter() * (1.0 + 1e-12), a.is_subset(&b.dilate(1)).unwrap());
    }

    #[test]
    fn triangle_property(a in arb_set(8), b in arb_set(8), c in arb_set(8)) {
        let ab = hausdorff_semidist(&a, &b).unwrap();
        let bc = hausdorff_semidist(&b, &c).unwrap();
        let ac = hausdorff_semidist(&a, &c).unwrap();
        prop_assert!(ac <= ab + bc + 2.0 * a.diameter());
    }

    #[test]
    fn union_contains_both(a in arb_set(6), b in arb_set(6)) {
        let u = a.clone().union(&b).unwrap();
        prop_assert!(a.is_subset(&u).unwrap() && b.is_subset(&u).unwrap());
        prop_assert_eq!(hausdorff_semidist(&a, &u).unwrap(), 0.0);
    }
}

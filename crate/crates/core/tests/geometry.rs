use potkit::geometry::{inversion, inward_filled_hull, parallel_set};
use potkit::quadrature::stream;
use potkit::{Domain, GridDomain, Point};
use proptest::prelude::*;
use rand::Rng;

fn random_point(rng: &mut impl Rng, d: usize, half: f64) -> Point {
    let c: Vec<f64> = (0..d).map(|_| rng.gen_range(-half..half)).collect();
    Point::new(&c)
}

#[test]
fn inversion_is_an_involution_on_1000_points() {
    let mut rng = stream(0, 1);
    let mut n = 0;
    while n < 1000 {
        let d = 2 + n % 3;
        let x = random_point(&mut rng, d, 5.0);
        let o = random_point(&mut rng, d, 5.0);
        if x.dist(&o) < 1e-3 {
            continue;
        }
        let back = inversion(&inversion(&x, &o).finite().unwrap(), &o)
            .finite()
            .unwrap();
        assert!(
            back.dist(&x) <= 1e-12 * x.norm().max(1.0),
            "{x:?} -> {back:?}"
        );
        n += 1;
    }
}

#[test]
fn the_centre_goes_to_infinity() {
    let o = Point::xy(1.0, 2.0);
    assert!(inversion(&o, &o).finite().is_none());
}

fn disk_grid(h: f64, n: usize, r: f64) -> GridDomain {
    GridDomain::from_predicate(
        Point::xy(-(n as f64) * h / 2.0, -(n as f64) * h / 2.0),
        h,
        vec![n, n],
        |x| x.norm() <= r,
    )
    .unwrap()
}

/// Every masked cell of `a` lies in `b` (by centre).
fn grid_subset(a: &GridDomain, b: &GridDomain) -> bool {
    (0..a.len())
        .filter(|&i| a.is_masked(i))
        .all(|i| b.contains(&a.center(i)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn inversion_round_trip(x in prop::array::uniform3(-10.0f64..10.0), o in prop::array::uniform3(-10.0f64..10.0)) {
        let (x, o) = (Point::new(&x), Point::new(&o));
        prop_assume!(x.dist(&o) > 1e-3);
        let back = inversion(&inversion(&x, &o).finite().unwrap(), &o).finite().unwrap();
        prop_assert!(back.dist(&x) <= 1e-12 * x.norm().max(1.0));
    }

    #[test]
    fn parallel_sets_of_balls_grow(r1 in 0.01f64..2.0, dr in 0.01f64..2.0, rad in 0.1f64..3.0) {
        let c = Point::xy(0.3, -0.2);
        for base in [Domain::ball(c, rad), Domain::closed_ball(c, rad), Domain::annulus(c, rad, rad + 1.0)] {
            let a = parallel_set(&base, r1).unwrap();
            let b = parallel_set(&base, r1 + dr).unwrap();
            let mut rng = stream(7, (r1 * 1e6) as u64);
            for _ in 0..200 {
                let x = random_point(&mut rng, 2, rad + 4.0) + c;
                if base.contains(&x) {
                    prop_assert!(a.contains(&x));
                }
                if a.contains(&x) {
                    prop_assert!(b.contains(&x), "{x:?} in S^{r1} but not in S^{}", r1 + dr);
                }
            }
        }
    }

    #[test]
    fn parallel_sets_of_grids_grow(k1 in 1usize..4, dk in 1usize..3, rad in 0.05f64..0.3) {
        let h = 0.05;
        let g = disk_grid(h, 16, rad);
        let a = parallel_set(&Domain::grid(g.clone()), k1 as f64 * h).unwrap();
        let b = parallel_set(&Domain::grid(g.clone()), (k1 + dk) as f64 * h).unwrap();
        match (a, b) {
            (Domain::Grid { grid: a }, Domain::Grid { grid: b }) => {
                prop_assert!(grid_subset(&g, &a));
                prop_assert!(grid_subset(&a, &b));
                prop_assert!(a.masked_count() < b.masked_count());
            }
            other => prop_assert!(false, "expected grids, got {other:?}"),
        }
    }

    #[test]
    fn hull_is_idempotent_and_monotone(seed in 0u64..1000, inner in 4usize..8, outer in 9usize..12) {
        // K: a ring with random gaps plus random blobs, inside nested boxes O ⊆ O'.
        let n = 32;
        let h = 1.0 / n as f64;
        let origin = Point::xy(-0.5, -0.5);
        let mut rng = stream(seed, 0);
        let gaps: Vec<f64> = (0..2).map(|_| rng.gen_range(0.0..std::f64::consts::TAU)).collect();
        let blobs: Vec<Point> = (0..3).map(|_| random_point(&mut rng, 2, 0.2)).collect();
        let open_gap = rng.gen_bool(0.5);
        let k = GridDomain::from_predicate(origin, h, vec![n, n], |x| {
            let r = x.norm();
            let theta = x[1].atan2(x[0]).rem_euclid(std::f64::consts::TAU);
            let on_ring = (r - 0.2).abs() < 0.03 && !(open_gap && gaps.iter().any(|g| (theta - g).abs() < 0.3));
            on_ring || blobs.iter().any(|b| x.dist(b) < 0.04)
        })
        .unwrap();
        let boxed = |m: usize| {
            GridDomain::from_predicate(origin, h, vec![n, n], |x| x[0].abs().max(x[1].abs()) < m as f64 / 24.0).unwrap()
        };
        let (o1, o2) = (boxed(inner.max(7)), boxed(outer));
        let hull1 = inward_filled_hull(&k, &o1).unwrap();
        let again = inward_filled_hull(&hull1, &o1).unwrap();
        prop_assert_eq!(again.mask(), hull1.mask());
        let hull2 = inward_filled_hull(&k, &o2).unwrap();
        prop_assert!((0..k.len()).all(|i| !hull1.is_masked(i) || hull2.is_masked(i)));
        prop_assert!((0..k.len()).all(|i| !k.is_masked(i) || hull1.is_masked(i)));
    }
}

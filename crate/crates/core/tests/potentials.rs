use potkit::fields::{check_harmonic, random_probes, riesz_measure_from_samples};
use potkit::potentials::potential;
use potkit::quadrature::stream;
use potkit::{Component, Domain, GridDomain, KernelConfig, Measure, Point};
use proptest::prelude::*;
use rand::Rng;

fn cfg2() -> KernelConfig {
    KernelConfig::new(2).unwrap()
}

fn point2() -> impl Strategy<Value = Point> {
    (-1.0f64..1.0, -1.0f64..1.0).prop_map(|(x, y)| Point::xy(x, y))
}

fn positive_measure() -> impl Strategy<Value = Measure> {
    let comp = prop_oneof![
        (point2(), 0.1f64..2.0).prop_map(|(point, weight)| Component::Atom { point, weight }),
        (point2(), 0.05f64..0.5, 0.1f64..2.0).prop_map(|(center, radius, total)| {
            Component::SphereUniform {
                center,
                radius,
                total,
            }
        }),
        (point2(), 0.05f64..0.5, 0.1f64..2.0).prop_map(|(center, radius, total)| {
            Component::BallUniform {
                center,
                radius,
                total,
            }
        }),
    ];
    prop::collection::vec(comp, 1..4).prop_map(|cs| Measure::new(2, cs).unwrap())
}

fn probes(seed: u64, n: usize, half: f64) -> Vec<Point> {
    let mut rng = stream(seed, 0);
    (0..n)
        .map(|_| Point::xy(rng.gen_range(-half..half), rng.gen_range(-half..half)))
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn potentials_are_linear(mu in positive_measure(), theta in positive_measure(), a in 0.1f64..3.0, b in 0.1f64..3.0, seed in 0u64..1000) {
        let combo = potential(&mu.scale(a).plus(&theta.scale(b)), cfg2()).unwrap();
        let (pm, pt) = (potential(&mu, cfg2()).unwrap(), potential(&theta, cfg2()).unwrap());
        for y in probes(seed, 200, 2.0) {
            let (lhs, rhs) = (combo.eval(&y), pm.eval(&y) * a + pt.eval(&y) * b);
            if let (Some(l), Some(r)) = (lhs.finite(), rhs.finite()) {
                prop_assert!((l - r).abs() <= 1e-9 * (1.0 + r.abs()), "{y:?}: {l} vs {r}");
            } else {
                prop_assert_eq!(lhs, rhs);
            }
        }
    }

    #[test]
    fn potentials_are_harmonic_off_the_support(mu in positive_measure(), seed in 0u64..1000) {
        let v = potential(&mu, cfg2()).unwrap().field();
        let dom = Domain::ball(Point::xy(0.0, 0.0), 4.0);
        let all = random_probes(&dom, None, 200, 0.02, &[], seed).unwrap();
        let clear: Vec<_> = all.into_iter().filter(|p| mu.distance_to(&p.x) > 2.0 * p.r).collect();
        prop_assume!(!clear.is_empty());
        let rep = check_harmonic(&v, &clear, 1e-7).unwrap();
        prop_assert!(rep.pass, "{:?}", rep.worst());
    }

    #[test]
    fn mutual_energies_are_symmetric(mu in positive_measure(), c in point2(), r in 0.1f64..0.6, w in 0.1f64..2.0) {
        // ϑ lives on a sphere and an atom well away from supp μ.
        let far = Point::xy(4.0, 0.0) + c;
        let theta = Measure::new(2, vec![
            Component::SphereUniform { center: far, radius: r, total: w },
            Component::Atom { point: far + Point::xy(0.0, 1.5), weight: 1.0 },
        ]).unwrap();
        prop_assume!(mu.distance_to(&far) > r + 0.5);
        let lhs = mu.integrate(&potential(&theta, cfg2()).unwrap().field()).to_f64();
        let rhs = theta.integrate(&potential(&mu, cfg2()).unwrap().field()).to_f64();
        prop_assert!((lhs - rhs).abs() <= 1e-7, "{lhs} vs {rhs}");
    }
}

#[test]
fn riesz_measure_of_a_potential_recovers_its_mass() {
    // A smooth bump stored as cell masses on a coarse lattice.
    let coarse = GridDomain::centered_box(Point::xy(0.03, -0.02), 0.4, 16).unwrap();
    let masses: Vec<f64> = (0..coarse.len())
        .map(|i| {
            let x = coarse.center(i);
            (1.0 - x.norm_sq() / 0.16).max(0.0).powi(2) * coarse.cell_volume()
        })
        .collect();
    let mu = Measure::single(Component::GridDensity {
        grid: coarse,
        masses,
    });
    let total = mu.total_mass();
    let pt = potential(&mu, cfg2()).unwrap();
    let h = 0.02;
    let n = 80;
    let grid = GridDomain::centered_box(Point::xy(0.0, 0.0), n as f64 * h / 2.0, n).unwrap();
    assert!((grid.spacing() - h).abs() < 1e-12);
    let values: Vec<_> = (0..grid.len()).map(|i| pt.eval(&grid.center(i))).collect();
    let recovered: f64 = riesz_measure_from_samples(&grid, &values)
        .unwrap()
        .masses()
        .iter()
        .sum();
    assert!(
        (recovered / total - 1.0).abs() <= 0.03,
        "recovered {recovered} of {total}"
    );
}

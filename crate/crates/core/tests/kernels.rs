use potkit::fields::{check_harmonic, check_subharmonic, random_probes};
use potkit::kernels::{k_eval, riesz_kernel, riesz_normalizer, sphere_area};
use potkit::{Domain, ExtReal, KernelConfig, Point, ScalarField};
use proptest::prelude::*;

#[test]
fn normalizer_times_sphere_area_is_one() {
    for d in 1..=8usize {
        let m = (d as f64 - 2.0).max(1.0);
        let p = sphere_area(d) * riesz_normalizer(d) * m;
        assert!((p - 1.0).abs() <= 1e-14, "d = {d}: {p}");
    }
}

#[test]
fn diagonal_values() {
    let x = Point::xyz(1.0, 2.0, 3.0);
    assert_eq!(
        riesz_kernel(KernelConfig::new(3).unwrap(), &x, &x),
        ExtReal::NegInf
    );
    let y = Point::new(&[0.25]);
    assert_eq!(
        riesz_kernel(KernelConfig::new(1).unwrap(), &y, &y),
        ExtReal::Finite(0.0)
    );
}

fn kernel_field(d: usize, y: Point) -> ScalarField {
    let cfg = KernelConfig::new(d).unwrap();
    ScalarField::new(Domain::Space { dim: d }, move |x| cfg.kernel(x, &y))
}

#[test]
fn kernel_is_subharmonic_and_harmonic_off_the_pole() {
    for d in [2usize, 3] {
        let y = Point::unit(d, 0) * 0.3;
        let v = kernel_field(d, y);
        let dom = Domain::ball(Point::origin(d), 2.0);
        let window = dom.bounding_box();
        let probes = random_probes(&dom, window, 200, 0.05, &[], 11).unwrap();
        let rep = check_subharmonic(&v, &probes).unwrap();
        assert!(rep.pass, "d = {d}: {:?}", rep.worst());
        // Probes whose sphere stays clear of the pole.
        let clear: Vec<_> = probes
            .into_iter()
            .filter(|p| p.x.dist(&y) > 1.5 * p.r)
            .collect();
        assert!(clear.len() > 50);
        let rep = check_harmonic(&v, &clear, 1e-8).unwrap();
        assert!(rep.pass, "d = {d}: {:?}", rep.worst());
    }
}

proptest! {
    #[test]
    fn k_is_increasing(q in prop::sample::select(vec![-1.0f64, 0.0, 1.0, 2.0]), t1 in 1e-3f64..50.0, f in 1.001f64..10.0) {
        let t2 = t1 * f;
        prop_assert!(k_eval(q, t1).unwrap() < k_eval(q, t2).unwrap());
    }

    #[test]
    fn kernel_is_exactly_symmetric(d in 1usize..6, a in prop::collection::vec(-5.0f64..5.0, 5), b in prop::collection::vec(-5.0f64..5.0, 5)) {
        let cfg = KernelConfig::new(d).unwrap();
        let (x, y) = (Point::new(&a[..d]), Point::new(&b[..d]));
        prop_assert_eq!(riesz_kernel(cfg, &x, &y), riesz_kernel(cfg, &y, &x));
    }
}

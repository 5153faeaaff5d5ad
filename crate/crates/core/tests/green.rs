use potkit::green::{green_ball, harmonic_measure, mg_constant, GreenModel};
use potkit::potentials::{difference_potential, potential};
use potkit::quadrature::stream;
use potkit::{Domain, Measure, Point};
use rand::Rng;

fn random_in_ball(rng: &mut impl Rng, c: &Point, r: f64) -> Point {
    loop {
        let mut x = *c;
        for k in 0..c.dim() {
            x[k] += rng.gen_range(-r..r);
        }
        if x.dist(c) < r {
            return x;
        }
    }
}

fn models() -> Vec<GreenModel> {
    vec![
        green_ball(Point::xy(0.0, 0.0), 1.0, Point::xy(0.0, 0.0)).unwrap(),
        green_ball(Point::xy(0.5, -0.3), 0.8, Point::xy(0.7, -0.2)).unwrap(),
        green_ball(Point::xyz(0.1, 0.2, -0.1), 1.2, Point::xyz(0.3, 0.2, 0.0)).unwrap(),
    ]
}

#[test]
fn green_functions_are_symmetric() {
    let mut rng = stream(1, 0);
    for g in models() {
        for _ in 0..100 {
            let x = random_in_ball(&mut rng, &g.center, g.radius);
            let o = random_in_ball(&mut rng, &g.center, g.radius);
            let a = g.with_pole(o).unwrap().eval(&x).to_f64();
            let b = g.with_pole(x).unwrap().eval(&o).to_f64();
            assert!(
                (a - b).abs() <= 1e-9 * (1.0 + a.abs()),
                "{x:?}, {o:?}: {a} vs {b}"
            );
        }
    }
}

#[test]
fn green_function_dominates_its_constant_on_the_core() {
    let mut rng = stream(2, 0);
    for g in models() {
        let c = g.pole + Point::unit(g.dim(), 1) * 0.05;
        let s_o = Domain::closed_ball(c, 0.2);
        let m_g = mg_constant(&g, &s_o).unwrap();
        assert!(m_g > 0.0);
        for _ in 0..500 {
            let x = random_in_ball(&mut rng, &c, 0.2);
            assert!(g.eval(&x).to_f64() - m_g >= -1e-9, "{x:?}");
        }
    }
}

#[test]
fn harmonic_measure_potential_matches_the_green_function() {
    let mut rng = stream(3, 0);
    for g in models() {
        let x = g.pole;
        let omega = harmonic_measure(&g, &x).unwrap();
        let delta = Measure::dirac(x);
        let cfg = g.kernel();
        let (p_omega, p_delta) = (
            potential(&omega, cfg).unwrap(),
            potential(&delta, cfg).unwrap(),
        );
        let diff = difference_potential(&omega, &delta, cfg).unwrap();
        let mut inside = 0;
        let mut n = 0;
        while n < 200 {
            let y = random_in_ball(&mut rng, &g.center, 2.0 * g.radius);
            if y.dist(&x) < 1e-6 || (y.dist(&g.center) - g.radius).abs() < 1e-6 {
                continue;
            }
            n += 1;
            let (a, b) = (p_omega.eval(&y).to_f64(), p_delta.eval(&y).to_f64());
            assert!(a >= b - 1e-7, "{y:?}: {a} < {b}");
            if y.dist(&g.center) > g.radius {
                assert!((a - b).abs() <= 1e-7, "{y:?}: {a} vs {b}");
            } else {
                inside += 1;
            }
            let gy = g.eval(&y).to_f64();
            assert!(
                (diff.eval(&y).to_f64() - gy).abs() <= 1e-7 * (1.0 + gy.abs()),
                "{y:?}"
            );
        }
        assert!(inside > 10);
    }
}

use potkit::duality::*;
use potkit::green::green_ball;
use potkit::potentials::probe_points;
use potkit::{Domain, ExtReal, GridDomain, Measure, Point, ScalarField};

fn o() -> Point {
    Point::xy(0.0, 0.0)
}

/// Worst probe error relative to `∫|f| d|μ|`, and the total-mass error.
fn round_trip_error(mu: &Measure, x: &Point, class: MeasureClass, h: f64) -> (f64, f64) {
    let cert = certify(mu, x, class).unwrap();
    assert!(
        cert.verdict.pass,
        "{class:?} certification failed: {}",
        cert.verdict.worst_margin
    );
    let n = (2.4 / h).round() as usize;
    let grid = GridDomain::centered_box(o(), 1.2, n).unwrap();
    let rt = round_trip(mu, x, &cert, &grid).unwrap();
    (rt.probe_error, rt.mass_error)
}

fn jensen_samples() -> Vec<(Point, Measure)> {
    jensen_examples()
}

fn as_samples() -> Vec<(Point, Measure)> {
    arens_singer_examples()
}

#[test]
fn round_trip_within_two_percent_and_refines() {
    let cases = jensen_samples()
        .into_iter()
        .map(|c| (c, MeasureClass::Jensen))
        .chain(
            as_samples()
                .into_iter()
                .map(|c| (c, MeasureClass::ArensSinger)),
        );
    for (k, ((x, mu), class)) in cases.enumerate() {
        let (e2, m2) = round_trip_error(&mu, &x, class, 0.02);
        let (e1, _) = round_trip_error(&mu, &x, class, 0.01);
        assert!(e2 <= 0.02, "case {k}: probe error {e2:.4} at h = 0.02");
        assert!(m2 <= 0.03, "case {k}: mass error {m2:.4} at h = 0.02");
        assert!(
            e1 < e2 || e1 < 1e-6,
            "case {k}: no refinement gain ({e2:.2e} -> {e1:.2e})"
        );
    }
}

#[test]
fn lyons_measures_are_not_jensen() {
    for (x, mu) in as_samples() {
        assert!(
            certify(&mu, &x, MeasureClass::ArensSinger)
                .unwrap()
                .verdict
                .pass
        );
        assert!(!certify(&mu, &x, MeasureClass::Jensen).unwrap().verdict.pass);
    }
}

#[test]
fn uncertified_measure_is_rejected() {
    let (x, mu) = as_samples().remove(0);
    let cert = certify(&mu, &x, MeasureClass::Jensen).unwrap();
    assert!(to_potential(&mu, &x, &cert).is_err());
    // A measure that does not sweep δ_x at all.
    let bad = Measure::dirac(Point::xy(0.3, 0.0));
    let cert = certify(&bad, &o(), MeasureClass::ArensSinger).unwrap();
    assert!(!cert.verdict.pass);
    assert!(to_potential(&bad, &o(), &cert).is_err());
}

#[test]
fn harmonic_measure_potential_is_green_function() {
    let g = green_ball(o(), 1.0, o()).unwrap();
    let om = g.harmonic_measure(&o()).unwrap();
    let cert = certify(&om, &o(), MeasureClass::Jensen).unwrap();
    let v = to_potential(&om, &o(), &cert).unwrap();
    assert_eq!(v.coefficient, 1.0);
    for p in [
        Point::xy(0.5, 0.0),
        Point::xy(-0.1, 0.7),
        Point::xy(1.3, 0.2),
    ] {
        let want = (1.0 / p.norm()).ln().max(0.0);
        assert!((v.eval(&p).to_f64() - want).abs() < 1e-12);
    }
}

#[test]
fn green_function_inverse_is_boundary_measure() {
    let g = green_ball(o(), 1.0, o()).unwrap();
    let v = ASPotential::from_field(g.field(), o(), Domain::closed_ball(o(), 1.0), true).unwrap();
    assert!((v.coefficient - 1.0).abs() < 1e-9);
    let circle = Measure::sphere_uniform(o(), 1.0, 1.0);
    let mut errs = Vec::new();
    for n in [120, 240] {
        let rec = from_potential(&v, &GridDomain::centered_box(o(), 1.2, n).unwrap()).unwrap();
        assert!(rec.pole_atom.abs() < 1e-9);
        errs.push(
            (rec.measure.integrate_fn(|p| p[0] * p[0]).to_f64()
                - circle.integrate_fn(|p| p[0] * p[0]).to_f64())
            .abs(),
        );
        assert!((rec.measure.total_mass() - 1.0).abs() < 0.03);
    }
    assert!(errs[1] < errs[0]);
    // Half the Green function: half the boundary, half a unit atom.
    let half = v.scaled(0.5);
    let rec = from_potential(&half, &GridDomain::centered_box(o(), 1.2, 240).unwrap()).unwrap();
    assert!((rec.pole_atom - 0.5).abs() < 1e-9);
    let boundary: f64 = rec.measure.total_mass() - rec.pole_atom - rec.window_mass;
    assert!((boundary - 0.5).abs() < 0.015, "{boundary}");
}

#[test]
fn zero_potential_inverts_to_the_dirac() {
    let zero = ASPotential::from_field(
        ScalarField::on_space(2, |_| 0.0),
        o(),
        Domain::closed_ball(o(), 0.0),
        true,
    )
    .unwrap();
    let rec = from_potential(&zero, &GridDomain::centered_box(o(), 1.0, 50).unwrap()).unwrap();
    assert_eq!(rec.coefficient, 0.0);
    assert!((rec.measure.total_mass() - 1.0).abs() < 1e-12);
    assert!((rec.measure.mass_on_points(&[o()], 0.0) - 1.0).abs() < 1e-12);
}

#[test]
fn jensen_potentials_are_nonnegative_and_vanish_off_the_hull() {
    for (x, mu) in jensen_samples() {
        let cert = certify(&mu, &x, MeasureClass::Jensen).unwrap();
        let v = to_potential(&mu, &x, &cert).unwrap();
        for p in probe_points(&Domain::closed_ball(o(), 1.6), 41).unwrap() {
            if p.dist(&x) < 1e-9 {
                continue;
            }
            let val = v.eval(&p).to_f64();
            assert!(val >= -1e-9, "{val} at {p:?}");
            if p.norm() > 1.0 + 1e-6 {
                assert!(val.abs() <= 1e-8, "{val} at {p:?}");
            }
        }
    }
}

#[test]
fn all_pj_presets_hold() {
    let presets = pj_presets();
    assert_eq!(presets.len(), 12);
    for p in presets {
        let r = verify_poisson_jensen(&p.theta, &p.mu, &p.u, 1.0).unwrap();
        assert!(
            r.pass,
            "{}: relative error {:.3e} {:?}",
            p.name, r.relative_error, r.diagnostics
        );
    }
}

#[test]
fn two_zero_instance_matches_green_sums() {
    let p = pj_presets()
        .into_iter()
        .find(|p| p.name == "two-zeros")
        .unwrap();
    let r = verify_poisson_jensen(&p.theta, &p.mu, &p.u, 1.0).unwrap();
    // ln|0 − 1/4| = ∫ ln|z² − 1/4| dω − g(½, 0) − g(−½, 0) = 0 − 2 ln 2.
    let (a, b) = r.rearranged.unwrap();
    assert!((a - 0.25f64.ln()).abs() < 1e-12);
    assert!((b + 2.0 * 2f64.ln()).abs() < 1e-6);
}

#[test]
fn harmonic_u_reduces_to_equal_integrals() {
    let p = pj_presets()
        .into_iter()
        .find(|p| p.name == "harmonic-u")
        .unwrap();
    let r = verify_poisson_jensen(&p.theta, &p.mu, &p.u, 1.0).unwrap();
    assert_eq!(r.pt_mu, ExtReal::Finite(0.0));
    assert_eq!(r.pt_theta, ExtReal::Finite(0.0));
    assert!((r.u_theta.to_f64() - r.u_mu.to_f64()).abs() < 1e-9);
}

#[test]
fn non_balayage_pair_is_refused() {
    let u = DeltaSubharmonic::kernel_sum(2, &[(Point::xy(0.5, 0.0), 1.0)]);
    assert!(verify_poisson_jensen(
        &Measure::dirac(o()),
        &Measure::dirac(Point::xy(0.2, 0.0)),
        &u,
        1.0
    )
    .is_err());
}

#[test]
fn green_bound_at_500_probes() {
    let g = green_ball(o(), 1.0, o()).unwrap();
    let s_o = Domain::closed_ball(o(), 0.1);
    // V = g_D itself.
    let om = g.harmonic_measure(&o()).unwrap();
    let v = to_potential(
        &om,
        &o(),
        &certify(&om, &o(), MeasureClass::Jensen).unwrap(),
    )
    .unwrap();
    let rep = phragmen_lindelof_bound(&v, &g, Some((&s_o, 0.05)), 0).unwrap();
    assert!(rep.pass && rep.max_excess.abs() < 1e-9, "{rep:?}");
    // Harmonic measure of a smaller disk: V = ln(0.9/|x|)⁺.
    let inner = green_ball(o(), 0.9, o())
        .unwrap()
        .harmonic_measure(&o())
        .unwrap();
    let v = to_potential(
        &inner,
        &o(),
        &certify(&inner, &o(), MeasureClass::Jensen).unwrap(),
    )
    .unwrap();
    let rep = phragmen_lindelof_bound(&v, &g, Some((&s_o, 0.05)), 1).unwrap();
    assert!(rep.pass);
    assert!((rep.max_excess - 0.9f64.ln()).abs() < 0.05 || rep.max_excess < 0.0);
    let b2 = rep.lower_bound.unwrap();
    assert!((b2 - (0.9f64 - 0.25).ln() + 0.25f64.ln()).abs() < 1e-12);
    // Arens–Singer potentials obey both bounds too.
    for (x, mu) in as_samples() {
        if x != o() {
            continue;
        }
        let v = to_potential(
            &mu,
            &x,
            &certify(&mu, &x, MeasureClass::ArensSinger).unwrap(),
        )
        .unwrap();
        let rep = phragmen_lindelof_bound(&v, &g, Some((&s_o, 0.05)), 2).unwrap();
        assert!(rep.pass, "{rep:?}");
    }
}

use num_complex::Complex64;
use potkit::balayage::{AffineOptions, ClassParams, TestFn};
use potkit::green::green_ball;
use potkit::zeros::*;
use potkit::{Domain, GridDomain, Measure, Point};
use proptest::prelude::*;
use std::sync::OnceLock;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn o() -> Point {
    Point::xy(0.0, 0.0)
}

fn quarter() -> HoloFunction {
    HoloFunction::polynomial(vec![c(-0.25, 0.0), c(0.0, 0.0), c(1.0, 0.0)])
}

fn params(rho: f64, r: f64, b_minus: f64, b_plus: f64) -> ClassParams {
    ClassParams {
        s_o: Domain::closed_ball(o(), rho),
        r,
        b_minus,
        b_plus,
        green: green_ball(o(), 1.0, o()).unwrap(),
    }
}

fn dyadic_zeros(n: usize) -> Vec<Complex64> {
    (1..=n)
        .map(|k| c(1.0 - 0.5f64.powi(k as i32), 0.0))
        .collect()
}

fn blaschke_params() -> ClassParams {
    params(0.25, 0.2, -1.0, 4f64.ln())
}

fn blaschke_families() -> &'static HolFamilies {
    static F: OnceLock<HolFamilies> = OnceLock::new();
    F.get_or_init(|| HolFamilies::build(&blaschke_params(), 24).unwrap())
}

fn quarter_families() -> &'static HolFamilies {
    static F: OnceLock<HolFamilies> = OnceLock::new();
    F.get_or_init(|| HolFamilies::build(&params(0.05, 0.3, -1.0, 1.0), 24).unwrap())
}

#[test]
fn counting_measures_of_simple_polynomials() {
    let disk = Domain::ball(o(), 1.0);
    let m = counting_measure(&quarter(), &disk).unwrap();
    assert_eq!(m.components().len(), 2);
    assert!((m.total_mass() - 2.0).abs() < 1e-12);
    assert!(
        (m.mass_on_points(&[Point::xy(0.5, 0.0), Point::xy(-0.5, 0.0)], 1e-9) - 2.0).abs() < 1e-12
    );
    let sq = HoloFunction::from_roots(&[ZeroAtom::new(c(0.3, 0.0), 2)]);
    let m = counting_measure(&sq, &disk).unwrap();
    assert_eq!(m.components().len(), 1);
    assert!((m.total_mass() - 2.0).abs() < 1e-12);
    let one = HoloFunction::polynomial(vec![c(1.0, 0.0)]);
    assert_eq!(counting_measure(&one, &disk).unwrap().total_mass(), 0.0);
}

#[test]
fn counting_region_must_sit_inside_the_domain() {
    let b = HoloFunction::blaschke(dyadic_zeros(10)).unwrap();
    assert!(counting_measure(&b, &Domain::closed_ball(o(), 1.0)).is_err());
    assert!(
        (counting_measure(&b, &Domain::closed_ball(o(), 0.9))
            .unwrap()
            .total_mass()
            - 3.0)
            .abs()
            < 1e-12
    );
}

#[test]
fn explicit_zero_sets_must_vanish_where_declared() {
    let modulus: Modulus = std::sync::Arc::new(|z: Complex64| (z - c(0.2, 0.1)).norm());
    let ok = HoloFunction::explicit(
        vec![ZeroAtom::new(c(0.2, 0.1), 1)],
        modulus.clone(),
        Domain::ball(o(), 1.0),
    );
    assert!(ok.is_ok());
    let bad = HoloFunction::explicit(
        vec![ZeroAtom::new(c(0.3, 0.1), 1)],
        modulus,
        Domain::ball(o(), 1.0),
    );
    assert!(bad.is_err());
}

#[test]
fn poincare_lelong_window_masses() {
    let grid = GridDomain::centered_box(o(), 1.2, 240).unwrap();
    let simple = HoloFunction::polynomial(vec![c(-0.5, 0.25), c(1.0, 0.0)]);
    let rep = poincare_lelong_check(&simple, &grid).unwrap();
    assert!(rep.pass, "{rep:?}");
    assert!((rep.windows[0].window_mass - 1.0).abs() <= 0.05);
    let sq = HoloFunction::from_roots(&[ZeroAtom::new(c(0.3, 0.0), 2)]);
    let rep = poincare_lelong_check(&sq, &grid).unwrap();
    assert!(rep.pass);
    assert!((rep.windows[0].window_mass - 2.0).abs() <= 0.1);
    let one = HoloFunction::polynomial(vec![c(1.0, 0.0)]);
    let rep = poincare_lelong_check(&one, &grid).unwrap();
    assert!(rep.total_mass.abs() <= 1e-6 && rep.pass);
}

#[test]
fn zero_on_the_lattice_requests_a_new_grid() {
    let grid = GridDomain::centered_box(o(), 1.2, 240).unwrap();
    // Cell centres sit at odd multiples of h/2 = 0.005.
    let f = HoloFunction::polynomial(vec![c(-0.505, -0.105), c(1.0, 0.0)]);
    let err = poincare_lelong_check(&f, &grid).unwrap_err();
    assert!(err.to_string().contains("re-grid"));
}

#[test]
fn poincare_lelong_error_at_least_halves() {
    let grid = GridDomain::centered_box(o(), 1.2, 120).unwrap();
    let f = HoloFunction::from_roots(&[
        ZeroAtom::new(c(0.5, -0.25), 1),
        ZeroAtom::new(c(-0.4162, 0.2291), 1),
        ZeroAtom::new(c(0.3, 0.6), 2),
    ]);
    for rec in poincare_lelong_refinement(&f, &grid).unwrap() {
        assert!(rec.pass, "{rec:?}");
        assert!(rec.fine_error < rec.coarse_error);
    }
}

#[test]
fn quarter_polynomial_passes_all_three_statements() {
    let fam = quarter_families();
    let m = GrowthMajorant::constant(1.25f64.ln());
    let rep = check_thm_hol(&quarter(), &m, fam, &HolOptions::default()).unwrap();
    assert!(rep.pass, "{rep:?}");
    // With μ_M = 0 the constant is the largest sum of v over the two zeros.
    let ziii = &rep.variants[2];
    let direct = fam
        .ziii
        .members
        .iter()
        .map(|mem| {
            mem.f.eval(&Point::xy(0.5, 0.0)).to_f64() + mem.f.eval(&Point::xy(-0.5, 0.0)).to_f64()
        })
        .fold(f64::NEG_INFINITY, f64::max);
    assert!((ziii.constant() - direct).abs() < 1e-12);
    assert!(ziii.constant() <= 2.0 * fam.params.b_plus + 1e-12);
    assert!(rep.implication.holds);
    assert_eq!(rep.implication.layer_mass, 0.0);
}

#[test]
fn blaschke_green_member_sums_log_moduli() {
    let fam = blaschke_families();
    let zeros = dyadic_zeros(10);
    let b = HoloFunction::blaschke(zeros.clone()).unwrap();
    let rep = check_thm_hol(
        &b,
        &GrowthMajorant::constant(0.0),
        fam,
        &HolOptions::default(),
    )
    .unwrap();
    assert!(rep.pass, "{rep:?}");
    let want: f64 = zeros.iter().map(|z| -z.norm().ln()).sum();
    assert!((want - 1.2408).abs() < 1e-3);
    let green = rep.variants[1]
        .verdict
        .margins
        .iter()
        .find(|m| m.label.starts_with("green(c=0.000"))
        .expect("Green member present");
    assert!(
        (green.lhs.to_f64() - want).abs() < 1e-9,
        "{} vs {want}",
        green.lhs
    );
    assert!(rep.variants[1].constant() >= want - 1e-9);
}

#[test]
fn scaled_family_exposes_an_infinite_constant() {
    let fam = quarter_families();
    let m = GrowthMajorant::constant(1.25f64.ln());
    let opts = HolOptions {
        affine: AffineOptions {
            probe_scaling: true,
            ..AffineOptions::default()
        },
        ..HolOptions::default()
    };
    let rep = check_thm_hol(&quarter(), &m, fam, &opts).unwrap();
    assert!(!rep.pass);
    assert!(rep.variants.iter().all(|v| v.verdict.divergent));
}

#[test]
fn majorant_violation_names_a_witness() {
    let err = check_thm_hol(
        &quarter(),
        &GrowthMajorant::constant(0.0),
        quarter_families(),
        &HolOptions::default(),
    )
    .unwrap_err();
    let msg = err.to_string();
    assert!(msg.contains("|f| > exp M at ("), "{msg}");
}

fn circle_majorant() -> GrowthMajorant {
    // M = ln(5/4) + ln max(|z|, 0.3) dominates ln|z² − ¼| on the disk.
    GrowthMajorant::from_riesz(
        Measure::sphere_uniform(o(), 0.3, 1.0),
        Measure::zero(2),
        1.25f64.ln(),
    )
    .unwrap()
}

#[test]
fn implication_bound_with_mass_in_the_layer() {
    let fam = HolFamilies::build(&params(0.05, 0.2, -1.0, 1.0), 24).unwrap();
    let m = circle_majorant();
    let rep = check_thm_hol(&quarter(), &m, &fam, &HolOptions::default()).unwrap();
    assert!(rep.pass, "{rep:?}");
    let imp = &rep.implication;
    assert!((imp.layer_mass - 1.0).abs() < 1e-12);
    assert!(imp.c2 <= imp.bound);
    // With μ_M on the layer the two constants differ.
    assert!(imp.c1 > imp.c2);
}

#[test]
fn criterium_forward_for_blaschke_and_polynomial() {
    let zeros = dyadic_zeros(10);
    let b = HoloFunction::blaschke(zeros.clone()).unwrap();
    let z: Vec<ZeroAtom> = zeros.iter().map(|z| ZeroAtom::new(*z, 1)).collect();
    let rep = check_criterium3_forward(
        &z,
        &b,
        &GrowthMajorant::constant(0.0),
        blaschke_families(),
        16,
        &HolOptions::default(),
    )
    .unwrap();
    assert!(rep.pass, "{rep:?}");
    assert!(!rep.growth.divergent);
    assert!((rep.blaschke_sum - (1.0 - 0.5f64.powi(10))).abs() < 1e-12);
    let zq = vec![
        ZeroAtom::new(c(0.5, 0.0), 1),
        ZeroAtom::new(c(-0.5, 0.0), 1),
    ];
    let rep = check_criterium3_forward(
        &zq,
        &quarter(),
        &GrowthMajorant::constant(1.25f64.ln()),
        quarter_families(),
        16,
        &HolOptions::default(),
    )
    .unwrap();
    assert!(rep.pass, "{rep:?}");
}

#[test]
fn criterium_rejects_a_mismatched_zero_set() {
    let b = HoloFunction::blaschke(dyadic_zeros(10)).unwrap();
    let z: Vec<ZeroAtom> = dyadic_zeros(9)
        .iter()
        .map(|z| ZeroAtom::new(*z, 1))
        .collect();
    assert!(check_criterium3_forward(
        &z,
        &b,
        &GrowthMajorant::constant(0.0),
        blaschke_families(),
        8,
        &HolOptions::default()
    )
    .is_err());
}

#[test]
fn divergent_blaschke_condition_is_flagged() {
    let zeros: Vec<Complex64> = (1..=200).map(|k| c(1.0 - 1.0 / k as f64, 0.0)).collect();
    let b = HoloFunction::blaschke_truncated(zeros.clone(), 200).unwrap();
    let z: Vec<ZeroAtom> = zeros.iter().map(|z| ZeroAtom::new(*z, 1)).collect();
    let rep = check_criterium3_forward(
        &z,
        &b,
        &GrowthMajorant::constant(0.0),
        blaschke_families(),
        8,
        &HolOptions::default(),
    )
    .unwrap();
    assert!(rep.growth.divergent, "{:?}", rep.growth);
    assert!(!rep.pass);
    // Σ (1 − |z_k|) is the harmonic series.
    let h: f64 = (1..=200).map(|k| 1.0 / k as f64).sum();
    assert!((rep.blaschke_sum - h).abs() < 1e-9);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn counting_mass_equals_degree(roots in prop::collection::vec((-0.9f64..0.9, -0.9f64..0.9, 1u32..3), 1..5)) {
        let atoms: Vec<ZeroAtom> = roots.iter().map(|(a, b, m)| ZeroAtom::new(c(*a, *b), *m)).collect();
        let f = HoloFunction::from_roots(&atoms);
        let degree: u32 = atoms.iter().map(|a| a.multiplicity).sum();
        let mass = counting_measure(&f, &Domain::closed_ball(o(), 2.0)).unwrap().total_mass();
        prop_assert!((mass - degree as f64).abs() < 1e-12, "mass {} for degree {}", mass, degree);
    }

    #[test]
    fn subdivisor_lowers_every_positive_sum(mask in prop::collection::vec(any::<bool>(), 10)) {
        let zeros = dyadic_zeros(10);
        let all: Vec<ZeroAtom> = zeros.iter().map(|z| ZeroAtom::new(*z, 1)).collect();
        let sub: Vec<ZeroAtom> = all.iter().zip(&mask).filter(|(_, k)| **k).map(|(a, _)| *a).collect();
        let b = HoloFunction::blaschke(zeros).unwrap();
        let fam = blaschke_families();
        let opts = HolOptions { subdivisor: Some(sub), majorant_samples: 500, ..HolOptions::default() };
        let with_sub = check_thm_hol(&b, &GrowthMajorant::constant(0.0), fam, &opts).unwrap();
        let full = check_thm_hol(&b, &GrowthMajorant::constant(0.0), fam, &HolOptions { majorant_samples: 500, ..HolOptions::default() }).unwrap();
        for (s, f) in with_sub.variants[2].verdict.margins.iter().zip(&full.variants[2].verdict.margins) {
            prop_assert!(s.lhs.to_f64() <= f.lhs.to_f64());
        }
    }

    #[test]
    fn zi_implies_zii_bound(rho in 0.03f64..0.2, r in 0.05f64..0.2, bm in -2.0f64..-0.2, bp in 0.2f64..2.0) {
        let fam = HolFamilies::build(&params(rho, r, bm, bp), 12).unwrap();
        let rep = check_thm_hol(&quarter(), &circle_majorant(), &fam, &HolOptions { majorant_samples: 500, ..HolOptions::default() }).unwrap();
        let imp = &rep.implication;
        prop_assert!(imp.holds, "{:?}", imp);
    }
}

#[test]
fn generated_members_are_test_functions() {
    // Every [ZIII] member is nonnegative on the disk.
    for m in &blaschke_families().ziii.members {
        if let TestFn::Field(f) = &m.f {
            for p in [
                Point::xy(0.9, 0.0),
                Point::xy(-0.3, 0.5),
                Point::xy(0.0, -0.99),
            ] {
                assert!(f.eval(&p).to_f64() >= -1e-12);
            }
        }
    }
}

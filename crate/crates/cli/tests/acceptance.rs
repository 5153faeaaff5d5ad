//! Acceptance suite: one line per criterion, tolerances pinned below.
//! Runs without the libtest harness so the lines always print.

use num_complex::Complex64;
use potkit::duality::{pj_presets, verify_poisson_jensen};
use potkit::fields::riesz_measure;
use potkit::green::{green_ball, harmonic_measure};
use potkit::kernels::{k_eval, riesz_normalizer, unit_ball_volume};
use potkit::measures::Component;
use potkit::potentials::asymptotic_check;
use potkit::quadrature::stream;
use potkit::zeros::{poincare_lelong_check, poincare_lelong_refinement, HoloFunction, ZeroAtom};
use potkit::{GridDomain, Measure, Point, ScalarField};
use potkit_cli::checks::MarginRow;
use potkit_cli::run::{verdicts_json, CheckVerdict, Outcome};
use potkit_cli::{execute, load, presets, RunOptions, RunReport};
use rand::Rng;
use std::f64::consts::{LN_2, PI};
use std::time::{Duration, Instant};

const C_D_TOL: f64 = 1e-13;
const MONOTONE_PAIRS: usize = 10_000;
const ASYMPTOTIC_RATIO: f64 = 1.1;
const GREEN_TOL: f64 = 1e-9;
const POISSON_TOL: f64 = 1e-8;
const JENSEN_MARGIN: f64 = -1e-8;
const PJ_TOL: f64 = 1e-6;
const SUBMEAN_PROBES: usize = 500;
const POLE_FIT_REL: f64 = 0.05;
const MASS_TOL: f64 = 1e-9;
const SWEEP_DEGRADE: f64 = 1e-6;
const ROUND_TRIP_TOL: f64 = 0.02;
const GREEN_BOUND_PROBES: usize = 500;
const DENSITY_TOL: f64 = 1e-8;
const WINDOW_REL: f64 = 0.05;
const HALVING: f64 = 0.5;

type Outcome1 = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within_time(start: Instant, limit: Duration) -> Result<Duration, String> {
    let t = start.elapsed();
    ensure(t < limit, || format!("took {t:.2?}, limit {limit:?}"))?;
    Ok(t)
}

fn preset(name: &str) -> RunReport {
    let text = presets::source(name).unwrap_or_else(|| panic!("no preset {name}"));
    let (sc, objects) = load(text, name).unwrap_or_else(|e| panic!("{e}"));
    execute(
        &sc,
        &objects,
        &RunOptions {
            seed: Some(0),
            ..RunOptions::default()
        },
    )
}

fn check<'a>(r: &'a RunReport, id: &str) -> &'a CheckVerdict {
    r.verdicts
        .checks
        .iter()
        .find(|c| c.id == id)
        .unwrap_or_else(|| panic!("no check {id}"))
}

fn rows<'a>(r: &'a RunReport, id: &str) -> Vec<&'a MarginRow> {
    r.margins
        .iter()
        .filter(|(c, _)| c == id)
        .map(|(_, m)| m)
        .collect()
}

fn metric(c: &CheckVerdict, key: &str) -> f64 {
    c.metrics
        .get(key)
        .and_then(|v| v.as_f64())
        .unwrap_or_else(|| panic!("{}: no metric {key}", c.id))
}

fn passed(c: &CheckVerdict) -> Result<(), String> {
    ensure(c.outcome == Outcome::Pass, || {
        format!(
            "{} is {:?}: {}",
            c.id,
            c.outcome,
            c.error.as_deref().unwrap_or(&c.summary)
        )
    })
}

/// `Γ(d/2)` from the factorial and double-factorial closed forms.
fn gamma_half(d: usize) -> f64 {
    if d.is_multiple_of(2) {
        (1..d / 2).map(|k| k as f64).product()
    } else {
        let double_fact: f64 = (1..=d.saturating_sub(2))
            .rev()
            .step_by(2)
            .map(|k| k as f64)
            .product();
        PI.sqrt() * double_fact / 2f64.powi((d as i32 - 1) / 2)
    }
}

fn criterion_1() -> Outcome1 {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for d in 1..=8usize {
        let want = gamma_half(d) / (2.0 * PI.powf(d as f64 / 2.0) * (d as f64 - 2.0).max(1.0));
        worst = worst.max((riesz_normalizer(d) - want).abs());
    }
    let balls = [
        1.0,
        2.0,
        PI,
        4.0 * PI / 3.0,
        PI * PI / 2.0,
        8.0 * PI * PI / 15.0,
    ];
    for (p, want) in balls.iter().enumerate() {
        worst = worst.max((unit_ball_volume(p) - want).abs());
    }
    ensure(worst <= C_D_TOL, || format!("constant error {worst:.2e}"))?;
    let mut rng = stream(0, 11);
    for _ in 0..MONOTONE_PAIRS {
        let q = [-1.0, 0.0, 1.0, 2.0][rng.gen_range(0..4)];
        let t1: f64 = rng.gen_range(1e-3..1e3);
        let t2 = t1 * (1.0 + rng.gen_range(1e-6..1.0));
        let (a, b) = (k_eval(q, t1).unwrap(), k_eval(q, t2).unwrap());
        ensure(a < b, || format!("k_{q} not increasing at ({t1}, {t2})"))?;
    }
    let t = within_time(start, Duration::from_secs(1))?;
    Ok(format!(
        "worst constant error {worst:.1e}, {MONOTONE_PAIRS} monotone pairs, {t:.2?}"
    ))
}

fn asymptotic_measures(d: usize) -> Vec<Measure> {
    let p = |a: f64, b: f64| {
        let mut c = vec![0.0; d];
        c[0] = a;
        c[1] = b;
        Point::new(&c)
    };
    let m = |cs: Vec<Component>| Measure::new(d, cs).unwrap();
    vec![
        Measure::dirac(p(0.5, 0.2)),
        m(vec![
            Component::Atom {
                point: p(0.3, 0.0),
                weight: 1.0,
            },
            Component::Atom {
                point: p(-0.3, 0.0),
                weight: -1.0,
            },
        ]),
        m(vec![Component::SphereUniform {
            center: p(0.2, -0.1),
            radius: 0.5,
            total: 2.0,
        }]),
        m(vec![Component::BallUniform {
            center: p(-0.3, 0.2),
            radius: 0.4,
            total: 1.5,
        }]),
        m(vec![
            Component::Mollifier {
                center: p(0.1, 0.4),
                radius: 0.3,
                total: 1.0,
            },
            Component::Atom {
                point: p(-0.2, -0.2),
                weight: -0.5,
            },
        ]),
    ]
}

fn criterion_2() -> Outcome1 {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for d in [2, 3] {
        for (k, mu) in asymptotic_measures(d).iter().enumerate() {
            let rep = asymptotic_check(mu, &[10.0, 20.0, 40.0]).map_err(|e| e.to_string())?;
            for r in rep.ratios.iter().flatten() {
                worst = worst.max(*r);
                ensure(*r <= ASYMPTOTIC_RATIO, || {
                    format!("measure {k} in d = {d}: ratio {r:.3}")
                })?;
            }
        }
    }
    let t = within_time(start, Duration::from_secs(5))?;
    Ok(format!(
        "largest error ratio {worst:.3} over 10 measures, {t:.2?}"
    ))
}

fn criterion_3() -> Outcome1 {
    let o = Point::xy(0.0, 0.0);
    let g = green_ball(o, 1.0, o).unwrap();
    let gv = g.eval(&Point::xy(0.5, 0.0)).to_f64();
    ensure((gv - LN_2).abs() <= GREEN_TOL, || {
        format!("g(0.5e1, 0) = {gv}")
    })?;
    let x = Point::xy(0.3, 0.2);
    let omega = harmonic_measure(&green_ball(o, 1.0, x).unwrap(), &x).unwrap();
    let probes: [fn(&Point) -> f64; 6] = [
        |_| 1.0,
        |p| p[0],
        |p| p[1],
        |p| p[0] * p[0] - p[1] * p[1],
        |p| p[0] * p[1],
        |p| p[0].exp() * p[1].cos(),
    ];
    let mut worst: f64 = 0.0;
    for h in probes {
        worst = worst.max((omega.integrate_fn(h).to_f64() - h(&x)).abs());
    }
    ensure(worst <= POISSON_TOL, || {
        format!("Poisson error {worst:.2e}")
    })?;
    let r = preset("green-disk");
    let jensen = rows(&r, "jensen");
    ensure(jensen.len() == 20, || {
        format!("{} Jensen probes", jensen.len())
    })?;
    let min = jensen
        .iter()
        .map(|m| m.margin)
        .fold(f64::INFINITY, f64::min);
    ensure(min >= JENSEN_MARGIN, || format!("Jensen margin {min:.2e}"))?;
    Ok(format!(
        "|g - ln 2| = {:.1e}, Poisson error {worst:.1e}, smallest Jensen margin {min:.1e}",
        (gv - LN_2).abs()
    ))
}

fn criterion_4() -> Outcome1 {
    let start = Instant::now();
    let all = pj_presets();
    ensure(all.len() == 12, || format!("{} instances", all.len()))?;
    let mut worst: f64 = 0.0;
    for p in &all {
        let rep = verify_poisson_jensen(&p.theta, &p.mu, &p.u, 1.0)
            .map_err(|e| format!("{}: {e}", p.name))?;
        worst = worst.max(rep.relative_error);
        ensure(rep.relative_error <= PJ_TOL, || {
            format!("{}: relative error {:.2e}", p.name, rep.relative_error)
        })?;
        if p.name == "classical" {
            let (a, b) = rep.rearranged.ok_or("classical instance not rearranged")?;
            ensure(
                (a - 0.5f64.ln()).abs() <= 1e-9 && (b + LN_2).abs() <= 1e-9,
                || format!("classical: {a} vs {b}"),
            )?;
        }
    }
    let t = within_time(start, Duration::from_secs(30))?;
    Ok(format!(
        "worst relative error {worst:.1e} over 12 instances, {t:.2?}"
    ))
}

fn criterion_5() -> Outcome1 {
    let r = preset("gluing");
    for id in ["max", "quantitative", "green"] {
        let c = check(&r, id);
        passed(c)?;
        let probes = rows(&r, id)
            .iter()
            .filter(|m| m.item.starts_with("probe "))
            .count();
        ensure(probes == SUBMEAN_PROBES, || {
            format!("{id}: {probes} probes")
        })?;
    }
    let green = check(&r, "green");
    let bounds = rows(&r, "green")
        .into_iter()
        .find(|m| m.item == "two-sided bounds")
        .ok_or("no bounds row")?;
    ensure(bounds.pass, || {
        format!("bounds violated, worst margin {}", bounds.margin)
    })?;
    // M_g for g_{B(0, 0.4)}(·, 0) on S_o = B̄(0, 0.2) is ln 2.
    let m_g = metric(green, "M_g");
    ensure((m_g - LN_2).abs() <= 1e-9, || format!("M_g = {m_g}"))?;
    let (lo, hi) = (metric(green, "m_v"), metric(green, "M_v"));
    let want = 2.0 * (hi.max(0.0) + (-lo).max(0.0)) / m_g;
    let fit = metric(green, "fitted_coefficient");
    let rel = (fit / want - 1.0).abs();
    ensure(rel <= POLE_FIT_REL, || format!("pole fit {fit} vs {want}"))?;
    Ok(format!(
        "3 gluings x {SUBMEAN_PROBES} probes pass, bounds hold, pole fit {fit:.4} vs {want:.4}"
    ))
}

fn criterion_6() -> Outcome1 {
    let r = preset("lyons-example");
    passed(check(&r, "harmonic"))?;
    let sub = check(&r, "subharmonic");
    ensure(sub.outcome == Outcome::Fail, || {
        format!("subharmonic verdict is {:?}", sub.outcome)
    })?;
    let mass = rows(&r, "harmonic")
        .into_iter()
        .find(|m| m.item == "mass equality")
        .ok_or("no mass row")?;
    let e1 = (mass.lhs - mass.rhs).abs();
    ensure(e1 <= MASS_TOL, || format!("Lyons mass error {e1:.2e}"))?;
    let r = preset("balayage-mollified");
    passed(check(&r, "jensen"))?;
    let sweep = check(&r, "mollified");
    passed(sweep)?;
    let degrade = metric(sweep, "worst_degradation");
    ensure(degrade <= SWEEP_DEGRADE, || {
        format!("margins degrade by {degrade:.2e}")
    })?;
    let swept = rows(&r, "mollified")
        .into_iter()
        .find(|m| m.item == "swept mass")
        .ok_or("no swept mass row")?;
    let e2 = (swept.lhs - swept.rhs).abs();
    ensure(e2 <= MASS_TOL, || format!("swept mass error {e2:.2e}"))?;
    Ok(format!(
        "harmonic PASS, subharmonic FAIL, mass errors {e1:.1e}/{e2:.1e}, degradation {degrade:.1e}"
    ))
}

fn criterion_7() -> Outcome1 {
    let r = preset("duality-round-trip");
    let mut worst: f64 = 0.0;
    for c in &r.verdicts.checks {
        let errs: Vec<f64> = c.metrics["errors"]
            .as_array()
            .ok_or("no errors")?
            .iter()
            .filter_map(|v| v.as_f64())
            .collect();
        ensure(errs.len() == 2, || {
            format!("{}: {} spacings", c.id, errs.len())
        })?;
        ensure(errs[0] <= ROUND_TRIP_TOL && errs[1] < errs[0], || {
            format!("{}: errors {errs:?}", c.id)
        })?;
        worst = worst.max(errs[0]);
    }
    ensure(r.verdicts.checks.len() == 10, || {
        "need 5 + 5 measures".into()
    })?;
    let b = preset("duality-bounds");
    let mut excess = f64::NEG_INFINITY;
    for c in b.verdicts.checks.iter().filter(|c| c.kind == "green_bound") {
        passed(c)?;
        ensure(
            c.summary.contains(&format!("{GREEN_BOUND_PROBES} probes")),
            || c.summary.clone(),
        )?;
        excess = excess.max(metric(c, "max_excess"));
    }
    Ok(format!("worst round-trip error {worst:.2e} at h = 0.02, decreasing at h = 0.01; max (V - g_D) = {excess:.1e}"))
}

fn criterion_8() -> Outcome1 {
    let grid = GridDomain::centered_box(Point::xy(0.0, 0.0), 1.0, 256).unwrap();
    let rm = riesz_measure(&ScalarField::on_space(2, |x: &Point| x.norm_sq()), &grid)
        .map_err(|e| e.to_string())?;
    let vol = grid.cell_volume();
    let mut worst: f64 = 0.0;
    for (i, m) in rm.masses().iter().enumerate() {
        if grid.face_neighbors(i).iter().all(|n| n.is_some()) {
            worst = worst.max((m / vol - 2.0 / PI).abs());
        }
    }
    ensure(worst <= DENSITY_TOL, || {
        format!("density error {worst:.2e}")
    })?;
    let f = HoloFunction::from_roots(&[
        ZeroAtom::new(Complex64::new(0.5, -0.25), 1),
        ZeroAtom::new(Complex64::new(-0.4162, 0.2291), 1),
        ZeroAtom::new(Complex64::new(0.3, 0.6), 2),
    ]);
    let o = Point::xy(0.0, 0.0);
    let fine = GridDomain::centered_box(o, 1.2, 240).unwrap();
    let rep = poincare_lelong_check(&f, &fine).map_err(|e| e.to_string())?;
    let mut wworst: f64 = 0.0;
    for w in &rep.windows {
        let m = w.zero.multiplicity as f64;
        let rel = (w.window_mass - m).abs() / m;
        wworst = wworst.max(rel);
        ensure(rel <= WINDOW_REL, || {
            format!("window mass {} for multiplicity {m}", w.window_mass)
        })?;
    }
    let coarse = GridDomain::centered_box(o, 1.2, 120).unwrap();
    let mut ratio: f64 = 0.0;
    for rec in poincare_lelong_refinement(&f, &coarse).map_err(|e| e.to_string())? {
        ratio = ratio.max(rec.fine_error / rec.coarse_error);
        ensure(rec.fine_error <= HALVING * rec.coarse_error, || {
            format!("error ratio {:.3}", rec.fine_error / rec.coarse_error)
        })?;
    }
    Ok(format!("density error {worst:.1e}; window error {wworst:.2e} at h = 0.01, refinement ratio {ratio:.3}"))
}

fn criterion_9() -> Outcome1 {
    let start = Instant::now();
    for name in ["zeros-polynomial", "zeros-blaschke"] {
        let r = preset(name);
        for c in r
            .verdicts
            .checks
            .iter()
            .filter(|c| c.kind != "poincare_lelong")
        {
            passed(c)?;
            let imp = c
                .metrics
                .get("implication")
                .ok_or_else(|| format!("{name}/{}: no implication", c.id))?;
            let holds = imp.get("holds").and_then(|v| v.as_bool());
            if c.kind == "zero_statements" {
                ensure(holds == Some(true), || {
                    format!("{name}/{}: implication {imp}", c.id)
                })?;
                let (c2, bound) = (
                    imp["c2"].as_f64().unwrap_or(f64::NAN),
                    imp["bound"].as_f64().unwrap_or(f64::NAN),
                );
                ensure(c2 <= bound, || {
                    format!("{name}/{}: C2 = {c2} > {bound}", c.id)
                })?;
            }
        }
    }
    let r = preset("zeros-divergent");
    let c = check(&r, "criterium");
    ensure(
        c.metrics.get("divergent").and_then(|v| v.as_bool()) == Some(true),
        || "divergent zeros not flagged".into(),
    )?;
    ensure(c.met, || "expected failure not met".into())?;
    let t = within_time(start, Duration::from_secs(300))?;
    Ok(format!("polynomial and Blaschke pass ZI/ZII/ZIII and the forward criterion; divergence flagged; {t:.2?}"))
}

fn criterion_10() -> Outcome1 {
    let mut n = 0;
    for name in presets::names() {
        let a = verdicts_json(&preset(name).verdicts);
        let b = verdicts_json(&preset(name).verdicts);
        ensure(a == b, || format!("{name}: verdicts differ between runs"))?;
        n += 1;
    }
    Ok(format!("{n} presets byte-identical across two runs"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome1); 10] = [
        ("kernel constants", criterion_1),
        ("potential asymptotics", criterion_2),
        ("Green function suite", criterion_3),
        ("Poisson-Jensen instances", criterion_4),
        ("gluing", criterion_5),
        ("balayage", criterion_6),
        ("duality", criterion_7),
        ("Riesz density and Poincare-Lelong", criterion_8),
        ("zero statements", criterion_9),
        ("CLI determinism", criterion_10),
    ];
    let mut failed = 0;
    for (k, (name, f)) in criteria.iter().enumerate() {
        let res = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        match res {
            Ok(detail) => println!("criterion {:>2} {name}: PASS ({detail})", k + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} {name}: FAIL ({why})", k + 1);
            }
        }
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}

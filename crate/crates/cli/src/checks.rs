//! Runners for the check kinds of a scenario.

use crate::assemble::{build_majorant, validated_green, Assembled};
use crate::scenario::{CheckSpec, Scenario};
use potkit::balayage::{
    check_linear_scaled, sample_points, AffineOptions, BalayageVerdict, TestFamily,
};
use potkit::duality::{
    certify, phragmen_lindelof_bound, pj_presets, round_trip, to_potential, verify_poisson_jensen,
};
use potkit::fields::{
    check_subharmonic_with, glue_max, glue_quantitative, glue_with_green, layer_extrema,
    random_probes, riesz_measure, GluingSpec, ProbeReport, QuantitativeSpec, DEFAULT_LIMIT_STEP,
    SUBMEAN_TOL,
};
use potkit::green::{green_ball, harmonic_measure};
use potkit::kernels::{k_eval, riesz_normalizer, unit_ball_volume};
use potkit::measures::{convolve_balayage, Mollifier, Sweep};
use potkit::potentials::asymptotic_check;
use potkit::quadrature::{stream, Resolution};
use potkit::zeros::{
    check_criterium3_forward, check_thm_hol, poincare_lelong_check, poincare_lelong_refinement,
    HolFamilies, HolOptions,
};
use potkit::{
    Domain, Error, ExtReal, GridDomain, KernelConfig, Measure, Point, Result, ScalarField,
};
use rand::Rng;
use serde::Serialize;
use serde_json::{json, Value};
use std::collections::BTreeMap;
use std::f64::consts::PI;

/// One row of `margins.csv`. `pass` is authoritative; `margin` is the signed
/// slack as the check defines it (`−|error|` for equalities).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MarginRow {
    pub item: String,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub tol: f64,
    pub pass: bool,
}

impl MarginRow {
    fn equality(item: impl Into<String>, lhs: f64, rhs: f64, tol: f64) -> Self {
        let e = (lhs - rhs).abs();
        MarginRow {
            item: item.into(),
            lhs,
            rhs,
            margin: -e,
            tol,
            pass: e <= tol,
        }
    }

    /// `lhs ≤ rhs` up to `tol`.
    fn at_most(item: impl Into<String>, lhs: f64, rhs: f64, tol: f64) -> Self {
        let m = rhs - lhs;
        MarginRow {
            item: item.into(),
            lhs,
            rhs,
            margin: m,
            tol,
            pass: m >= -tol,
        }
    }
}

/// A field to sample for `fields/*.csv`, with its window in the first two coordinates.
#[derive(Clone, Debug)]
pub struct Plot {
    pub name: String,
    pub field: ScalarField,
    pub window: (Point, Point),
}

#[derive(Clone, Debug)]
pub struct CheckResult {
    pub pass: bool,
    pub summary: String,
    pub metrics: BTreeMap<String, Value>,
    pub margins: Vec<MarginRow>,
    pub plots: Vec<Plot>,
}

impl CheckResult {
    fn new(summary: String, margins: Vec<MarginRow>) -> Self {
        let pass = margins.iter().all(|m| m.pass);
        CheckResult {
            pass,
            summary,
            metrics: BTreeMap::new(),
            margins,
            plots: Vec::new(),
        }
    }

    fn metric(mut self, key: &str, v: Value) -> Self {
        self.metrics.insert(key.to_string(), v);
        self
    }

    fn plot(mut self, name: &str, field: ScalarField, window: (Point, Point)) -> Self {
        self.plots.push(Plot {
            name: name.to_string(),
            field,
            window,
        });
        self
    }
}

/// Run-wide settings shared by all checks.
#[derive(Clone, Debug)]
pub struct Env<'a> {
    pub scenario: &'a Scenario,
    pub objects: &'a Assembled,
    pub seed: u64,
    pub grid: usize,
    pub tol_scale: f64,
}

impl Env<'_> {
    fn measure(&self, name: &str) -> Result<&Measure> {
        self.objects
            .measures
            .get(name)
            .ok_or_else(|| Error::Precondition(format!("unknown measure '{name}'")))
    }

    fn field(&self, name: &str) -> Result<&ScalarField> {
        self.objects
            .fields
            .get(name)
            .ok_or_else(|| Error::Precondition(format!("unknown field '{name}'")))
    }

    fn family(&self, name: &str) -> Result<&TestFamily> {
        self.objects
            .families
            .get(name)
            .ok_or_else(|| Error::Precondition(format!("unknown family '{name}'")))
    }

    fn function(&self, name: &str) -> Result<&potkit::zeros::HoloFunction> {
        self.objects
            .functions
            .get(name)
            .ok_or_else(|| Error::Precondition(format!("unknown function '{name}'")))
    }
}

fn ball_window(c: &Point, r: f64) -> (Point, Point) {
    let mut lo = *c;
    let mut hi = *c;
    for k in 0..c.dim() {
        lo[k] -= r;
        hi[k] += r;
    }
    (lo, hi)
}

fn window_of(dom: &Domain) -> Result<(Point, Point)> {
    dom.bounding_box()
        .ok_or_else(|| Error::Domain("the domain is unbounded; no probing window".into()))
}

/// `c_d` in closed form for `d = 1..8`.
fn closed_c(d: usize) -> Option<f64> {
    Some(match d {
        1 => 0.5,
        2 => 1.0 / (2.0 * PI),
        3 => 1.0 / (4.0 * PI),
        4 => 1.0 / (4.0 * PI * PI),
        5 => 1.0 / (8.0 * PI * PI),
        6 => 1.0 / (4.0 * PI.powi(3)),
        7 => 3.0 / (16.0 * PI.powi(3)),
        8 => 1.0 / (2.0 * PI.powi(4)),
        _ => return None,
    })
}

/// Volume of the unit ball of `ℝ^p` in closed form for `p = 0..5`.
fn closed_b(p: usize) -> Option<f64> {
    Some(match p {
        0 => 1.0,
        1 => 2.0,
        2 => PI,
        3 => 4.0 * PI / 3.0,
        4 => PI * PI / 2.0,
        5 => 8.0 * PI * PI / 15.0,
        _ => return None,
    })
}

fn kernel_constants(
    max_dim: usize,
    max_p: usize,
    pairs: usize,
    env: &Env,
    seed: u64,
) -> Result<CheckResult> {
    let tol = 1e-13 * env.tol_scale;
    let mut rows = Vec::new();
    for d in 1..=max_dim {
        let want =
            closed_c(d).ok_or_else(|| Error::Precondition(format!("no closed form for c_{d}")))?;
        rows.push(MarginRow::equality(
            format!("c_{d}"),
            riesz_normalizer(d),
            want,
            tol,
        ));
    }
    for p in 0..=max_p {
        let want =
            closed_b(p).ok_or_else(|| Error::Precondition(format!("no closed form for b_{p}")))?;
        rows.push(MarginRow::equality(
            format!("b_{p}"),
            unit_ball_volume(p),
            want,
            tol,
        ));
    }
    let mut rng = stream(seed, 1);
    let qs = [-1.0, 0.0, 1.0, 2.0];
    let mut violations = 0usize;
    for _ in 0..pairs {
        let q = qs[rng.gen_range(0..qs.len())];
        let t1 = 10f64.powf(rng.gen_range(-3.0..3.0));
        let t2 = t1 * (1.0 + rng.gen_range(1e-6..1.0));
        if !(k_eval(q, t1)? < k_eval(q, t2)?) {
            violations += 1;
        }
    }
    rows.push(MarginRow {
        item: format!("k_q increasing on {pairs} pairs"),
        lhs: violations as f64,
        rhs: 0.0,
        margin: -(violations as f64),
        tol: 0.0,
        pass: violations == 0,
    });
    let worst = rows
        .iter()
        .take(max_dim + max_p + 1)
        .map(|r| -r.margin)
        .fold(0.0, f64::max);
    Ok(CheckResult::new(
        format!("worst constant error {worst:.2e}; {violations} monotonicity violations"),
        rows,
    )
    .metric("worst_constant_error", json!(worst))
    .metric("monotonicity_violations", json!(violations)))
}

fn asymptotics(mu: &Measure, radii: &[f64]) -> Result<CheckResult> {
    let rep = asymptotic_check(mu, radii)?;
    let mut rows = Vec::new();
    for (k, r) in rep.ratios.iter().enumerate() {
        let ratio = r.unwrap_or(0.0);
        rows.push(MarginRow::at_most(
            format!("e({})/e({})", radii[k + 1], radii[k]),
            ratio,
            1.1,
            0.0,
        ));
    }
    let worst = rep.ratios.iter().flatten().cloned().fold(0.0, f64::max);
    let mut res = CheckResult::new(
        format!("largest error ratio {worst:.3} between doublings"),
        rows,
    )
    .metric("errors", json!(rep.errors))
    .metric("ratios", json!(rep.ratios));
    res.pass &= rep.bounded;
    Ok(res)
}

fn harmonic_probes() -> Vec<(&'static str, fn(&Point) -> f64)> {
    vec![
        ("1", |_| 1.0),
        ("x", |p| p[0]),
        ("y", |p| p[1]),
        ("x^2-y^2", |p| p[0] * p[0] - p[1] * p[1]),
        ("xy", |p| p[0] * p[1]),
        ("e^x cos y", |p| p[0].exp() * p[1].cos()),
    ]
}

fn poisson_reproduction(center: &Point, radius: f64, at: &Point, env: &Env) -> Result<CheckResult> {
    let omega = harmonic_measure(&green_ball(*center, radius, *at)?, at)?;
    let mut rows = Vec::new();
    for (name, h) in harmonic_probes() {
        let lhs = omega.integrate_fn(h).to_f64();
        let rhs = h(at);
        rows.push(MarginRow::equality(
            name,
            lhs,
            rhs,
            1e-8 * env.tol_scale * (1.0 + rhs.abs()),
        ));
    }
    let worst = rows.iter().map(|r| -r.margin).fold(0.0, f64::max);
    Ok(CheckResult::new(
        format!("worst reproduction error {worst:.2e} over 6 harmonic probes"),
        rows,
    ))
}

/// Twenty subharmonic functions adapted to the ball `B(c, R)`.
fn subharmonic_probes(c: &Point, r: f64) -> Vec<(String, ScalarField)> {
    let d = c.dim();
    let cfg = KernelConfig { d };
    let c = *c;
    let mut out: Vec<(String, ScalarField)> = Vec::new();
    for (ring, f) in [(0.5, "in"), (1.5, "out")] {
        for k in 0..4 {
            let t = PI / 2.0 * k as f64 + 0.3;
            let mut y = c;
            y[0] += ring * r * t.cos();
            y[1] += ring * r * t.sin();
            out.push((
                format!("K(.,y_{f}{k})"),
                ScalarField::new(Domain::Space { dim: d }, move |x| cfg.kernel(x, &y)),
            ));
        }
    }
    let floor = cfg.radial(0.25 * r);
    for k in 0..2 {
        let mut y = c;
        y[k] += 0.5 * r;
        out.push((
            format!("max(K(.,z{k}),k(R/4))"),
            ScalarField::new(Domain::Space { dim: d }, move |x| {
                cfg.kernel(x, &y).max(ExtReal::Finite(floor))
            }),
        ));
    }
    let smooth: Vec<(&str, Box<dyn Fn(&Point) -> f64 + Send + Sync>)> = vec![
        ("|x-c|^2", Box::new(move |x: &Point| (*x - c).norm_sq())),
        (
            "|x-c|^4",
            Box::new(move |x: &Point| (*x - c).norm_sq().powi(2)),
        ),
        ("e^x", Box::new(|x: &Point| x[0].exp())),
        ("e^-y", Box::new(|x: &Point| (-x[1]).exp())),
        ("|x - c_x|", Box::new(move |x: &Point| (x[0] - c[0]).abs())),
        ("max(x, y)", Box::new(|x: &Point| x[0].max(x[1]))),
        ("1", Box::new(|_: &Point| 1.0)),
        ("-1", Box::new(|_: &Point| -1.0)),
        ("x + y", Box::new(|x: &Point| x[0] + x[1])),
        ("ln(1+|x|^2)", Box::new(|x: &Point| x.norm_sq().ln_1p())),
    ];
    for (name, f) in smooth {
        out.push((name.to_string(), ScalarField::on_space(d, f)));
    }
    out
}

fn jensen_inequality(center: &Point, radius: f64, at: &Point, env: &Env) -> Result<CheckResult> {
    let omega = harmonic_measure(&green_ball(*center, radius, *at)?, at)?;
    let tol = 1e-8 * env.tol_scale;
    let mut rows = Vec::new();
    for (name, u) in subharmonic_probes(center, radius) {
        let lhs = u.eval(at).to_f64();
        let rhs = omega.integrate(&u).to_f64();
        rows.push(MarginRow::at_most(name, lhs, rhs, tol));
    }
    let worst = rows.iter().map(|r| r.margin).fold(f64::INFINITY, f64::min);
    Ok(CheckResult::new(
        format!(
            "smallest margin {worst:.3e} over {} subharmonic probes",
            rows.len()
        ),
        rows,
    ))
}

fn probe_rows(prefix: &str, rep: &ProbeReport) -> Vec<MarginRow> {
    rep.records
        .iter()
        .enumerate()
        .map(|(k, r)| MarginRow {
            item: format!("{prefix}{k}"),
            lhs: r.value.to_f64(),
            rhs: r.average.to_f64(),
            margin: r.margin,
            tol: r.tol,
            pass: r.pass,
        })
        .collect()
}

fn submean(
    v: &ScalarField,
    dom: &Domain,
    n: usize,
    min_r: f64,
    avoid: &[Point],
    env: &Env,
    seed: u64,
) -> Result<ProbeReport> {
    let window = window_of(dom)?;
    let probes = random_probes(dom, Some(window), n, min_r, avoid, seed)?;
    check_subharmonic_with(
        v,
        &probes,
        SUBMEAN_TOL * env.tol_scale,
        &Resolution::DEFAULT,
    )
}

fn probe_summary(rep: &ProbeReport) -> String {
    let worst = rep.worst().map_or(0.0, |r| r.margin);
    format!(
        "{} of {} sub-mean probes violated; smallest margin {worst:.3e}",
        rep.violations,
        rep.records.len()
    )
}

fn glued(
    name: &str,
    v: ScalarField,
    dom: Domain,
    n: usize,
    env: &Env,
    seed: u64,
) -> Result<CheckResult> {
    let rep = submean(&v, &dom, n, 1e-3, &[], env, seed)?;
    let window = window_of(&dom)?;
    Ok(CheckResult::new(probe_summary(&rep), probe_rows("probe ", &rep)).plot(name, v, window))
}

#[allow(clippy::too_many_arguments)]
fn green_gluing(
    v: &ScalarField,
    green: &potkit::green::GreenModel,
    s_o: &Domain,
    s: &Domain,
    outer: &Domain,
    bounds: Option<(f64, f64)>,
    n: usize,
    env: &Env,
    seed: u64,
) -> Result<CheckResult> {
    let green = validated_green(green)?;
    let (lower, upper) = match bounds {
        Some(b) => b,
        None => layer_extrema(v, s_o, s, 81)?,
    };
    let g = glue_with_green(v, &green, s_o, s, outer, lower, upper)?;
    let o = green.pole;
    let dom = Domain::punctured(outer.clone(), &[o]);
    let rep = submean(&g.field, &dom, n, 1e-3, &[o], env, seed)?;
    let mut rows = probe_rows("probe ", &rep);
    // Two-sided bounds at the probe centres and at 100 points of S_o.
    let mut pts: Vec<Point> = rep.records.iter().map(|r| r.x).collect();
    pts.extend(sample_points(
        &Domain::punctured(s_o.clone(), &[o]),
        100,
        seed.wrapping_add(1),
    )?);
    let bounds = g.check_bounds(v, &pts);
    rows.push(MarginRow {
        item: "two-sided bounds".into(),
        lhs: (bounds.layer_violations + bounds.core_violations) as f64,
        rhs: 0.0,
        margin: bounds.worst_margin,
        tol: 0.0,
        pass: bounds.pass,
    });
    let fit = g.default_pole_fit()?;
    let rel = (fit.coefficient / g.coefficient - 1.0).abs();
    rows.push(MarginRow {
        item: "pole coefficient".into(),
        lhs: fit.coefficient,
        rhs: g.coefficient,
        margin: -rel,
        tol: 0.05 * env.tol_scale,
        pass: rel <= 0.05 * env.tol_scale,
    });
    let window = window_of(outer)?;
    Ok(CheckResult::new(
        format!(
            "{}; bounds {}; pole fit {:.4} vs {:.4}",
            probe_summary(&rep),
            if bounds.pass { "hold" } else { "violated" },
            fit.coefficient,
            g.coefficient
        ),
        rows,
    )
    .metric("m_v", json!(lower))
    .metric("M_v", json!(upper))
    .metric("M_g", json!(g.m_g))
    .metric("coefficient", json!(g.coefficient))
    .metric("fitted_coefficient", json!(fit.coefficient))
    .metric("fit_r_squared", json!(fit.r_squared))
    .plot("V", g.field.clone(), window))
}

fn verdict_rows(prefix: &str, v: &BalayageVerdict) -> Vec<MarginRow> {
    v.margins
        .iter()
        .map(|m| MarginRow {
            item: format!("{prefix}{}", m.label),
            lhs: m.lhs.to_f64(),
            rhs: m.rhs.to_f64(),
            margin: m.margin,
            tol: m.tol,
            pass: m.pass,
        })
        .collect()
}

fn has_label(fam: &TestFamily, label: &str) -> bool {
    fam.members.iter().any(|m| m.label == label)
}

fn balayage(theta: &Measure, mu: &Measure, fam: &TestFamily, env: &Env) -> Result<CheckResult> {
    let v = check_linear_scaled(theta, mu, fam, env.tol_scale)?;
    let mut rows = verdict_rows("", &v);
    let tol = 1e-9 * env.tol_scale;
    let (a, b) = (theta.total_mass(), mu.total_mass());
    // Constants in the family turn a pass into mass relations.
    let mass_row = match (has_label(fam, "constant +1"), has_label(fam, "constant -1")) {
        (true, true) => Some(MarginRow::equality("mass equality", a, b, tol)),
        (true, false) => Some(MarginRow::at_most("mass inequality", a, b, tol)),
        _ => None,
    };
    let mut pass = v.pass;
    if let Some(r) = mass_row {
        if v.pass {
            pass &= r.pass;
        }
        rows.push(r);
    }
    let witness = v.witness_label.clone().unwrap_or_else(|| "-".into());
    let mut res = CheckResult::new(
        format!(
            "{} over {} members; worst margin {:.3e} at {witness}",
            if v.pass { "pass" } else { "fail" },
            fam.len(),
            v.worst_margin
        ),
        rows,
    )
    .metric("worst_margin", json!(v.worst_margin))
    .metric("witness", json!(v.witness_label))
    .metric("theta_mass", json!(a))
    .metric("mu_mass", json!(b));
    res.pass = pass;
    Ok(res)
}

fn sweep_closure(
    theta: &Measure,
    mu: &Measure,
    fam: &TestFamily,
    radius: f64,
    env: &Env,
) -> Result<CheckResult> {
    let before = check_linear_scaled(theta, mu, fam, env.tol_scale)?;
    let swept = convolve_balayage(
        mu,
        &Sweep::Mollifier(Mollifier::new(radius)?),
        &Resolution::DEFAULT,
    )?;
    let after = check_linear_scaled(theta, &swept, fam, env.tol_scale)?;
    let tol = 1e-6 * env.tol_scale;
    let mut rows = vec![MarginRow::equality(
        "swept mass",
        swept.total_mass(),
        mu.total_mass(),
        1e-9 * env.tol_scale,
    )];
    let mut worst: f64 = 0.0;
    for (a, b) in before.margins.iter().zip(&after.margins) {
        let drop = a.margin - b.margin;
        worst = worst.max(drop);
        rows.push(MarginRow::at_most(
            format!("degradation {}", a.label),
            drop,
            0.0,
            tol,
        ));
    }
    let mut res = CheckResult::new(
        format!("largest margin loss {worst:.3e} after sweeping (r = {radius})"),
        rows,
    )
    .metric("before_pass", json!(before.pass))
    .metric("after_pass", json!(after.pass))
    .metric("worst_degradation", json!(worst));
    res.pass &= before.pass && after.pass;
    Ok(res)
}

fn poisson_jensen(instances: &[String], env: &Env) -> Result<CheckResult> {
    let all = pj_presets();
    let chosen: Vec<_> = if instances.iter().any(|s| s == "*") {
        all
    } else {
        let mut v = Vec::new();
        for name in instances {
            let p = all.iter().find(|p| p.name == name).ok_or_else(|| {
                Error::Precondition(format!("unknown Poisson–Jensen instance '{name}'"))
            })?;
            v.push(p.clone());
        }
        v
    };
    let mut rows = Vec::new();
    let mut details = serde_json::Map::new();
    for p in &chosen {
        let r = verify_poisson_jensen(&p.theta, &p.mu, &p.u, env.tol_scale)?;
        rows.push(MarginRow {
            item: p.name.to_string(),
            lhs: r.lhs.to_f64(),
            rhs: r.rhs.to_f64(),
            margin: -r.relative_error,
            tol: r.tol,
            pass: r.pass,
        });
        details.insert(
            p.name.to_string(),
            json!({
                "u_theta": r.u_theta.to_f64(),
                "u_mu": r.u_mu.to_f64(),
                "pt_theta": r.pt_theta.to_f64(),
                "pt_mu": r.pt_mu.to_f64(),
                "relative_error": r.relative_error,
                "rearranged": r.rearranged,
            }),
        );
    }
    let worst = rows.iter().map(|r| -r.margin).fold(0.0, f64::max);
    Ok(CheckResult::new(
        format!("{} instances; worst relative error {worst:.2e}", rows.len()),
        rows,
    )
    .metric("instances", Value::Object(details)))
}

#[allow(clippy::too_many_arguments)]
fn round_trip_check(
    mu: &Measure,
    at: &Point,
    class: potkit::duality::MeasureClass,
    center: &Point,
    half_width: f64,
    spacings: &[f64],
    tol: f64,
    env: &Env,
) -> Result<CheckResult> {
    let cert = certify(mu, at, class)?;
    if !cert.verdict.pass {
        return Err(Error::Precondition(format!(
            "{class:?} certification failed (worst margin {:.3e})",
            cert.verdict.worst_margin
        )));
    }
    let mut rows = Vec::new();
    let mut errors = Vec::new();
    for (k, h) in spacings.iter().enumerate() {
        let n = (2.0 * half_width / h).round() as usize;
        let grid = GridDomain::centered_box(*center, half_width, n)?;
        let rt = round_trip(mu, at, &cert, &grid)?;
        let limit = if k == 0 {
            tol * env.tol_scale
        } else {
            errors[k - 1]
        };
        let mut row = MarginRow::at_most(
            format!("probe error at h = {h}"),
            rt.probe_error,
            limit,
            0.0,
        );
        if k > 0 {
            // Refinement must improve, unless already at round-off.
            row.pass = rt.probe_error < limit || rt.probe_error < 1e-6;
        }
        rows.push(row);
        errors.push(rt.probe_error);
    }
    Ok(CheckResult::new(
        format!(
            "probe errors {}",
            errors
                .iter()
                .map(|e| format!("{e:.3e}"))
                .collect::<Vec<_>>()
                .join(" -> ")
        ),
        rows,
    )
    .metric("errors", json!(errors))
    .metric("spacings", json!(spacings)))
}

fn green_bound(
    mu: &Measure,
    at: &Point,
    class: potkit::duality::MeasureClass,
    green: &potkit::green::GreenModel,
    layer: Option<&(Domain, f64)>,
    seed: u64,
) -> Result<CheckResult> {
    let green = validated_green(green)?;
    let cert = certify(mu, at, class)?;
    let v = to_potential(mu, at, &cert)?;
    let rep = phragmen_lindelof_bound(&v, &green, layer.map(|(d, r)| (d, *r)), seed)?;
    let mut rows = vec![MarginRow::at_most(
        "max (V - g_D)",
        rep.max_excess,
        0.0,
        1e-7,
    )];
    if let (Some(b), Some(obs)) = (rep.lower_bound, rep.observed_inf) {
        rows.push(MarginRow::at_most("lower bound", b, obs, 1e-9));
    }
    let mut res = CheckResult::new(
        format!(
            "max (V - g_D) = {:.3e} over {} probes",
            rep.max_excess, rep.probes
        ),
        rows,
    )
    .metric("max_excess", json!(rep.max_excess))
    .metric("lower_bound", json!(rep.lower_bound))
    .metric("observed_inf", json!(rep.observed_inf))
    .plot(
        "V",
        v.field.clone(),
        ball_window(&green.center, green.radius),
    );
    res.pass = rep.pass;
    Ok(res)
}

fn riesz_density(
    v: &ScalarField,
    center: &Point,
    half_width: f64,
    expected: f64,
    tol: f64,
    env: &Env,
) -> Result<CheckResult> {
    let grid = GridDomain::centered_box(*center, half_width, env.grid)?;
    let rm = riesz_measure(v, &grid)?;
    let vol = grid.cell_volume();
    let mut worst: f64 = 0.0;
    let mut cells = 0usize;
    for (i, m) in rm.masses().iter().enumerate() {
        let interior = grid.face_neighbors(i).iter().all(|n| n.is_some());
        if interior {
            cells += 1;
            worst = worst.max((m / vol - expected).abs());
        }
    }
    let row = MarginRow {
        item: format!("max |density - {expected}| over {cells} cells"),
        lhs: worst,
        rhs: 0.0,
        margin: -worst,
        tol: tol * env.tol_scale,
        pass: worst <= tol * env.tol_scale,
    };
    Ok(CheckResult::new(
        format!(
            "worst density error {worst:.2e} at h = {:.4}",
            grid.spacing()
        ),
        vec![row],
    )
    .metric("spacing", json!(grid.spacing()))
    .metric("singular_cells", json!(rm.singular_cells.len())))
}

fn poincare_lelong(
    f: &potkit::zeros::HoloFunction,
    center: &Point,
    half_width: f64,
    cells: usize,
    env: &Env,
) -> Result<CheckResult> {
    if !cells.is_multiple_of(2) {
        return Err(Error::Precondition(format!(
            "{cells} cells cannot be halved for the refinement test"
        )));
    }
    let grid = GridDomain::centered_box(*center, half_width, cells)?;
    let rep = poincare_lelong_check(f, &grid)?;
    let coarse = GridDomain::centered_box(*center, half_width, cells / 2)?;
    let refinement = poincare_lelong_refinement(f, &coarse)?;
    let mut rows = Vec::new();
    for w in &rep.windows {
        let m = w.zero.multiplicity as f64;
        rows.push(MarginRow::equality(
            format!("window mass at ({:.4}, {:.4})", w.zero.re, w.zero.im),
            w.window_mass,
            m,
            potkit::zeros::WINDOW_TOL * env.tol_scale * m,
        ));
    }
    for r in &refinement {
        rows.push(MarginRow::at_most(
            format!("error ratio at ({:.4}, {:.4})", r.zero.re, r.zero.im),
            r.ratio,
            potkit::zeros::HALVING_RATIO,
            0.0,
        ));
    }
    let mut res = CheckResult::new(
        format!(
            "{} zeros; worst window error {:.2e} at h = {:.4}",
            rep.windows.len(),
            rep.windows
                .iter()
                .map(|w| w.relative_error)
                .fold(0.0, f64::max),
            grid.spacing()
        ),
        rows,
    )
    .metric("total_mass", json!(rep.total_mass))
    .metric("stray_mass", json!(rep.stray_mass))
    .metric("refinement", json!(refinement))
    .plot("ln_abs", f.ln_abs_field(), ball_window(center, half_width));
    if rep.windows.is_empty() {
        res.pass &= rep.pass;
    }
    Ok(res)
}

fn hol_options(env: &Env, seed: u64, probe_scaling: bool) -> HolOptions {
    HolOptions {
        affine: AffineOptions {
            probe_scaling,
            seed,
            tol_scale: env.tol_scale,
        },
        ..HolOptions::default()
    }
}

fn variant_rows(rows: &mut Vec<MarginRow>, v: &potkit::zeros::VariantReport) {
    rows.extend(verdict_rows(&format!("{} ", v.name), &v.verdict));
    rows.push(MarginRow {
        item: format!("{} constant", v.name),
        lhs: v.constant(),
        rhs: f64::INFINITY,
        margin: if v.verdict.pass {
            0.0
        } else {
            f64::NEG_INFINITY
        },
        tol: 0.0,
        pass: v.verdict.pass,
    });
}

fn implication_row(imp: &potkit::zeros::ImplicationCheck) -> MarginRow {
    MarginRow {
        item: "C2 <= C1 + max(b+, -b-) |mu_M|(layer)".into(),
        lhs: imp.c2,
        rhs: imp.bound,
        margin: imp.bound - imp.c2,
        tol: 0.0,
        pass: imp.holds,
    }
}

fn constants_json(vs: &[potkit::zeros::VariantReport]) -> Value {
    Value::Object(
        vs.iter()
            .map(|v| (v.name.clone(), json!(v.verdict.constant)))
            .collect(),
    )
}

/// Runs one check. `index` is the check's position in the scenario.
pub fn run_check(spec: &CheckSpec, env: &Env, index: usize) -> Result<CheckResult> {
    let seed = env.seed.wrapping_add(index as u64);
    match spec {
        CheckSpec::KernelConstants {
            max_dim,
            max_p,
            pairs,
        } => kernel_constants(*max_dim, *max_p, *pairs, env, seed),
        CheckSpec::Asymptotics { measure, radii } => asymptotics(env.measure(measure)?, radii),
        CheckSpec::GreenValue {
            green,
            at,
            expected,
            tol,
        } => {
            let g = validated_green(green)?;
            let val = g.eval(at).to_f64();
            let row = MarginRow::equality("g(at)", val, *expected, tol * env.tol_scale);
            Ok(CheckResult::new(format!("g = {val:.15}"), vec![row]).plot(
                "g",
                g.field(),
                ball_window(&g.center, g.radius),
            ))
        }
        CheckSpec::PoissonReproduction { center, radius, at } => {
            poisson_reproduction(center, *radius, at, env)
        }
        CheckSpec::JensenInequality { center, radius, at } => {
            jensen_inequality(center, *radius, at, env)
        }
        CheckSpec::Subharmonic {
            field,
            domain,
            probes,
            min_radius,
            avoid,
        } => {
            let rep = submean(
                env.field(field)?,
                domain,
                *probes,
                *min_radius,
                avoid,
                env,
                seed,
            )?;
            Ok(CheckResult::new(
                probe_summary(&rep),
                probe_rows("probe ", &rep),
            ))
        }
        CheckSpec::MaxGluing {
            o,
            v,
            o0,
            v0,
            probes,
        } => {
            let spec = GluingSpec::new(
                o.clone(),
                env.field(v)?.clone(),
                o0.clone(),
                env.field(v0)?.clone(),
            );
            let out = glue_max(&spec)?;
            glued(
                "V",
                out,
                Domain::Union {
                    parts: vec![o.clone(), o0.clone()],
                },
                *probes,
                env,
                seed,
            )
        }
        CheckSpec::QuantitativeGluing {
            o,
            v,
            o0,
            g,
            lower_v,
            upper_v,
            lower_g,
            upper_g,
            probes,
        } => {
            let spec = QuantitativeSpec {
                o: o.clone(),
                v: env.field(v)?.clone(),
                o0: o0.clone(),
                g: env.field(g)?.clone(),
                lower_v: *lower_v,
                upper_v: *upper_v,
                lower_g: *lower_g,
                upper_g: *upper_g,
                step: DEFAULT_LIMIT_STEP,
            };
            let out = glue_quantitative(&spec)?;
            glued(
                "V",
                out,
                Domain::Union {
                    parts: vec![o.clone(), o0.clone()],
                },
                *probes,
                env,
                seed,
            )
        }
        CheckSpec::GreenGluing {
            v,
            green,
            s_o,
            s,
            outer,
            bounds,
            probes,
        } => green_gluing(
            env.field(v)?,
            green,
            s_o,
            s,
            outer,
            *bounds,
            *probes,
            env,
            seed,
        ),
        CheckSpec::Balayage { theta, mu, family } => balayage(
            env.measure(theta)?,
            env.measure(mu)?,
            env.family(family)?,
            env,
        ),
        CheckSpec::SweepClosure {
            theta,
            mu,
            family,
            radius,
        } => sweep_closure(
            env.measure(theta)?,
            env.measure(mu)?,
            env.family(family)?,
            *radius,
            env,
        ),
        CheckSpec::PoissonJensen { instances } => poisson_jensen(instances, env),
        CheckSpec::RoundTrip {
            measure,
            at,
            class,
            center,
            half_width,
            spacings,
            tol,
        } => round_trip_check(
            env.measure(measure)?,
            at,
            *class,
            center,
            *half_width,
            spacings,
            *tol,
            env,
        ),
        CheckSpec::GreenBound {
            measure,
            at,
            class,
            green,
            layer,
        } => green_bound(
            env.measure(measure)?,
            at,
            *class,
            green,
            layer.as_ref(),
            seed,
        ),
        CheckSpec::RieszDensity {
            field,
            center,
            half_width,
            expected,
            tol,
        } => riesz_density(env.field(field)?, center, *half_width, *expected, *tol, env),
        CheckSpec::PoincareLelong {
            function,
            center,
            half_width,
            cells,
        } => poincare_lelong(
            env.function(function)?,
            center,
            *half_width,
            cells.unwrap_or(env.grid),
            env,
        ),
        CheckSpec::ZeroStatements {
            function,
            majorant,
            params,
            family_size,
            probe_scaling,
        } => {
            let fams = HolFamilies::build(&checked_params(params)?, *family_size)?;
            let m = build_majorant(majorant, env.objects)?;
            let rep = check_thm_hol(
                env.function(function)?,
                &m,
                &fams,
                &hol_options(env, seed, *probe_scaling),
            )?;
            let mut rows = Vec::new();
            for v in &rep.variants {
                variant_rows(&mut rows, v);
            }
            rows.push(implication_row(&rep.implication));
            let mut res = CheckResult::new(
                format!(
                    "ZI/ZII/ZIII constants {}; implication {}",
                    rep.variants
                        .iter()
                        .map(|v| format!("{:.4}", v.constant()))
                        .collect::<Vec<_>>()
                        .join(" / "),
                    if rep.implication.holds {
                        "holds"
                    } else {
                        "fails"
                    }
                ),
                rows,
            )
            .metric("constants", constants_json(&rep.variants))
            .metric("implication", json!(rep.implication))
            .metric("zeros", json!(rep.zeros.len()));
            res.pass = rep.pass;
            Ok(res)
        }
        CheckSpec::CriteriumForward {
            function,
            majorant,
            params,
            family_size,
            z4_family_size,
        } => {
            let fams = HolFamilies::build(&checked_params(params)?, *family_size)?;
            let m = build_majorant(majorant, env.objects)?;
            let f = env.function(function)?;
            let z = f.zeros()?;
            let rep = check_criterium3_forward(
                &z,
                f,
                &m,
                &fams,
                *z4_family_size,
                &hol_options(env, seed, false),
            )?;
            let mut rows = Vec::new();
            for v in &rep.stages {
                variant_rows(&mut rows, v);
            }
            rows.push(implication_row(&rep.implication));
            rows.push(MarginRow {
                item: "prefix constants bounded".into(),
                lhs: rep.growth.constants.last().cloned().unwrap_or(f64::NAN),
                rhs: rep.growth.constants.first().cloned().unwrap_or(f64::NAN),
                margin: if rep.growth.divergent {
                    f64::NEG_INFINITY
                } else {
                    0.0
                },
                tol: 0.0,
                pass: !rep.growth.divergent,
            });
            let mut res = CheckResult::new(
                format!(
                    "stages {}; Blaschke sum {:.6}; growth {}",
                    if rep.stages.iter().all(|s| s.verdict.pass) {
                        "pass"
                    } else {
                        "fail"
                    },
                    rep.blaschke_sum,
                    if rep.growth.divergent {
                        "divergent"
                    } else {
                        "bounded"
                    }
                ),
                rows,
            )
            .metric("constants", constants_json(&rep.stages))
            .metric("implication", json!(rep.implication))
            .metric("blaschke_sum", json!(rep.blaschke_sum))
            .metric("growth", json!(rep.growth))
            .metric("divergent", json!(rep.growth.divergent));
            res.pass = rep.pass;
            Ok(res)
        }
    }
}

fn checked_params(p: &potkit::balayage::ClassParams) -> Result<potkit::balayage::ClassParams> {
    let mut p = p.clone();
    p.green = validated_green(&p.green)?;
    Ok(p)
}
